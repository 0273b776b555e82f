//! TOML run configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::benchmarks::{benchmark, Benchmark, BENCHMARK_NAMES};
use crate::domain::{
    BoundaryCondition, BoundaryConditions, BoundarySegment, DesignProblem, Direction, DragLaw,
    Geometry, MaterialModel, OptimizerSettings, Source, StructuredGrid,
};
use crate::error::{Error, Result};
use crate::primal::SolverSettings;

/// Problem selection: a built-in name, or a custom geometry with tagged
/// boundary segments and conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Cells (radial/1D) or cells across the short side (planar built-ins).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Geometry>,
    /// Custom segments; omitted means one segment per side named after it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<Vec<BoundarySegment>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<BTreeMap<String, BoundaryCondition>>,
    /// Uniform volumetric source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub law: DragLaw,
    pub mu0: f64,
    #[serde(default)]
    pub beta_b: f64,
    #[serde(default)]
    pub beta_f: f64,
}

impl ModelConfig {
    pub fn build(&self) -> Result<MaterialModel> {
        MaterialModel::new(self.law, self.mu0, self.beta_b, self.beta_f)
    }
}

/// Design settings; unset values fall back to the built-in problem's.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub penal: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kh: Option<f64>,
    /// Initial uniform density; defaults to gamma.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<f64>,
    #[serde(default)]
    pub optimizer: OptimizerSettings,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelConfig>,
    #[serde(default)]
    pub design: DesignConfig,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_seed() -> u64 {
    42
}

/// Everything a command needs, resolved from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct ResolvedRun {
    pub problem: DesignProblem,
    pub model: MaterialModel,
    pub initial: Vec<f64>,
    pub oracle_interface: Option<f64>,
    pub name: String,
}

impl RunConfig {
    pub fn builtin(name: &str) -> Self {
        Self {
            seed: default_seed(),
            problem: ProblemConfig {
                builtin: Some(name.to_string()),
                resolution: None,
                geometry: None,
                segments: None,
                boundary: None,
                source: None,
            },
            model: None,
            design: DesignConfig::default(),
            solver: SolverSettings::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(&self) -> Result<ResolvedRun> {
        let p = &self.problem;
        let base: Option<Benchmark> = match (&p.builtin, &p.geometry) {
            (Some(name), None) => {
                if p.segments.is_some() || p.boundary.is_some() {
                    return Err(Error::Config(
                        "built-in problems take no segments or boundary table".into(),
                    ));
                }
                Some(benchmark(name, p.resolution)?)
            }
            (None, Some(_)) => None,
            _ => {
                return Err(Error::Config(
                    "[problem] needs exactly one of `builtin` or `geometry`".into(),
                ))
            }
        };
        let (grid, bcs, mut source) = match &base {
            Some(b) => (b.grid.clone(), b.bcs.clone(), b.source.clone()),
            None => {
                let geometry = p.geometry.clone().expect("checked above");
                let grid = match &p.segments {
                    Some(s) => StructuredGrid::with_segments(geometry, s.clone())?,
                    None => StructuredGrid::new(geometry)?,
                };
                let table = p.boundary.as_ref().ok_or_else(|| {
                    Error::Config("custom problems need a [problem.boundary] table".into())
                })?;
                let bcs = table
                    .iter()
                    .fold(BoundaryConditions::new(), |acc, (t, bc)| {
                        acc.with(t.clone(), *bc)
                    });
                (grid, bcs, Source::default())
            }
        };
        if let Some(q) = p.source {
            source = Source::Uniform(q);
        }
        let model = match (&self.model, &base) {
            (Some(m), _) => m.build()?,
            (None, Some(b)) => b.model,
            (None, None) => MaterialModel::darcy(1.0)?,
        };
        let d = &self.design;
        let gamma = d.gamma.or(base.as_ref().map(|b| b.gamma)).unwrap_or(0.3);
        let kl = d.kl.or(base.as_ref().map(|b| b.kl)).unwrap_or(1.0);
        let kh = d.kh.or(base.as_ref().map(|b| b.kh)).unwrap_or(10.0);
        let mut problem = DesignProblem::new(grid, bcs, source, gamma, kl, kh)?;
        if let Some(dir) = d.direction.or(base.as_ref().map(|b| b.direction)) {
            problem.direction = dir;
        }
        problem.penal = d.penal.or(base.as_ref().map(|b| b.penal)).unwrap_or(3.0);
        problem.optimizer = d.optimizer;
        problem.solver = self.solver;
        problem.validate()?;
        let init = d.initial.unwrap_or(gamma);
        crate::error::check_range("initial density", init, 0.0, 1.0, "[0, 1]")?;
        let initial = vec![init; problem.grid.n_cells()];
        // The kh/kl overrides move the analytic optimum.
        let oracle_interface = match base.as_ref().map(|b| b.name.as_str()) {
            Some("annulus-radial") => {
                Some(crate::analytic::optimal_interface_2d(gamma, 0.1, 1.0, kl, kh)?.xi_hat)
            }
            Some("sphere-radial") => {
                Some(crate::analytic::optimal_interface_3d(gamma, 0.1, kl, kh)?.xi_hat)
            }
            _ => None,
        };
        Ok(ResolvedRun {
            problem,
            model,
            initial,
            oracle_interface,
            name: p.builtin.clone().unwrap_or_else(|| "custom".into()),
        })
    }
}

/// Annotated reference configuration listing every key with its default.
pub fn reference_config() -> String {
    let o = OptimizerSettings::default();
    let s = SolverSettings::default();
    format!(
        r#"# Run configuration reference. Every key is shown with its default.
seed = 42

[problem]
# One of: {names}
builtin = "annulus-radial"
# resolution = 256          # cells (radial/1D) or cells across the short side (planar)
# source = 0.0              # uniform volumetric source, overrides the built-in value
#
# A custom problem replaces `builtin` with a geometry, optional segments and
# a boundary table keyed by segment tag, e.g.
# geometry = {{ kind = "cartesian-2d", x0 = 0.0, x1 = 2.0, nx = 40, y0 = 0.0, y1 = 1.5, ny = 30 }}
# segments = [{{ side = "left", start = 0.0, end = 1.0, tag = "left" }}, ...]
# [problem.boundary]
# left = {{ kind = "prescribed-pressure", value = 100.0 }}
# right = {{ kind = "prescribed-normal-velocity", value = 0.0 }}

# [model]                   # omitted: the built-in's model (Darcy, mu0 = 1)
# law = "darcy"             # darcy | barus | linearized-barus | darcy-forchheimer
# mu0 = 1.0
# beta_b = 0.0
# beta_f = 0.0

[design]
# gamma = 0.3               # built-in value when omitted
# direction = "maximize"    # maximize | minimize; built-in or BC-derived default
# penal = 3.0               # built-in value when omitted
# kl = 1.0
# kh = 10.0
# initial = 0.3             # uniform initial density, defaults to gamma

[design.optimizer]
max_iterations = {mi}
move_limit = {ml}
eta = {eta}
filter_radius = {fr}          # in cell widths
tolerance = {tol}
max_halvings = {mh}

[solver]
picard_tol = {pt:e}
picard_max_iter = {pm}
linear_tol = {lt:e}
linear_max_iter = {lm}
# relaxation = 0.7          # law default: Barus 0.7, Darcy-Forchheimer 0.5, else 1
linear_solver = "auto"      # auto | direct | pcg

[output]
# dir = "runs/annulus"      # default: $POROTOPO_OUTPUT/<name>, else ./porotopo-output/<name>
"#,
        names = BENCHMARK_NAMES.join(", "),
        mi = o.max_iterations,
        ml = o.move_limit,
        eta = o.eta,
        fr = o.filter_radius,
        tol = o.tolerance,
        mh = o.max_halvings,
        pt = s.picard_tol,
        pm = s.picard_max_iter,
        lt = s.linear_tol,
        lm = s.linear_max_iter,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_parses_and_round_trips() {
        let c = RunConfig::from_toml(&reference_config()).unwrap();
        assert_eq!(c, RunConfig::builtin("annulus-radial"));
        let again = RunConfig::from_toml(&c.to_toml().unwrap()).unwrap();
        assert_eq!(again, c);
        c.resolve().unwrap();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "[problem]\nbuiltin = \"annulus-radial\"\nbogus = 1\n";
        assert!(matches!(RunConfig::from_toml(text), Err(Error::Config(_))));
        let text = "[problem]\nbuiltin = \"annulus-radial\"\n[solver]\npicard = 1\n";
        assert!(RunConfig::from_toml(text).is_err());
    }

    #[test]
    fn custom_problem_round_trips_and_resolves() {
        let text = r#"
[problem]
geometry = { kind = "cartesian-2d", x0 = 0.0, x1 = 2.0, nx = 8, y0 = 0.0, y1 = 1.0, ny = 4 }
source = 1.5
[problem.boundary]
left = { kind = "prescribed-pressure", value = 1.0 }
right = { kind = "prescribed-pressure", value = 0.0 }
bottom = { kind = "prescribed-normal-velocity", value = 0.0 }
top = { kind = "prescribed-normal-velocity", value = 0.0 }
[model]
law = "darcy-forchheimer"
mu0 = 1.0
beta_f = 0.5
[design]
gamma = 0.4
"#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(RunConfig::from_toml(&c.to_toml().unwrap()).unwrap(), c);
        let r = c.resolve().unwrap();
        assert_eq!(r.problem.grid.n_cells(), 32);
        assert_eq!(r.problem.source, Source::Uniform(1.5));
        assert_eq!(r.model.law, DragLaw::DarcyForchheimer);
    }
}
