//! Finite-volume primal solver.
//!
//! Pressure lives at cell centres and fluxes on faces. Each face carries the
//! momentum balance alpha_f R_f F_f = p_upstream - p_downstream, where R_f is
//! the exact metric resistance between the two cell centres (harmonic
//! averaging of the permeability), and each cell carries continuity
//! sum(outflow) = Q vol. Nonlinear drag laws are handled by Picard iteration
//! with frozen face drag coefficients.

use serde::{Deserialize, Serialize};

use crate::domain::DragLaw;
use crate::domain::{
    BoundaryCondition, BoundaryConditions, FaceOwner, FlowState, MaterialModel, Source,
    StructuredGrid,
};
use crate::error::{check_range, Error, Result};
use crate::linalg::{pcg, solve_tridiagonal, Triplets};
use crate::models::drag_factor;

/// Linear solver used for the frozen-coefficient pressure system on 2D grids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearSolverKind {
    /// Banded direct factorization when affordable, PCG otherwise.
    #[default]
    Auto,
    Direct,
    Pcg,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    /// Relative change in pressure and face velocity below which Picard stops.
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    /// Relative residual for the iterative linear solver.
    pub linear_tol: f64,
    pub linear_max_iter: usize,
    /// Under-relaxation of the pressure and flux used to refreeze the drag; law default
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relaxation: Option<f64>,
    #[serde(default)]
    pub linear_solver: LinearSolverKind,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            picard_tol: 1e-10,
            picard_max_iter: 500,
            linear_tol: 1e-13,
            linear_max_iter: 20_000,
            relaxation: None,
            linear_solver: LinearSolverKind::Auto,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        check_range(
            "picard_tol",
            self.picard_tol,
            f64::MIN_POSITIVE,
            f64::MAX,
            "(0, inf)",
        )?;
        check_range(
            "linear_tol",
            self.linear_tol,
            f64::MIN_POSITIVE,
            f64::MAX,
            "(0, inf)",
        )?;
        if self.picard_max_iter == 0 || self.linear_max_iter == 0 {
            return Err(Error::Config("iteration limits must be at least 1".into()));
        }
        if let Some(w) = self.relaxation {
            check_range("relaxation", w, f64::MIN_POSITIVE, 1.0, "(0, 1]")?;
        }
        Ok(())
    }

    /// 0.7 for Barus, 0.5 for Darcy-Forchheimer, 1 otherwise, unless overridden.
    pub fn relaxation_for(&self, model: &MaterialModel) -> f64 {
        self.relaxation.unwrap_or(match model.law {
            DragLaw::Barus => 0.7,
            DragLaw::DarcyForchheimer => 0.5,
            _ => 1.0,
        })
    }
}

/// Role of a face in the discrete system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum FaceKind {
    Interior {
        lo: usize,
        hi: usize,
    },
    /// Pressure-prescribed boundary face. `upper`: the boundary is on the +axis
    /// side of `cell`.
    Dirichlet {
        cell: usize,
        upper: bool,
        p0: f64,
    },
    /// Flux-prescribed boundary face; `flux` is along +axis.
    Flux {
        cell: usize,
        upper: bool,
        flux: f64,
    },
    Inactive,
}

impl FaceKind {
    /// Whether the flux through this face is an unknown of the system.
    pub(crate) fn is_unknown(&self) -> bool {
        matches!(self, FaceKind::Interior { .. } | FaceKind::Dirichlet { .. })
    }
}

/// Drag factor m with alpha = mu0 m / k and its partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Factor {
    pub m: f64,
    pub dm_dp: f64,
    pub dm_ds: f64,
}

const DARCY_FACTOR: Factor = Factor {
    m: 1.0,
    dm_dp: 0.0,
    dm_ds: 0.0,
};

/// Geometry, permeability and boundary data of one discrete problem.
#[derive(Debug, Clone)]
pub(crate) struct Discretization<'g> {
    pub grid: &'g StructuredGrid,
    pub kinds: Vec<FaceKind>,
    pub area: Vec<f64>,
    /// Metric half resistances (lower-side cell, upper-side cell) per face.
    pub half: Vec<[f64; 2]>,
    /// Permeability-weighted resistance sum G_lo / k_lo + G_hi / k_hi.
    pub res: Vec<f64>,
    /// Transverse faces entering the face speed, with weights acting on flux.
    pub transverse: Vec<Vec<(usize, f64)>>,
    pub k: Vec<f64>,
    /// Active cell -> pressure unknown index (usize::MAX when inactive).
    pub unknown: Vec<usize>,
    pub active: Vec<usize>,
    pub rhs_source: Vec<f64>,
}

impl<'g> Discretization<'g> {
    pub(crate) fn new(
        grid: &'g StructuredGrid,
        k: &[f64],
        bcs: &BoundaryConditions,
        source: &Source,
    ) -> Result<Self> {
        if k.len() != grid.n_cells() {
            return Err(Error::Shape {
                what: "permeability",
                expected: grid.n_cells(),
                got: k.len(),
            });
        }
        bcs.validate(grid)?;
        source.check_shape(grid)?;
        let active: Vec<usize> = grid.active_cells().collect();
        let mut unknown = vec![usize::MAX; grid.n_cells()];
        for (i, &c) in active.iter().enumerate() {
            if !(k[c] > 0.0 && k[c].is_finite()) {
                return Err(Error::InvalidPermeability(k[c]));
            }
            unknown[c] = i;
        }
        let nf = grid.n_faces();
        let mut kinds = Vec::with_capacity(nf);
        let mut area = Vec::with_capacity(nf);
        let mut half = Vec::with_capacity(nf);
        let mut res = Vec::with_capacity(nf);
        for f in 0..nf {
            let a = grid.face_area(f);
            area.push(a);
            match grid.face_owner(f) {
                FaceOwner::Interior { lo, hi } => {
                    let (gl, gh) = (grid.half_resistance(lo, f), grid.half_resistance(hi, f));
                    kinds.push(FaceKind::Interior { lo, hi });
                    half.push([gl, gh]);
                    res.push(gl / k[lo] + gh / k[hi]);
                }
                FaceOwner::Boundary { cell, upper } => {
                    let g = grid.half_resistance(cell, f);
                    let tag = grid.face_tag(f).ok_or_else(|| {
                        Error::InvalidBoundary(format!("boundary face {f} has no segment tag"))
                    })?;
                    let bc = bcs.get(tag).ok_or_else(|| {
                        Error::InvalidBoundary(format!(
                            "no condition given for boundary tag '{tag}'"
                        ))
                    })?;
                    kinds.push(match *bc {
                        BoundaryCondition::PrescribedPressure(p0) => {
                            FaceKind::Dirichlet { cell, upper, p0 }
                        }
                        BoundaryCondition::PrescribedNormalVelocity(vn) => FaceKind::Flux {
                            cell,
                            upper,
                            flux: if upper { vn * a } else { -vn * a },
                        },
                    });
                    half.push(if upper { [g, 0.0] } else { [0.0, g] });
                    res.push(g / k[cell]);
                }
                FaceOwner::Inactive => {
                    kinds.push(FaceKind::Inactive);
                    half.push([0.0, 0.0]);
                    res.push(0.0);
                }
            }
        }
        let mut transverse = vec![Vec::new(); nf];
        if grid.n_axes() == 2 {
            for (f, t) in transverse.iter_mut().enumerate() {
                let cells: Vec<usize> = match kinds[f] {
                    FaceKind::Interior { lo, hi } => vec![lo, hi],
                    FaceKind::Dirichlet { cell, .. } | FaceKind::Flux { cell, .. } => vec![cell],
                    FaceKind::Inactive => continue,
                };
                let axis = grid.face_axis(f);
                let w = 0.5 / cells.len() as f64;
                for c in cells {
                    let (g1, g2) = grid.cell_faces(c, 1 - axis);
                    t.push((g1, w / area[g1]));
                    t.push((g2, w / area[g2]));
                }
            }
        }
        let rhs_source = (0..grid.n_cells())
            .map(|c| {
                if unknown[c] == usize::MAX {
                    0.0
                } else {
                    source.value(c) * grid.cell_volume(c)
                }
            })
            .collect();
        Ok(Self {
            grid,
            kinds,
            area,
            half,
            res,
            transverse,
            k: k.to_vec(),
            unknown,
            active,
            rhs_source,
        })
    }

    pub(crate) fn n_faces(&self) -> usize {
        self.kinds.len()
    }

    /// Pressure used in the drag law on face f, with its cell weights.
    pub(crate) fn face_pressure(&self, f: usize, p: &[f64]) -> f64 {
        match self.kinds[f] {
            FaceKind::Interior { lo, hi } => {
                let [gl, gh] = self.half[f];
                (gh * p[lo] + gl * p[hi]) / (gl + gh)
            }
            FaceKind::Dirichlet { p0, .. } => p0,
            FaceKind::Flux { cell, .. } => p[cell],
            FaceKind::Inactive => 0.0,
        }
    }

    pub(crate) fn face_pressure_weights(&self, f: usize) -> Vec<(usize, f64)> {
        match self.kinds[f] {
            FaceKind::Interior { lo, hi } => {
                let [gl, gh] = self.half[f];
                vec![(lo, gh / (gl + gh)), (hi, gl / (gl + gh))]
            }
            FaceKind::Flux { cell, .. } => vec![(cell, 1.0)],
            _ => Vec::new(),
        }
    }

    /// Speed on face f: normal component plus averaged transverse component.
    pub(crate) fn face_speed(&self, f: usize, flux: &[f64]) -> f64 {
        let u = flux[f] / self.area[f];
        if self.transverse[f].is_empty() {
            return u.abs();
        }
        let t: f64 = self.transverse[f].iter().map(|&(g, w)| w * flux[g]).sum();
        u.hypot(t)
    }

    /// d(speed_f)/d(flux_g) for every g the speed depends on.
    pub(crate) fn face_speed_gradient(&self, f: usize, flux: &[f64]) -> Vec<(usize, f64)> {
        let u = flux[f] / self.area[f];
        let s = self.face_speed(f, flux);
        if s == 0.0 {
            return Vec::new();
        }
        let mut out = vec![(f, u / (s * self.area[f]))];
        if !self.transverse[f].is_empty() {
            let t: f64 = self.transverse[f].iter().map(|&(g, w)| w * flux[g]).sum();
            out.extend(self.transverse[f].iter().map(|&(g, w)| (g, t * w / s)));
        }
        out
    }

    pub(crate) fn factors(
        &self,
        model: &MaterialModel,
        p: &[f64],
        flux: &[f64],
    ) -> Result<Vec<Factor>> {
        if !model.is_nonlinear() {
            return Ok(vec![DARCY_FACTOR; self.n_faces()]);
        }
        (0..self.n_faces())
            .map(|f| {
                if self.kinds[f] == FaceKind::Inactive {
                    return Ok(DARCY_FACTOR);
                }
                let (m, dm_dp, dm_ds) =
                    drag_factor(model, self.face_speed(f, flux), self.face_pressure(f, p))?;
                if !(m.is_finite() && dm_dp.is_finite()) {
                    return Err(Error::Numerical(format!(
                        "drag factor overflow at face {f} (pressure {})",
                        self.face_pressure(f, p)
                    )));
                }
                Ok(Factor { m, dm_dp, dm_ds })
            })
            .collect()
    }

    /// Face fluxes from cell pressures for frozen drag factors.
    pub(crate) fn fluxes(&self, model: &MaterialModel, factors: &[Factor], p: &[f64]) -> Vec<f64> {
        (0..self.n_faces())
            .map(|f| {
                let a = model.mu0 * factors[f].m * self.res[f];
                match self.kinds[f] {
                    FaceKind::Interior { lo, hi } => (p[lo] - p[hi]) / a,
                    FaceKind::Dirichlet { cell, upper, p0 } => {
                        if upper {
                            (p[cell] - p0) / a
                        } else {
                            (p0 - p[cell]) / a
                        }
                    }
                    FaceKind::Flux { flux, .. } => flux,
                    FaceKind::Inactive => 0.0,
                }
            })
            .collect()
    }

    fn use_direct(&self, kind: LinearSolverKind) -> bool {
        match kind {
            LinearSolverKind::Direct => true,
            LinearSolverKind::Pcg => false,
            LinearSolverKind::Auto => {
                let n = self.active.len() as f64;
                let bw = self.grid.dims().0 as f64;
                n * bw * bw * 3.0 < 2e9
            }
        }
    }

    /// Solves the frozen-coefficient pressure system. `guess` warm-starts PCG.
    pub(crate) fn solve_pressure(
        &self,
        model: &MaterialModel,
        factors: &[Factor],
        guess: &[f64],
        settings: &SolverSettings,
    ) -> Result<Vec<f64>> {
        let n = self.active.len();
        let mut rhs = vec![0.0; n];
        for &c in &self.active {
            rhs[self.unknown[c]] = self.rhs_source[c];
        }
        let mut trip = Triplets::new(n);
        for f in 0..self.n_faces() {
            let t = || 1.0 / (model.mu0 * factors[f].m * self.res[f]);
            match self.kinds[f] {
                FaceKind::Interior { lo, hi } => {
                    let (i, j, t) = (self.unknown[lo], self.unknown[hi], t());
                    trip.push(i, i, t);
                    trip.push(j, j, t);
                    trip.push(i, j, -t);
                    trip.push(j, i, -t);
                }
                FaceKind::Dirichlet { cell, p0, .. } => {
                    let (i, t) = (self.unknown[cell], t());
                    trip.push(i, i, t);
                    rhs[i] += t * p0;
                }
                FaceKind::Flux { cell, upper, flux } => {
                    let out = if upper { flux } else { -flux };
                    rhs[self.unknown[cell]] -= out;
                }
                FaceKind::Inactive => {}
            }
        }
        let x = if self.grid.n_axes() == 1 {
            let (mut lower, mut diag, mut upper) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
            for &(i, j, v) in &trip.entries {
                if i == j {
                    diag[i] += v;
                } else if j + 1 == i {
                    lower[i] += v;
                } else {
                    upper[i] += v;
                }
            }
            solve_tridiagonal(&lower, &diag, &upper, &rhs)?
        } else if self.use_direct(settings.linear_solver) {
            match trip.to_sym_banded().cholesky_solve(rhs.clone()) {
                Ok(x) => x,
                Err(_) => trip.to_banded(None).solve(rhs)?,
            }
        } else {
            let mut x: Vec<f64> = self.active.iter().map(|&c| guess[c]).collect();
            pcg(
                &trip.to_csr(),
                &rhs,
                &mut x,
                settings.linear_tol,
                settings.linear_max_iter,
            )?;
            x
        };
        let mut p = vec![0.0; self.grid.n_cells()];
        for &c in &self.active {
            p[c] = x[self.unknown[c]];
        }
        Ok(p)
    }

    pub(crate) fn state(
        &self,
        p: Vec<f64>,
        flux: &[f64],
        iterations: usize,
        residual: f64,
    ) -> FlowState {
        FlowState {
            pressure: p,
            face_velocity: flux.iter().zip(&self.area).map(|(f, a)| f / a).collect(),
            picard_iterations: iterations,
            residual_norm: residual,
        }
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// max |new - old| / max |new|, treating differences at or below `noise` as zero.
fn relative_change(new: &[f64], old: &[f64], noise: f64) -> f64 {
    let scale = max_abs(new);
    let diff = new
        .iter()
        .zip(old)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if diff <= noise {
        0.0
    } else if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Solves the flow problem for a per-cell permeability field.
pub fn solve_flow(
    grid: &StructuredGrid,
    k: &[f64],
    model: &MaterialModel,
    bcs: &BoundaryConditions,
    source: &Source,
    settings: &SolverSettings,
) -> Result<FlowState> {
    model.validate()?;
    settings.validate()?;
    let disc = Discretization::new(grid, k, bcs, source)?;
    solve_discrete(&disc, model, settings)
}

/// Radial (cylindrical or spherical) variant of [`solve_flow`].
pub fn solve_flow_radial(
    grid: &StructuredGrid,
    k: &[f64],
    model: &MaterialModel,
    bcs: &BoundaryConditions,
    source: &Source,
    settings: &SolverSettings,
) -> Result<FlowState> {
    if !grid.geometry().is_radial() {
        return Err(Error::InvalidGrid(
            "solve_flow_radial needs a radial grid".into(),
        ));
    }
    solve_flow(grid, k, model, bcs, source, settings)
}

pub(crate) fn solve_discrete(
    disc: &Discretization,
    model: &MaterialModel,
    settings: &SolverSettings,
) -> Result<FlowState> {
    solve_discrete_from(disc, model, settings, None)
}

/// Picard from `guess` when given (nonlinear laws only), falling back to a
/// cold start if that fails.
pub(crate) fn solve_discrete_from(
    disc: &Discretization,
    model: &MaterialModel,
    settings: &SolverSettings,
    guess: Option<&FlowState>,
) -> Result<FlowState> {
    if let Some(g) = guess.filter(|_| model.is_nonlinear()) {
        if g.check_shape(disc.grid).is_ok() {
            let flux: Vec<f64> = g
                .face_velocity
                .iter()
                .zip(&disc.area)
                .map(|(v, a)| v * a)
                .collect();
            if let Ok(s) = picard(disc, model, settings, g.pressure.clone(), flux) {
                return Ok(s);
            }
        }
    }
    let n = disc.grid.n_cells();
    let darcy = vec![DARCY_FACTOR; disc.n_faces()];
    let p = disc.solve_pressure(model, &darcy, &vec![0.0; n], settings)?;
    let flux = disc.fluxes(model, &darcy, &p);
    if !model.is_nonlinear() {
        return Ok(disc.state(p, &flux, 1, 0.0));
    }
    picard(disc, model, settings, p, flux)
}

fn picard(
    disc: &Discretization,
    model: &MaterialModel,
    settings: &SolverSettings,
    mut p: Vec<f64>,
    mut flux: Vec<f64>,
) -> Result<FlowState> {
    let n = disc.grid.n_cells();
    let omega = settings.relaxation_for(model);
    let mut p_eval = p.clone();
    let mut flux_eval = flux.clone();
    let mut history = Vec::new();
    for it in 1..=settings.picard_max_iter {
        let factors = disc.factors(model, &p_eval, &flux_eval)?;
        let p_new = disc.solve_pressure(model, &factors, &p_eval, settings)?;
        let flux_new = disc.fluxes(model, &factors, &p_new);
        // Flux changes smaller than what pressure round-off can produce are noise.
        let flux_noise = 1e-13
            * max_abs(&p_new)
            * (0..disc.n_faces())
                .filter(|&f| disc.kinds[f].is_unknown())
                .map(|f| 1.0 / (model.mu0 * factors[f].m * disc.res[f]))
                .fold(0.0, f64::max);
        let change =
            relative_change(&p_new, &p, 0.0).max(relative_change(&flux_new, &flux, flux_noise));
        if !change.is_finite() {
            return Err(Error::Divergence {
                iterations: it,
                last: change,
                history,
            });
        }
        history.push(change);
        for c in 0..n {
            p_eval[c] = omega * p_new[c] + (1.0 - omega) * p_eval[c];
        }
        for (e, f) in flux_eval.iter_mut().zip(&flux_new) {
            *e = omega * f + (1.0 - omega) * *e;
        }
        p = p_new;
        flux = flux_new;
        if change < settings.picard_tol {
            return Ok(disc.state(p, &flux, it, change));
        }
    }
    Err(Error::Divergence {
        iterations: settings.picard_max_iter,
        last: history.last().copied().unwrap_or(f64::NAN),
        history,
    })
}

/// Per-cell permeability of a two-material radial or 1D layout with k_inner
/// below `xi` and k_outer above. Cells cut by the interface get the exact
/// series-resistance average of both materials.
pub fn layered_permeability(
    grid: &StructuredGrid,
    xi: f64,
    k_inner: f64,
    k_outer: f64,
) -> Result<Vec<f64>> {
    if grid.n_axes() != 1 {
        return Err(Error::InvalidGrid(
            "layered permeability needs a 1D or radial grid".into(),
        ));
    }
    if !(k_inner > 0.0) {
        return Err(Error::InvalidPermeability(k_inner));
    }
    if !(k_outer > 0.0) {
        return Err(Error::InvalidPermeability(k_outer));
    }
    let metric = grid.metric();
    Ok((0..grid.n_cells())
        .map(|c| {
            let (a, b) = grid.cell_bounds0(c);
            if xi <= a {
                k_outer
            } else if xi >= b {
                k_inner
            } else {
                let r = metric.resistance(a, xi) / k_inner + metric.resistance(xi, b) / k_outer;
                metric.resistance(a, b) / r
            }
        })
        .collect())
}

/// Net boundary outflow and integrated source; equal up to solver tolerance.
pub fn mass_balance(grid: &StructuredGrid, flow: &FlowState, source: &Source) -> (f64, f64) {
    let mut out = 0.0;
    for f in 0..grid.n_faces() {
        if let FaceOwner::Boundary { upper, .. } = grid.face_owner(f) {
            let q = flow.face_flux(grid, f);
            out += if upper { q } else { -q };
        }
    }
    (out, source.total(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::BoundaryConditions;

    fn channel(n: usize) -> (StructuredGrid, BoundaryConditions) {
        let g = StructuredGrid::interval(0.0, 1.0, n).unwrap();
        let bcs = BoundaryConditions::new()
            .pressure("left", 1.0)
            .pressure("right", 0.0);
        (g, bcs)
    }

    #[test]
    fn uniform_darcy_channel_is_linear() {
        let (g, bcs) = channel(16);
        let m = MaterialModel::darcy(1.0).unwrap();
        let s = solve_flow(
            &g,
            &[1.0; 16],
            &m,
            &bcs,
            &Source::default(),
            &SolverSettings::default(),
        )
        .unwrap();
        for v in &s.face_velocity {
            assert!((v - 1.0).abs() < 1e-13);
        }
        for c in 0..16 {
            let x = g.cell_center(c)[0];
            assert!((s.pressure[c] - (1.0 - x)).abs() < 1e-13);
        }
    }

    #[test]
    fn equal_pressures_give_zero_flow() {
        let g = StructuredGrid::interval(0.0, 1.0, 8).unwrap();
        let bcs = BoundaryConditions::new()
            .pressure("left", 3.0)
            .pressure("right", 3.0);
        let m = MaterialModel::darcy_forchheimer(1.0, 1.0).unwrap();
        let s = solve_flow(
            &g,
            &[2.0; 8],
            &m,
            &bcs,
            &Source::default(),
            &SolverSettings::default(),
        )
        .unwrap();
        assert!(s.face_velocity.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn layered_cells_preserve_total_resistance() {
        let g = StructuredGrid::cylindrical(0.1, 1.0, 37).unwrap();
        let k = layered_permeability(&g, 0.4321, 10.0, 1.0).unwrap();
        let total: f64 = (0..37)
            .map(|c| {
                let (a, b) = g.cell_bounds0(c);
                g.metric().resistance(a, b) / k[c]
            })
            .sum();
        let exact = g.metric().resistance(0.1, 0.4321) / 10.0 + g.metric().resistance(0.4321, 1.0);
        assert!((total - exact).abs() < 1e-14 * exact);
    }

    #[test]
    fn prescribed_inflow_is_conserved_radially() {
        let g = StructuredGrid::cylindrical(0.1, 1.0, 64).unwrap();
        let bcs = BoundaryConditions::new()
            .normal_velocity("inner", -1.0)
            .pressure("outer", 0.0);
        let m = MaterialModel::darcy(1.0).unwrap();
        let s = solve_flow_radial(
            &g,
            &vec![1.0; 64],
            &m,
            &bcs,
            &Source::default(),
            &SolverSettings::default(),
        )
        .unwrap();
        for f in 0..=64 {
            let r = g.face_center(f)[0];
            assert!((s.face_velocity[f] - 0.1 / r).abs() < 1e-14 / r);
        }
    }

    #[test]
    fn missing_pressure_is_ill_posed() {
        let g = StructuredGrid::interval(0.0, 1.0, 4).unwrap();
        let bcs = BoundaryConditions::new()
            .normal_velocity("left", -1.0)
            .normal_velocity("right", 1.0);
        let m = MaterialModel::darcy(1.0).unwrap();
        let r = solve_flow(
            &g,
            &[1.0; 4],
            &m,
            &bcs,
            &Source::default(),
            &SolverSettings::default(),
        );
        assert!(matches!(r, Err(Error::IllPosed(_))));
    }
}
