//! Verification harness: grid-convergence studies against closed forms,
//! randomized property sweeps and the power-functional stationarity check.
//!
//! Reports are deterministic for a fixed seed: cases run in parallel but are
//! merged in id order, and every sweep draws from its own `ChaCha8Rng`
//! stream derived from the seed.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analytic::{
    lemma_gap, optimal_interface_2d, optimal_interface_3d, solve_1d, solve_annulus, solve_sphere,
    AnalyticSolution, AnnulusDrive, AnnulusLayout, InterfaceLayout1D, ShellLayout,
};
use crate::domain::{
    BoundaryConditions, DragLaw, Driving, MaterialModel, Metric, Source, StructuredGrid,
};
use crate::error::{Error, Result};
use crate::models::{drag, total_dissipation_k};
use crate::power::{default_epsilons, mpt_stationarity_check, stream_function_perturbations};
use crate::primal::{layered_permeability, solve_flow, SolverSettings};

/// Name of the generator recorded in report headers.
pub const GENERATOR: &str = "ChaCha8Rng";

/// Finest-grid errors at or below this are reported as an exact match.
pub const EXACT_THRESHOLD: f64 = 1e-12;

/// Geometry of a convergence case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseGeometry {
    /// Unit interval, interface at xi, k1 left of xi.
    Interval { xi: f64, k1: f64, k2: f64 },
    /// Annulus r_i..r_o, k1 inside xi.
    Annulus {
        r_i: f64,
        r_o: f64,
        xi: f64,
        k1: f64,
        k2: f64,
    },
    /// Shell r_i..1, k1 inside xi.
    Shell { r_i: f64, xi: f64, k1: f64, k2: f64 },
}

/// Boundary driving of a convergence case. Radial inflow is positive outward.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CaseDrive {
    Pressure { inner: f64, outer: f64 },
    Velocity { inflow: f64, outer: f64 },
}

/// Closed form the numerical solution is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    OneDimensional,
    Annulus,
    /// Barus annulus: exp(-beta p) is affine in the radial resistance.
    AnnulusBarus,
    Shell,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationCase {
    pub id: String,
    pub geometry: CaseGeometry,
    pub model: MaterialModel,
    pub drive: CaseDrive,
    pub oracle: Oracle,
    /// Bound on the finest-grid relative max pressure error.
    pub tolerance: f64,
    /// Strictly increasing cell counts.
    pub ladder: Vec<usize>,
    pub settings: SolverSettings,
}

impl VerificationCase {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Config(format!(
                "case {}: tolerance must be positive",
                self.id
            )));
        }
        if self.ladder.is_empty()
            || self.ladder[0] == 0
            || self.ladder.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::Config(format!(
                "case {}: grid ladder must strictly refine",
                self.id
            )));
        }
        self.model.validate()
    }

    fn grid(&self, n: usize) -> Result<StructuredGrid> {
        match self.geometry {
            CaseGeometry::Interval { .. } => StructuredGrid::interval(0.0, 1.0, n),
            CaseGeometry::Annulus { r_i, r_o, .. } => StructuredGrid::cylindrical(r_i, r_o, n),
            CaseGeometry::Shell { r_i, .. } => StructuredGrid::spherical(r_i, 1.0, n),
        }
    }

    fn layout(&self) -> (f64, f64, f64) {
        match self.geometry {
            CaseGeometry::Interval { xi, k1, k2 }
            | CaseGeometry::Annulus { xi, k1, k2, .. }
            | CaseGeometry::Shell { xi, k1, k2, .. } => (xi, k1, k2),
        }
    }

    fn bcs(&self, grid: &StructuredGrid) -> BoundaryConditions {
        let (lo, hi) = if grid.metric() == Metric::Planar {
            ("left", "right")
        } else {
            ("inner", "outer")
        };
        match self.drive {
            CaseDrive::Pressure { inner, outer } => BoundaryConditions::new()
                .pressure(lo, inner)
                .pressure(hi, outer),
            CaseDrive::Velocity { inflow, outer } => BoundaryConditions::new()
                .normal_velocity(lo, -inflow)
                .pressure(hi, outer),
        }
    }

    /// Exact pressure as a function of position.
    fn exact(&self) -> Result<Box<dyn Fn(f64) -> f64 + Send + Sync>> {
        let sol: AnalyticSolution = match (self.oracle, self.geometry, self.drive) {
            (Oracle::OneDimensional, CaseGeometry::Interval { xi, k1, k2 }, drive) => {
                let driving = match drive {
                    CaseDrive::Pressure {
                        inner: 1.0,
                        outer: 0.0,
                    } => Driving::PressureDriven,
                    CaseDrive::Velocity {
                        inflow: 1.0,
                        outer: 0.0,
                    } => Driving::VelocityDriven,
                    _ => return Err(self.mismatch()),
                };
                solve_1d(&self.model, driving, &InterfaceLayout1D::new(xi, k1, k2)?)?
            }
            (
                Oracle::Annulus,
                CaseGeometry::Annulus {
                    r_i,
                    r_o,
                    xi,
                    k1,
                    k2,
                },
                drive,
            ) => {
                let drive = match drive {
                    CaseDrive::Pressure { inner, outer } => AnnulusDrive::Pressure {
                        p_i: inner,
                        p_o: outer,
                    },
                    CaseDrive::Velocity { inflow, outer } => AnnulusDrive::Velocity {
                        v_o: inflow,
                        p_o: outer,
                    },
                };
                solve_annulus(
                    &AnnulusLayout::new(r_i, r_o, xi, k1, k2)?,
                    drive,
                    self.model.mu0,
                )?
            }
            (
                Oracle::Shell,
                CaseGeometry::Shell { r_i, xi, k1, k2 },
                CaseDrive::Pressure {
                    inner: 1.0,
                    outer: 0.0,
                },
            ) => solve_sphere(&ShellLayout::new(r_i, xi, k1, k2)?)?,
            (
                Oracle::AnnulusBarus,
                CaseGeometry::Annulus {
                    r_i,
                    r_o,
                    xi,
                    k1,
                    k2,
                },
                CaseDrive::Pressure { inner, outer },
            ) => {
                let beta = self.model.beta_b;
                if self.model.law != DragLaw::Barus || beta == 0.0 {
                    return Err(self.mismatch());
                }
                // u = exp(-beta p) satisfies u' = beta mu0 C / (k r), so u is
                // affine in S(r) = integral of dr / (k r).
                let s = move |r: f64| {
                    if r <= xi {
                        (r / r_i).ln() / k1
                    } else {
                        (xi / r_i).ln() / k1 + (r / xi).ln() / k2
                    }
                };
                let (ui, uo) = ((-beta * inner).exp(), (-beta * outer).exp());
                let total = s(r_o);
                return Ok(Box::new(move |r| {
                    -(ui + (uo - ui) * s(r) / total).ln() / beta
                }));
            }
            _ => return Err(self.mismatch()),
        };
        Ok(Box::new(move |r| sol.pressure_at(r)))
    }

    fn mismatch(&self) -> Error {
        Error::Config(format!(
            "case {}: oracle does not cover this geometry/drive",
            self.id
        ))
    }
}

/// Observed convergence order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObservedOrder {
    Value(f64),
    /// Finest error at round-off level.
    Exact,
    /// Fewer than three grid levels.
    NotAvailable,
}

impl fmt::Display for ObservedOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObservedOrder::Value(v) => write!(f, "{v:.3}"),
            ObservedOrder::Exact => f.write_str("exact"),
            ObservedOrder::NotAvailable => f.write_str("n/a"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseResult {
    pub id: String,
    pub cells: Vec<usize>,
    /// Relative volume-weighted L2 pressure error per level. Errors are taken at
    /// cell centres of cells not cut by the interface.
    pub l2_errors: Vec<f64>,
    /// Relative max pressure error per level.
    pub max_errors: Vec<f64>,
    pub order: ObservedOrder,
    pub tolerance: f64,
    pub passed: bool,
    /// Failure reason, if any.
    pub reason: Option<String>,
}

impl CaseResult {
    pub fn finest_error(&self) -> f64 {
        self.max_errors.last().copied().unwrap_or(f64::NAN)
    }
}

/// Least-squares slope of log(error) against log(h) over all levels.
fn richardson_order(cells: &[usize], errors: &[f64]) -> ObservedOrder {
    if errors.last().is_some_and(|e| *e <= EXACT_THRESHOLD) {
        return ObservedOrder::Exact;
    }
    if cells.len() < 3 || errors.iter().any(|e| !(*e > 0.0)) {
        return ObservedOrder::NotAvailable;
    }
    let xs: Vec<f64> = cells.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let m = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / m, ys.iter().sum::<f64>() / m);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    ObservedOrder::Value(-sxy / sxx)
}

fn level_errors(
    case: &VerificationCase,
    exact: &(dyn Fn(f64) -> f64 + Sync),
    n: usize,
) -> Result<(f64, f64)> {
    let grid = case.grid(n)?;
    let (xi, k1, k2) = case.layout();
    let k = layered_permeability(&grid, xi, k1, k2)?;
    let bcs = case.bcs(&grid);
    let flow = solve_flow(
        &grid,
        &k,
        &case.model,
        &bcs,
        &Source::default(),
        &case.settings,
    )?;
    let metric = grid.metric();
    let (mut emax, mut pmax, mut e2, mut p2) = (0.0f64, 0.0f64, 0.0, 0.0);
    for c in 0..grid.n_cells() {
        let (a, b) = grid.cell_bounds0(c);
        // A cut cell carries the series average of both materials, so its
        // value is not a point sample of the layered solution.
        if a < xi && xi < b && k1 != k2 {
            continue;
        }
        let pe = exact(grid.cell_center(c)[0]);
        let e = flow.pressure[c] - pe;
        let vol = metric.shell_volume(a, b);
        emax = emax.max(e.abs());
        pmax = pmax.max(pe.abs());
        e2 += vol * e * e;
        p2 += vol * pe * pe;
    }
    let pmax = pmax.max(f64::MIN_POSITIVE);
    let l2 = if p2 > 0.0 {
        (e2 / p2).sqrt()
    } else {
        e2.sqrt()
    };
    Ok((l2, emax / pmax))
}

/// Runs the grid ladder of one case. Solver failures are reported as a
/// failed entry; malformed cases are errors.
pub fn run_case(case: &VerificationCase) -> Result<CaseResult> {
    case.validate()?;
    let exact = case.exact()?;
    let mut result = CaseResult {
        id: case.id.clone(),
        cells: Vec::new(),
        l2_errors: Vec::new(),
        max_errors: Vec::new(),
        order: ObservedOrder::NotAvailable,
        tolerance: case.tolerance,
        passed: false,
        reason: None,
    };
    for &n in &case.ladder {
        match level_errors(case, exact.as_ref(), n) {
            Ok((l2, max)) => {
                result.cells.push(n);
                result.l2_errors.push(l2);
                result.max_errors.push(max);
            }
            Err(e) => {
                result.reason = Some(format!("{n} cells: {e}"));
                return Ok(result);
            }
        }
    }
    result.order = richardson_order(&result.cells, &result.max_errors);
    result.passed = result.finest_error() <= case.tolerance;
    if !result.passed {
        result.reason = Some(format!(
            "finest error {:.3e} > {:.1e}",
            result.finest_error(),
            case.tolerance
        ));
    }
    Ok(result)
}

/// The built-in convergence cases.
pub fn default_cases() -> Result<Vec<VerificationCase>> {
    let ladder = vec![64, 128, 256];
    let settings = SolverSettings::default();
    // Interface on a grid node of every level.
    let interval = CaseGeometry::Interval {
        xi: 0.25,
        k1: 10.0,
        k2: 1.0,
    };
    let pd = CaseDrive::Pressure {
        inner: 1.0,
        outer: 0.0,
    };
    let vd = CaseDrive::Velocity {
        inflow: 1.0,
        outer: 0.0,
    };
    let one_d =
        |id: &str, model: MaterialModel, drive: CaseDrive, tolerance: f64| VerificationCase {
            id: id.to_string(),
            geometry: interval,
            model,
            drive,
            oracle: Oracle::OneDimensional,
            tolerance,
            ladder: ladder.clone(),
            settings,
        };
    let annulus_xi = optimal_interface_2d(0.3, 0.1, 1.0, 1.0, 10.0)?.xi_hat;
    let annulus = CaseGeometry::Annulus {
        r_i: 0.1,
        r_o: 1.0,
        xi: annulus_xi,
        k1: 10.0,
        k2: 1.0,
    };
    let shell_xi = optimal_interface_3d(0.1, 0.1, 1.0, 10.0)?.xi_hat;
    let radial_pd = CaseDrive::Pressure {
        inner: 100.0,
        outer: 1.0,
    };
    let radial = |id: &str, geometry, model, drive, oracle, tolerance| VerificationCase {
        id: id.to_string(),
        geometry,
        model,
        drive,
        oracle,
        tolerance,
        ladder: ladder.clone(),
        settings,
    };
    let darcy = MaterialModel::darcy(1.0)?;
    let mut cases = vec![
        one_d("1d-darcy-pressure", darcy, pd, 1e-6),
        one_d(
            "1d-barus-pressure",
            MaterialModel::barus(1.0, 0.99)?,
            pd,
            1e-5,
        ),
        one_d(
            "1d-df-pressure",
            MaterialModel::darcy_forchheimer(1.0, 1.0)?,
            pd,
            1e-5,
        ),
        one_d("1d-darcy-velocity", darcy, vd, 1e-6),
        one_d(
            "1d-linbarus-velocity",
            MaterialModel::linearized_barus(1.0, 1.0)?,
            vd,
            1e-5,
        ),
        one_d(
            "1d-df-velocity",
            MaterialModel::darcy_forchheimer(1.0, 1.0)?,
            vd,
            1e-5,
        ),
        VerificationCase {
            geometry: CaseGeometry::Interval {
                xi: 0.3,
                k1: 2.0,
                k2: 2.0,
            },
            ..one_d("1d-degenerate-equal-k", darcy, pd, 1e-12)
        },
        radial(
            "annulus-darcy",
            annulus,
            darcy,
            radial_pd,
            Oracle::Annulus,
            1e-4,
        ),
        radial(
            "annulus-barus",
            annulus,
            MaterialModel::barus(1.0, 0.01)?,
            radial_pd,
            Oracle::AnnulusBarus,
            1e-4,
        ),
        radial(
            "annulus-velocity",
            annulus,
            darcy,
            CaseDrive::Velocity {
                inflow: 1.0,
                outer: 1.0,
            },
            Oracle::Annulus,
            1e-4,
        ),
        radial(
            "sphere-darcy",
            CaseGeometry::Shell {
                r_i: 0.1,
                xi: shell_xi,
                k1: 10.0,
                k2: 1.0,
            },
            darcy,
            CaseDrive::Pressure {
                inner: 1.0,
                outer: 0.0,
            },
            Oracle::Shell,
            1e-4,
        ),
    ];
    cases.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(cases)
}

/// Outcome of one randomized property.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub id: String,
    pub samples: usize,
    pub violations: usize,
    /// Smallest margin seen; a property holds where its margin is >= 0.
    pub worst_margin: f64,
    /// First violating sample, if any.
    pub first_violation: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Properties executed by [`run_property_sweeps`], in report order.
pub const PROPERTY_IDS: &[&str] = &[
    "am-gm",
    "drag-reduction",
    "lemma",
    "permutation-1d",
    "proposition",
];

struct Tally {
    result: PropertyResult,
}

impl Tally {
    fn new(id: &str) -> Self {
        Self {
            result: PropertyResult {
                id: id.to_string(),
                samples: 0,
                violations: 0,
                worst_margin: f64::INFINITY,
                first_violation: None,
            },
        }
    }

    fn record(&mut self, margin: f64, sample: impl FnOnce() -> String) {
        let r = &mut self.result;
        r.samples += 1;
        r.worst_margin = r.worst_margin.min(margin);
        if !(margin >= 0.0) {
            r.violations += 1;
            if r.first_violation.is_none() {
                r.first_violation = Some(sample());
            }
        }
    }
}

fn stream(seed: u64, id: &str) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = PROPERTY_IDS
        .iter()
        .position(|p| *p == id)
        .unwrap_or(PROPERTY_IDS.len()) as u64;
    rng.set_stream(k + 1);
    rng
}

/// Random annulus inputs; the first few are fixed edge cases.
fn annulus_sample(rng: &mut ChaCha8Rng, i: usize) -> (f64, f64, f64, f64, f64) {
    match i {
        0 => (0.0, 0.1, 1.0, 1.0, 10.0),
        1 => (1.0, 0.1, 1.0, 1.0, 10.0),
        2 => (0.5, 1.0 - 1e-9, 1.0, 1.0, 10.0),
        3 => (0.3, 0.1, 1.0, 1.0, 1.0),
        _ => {
            let r_o = 10f64.powf(rng.random_range(-2.0..2.0));
            let r_i = r_o * rng.random_range(1e-6..1.0);
            let kl = 10f64.powf(rng.random_range(-3.0..3.0));
            let kh = kl * 10f64.powf(rng.random_range(0.0..4.0));
            (rng.random_range(0.0..=1.0), r_i, r_o, kl, kh)
        }
    }
}

fn shell_sample(rng: &mut ChaCha8Rng, i: usize) -> (f64, f64) {
    match i {
        0 => (0.0, 0.1),
        1 => (1.0, 0.1),
        2 => (0.5, 1.0 - 1e-9),
        3 => (0.5, 1e-6),
        _ => (rng.random_range(0.0..=1.0), rng.random_range(1e-6..1.0)),
    }
}

fn proposition(seed: u64, n: usize) -> Result<PropertyResult> {
    let mut rng = stream(seed, "proposition");
    let mut t = Tally::new("proposition");
    for i in 0..n {
        let (g, r_i, r_o, kl, kh) = annulus_sample(&mut rng, i);
        let o = optimal_interface_2d(g, r_i, r_o, kl, kh)?;
        let scale = o.value_inner.abs().max(o.value_outer.abs());
        let margin = (o.value_outer - o.value_inner) / scale + 1e-12;
        t.record(margin, || {
            format!("gamma={g} r_i={r_i} r_o={r_o} kl={kl} kh={kh}")
        });
    }
    Ok(t.result)
}

fn lemma(seed: u64, n: usize) -> Result<PropertyResult> {
    let mut rng = stream(seed, "lemma");
    let mut t = Tally::new("lemma");
    for i in 0..n {
        let (g, r_i) = shell_sample(&mut rng, i);
        let gap = lemma_gap(g, r_i)?;
        t.record(gap + 1e-12, || format!("gamma={g} r_i={r_i} gap={gap}"));
    }
    Ok(t.result)
}

fn am_gm(seed: u64, n: usize) -> Result<PropertyResult> {
    let mut rng = stream(seed, "am-gm");
    let mut t = Tally::new("am-gm");
    for i in 0..n {
        let (g, r_i, r_o, kl, kh) = annulus_sample(&mut rng, i);
        let o = optimal_interface_2d(g, r_i, r_o, kl, kh)?;
        let prod = r_i * r_o;
        let margin = (o.xi_hat * o.xi_hat_outer - prod) / prod + 1e-12;
        t.record(margin, || format!("gamma={g} r_i={r_i} r_o={r_o}"));
    }
    Ok(t.result)
}

/// Every nonlinear law reduces to Darcy: exactly at beta = 0 for the drag,
/// and at least linearly in beta for the 1D closed forms (the deviation is
/// first order in beta, so a fixed bound at one small beta is not a test).
fn drag_reduction(seed: u64, n: usize) -> Result<PropertyResult> {
    let mut rng = stream(seed, "drag-reduction");
    let mut t = Tally::new("drag-reduction");
    let darcy = MaterialModel::darcy(1.0)?;
    for _ in 0..n {
        let k = 10f64.powf(rng.random_range(-3.0..3.0));
        let speed = rng.random_range(0.0..100.0);
        let p = rng.random_range(-10.0..10.0);
        let reference = drag(&darcy, k, speed, p)?.alpha;
        for law in [
            DragLaw::Barus,
            DragLaw::LinearizedBarus,
            DragLaw::DarcyForchheimer,
        ] {
            let m = MaterialModel::new(law, 1.0, 0.0, 0.0)?;
            let a = drag(&m, k, speed, p)?.alpha;
            t.record(0.0 - (a - reference).abs(), || {
                format!("{law:?} k={k} speed={speed} p={p}")
            });
        }
        let layout = InterfaceLayout1D::new(
            rng.random_range(0.0..=1.0),
            k,
            10f64.powf(rng.random_range(-3.0..3.0)),
        )?;
        let exact = [Driving::PressureDriven, Driving::VelocityDriven]
            .map(|d| solve_1d(&darcy, d, &layout));
        for (law, driving) in [
            (DragLaw::Barus, Driving::PressureDriven),
            (DragLaw::DarcyForchheimer, Driving::PressureDriven),
            (DragLaw::LinearizedBarus, Driving::VelocityDriven),
            (DragLaw::DarcyForchheimer, Driving::VelocityDriven),
        ] {
            let exact = exact[(driving == Driving::VelocityDriven) as usize]
                .as_ref()
                .map_err(|e| Error::Numerical(e.to_string()))?;
            let rel = |beta: f64| -> Result<f64> {
                let near = solve_1d(&MaterialModel::new(law, 1.0, beta, beta)?, driving, &layout)?;
                Ok(((near.phi - exact.phi) / exact.phi)
                    .abs()
                    .max(((near.constant - exact.constant) / exact.constant).abs()))
            };
            let (r1, r2) = (rel(1e-6)?, rel(1e-7)?);
            t.record(0.2 * r1 + 1e-13 - r2, || {
                format!("{law:?} {driving:?} {layout:?} rel(1e-6)={r1:.3e} rel(1e-7)={r2:.3e}")
            });
        }
    }
    Ok(t.result)
}

/// Dissipation of a binary 1D layout on `n` cells, pressure-driven.
pub fn binary_layout_dissipation(
    mask: &[bool],
    kl: f64,
    kh: f64,
    model: &MaterialModel,
) -> Result<f64> {
    let grid = StructuredGrid::interval(0.0, 1.0, mask.len())?;
    let k: Vec<f64> = mask.iter().map(|&h| if h { kh } else { kl }).collect();
    let bcs = BoundaryConditions::new()
        .pressure("left", 1.0)
        .pressure("right", 0.0);
    let flow = solve_flow(
        &grid,
        &k,
        model,
        &bcs,
        &Source::default(),
        &SolverSettings::default(),
    )?;
    total_dissipation_k(&grid, &k, model, &flow)
}

fn permutation(seed: u64, n: usize) -> Result<PropertyResult> {
    let mut rng = stream(seed, "permutation-1d");
    let mut t = Tally::new("permutation-1d");
    let darcy = MaterialModel::darcy(1.0)?;
    for _ in 0..n {
        let cells = rng.random_range(8..=64usize);
        let high = rng.random_range(0..=cells);
        let mut mask: Vec<bool> = (0..cells).map(|c| c < high).collect();
        let kh = 10f64.powf(rng.random_range(0.0..3.0));
        let reference = binary_layout_dissipation(&mask, 1.0, kh, &darcy)?;
        mask.shuffle(&mut rng);
        let phi = binary_layout_dissipation(&mask, 1.0, kh, &darcy)?;
        let rel = ((phi - reference) / reference).abs();
        t.record(1e-6 - rel, || {
            format!("cells={cells} high={high} kh={kh} rel={rel:.3e}")
        });
    }
    Ok(t.result)
}

/// Runs every randomized property with `n_samples` draws each.
pub fn run_property_sweeps(seed: u64, n_samples: usize) -> Result<Vec<PropertyResult>> {
    run_properties(seed, n_samples, PROPERTY_IDS)
}

/// Runs the named subset of [`PROPERTY_IDS`], in id order.
pub fn run_properties(seed: u64, n_samples: usize, ids: &[&str]) -> Result<Vec<PropertyResult>> {
    if n_samples == 0 {
        return Err(Error::Config("n_samples must be at least 1".into()));
    }
    let mut ids: Vec<&str> = ids.to_vec();
    ids.sort_unstable();
    ids.dedup();
    ids.par_iter()
        .map(|id| match *id {
            "proposition" => proposition(seed, n_samples),
            "lemma" => lemma(seed, n_samples),
            "am-gm" => am_gm(seed, n_samples),
            "drag-reduction" => drag_reduction(seed, n_samples),
            // Each sample is two FV solves; fewer draws cover the same ground.
            "permutation-1d" => permutation(seed, n_samples.div_ceil(50).max(20)),
            other => Err(Error::Config(format!("unknown property '{other}'"))),
        })
        .collect()
}

/// One perturbation of the stationarity check, with its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct MptResult {
    pub id: String,
    pub a1: f64,
    pub predicted: f64,
    pub bound: f64,
    pub passed: bool,
}

/// Darcy stationarity and Darcy-Forchheimer falsification on a smooth
/// heterogeneous rectangle.
///
/// Darcy entries pass when |a1| <= 1e-8 |Psi|. Forchheimer entries pass when
/// |a1| is at least 100x the Darcy noise floor and, for modes whose predicted
/// a1 is within 10x of the largest, a1 matches the prediction to 10%.
pub fn run_mpt_suite() -> Result<Vec<MptResult>> {
    let grid = StructuredGrid::cartesian((0.0, 2.0), 64, (0.0, 1.5), 48)?;
    let bcs = BoundaryConditions::new()
        .pressure("left", 100.0)
        .pressure("right", 1.0)
        .normal_velocity("bottom", 0.0)
        .normal_velocity("top", 0.0);
    let k: Vec<f64> = (0..grid.n_cells())
        .map(|c| {
            let [x, y] = grid.cell_center(c);
            1.0 + 9.0 * (0.5 + 0.5 * (2.0 * x).sin() * (3.0 * y).cos()).powi(3)
        })
        .collect();
    let perts = stream_function_perturbations(
        &grid,
        &[(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)],
        1.0 / 48.0,
    )?;
    let settings = SolverSettings::default();
    let src = Source::default();
    let eps = default_epsilons();

    let darcy = MaterialModel::darcy(1.0)?;
    let s = solve_flow(&grid, &k, &darcy, &bcs, &src, &settings)?;
    let mut out = Vec::new();
    let mut floor = 0.0f64;
    for e in mpt_stationarity_check(&grid, &k, &darcy, &bcs, &src, &s, &perts, &eps)? {
        let bound = 1e-8 * e.psi0.abs();
        floor = floor.max(e.a1.abs()).max(e.noise_floor);
        out.push(MptResult {
            id: format!("darcy/{}", e.id),
            a1: e.a1,
            predicted: e.predicted,
            bound,
            passed: e.a1.abs() <= bound,
        });
    }
    let df = MaterialModel::darcy_forchheimer(1.0, 1.0)?;
    let s = solve_flow(&grid, &k, &df, &bcs, &src, &settings)?;
    let entries = mpt_stationarity_check(&grid, &k, &df, &bcs, &src, &s, &perts, &eps)?;
    let largest = entries.iter().fold(0.0f64, |m, e| m.max(e.predicted.abs()));
    for e in entries {
        let compared = e.predicted.abs() >= 0.1 * largest;
        let matches = !compared || (e.a1 - e.predicted).abs() <= 0.1 * e.predicted.abs();
        out.push(MptResult {
            id: format!("darcy-forchheimer/{}", e.id),
            a1: e.a1,
            predicted: e.predicted,
            bound: 100.0 * floor,
            passed: e.a1.abs() >= 100.0 * floor && matches,
        });
    }
    Ok(out)
}

/// Subset of the harness to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Cases,
    Properties,
    Proposition,
    Lemma,
    AmGm,
    DragReduction,
    Permutation,
    Mpt,
}

impl Suite {
    pub const NAMES: &'static [&'static str] = &[
        "all",
        "cases",
        "properties",
        "proposition",
        "lemma",
        "am-gm",
        "drag-reduction",
        "permutation",
        "mpt",
    ];

    fn properties(self) -> &'static [&'static str] {
        match self {
            Suite::All | Suite::Properties => PROPERTY_IDS,
            Suite::Proposition => &["proposition"],
            Suite::Lemma => &["lemma"],
            Suite::AmGm => &["am-gm"],
            Suite::DragReduction => &["drag-reduction"],
            Suite::Permutation => &["permutation-1d"],
            Suite::Cases | Suite::Mpt => &[],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "cases" => Suite::Cases,
            "properties" => Suite::Properties,
            "proposition" => Suite::Proposition,
            "lemma" => Suite::Lemma,
            "am-gm" => Suite::AmGm,
            "drag-reduction" => Suite::DragReduction,
            "permutation" => Suite::Permutation,
            "mpt" => Suite::Mpt,
            _ => {
                return Err(Error::Config(format!(
                    "unknown suite '{s}'; expected one of {}",
                    Suite::NAMES.join(", ")
                )))
            }
        })
    }
}

/// Everything one `verify` invocation produced.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub seed: u64,
    pub samples: usize,
    pub cases: Vec<CaseResult>,
    pub properties: Vec<PropertyResult>,
    pub mpt: Vec<MptResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.passed)
            && self.properties.iter().all(|p| p.passed())
            && self.mpt.iter().all(|m| m.passed)
    }

    pub fn failures(&self) -> usize {
        self.cases.iter().filter(|c| !c.passed).count()
            + self.properties.iter().filter(|p| !p.passed()).count()
            + self.mpt.iter().filter(|m| !m.passed).count()
    }

    /// CSV with columns `section,id,value,reference,tolerance,order,status,detail`.
    ///
    /// - case rows: value is the finest max error, detail lists per-level
    ///   `cells:max:l2` triples;
    /// - property rows: value is the worst margin, reference the sample count,
    ///   tolerance the violation count;
    /// - mpt rows: value is a1, reference the predicted a1, tolerance the bound.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "# seed={} generator={GENERATOR} samples={}",
            self.seed, self.samples
        )?;
        writeln!(
            out,
            "section,id,value,reference,tolerance,order,status,detail"
        )?;
        for c in &self.cases {
            let levels: Vec<String> = c
                .cells
                .iter()
                .zip(&c.max_errors)
                .zip(&c.l2_errors)
                .map(|((n, m), l)| format!("{n}:{m:e}:{l:e}"))
                .collect();
            let mut detail = levels.join(";");
            if let Some(r) = &c.reason {
                detail = format!("{detail} {r}").trim().to_string();
            }
            writeln!(
                out,
                "case,{},{:e},,{:e},{},{},{}",
                c.id,
                c.finest_error(),
                c.tolerance,
                c.order,
                status(c.passed),
                csv_field(&detail)
            )?;
        }
        for p in &self.properties {
            writeln!(
                out,
                "property,{},{:e},{},{},,{},{}",
                p.id,
                p.worst_margin,
                p.samples,
                p.violations,
                status(p.passed()),
                csv_field(p.first_violation.as_deref().unwrap_or(""))
            )?;
        }
        for m in &self.mpt {
            writeln!(
                out,
                "mpt,{},{:e},{:e},{:e},,{},",
                m.id,
                m.a1,
                m.predicted,
                m.bound,
                status(m.passed)
            )?;
        }
        Ok(())
    }

    /// Human-readable summary, one line per entry plus a verdict.
    pub fn write_summary(&self, mut out: impl Write) -> Result<()> {
        writeln!(
            out,
            "verification report (seed {}, {GENERATOR}, {} samples)",
            self.seed, self.samples
        )?;
        for c in &self.cases {
            writeln!(
                out,
                "{} case {:<24} finest error {:.3e} (tol {:.0e}), order {}{}",
                status(c.passed),
                c.id,
                c.finest_error(),
                c.tolerance,
                c.order,
                c.reason
                    .as_ref()
                    .map(|r| format!(": {r}"))
                    .unwrap_or_default()
            )?;
        }
        for p in &self.properties {
            writeln!(
                out,
                "{} property {:<16} {} samples, {} violations, worst margin {:.3e}",
                status(p.passed()),
                p.id,
                p.samples,
                p.violations,
                p.worst_margin
            )?;
        }
        for m in &self.mpt {
            writeln!(
                out,
                "{} mpt {:<32} a1 {:+.6e} predicted {:+.6e}",
                status(m.passed),
                m.id,
                m.a1,
                m.predicted
            )?;
        }
        writeln!(
            out,
            "{}: {} failure(s)",
            if self.passed() { "PASSED" } else { "FAILED" },
            self.failures()
        )?;
        Ok(())
    }
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Default sample count of the property sweeps.
pub const DEFAULT_SAMPLES: usize = 10_000;

/// Runs `suite`. Cases run concurrently and are merged in id order.
pub fn run_suite(suite: Suite, seed: u64, samples: usize) -> Result<VerificationReport> {
    let cases = if matches!(suite, Suite::All | Suite::Cases) {
        let mut r = default_cases()?
            .par_iter()
            .map(run_case)
            .collect::<Result<Vec<_>>>()?;
        r.sort_by(|a, b| a.id.cmp(&b.id));
        r
    } else {
        Vec::new()
    };
    let props = suite.properties();
    let properties = if props.is_empty() {
        Vec::new()
    } else {
        run_properties(seed, samples, props)?
    };
    let mpt = if matches!(suite, Suite::All | Suite::Mpt) {
        run_mpt_suite()?
    } else {
        Vec::new()
    };
    Ok(VerificationReport {
        seed,
        samples,
        cases,
        properties,
        mpt,
    })
}
