//! Mechanical power functional and a numerical check of the minimum power
//! theorem: stationary for Darcy, not for state-dependent drag.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{BoundaryConditions, FlowState, MaterialModel, Source, StructuredGrid};
use crate::error::{Error, Result};
use crate::models::drag_factor;
use crate::primal::{Discretization, FaceKind};

/// Divergence-free face-flux perturbation, zero on prescribed-velocity faces,
/// with an optional independent pressure variation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePerturbation {
    pub id: String,
    /// Along-axis flux per face.
    pub flux: Vec<f64>,
    /// Per-cell pressure variation.
    pub pressure: Option<Vec<f64>>,
}

impl AdmissiblePerturbation {
    /// Checks zero discrete divergence (to 1e-12 relative to the largest
    /// face flux) and exact zeros on prescribed-velocity and inactive faces.
    pub fn validate(&self, grid: &StructuredGrid, bcs: &BoundaryConditions) -> Result<()> {
        if self.flux.len() != grid.n_faces() {
            return Err(Error::Shape {
                what: "perturbation flux",
                expected: grid.n_faces(),
                got: self.flux.len(),
            });
        }
        if let Some(dp) = &self.pressure {
            if dp.len() != grid.n_cells() {
                return Err(Error::Shape {
                    what: "perturbation pressure",
                    expected: grid.n_cells(),
                    got: dp.len(),
                });
            }
        }
        let k = vec![1.0; grid.n_cells()];
        let disc = Discretization::new(grid, &k, bcs, &Source::default())?;
        for (f, kind) in disc.kinds.iter().enumerate() {
            if matches!(kind, FaceKind::Flux { .. } | FaceKind::Inactive) && self.flux[f] != 0.0 {
                return Err(Error::Inadmissible(format!(
                    "{}: nonzero flux {} on face {f} with prescribed velocity",
                    self.id, self.flux[f]
                )));
            }
        }
        let scale = self.flux.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for c in grid.active_cells() {
            let d = divergence(grid, &self.flux, c);
            if d.abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::Inadmissible(format!(
                    "{}: divergence {d:e} in cell {c}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

fn divergence(grid: &StructuredGrid, flux: &[f64], c: usize) -> f64 {
    (0..grid.n_axes())
        .map(|axis| {
            let (lo, hi) = grid.cell_faces(c, axis);
            flux[hi] - flux[lo]
        })
        .sum()
}

fn fluxes_of(grid: &StructuredGrid, w: &FlowState) -> Vec<f64> {
    (0..grid.n_faces()).map(|f| w.face_flux(grid, f)).collect()
}

/// Ψ̂ with the drag evaluated at (flux, p) and the multiplier term
/// -Σ p_c (outflow_c - Q_c V_c).
fn psi_hat(
    disc: &Discretization,
    model: &MaterialModel,
    source: &Source,
    flux: &[f64],
    p: &[f64],
    body_force: [f64; 2],
) -> Result<f64> {
    let grid = disc.grid;
    let mut total = 0.0;
    for f in 0..disc.n_faces() {
        let kind = disc.kinds[f];
        if kind == FaceKind::Inactive {
            continue;
        }
        let (m, _, _) = drag_factor(model, disc.face_speed(f, flux), disc.face_pressure(f, p))?;
        total += 0.5 * model.mu0 * m * disc.res[f] * flux[f] * flux[f];
        if let FaceKind::Dirichlet { upper, p0, .. } = kind {
            let outflow = if upper { flux[f] } else { -flux[f] };
            total += outflow * p0;
        }
    }
    for &c in &disc.active {
        let vol = grid.cell_volume(c);
        let mut vb = 0.0;
        for (axis, b) in body_force.iter().enumerate().take(grid.n_axes()) {
            let (lo, hi) = grid.cell_faces(c, axis);
            vb += 0.5 * (flux[lo] / disc.area[lo] + flux[hi] / disc.area[hi]) * b;
        }
        total -= vb * vol;
        total -= p[c] * (divergence(grid, flux, c) - source.value(c) * vol);
    }
    Ok(total)
}

/// Mechanical power of a kinematically admissible field `w` (velocities
/// from `w.face_velocity`, drag pressure from `w.pressure`).
pub fn psi(
    grid: &StructuredGrid,
    k: &[f64],
    model: &MaterialModel,
    bcs: &BoundaryConditions,
    source: &Source,
    w: &FlowState,
    body_force: [f64; 2],
) -> Result<f64> {
    w.check_shape(grid)?;
    let disc = Discretization::new(grid, k, bcs, source)?;
    let flux = fluxes_of(grid, w);
    let scale = flux.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (f, kind) in disc.kinds.iter().enumerate() {
        if let FaceKind::Flux { flux: q, .. } = *kind {
            if (flux[f] - q).abs() > 1e-12 * scale.max(q.abs()) {
                return Err(Error::Inadmissible(format!(
                    "flux {} on face {f} differs from the prescribed {q}",
                    flux[f]
                )));
            }
        }
    }
    let src_scale = scale
        + grid
            .active_cells()
            .map(|c| (source.value(c) * grid.cell_volume(c)).abs())
            .fold(0.0, f64::max);
    for &c in &disc.active {
        let r = divergence(grid, &flux, c) - source.value(c) * grid.cell_volume(c);
        if r.abs() > 1e-9 * src_scale.max(f64::MIN_POSITIVE) {
            return Err(Error::Inadmissible(format!(
                "continuity residual {r:e} in cell {c}"
            )));
        }
    }
    psi_hat(&disc, model, source, &flux, &w.pressure, body_force)
}

/// Stream-function perturbations on a planar grid: ψ = sin(mπx̂) sin(nπŷ) at
/// vertices, zeroed on the boundary of the active region, differenced into
/// face fluxes. Each is scaled so its largest face flux equals `amplitude`.
pub fn stream_function_perturbations(
    grid: &StructuredGrid,
    modes: &[(u32, u32)],
    amplitude: f64,
) -> Result<Vec<AdmissiblePerturbation>> {
    if grid.n_axes() != 2 {
        return Err(Error::Unsupported(
            "stream functions need a planar grid".into(),
        ));
    }
    let (nx, ny) = grid.dims();
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    // A vertex is interior when all four surrounding cells are active.
    let interior = |i: usize, j: usize| -> bool {
        if i == 0 || j == 0 || i == nx || j == ny {
            return false;
        }
        [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)]
            .iter()
            .all(|&(a, b)| grid.is_active(grid.cell_index(a, b)))
    };
    modes
        .iter()
        .map(|&(m, n)| {
            let mut psi = vec![0.0; (nx + 1) * (ny + 1)];
            for j in 0..=ny {
                for i in 0..=nx {
                    if interior(i, j) {
                        let x = i as f64 / nx as f64;
                        let y = j as f64 / ny as f64;
                        psi[vid(i, j)] = (m as f64 * std::f64::consts::PI * x).sin()
                            * (n as f64 * std::f64::consts::PI * y).sin();
                    }
                }
            }
            let mut flux = vec![0.0; grid.n_faces()];
            for j in 0..ny {
                for i in 0..=nx {
                    flux[grid.face0(i, j)] = psi[vid(i, j + 1)] - psi[vid(i, j)];
                }
            }
            for j in 0..=ny {
                for i in 0..nx {
                    flux[grid.face1(i, j)] = -(psi[vid(i + 1, j)] - psi[vid(i, j)]);
                }
            }
            let peak = flux.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if peak == 0.0 {
                return Err(Error::Inadmissible(format!(
                    "mode ({m}, {n}) vanishes on this grid"
                )));
            }
            flux.iter_mut().for_each(|v| *v *= amplitude / peak);
            Ok(AdmissiblePerturbation {
                id: format!("stream-{m}-{n}"),
                flux,
                pressure: None,
            })
        })
        .collect()
}

/// The constant-flux perturbation of a one-axis grid; requires no
/// prescribed-velocity faces.
pub fn uniform_flux_perturbation(
    grid: &StructuredGrid,
    bcs: &BoundaryConditions,
    amplitude: f64,
) -> Result<AdmissiblePerturbation> {
    if grid.n_axes() != 1 {
        return Err(Error::Unsupported(
            "uniform flux perturbation needs a one-axis grid".into(),
        ));
    }
    let p = AdmissiblePerturbation {
        id: "uniform-flux".into(),
        flux: vec![amplitude; grid.n_faces()],
        pressure: None,
    };
    p.validate(grid, bcs)?;
    Ok(p)
}

/// Pressure-only variations sin(mπx̂) along axis 0 (or radius), scaled to
/// `amplitude`.
pub fn pressure_perturbations(
    grid: &StructuredGrid,
    modes: &[u32],
    amplitude: f64,
) -> Vec<AdmissiblePerturbation> {
    let (nx, _) = grid.dims();
    modes
        .iter()
        .map(|&m| {
            let dp = (0..grid.n_cells())
                .map(|c| {
                    let (i, _) = grid.cell_ij(c);
                    let x = (i as f64 + 0.5) / nx as f64;
                    amplitude * (m as f64 * std::f64::consts::PI * x).sin()
                })
                .collect();
            AdmissiblePerturbation {
                id: format!("pressure-{m}"),
                flux: vec![0.0; grid.n_faces()],
                pressure: Some(dp),
            }
        })
        .collect()
}

/// Default ε ladder: geometric from 1e-2 down to 1e-4, both signs.
pub fn default_epsilons() -> Vec<f64> {
    let mut out = Vec::new();
    for e in [1e-2, 5e-3, 2e-3, 1e-3, 5e-4, 2e-4, 1e-4] {
        out.push(e);
        out.push(-e);
    }
    out
}

/// One row of the stationarity report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityEntry {
    pub id: String,
    /// Fitted first-order coefficient of Ψ̂(x + εδx) - Ψ̂(x).
    pub a1: f64,
    /// Failure integral ∫ ½(∂α/∂v·δv + ∂α/∂p·δp)|v|² by cell-midpoint quadrature.
    pub predicted: f64,
    pub a2: f64,
    pub psi0: f64,
    /// Round-off floor of the a1 fit.
    pub noise_floor: f64,
}

/// Fits Ψ̂(v + εδv, p + εδp) ≈ Ψ̂ + a1 ε + a2 ε² for every perturbation.
#[allow(clippy::too_many_arguments)]
pub fn mpt_stationarity_check(
    grid: &StructuredGrid,
    k: &[f64],
    model: &MaterialModel,
    bcs: &BoundaryConditions,
    source: &Source,
    solution: &FlowState,
    perturbations: &[AdmissiblePerturbation],
    epsilons: &[f64],
) -> Result<Vec<StationarityEntry>> {
    solution.check_shape(grid)?;
    if epsilons.len() < 2 || epsilons.iter().any(|e| *e == 0.0 || !e.is_finite()) {
        return Err(Error::Numerical(
            "need at least two finite nonzero epsilons".into(),
        ));
    }
    let disc = Discretization::new(grid, k, bcs, source)?;
    let flux = fluxes_of(grid, solution);
    let p = &solution.pressure;
    let psi0 = psi_hat(&disc, model, source, &flux, p, [0.0; 2])?;
    for pert in perturbations {
        pert.validate(grid, bcs)?;
    }
    perturbations
        .par_iter()
        .map(|pert| {
            let mut rows = Vec::with_capacity(epsilons.len());
            let mut magnitude = 0.0f64;
            for &eps in epsilons {
                let f: Vec<f64> = flux
                    .iter()
                    .zip(&pert.flux)
                    .map(|(a, b)| a + eps * b)
                    .collect();
                let pp: Vec<f64> = match &pert.pressure {
                    Some(dp) => p.iter().zip(dp).map(|(a, b)| a + eps * b).collect(),
                    None => p.clone(),
                };
                let v = psi_hat(&disc, model, source, &f, &pp, [0.0; 2])?;
                magnitude = magnitude.max(v.abs());
                rows.push((eps, v - psi0));
            }
            let (a1, a2) = fit_quadratic(&rows)?;
            let eps_min = epsilons.iter().fold(f64::INFINITY, |m, e| m.min(e.abs()));
            let noise_floor =
                16.0 * f64::EPSILON * magnitude.max(psi0.abs()) * (disc.n_faces() as f64).sqrt()
                    / eps_min;
            Ok(StationarityEntry {
                id: pert.id.clone(),
                a1,
                predicted: failure_integral(grid, k, model, solution, pert)?,
                a2,
                psi0,
                noise_floor,
            })
        })
        .collect()
}

/// Least squares for y = a1 ε + a2 ε².
fn fit_quadratic(rows: &[(f64, f64)]) -> Result<(f64, f64)> {
    let (mut s2, mut s3, mut s4, mut sy1, mut sy2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(e, y) in rows {
        s2 += e * e;
        s3 += e * e * e;
        s4 += e * e * e * e;
        sy1 += e * y;
        sy2 += e * e * y;
    }
    let det = s2 * s4 - s3 * s3;
    if !(det.abs() > 1e-300) || det.abs() < 1e-12 * s2 * s4 {
        return Err(Error::Numerical("ill-conditioned epsilon ladder".into()));
    }
    Ok(((sy1 * s4 - sy2 * s3) / det, (s2 * sy2 - s3 * sy1) / det))
}

/// ∫ ½(∂α/∂v·δv + ∂α/∂p·δp)|v|² with cell-averaged velocities.
pub fn failure_integral(
    grid: &StructuredGrid,
    k: &[f64],
    model: &MaterialModel,
    solution: &FlowState,
    pert: &AdmissiblePerturbation,
) -> Result<f64> {
    let mut total = 0.0;
    for c in grid.active_cells() {
        let v = solution.cell_velocity(grid, c);
        let mut dv = [0.0; 2];
        for (axis, d) in dv.iter_mut().enumerate().take(grid.n_axes()) {
            let (lo, hi) = grid.cell_faces(c, axis);
            *d = 0.5 * (pert.flux[lo] / grid.face_area(lo) + pert.flux[hi] / grid.face_area(hi));
        }
        let s2 = v[0] * v[0] + v[1] * v[1];
        let s = s2.sqrt();
        let (_, dm_dp, dm_ds) = drag_factor(model, s, solution.pressure[c])?;
        let ds = if s > 0.0 {
            (v[0] * dv[0] + v[1] * dv[1]) / s
        } else {
            0.0
        };
        let dp = pert.pressure.as_ref().map_or(0.0, |d| d[c]);
        total += 0.5 * model.mu0 / k[c] * (dm_ds * ds + dm_dp * dp) * s2 * grid.cell_volume(c);
    }
    Ok(total)
}

/// Writes `perturbation_id,a1,predicted_a1,a2`.
pub fn write_report(mut out: impl Write, entries: &[StationarityEntry]) -> Result<()> {
    writeln!(out, "perturbation_id,a1,predicted_a1,a2")?;
    for e in entries {
        writeln!(out, "{},{:e},{:e},{:e}", e.id, e.a1, e.predicted, e.a2)?;
    }
    Ok(())
}
