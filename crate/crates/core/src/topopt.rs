//! Density-based design loop: SIMP interpolation, conic density filter,
//! discrete-adjoint dissipation gradient and an optimality-criteria update.

use serde::{Deserialize, Serialize};

use crate::domain::{DesignProblem, FlowState, MaterialModel, StructuredGrid};
use crate::error::{Error, Result};
use crate::linalg::Triplets;
use crate::primal::{solve_discrete_from, Discretization, FaceKind};

/// SIMP interpolation k = kl + rho^penal (kh - kl).
pub fn interpolate_permeability(rho: f64, kl: f64, kh: f64, penal: f64) -> f64 {
    kl + rho.powf(penal) * (kh - kl)
}

/// dk/drho of [`interpolate_permeability`].
pub fn interpolate_permeability_derivative(rho: f64, kl: f64, kh: f64, penal: f64) -> f64 {
    if rho <= 0.0 {
        if penal == 1.0 {
            kh - kl
        } else {
            0.0
        }
    } else {
        penal * rho.powf(penal - 1.0) * (kh - kl)
    }
}

/// Conic-weight, volume-weighted neighbourhood average over active cells.
#[derive(Debug, Clone)]
pub struct DensityFilter {
    /// Normalized weights per cell; empty rows mean identity.
    rows: Vec<Vec<(usize, f64)>>,
    identity: bool,
}

impl DensityFilter {
    /// `radius` is a length; 0 disables filtering.
    pub fn new(grid: &StructuredGrid, radius: f64) -> Result<Self> {
        if !(radius >= 0.0 && radius.is_finite()) {
            return Err(Error::Domain {
                name: "filter radius",
                value: radius,
                range: "[0, inf)",
            });
        }
        let n = grid.n_cells();
        if radius == 0.0 {
            return Ok(Self {
                rows: vec![Vec::new(); n],
                identity: true,
            });
        }
        let (nx, ny) = grid.dims();
        let two_d = grid.n_axes() == 2;
        let wx = (radius / grid.cell_width(0)).ceil() as isize;
        let wy = if two_d {
            (radius / grid.cell_width(1)).ceil() as isize
        } else {
            0
        };
        let mut rows = vec![Vec::new(); n];
        for c in 0..n {
            if !grid.is_active(c) {
                continue;
            }
            let (i, j) = grid.cell_ij(c);
            let xc = grid.cell_center(c);
            let mut row = Vec::new();
            let mut total = 0.0;
            for dj in -wy..=wy {
                let jj = j as isize + dj;
                if jj < 0 || jj >= ny as isize {
                    continue;
                }
                for di in -wx..=wx {
                    let ii = i as isize + di;
                    if ii < 0 || ii >= nx as isize {
                        continue;
                    }
                    let d = grid.cell_index(ii as usize, jj as usize);
                    if !grid.is_active(d) {
                        continue;
                    }
                    let xd = grid.cell_center(d);
                    let dist = if two_d {
                        (xc[0] - xd[0]).hypot(xc[1] - xd[1])
                    } else {
                        (xc[0] - xd[0]).abs()
                    };
                    let w = (radius - dist).max(0.0) * grid.cell_volume(d);
                    if w > 0.0 {
                        row.push((d, w));
                        total += w;
                    }
                }
            }
            for e in &mut row {
                e.1 /= total;
            }
            rows[c] = row;
        }
        Ok(Self {
            rows,
            identity: false,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn apply(&self, rho: &[f64]) -> Vec<f64> {
        if self.identity {
            return rho.to_vec();
        }
        self.rows
            .iter()
            .enumerate()
            .map(|(c, row)| {
                if row.is_empty() {
                    rho[c]
                } else {
                    row.iter().map(|&(d, w)| w * rho[d]).sum()
                }
            })
            .collect()
    }

    /// Adjoint of [`apply`](Self::apply), for chaining gradients.
    pub fn apply_transpose(&self, g: &[f64]) -> Vec<f64> {
        if self.identity {
            return g.to_vec();
        }
        let mut out = vec![0.0; g.len()];
        for (c, row) in self.rows.iter().enumerate() {
            if row.is_empty() {
                out[c] += g[c];
            }
            for &(d, w) in row {
                out[d] += w * g[c];
            }
        }
        out
    }
}

/// One-shot filter with an absolute radius.
pub fn density_filter(grid: &StructuredGrid, rho: &[f64], radius: f64) -> Result<Vec<f64>> {
    Ok(DensityFilter::new(grid, radius)?.apply(rho))
}

/// Dissipation, its gradient with respect to the design densities, and the
/// state it was computed from.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub phi: f64,
    pub gradient: Vec<f64>,
    pub physical: Vec<f64>,
    pub flow: FlowState,
}

/// Dissipation and its exact discrete-adjoint gradient with respect to the
/// per-cell permeability, for a converged flow state.
pub fn dissipation_and_permeability_gradient(
    grid: &StructuredGrid,
    k: &[f64],
    model: &MaterialModel,
    problem_bcs: &crate::domain::BoundaryConditions,
    source: &crate::domain::Source,
    flow: &FlowState,
) -> Result<(f64, Vec<f64>)> {
    let disc = Discretization::new(grid, k, problem_bcs, source)?;
    adjoint_gradient(&disc, model, flow)
}

fn adjoint_gradient(
    disc: &Discretization,
    model: &MaterialModel,
    flow: &FlowState,
) -> Result<(f64, Vec<f64>)> {
    let grid = disc.grid;
    let nf = disc.n_faces();
    let flux: Vec<f64> = flow
        .face_velocity
        .iter()
        .zip(&disc.area)
        .map(|(u, a)| u * a)
        .collect();
    let p = &flow.pressure;
    let factors = disc.factors(model, p, &flux)?;
    let mu0 = model.mu0;

    // Unknown numbering: momentum faces first, then active cells.
    let mut fidx = vec![usize::MAX; nf];
    let mut n_fu = 0;
    for f in 0..nf {
        if disc.kinds[f].is_unknown() {
            fidx[f] = n_fu;
            n_fu += 1;
        }
    }
    let n_c = disc.active.len();
    let cidx = |c: usize| disc.unknown[c];

    // Objective and its partials.
    let mut phi = 0.0;
    let mut g_face = vec![0.0; n_fu];
    let mut g_cell = vec![0.0; n_c];
    let mut dphi_dk = vec![0.0; grid.n_cells()];
    for &c in &disc.active {
        let v = flow.cell_velocity(grid, c);
        let s2 = v[0] * v[0] + v[1] * v[1];
        let s = s2.sqrt();
        let (m, dm_dp, dm_ds) = crate::models::drag_factor(model, s, p[c])?;
        let vol = grid.cell_volume(c);
        let phi_c = mu0 * m / disc.k[c] * s2 * vol;
        phi += phi_c;
        dphi_dk[c] = -phi_c / disc.k[c];
        g_cell[cidx(c)] = mu0 * dm_dp / disc.k[c] * s2 * vol;
        let coef = mu0 * vol / disc.k[c] * (m + 0.5 * dm_ds * s);
        for (axis, va) in v.iter().enumerate().take(grid.n_axes()) {
            let (lo, hi) = grid.cell_faces(c, axis);
            for g in [lo, hi] {
                if fidx[g] != usize::MAX {
                    g_face[fidx[g]] += coef * va / disc.area[g];
                }
            }
        }
    }

    // Jacobian blocks. Face rows: diagonal D, face-face coupling, face-cell B.
    // Cell rows: continuity C.
    let mut diag = vec![0.0; n_fu];
    let mut face_face: Vec<(usize, usize, f64)> = Vec::new();
    let mut b: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_fu];
    let mut cont: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n_fu];
    for f in 0..nf {
        let row = fidx[f];
        if row == usize::MAX {
            continue;
        }
        let fc = factors[f];
        let scale = mu0 * disc.res[f];
        diag[row] += scale * fc.m;
        if fc.dm_ds != 0.0 {
            for (g, d) in disc.face_speed_gradient(f, &flux) {
                let v = scale * flux[f] * fc.dm_ds * d;
                if g == f {
                    diag[row] += v;
                } else if fidx[g] != usize::MAX {
                    face_face.push((row, fidx[g], v));
                }
            }
        }
        if fc.dm_dp != 0.0 {
            for (c, w) in disc.face_pressure_weights(f) {
                b[row].push((cidx(c), scale * flux[f] * fc.dm_dp * w));
            }
        }
        match disc.kinds[f] {
            FaceKind::Interior { lo, hi } => {
                b[row].push((cidx(lo), -1.0));
                b[row].push((cidx(hi), 1.0));
                cont[row].push((cidx(lo), 1.0));
                cont[row].push((cidx(hi), -1.0));
            }
            FaceKind::Dirichlet { cell, upper, .. } => {
                let sgn = if upper { 1.0 } else { -1.0 };
                b[row].push((cidx(cell), -sgn));
                cont[row].push((cidx(cell), sgn));
            }
            _ => unreachable!("only momentum faces are unknowns"),
        }
    }

    let (lambda_f, _lambda_p) = if face_face.is_empty() {
        // Schur complement onto the cells: S = C D^-1 B, solve S^T lp = B^T D^-1 gF - gP.
        let mut st = Triplets::new(n_c);
        let mut rhs: Vec<f64> = g_cell.iter().map(|v| -v).collect();
        for row in 0..n_fu {
            for &(d, bv) in &b[row] {
                rhs[d] += bv * g_face[row] / diag[row];
                for &(c, cv) in &cont[row] {
                    st.push(d, c, cv * bv / diag[row]);
                }
            }
        }
        // Without pressure-dependent drag, -S is symmetric positive definite.
        let symmetric = factors.iter().all(|f| f.dm_dp == 0.0);
        let spd = symmetric
            .then(|| {
                let neg = Triplets {
                    n: n_c,
                    entries: st.entries.iter().map(|&(i, j, v)| (i, j, -v)).collect(),
                };
                neg.to_sym_banded()
                    .cholesky_solve(rhs.iter().map(|v| -v).collect())
                    .ok()
            })
            .flatten();
        let lp = match spd {
            Some(x) => x,
            None => st.to_banded(None).solve(rhs)?,
        };
        let lf: Vec<f64> = (0..n_fu)
            .map(|row| {
                let ct: f64 = cont[row].iter().map(|&(c, cv)| cv * lp[c]).sum();
                (g_face[row] - ct) / diag[row]
            })
            .collect();
        (lf, lp)
    } else {
        // Full transposed system ordered by position on the half-cell lattice.
        let n = n_fu + n_c;
        let mut jt = Triplets::new(n);
        for row in 0..n_fu {
            jt.push(row, row, diag[row]);
            for &(c, bv) in &b[row] {
                jt.push(n_fu + c, row, bv);
            }
            for &(c, cv) in &cont[row] {
                jt.push(row, n_fu + c, cv);
            }
        }
        for &(r, c, v) in &face_face {
            jt.push(c, r, v);
        }
        let mut keys: Vec<(usize, usize)> = Vec::with_capacity(n);
        let (nx, _) = grid.dims();
        let width = 2 * nx + 1;
        for f in 0..nf {
            if fidx[f] != usize::MAX {
                let (i, j) = grid.face_ij(f);
                let (x, y) = if grid.face_axis(f) == 0 {
                    (2 * i, 2 * j + 1)
                } else {
                    (2 * i + 1, 2 * j)
                };
                keys.push((y * width + x, fidx[f]));
            }
        }
        for &c in &disc.active {
            let (i, j) = grid.cell_ij(c);
            keys.push(((2 * j + 1) * width + 2 * i + 1, n_fu + cidx(c)));
        }
        keys.sort_unstable();
        let mut perm = vec![0usize; n];
        for (pos, &(_, u)) in keys.iter().enumerate() {
            perm[u] = pos;
        }
        let mut rhs_perm = vec![0.0; n];
        for row in 0..n_fu {
            rhs_perm[perm[row]] = g_face[row];
        }
        for c in 0..n_c {
            rhs_perm[perm[n_fu + c]] = g_cell[c];
        }
        let x = jt.to_banded(Some(&perm)).solve(rhs_perm)?;
        let lf = (0..n_fu).map(|row| x[perm[row]]).collect();
        let lp = (0..n_c).map(|c| x[perm[n_fu + c]]).collect();
        (lf, lp)
    };

    // dPhi/dk = dPhi/dk|explicit - lambda^T dR/dk.
    for f in 0..nf {
        let row = fidx[f];
        if row == usize::MAX {
            continue;
        }
        let coef = lambda_f[row] * mu0 * factors[f].m * flux[f];
        let [gl, gh] = disc.half[f];
        match disc.kinds[f] {
            FaceKind::Interior { lo, hi } => {
                dphi_dk[lo] += coef * gl / (disc.k[lo] * disc.k[lo]);
                dphi_dk[hi] += coef * gh / (disc.k[hi] * disc.k[hi]);
            }
            FaceKind::Dirichlet { cell, .. } => {
                let g = gl + gh;
                dphi_dk[cell] += coef * g / (disc.k[cell] * disc.k[cell]);
            }
            _ => {}
        }
    }
    Ok((phi, dphi_dk))
}

/// Physical (filtered) densities, permeabilities and the filter for `problem`.
fn physical_fields(
    problem: &DesignProblem,
    filter: &DensityFilter,
    rho: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let phys = filter.apply(rho);
    let k = phys
        .iter()
        .map(|&r| interpolate_permeability(r, problem.kl, problem.kh, problem.penal))
        .collect();
    (phys, k)
}

fn design_filter(problem: &DesignProblem) -> Result<DensityFilter> {
    DensityFilter::new(
        &problem.grid,
        problem.optimizer.filter_radius * problem.grid.min_cell_width(),
    )
}

fn check_rho(problem: &DesignProblem, rho: &[f64]) -> Result<()> {
    if rho.len() != problem.grid.n_cells() {
        return Err(Error::Shape {
            what: "density",
            expected: problem.grid.n_cells(),
            got: rho.len(),
        });
    }
    if let Some(&r) = rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::Domain {
            name: "rho",
            value: r,
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Dissipation at design densities `rho` and its gradient with respect to them.
pub fn objective_and_gradient(
    problem: &DesignProblem,
    rho: &[f64],
    model: &MaterialModel,
) -> Result<Evaluation> {
    let filter = design_filter(problem)?;
    evaluate(problem, &filter, rho, model, None)
}

/// Dissipation only (one primal solve).
pub fn objective(problem: &DesignProblem, rho: &[f64], model: &MaterialModel) -> Result<f64> {
    check_rho(problem, rho)?;
    let filter = design_filter(problem)?;
    let (_, k) = physical_fields(problem, &filter, rho);
    let flow = crate::primal::solve_flow(
        &problem.grid,
        &k,
        model,
        &problem.bcs,
        &problem.source,
        &problem.solver,
    )?;
    crate::models::total_dissipation_k(&problem.grid, &k, model, &flow)
}

fn evaluate(
    problem: &DesignProblem,
    filter: &DensityFilter,
    rho: &[f64],
    model: &MaterialModel,
    warm: Option<&FlowState>,
) -> Result<Evaluation> {
    check_rho(problem, rho)?;
    model.validate()?;
    let (phys, k) = physical_fields(problem, filter, rho);
    let disc = Discretization::new(&problem.grid, &k, &problem.bcs, &problem.source)?;
    let flow = solve_discrete_from(&disc, model, &problem.solver, warm)?;
    let (phi, dk) = adjoint_gradient(&disc, model, &flow)?;
    let dphys: Vec<f64> = dk
        .iter()
        .zip(&phys)
        .map(|(g, &r)| {
            g * interpolate_permeability_derivative(r, problem.kl, problem.kh, problem.penal)
        })
        .collect();
    let mut gradient = filter.apply_transpose(&dphys);
    for (c, g) in gradient.iter_mut().enumerate() {
        if !problem.grid.is_active(c) {
            *g = 0.0;
        }
    }
    Ok(Evaluation {
        phi,
        gradient,
        physical: phys,
        flow,
    })
}

/// Progress of the optimality-criteria loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OptimizerState {
    /// Design densities.
    pub rho: Vec<f64>,
    /// Filtered densities that define the permeability.
    pub physical: Vec<f64>,
    pub iteration: usize,
    pub phi_history: Vec<f64>,
    pub volume_history: Vec<f64>,
    pub change_history: Vec<f64>,
    /// Largest density change of the last accepted step.
    pub change: f64,
    /// Final bisection bracket of the volume multiplier.
    pub lagrange_bounds: (f64, f64),
    pub converged: bool,
    pub flow: FlowState,
}

impl OptimizerState {
    pub fn phi(&self) -> f64 {
        *self.phi_history.last().expect("history is never empty")
    }
}

fn volume_of(grid: &StructuredGrid, phys: &[f64]) -> f64 {
    grid.active_cells()
        .map(|c| phys[c] * grid.cell_volume(c))
        .sum()
}

const RHO_FLOOR: f64 = 1e-3;

/// One OC step: returns the candidate densities and the final multiplier bracket.
fn oc_update(
    problem: &DesignProblem,
    filter: &DensityFilter,
    rho: &[f64],
    grad: &[f64],
    dvol: &[f64],
) -> Result<(Vec<f64>, (f64, f64))> {
    let grid = &problem.grid;
    let opt = &problem.optimizer;
    let bound = problem.volume_bound();
    let candidate = |lambda: f64| -> Vec<f64> {
        (0..rho.len())
            .map(|c| {
                if !grid.is_active(c) {
                    return rho[c];
                }
                let lo = (rho[c] - opt.move_limit).max(0.0);
                let hi = (rho[c] + opt.move_limit).min(1.0);
                let b = (-grad[c]).max(0.0) / (lambda * dvol[c]);
                (rho[c].max(RHO_FLOOR) * b.powf(opt.eta)).clamp(lo, hi)
            })
            .collect()
    };
    let vol = |r: &[f64]| volume_of(grid, &filter.apply(r));
    let (mut lo, mut hi) = (1e-40f64, 1e40f64);
    let at_lo = candidate(lo);
    if vol(&at_lo) <= bound {
        return Ok((at_lo, (lo, lo)));
    }
    let at_hi = candidate(hi);
    if vol(&at_hi) > bound * (1.0 + 1e-12) + 1e-10 {
        return Err(Error::Bracket(format!(
            "volume {} exceeds the bound {} even at the largest multiplier",
            vol(&at_hi),
            bound
        )));
    }
    for _ in 0..400 {
        if hi / lo - 1.0 < 1e-13 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if vol(&candidate(mid)) > bound {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((candidate(hi), (lo, hi)))
}

/// Runs the optimality-criteria loop from `initial` design densities.
pub fn optimize(
    problem: &DesignProblem,
    initial: &[f64],
    model: &MaterialModel,
) -> Result<OptimizerState> {
    optimize_with(problem, initial, model, |_| {})
}

/// [`optimize`] with a callback invoked after the initial evaluation and each
/// accepted iteration.
pub fn optimize_with(
    problem: &DesignProblem,
    initial: &[f64],
    model: &MaterialModel,
    mut on_iteration: impl FnMut(&OptimizerState),
) -> Result<OptimizerState> {
    problem.validate()?;
    check_rho(problem, initial)?;
    let grid = &problem.grid;
    let filter = design_filter(problem)?;
    let bound = problem.volume_bound();
    let phys0 = filter.apply(initial);
    let vol0 = volume_of(grid, &phys0);
    if vol0 > bound + 1e-10 {
        return Err(Error::Infeasible(format!(
            "initial volume {vol0} exceeds the bound {bound}"
        )));
    }
    let sign = problem.direction.sign();
    let volumes: Vec<f64> = (0..grid.n_cells())
        .map(|c| {
            if grid.is_active(c) {
                grid.cell_volume(c)
            } else {
                0.0
            }
        })
        .collect();
    let dvol: Vec<f64> = filter
        .apply_transpose(&volumes)
        .iter()
        .map(|v| v.max(f64::MIN_POSITIVE))
        .collect();
    let measure = grid.measure();

    let mut rho = initial.to_vec();
    let mut eval = evaluate(problem, &filter, &rho, model, None)?;
    let mut state = OptimizerState {
        rho: rho.clone(),
        physical: eval.physical.clone(),
        iteration: 0,
        phi_history: vec![eval.phi],
        volume_history: vec![vol0 / measure],
        change_history: vec![0.0],
        change: f64::INFINITY,
        lagrange_bounds: (0.0, 0.0),
        converged: false,
        flow: eval.flow.clone(),
    };
    on_iteration(&state);
    for it in 1..=problem.optimizer.max_iterations {
        let grad: Vec<f64> = eval.gradient.iter().map(|g| sign * g).collect();
        let (mut cand, bounds) = oc_update(problem, &filter, &rho, &grad, &dvol)?;
        let mut cand_eval = evaluate(problem, &filter, &cand, model, Some(&eval.flow))?;
        let mut halvings = 0;
        while sign * cand_eval.phi > sign * eval.phi && halvings < problem.optimizer.max_halvings {
            for c in 0..cand.len() {
                cand[c] = rho[c] + 0.5 * (cand[c] - rho[c]);
            }
            cand_eval = evaluate(problem, &filter, &cand, model, Some(&eval.flow))?;
            halvings += 1;
        }
        if sign * cand_eval.phi > sign * eval.phi {
            // No improving step along the OC direction.
            state.converged = true;
            break;
        }
        let change = cand
            .iter()
            .zip(&rho)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        rho = cand;
        eval = cand_eval;
        state.rho = rho.clone();
        state.physical = eval.physical.clone();
        state.iteration = it;
        state.phi_history.push(eval.phi);
        state
            .volume_history
            .push(volume_of(grid, &eval.physical) / measure);
        state.change_history.push(change);
        state.change = change;
        state.lagrange_bounds = bounds;
        state.flow = eval.flow.clone();
        on_iteration(&state);
        if change < problem.optimizer.tolerance {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}

/// Location of the 0.5 crossing of a radial or 1D density profile that is
/// high inside and low outside, by linear interpolation between centres.
pub fn interface_radius(grid: &StructuredGrid, physical: &[f64]) -> Option<f64> {
    if grid.n_axes() != 1 {
        return None;
    }
    (0..physical.len().saturating_sub(1)).find_map(|c| {
        let (a, b) = (physical[c], physical[c + 1]);
        (a >= 0.5 && b < 0.5).then(|| {
            let (ra, rb) = (grid.cell_center(c)[0], grid.cell_center(c + 1)[0]);
            ra + (a - 0.5) / (a - b) * (rb - ra)
        })
    })
}

/// Volume fraction of active cells with density strictly inside (lo, hi).
pub fn gray_fraction(grid: &StructuredGrid, physical: &[f64], lo: f64, hi: f64) -> f64 {
    let gray: f64 = grid
        .active_cells()
        .filter(|&c| physical[c] > lo && physical[c] < hi)
        .map(|c| grid.cell_volume(c))
        .sum();
    gray / grid.measure()
}
