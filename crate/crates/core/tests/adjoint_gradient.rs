use porotopo::topopt::{objective, objective_and_gradient};
use porotopo::{BoundaryConditions, DesignProblem, MaterialModel, Source, StructuredGrid};

const FD_STEP: f64 = 1e-6;
const REL_TOL: f64 = 1e-5;

fn densities(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.2 + 0.6 * ((i as f64 * 0.618_034).fract()))
        .collect()
}

fn check(problem: &DesignProblem, model: &MaterialModel, cells: &[usize]) {
    let rho = densities(problem.grid.n_cells());
    let eval = objective_and_gradient(problem, &rho, model)
        .unwrap_or_else(|e| panic!("{:?} {:?}: {e}", model.law, problem.bcs));
    let scale = eval.gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
    for &c in cells {
        let mut up = rho.clone();
        let mut dn = rho.clone();
        up[c] += FD_STEP;
        dn[c] -= FD_STEP;
        let fd = (objective(problem, &up, model).unwrap()
            - objective(problem, &dn, model).unwrap())
            / (2.0 * FD_STEP);
        let err = (fd - eval.gradient[c]).abs() / scale;
        assert!(
            err < REL_TOL,
            "{:?} cell {c}: adjoint {} fd {fd} (rel {err:.2e})",
            model.law,
            eval.gradient[c]
        );
    }
}

fn tight(mut p: DesignProblem) -> DesignProblem {
    p.solver.picard_tol = 1e-14;
    p.solver.picard_max_iter = 5000;
    p.optimizer.filter_radius = 1.5;
    p
}

fn models() -> Vec<MaterialModel> {
    vec![
        MaterialModel::darcy(1.0).unwrap(),
        MaterialModel::barus(1.0, 0.5).unwrap(),
        MaterialModel::linearized_barus(1.0, 0.5).unwrap(),
        MaterialModel::darcy_forchheimer(1.0, 1.0).unwrap(),
    ]
}

#[test]
fn one_dimensional_gradients_match_finite_differences() {
    for bcs in [
        BoundaryConditions::new()
            .pressure("left", 1.0)
            .pressure("right", 0.0),
        BoundaryConditions::new()
            .normal_velocity("left", -0.2)
            .pressure("right", 0.0),
    ] {
        let grid = StructuredGrid::interval(0.0, 1.0, 24).unwrap();
        let p = tight(DesignProblem::new(grid, bcs, Source::default(), 0.5, 0.1, 1.0).unwrap());
        for m in models() {
            check(&p, &m, &[0, 5, 12, 23]);
        }
    }
}

#[test]
fn radial_gradients_match_finite_differences() {
    for grid in [
        StructuredGrid::cylindrical(0.1, 1.0, 20).unwrap(),
        StructuredGrid::spherical(0.2, 1.0, 20).unwrap(),
    ] {
        let bcs = BoundaryConditions::new()
            .pressure("inner", 1.0)
            .pressure("outer", 0.0);
        let p = tight(DesignProblem::new(grid, bcs, Source::default(), 0.5, 0.1, 1.0).unwrap());
        for m in models() {
            check(&p, &m, &[0, 7, 19]);
        }
    }
}

#[test]
fn planar_gradients_match_finite_differences() {
    let grid = StructuredGrid::cartesian((0.0, 2.0), 8, (0.0, 1.5), 6).unwrap();
    let bcs = BoundaryConditions::new()
        .pressure("left", 1.0)
        .pressure("right", 0.0)
        .normal_velocity("bottom", 0.0)
        .normal_velocity("top", 0.0);
    let p = tight(DesignProblem::new(grid, bcs, Source::Uniform(0.3), 0.5, 0.1, 1.0).unwrap());
    for m in models() {
        check(&p, &m, &[0, 9, 20, 27, 47]);
    }
}
