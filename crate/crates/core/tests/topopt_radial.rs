use porotopo::analytic::{optimal_interface_2d, optimal_interface_3d};
use porotopo::topopt::{gray_fraction, interface_radius, optimize};
use porotopo::{
    BoundaryConditions, DesignProblem, Direction, MaterialModel, Source, StructuredGrid,
};

fn run(grid: StructuredGrid, gamma: f64, xi_hat: f64) {
    let h = grid.cell_width(0);
    let bcs = BoundaryConditions::new()
        .pressure("inner", 100.0)
        .pressure("outer", 1.0);
    let mut problem = DesignProblem::new(grid, bcs, Source::default(), gamma, 1.0, 10.0)
        .unwrap()
        .with_direction(Direction::Maximize);
    problem.penal = 10.0;
    let n = problem.grid.n_cells();
    let model = MaterialModel::darcy(1.0).unwrap();
    let t = std::time::Instant::now();
    let state = optimize(&problem, &vec![gamma; n], &model).unwrap();
    let xi = interface_radius(&problem.grid, &state.physical).unwrap();
    let gray = gray_fraction(&problem.grid, &state.physical, 0.05, 0.95);
    println!(
        "iters {} xi {xi} (oracle {xi_hat}, {:.2} cells) gray {gray:.4} phi {} in {:?}",
        state.iteration,
        (xi - xi_hat).abs() / h,
        state.phi(),
        t.elapsed()
    );
    for w in state.phi_history.windows(2) {
        assert!(w[1] >= w[0]);
    }
    assert!((xi - xi_hat).abs() <= h);
    assert!(gray <= 0.05);
}

#[test]
fn annulus_interface_lands_on_the_analytic_optimum() {
    let opt = optimal_interface_2d(0.3, 0.1, 1.0, 1.0, 10.0).unwrap();
    run(
        StructuredGrid::cylindrical(0.1, 1.0, 256).unwrap(),
        0.3,
        opt.xi_hat,
    );
}

#[test]
fn sphere_interface_lands_on_the_analytic_optimum() {
    let opt = optimal_interface_3d(0.1, 0.1, 1.0, 10.0).unwrap();
    run(
        StructuredGrid::spherical(0.1, 1.0, 256).unwrap(),
        0.1,
        opt.xi_hat,
    );
}
