//! Command-line front end.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use porotopo::analytic::{
    optimal_interface_2d, optimal_interface_3d, solve_1d, solve_annulus, solve_sphere,
    AnalyticSolution, AnnulusDrive, AnnulusLayout, InterfaceLayout1D, ShellLayout,
};
use porotopo::config::{reference_config, ModelConfig, RunConfig};
use porotopo::models::total_dissipation_k;
use porotopo::power::{
    default_epsilons, mpt_stationarity_check, pressure_perturbations,
    stream_function_perturbations, uniform_flux_perturbation, write_report,
};
use porotopo::primal::{mass_balance, solve_flow};
use porotopo::topopt::{interface_radius, interpolate_permeability, optimize_with};
use porotopo::verify::{run_suite, Suite, DEFAULT_SAMPLES};
use porotopo::{DragLaw, Driving, FaceOwner, FlowState, MaterialModel, StructuredGrid};

// Writes to stdout, ignoring errors such as a closed pipe.
macro_rules! out {
    ($($t:tt)*) => {{
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

/// Default output root when neither `--out` nor the config names a directory.
const OUTPUT_ENV: &str = "POROTOPO_OUTPUT";

#[derive(Parser)]
#[command(
    name = "porotopo",
    version,
    about = "Two-material porous layout optimization for Darcy-type flow"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate closed-form solutions.
    Analytic {
        #[command(subcommand)]
        case: AnalyticCase,
    },
    /// Solve the flow problem for the configured initial design.
    Solve(RunArgs),
    /// Run the design optimization.
    Optimize(RunArgs),
    /// Run the verification harness.
    Verify {
        /// all, cases, properties, proposition, lemma, am-gm, drag-reduction, permutation, mpt
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Samples per randomized property.
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Report directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First-order stationarity check of the power functional at the computed flow.
    MptCheck {
        #[command(flatten)]
        run: RunArgs,
        /// Perturbation amplitude in units of the smallest cell width.
        #[arg(long, default_value_t = 1.0)]
        amplitude: f64,
    },
    /// Print the annotated reference configuration, or a built-in's settings.
    Config {
        #[arg(long)]
        builtin: Option<String>,
    },
}

#[derive(Subcommand)]
enum AnalyticCase {
    /// Optimal annulus interface and the winning placement.
    AnnulusOptimum {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        ri: f64,
        #[arg(long)]
        ro: f64,
        #[arg(long, default_value_t = 1.0)]
        kl: f64,
        #[arg(long, default_value_t = 10.0)]
        kh: f64,
    },
    /// Optimal shell interface (outer radius 1) and the winning placement.
    SphereOptimum {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        ri: f64,
        #[arg(long, default_value_t = 1.0)]
        kl: f64,
        #[arg(long, default_value_t = 10.0)]
        kh: f64,
    },
    /// Two-material unit channel.
    #[command(name = "solve-1d")]
    Solve1d {
        /// darcy, barus, linearized-barus, df
        #[arg(long, default_value = "darcy")]
        model: String,
        #[arg(long = "betaB", alias = "beta-b", default_value_t = 0.0)]
        beta_b: f64,
        #[arg(long = "betaF", alias = "beta-f", default_value_t = 0.0)]
        beta_f: f64,
        #[arg(long)]
        k1: f64,
        #[arg(long)]
        k2: f64,
        #[arg(long)]
        xi: f64,
        /// pressure or velocity
        #[arg(long, default_value = "pressure")]
        driving: String,
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Darcy annulus with a given interface.
    Annulus {
        #[arg(long)]
        ri: f64,
        #[arg(long)]
        ro: f64,
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        k1: f64,
        #[arg(long)]
        k2: f64,
        #[arg(long, default_value_t = 100.0)]
        pi: f64,
        #[arg(long, default_value_t = 1.0)]
        po: f64,
        /// Outward inflow velocity at r_i; replaces the inner pressure.
        #[arg(long)]
        vo: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[command(flatten)]
        profile: ProfileArgs,
    },
    /// Nondimensional Darcy shell, p(r_i) = 1 and p(1) = 0.
    Sphere {
        #[arg(long)]
        ri: f64,
        #[arg(long)]
        xi: f64,
        #[arg(long)]
        k1: f64,
        #[arg(long)]
        k2: f64,
        #[command(flatten)]
        profile: ProfileArgs,
    },
}

#[derive(Args)]
struct ProfileArgs {
    /// Write r,pressure,velocity samples to this CSV.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value_t = 101)]
    points: usize,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "builtin")]
    config: Option<PathBuf>,
    /// Built-in problem name.
    #[arg(long)]
    builtin: Option<String>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Drag law override: darcy, barus, linearized-barus, df.
    #[arg(long)]
    law: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    mu0: f64,
    #[arg(long = "beta-b", alias = "betaB")]
    beta_b: Option<f64>,
    #[arg(long = "beta-f", alias = "betaF")]
    beta_f: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    source: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn load(&self) -> Result<RunConfig> {
        let mut cfg = match (&self.config, &self.builtin) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                RunConfig::from_toml(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(name)) => RunConfig::builtin(name),
            (None, None) => bail!("pass --config FILE or --builtin NAME"),
        };
        if self.resolution.is_some() {
            cfg.problem.resolution = self.resolution;
        }
        if let Some(law) = &self.law {
            cfg.model = Some(ModelConfig {
                law: law.parse::<DragLaw>()?,
                mu0: self.mu0,
                beta_b: self.beta_b.unwrap_or(0.0),
                beta_f: self.beta_f.unwrap_or(0.0),
            });
        } else if self.beta_b.is_some() || self.beta_f.is_some() {
            let m = cfg
                .model
                .as_mut()
                .context("--beta-b/--beta-f need --law or a [model] section")?;
            m.beta_b = self.beta_b.unwrap_or(m.beta_b);
            m.beta_f = self.beta_f.unwrap_or(m.beta_f);
        }
        if self.gamma.is_some() {
            cfg.design.gamma = self.gamma;
        }
        if self.source.is_some() {
            cfg.problem.source = self.source;
        }
        Ok(cfg)
    }

    fn output_dir(&self, cfg: &RunConfig, command: &str, name: &str) -> PathBuf {
        if let Some(d) = &self.out {
            return d.clone();
        }
        if let Some(d) = &cfg.output.dir {
            return PathBuf::from(d);
        }
        output_root().join(format!("{command}-{name}"))
    }
}

fn output_root() -> PathBuf {
    std::env::var_os(OUTPUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("porotopo-output"))
}

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(
        fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn write_profile(args: &ProfileArgs, sol: &AnalyticSolution) -> Result<()> {
    let Some(path) = &args.profile else {
        return Ok(());
    };
    if args.points < 2 {
        bail!("--points must be at least 2");
    }
    let mut out = create(path)?;
    writeln!(out, "r,pressure,velocity")?;
    for i in 0..args.points {
        let r = sol.inner + (sol.outer - sol.inner) * i as f64 / (args.points - 1) as f64;
        writeln!(out, "{r},{},{}", sol.pressure_at(r), sol.velocity_at(r))?;
    }
    out.flush()?;
    outln!("profile written to {}", path.display());
    Ok(())
}

fn print_solution(sol: &AnalyticSolution) {
    outln!("C = {:.6}", sol.constant);
    outln!("Phi = {:.6}", sol.phi);
    let (a, b) = sol.one_sided_pressures();
    outln!("p(xi-) = {a:.6}, p(xi+) = {b:.6}");
    for i in 0..5 {
        let r = sol.inner + (sol.outer - sol.inner) * i as f64 / 4.0;
        outln!(
            "  r = {r:.4}: p = {:.6}, v = {:.6}",
            sol.pressure_at(r),
            sol.velocity_at(r)
        );
    }
}

fn cmd_analytic(case: AnalyticCase) -> Result<bool> {
    match case {
        AnalyticCase::AnnulusOptimum {
            gamma,
            ri,
            ro,
            kl,
            kh,
        } => {
            let o = optimal_interface_2d(gamma, ri, ro, kl, kh)?;
            outln!("xi_hat = {:.6}", o.xi_hat);
            outln!("xi_hat (high-k outer) = {:.6}", o.xi_hat_outer);
            outln!("upsilon (high-k inner) = {:.6}", o.value_inner);
            outln!("upsilon (high-k outer) = {:.6}", o.value_outer);
            outln!("verdict: {}", o.verdict.label());
        }
        AnalyticCase::SphereOptimum { gamma, ri, kl, kh } => {
            let o = optimal_interface_3d(gamma, ri, kl, kh)?;
            outln!("xi_hat = {:.6}", o.xi_hat);
            outln!("xi_hat (high-k outer) = {:.6}", o.xi_hat_outer);
            outln!("phi (high-k inner) = {:.6}", o.value_inner);
            outln!("phi (high-k outer) = {:.6}", o.value_outer);
            outln!("verdict: {}", o.verdict.label());
        }
        AnalyticCase::Solve1d {
            model,
            beta_b,
            beta_f,
            k1,
            k2,
            xi,
            driving,
            profile,
        } => {
            let m = MaterialModel::new(model.parse()?, 1.0, beta_b, beta_f)?;
            let d: Driving = driving.parse()?;
            let sol = solve_1d(&m, d, &InterfaceLayout1D::new(xi, k1, k2)?)?;
            print_solution(&sol);
            write_profile(&profile, &sol)?;
        }
        AnalyticCase::Annulus {
            ri,
            ro,
            xi,
            k1,
            k2,
            pi,
            po,
            vo,
            mu,
            profile,
        } => {
            let drive = match vo {
                Some(v_o) => AnnulusDrive::Velocity { v_o, p_o: po },
                None => AnnulusDrive::Pressure { p_i: pi, p_o: po },
            };
            let sol = solve_annulus(&AnnulusLayout::new(ri, ro, xi, k1, k2)?, drive, mu)?;
            print_solution(&sol);
            write_profile(&profile, &sol)?;
        }
        AnalyticCase::Sphere {
            ri,
            xi,
            k1,
            k2,
            profile,
        } => {
            let sol = solve_sphere(&ShellLayout::new(ri, xi, k1, k2)?)?;
            print_solution(&sol);
            write_profile(&profile, &sol)?;
        }
    }
    Ok(true)
}

/// |outflow - source| relative to the boundary flux and source magnitudes.
fn relative_imbalance(grid: &StructuredGrid, flow: &FlowState, out: f64, src: f64) -> f64 {
    let scale = (0..grid.n_faces())
        .filter(|&f| matches!(grid.face_owner(f), FaceOwner::Boundary { .. }))
        .map(|f| flow.face_flux(grid, f).abs())
        .sum::<f64>()
        .max(src.abs());
    if scale == 0.0 {
        0.0
    } else {
        (out - src).abs() / scale
    }
}

/// Mass-balance tolerance for `solve`.
const MASS_BALANCE_TOL: f64 = 1e-10;

fn cmd_solve(args: RunArgs) -> Result<bool> {
    let cfg = args.load()?;
    let run = cfg.resolve()?;
    let p = &run.problem;
    let k: Vec<f64> = run
        .initial
        .iter()
        .map(|&r| interpolate_permeability(r, p.kl, p.kh, p.penal))
        .collect();
    let flow = solve_flow(&p.grid, &k, &run.model, &p.bcs, &p.source, &p.solver)?;
    let phi = total_dissipation_k(&p.grid, &k, &run.model, &flow)?;
    let (out, src) = mass_balance(&p.grid, &flow, &p.source);
    let imbalance = relative_imbalance(&p.grid, &flow, out, src);
    let dir = args.output_dir(&cfg, "solve", &run.name);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.toml"), cfg.to_toml()?)?;
    let mut f = create(&dir.join("fields.csv"))?;
    porotopo::io::write_fields_csv(&mut f, &p.grid, &flow, &[("permeability", &k)])?;
    f.flush()?;
    let mut v = create(&dir.join("fields.vtk"))?;
    porotopo::io::write_vtk(
        &mut v,
        &p.grid,
        &run.name,
        Some(&flow),
        &[("permeability", &k)],
    )?;
    v.flush()?;
    let ok = imbalance <= MASS_BALANCE_TOL;
    let summary = format!(
        "problem: {}\nlaw: {}\ncells: {}\npicard_iterations: {}\nphi: {:.10e}\nmax_speed: {:.10e}\n\
         net_outflow: {:.10e}\nsource_total: {:.10e}\nrelative_imbalance: {:.3e}\nmass_balance: {}\n",
        run.name,
        run.model.law.name(),
        p.grid.active_cells().count(),
        flow.picard_iterations,
        phi,
        flow.max_speed(&p.grid),
        out,
        src,
        imbalance,
        if ok { "PASS" } else { "FAIL" }
    );
    fs::write(dir.join("summary.txt"), &summary)?;
    out!("{summary}");
    outln!("output: {}", dir.display());
    Ok(ok)
}

fn cmd_optimize(args: RunArgs) -> Result<bool> {
    let cfg = args.load()?;
    let run = cfg.resolve()?;
    let p = &run.problem;
    let state = optimize_with(p, &run.initial, &run.model, |s| {
        eprintln!(
            "iter {:>4}  phi {:.8e}  volume {:.5}  change {:.3e}",
            s.iteration,
            s.phi(),
            s.volume_history.last().copied().unwrap_or(f64::NAN),
            s.change
        );
    })?;
    let k: Vec<f64> = state
        .physical
        .iter()
        .map(|&r| interpolate_permeability(r, p.kl, p.kh, p.penal))
        .collect();
    let dir = args.output_dir(&cfg, "optimize", &run.name);
    porotopo::io::write_run_directory(&dir, &cfg.to_toml()?, &p.grid, &state, &k)?;
    let mut summary = format!(
        "problem: {}\nlaw: {}\niterations: {}\nconverged: {}\nphi: {:.10e}\nmax_speed: {:.10e}\nvolume_fraction: {:.6}\n",
        run.name,
        run.model.law.name(),
        state.iteration,
        state.converged,
        state.phi(),
        state.flow.max_speed(&p.grid),
        state.volume_history.last().copied().unwrap_or(f64::NAN),
    );
    let mut ok = true;
    if let Some(oracle) = run.oracle_interface {
        let h = p.grid.min_cell_width();
        let computed = interface_radius(&p.grid, &state.physical);
        let error_cells = computed.map(|x| (x - oracle).abs() / h);
        ok = error_cells.is_some_and(|e| e <= 1.0);
        let row = format!(
            "{},{oracle},{},{h},{},{}\n",
            run.name,
            computed.map(|x| x.to_string()).unwrap_or_default(),
            error_cells.map(|e| e.to_string()).unwrap_or_default(),
            ok
        );
        fs::write(
            dir.join("comparison.csv"),
            format!("problem,oracle_xi,computed_xi,cell_width,error_cells,within_one_cell\n{row}"),
        )?;
        summary.push_str(&format!(
            "oracle_interface: {oracle:.6}\ncomputed_interface: {}\nerror_cells: {}\n",
            computed
                .map(|x| format!("{x:.6}"))
                .unwrap_or_else(|| "none".into()),
            error_cells
                .map(|e| format!("{e:.3}"))
                .unwrap_or_else(|| "n/a".into())
        ));
    }
    fs::write(dir.join("summary.txt"), &summary)?;
    out!("{summary}");
    outln!("output: {}", dir.display());
    Ok(ok)
}

fn cmd_verify(suite: &str, seed: u64, samples: usize, out: Option<PathBuf>) -> Result<bool> {
    let suite: Suite = suite.parse()?;
    let report = run_suite(suite, seed, samples)?;
    let dir = out.unwrap_or_else(|| output_root().join("verify"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut csv = create(&dir.join("verify.csv"))?;
    report.write_csv(&mut csv)?;
    csv.flush()?;
    let mut text = Vec::new();
    report.write_summary(&mut text)?;
    fs::write(dir.join("verify-summary.txt"), &text)?;
    let _ = std::io::stdout().write_all(&text);
    outln!("output: {}", dir.display());
    Ok(report.passed())
}

fn cmd_mpt(args: RunArgs, amplitude: f64) -> Result<bool> {
    let cfg = args.load()?;
    let run = cfg.resolve()?;
    let p = &run.problem;
    let k: Vec<f64> = run
        .initial
        .iter()
        .map(|&r| interpolate_permeability(r, p.kl, p.kh, p.penal))
        .collect();
    let flow = solve_flow(&p.grid, &k, &run.model, &p.bcs, &p.source, &p.solver)?;
    let h = p.grid.min_cell_width();
    let perts = if p.grid.n_axes() == 2 {
        stream_function_perturbations(
            &p.grid,
            &[(1, 1), (1, 2), (2, 1), (2, 2), (3, 1)],
            amplitude * h,
        )?
    } else {
        let mut v = vec![uniform_flux_perturbation(&p.grid, &p.bcs, amplitude * h)?];
        v.extend(pressure_perturbations(&p.grid, &[1, 2], amplitude * h));
        v
    };
    let entries = mpt_stationarity_check(
        &p.grid,
        &k,
        &run.model,
        &p.bcs,
        &p.source,
        &flow,
        &perts,
        &default_epsilons(),
    )?;
    let dir = args.output_dir(&cfg, "mpt-check", &run.name);
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut f = create(&dir.join("mpt.csv"))?;
    write_report(&mut f, &entries)?;
    f.flush()?;
    let linear = !run.model.is_nonlinear();
    let mut ok = true;
    outln!("law: {}", run.model.law.name());
    for e in &entries {
        let stationary = e.a1.abs() <= 1e-8 * e.psi0.abs();
        if linear && !stationary {
            ok = false;
        }
        outln!(
            "{:<14} a1 {:+.6e}  predicted {:+.6e}  a2 {:+.6e}  {}",
            e.id,
            e.a1,
            e.predicted,
            e.a2,
            if stationary {
                "stationary"
            } else {
                "not stationary"
            }
        );
    }
    if linear {
        outln!(
            "verdict: {}",
            if ok {
                "PASS (stationary)"
            } else {
                "FAIL (not stationary)"
            }
        );
    } else {
        outln!("verdict: nonlinear law, first-order term reported against its prediction");
    }
    outln!("output: {}", dir.display());
    Ok(ok)
}

fn cmd_config(builtin: Option<String>) -> Result<bool> {
    match builtin {
        None => out!("{}", reference_config()),
        Some(name) => {
            let cfg = RunConfig::builtin(&name);
            cfg.resolve()?;
            out!("{}", cfg.to_toml()?);
        }
    }
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Analytic { case } => cmd_analytic(case),
        Command::Solve(args) => cmd_solve(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Verify {
            suite,
            seed,
            samples,
            out,
        } => cmd_verify(&suite, seed, samples, out),
        Command::MptCheck { run, amplitude } => cmd_mpt(run, amplitude),
        Command::Config { builtin } => cmd_config(builtin),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
