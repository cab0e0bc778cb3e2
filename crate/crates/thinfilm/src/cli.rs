//! Command-line orchestration: wiring configs into solver runs and reports.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::config::{nondimensionalize, InitialSpec, Mode, RunConfig};
use crate::diagnostics::{
    dissipation_rate, fit_decay, total_energy, total_mass, DiagnosticsRecord,
};
use crate::equilibrium::{lagrange_multiplier, steady_profile, EquilibriumSolution};
use crate::error::Error;
use crate::evolution::{FilmState, Geometry, Solver, StepInfo};
use crate::output::{
    read_snapshot, render_energy, render_profiles, write_diag_file, write_snapshot, Snapshot,
};
use crate::poincare::discrete_poincare;

#[derive(Parser, Debug)]
#[command(name = "thinfilm", version, about = "thin-film free-boundary solver")]
pub struct Cli {
    #[command(subcommand)]
    pub cmd: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Time-march a configuration and write diagnostics, snapshots, plots.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Print the analytic steady state and write the sampled parabola.
    Equilibrium {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Perturb the steady state, run to decay, and fit exponential rates.
    Stability {
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Discrete Poincaré constant of the configured domain.
    Poincare { config: PathBuf },
    /// Grid and time-step refinement report.
    Convergence { config: PathBuf },
    /// Scaling relations from physical parameters.
    Nondim { params: PathBuf },
}

/// Failure classes mapped to process exit codes (2 config, 3 runtime).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

fn cfg_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(cfg_err)?;
    RunConfig::parse(&text).map_err(cfg_err)
}

struct Prepared<'a> {
    solver: Solver<'a, f64>,
    initial: FilmState<f64>,
    equilibrium: Option<EquilibriumSolution<f64>>,
}

fn prepare<'a>(cfg: &RunConfig, profile: &'a crate::solid::SolidProfile<f64>) -> Result<Prepared<'a>, CliError> {
    let resolved = cfg.resolve().map_err(cfg_err)?;
    let solver = Solver::new(
        profile,
        resolved.k,
        resolved.geometry,
        cfg.grid_n,
        resolved.stepper,
    )
    .map_err(cfg_err)?;
    let (equilibrium, base): (Option<EquilibriumSolution<f64>>, FilmState<f64>) =
        match resolved.geometry {
            Geometry::Periodic { l, lambda_bar } => {
                let eq = steady_profile(profile, resolved.k, lambda_bar, l, 0.0).map_err(cfg_err)?;
                let st = FilmState::sample(&solver.grid, lambda_bar, 0.0, |x| eq.eval(x));
                (Some(eq), st)
            }
            Geometry::HalfLine { far_height, .. } => {
                let lambda0 = resolved.lambda0;
                let g0 = profile.eval_g_positive(lambda0, 0.0).map_err(cfg_err)?;
                let gx = profile.eval_g_derivs(lambda0, 0.0).map_err(cfg_err)?.gx;
                let alpha = (g0 - far_height) + gx - resolved.k;
                let st = FilmState::sample(&solver.grid, lambda0, 0.0, |x| {
                    far_height + (g0 - far_height + alpha * x) * (-x).exp()
                });
                (None, st)
            }
        };
    let initial = match &cfg.initial {
        InitialSpec::Steady => base,
        InitialSpec::SteadyPlusPerturbation { eps, mode_shape } => {
            let mut st = base;
            let width = solver.grid.b - solver.grid.a;
            let modes: Vec<(usize, f64)> = match mode_shape {
                Some(m) => vec![(*m, 1.0)],
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    (1..=4).map(|m| (m, rng.gen_range(-1.0..1.0))).collect()
                }
            };
            match resolved.geometry {
                Geometry::Periodic { .. } => {
                    for (h, &x) in st.h.iter_mut().zip(&solver.grid.nodes()) {
                        let s = (x - solver.grid.a) / width;
                        for &(m, amp) in &modes {
                            let m = m.max(1) as f64;
                            let tau = 2.0 * std::f64::consts::PI * s;
                            // volume-neutral, satisfies all four boundary conditions
                            *h += eps * amp * ((m * tau).cos() - ((m + 1.0) * tau).cos());
                        }
                    }
                }
                Geometry::HalfLine { .. } => {
                    for (h, &x) in st.h.iter_mut().zip(&solver.grid.nodes()) {
                        for &(_, amp) in &modes {
                            *h += eps * amp * x * x * (-x).exp();
                        }
                    }
                }
            }
            st
        }
        InitialSpec::ExplicitSamples { path } => {
            let snap = read_snapshot(Path::new(path)).map_err(cfg_err)?;
            let (st, grid) = snap.restore().map_err(cfg_err)?;
            if grid != solver.grid {
                return Err(CliError::Config(format!(
                    "snapshot grid ({} nodes on [{}, {}]) does not match the configured grid",
                    grid.n, grid.a, grid.b
                )));
            }
            st
        }
    };
    Ok(Prepared {
        solver,
        initial,
        equilibrium,
    })
}

fn record_sink<'s>(
    solver: &'s Solver<'s, f64>,
    cfg: &RunConfig,
    records: &'s mut Vec<DiagnosticsRecord<f64>>,
) -> impl FnMut(&FilmState<f64>, &StepInfo<f64>) + 's {
    let profile = solver.profile;
    let geometry = solver.geometry;
    let grid = solver.grid;
    let energies = crate::equilibrium::InterfaceEnergies::new(
        cfg.energies.a,
        cfg.energies.b,
        cfg.energies.c,
    )
    .expect("validated at resolve time");
    let k = match cfg.resolve() {
        Ok(r) => r.k,
        Err(_) => 0.0,
    };
    move |state, info| {
        let mass = total_mass(state, profile, &geometry, &grid).unwrap_or(f64::NAN);
        let energy =
            total_energy(state, profile, &geometry, &grid, &energies, k).unwrap_or(f64::NAN);
        let dissipation =
            dissipation_rate(state, &geometry, &grid, energies.b).unwrap_or(f64::NAN);
        records.push(DiagnosticsRecord {
            t: state.t,
            mass,
            energy,
            dissipation,
            lambda: state.lambda,
            min_h: state.min_h(),
            newton_iters: info.newton_iters,
            dt: info.dt,
        });
    }
}

fn simulate(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let profile = cfg.profile.clone();
    let prep = prepare(&cfg, &profile)?;
    std::fs::create_dir_all(out).map_err(cfg_err)?;
    let mut records = Vec::new();
    let initial = prep.initial.clone();
    let final_state = {
        let mut sink = record_sink(&prep.solver, &cfg, &mut records);
        prep.solver
            .run(prep.initial.clone(), cfg.t_end, &mut sink)
            .map_err(run_err)?
    };
    write_diag_file(&out.join("diag.csv"), &records).map_err(run_err)?;
    write_snapshot(
        &out.join("final.json"),
        &Snapshot::capture(&final_state, &prep.solver.grid),
    )
    .map_err(run_err)?;
    let xs = prep.solver.grid.nodes();
    let curve = |st: &FilmState<f64>, label: String| {
        (
            label,
            xs.iter().zip(&st.h).map(|(&x, &h)| (x, h)).collect::<Vec<_>>(),
        )
    };
    let curves = vec![
        curve(&initial, format!("t = {}", initial.t)),
        curve(&final_state, format!("t = {}", final_state.t)),
    ];
    render_profiles(&out.join("profiles.svg"), &curves).map_err(run_err)?;
    if records.iter().all(|r| r.energy > 0.0) && records.len() >= 10 {
        let series: Vec<(f64, f64)> = records.iter().map(|r| (r.t, r.energy)).collect();
        let fit = fit_decay(&series).ok();
        render_energy(&out.join("energy.svg"), &series, fit.as_ref()).map_err(run_err)?;
    }
    let drift = if let (Some(first), Some(last)) = (records.first(), records.last()) {
        ((last.mass - first.mass) / first.mass).abs()
    } else {
        0.0
    };
    println!(
        "simulate: t = {}, steps = {}, lambda = {}, min_h = {}, mass drift = {:e}",
        final_state.t,
        records.len(),
        final_state.lambda,
        final_state.min_h(),
        drift
    );
    Ok(())
}

fn equilibrium_cmd(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    if cfg.mode != Mode::Periodic {
        return Err(CliError::Config(
            "equilibrium analysis applies to periodic mode".into(),
        ));
    }
    let resolved = cfg.resolve().map_err(cfg_err)?;
    let (l, lambda_bar) = match resolved.geometry {
        Geometry::Periodic { l, lambda_bar } => (l, lambda_bar),
        _ => unreachable!(),
    };
    let eq = steady_profile(&cfg.profile, resolved.k, lambda_bar, l, 0.0).map_err(cfg_err)?;
    let lam = lagrange_multiplier(
        &cfg.profile,
        resolved.k,
        lambda_bar,
        l,
        0.0,
        &resolved.energies,
    )
    .map_err(cfg_err)?;
    println!(
        "equilibrium: lambda_bar = {}, coeff2 = {}, apex = {}, lagrange = {}, min_h = {}",
        eq.lambda_bar,
        eq.coeff2,
        eq.apex,
        lam,
        eq.min_h()
    );
    if let Some(dir) = out {
        std::fs::create_dir_all(dir).map_err(run_err)?;
        let grid = resolved.geometry.reference_grid(cfg.grid_n).map_err(cfg_err)?;
        let mut text = String::from("x,h\n");
        for x in grid.nodes() {
            text.push_str(&format!("{},{}\n", x, eq.eval(x)));
        }
        std::fs::write(dir.join("equilibrium.csv"), text).map_err(run_err)?;
    }
    Ok(())
}

fn stability(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let profile = cfg.profile.clone();
    let prep = prepare(&cfg, &profile)?;
    let eq = prep.equilibrium.clone().ok_or_else(|| {
        CliError::Config("stability analysis requires periodic mode".into())
    })?;
    if matches!(cfg.initial, InitialSpec::Steady) {
        return Err(CliError::Config(
            "stability analysis needs a perturbed initial condition".into(),
        ));
    }
    std::fs::create_dir_all(out).map_err(cfg_err)?;
    let mut records = Vec::new();
    {
        let mut sink = record_sink(&prep.solver, &cfg, &mut records);
        prep.solver
            .run(prep.initial.clone(), cfg.t_end, &mut sink)
            .map_err(run_err)?;
    }
    let resolved = cfg.resolve().map_err(cfg_err)?;
    let e_eq = {
        let geom = prep.solver.geometry;
        let st = FilmState::sample(&prep.solver.grid, eq.lambda_bar, 0.0, |x| eq.eval(x));
        total_energy(
            &st,
            &profile,
            &geom,
            &prep.solver.grid,
            &resolved.energies,
            resolved.k,
        )
        .map_err(run_err)?
    };
    let half = records.len() / 2;
    let e_series: Vec<(f64, f64)> = records[half..]
        .iter()
        .filter(|r| r.energy - e_eq > 0.0)
        .map(|r| (r.t, r.energy - e_eq))
        .collect();
    let l_series: Vec<(f64, f64)> = records[half..]
        .iter()
        .filter(|r| (r.lambda - eq.lambda_bar).abs() > 0.0)
        .map(|r| (r.t, (r.lambda - eq.lambda_bar).abs()))
        .collect();
    let e_fit = fit_decay(&e_series).map_err(run_err)?;
    write_diag_file(&out.join("diag.csv"), &records).map_err(run_err)?;
    render_energy(&out.join("energy.svg"), &e_series, Some(&e_fit)).map_err(run_err)?;
    println!(
        "stability: omega_energy = {}, r2_energy = {}",
        e_fit.omega, e_fit.r_squared
    );
    match fit_decay(&l_series) {
        Ok(l_fit) => println!(
            "stability: omega_lambda = {}, r2_lambda = {}",
            l_fit.omega, l_fit.r_squared
        ),
        Err(_) => println!("stability: contact-point series too flat to fit"),
    }
    Ok(())
}

fn poincare_cmd(config: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let resolved = cfg.resolve().map_err(cfg_err)?;
    let grid = resolved
        .geometry
        .reference_grid(cfg.grid_n.max(50))
        .map_err(cfg_err)?;
    let width = grid.b - grid.a;
    let bc_ratio = 1.0 / width;
    let with = discrete_poincare(&grid, bc_ratio, 3, true).map_err(run_err)?;
    let without = discrete_poincare(&grid, bc_ratio, 3, false).map_err(run_err)?;
    println!(
        "poincare: n = {}, bc_ratio = {}, mu = {}, C = {}, trace = {}",
        with.n, bc_ratio, with.mu, with.constant_c, with.trace_constant
    );
    println!(
        "poincare: without zero-mean constraint mu = {} (quadratic leak)",
        without.mu
    );
    Ok(())
}

fn convergence(config: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let profile = cfg.profile.clone();
    let run_at = |grid_n: usize, dt_scale: f64| -> Result<FilmState<f64>, CliError> {
        let mut c = cfg.clone();
        c.grid_n = grid_n;
        c.stepper.dt *= dt_scale;
        if let Some(m) = c.stepper.dt_min.as_mut() {
            *m *= dt_scale;
        }
        if let Some(m) = c.stepper.dt_max.as_mut() {
            *m *= dt_scale;
        }
        let prep = prepare(&c, &profile)?;
        prep.solver
            .run(prep.initial.clone(), c.t_end, |_, _| {})
            .map_err(run_err)
    };
    // grid refinement at fixed dt: nested grids, compare on common nodes
    let n0 = cfg.grid_n;
    let coarse = run_at(n0, 1.0)?;
    let medium = run_at(2 * n0 - 1, 1.0)?;
    let fine = run_at(4 * n0 - 3, 1.0)?;
    let diff = |a: &FilmState<f64>, b: &FilmState<f64>, stride: usize| -> f64 {
        a.h.iter()
            .enumerate()
            .map(|(i, &v)| (v - b.h[stride * i]).abs())
            .fold(0.0, f64::max)
    };
    let e1 = diff(&coarse, &medium, 2);
    let e2 = diff(&medium, &fine, 2);
    let space_order = (e1 / e2).log2();
    println!(
        "convergence: grid errors {e1:e} -> {e2:e}, observed spatial order = {space_order:.3}"
    );
    // dt refinement at fixed grid
    let d0 = run_at(n0, 1.0)?;
    let d1 = run_at(n0, 0.5)?;
    let d2 = run_at(n0, 0.25)?;
    let t1 = diff(&d0, &d1, 1);
    let t2 = diff(&d1, &d2, 1);
    let time_order = (t1 / t2).log2();
    println!(
        "convergence: dt errors {t1:e} -> {t2:e}, observed temporal order = {time_order:.3}"
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NondimInput {
    h: f64,
    sigma: f64,
    mu_l: f64,
    theta: f64,
    beta_phys: f64,
    t0: f64,
    epsilon: f64,
}

fn nondim(params: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(params).map_err(cfg_err)?;
    let input: NondimInput =
        serde_json::from_str(&text).map_err(|e| cfg_err(Error::Parse(e.to_string())))?;
    let p = crate::config::PhysicalParams {
        h: input.h,
        sigma: input.sigma,
        mu_l: input.mu_l,
        theta: input.theta,
        beta_phys: input.beta_phys,
        t0: input.t0,
    };
    let r = nondimensionalize(&p, input.epsilon).map_err(cfg_err)?;
    println!(
        "nondim: k = {}, beta_bar = {}, time_scale = {}, length_scale = {}",
        r.k, r.beta_bar, r.time_scale, r.length_scale
    );
    if let Some(w) = r.warning {
        eprintln!("warning: {w}");
    }
    Ok(())
}

/// Dispatch a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.cmd {
        Command::Simulate { config, out } => simulate(config, out),
        Command::Equilibrium { config, out } => equilibrium_cmd(config, out.as_deref()),
        Command::Stability { config, out } => stability(config, out),
        Command::Poincare { config } => poincare_cmd(config),
        Command::Convergence { config } => convergence(config),
        Command::Nondim { params } => nondim(params),
    }
}
