//! Command-line driver for the scattering engine.
//!
//! Exit codes: 0 success, 2 configuration or input error, 3 numerical
//! failure (lost passivity, singular solve, failed convergence gate).
//!
//! All CSV emitters use the shortest round-trip float formatting, so
//! identical configurations produce bit-identical files.

use clap::{Args, Parser, Subcommand};
use cqbem::config::{Geometry, Manifest, RunConfig, TargetsSection};
use cqbem::convergence::{
    converge_space, converge_time, ConvergenceReport, LadderSetup, SpaceLadder, TimeLadder,
};
use cqbem::cq::{
    apply_symbol, cq_weights, radau_tableau, CQGrid, StageSignal,
};
use cqbem::materials::audit_grid;
use cqbem::mesh::RTSpace;
use cqbem::ops::PotentialTargets;
use cqbem::oracle::{solve_modes, IncidentModes};
use cqbem::scattering::{reconstruct_fields, solve_scattering, FieldFrame, ScatterRun};
use cqbem::{Error, Result, C64};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "cqbem",
    version,
    about = "Time-domain electromagnetic scattering from dispersive penetrable obstacles"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct ConfigArg {
    /// Run configuration file (TOML); defaults to the built-in sphere setup.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<RunConfig> {
        match &self.config {
            Some(path) => RunConfig::from_path(path),
            None => Ok(RunConfig::default()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Material-law diagnostics
    Materials {
        #[command(subcommand)]
        cmd: MaterialsCmd,
    },
    /// Convolution quadrature diagnostics
    Cq {
        #[command(subcommand)]
        cmd: CqCmd,
    },
    /// Analytic sphere reference solutions
    Oracle {
        #[command(subcommand)]
        cmd: OracleCmd,
    },
    /// Mesh inspection
    Mesh {
        #[command(subcommand)]
        cmd: MeshCmd,
    },
    /// Full scattering run: solve, reconstruct fields, write all artifacts
    Run {
        #[command(flatten)]
        config: ConfigArg,
        /// Override the output directory from the configuration
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Time-refinement convergence study on a fixed mesh
    ConvergeTime {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated step counts of the ladder
        #[arg(long, default_value = "16,32", value_delimiter = ',')]
        n_list: Vec<usize>,
        /// Step count of the self-reference solve
        #[arg(long, default_value_t = 64)]
        reference: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mesh-refinement convergence study at a fixed step count (sphere only)
    ConvergeSpace {
        #[command(flatten)]
        config: ConfigArg,
        /// Comma-separated icosphere subdivision levels of the ladder
        #[arg(long, default_value = "0,1", value_delimiter = ',')]
        levels: Vec<usize>,
        /// Subdivision level of the self-reference solve
        #[arg(long, default_value_t = 2)]
        reference: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plane-grid field snapshot CSV for pictures
    Slice {
        /// Run configuration with plane targets; defaults to the two-cube
        /// demonstration setup.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Keep every k-th time frame
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MaterialsCmd {
    /// Audit passivity margins over the standard frequency grid
    Check {
        #[command(flatten)]
        config: ConfigArg,
        /// Audit the exterior material pair instead of the interior one
        #[arg(long)]
        exterior: bool,
        /// Output CSV path (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CqCmd {
    /// Dump the quadrature weights of the scalar symbol s^power
    Weights {
        #[arg(long, default_value_t = 2)]
        stages: usize,
        #[arg(long, default_value_t = 16)]
        n_steps: usize,
        #[arg(long, default_value_t = 8.0)]
        t_final: f64,
        /// Exponent of the symbol; -1 is time integration
        #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
        power: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Scalar convergence test: integrate a smooth pulse, compare with the
    /// closed-form antiderivative, report observed orders
    TestScalar {
        #[arg(long, default_value_t = 2)]
        stages: usize,
        #[arg(long, default_value = "16,32,64,128", value_delimiter = ',')]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 8.0)]
        t_final: f64,
        /// Fail (exit 3) when the fitted order falls below this value
        #[arg(long)]
        min_order: Option<f64>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Modal transmission coefficients of the unit sphere
    Mie {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        s_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        s_im: f64,
        #[arg(long, default_value_t = 12)]
        lmax: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MeshCmd {
    /// Print mesh statistics for the configured geometry
    Info {
        #[command(flatten)]
        config: ConfigArg,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli.cmd) {
        eprintln!("error: {e}");
        let code = match e {
            Error::Numerical(_) | Error::Passivity(_) => 3,
            _ => 2,
        };
        std::process::exit(code);
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Materials { cmd: MaterialsCmd::Check { config, exterior, output } } => {
            materials_check(&config.load()?, exterior, output.as_deref())
        }
        Command::Cq { cmd } => match cmd {
            CqCmd::Weights { stages, n_steps, t_final, power, output } => {
                cq_weights_cmd(stages, n_steps, t_final, power, output.as_deref())
            }
            CqCmd::TestScalar { stages, n_list, t_final, min_order, output } => {
                cq_test_scalar(stages, &n_list, t_final, min_order, output.as_deref())
            }
        },
        Command::Oracle { cmd: OracleCmd::Mie { config, s_re, s_im, lmax, output } } => {
            oracle_mie(&config.load()?, C64::new(s_re, s_im), lmax, output.as_deref())
        }
        Command::Mesh { cmd: MeshCmd::Info { config } } => mesh_info(&config.load()?),
        Command::Run { config, out } => run_cmd(&config.load()?, out),
        Command::ConvergeTime { config, n_list, reference, out } => {
            converge_time_cmd(&config.load()?, &n_list, reference, out)
        }
        Command::ConvergeSpace { config, levels, reference, out } => {
            converge_space_cmd(&config.load()?, &levels, reference, out)
        }
        Command::Slice { config, stride, out } => {
            let cfg = match config {
                Some(path) => RunConfig::from_path(path)?,
                None => RunConfig::two_cubes_demo(),
            };
            slice_cmd(&cfg, stride, out)
        }
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(p, text)?;
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn materials_check(cfg: &RunConfig, exterior: bool, output: Option<&Path>) -> Result<()> {
    let pair = if exterior { cfg.exterior_pair() } else { cfg.interior_pair() };
    let grid = audit_grid(50, 20);
    let mut csv = String::from("s_re,s_im,margin_eps,margin_mu,re_wavenumber\n");
    let mut worst = f64::INFINITY;
    for &s in &grid {
        let me = pair.epsilon.passivity_margin(s)?;
        let mm = pair.mu.passivity_margin(s)?;
        let kappa = pair.wavenumber(s)?;
        worst = worst.min(me.min(mm));
        writeln!(csv, "{},{},{},{},{}", s.re, s.im, me, mm, kappa.re).unwrap();
    }
    emit(output, &csv)?;
    eprintln!("audited {} frequencies, worst margin {worst:.3e}", grid.len());
    if worst < -1e-12 {
        return Err(Error::Numerical(format!(
            "passivity margin {worst:.3e} below tolerance on the audit grid"
        )));
    }
    Ok(())
}

fn cq_weights_cmd(
    stages: usize,
    n_steps: usize,
    t_final: f64,
    power: f64,
    output: Option<&Path>,
) -> Result<()> {
    let tab = radau_tableau(stages)?;
    let grid = CQGrid::new(t_final, n_steps)?;
    let weights = cq_weights(|lam| Ok(lam.powf(power)), &tab, &grid)?;
    // the reported scalar per weight is the stage matrix entry that maps the
    // last-stage (grid point) input sample to the grid point output
    let mut csv = String::from("n,re,im\n");
    for (n, w) in weights.iter().take(n_steps + 1).enumerate() {
        let v = w[(stages - 1, stages - 1)];
        writeln!(csv, "{},{},{}", n, v.re, v.im).unwrap();
    }
    emit(output, &csv)
}

fn cq_test_scalar(
    stages: usize,
    n_list: &[usize],
    t_final: f64,
    min_order: Option<f64>,
    output: Option<&Path>,
) -> Result<()> {
    let tab = radau_tableau(stages)?;
    // smooth input vanishing to high order at t = 0, with a closed-form
    // antiderivative to compare the discrete time integration against
    let g = |t: f64| t.powi(5) * (-t).exp();
    let exact = |t: f64| {
        120.0
            - (-t).exp()
                * (t.powi(5) + 5.0 * t.powi(4) + 20.0 * t.powi(3) + 60.0 * t * t + 120.0 * t
                    + 120.0)
    };
    let mut rows: Vec<(f64, f64)> = Vec::new();
    for &n in n_list {
        let grid = CQGrid::new(t_final, n)?;
        let signal = StageSignal::sample_scalar(&grid, &tab, g);
        let result = apply_symbol(|lam| Ok(1.0 / lam), &signal, &tab, &grid)?;
        let mut err = 0.0f64;
        for k in 1..=n {
            err = err.max((result.point_value(k)[0] - exact(grid.t(k))).abs());
        }
        rows.push((grid.tau, err));
    }
    let mut csv = String::from("tau,error,order\n");
    for (i, &(tau, err)) in rows.iter().enumerate() {
        let order = if i == 0 {
            String::from("nan")
        } else {
            let (ptau, perr) = rows[i - 1];
            format!("{}", (perr / err).log2() / (ptau / tau).log2())
        };
        writeln!(csv, "{},{},{}", tau, err, order).unwrap();
    }
    emit(output, &csv)?;
    let report = ConvergenceReport::from_rows(
        rows.iter()
            .zip(n_list)
            .map(|(&(tau, err), &n)| cqbem::convergence::RateRow {
                parameter: tau,
                size: n,
                error: err,
            })
            .collect(),
        "closed-form antiderivative",
    )?;
    eprintln!(
        "fitted order {:.3} (stderr {:.3}), expected {} for {} stages",
        report.slope,
        report.stderr,
        2 * stages - 1,
        stages
    );
    if let Some(gate) = min_order {
        if report.slope < gate {
            return Err(Error::Numerical(format!(
                "observed order {:.3} below the required {gate}",
                report.slope
            )));
        }
    }
    Ok(())
}

fn oracle_mie(cfg: &RunConfig, s: C64, lmax: usize, output: Option<&Path>) -> Result<()> {
    let incident = IncidentModes::uniform(lmax, C64::new(1.0, 0.0));
    let sol = solve_modes(s, &cfg.interior_pair(), &cfg.exterior_pair(), &incident, lmax)?;
    let mut csv = String::from("ell,pol,re,im,tail\n");
    for c in &sol.coefficients {
        writeln!(csv, "{},{},{},{},{}", c.ell, c.pol.label(), c.reflection.re, c.reflection.im, sol.tail)
            .unwrap();
    }
    emit(output, &csv)?;
    eprintln!(
        "kappa interior {:.6}{:+.6}i, exterior {:.6}{:+.6}i, truncation tail {:.3e}",
        sol.kappa_int.re, sol.kappa_int.im, sol.kappa_ext.re, sol.kappa_ext.im, sol.tail
    );
    Ok(())
}

fn mesh_info(cfg: &RunConfig) -> Result<()> {
    let mesh = cfg.build_mesh()?;
    println!("vertices:  {}", mesh.n_vertices());
    println!("edges:     {}", mesh.n_edges());
    println!("triangles: {}", mesh.n_triangles());
    println!("dofs:      {}", mesh.n_edges());
    let chi = mesh.euler_characteristics();
    println!("components: {} (Euler characteristics {:?})", chi.len(), chi);
    println!("signed volume: {}", mesh.signed_volume());
    if let Some(gap) = mesh.component_gap() {
        println!("component gap: {gap}");
    }
    Ok(())
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.unwrap_or_else(|| PathBuf::from(&cfg.output.dir));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_frames_csv(path: &Path, frames: &[FieldFrame], targets: &PotentialTargets) -> Result<()> {
    let mut csv = String::from("t,x,y,z,Ex_re,Ey_re,Ez_re,Hx_re,Hy_re,Hz_re\n");
    for fr in frames {
        for (i, p) in targets.points.iter().enumerate() {
            let (e, h) = (&fr.e[i], &fr.h[i]);
            writeln!(
                csv,
                "{},{},{},{},{},{},{},{},{},{}",
                fr.t, p.x, p.y, p.z, e.x, e.y, e.z, h.x, h.y, h.z
            )
            .unwrap();
        }
    }
    std::fs::write(path, csv)?;
    Ok(())
}

fn build_run<'a>(cfg: &RunConfig, space: &'a RTSpace) -> Result<ScatterRun<'a>> {
    Ok(ScatterRun {
        space,
        interior: cfg.interior_pair(),
        exterior: cfg.exterior_pair(),
        tableau: cfg.build_tableau()?,
        grid: cfg.build_grid()?,
        wave: cfg.build_wave()?,
        quad: cfg.quad(),
    })
}

fn run_cmd(cfg: &RunConfig, out: Option<PathBuf>) -> Result<()> {
    let started = Instant::now();
    let dir = out_dir(cfg, out)?;
    let mesh = cfg.build_mesh()?;
    let (points, sides) = cfg.target_points(&mesh, 0.05)?;
    let targets = PotentialTargets::new(points, sides, &mesh)?;
    let space = RTSpace::new(mesh, 0)?;
    let run = build_run(cfg, &space)?;
    eprintln!(
        "solving: {} dofs, {} steps, {} stages",
        space.n_dofs(),
        run.grid.n_steps,
        run.tableau.m
    );
    let history = solve_scattering(&run)?;
    let frames = reconstruct_fields(&run, &history, &targets)?;
    if cfg.output.fields {
        write_frames_csv(&dir.join("fields.csv"), &frames, &targets)?;
    }
    if cfg.output.densities {
        write_densities(&dir, &history.signal, &run)?;
    }
    let manifest = Manifest {
        config_hash: cfg.hash()?,
        canonical_config: cfg.canonical_toml()?,
        n_dofs: space.n_dofs(),
        n_steps: run.grid.n_steps,
        stages: run.tableau.m,
        frequency_solves: run.grid.n_nodes() / 2 + 1,
        wall_seconds: started.elapsed().as_secs_f64(),
    };
    let text = toml::to_string_pretty(&manifest)
        .map_err(|e| Error::Config(format!("manifest serialization: {e}")))?;
    std::fs::write(dir.join("manifest.toml"), text)?;
    eprintln!("artifacts written to {}", dir.display());
    Ok(())
}

/// Raw little-endian f64 dump of every stage vector, with a CSV index that
/// maps (step, stage) to stage time and element offset.
fn write_densities(dir: &Path, signal: &StageSignal, run: &ScatterRun) -> Result<()> {
    let mut bytes = Vec::with_capacity(signal.raw().len() * 8);
    for v in signal.raw() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(dir.join("densities.bin"), bytes)?;
    let (m, dim) = (run.tableau.m, signal.dim);
    let mut csv = String::from("step,stage,t,offset,len\n");
    for n in 0..=signal.n_steps {
        for i in 0..m {
            let t = (n as f64 + run.tableau.c[i]) * run.grid.tau;
            writeln!(csv, "{},{},{},{},{}", n, i, t, (n * m + i) * dim, dim).unwrap();
        }
    }
    std::fs::write(dir.join("densities_index.csv"), csv)?;
    Ok(())
}

fn ladder_setup(cfg: &RunConfig) -> Result<LadderSetup> {
    Ok(LadderSetup {
        interior: cfg.interior_pair(),
        exterior: cfg.exterior_pair(),
        wave: cfg.build_wave()?,
        quad: cfg.quad(),
        t_final: cfg.time.t_final,
    })
}

fn write_report_csv(path: &Path, report: &ConvergenceReport) -> Result<()> {
    let mut csv = String::from("parameter,size,error,order\n");
    for (i, row) in report.rows.iter().enumerate() {
        let order = if i == 0 {
            String::from("nan")
        } else {
            let prev = &report.rows[i - 1];
            format!(
                "{}",
                (prev.error / row.error).log2() / (prev.parameter / row.parameter).log2()
            )
        };
        writeln!(csv, "{},{},{},{}", row.parameter, row.size, row.error, order).unwrap();
    }
    std::fs::write(path, csv)?;
    Ok(())
}

fn print_report(name: &str, report: &ConvergenceReport) {
    eprintln!(
        "{name}: slope {:.3} (stderr {:.3}), monotone {}, reference {}",
        report.slope, report.stderr, report.monotone, report.reference
    );
}

fn converge_time_cmd(
    cfg: &RunConfig,
    n_list: &[usize],
    reference: usize,
    out: Option<PathBuf>,
) -> Result<()> {
    let dir = out_dir(cfg, out)?;
    let observation_point = match &cfg.targets {
        TargetsSection::Points { points, .. } => {
            cqbem::mesh::Point::new(points[0][0], points[0][1], points[0][2])
        }
        _ => {
            return Err(Error::Config(
                "converge-time needs an explicit exterior point target".into(),
            ))
        }
    };
    let mesh = cfg.build_mesh()?;
    let space = RTSpace::new(mesh, 0)?;
    let ladder = TimeLadder {
        setup: ladder_setup(cfg)?,
        stages: cfg.rk.stages,
        n_list: n_list.to_vec(),
        reference_n: reference,
        observation_point,
    };
    let study = converge_time(&space, &ladder)?;
    write_report_csv(&dir.join("time_field.csv"), &study.field)?;
    write_report_csv(&dir.join("time_density.csv"), &study.density)?;
    print_report("field", &study.field);
    print_report("density", &study.density);
    Ok(())
}

fn converge_space_cmd(
    cfg: &RunConfig,
    levels: &[usize],
    reference: usize,
    out: Option<PathBuf>,
) -> Result<()> {
    let dir = out_dir(cfg, out)?;
    let radius = match cfg.geometry {
        Geometry::Sphere { radius, .. } => radius,
        _ => {
            return Err(Error::Config(
                "converge-space runs on the sphere geometry only".into(),
            ))
        }
    };
    let ladder = SpaceLadder {
        setup: ladder_setup(cfg)?,
        stages: cfg.rk.stages,
        n_steps: cfg.time.n_steps,
        levels: levels.to_vec(),
        reference_level: reference,
        radius,
    };
    let study = converge_space(&ladder)?;
    write_report_csv(&dir.join("space_trace.csv"), &study.trace)?;
    write_report_csv(&dir.join("space_graph.csv"), &study.graph)?;
    print_report("trace", &study.trace);
    print_report("graph", &study.graph);
    Ok(())
}

fn slice_cmd(cfg: &RunConfig, stride: usize, out: Option<PathBuf>) -> Result<()> {
    if !matches!(cfg.targets, TargetsSection::Plane { .. }) {
        return Err(Error::Config("slice needs plane-grid targets".into()));
    }
    if stride == 0 {
        return Err(Error::Config("stride must be at least 1".into()));
    }
    let dir = out_dir(cfg, out)?;
    let mesh = cfg.build_mesh()?;
    let (points, sides) = cfg.target_points(&mesh, 0.05)?;
    let targets = PotentialTargets::new(points, sides, &mesh)?;
    let space = RTSpace::new(mesh, 0)?;
    let run = build_run(cfg, &space)?;
    let history = solve_scattering(&run)?;
    let frames = reconstruct_fields(&run, &history, &targets)?;
    let kept: Vec<FieldFrame> = frames.into_iter().step_by(stride).collect();
    write_frames_csv(&dir.join("slice.csv"), &kept, &targets)?;
    eprintln!("wrote {} frames to {}", kept.len(), dir.join("slice.csv").display());
    Ok(())
}
