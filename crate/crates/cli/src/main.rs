use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qsaddle::bench::{self, ExperimentKind};
use qsaddle::config::{Config, Profile};
use qsaddle::optim::{self, Algorithm, EventKind, Trajectory};
use qsaddle::{validate, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Saddle-point escape with wave-packet perturbations.
#[derive(Parser)]
#[command(name = "qsaddle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve a wave packet on a landscape (dispersion or landscape_evolution).
    Simulate(Common),
    /// Run one optimizer trajectory and write trajectory.csv.
    Escape(Common),
    /// Compare classical and quantum mini-batches (minibatch_compare or dimension_sweep).
    Bench(Common),
    /// Run the invariant suite.
    Validate(Common),
}

#[derive(Args)]
struct Common {
    /// TOML file with flat keys; see README for the schema.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the `seed` key (default 0).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "ci", value_parser = ["ci", "paper"])]
    profile: String,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl Common {
    fn load(&self) -> Result<(Config, Profile, u64)> {
        let cfg = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        let profile: Profile = self.profile.parse()?;
        let seed = cfg.seed_or(self.seed);
        Ok((cfg, profile, seed))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match &cli.command {
        Command::Simulate(c) => simulate(c),
        Command::Escape(c) => escape(c),
        Command::Bench(c) => run_bench(c),
        Command::Validate(c) => run_validate(c),
    };
    match run {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else if matches!(e, Error::Io(_)) {
        1
    } else {
        2
    }
}

fn simulate(c: &Common) -> Result<ExitCode> {
    let (cfg, profile, seed) = c.load()?;
    let spec = cfg.experiment_spec(ExperimentKind::Dispersion, profile, seed, Some(c.out.clone()))?;
    if !matches!(spec.kind, ExperimentKind::Dispersion | ExperimentKind::LandscapeEvolution) {
        return Err(Error::Config(format!("`simulate` cannot run experiment `{}`", spec.kind)));
    }
    let d = bench::run_dispersion(&spec)?;
    println!("{} on {} (mesh {}, r0 {})", spec.kind, spec.landscape, spec.mesh, spec.r);
    for (t, v) in d.times.iter().zip(&d.variances) {
        let vs: Vec<String> = v.iter().map(|x| format!("{x:.4}")).collect();
        println!("t = {t:<6} variances {}", vs.join(" "));
    }
    println!("norm drift {:.2e}; output in {}", d.norm_drift, c.out.display());
    Ok(ExitCode::SUCCESS)
}

fn escape(c: &Common) -> Result<ExitCode> {
    let (cfg, profile, seed) = c.load()?;
    let f = cfg.build_landscape()?;
    let x0 = cfg.start_point(f.dim())?;
    let params = cfg.schedule(f.as_ref())?;
    let opts = cfg.run_options(profile);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let algorithm = cfg.algorithm();
    let traj = match algorithm {
        Algorithm::Gd => {
            let steps = opts.iterations.unwrap_or_else(|| params.pgd_iterations());
            optim::gradient_descent(f.as_ref(), &x0, params.eta, steps)?
        }
        Algorithm::Pgd => {
            let radius = cfg.radius.unwrap_or(params.eps);
            optim::pgd_classical(f.as_ref(), &x0, &params, radius, opts.iterations, &mut rng)?
        }
        Algorithm::PgdQs => optim::pgd_qs(f.as_ref(), &x0, &params, &opts, &mut rng)?,
        Algorithm::PagdQs => optim::pagd_qs(f.as_ref(), &x0, &params, &opts, &mut rng)?,
        Algorithm::PgdJordan => {
            let model = cfg.noise_model(&params);
            optim::pgd_jordan(f.as_ref(), &x0, &params, &opts, &model, &mut rng)?
        }
    };
    std::fs::create_dir_all(&c.out)?;
    traj.write_csv(&c.out.join("trajectory.csv"))?;
    summarize(&traj, algorithm, f.name(), &c.out);
    Ok(ExitCode::SUCCESS)
}

fn summarize(traj: &Trajectory<f64>, algorithm: Algorithm, landscape: &str, out: &Path) {
    let last = traj.iterates.last().expect("trajectories hold the start point");
    println!("{algorithm:?} on {landscape}: {} iterations", last.t);
    println!("final f {:.8e}, |grad| {:.3e}", last.f, last.grad_norm);
    let x: Vec<String> = traj.output.iter().take(8).map(|v| format!("{v:.6}")).collect();
    let more = if traj.output.len() > 8 { ", ..." } else { "" };
    println!("output x = [{}{more}]", x.join(", "));
    for kind in [EventKind::QsCall, EventKind::PerturbClassical, EventKind::NceStep, EventKind::NceMomentumReset] {
        let n = traj.count(kind);
        if n > 0 {
            println!("{kind}: {n}");
        }
    }
    match traj.certified().and_then(|e| e.certificate.as_ref()) {
        Some(c) => println!(
            "certificate: |grad| {:.3e}, lambda_min {:.3e}, eps-SOSP {}",
            c.grad_norm, c.lambda_min, c.is_sosp
        ),
        None => println!("no certificate issued"),
    }
    println!("trajectory written to {}", out.join("trajectory.csv").display());
}

fn run_bench(c: &Common) -> Result<ExitCode> {
    let (cfg, profile, seed) = c.load()?;
    let spec = cfg.experiment_spec(ExperimentKind::MinibatchCompare, profile, seed, Some(c.out.clone()))?;
    match spec.kind {
        ExperimentKind::MinibatchCompare => {
            let h = bench::run_minibatch_compare(&spec)?;
            println!("{} on {}, {} samples per arm", spec.kind, spec.landscape, spec.samples);
            print_arms(&h);
        }
        ExperimentKind::DimensionSweep => {
            for p in bench::run_dimension_sweep(&spec)? {
                println!("n = {} (t_e {}, T_c {}, T_q {})", p.n, p.t_e, p.t_classical, p.t_quantum);
                print_arms(&p.histogram);
            }
        }
        other => return Err(Error::Config(format!("`bench` cannot run experiment `{other}`"))),
    }
    println!("output in {}", c.out.display());
    Ok(ExitCode::SUCCESS)
}

fn print_arms(h: &bench::HistogramResult) {
    for (name, s) in [("classical", &h.classical), ("quantum", &h.quantum)] {
        println!(
            "  {name:<9} mean {:.6e}  median {:.6e}  below {}: {:.3}",
            s.mean, s.median, h.threshold, s.fraction_below
        );
    }
}

fn run_validate(c: &Common) -> Result<ExitCode> {
    let (_, profile, seed) = c.load()?;
    let outcomes = validate::run_suite(profile, seed);
    for o in &outcomes {
        println!("{} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
    }
    Ok(if outcomes.iter().all(|o| o.passed) { ExitCode::SUCCESS } else { ExitCode::from(3) })
}
