//! Experiment harness: wave-packet dispersion on a grid and Monte Carlo
//! comparisons of uniform-ball versus simulated-packet starting points.
//!
//! Experiments are pure functions of their [`ExperimentSpec`]; sample `i`
//! draws from a generator seeded with `seed + i`, so adding samples never
//! changes earlier ones.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscapes::{self, DiagQuad, Landscape};
use crate::linalg;
use crate::optim::sample_uniform_ball;
use crate::perturb::{Backend, BackendKind, PdeSettings, PreparedSampler};
use crate::wavesim::{self, Boundary, TimeStep, WaveState};

/// Bins per histogram.
pub const BINS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Dispersion,
    LandscapeEvolution,
    MinibatchCompare,
    DimensionSweep,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Dispersion => "dispersion",
            ExperimentKind::LandscapeEvolution => "landscape_evolution",
            ExperimentKind::MinibatchCompare => "minibatch_compare",
            ExperimentKind::DimensionSweep => "dimension_sweep",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dispersion" => Ok(Self::Dispersion),
            "landscape_evolution" => Ok(Self::LandscapeEvolution),
            "minibatch_compare" => Ok(Self::MinibatchCompare),
            "dimension_sweep" => Ok(Self::DimensionSweep),
            other => Err(Error::Config(format!("unknown experiment `{other}`"))),
        }
    }
}

/// Everything an experiment needs. Fields irrelevant to `kind` are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub landscape: String,
    pub landscape_params: BTreeMap<String, f64>,
    /// Number of Monte Carlo samples per arm.
    pub samples: usize,
    pub seed: u64,
    pub out_dir: Option<PathBuf>,
    /// Packet spread `r0`; also the classical ball radius.
    pub r: f64,
    /// Grid settings for the finite-difference solver.
    pub half_width: f64,
    pub mesh: usize,
    pub boundary: Boundary,
    pub dt: TimeStep<f64>,
    /// Snapshot times (dispersion, landscape evolution).
    pub times: Vec<f64>,
    /// Write a probability snapshot per time (always on for landscape
    /// evolution).
    pub snapshots: bool,
    /// Gradient-descent step after the perturbation.
    pub eta: f64,
    pub t_classical: usize,
    pub t_quantum: usize,
    pub t_e: f64,
    /// Escape threshold on `f`; defaults depend on the landscape.
    pub threshold: Option<f64>,
    pub backend: BackendKind,
    /// Dimension sweep: `n = 10^p` for each `p`.
    pub powers: Vec<u32>,
    /// Dimension sweep: negative curvature of the test quadratic.
    pub sweep_eps: f64,
    /// Dimension sweep: replaces the `t_e = p` rule (e.g. `0` for the
    /// control arm).
    pub sweep_t_e: Option<f64>,
    /// Dimension sweep: replaces `T_c = 50 p^2 + 50` and `T_q = 30 p`.
    pub sweep_steps: Option<(usize, usize)>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            kind: ExperimentKind::Dispersion,
            landscape: "quad2d".into(),
            landscape_params: BTreeMap::new(),
            samples: 200,
            seed: 0,
            out_dir: None,
            r: 0.5,
            half_width: 3.0,
            mesh: 256,
            boundary: Boundary::Dirichlet,
            dt: TimeStep::Auto,
            times: vec![0.0, 0.5, 1.0],
            snapshots: false,
            eta: 0.05,
            t_classical: 50,
            t_quantum: 10,
            t_e: 1.5,
            threshold: None,
            backend: BackendKind::Analytic,
            powers: vec![1, 2, 3],
            sweep_eps: 0.01,
            sweep_t_e: None,
            sweep_steps: None,
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.samples == 0 {
            return bad("samples must be >= 1".into());
        }
        if !(self.r > 0.0) {
            return bad(format!("r must be > 0, got {}", self.r));
        }
        match self.kind {
            ExperimentKind::Dispersion | ExperimentKind::LandscapeEvolution => {
                if self.times.is_empty() {
                    return bad("times must not be empty".into());
                }
                if self.times.iter().any(|t| !(*t >= 0.0)) || self.times.windows(2).any(|w| w[1] < w[0]) {
                    return bad("times must be >= 0 and increasing".into());
                }
                if !(self.half_width > 0.0) || self.mesh < 2 {
                    return bad("grid needs half_width > 0 and mesh >= 2".into());
                }
            }
            ExperimentKind::MinibatchCompare => {
                if !(self.eta > 0.0) || !(self.t_e >= 0.0) {
                    return bad("eta must be > 0 and t_e >= 0".into());
                }
            }
            ExperimentKind::DimensionSweep => {
                if self.powers.is_empty() || !(self.eta > 0.0) {
                    return bad("dimension sweep needs powers and eta > 0".into());
                }
                if self.powers.iter().any(|&p| p > 6) {
                    return bad("powers above 6 are not supported".into());
                }
            }
        }
        Ok(())
    }

    fn landscape_fn(&self) -> Result<std::sync::Arc<dyn Landscape<f64>>> {
        landscapes::by_name(&self.landscape, &self.landscape_params)
    }

    fn pde_settings(&self) -> PdeSettings<f64> {
        PdeSettings {
            mesh: self.mesh,
            half_width: Some(self.half_width),
            boundary: self.boundary,
            dt: self.dt,
        }
    }
}

/// Marginal variances of the packet at each snapshot time.
#[derive(Clone, Debug, PartialEq)]
pub struct DispersionResult {
    pub times: Vec<f64>,
    /// `variances[k][axis]` at `times[k]`.
    pub variances: Vec<Vec<f64>>,
    /// Probability mass within 45° of the diagonal `(1, 1)` and of the
    /// anti-diagonal `(1, -1)` (2-D only, else NaN).
    pub diagonal_mass: Vec<(f64, f64)>,
    pub norm_drift: f64,
}

/// Evolves a packet started at the origin under the landscape and records
/// marginal variances at the requested times. Snapshots go to `out_dir`
/// when requested.
pub fn run_dispersion(spec: &ExperimentSpec) -> Result<DispersionResult> {
    spec.validate()?;
    let f = spec.landscape_fn()?;
    let dim = f.dim();
    if dim > 3 {
        return Err(Error::Backend { backend: "pde", reason: format!("dimension {dim} exceeds 3") });
    }
    let grid = wavesim::build_grid(dim, spec.half_width, spec.mesh, spec.boundary)?;
    let origin = vec![0.0; dim];
    let h = wavesim::discretize(&grid, |x| f.value(x), spec.r)?;
    let psi0 = wavesim::initial_gaussian(&grid, &origin, spec.r)?;
    let states = wavesim::evolve_through(&h, &psi0, &spec.times, spec.dt)?;
    let snapshots = spec.snapshots || spec.kind == ExperimentKind::LandscapeEvolution;
    if let (true, Some(dir)) = (snapshots, &spec.out_dir) {
        std::fs::create_dir_all(dir)?;
        for (k, s) in states.iter().enumerate() {
            s.write_snapshot_csv(&dir.join(format!("snapshot_{k:03}.csv")))?;
        }
    }
    let n0 = psi0.norm_sq();
    let result = DispersionResult {
        times: spec.times.clone(),
        variances: states
            .iter()
            .map(|s| (0..dim).map(|a| wavesim::marginal_variance(s, a)).collect())
            .collect(),
        diagonal_mass: states.iter().map(diagonal_masses).collect(),
        norm_drift: states.iter().map(|s| (s.norm_sq() - n0).abs()).fold(0.0, f64::max),
    };
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir)?;
        emit_csv(&result, &dir.join("dispersion.csv"))?;
    }
    Ok(result)
}

fn diagonal_masses(s: &WaveState<f64>) -> (f64, f64) {
    if s.grid.dim != 2 {
        return (f64::NAN, f64::NAN);
    }
    (wavesim::cone_mass(s, &[1.0, 1.0]), wavesim::cone_mass(s, &[1.0, -1.0]))
}

/// Summary of one arm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArmStats {
    pub mean: f64,
    pub median: f64,
    /// Share of samples with `f < threshold`.
    pub fraction_below: f64,
    pub count: usize,
}

impl ArmStats {
    pub fn of(values: &[f64], threshold: f64) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let m = sorted.len();
        let median = if m == 0 {
            f64::NAN
        } else if m % 2 == 1 {
            sorted[m / 2]
        } else {
            0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
        };
        ArmStats {
            mean: values.iter().sum::<f64>() / m as f64,
            median,
            fraction_below: values.iter().filter(|&&v| v < threshold).count() as f64 / m as f64,
            count: m,
        }
    }
}

/// Final function values of both arms, binned on common edges.
#[derive(Clone, Debug, PartialEq)]
pub struct HistogramResult {
    /// `BINS + 1` increasing edges; the last bin is closed on the right.
    pub edges: Vec<f64>,
    pub counts_classical: Vec<usize>,
    pub counts_quantum: Vec<usize>,
    pub classical: ArmStats,
    pub quantum: ArmStats,
    pub threshold: f64,
    pub values_classical: Vec<f64>,
    pub values_quantum: Vec<f64>,
}

impl HistogramResult {
    pub fn new(values_classical: Vec<f64>, values_quantum: Vec<f64>, threshold: f64) -> Self {
        let all = values_classical.iter().chain(&values_quantum);
        let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if !(hi > lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        let width = (hi - lo) / BINS as f64;
        let edges: Vec<f64> = (0..=BINS).map(|k| if k == BINS { hi } else { lo + width * k as f64 }).collect();
        let bin = |v: f64| (((v - lo) / width) as usize).min(BINS - 1);
        let count = |vals: &[f64]| {
            let mut c = vec![0usize; BINS];
            for &v in vals {
                c[bin(v)] += 1;
            }
            c
        };
        HistogramResult {
            counts_classical: count(&values_classical),
            counts_quantum: count(&values_quantum),
            classical: ArmStats::of(&values_classical, threshold),
            quantum: ArmStats::of(&values_quantum, threshold),
            edges,
            threshold,
            values_classical,
            values_quantum,
        }
    }
}

/// Escape threshold: given, or `-0.5` on quartic2d and `-r` on diagquad.
pub fn default_threshold(spec: &ExperimentSpec) -> Result<f64> {
    if let Some(t) = spec.threshold {
        return Ok(t);
    }
    match spec.landscape.as_str() {
        "quartic2d" => Ok(-0.5),
        "diagquad" => Ok(-spec.r),
        other => Err(Error::Config(format!("landscape `{other}` needs an explicit threshold"))),
    }
}

/// `f` after `steps` gradient steps from `x`.
fn descend(f: &dyn Landscape<f64>, mut x: Vec<f64>, eta: f64, steps: usize) -> Result<f64> {
    let mut g = vec![0.0; x.len()];
    for _ in 0..steps {
        f.gradient_into(&x, &mut g);
        linalg::axpy(-eta, &g, &mut x);
    }
    let v = f.value(&x);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite("final function value"))
    }
}

fn sample_rng(seed: u64, i: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
    rng.set_stream(stream);
    rng
}

const CLASSICAL_STREAM: u64 = 1;
const QUANTUM_STREAM: u64 = 2;

/// Runs both arms from the saddle at the origin with `t_classical` and
/// `t_quantum` gradient steps.
fn compare_arms(
    f: &dyn Landscape<f64>,
    sampler: &PreparedSampler<f64>,
    spec: &ExperimentSpec,
    t_classical: usize,
    t_quantum: usize,
    threshold: f64,
) -> Result<HistogramResult> {
    let n = f.dim();
    let classical = (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(spec.seed, i, CLASSICAL_STREAM);
            descend(f, sample_uniform_ball(n, spec.r, &mut rng), spec.eta, t_classical)
        })
        .collect::<Result<Vec<f64>>>()?;
    let quantum = (0..spec.samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(spec.seed, i, QUANTUM_STREAM);
            descend(f, sampler.sample_position(&mut rng), spec.eta, t_quantum)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(HistogramResult::new(classical, quantum, threshold))
}

/// Uniform-ball starts with `t_classical` steps against packet-sampled
/// starts (simulated once for time `t_e`) with `t_quantum` steps.
pub fn run_minibatch_compare(spec: &ExperimentSpec) -> Result<HistogramResult> {
    spec.validate()?;
    let f = spec.landscape_fn()?;
    let threshold = default_threshold(spec)?;
    let origin = vec![0.0; f.dim()];
    let backend = match spec.backend {
        BackendKind::Analytic => Backend::Analytic,
        BackendKind::Pde => Backend::Pde(spec.pde_settings()),
    };
    let sampler = PreparedSampler::new(f.as_ref(), &origin, spec.r, spec.half_width, spec.t_e, &backend)?;
    let result = compare_arms(f.as_ref(), &sampler, spec, spec.t_classical, spec.t_quantum, threshold)?;
    if let Some(dir) = &spec.out_dir {
        std::fs::create_dir_all(dir)?;
        emit_csv(&result, &dir.join("histogram.csv"))?;
        emit_csv(&SampleTable(&result), &dir.join("samples.csv"))?;
    }
    Ok(result)
}

/// One dimension of the sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub n: usize,
    pub t_e: f64,
    pub t_classical: usize,
    pub t_quantum: usize,
    pub histogram: HistogramResult,
}

/// For each `n = 10^p` on `diag(-eps, 1, ..., 1) / 2`: packet starts with
/// `t_e = p` and `30 p` steps against ball starts with `50 p^2 + 50` steps.
pub fn run_dimension_sweep(spec: &ExperimentSpec) -> Result<Vec<SweepPoint>> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.powers.len());
    for &p in &spec.powers {
        let n = 10usize.pow(p);
        let f = DiagQuad::new(n, spec.sweep_eps)?;
        let pf = p as f64;
        let t_e = spec.sweep_t_e.unwrap_or(pf);
        let (t_classical, t_quantum) = spec
            .sweep_steps
            .unwrap_or((50 * (p * p) as usize + 50, 30 * p as usize));
        let origin = vec![0.0; n];
        let sampler = PreparedSampler::new(&f, &origin, spec.r, spec.half_width, t_e, &Backend::Analytic)?;
        let threshold = spec.threshold.unwrap_or(-spec.r);
        let histogram = compare_arms(&f, &sampler, spec, t_classical, t_quantum, threshold)?;
        if let Some(dir) = &spec.out_dir {
            std::fs::create_dir_all(dir)?;
            emit_csv(&histogram, &dir.join(format!("histogram_n{n}.csv")))?;
            emit_csv(&SampleTable(&histogram), &dir.join(format!("samples_n{n}.csv")))?;
        }
        out.push(SweepPoint { n, t_e, t_classical, t_quantum, histogram });
    }
    Ok(out)
}

/// Types with a CSV form. Floats use 9 significant digits.
pub trait CsvTable {
    fn write_table(&self, w: &mut dyn Write) -> std::io::Result<()>;
}

impl CsvTable for DispersionResult {
    /// `t,var_x[,var_y[,var_z]]`
    fn write_table(&self, w: &mut dyn Write) -> std::io::Result<()> {
        let dim = self.variances.first().map_or(0, Vec::len);
        let names = ["var_x", "var_y", "var_z"];
        writeln!(w, "t,{}", names[..dim].join(","))?;
        for (t, v) in self.times.iter().zip(&self.variances) {
            write!(w, "{t:.8e}")?;
            for x in v {
                write!(w, ",{x:.8e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

impl CsvTable for HistogramResult {
    /// `bin_lo,bin_hi,count_classical,count_quantum`
    fn write_table(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "bin_lo,bin_hi,count_classical,count_quantum")?;
        for k in 0..self.counts_classical.len() {
            writeln!(
                w,
                "{:.8e},{:.8e},{},{}",
                self.edges[k],
                self.edges[k + 1],
                self.counts_classical[k],
                self.counts_quantum[k]
            )?;
        }
        Ok(())
    }
}

/// Per-sample final values of a histogram: `sample,f_classical,f_quantum`.
pub struct SampleTable<'a>(pub &'a HistogramResult);

impl CsvTable for SampleTable<'_> {
    fn write_table(&self, w: &mut dyn Write) -> std::io::Result<()> {
        writeln!(w, "sample,f_classical,f_quantum")?;
        for (i, (c, q)) in self.0.values_classical.iter().zip(&self.0.values_quantum).enumerate() {
            writeln!(w, "{i},{c:.8e},{q:.8e}")?;
        }
        Ok(())
    }
}

pub fn emit_csv<C: CsvTable + ?Sized>(result: &C, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    result.write_table(&mut w)?;
    w.flush()?;
    Ok(())
}
