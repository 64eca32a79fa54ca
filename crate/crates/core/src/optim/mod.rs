//! Optimizers: plain and perturbed gradient descent, the accelerated
//! variant with negative-curvature exploitation, and the noisy-gradient
//! variant. Every run returns a [`Trajectory`].

mod checks;
mod pagd;
mod pgd;

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::landscapes::{hessian_or_fd, Landscape};
use crate::linalg;
use crate::scalar::Real;

pub use checks::{
    check_descent, check_hamiltonian, check_improve_or_localize, gradient_windows, CheckReport,
};
pub use pagd::{agd_hamiltonian, nce, pagd_qs};
pub use pgd::{
    noisy_gradient, pgd_classical, pgd_jordan, pgd_qs, NoisyGradientModel, RunOptions,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    QsCall,
    NceMomentumReset,
    NceStep,
    PerturbClassical,
    SospCertified,
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EventKind::QsCall => "qs_call",
            EventKind::NceMomentumReset => "nce_momentum_reset",
            EventKind::NceStep => "nce_step",
            EventKind::PerturbClassical => "perturb_classical",
            EventKind::SospCertified => "sosp_certified",
        })
    }
}

/// Result of the second-order stationarity test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SospCertificate<T> {
    pub grad_norm: T,
    pub lambda_min: T,
    pub eps: T,
    /// `sqrt(rho eps)`.
    pub curvature_tol: T,
    pub is_sosp: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Event<T> {
    pub t: usize,
    pub kind: EventKind,
    pub f_before: T,
    pub f_after: T,
    pub certificate: Option<SospCertificate<T>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Iterate<T> {
    pub t: usize,
    pub x: Vec<T>,
    pub f: T,
    pub grad_norm: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    /// `x - eta g` from the current iterate.
    Gradient,
    /// `x - eta g` from a freshly perturbed point.
    GradientAfterPerturbation,
    Agd,
    Nce,
    /// A perturbation with no gradient step (accelerated method).
    Perturbation,
}

/// One transition `x_t -> x_{t+1}`. For gradient-type steps `f_from` and
/// `grad_norm_from` (exact gradient) refer to the point the step was taken
/// from.
#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<T> {
    pub t: usize,
    pub kind: StepKind,
    pub f_from: T,
    pub grad_norm_from: T,
    pub f_to: T,
    /// Norm of the gradient error used by the step.
    pub noise_norm: T,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory<T> {
    pub iterates: Vec<Iterate<T>>,
    /// Momentum per iterate (accelerated method only).
    pub momentum: Vec<Vec<T>>,
    /// `f(x) + |v|^2 / (2 eta')` per iterate (accelerated method only).
    pub energy: Vec<T>,
    pub events: Vec<Event<T>>,
    pub steps: Vec<StepRecord<T>>,
    /// Returned point: the last iterate, or the certified point on early stop.
    pub output: Vec<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn certified(&self) -> Option<&Event<T>> {
        self.events.iter().find(|e| e.kind == EventKind::SospCertified)
    }

    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Writes `t,f,grad_norm,event`; several events at one iterate are
    /// joined with `;`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "t,f,grad_norm,event")?;
        let mut ev = self.events.iter().peekable();
        for it in &self.iterates {
            let mut names = Vec::new();
            while let Some(e) = ev.peek() {
                if e.t > it.t {
                    break;
                }
                names.push(e.kind.to_string());
                ev.next();
            }
            writeln!(
                w,
                "{},{:.8e},{:.8e},{}",
                it.t,
                it.f.as_f64(),
                it.grad_norm.as_f64(),
                names.join(";")
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Algorithms selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Gd,
    Pgd,
    PgdQs,
    PagdQs,
    PgdJordan,
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(Algorithm::Gd),
            "pgd" => Ok(Algorithm::Pgd),
            "pgd_qs" => Ok(Algorithm::PgdQs),
            "pagd_qs" => Ok(Algorithm::PagdQs),
            "pgd_jordan" => Ok(Algorithm::PgdJordan),
            other => Err(Error::Config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// `x - eta grad f(x)`.
pub fn gd_step<T: Real, L: Landscape<T> + ?Sized>(landscape: &L, x: &[T], eta: T) -> Vec<T> {
    let mut out = x.to_vec();
    linalg::axpy(-eta, &landscape.gradient(x), &mut out);
    out
}

/// `iterations` plain gradient steps.
pub fn gradient_descent<T: Real, L: Landscape<T> + ?Sized>(
    landscape: &L,
    x0: &[T],
    eta: T,
    iterations: usize,
) -> Result<Trajectory<T>> {
    check_start(landscape, x0)?;
    let mut traj = Trajectory::default();
    let mut x = x0.to_vec();
    for t in 0..=iterations {
        let g = landscape.gradient(&x);
        let f = landscape.value(&x);
        let gn = linalg::norm(&g);
        traj.iterates.push(Iterate { t, x: x.clone(), f, grad_norm: gn });
        if t == iterations {
            break;
        }
        linalg::axpy(-eta, &g, &mut x);
        ensure_finite(&x)?;
        traj.steps.push(StepRecord {
            t,
            kind: StepKind::Gradient,
            f_from: f,
            grad_norm_from: gn,
            f_to: landscape.value(&x),
            noise_norm: T::zero(),
        });
    }
    traj.output = x;
    Ok(traj)
}

/// `x` is an eps-SOSP when `|grad f| <= eps` and
/// `lambda_min(hess f) >= -sqrt(rho eps)`. Landscapes without a Hessian use
/// a finite-difference estimate.
pub fn is_eps_sosp<T: Real, L: Landscape<T> + ?Sized>(
    landscape: &L,
    x: &[T],
    eps: T,
    rho: T,
) -> Result<SospCertificate<T>> {
    check_start(landscape, x)?;
    let grad_norm = linalg::norm(&landscape.gradient(x));
    let lambda_min = match landscape.lambda_min(x) {
        Some(l) => l,
        None => linalg::lambda_min(&hessian_or_fd(landscape, x))?,
    };
    let curvature_tol = (rho * eps).sqrt();
    Ok(SospCertificate {
        grad_norm,
        lambda_min,
        eps,
        curvature_tol,
        is_sosp: grad_norm <= eps && lambda_min >= -curvature_tol,
    })
}

/// Uniform draw from the ball of radius `radius` in `R^n`.
pub fn sample_uniform_ball<T: Real, R: Rng + ?Sized>(n: usize, radius: T, rng: &mut R) -> Vec<T> {
    loop {
        let dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let u: f64 = rng.random();
        let scale = radius.as_f64() * u.powf(1.0 / n as f64) / norm;
        return dir.into_iter().map(|v| T::lit(v * scale)).collect();
    }
}

fn check_start<T: Real, L: Landscape<T> + ?Sized>(landscape: &L, x: &[T]) -> Result<()> {
    if x.len() != landscape.dim() {
        return Err(Error::DimensionMismatch {
            expected: landscape.dim(),
            got: x.len(),
        });
    }
    ensure_finite(x)
}

fn ensure_finite<T: Real>(x: &[T]) -> Result<()> {
    if linalg::is_finite(x) {
        Ok(())
    } else {
        Err(Error::NonFinite("iterate"))
    }
}
