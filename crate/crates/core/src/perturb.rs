//! Wave-packet perturbations: the parameter schedule, the sampling step for
//! both simulation backends, and the `x +- Delta` move shared by the
//! optimizers.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::LogScaleLaw;
use crate::error::{Error, Result};
use crate::landscapes::Landscape;
use crate::linalg;
use crate::scalar::Real;
use crate::wavesim::{self, Boundary, Measurement, TimeStep, WaveState};

/// Values that replace the computed schedule entries. Quantities derived
/// from an overridden entry are recomputed from the override.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub eta: Option<f64>,
    pub eta_prime: Option<f64>,
    /// Evolution time `T'`.
    pub t_prime: Option<f64>,
    /// Guaranteed decrease `F'`.
    pub f_prime: Option<f64>,
    pub r0: Option<f64>,
    #[serde(rename = "M")]
    pub m: Option<f64>,
    pub kappa: Option<f64>,
    pub theta: Option<f64>,
    pub gamma: Option<f64>,
    pub s: Option<f64>,
    /// AGD window `T`.
    pub script_t: Option<f64>,
    /// Per-window decrease `E`.
    pub script_e: Option<f64>,
    pub delta0: Option<f64>,
    /// Total iteration count.
    #[serde(rename = "T")]
    pub iterations: Option<u64>,
    #[serde(rename = "C_r")]
    pub c_r: Option<f64>,
    #[serde(rename = "C0")]
    pub c0: Option<f64>,
    #[serde(rename = "c_A")]
    pub c_a: Option<f64>,
    pub alpha: Option<f64>,
}

/// Every tunable of the perturbed optimizers.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleParams<T> {
    pub ell: T,
    pub rho: T,
    pub eps: T,
    pub delta: T,
    pub f_gap: T,
    pub n: usize,
    pub delta0: T,
    pub eta: T,
    pub eta_prime: T,
    pub script_t_prime: T,
    pub script_f_prime: T,
    pub r0: T,
    pub c_r: T,
    pub c0: T,
    pub alpha: T,
    pub m: T,
    pub kappa: T,
    pub theta: T,
    pub gamma: T,
    pub s: T,
    pub script_t: T,
    pub c_a: T,
    pub script_e: T,
    /// Iteration budget for PGD-type methods.
    pub t_pgd: T,
    /// Iteration budget for PAGD.
    pub t_pagd: T,
    pub overrides: Overrides,
}

fn positive<T: Real>(name: &str, v: T) -> Result<T> {
    if v > T::zero() && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidArgument(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn pick<T: Real>(name: &str, ov: Option<f64>, computed: T) -> Result<T> {
    match ov {
        Some(v) => positive(name, T::lit(v)),
        None => Ok(computed),
    }
}

/// Builds the schedule for an `ell`-smooth, `rho`-Hessian-Lipschitz
/// objective in `n` dimensions with `f(x0) - f* = f_gap`.
///
/// `domain_radius`, when given, also caps the simulation half-width `M`.
pub fn schedule_from<T: Real>(
    ell: T,
    rho: T,
    eps: T,
    delta: T,
    f_gap: T,
    n: usize,
    domain_radius: Option<T>,
    overrides: &Overrides,
) -> Result<ScheduleParams<T>> {
    let ell = positive("ell", ell)?;
    let rho = positive("rho", rho)?;
    let eps = positive("eps", eps)?;
    let delta = positive("delta", delta)?;
    let f_gap = positive("f_gap", f_gap)?;
    if n == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    let o = overrides;
    let nf = T::from_usize_lossy(n);
    let one = T::one();
    let two = T::lit(2.0);
    let sqrt_eps3_rho = (eps * eps * eps / rho).sqrt();

    let c_r = pick("C_r", o.c_r, T::lit(0.1))?;
    let c0 = pick("C0", o.c0, one)?;
    let c_a = pick("c_A", o.c_a, T::lit(4.0))?;
    let alpha = pick("alpha", o.alpha, one)?;

    let eta = pick("eta", o.eta, one / ell)?;
    let eta_prime = pick("eta_prime", o.eta_prime, one / (T::lit(4.0) * ell))?;
    let script_f_prime = pick("f_prime", o.f_prime, T::lit(2.0 / 81.0) * sqrt_eps3_rho)?;
    let delta0 = pick("delta0", o.delta0, delta * T::lit(2.0 / 81.0) * sqrt_eps3_rho / f_gap)?;

    let rho_eps = rho * eps;
    let log_arg = ell / (delta0 * rho_eps.sqrt()) * (nf + two * (T::lit(3.0) / delta0).ln());
    let script_t_prime = pick(
        "t_prime",
        o.t_prime,
        T::lit(8.0) / rho_eps.powf(T::lit(0.25)) * log_arg.ln(),
    )?;
    let log_t = script_t_prime.ln().max(T::zero());
    let denom = nf.powf(T::lit(1.5)) + two * c0 * nf * ell * log_t.powf(alpha);
    let inner = delta0 / T::lit(3.0) / denom;
    let r0 = pick(
        "r0",
        o.r0,
        T::lit(4.0) * c_r.powi(3) / (T::lit(9.0) * script_t_prime.powi(4)) * inner * inner,
    )?;
    let mut m_cap = (r0 / c_r).min(one);
    if let Some(radius) = domain_radius {
        m_cap = m_cap.min(radius);
    }
    let m = pick("M", o.m, m_cap)?;

    let kappa = pick("kappa", o.kappa, ell / rho_eps.sqrt())?;
    let theta = pick("theta", o.theta, one / (T::lit(4.0) * kappa.sqrt()))?;
    let gamma = pick("gamma", o.gamma, theta * theta / eta)?;
    let s = pick("s", o.s, gamma / (T::lit(4.0) * rho))?;
    let script_t = pick("script_t", o.script_t, kappa.sqrt() * c_a)?;
    let script_e = pick("script_e", o.script_e, sqrt_eps3_rho * c_a.powi(-7))?;

    let t_pgd = T::lit(4.0) * (f_gap / script_f_prime).max(f_gap / (eta * eps * eps));
    let t_pagd = T::lit(3.0) * (f_gap / script_f_prime).max(f_gap * script_t / script_e);

    let p = ScheduleParams {
        ell,
        rho,
        eps,
        delta,
        f_gap,
        n,
        delta0,
        eta,
        eta_prime,
        script_t_prime,
        script_f_prime,
        r0,
        c_r,
        c0,
        alpha,
        m,
        kappa,
        theta,
        gamma,
        s,
        script_t,
        c_a,
        script_e,
        t_pgd,
        t_pagd,
        overrides: o.clone(),
    };
    p.validate()?;
    Ok(p)
}

fn close<T: Real>(a: T, b: T) -> bool {
    (a - b).abs() <= T::lit(1e-12) * a.abs().max(b.abs()).max(T::min_positive_value())
        || (a - b).abs() <= T::epsilon() * T::lit(8.0) * a.abs().max(b.abs())
}

impl<T: Real> ScheduleParams<T> {
    /// Checks the defining relations between entries that were not
    /// overridden, and `M <= 1`.
    pub fn validate(&self) -> Result<()> {
        let o = &self.overrides;
        let one = T::one();
        let four = T::lit(4.0);
        let mut bad = Vec::new();
        let mut check = |name: &str, skip: bool, ok: bool| {
            if !skip && !ok {
                bad.push(name.to_string());
            }
        };
        check("eta = 1/ell", o.eta.is_some(), close(self.eta, one / self.ell));
        check(
            "eta' = 1/(4 ell)",
            o.eta_prime.is_some(),
            close(self.eta_prime, one / (four * self.ell)),
        );
        check(
            "kappa = ell/sqrt(rho eps)",
            o.kappa.is_some(),
            close(self.kappa, self.ell / (self.rho * self.eps).sqrt()),
        );
        check(
            "theta = 1/(4 sqrt kappa)",
            o.theta.is_some(),
            close(self.theta, one / (four * self.kappa.sqrt())),
        );
        check(
            "gamma = theta^2/eta",
            o.gamma.is_some(),
            close(self.gamma, self.theta * self.theta / self.eta),
        );
        check("s = gamma/(4 rho)", o.s.is_some(), close(self.s, self.gamma / (four * self.rho)));
        check(
            "F' = (2/81) sqrt(eps^3/rho)",
            o.f_prime.is_some(),
            close(
                self.script_f_prime,
                T::lit(2.0 / 81.0) * (self.eps.powi(3) / self.rho).sqrt(),
            ),
        );
        if !bad.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "schedule relations violated: {}",
                bad.join(", ")
            )));
        }
        if self.m > one {
            return Err(Error::InvalidArgument(format!("simulation half-width M = {} exceeds 1", self.m)));
        }
        Ok(())
    }

    fn to_count(v: T) -> usize {
        v.ceil().to_usize().unwrap_or(usize::MAX)
    }

    /// Iterations for PGD-type methods (override or `ceil(t_pgd)`).
    pub fn pgd_iterations(&self) -> usize {
        match self.overrides.iterations {
            Some(t) => t as usize,
            None => Self::to_count(self.t_pgd),
        }
    }

    /// Iterations for PAGD (override or `ceil(t_pagd)`).
    pub fn pagd_iterations(&self) -> usize {
        match self.overrides.iterations {
            Some(t) => t as usize,
            None => Self::to_count(self.t_pagd),
        }
    }

    /// SOSP curvature tolerance `sqrt(rho eps)`.
    pub fn curvature_tolerance(&self) -> T {
        (self.rho * self.eps).sqrt()
    }
}

/// Finite-difference backend settings.
#[derive(Clone, Debug, PartialEq)]
pub struct PdeSettings<T> {
    pub mesh: usize,
    /// Box half-width; `None` uses the schedule's `M`.
    pub half_width: Option<T>,
    pub boundary: Boundary,
    pub dt: TimeStep<T>,
}

impl<T: Real> Default for PdeSettings<T> {
    fn default() -> Self {
        Self {
            mesh: 256,
            half_width: None,
            boundary: Boundary::Dirichlet,
            dt: TimeStep::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Backend<T> {
    /// Closed-form Gaussian law under the local Hessian.
    Analytic,
    /// Grid simulation of the gradient-subtracted potential.
    Pde(PdeSettings<T>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Analytic,
    Pde,
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BackendKind::Analytic => "analytic",
            BackendKind::Pde => "pde",
        })
    }
}

impl FromStr for BackendKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(BackendKind::Analytic),
            "pde" => Ok(BackendKind::Pde),
            other => Err(Error::Config(format!("unknown backend `{other}`"))),
        }
    }
}

impl<T> Backend<T> {
    pub fn kind(&self) -> BackendKind {
        match self {
            Backend::Analytic => BackendKind::Analytic,
            Backend::Pde(_) => BackendKind::Pde,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationSample<T> {
    /// Measured position minus the anchor point.
    pub xi: Vec<T>,
    pub backend: BackendKind,
    pub t_e: T,
}

/// A simulated packet ready to be measured repeatedly.
#[derive(Clone, Debug)]
pub enum PreparedSampler<T> {
    /// Closed-form law, kept on a log scale (long evolution times overflow
    /// the plain variances).
    Analytic { law: LogScaleLaw<T>, center: Vec<T> },
    Pde { state: Box<WaveState<T>>, measurement: Measurement<T> },
}

impl<T: Real> PreparedSampler<T> {
    /// Simulates a packet of spread `r0` started at `x_tilde` under
    /// `f(x) - <grad f(x_tilde), x - x_tilde>` for time `t_e`.
    pub fn new<L: Landscape<T> + ?Sized>(
        landscape: &L,
        x_tilde: &[T],
        r0: T,
        half_width: T,
        t_e: T,
        backend: &Backend<T>,
    ) -> Result<Self> {
        let n = landscape.dim();
        if x_tilde.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x_tilde.len() });
        }
        match backend {
            Backend::Analytic => {
                let h = landscape.hessian(x_tilde).ok_or_else(|| Error::Backend {
                    backend: "analytic",
                    reason: format!("landscape `{}` has no Hessian", landscape.name()),
                })?;
                Ok(Self::Analytic {
                    law: LogScaleLaw::new(&h, t_e, r0)?,
                    center: x_tilde.to_vec(),
                })
            }
            Backend::Pde(settings) => {
                if n > 3 {
                    return Err(Error::Backend {
                        backend: "pde",
                        reason: format!("dimension {n} exceeds 3"),
                    });
                }
                let width = settings.half_width.unwrap_or(half_width);
                let grid = wavesim::build_grid(n, width, settings.mesh, settings.boundary)?
                    .centered_at(x_tilde)?;
                let g0 = landscape.gradient(x_tilde);
                let potential = |x: &[T]| {
                    let lin: T = x.iter().zip(x_tilde).zip(&g0).map(|((&a, &b), &g)| g * (a - b)).sum();
                    landscape.value(x) - lin
                };
                let h = wavesim::discretize(&grid, potential, r0)?;
                let psi0 = wavesim::initial_gaussian(&grid, x_tilde, r0)?;
                let state = wavesim::evolve(&h, &psi0, t_e, settings.dt)?;
                let measurement = Measurement::new(&state);
                Ok(Self::Pde { state: Box::new(state), measurement })
            }
        }
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Self::Analytic { .. } => BackendKind::Analytic,
            Self::Pde { .. } => BackendKind::Pde,
        }
    }

    /// A measured position.
    pub fn sample_position<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        match self {
            Self::Analytic { law, center } => {
                let mut x = center.clone();
                linalg::axpy(T::one(), &law.sample_offset(rng), &mut x);
                x
            }
            Self::Pde { measurement, .. } => measurement.sample(rng),
        }
    }

    /// Measured position minus `x_tilde`; a zero draw is redrawn once.
    /// The closed-form law is centred at `x_tilde`, so its offset is drawn
    /// directly (a spread far below the iterate's magnitude would otherwise
    /// round away); see [`LogScaleLaw::sample_offset`] for its scale.
    pub fn sample_xi<R: Rng + ?Sized>(&self, x_tilde: &[T], rng: &mut R) -> Result<Vec<T>> {
        for _ in 0..2 {
            let xi = match self {
                Self::Analytic { law, .. } => law.sample_offset(rng),
                Self::Pde { .. } => linalg::sub(&self.sample_position(rng), x_tilde),
            };
            if !linalg::is_finite(&xi) {
                return Err(Error::NonFinite("perturbation sample"));
            }
            if linalg::norm(&xi) > T::zero() {
                return Ok(xi);
            }
        }
        Err(Error::DegenerateSample)
    }
}

/// One wave-packet perturbation at `x_tilde` with evolution time `t_e`.
pub fn quantum_simulation_sample<T: Real, L: Landscape<T> + ?Sized, R: Rng + ?Sized>(
    landscape: &L,
    x_tilde: &[T],
    params: &ScheduleParams<T>,
    t_e: T,
    backend: &Backend<T>,
    rng: &mut R,
) -> Result<PerturbationSample<T>> {
    let sampler = PreparedSampler::new(landscape, x_tilde, params.r0, params.m, t_e, backend)?;
    Ok(PerturbationSample {
        xi: sampler.sample_xi(x_tilde, rng)?,
        backend: backend.kind(),
        t_e,
    })
}

/// Step length `(2/3) sqrt(eps/rho)` of the perturbation move.
pub fn perturbation_radius<T: Real>(eps: T, rho: T) -> T {
    T::lit(2.0 / 3.0) * (eps / rho).sqrt()
}

/// Moves `x_t` by `+-(2/3) sqrt(eps/rho) xi/|xi|`, whichever gives the
/// smaller `f`; ties go to `+`.
pub fn apply_perturbation<T: Real, L: Landscape<T> + ?Sized>(
    landscape: &L,
    x_t: &[T],
    xi: &[T],
    eps: T,
    rho: T,
) -> Result<Vec<T>> {
    if xi.len() != x_t.len() || x_t.len() != landscape.dim() {
        return Err(Error::DimensionMismatch {
            expected: landscape.dim(),
            got: xi.len(),
        });
    }
    let norm = linalg::norm(xi);
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::DegenerateSample);
    }
    let step = perturbation_radius(eps, rho) / norm;
    let mut plus = x_t.to_vec();
    linalg::axpy(step, xi, &mut plus);
    let mut minus = x_t.to_vec();
    linalg::axpy(-step, xi, &mut minus);
    if landscape.value(&minus) < landscape.value(&plus) {
        Ok(minus)
    } else {
        Ok(plus)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::{DiagQuad, Quad2d, Quartic2d};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit() -> ScheduleParams<f64> {
        schedule_from(1.0, 1.0, 1.0, 0.1, 1.0, 2, None, &Overrides::default()).unwrap()
    }

    #[test]
    fn schedule_examples() {
        let p = unit();
        assert!((p.script_f_prime - 2.0 / 81.0).abs() < 1e-15);
        assert!((p.script_f_prime - 0.024691).abs() < 1e-6);
        assert_eq!((p.kappa, p.theta), (1.0, 0.25));
        assert!((p.gamma - 0.0625).abs() < 1e-15);
        assert!((p.s - 0.015625).abs() < 1e-15);
        let p = schedule_from(2.0, 1.0, 1.0, 0.1, 1.0, 2, None, &Overrides::default()).unwrap();
        assert_eq!(p.eta, 0.5);
        assert_eq!(p.eta_prime, 0.125);
    }

    #[test]
    fn schedule_formulas() {
        let (ell, rho, eps, delta, gap, n) = (8.0f64, 6.0, 0.05, 0.1, 0.2, 2usize);
        let p = schedule_from(ell, rho, eps, delta, gap, n, Some(3.0), &Overrides::default()).unwrap();
        let root = (eps.powi(3) / rho).sqrt();
        let d0 = delta * 2.0 / 81.0 * root / gap;
        assert!((p.delta0 - d0).abs() < 1e-18);
        let tp = 8.0 / (rho * eps).powf(0.25)
            * (ell / (d0 * (rho * eps).sqrt()) * (n as f64 + 2.0 * (3.0 / d0).ln())).ln();
        assert!((p.script_t_prime / tp - 1.0).abs() < 1e-14);
        let denom = (n as f64).powf(1.5) + 2.0 * n as f64 * ell * tp.ln();
        let r0 = 4.0 * 1e-3 / (9.0 * tp.powi(4)) * (d0 / 3.0 / denom).powi(2);
        assert!((p.r0 / r0 - 1.0).abs() < 1e-12);
        assert!((p.m - r0 / 0.1).abs() < 1e-30);
        assert!((p.script_t - (ell / (rho * eps).sqrt()).sqrt() * 4.0).abs() < 1e-12);
        assert!((p.script_e - root / 4f64.powi(7)).abs() < 1e-18);
        let tpgd = 4.0 * (gap / p.script_f_prime).max(gap * ell / (eps * eps));
        assert!((p.t_pgd / tpgd - 1.0).abs() < 1e-14);
        let tpagd = 3.0 * (gap / p.script_f_prime).max(gap * p.script_t / p.script_e);
        assert!((p.t_pagd / tpagd - 1.0).abs() < 1e-14);
    }

    #[test]
    fn overrides_propagate_and_cap_m() {
        let o = Overrides { r0: Some(0.5), t_prime: Some(1.5), iterations: Some(10), ..Default::default() };
        let p = schedule_from(8.0, 6.0, 0.05, 0.1, 0.2, 2, Some(3.0), &o).unwrap();
        assert_eq!((p.r0, p.script_t_prime, p.m), (0.5, 1.5, 1.0));
        assert_eq!(p.pgd_iterations(), 10);
        let o = Overrides { theta: Some(0.5), ..Default::default() };
        let p = schedule_from(1.0, 1.0, 1.0, 0.1, 1.0, 2, None, &o).unwrap();
        assert_eq!(p.gamma, 0.25);
        let o = Overrides { m: Some(2.0), ..Default::default() };
        assert!(schedule_from(1.0, 1.0, 1.0, 0.1, 1.0, 2, None, &o).is_err());
    }

    #[test]
    fn tampered_schedule_fails_validation() {
        let mut p = unit();
        p.gamma *= 1.01;
        assert!(p.validate().is_err());
        p.overrides.gamma = Some(p.gamma);
        p.s = p.gamma / 4.0;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn rejects_non_positive_inputs() {
        let o = Overrides::default();
        assert!(schedule_from(1.0, 0.0, 1.0, 0.1, 1.0, 2, None, &o).is_err());
        assert!(schedule_from(1.0, 1.0, -1.0, 0.1, 1.0, 2, None, &o).is_err());
        assert!(schedule_from(1.0, 1.0, 1.0, 0.1, 0.0, 2, None, &o).is_err());
        assert!(schedule_from(1.0, 1.0, 1.0, 0.1, 1.0, 0, None, &o).is_err());
    }

    #[test]
    fn perturbation_magnitude_and_tie_rule() {
        let x: Vec<f64> = apply_perturbation(&Quad2d, &[0.0, 0.0], &[3.0, 4.0], 1.0, 1.0).unwrap();
        assert!((linalg::norm(&x) - 2.0 / 3.0).abs() < 1e-15);
        // quad2d is even in every direction through the origin
        assert!(x[0] > 0.0 && (x[0] - 0.4).abs() < 1e-15 && (x[1] - 8.0 / 15.0).abs() < 1e-15);
        let x = apply_perturbation(&Quad2d, &[0.0, 0.0], &[1.0, 0.0], 1.0, 1.0).unwrap();
        assert_eq!(x, vec![2.0 / 3.0, 0.0]);
        assert!((Landscape::<f64>::value(&Quad2d, &x) + 2.0 / 9.0).abs() < 1e-15);
        assert!(matches!(
            apply_perturbation(&Quad2d, &[0.0, 0.0], &[0.0, 0.0], 1.0, 1.0),
            Err(Error::DegenerateSample)
        ));
    }

    #[test]
    fn perturbation_picks_lower_side() {
        // quartic2d away from the origin is not symmetric about x
        let x0 = [0.5, 0.0];
        let x = apply_perturbation(&Quartic2d, &x0, &[-1.0, 0.0], 1.0, 1.0).unwrap();
        let plus = [0.5 - 2.0 / 3.0, 0.0];
        let minus = [0.5 + 2.0 / 3.0, 0.0];
        let (fp, fm) = (Landscape::<f64>::value(&Quartic2d, &plus), Landscape::<f64>::value(&Quartic2d, &minus));
        assert_eq!(x, if fm < fp { minus.to_vec() } else { plus.to_vec() });
    }

    #[test]
    fn zero_time_sample_is_isotropic_gaussian() {
        let p = schedule_from(
            3.0,
            1.0,
            1.0,
            0.1,
            1.0,
            2,
            Some(3.0),
            &Overrides { r0: Some(0.5), ..Default::default() },
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for backend in [
            Backend::Analytic,
            Backend::Pde(PdeSettings { mesh: 64, half_width: Some(3.0), ..Default::default() }),
        ] {
            let sampler = PreparedSampler::new(&Quad2d, &[0.0, 0.0], p.r0, p.m, 0.0, &backend).unwrap();
            let m = 20_000;
            let mut c = [[0.0; 2]; 2];
            for _ in 0..m {
                let xi = sampler.sample_xi(&[0.0, 0.0], &mut rng).unwrap();
                for i in 0..2 {
                    for j in 0..2 {
                        c[i][j] += xi[i] * xi[j] / m as f64;
                    }
                }
            }
            // cell-centre measurement adds a^2/12 per axis on the grid
            assert!((c[0][0] - 0.25).abs() < 0.015, "{backend:?}: {c:?}");
            assert!((c[1][1] - 0.25).abs() < 0.015);
            assert!(c[0][1].abs() < 0.015);
        }
    }

    #[test]
    fn analytic_backend_disperses_along_negative_curvature() {
        let p = schedule_from(3.0, 1.0, 1.0, 0.1, 1.0, 2, None, &Overrides { r0: Some(0.5), ..Default::default() })
            .unwrap();
        let sampler = PreparedSampler::new(&Quad2d, &[0.0, 0.0], p.r0, p.m, 1.0, &Backend::Analytic).unwrap();
        let PreparedSampler::Analytic { law, .. } = &sampler else { panic!() };
        let want = 0.5f64.ln() + 0.5 * crate::analytic::variance_sigma2(1.0f64, -1.0).unwrap().ln();
        assert!((law.ln_std[0] - want).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = quantum_simulation_sample(&Quad2d, &[0.0, 0.0], &p, 1.0, &Backend::Analytic, &mut rng).unwrap();
        assert_eq!((s.backend, s.t_e, s.xi.len()), (BackendKind::Analytic, 1.0, 2));
    }

    #[test]
    fn backend_constraints() {
        let p = unit();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let dq = DiagQuad::new(4, 0.1).unwrap();
        let err = quantum_simulation_sample(&dq, &[0.0; 4], &p, 1.0, &Backend::Pde(PdeSettings::default()), &mut rng);
        assert!(matches!(err, Err(Error::Backend { backend: "pde", .. })));
        let c = crate::landscapes::CustomLandscape::new("lin", 1, |x: &[f64]| x[0], |_, g| g[0] = 1.0);
        let err = quantum_simulation_sample(&c, &[0.0], &p, 1.0, &Backend::Analytic, &mut rng);
        assert!(matches!(err, Err(Error::Backend { backend: "analytic", .. })));
    }
}
