use rand::Rng;

use super::{
    check_start, ensure_finite, is_eps_sosp, sample_uniform_ball, Event, EventKind, Iterate,
    StepKind, StepRecord, Trajectory,
};
use crate::error::Result;
use crate::landscapes::Landscape;
use crate::linalg;
use crate::perturb::{apply_perturbation, quantum_simulation_sample, Backend, ScheduleParams};
use crate::scalar::Real;

/// Knobs shared by the perturbed methods.
#[derive(Clone, Debug)]
pub struct RunOptions<T> {
    pub backend: Backend<T>,
    /// Evolution time of each simulation; defaults to the schedule's `T'`.
    pub t_e: Option<T>,
    /// Stop at the first simulation call that fails to decrease `f` by
    /// `F'` and return the point it was called from.
    pub early_stop: bool,
    /// Replaces the schedule's iteration count.
    pub iterations: Option<usize>,
}

impl<T: Real> Default for RunOptions<T> {
    fn default() -> Self {
        RunOptions {
            backend: Backend::Analytic,
            t_e: None,
            early_stop: false,
            iterations: None,
        }
    }
}

/// Gradient oracle with additive error drawn uniformly from a ball.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoisyGradientModel<T> {
    pub delta_q: T,
    pub ell: T,
    pub n: usize,
    pub omega0: T,
    /// Radius of the error ball, `400 n sqrt(delta_q ell) omega0`.
    pub bound: T,
}

impl<T: Real> NoisyGradientModel<T> {
    pub fn new(delta_q: T, ell: T, n: usize, omega0: T) -> Self {
        let bound = T::lit(400.0) * T::from_usize_lossy(n) * (delta_q * ell).sqrt() * omega0;
        NoisyGradientModel { delta_q, ell, n, omega0, bound }
    }

    /// Evaluation accuracy `(1/(2 ell)) (delta eps / (1000 n^2))^2` used by
    /// the noisy-oracle analysis.
    pub fn for_schedule(params: &ScheduleParams<T>, omega0: T) -> Self {
        let n = T::from_usize_lossy(params.n);
        let inner = params.delta * params.eps / (T::lit(1000.0) * n * n);
        let delta_q = inner * inner / (T::lit(2.0) * params.ell);
        Self::new(delta_q, params.ell, params.n, omega0)
    }

    pub fn exact(ell: T, n: usize) -> Self {
        Self::new(T::zero(), ell, n, T::one())
    }
}

/// Exact gradient plus a uniform draw from the error ball. A zero bound
/// consumes no randomness. Returns the gradient and the error norm.
pub fn noisy_gradient<T: Real, L: Landscape<T> + ?Sized, R: Rng + ?Sized>(
    landscape: &L,
    x: &[T],
    model: &NoisyGradientModel<T>,
    rng: &mut R,
) -> (Vec<T>, T) {
    let mut g = landscape.gradient(x);
    if model.bound > T::zero() {
        let u = sample_uniform_ball(x.len(), model.bound, rng);
        linalg::axpy(T::one(), &u, &mut g);
        (g, linalg::norm(&u))
    } else {
        (g, T::zero())
    }
}

/// Perturbed gradient descent with uniform-ball perturbations of radius
/// `radius` whenever `|grad f| <= eps`.
pub fn pgd_classical<T: Real, L: Landscape<T> + ?Sized, R: Rng + ?Sized>(
    landscape: &L,
    x0: &[T],
    params: &ScheduleParams<T>,
    radius: T,
    iterations: Option<usize>,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    check_start(landscape, x0)?;
    let iterations = iterations.unwrap_or_else(|| params.pgd_iterations());
    let mut traj = Trajectory::default();
    let mut x = x0.to_vec();
    for t in 0..=iterations {
        let mut g = landscape.gradient(&x);
        let mut f = landscape.value(&x);
        traj.iterates.push(Iterate { t, x: x.clone(), f, grad_norm: linalg::norm(&g) });
        if t == iterations {
            break;
        }
        let mut kind = StepKind::Gradient;
        if linalg::norm(&g) <= params.eps {
            let u = sample_uniform_ball(x.len(), radius, rng);
            linalg::axpy(T::one(), &u, &mut x);
            let f_after = landscape.value(&x);
            traj.events.push(Event {
                t,
                kind: EventKind::PerturbClassical,
                f_before: f,
                f_after,
                certificate: None,
            });
            f = f_after;
            g = landscape.gradient(&x);
            kind = StepKind::GradientAfterPerturbation;
        }
        let gn = linalg::norm(&g);
        linalg::axpy(-params.eta, &g, &mut x);
        ensure_finite(&x)?;
        traj.steps.push(StepRecord {
            t,
            kind,
            f_from: f,
            grad_norm_from: gn,
            f_to: landscape.value(&x),
            noise_norm: T::zero(),
        });
    }
    traj.output = x;
    Ok(traj)
}

/// Perturbed gradient descent whose perturbation direction is a measured
/// wave-packet position.
pub fn pgd_qs<T: Real, L: Landscape<T> + ?Sized, R: Rng + ?Sized>(
    landscape: &L,
    x0: &[T],
    params: &ScheduleParams<T>,
    options: &RunOptions<T>,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    let model = NoisyGradientModel::exact(params.ell, params.n);
    pgd_noisy(landscape, x0, params, options, &model, rng)
}

/// As [`pgd_qs`] with every gradient replaced by [`noisy_gradient`]; the
/// small-gradient test uses the noisy norm.
pub fn pgd_jordan<T: Real, L: Landscape<T> + ?Sized, R: Rng + ?Sized>(
    landscape: &L,
    x0: &[T],
    params: &ScheduleParams<T>,
    options: &RunOptions<T>,
    model: &NoisyGradientModel<T>,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    pgd_noisy(landscape, x0, params, options, model, rng)
}

fn pgd_noisy<T: Real, L: Landscape<T> + ?Sized, R: Rng + ?Sized>(
    landscape: &L,
    x0: &[T],
    params: &ScheduleParams<T>,
    options: &RunOptions<T>,
    model: &NoisyGradientModel<T>,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    check_start(landscape, x0)?;
    let iterations = options.iterations.unwrap_or_else(|| params.pgd_iterations());
    let t_e = options.t_e.unwrap_or(params.script_t_prime);
    let mut traj = Trajectory::default();
    let mut x = x0.to_vec();
    for t in 0..=iterations {
        let mut f = landscape.value(&x);
        let exact = landscape.gradient(&x);
        traj.iterates.push(Iterate { t, x: x.clone(), f, grad_norm: linalg::norm(&exact) });
        if t == iterations {
            break;
        }
        let (mut g, mut noise) = noisy_gradient(landscape, &x, model, rng);
        let mut grad_norm_from = linalg::norm(&exact);
        let mut kind = StepKind::Gradient;
        if linalg::norm(&g) <= params.eps {
            let sample = quantum_simulation_sample(landscape, &x, params, t_e, &options.backend, rng)?;
            let moved = apply_perturbation(landscape, &x, &sample.xi, params.eps, params.rho)?;
            let f_after = landscape.value(&moved);
            traj.events.push(Event { t, kind: EventKind::QsCall, f_before: f, f_after, certificate: None });
            if options.early_stop && f - f_after < params.script_f_prime {
                let cert = is_eps_sosp(landscape, &x, params.eps, params.rho)?;
                traj.events.push(Event {
                    t,
                    kind: EventKind::SospCertified,
                    f_before: f,
                    f_after: f,
                    certificate: Some(cert),
                });
                traj.output = x;
                return Ok(traj);
            }
            x = moved;
            f = f_after;
            (g, noise) = noisy_gradient(landscape, &x, model, rng);
            grad_norm_from = linalg::norm(&landscape.gradient(&x));
            kind = StepKind::GradientAfterPerturbation;
        }
        linalg::axpy(-params.eta, &g, &mut x);
        ensure_finite(&x)?;
        traj.steps.push(StepRecord {
            t,
            kind,
            f_from: f,
            grad_norm_from,
            f_to: landscape.value(&x),
            noise_norm: noise,
        });
    }
    traj.output = x;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::{Quad2d, Quartic2d};
    use crate::perturb::{schedule_from, Overrides};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quartic_params() -> ScheduleParams<f64> {
        schedule_from(8.0, 6.0, 0.05, 0.1, 2.0, 2, Some(3.0), &Overrides::default()).unwrap()
    }

    #[test]
    fn pgd_qs_escapes_quad2d_saddle() {
        let params =
            schedule_from(3.0, 1.0, 0.01, 0.1, 1.0, 2, Some(3.0), &Overrides::default()).unwrap();
        let opts = RunOptions { iterations: Some(200), ..RunOptions::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let traj = pgd_qs(&Quad2d, &[0.0, 0.0], &params, &opts, &mut rng).unwrap();
        assert!(traj.count(EventKind::QsCall) >= 1);
        let first = &traj.events[0];
        assert!(first.f_after < first.f_before);
        assert!(traj.iterates.last().unwrap().f < -1.0);
        assert_eq!(traj.iterates.len(), 201);
    }

    #[test]
    fn early_stop_certifies_minimum() {
        let params = quartic_params();
        let opts = RunOptions { early_stop: true, iterations: Some(5_000), ..RunOptions::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let traj = pgd_qs(&Quartic2d, &[0.1, 0.2], &params, &opts, &mut rng).unwrap();
        let cert = traj.certified().expect("certified").certificate.unwrap();
        assert!(cert.is_sosp);
        assert!((traj.output[0].abs() - 3f64.sqrt()).abs() < 0.05);
    }

    #[test]
    fn zero_noise_matches_exact_run() {
        let params = quartic_params();
        let opts = RunOptions { iterations: Some(400), ..RunOptions::default() };
        let model = NoisyGradientModel::new(0.0, params.ell, 2, 1.0);
        let a = pgd_qs(&Quartic2d, &[0.0, 0.3], &params, &opts, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = pgd_jordan(&Quartic2d, &[0.0, 0.3], &params, &opts, &model, &mut ChaCha8Rng::seed_from_u64(3))
            .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn noisy_steps_obey_noisy_descent() {
        let params = quartic_params();
        let opts = RunOptions { iterations: Some(300), ..RunOptions::default() };
        let model = NoisyGradientModel::new(1e-6, params.ell, 2, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let traj = pgd_jordan(&Quartic2d, &[0.05, 0.4], &params, &opts, &model, &mut rng).unwrap();
        assert!(traj.steps.iter().any(|s| s.noise_norm > 0.0));
        for s in &traj.steps {
            assert!(s.noise_norm <= model.bound);
            let rhs = -params.eta * s.grad_norm_from.powi(2) / 2.0 + params.eta * s.noise_norm.powi(2) / 2.0;
            assert!(s.f_to - s.f_from <= rhs + 1e-12, "{s:?}");
        }
    }

    #[test]
    fn noise_bound_formula() {
        let m = NoisyGradientModel::<f64>::new(1e-6, 4.0, 3, 2.0);
        assert!((m.bound - 400.0 * 3.0 * 2e-3 * 2.0).abs() < 1e-12);
        let p = quartic_params();
        let m = NoisyGradientModel::for_schedule(&p, 1.0);
        let expected = (0.1 * 0.05 / 4000.0f64).powi(2) / 16.0;
        assert!((m.delta_q - expected).abs() < 1e-25);
    }

    #[test]
    fn seeded_runs_repeat() {
        let params = quartic_params();
        let opts = RunOptions { iterations: Some(200), ..RunOptions::default() };
        let run = |seed| pgd_classical(&Quartic2d, &[0.0, 0.0], &params, 0.1, Some(200), &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(run(1), run(1));
        let q = |seed| pgd_qs(&Quartic2d, &[0.0, 0.0], &params, &opts, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert_eq!(q(8), q(8));
    }
}
