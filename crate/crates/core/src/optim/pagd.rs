use rand::Rng;

use super::{
    check_start, ensure_finite, is_eps_sosp, Event, EventKind, Iterate, RunOptions, StepKind,
    StepRecord, Trajectory,
};
use crate::error::Result;
use crate::landscapes::Landscape;
use crate::linalg;
use crate::perturb::{apply_perturbation, quantum_simulation_sample, ScheduleParams};
use crate::scalar::Real;

/// `f(x) + |v|^2 / (2 eta')`.
pub fn agd_hamiltonian<T: Real, L: Landscape<T> + ?Sized>(
    landscape: &L,
    x: &[T],
    v: &[T],
    eta_prime: T,
) -> T {
    landscape.value(x) + linalg::dot(v, v) / (T::lit(2.0) * eta_prime)
}

/// Negative-curvature exploitation. Large momentum (`|v| >= s`) is dropped
/// in place; otherwise `x` moves by `s v/|v|` in the better of the two
/// directions. Momentum is zero afterwards. Returns the new point and
/// whether it was a momentum reset.
pub fn nce<T: Real, L: Landscape<T> + ?Sized>(landscape: &L, x: &[T], v: &[T], s: T) -> (Vec<T>, bool) {
    let vn = linalg::norm(v);
    if vn >= s || vn == T::zero() {
        return (x.to_vec(), true);
    }
    let mut plus = x.to_vec();
    linalg::axpy(s / vn, v, &mut plus);
    let mut minus = x.to_vec();
    linalg::axpy(-s / vn, v, &mut minus);
    if landscape.value(&minus) < landscape.value(&plus) {
        (minus, false)
    } else {
        (plus, false)
    }
}

/// Accelerated gradient descent with wave-packet perturbations. A
/// simulation call replaces that iteration's momentum step and zeroes the
/// momentum. The nonconvexity certificate
/// `f(x) <= f(y) + <grad f(y), x - y> - (gamma/2) |x - y|^2` triggers
/// [`nce`]; it is only evaluated when `x != y`.
pub fn pagd_qs<T: Real, L: Landscape<T> + ?Sized, R: Rng + ?Sized>(
    landscape: &L,
    x0: &[T],
    params: &ScheduleParams<T>,
    options: &RunOptions<T>,
    rng: &mut R,
) -> Result<Trajectory<T>> {
    check_start(landscape, x0)?;
    let iterations = options.iterations.unwrap_or_else(|| params.pagd_iterations());
    let t_e = options.t_e.unwrap_or(params.script_t_prime);
    let half = T::lit(0.5);
    let mut traj = Trajectory::default();
    let mut x = x0.to_vec();
    let mut v = vec![T::zero(); x.len()];
    for t in 0..=iterations {
        let f = landscape.value(&x);
        let g = landscape.gradient(&x);
        let gn = linalg::norm(&g);
        traj.iterates.push(Iterate { t, x: x.clone(), f, grad_norm: gn });
        traj.momentum.push(v.clone());
        traj.energy.push(f + linalg::dot(&v, &v) / (T::lit(2.0) * params.eta_prime));
        if t == iterations {
            break;
        }

        if gn <= params.eps {
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
            traj.steps.push(StepRecord {
                t,
                kind: StepKind::Perturbation,
                f_from: f,
                grad_norm_from: gn,
                f_to: f_after,
                noise_norm: T::zero(),
            });
            x = moved;
            v.iter_mut().for_each(|c| *c = T::zero());
            continue;
        }

        let mut y = x.clone();
        linalg::axpy(T::one() - params.theta, &v, &mut y);
        let gy = landscape.gradient(&y);
        let fy = landscape.value(&y);
        let mut x_next = y.clone();
        linalg::axpy(-params.eta_prime, &gy, &mut x_next);
        let diff = linalg::sub(&x, &y);
        let dist_sq = linalg::dot(&diff, &diff);
        let certificate = dist_sq > T::zero()
            && f <= fy + linalg::dot(&gy, &diff) - half * params.gamma * dist_sq;
        let (kind, grad_norm_from, f_from) = if certificate {
            let (moved, reset) = nce(landscape, &x, &v, params.s);
            x_next = moved;
            let f_to = landscape.value(&x_next);
            traj.events.push(Event {
                t,
                kind: if reset { EventKind::NceMomentumReset } else { EventKind::NceStep },
                f_before: f,
                f_after: f_to,
                certificate: None,
            });
            (StepKind::Nce, gn, f)
        } else {
            (StepKind::Agd, linalg::norm(&gy), fy)
        };
        ensure_finite(&x_next)?;
        let v_next = if certificate {
            vec![T::zero(); x.len()]
        } else {
            linalg::sub(&x_next, &x)
        };
        traj.steps.push(StepRecord {
            t,
            kind,
            f_from,
            grad_norm_from,
            f_to: landscape.value(&x_next),
            noise_norm: T::zero(),
        });
        x = x_next;
        v = v_next;
    }
    traj.output = x;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landscapes::{DiagQuad, Quad2d, Quartic2d};
    use crate::optim::gradient_descent;
    use crate::perturb::{schedule_from, Overrides};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn nce_examples() {
        let (x, reset) = nce(&Quad2d, &[0.0, 0.0], &[0.0, 0.05], 0.01);
        assert!(reset && x == vec![0.0, 0.0]);
        let (x, reset): (Vec<f64>, bool) = nce(&Quad2d, &[0.0, 0.0], &[0.0, 0.005], 0.01);
        assert!(!reset);
        assert!((x[1].abs() - 0.01).abs() < 1e-15 && x[0] == 0.0);
    }

    #[test]
    fn theta_one_reduces_to_gd() {
        let o = Overrides { theta: Some(1.0), ..Overrides::default() };
        let params = schedule_from(8.0, 6.0, 1e-9, 0.1, 2.0, 2, Some(3.0), &o).unwrap();
        let opts = RunOptions { iterations: Some(50), ..RunOptions::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = pagd_qs(&Quartic2d, &[0.5, 0.7], &params, &opts, &mut rng).unwrap();
        let b = gradient_descent(&Quartic2d, &[0.5, 0.7], params.eta_prime, 50).unwrap();
        assert!(a.events.is_empty());
        for (p, q) in a.iterates.iter().zip(&b.iterates) {
            assert!(linalg::distance(&p.x, &q.x) < 1e-14);
        }
    }

    #[test]
    fn hamiltonian_never_increases_off_perturbation() {
        let params = schedule_from(8.0, 6.0, 0.05, 0.1, 2.0, 2, Some(3.0), &Overrides::default()).unwrap();
        let opts = RunOptions { iterations: Some(3000), ..RunOptions::default() };
        for seed in 0..4 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let traj = pagd_qs(&Quartic2d, &[0.3, 1.2], &params, &opts, &mut rng).unwrap();
            for s in &traj.steps {
                if s.kind != StepKind::Perturbation {
                    assert!(traj.energy[s.t + 1] <= traj.energy[s.t] + 1e-12, "seed {seed} step {s:?}");
                }
            }
            assert!(traj.iterates.last().unwrap().f < -0.74);
        }
    }

    #[test]
    fn pagd_escapes_diagquad() {
        let dq = DiagQuad::new(10, 0.01).unwrap();
        let params = schedule_from(1.0, 1.0, 1e-4, 0.1, 1.0, 10, None, &Overrides::default()).unwrap();
        let opts = RunOptions { iterations: Some(2000), ..RunOptions::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let traj = pagd_qs(&dq, &[0.0; 10], &params, &opts, &mut rng).unwrap();
        assert_eq!(traj.events[0].kind, EventKind::QsCall);
        assert!(traj.iterates.last().unwrap().f < traj.iterates[0].f);
    }
}
