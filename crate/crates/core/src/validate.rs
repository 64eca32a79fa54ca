//! Invariant suite run by `qsaddle validate`: cheap checks of the numerical
//! contracts on seeded inputs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::variance_sigma2;
use crate::config::Profile;
use crate::landscapes::{fd_gradient, Cubic2d, Landscape, Quad2d, Quartic2d};
use crate::linalg;
use crate::optim::{self, EventKind, NoisyGradientModel, RunOptions, StepKind};
use crate::perturb::{schedule_from, Overrides};
use crate::wavesim::{self, Boundary, TimeStep};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, passed: bool, detail: String) -> CheckOutcome {
    CheckOutcome { name, passed, detail }
}

/// Runs every check. `Paper` uses more seeds and a finer grid.
pub fn run_suite(profile: Profile, seed: u64) -> Vec<CheckOutcome> {
    let (runs, mesh) = match profile {
        Profile::Ci => (20, 128),
        Profile::Paper => (100, 256),
    };
    vec![
        variance_bounds(),
        gradients_match_fd(seed),
        descent_and_energy(runs, seed),
        momentum_contract(runs, seed),
        noise_bound(seed),
        conservation(mesh),
        determinism(seed),
    ]
}

fn variance_bounds() -> CheckOutcome {
    let mut bad = 0;
    for i in 0..100 {
        let t = 10.0 * i as f64 / 99.0;
        for j in 0..100 {
            let l = -3.0 + 6.0 * (j as f64 + 0.5) / 100.0;
            let a: f64 = l.abs().sqrt();
            let s = variance_sigma2(t, l).map_or(f64::NAN, f64::sqrt);
            let ok = if l < 0.0 {
                let phi = (a * t).sinh() / (2.0 * a) + (a * t).cosh();
                s * s >= (1.0 + t * t / 4.0) * (1.0 - 1e-12)
                    && s >= phi / 2f64.sqrt() * (1.0 - 1e-12)
                    && s <= phi * (1.0 + 1e-12)
            } else {
                s >= 1f64.min(0.5 / a) * (1.0 - 1e-12) && s <= 1f64.max(0.5 / a) * (1.0 + 1e-12)
            };
            if !ok {
                bad += 1;
            }
        }
    }
    outcome("variance bounds", bad == 0, format!("{bad}/10000 grid points violate"))
}

fn gradients_match_fd(seed: u64) -> CheckOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fs: [&dyn Landscape<f64>; 3] = [&Quad2d, &Quartic2d, &Cubic2d];
    let mut worst = 0.0f64;
    for f in fs {
        for _ in 0..50 {
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            let g = f.gradient(&x);
            let fd = fd_gradient(f, &x, 1e-6);
            worst = worst.max(linalg::distance(&g, &fd) / (1.0 + linalg::norm(&g)));
        }
    }
    outcome("gradients vs finite differences", worst < 1e-6, format!("max relative error {worst:.2e}"))
}

fn quartic_schedule() -> crate::perturb::ScheduleParams<f64> {
    schedule_from(8.0, 6.0, 0.05, 0.1, 2.0, 2, Some(3.0), &Overrides::default()).expect("valid schedule")
}

fn descent_and_energy(runs: u64, seed: u64) -> CheckOutcome {
    let p = quartic_schedule();
    let opts = RunOptions { iterations: Some(400), ..RunOptions::default() };
    let (mut bad, mut total) = (0, 0);
    for k in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
        let x0 = [rng.random_range(-2.5..2.5), rng.random_range(-2.5..2.5)];
        let Ok(t) = optim::pgd_qs(&Quartic2d, &x0, &p, &opts, &mut rng) else {
            return outcome("descent and energy", false, format!("run {k} failed"));
        };
        let r = optim::check_descent(&t, p.eta, 1e-9);
        let Ok(t) = optim::pagd_qs(&Quartic2d, &x0, &p, &opts, &mut rng) else {
            return outcome("descent and energy", false, format!("run {k} failed"));
        };
        let e = optim::check_hamiltonian(&t, 1e-9);
        bad += r.violations + e.violations;
        total += r.checked + e.checked;
    }
    outcome("descent and energy", bad == 0, format!("{bad}/{total} steps violate"))
}

fn momentum_contract(runs: u64, seed: u64) -> CheckOutcome {
    let p = quartic_schedule();
    let opts = RunOptions { iterations: Some(400), ..RunOptions::default() };
    let mut bad = 0;
    let mut events = 0;
    for k in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
        let x0 = [rng.random_range(-0.3..0.3), rng.random_range(-1.0..1.0)];
        let Ok(t) = optim::pagd_qs(&Quartic2d, &x0, &p, &opts, &mut rng) else {
            return outcome("momentum reset", false, format!("run {k} failed"));
        };
        for s in &t.steps {
            if matches!(s.kind, StepKind::Nce | StepKind::Perturbation) {
                events += 1;
                if t.momentum[s.t + 1].iter().any(|&v| v != 0.0) {
                    bad += 1;
                }
            }
        }
        events += t.count(EventKind::SospCertified);
    }
    outcome("momentum reset", bad == 0 && events > 0, format!("{bad}/{events} resets leave momentum"))
}

fn noise_bound(seed: u64) -> CheckOutcome {
    let model = NoisyGradientModel::new(1e-10, 1.0, 2, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let (_, e) = optim::noisy_gradient(&Quad2d, &[0.3, -0.2], &model, &mut rng);
        worst = worst.max(e);
    }
    outcome(
        "gradient noise bound",
        worst <= model.bound,
        format!("max error {worst:.3e} <= bound {:.3e}", model.bound),
    )
}

fn conservation(mesh: usize) -> CheckOutcome {
    let run = || -> crate::Result<(f64, f64)> {
        let grid = wavesim::build_grid(2, 3.0, mesh, Boundary::Dirichlet)?;
        let h = wavesim::discretize(&grid, |x| Landscape::<f64>::value(&Quartic2d, x), 0.5)?;
        let psi0 = wavesim::initial_gaussian(&grid, &[0.0, 0.0], 0.5)?;
        let fwd = wavesim::evolve(&h, &psi0, 2.0, TimeStep::Auto)?;
        let back = wavesim::evolve(&h.negated(), &fwd, 2.0, TimeStep::Auto)?;
        Ok(((fwd.norm_sq() - psi0.norm_sq()).abs(), back.l2_distance(&psi0)))
    };
    match run() {
        Ok((drift, rev)) => outcome(
            "norm and reversibility",
            drift <= 1e-6 && rev <= 1e-5,
            format!("drift {drift:.2e}, reversal {rev:.2e}"),
        ),
        Err(e) => outcome("norm and reversibility", false, e.to_string()),
    }
}

fn determinism(seed: u64) -> CheckOutcome {
    let p = quartic_schedule();
    let opts = RunOptions { iterations: Some(300), ..RunOptions::default() };
    let run = || optim::pgd_qs(&Quartic2d, &[0.01, 0.4], &p, &opts, &mut ChaCha8Rng::seed_from_u64(seed)).ok();
    let (a, b) = (run(), run());
    outcome("determinism", a.is_some() && a == b, "two seeded runs compared".into())
}
