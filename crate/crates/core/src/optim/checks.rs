//! Trajectory-level inequality checks used by tests and `validate`.

use super::{StepKind, Trajectory};
use crate::linalg;
use crate::scalar::Real;

/// Outcome of checking one inequality over a trajectory. `worst_slack` is
/// the largest `lhs - rhs` seen (negative when every case holds strictly).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckReport {
    pub checked: usize,
    pub violations: usize,
    pub worst_slack: f64,
}

impl CheckReport {
    fn new() -> Self {
        CheckReport { checked: 0, violations: 0, worst_slack: f64::NEG_INFINITY }
    }

    fn record(&mut self, lhs: f64, rhs: f64, tol: f64) {
        self.checked += 1;
        let slack = lhs - rhs;
        self.worst_slack = self.worst_slack.max(slack);
        if slack > tol {
            self.violations += 1;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn is_gradient(kind: StepKind) -> bool {
    matches!(kind, StepKind::Gradient | StepKind::GradientAfterPerturbation)
}

/// `f(x_{t+1}) - f(x_t) <= -eta |grad f|^2 / 2 + eta |err|^2 / 2` on every
/// gradient step, with `x_t` the point the step left from.
pub fn check_descent<T: Real>(traj: &Trajectory<T>, eta: T, tol: f64) -> CheckReport {
    let eta = eta.as_f64();
    let mut report = CheckReport::new();
    for s in traj.steps.iter().filter(|s| is_gradient(s.kind)) {
        let g = s.grad_norm_from.as_f64();
        let e = s.noise_norm.as_f64();
        let lhs = s.f_to.as_f64() - s.f_from.as_f64();
        report.record(lhs, -eta * g * g / 2.0 + eta * e * e / 2.0, tol);
    }
    report
}

/// Energy never increases across a step that is not a perturbation.
pub fn check_hamiltonian<T: Real>(traj: &Trajectory<T>, tol: f64) -> CheckReport {
    let mut report = CheckReport::new();
    for s in &traj.steps {
        if s.kind == StepKind::Perturbation || s.t + 1 >= traj.energy.len() {
            continue;
        }
        report.record(traj.energy[s.t + 1].as_f64(), traj.energy[s.t].as_f64(), tol);
    }
    report
}

/// Maximal index ranges `[a, b]` of iterates joined only by plain gradient
/// steps (no perturbation in between).
pub fn gradient_windows<T: Real>(traj: &Trajectory<T>) -> Vec<(usize, usize)> {
    let mut windows = Vec::new();
    let mut start: Option<usize> = None;
    for s in &traj.steps {
        if s.kind == StepKind::Gradient {
            start.get_or_insert(s.t);
        } else if let Some(a) = start.take() {
            windows.push((a, s.t));
        }
    }
    if let Some(a) = start {
        let end = traj.steps.last().map_or(a, |s| s.t + 1);
        windows.push((a, end));
    }
    windows
}

/// Windows up to this length are checked from every start iterate; longer
/// ones only from their first iterate.
const ALL_STARTS_LIMIT: usize = 2000;

/// Improve-or-localize: inside a gradient-only window starting at `s`, for
/// every end `e` and every `tau` in `[s, e]`,
/// `|x_tau - x_s| <= 2 sqrt(eta (e-s) |f(x_s) - f(x_e)|) + 2 eta (e-s) sqrt(c)`.
pub fn check_improve_or_localize<T: Real>(traj: &Trajectory<T>, eta: T, c: T, tol: f64) -> CheckReport {
    let eta = eta.as_f64();
    let sqrt_c = c.as_f64().max(0.0).sqrt();
    let mut report = CheckReport::new();
    for (a, b) in gradient_windows(traj) {
        let starts = if b - a <= ALL_STARTS_LIMIT { a..b } else { a..a + 1 };
        for s in starts {
            let xs = &traj.iterates[s].x;
            let fs = traj.iterates[s].f.as_f64();
            let mut reach = 0.0f64;
            for e in s + 1..=b {
                reach = reach.max(linalg::distance(&traj.iterates[e].x, xs).as_f64());
                let span = (e - s) as f64;
                let fe = traj.iterates[e].f.as_f64();
                // |f_s - f_e| is only known to a few ulps of f
                let gap = (fs - fe).abs() + 4.0 * f64::EPSILON * fs.abs().max(fe.abs());
                let rhs = 2.0 * (eta * span * gap).sqrt() + 2.0 * eta * span * sqrt_c;
                report.record(reach, rhs, tol);
            }
        }
    }
    report
}
