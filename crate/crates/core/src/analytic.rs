//! Closed-form evolution of a Gaussian wave packet in a quadratic potential.
//!
//! A packet started as `N(center, r^2 I)` under `f(x) = x^T H x / 2`
//! (shifted to the packet center) stays Gaussian. Along each Hessian
//! eigendirection with eigenvalue `lambda` its variance is
//! `r^2 sigma^2(t; lambda)`, and an offset potential minimum moves the mean
//! like a classical particle.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymmetricEigen};
use crate::scalar::Real;

/// Curvatures with `|lambda|` below this use the free-particle formula.
pub const LAMBDA_ZERO: f64 = 1e-12;

fn check_time<T: Real>(t: T) -> Result<()> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::InvalidArgument(format!("evolution time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// Variance at time `t` of a packet that starts with unit variance in the
/// potential `lambda x^2 / 2`.
pub fn variance_sigma2<T: Real>(t: T, lambda: T) -> Result<T> {
    check_time(t)?;
    if !lambda.is_finite() {
        return Err(Error::NonFinite("curvature"));
    }
    let four = T::lit(4.0);
    if lambda.abs() < T::lit(LAMBDA_ZERO) {
        return Ok(T::one() + t * t / four);
    }
    let alpha = lambda.abs().sqrt();
    let at = alpha * t;
    // cos^2 + sin^2/(4 a^2), resp. cosh^2 + sinh^2/(4 a^2): same values as
    // the usual exponential form without its cancellation for small alpha.
    let (c, s) = if lambda > T::zero() {
        (at.cos(), at.sin())
    } else {
        (at.cosh(), at.sinh())
    };
    let ratio = s / alpha;
    Ok(c * c + ratio * ratio / four)
}

/// `ln sigma^2(t; lambda)`, finite where [`variance_sigma2`] overflows.
pub fn ln_variance_sigma2<T: Real>(t: T, lambda: T) -> Result<T> {
    let v = variance_sigma2(t, lambda)?;
    if v.is_finite() {
        return Ok(v.ln());
    }
    // lambda < 0 with large alpha t: factor out e^{2 alpha t} / 4.
    let alpha = lambda.abs().sqrt();
    let at = alpha * t;
    let e = (-(at + at)).exp();
    let (p, m) = (T::one() + e, T::one() - e);
    let four = T::lit(4.0);
    Ok(at + at + ((p * p + m * m / (four * alpha * alpha)) / four).ln())
}

/// Mean at time `t` of a packet started at the origin in the potential
/// `lambda (x - d)^2 / 2`.
pub fn mean_offset<T: Real>(t: T, lambda: T, d: T) -> Result<T> {
    check_time(t)?;
    if !lambda.is_finite() || !d.is_finite() {
        return Err(Error::NonFinite("curvature or offset"));
    }
    if lambda.abs() < T::lit(LAMBDA_ZERO) {
        return Ok(T::zero());
    }
    let at = lambda.abs().sqrt() * t;
    let c = if lambda > T::zero() { at.cos() } else { at.cosh() };
    Ok(d * (T::one() - c))
}

/// Gaussian position law of an evolved packet.
///
/// `eigvecs` holds the Hessian eigenvectors as columns, so the covariance is
/// `eigvecs * diag(r^2 eigvars) * eigvecs^T`.
#[derive(Clone, Debug)]
pub struct GaussianLaw<T> {
    pub mean: Vec<T>,
    pub eigvecs: Matrix<T>,
    pub eigvars: Vec<T>,
    pub r: T,
}

impl<T: Real> GaussianLaw<T> {
    /// Isotropic `N(mean, r^2 I)`.
    pub fn isotropic(mean: Vec<T>, r: T) -> Self {
        let n = mean.len();
        Self {
            mean,
            eigvecs: Matrix::identity(n),
            eigvars: vec![T::one(); n],
            r,
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Per-eigendirection standard deviations `r sigma_i`.
    pub fn std_devs(&self) -> Vec<T> {
        self.eigvars.iter().map(|&v| self.r * v.sqrt()).collect()
    }

    pub fn covariance(&self) -> Matrix<T> {
        let r2 = self.r * self.r;
        let d: Vec<T> = self.eigvars.iter().map(|&v| r2 * v).collect();
        let n = self.dim();
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = T::zero();
                for k in 0..n {
                    acc += self.eigvecs.get(i, k) * d[k] * self.eigvecs.get(j, k);
                }
                out.set(i, j, acc);
                out.set(j, i, acc);
            }
        }
        out
    }

    /// Variance of coordinate `axis`.
    pub fn marginal_variance(&self, axis: usize) -> T {
        let r2 = self.r * self.r;
        (0..self.dim())
            .map(|k| {
                let u = self.eigvecs.get(axis, k);
                u * u * r2 * self.eigvars[k]
            })
            .sum()
    }

    /// Draws `mean + U diag(r sigma_i) z` with `z` standard normal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let n = self.dim();
        let z: Vec<T> = self
            .std_devs()
            .into_iter()
            .map(|s| s * T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        let mut x = self.mean.clone();
        for i in 0..n {
            let row: T = (0..n).map(|k| self.eigvecs.get(i, k) * z[k]).sum();
            x[i] += row;
        }
        x
    }

    /// Probability density at `x`.
    pub fn density(&self, x: &[T]) -> T {
        let n = self.dim();
        let diff = linalg::sub(x, &self.mean);
        let sd = self.std_devs();
        let mut quad = T::zero();
        let mut log_norm = T::zero();
        for k in 0..n {
            let proj: T = (0..n).map(|i| self.eigvecs.get(i, k) * diff[i]).sum();
            let z = proj / sd[k];
            quad += z * z;
            log_norm += sd[k].ln();
        }
        let half_log_2pi = (T::lit(2.0) * T::PI()).ln() / T::lit(2.0);
        (-(quad / T::lit(2.0)) - log_norm - T::from_usize_lossy(n) * half_log_2pi).exp()
    }

    /// Writes the mean and covariance as CSV: `row,mean,cov_0,...`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let n = self.dim();
        write!(w, "row,mean")?;
        for j in 0..n {
            write!(w, ",cov_{j}")?;
        }
        writeln!(w)?;
        let cov = self.covariance();
        for i in 0..n {
            write!(w, "{i},{:.8e}", self.mean[i].as_f64())?;
            for j in 0..n {
                write!(w, ",{:.8e}", cov.get(i, j).as_f64())?;
            }
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_inputs<T: Real>(hessian: &Matrix<T>, t: T, r: T, center: &[T]) -> Result<()> {
    check_time(t)?;
    if !(r > T::zero()) || !r.is_finite() {
        return Err(Error::InvalidArgument(format!("spread r must be > 0, got {r}")));
    }
    if center.len() != hessian.dim() {
        return Err(Error::DimensionMismatch {
            expected: hessian.dim(),
            got: center.len(),
        });
    }
    Ok(())
}

fn eigen_of<T: Real>(hessian: &Matrix<T>) -> Result<(Vec<T>, Matrix<T>)> {
    if hessian.is_diagonal() {
        if hessian.diagonal().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        return Ok((hessian.diagonal(), Matrix::identity(hessian.dim())));
    }
    let e = SymmetricEigen::new(hessian)?;
    Ok((e.values, e.vectors))
}

/// Law of a packet started as `N(center, r^2 I)` at a critical point of the
/// quadratic with Hessian `hessian`, after time `t`.
pub fn evolved_law<T: Real>(hessian: &Matrix<T>, t: T, r: T, center: &[T]) -> Result<GaussianLaw<T>> {
    check_inputs(hessian, t, r, center)?;
    let (values, vectors) = eigen_of(hessian)?;
    let eigvars = values
        .iter()
        .map(|&l| variance_sigma2(t, l))
        .collect::<Result<Vec<_>>>()?;
    Ok(GaussianLaw {
        mean: center.to_vec(),
        eigvecs: vectors,
        eigvars,
        r,
    })
}

/// Centered law of an evolved packet stored on a log scale, for evolution
/// times where the variances leave the floating-point range.
/// Samples are `U diag(exp(ln_std_i)) z`.
#[derive(Clone, Debug)]
pub struct LogScaleLaw<T> {
    pub eigvecs: Matrix<T>,
    /// `ln(r sigma_i)` per eigendirection.
    pub ln_std: Vec<T>,
}

impl<T: Real> LogScaleLaw<T> {
    pub fn new(hessian: &Matrix<T>, t: T, r: T) -> Result<Self> {
        let zeros = vec![T::zero(); hessian.dim()];
        check_inputs(hessian, t, r, &zeros)?;
        let (values, eigvecs) = eigen_of(hessian)?;
        let half = T::lit(0.5);
        let ln_std = values
            .iter()
            .map(|&l| Ok(r.ln() + half * ln_variance_sigma2(t, l)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { eigvecs, ln_std })
    }

    /// Whether the plain standard deviations are representable and nonzero.
    pub fn representable(&self) -> bool {
        self.ln_std.iter().all(|&l| {
            let s = l.exp();
            s.is_finite() && s > T::min_positive_value()
        })
    }

    /// Draws an offset from the law. When the scale is not representable the
    /// draw is divided by the largest standard deviation, which keeps its
    /// direction distribution.
    pub fn sample_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        let n = self.ln_std.len();
        let shift = if self.representable() {
            T::zero()
        } else {
            self.ln_std.iter().copied().fold(T::neg_infinity(), T::max)
        };
        let z: Vec<T> = self
            .ln_std
            .iter()
            .map(|&l| (l - shift).exp() * T::lit(rng.sample::<f64, _>(StandardNormal)))
            .collect();
        (0..n)
            .map(|i| (0..n).map(|k| self.eigvecs.get(i, k) * z[k]).sum())
            .collect()
    }
}

/// As [`evolved_law`], but the quadratic's critical point sits at `minimizer`
/// rather than at the packet center. The offset is projected onto each
/// eigendirection, where the 1-D mean law applies independently.
pub fn evolved_law_off_center<T: Real>(
    hessian: &Matrix<T>,
    t: T,
    r: T,
    center: &[T],
    minimizer: &[T],
) -> Result<GaussianLaw<T>> {
    let mut law = evolved_law(hessian, t, r, center)?;
    if minimizer.len() != center.len() {
        return Err(Error::DimensionMismatch {
            expected: center.len(),
            got: minimizer.len(),
        });
    }
    let (values, _) = eigen_of(hessian)?;
    let offset = linalg::sub(minimizer, center);
    let n = center.len();
    for k in 0..n {
        let u = law.eigvecs.column(k);
        let d = linalg::dot(&u, &offset);
        let mu = mean_offset(t, values[k], d)?;
        linalg::axpy(mu, &u, &mut law.mean);
    }
    Ok(law)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    /// The three-case exponential/trigonometric form, evaluated literally.
    fn sigma2_literal(t: f64, lambda: f64) -> f64 {
        if lambda == 0.0 {
            1.0 + t * t / 4.0
        } else if lambda > 0.0 {
            let a = lambda.sqrt();
            ((1.0 + 4.0 * a * a) - (1.0 - 4.0 * a * a) * (2.0 * a * t).cos()) / (8.0 * a * a)
        } else {
            let a = (-lambda).sqrt();
            let e = (2.0 * a * t).exp();
            ((1.0 - e).powi(2) + 4.0 * a * a * (1.0 + e).powi(2)) / (16.0 * a * a * e)
        }
    }

    #[test]
    fn variance_examples() {
        assert_eq!(variance_sigma2(2.0, 0.0).unwrap(), 2.0);
        assert!((variance_sigma2(0.0f64, -1.0).unwrap() - 1.0).abs() < 1e-15);
        let e2 = std::f64::consts::E.powi(2);
        let expect = ((1.0 - e2).powi(2) + 4.0 * (1.0 + e2).powi(2)) / (16.0 * e2);
        let got = variance_sigma2(1.0, -1.0).unwrap();
        assert!((got - expect).abs() < 1e-13);
        assert!((got - 2.7265).abs() < 2e-4);
        assert!((0.25 * got - 0.68).abs() < 0.002);
        assert!(variance_sigma2(-0.1, 1.0).is_err());
    }

    #[test]
    fn variance_matches_literal_form() {
        for &l in &[-9.0, -3.0, -1.0, -0.3, 0.2, 1.0, 3.0, 7.0] {
            for i in 0..=40 {
                let t = i as f64 * 0.25;
                let a = variance_sigma2(t, l).unwrap();
                let b = sigma2_literal(t, l);
                assert!((a - b).abs() <= 1e-9 * b.max(1.0), "t={t} l={l}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean_offset(5.0, 0.0, 0.3).unwrap(), 0.0);
        assert_eq!(mean_offset(0.0, -1.0, 0.1).unwrap(), 0.0);
        let m = mean_offset(1.0, -1.0, 0.1).unwrap();
        assert!((m - 0.1 * (1.0 - 1f64.cosh())).abs() < 1e-15);
        assert!((m + 0.0543081).abs() < 1e-7);
        assert!(mean_offset(-1.0, 1.0, 0.1).is_err());
    }

    #[test]
    fn evolved_law_examples() {
        let law = evolved_law(&Matrix::zeros(3), 2.0, 0.5, &[0.0; 3]).unwrap();
        let cov = law.covariance();
        assert!(cov.max_abs_diff(&Matrix::from_diagonal(&[0.5; 3])) < 1e-15);

        let h = Matrix::from_rows(&[vec![1.0, 0.4], vec![0.4, -2.0]]);
        let law = evolved_law(&h, 0.0, 0.5, &[0.0, 0.0]).unwrap();
        assert!(law.covariance().max_abs_diff(&Matrix::from_diagonal(&[0.25, 0.25])) < 1e-14);

        let law = evolved_law(&Matrix::from_diagonal(&[-1.0, 3.0]), 1.0, 0.5, &[0.0, 0.0]).unwrap();
        let cov = law.covariance();
        assert!((cov.get(0, 0) - 0.25 * sigma2_literal(1.0, -1.0)).abs() < 1e-12);
        assert!((cov.get(1, 1) - 0.25 * sigma2_literal(1.0, 3.0)).abs() < 1e-12);
        assert_eq!(cov.get(0, 1), 0.0);
    }

    #[test]
    fn evolved_law_rejects_bad_input() {
        let asym = Matrix::from_rows(&[vec![1.0, 1.0], vec![0.0, 1.0]]);
        assert!(matches!(evolved_law(&asym, 1.0, 0.5, &[0.0, 0.0]), Err(Error::NotSymmetric)));
        assert!(evolved_law(&Matrix::identity(2), 1.0, 0.0, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn law_eigvecs_orthogonal_and_covariance_spd() {
        let h = Matrix::from_rows(&[
            vec![2.0, -1.0, 0.3],
            vec![-1.0, -0.5, 0.7],
            vec![0.3, 0.7, 1.0],
        ]);
        let law = evolved_law(&h, 1.3, 0.4, &[0.0; 3]).unwrap();
        let vtv = law.eigvecs.transpose().matmul(&law.eigvecs);
        assert!(vtv.max_abs_diff(&Matrix::identity(3)) < 1e-10);
        assert!(law.eigvars.iter().all(|&v| v > 0.0));
        let cov = law.covariance();
        assert!(cov.max_asymmetry() < 1e-15);
        assert!(linalg::lambda_min(&cov).unwrap() > 0.0);
    }

    #[test]
    fn sampling_matches_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let law = GaussianLaw::isotropic(vec![0.0, 0.0], 1.0);
        let m = 100_000;
        let mut c = [[0.0; 2]; 2];
        for _ in 0..m {
            let x = law.sample(&mut rng);
            for i in 0..2 {
                for j in 0..2 {
                    c[i][j] += x[i] * x[j] / m as f64;
                }
            }
        }
        assert!((c[0][0] - 1.0).abs() < 0.03 && (c[1][1] - 1.0).abs() < 0.03 && c[0][1].abs() < 0.03);

        let law = evolved_law(&Matrix::from_diagonal(&[-1.0, 3.0]), 1.0, 0.5, &[0.0, 0.0]).unwrap();
        let target = 0.25 * sigma2_literal(1.0, -1.0);
        let var: f64 = (0..m).map(|_| { let x: Vec<f64> = law.sample(&mut rng); x[0] * x[0] }).sum::<f64>() / m as f64;
        assert!((var / target - 1.0).abs() < 0.03);
    }

    #[test]
    fn shrinking_spread_concentrates_on_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut law = evolved_law(&Matrix::from_diagonal(&[-1.0, 3.0]), 1.0, 1e-9, &[0.3, -0.2]).unwrap();
        law.r = 1e-12;
        let x = law.sample(&mut rng);
        assert!(linalg::distance(&x, &[0.3, -0.2]) < 1e-10);
    }

    #[test]
    fn density_integrates_to_one() {
        let law = evolved_law(&Matrix::from_rows(&[vec![-1.0, 0.5], vec![0.5, 2.0]]), 0.7, 0.5, &[0.1, 0.0]).unwrap();
        let h = 0.02;
        let mut mass = 0.0;
        for i in 0..400 {
            for j in 0..400 {
                let x = [-4.0 + (i as f64 + 0.5) * h, -4.0 + (j as f64 + 0.5) * h];
                mass += law.density(&x) * h * h;
            }
        }
        assert!((mass - 1.0).abs() < 1e-6);
    }

    #[test]
    fn off_center_mean_follows_classical_path() {
        let law = evolved_law_off_center(&Matrix::<f64>::from_diagonal(&[-1.0]), 1.0, 0.5, &[0.0], &[0.1]).unwrap();
        assert!((law.mean[0] - mean_offset(1.0, -1.0, 0.1).unwrap()).abs() < 1e-15);
        // rotated 2-D case: the classical trajectory x'' = -H (x - c)
        let h = Matrix::from_rows(&[vec![0.5, 1.0], vec![1.0, 0.5]]);
        let c = [0.2, -0.1];
        let law = evolved_law_off_center(&h, 0.8, 0.5, &[0.0, 0.0], &c).unwrap();
        let (mut x, mut v) = ([0.0f64, 0.0], [0.0f64, 0.0]);
        let steps = 80_000;
        let dt = 0.8 / steps as f64;
        let acc = |x: &[f64; 2]| {
            let g = h.matvec(&[x[0] - c[0], x[1] - c[1]]);
            [-g[0], -g[1]]
        };
        for _ in 0..steps {
            let a = acc(&x);
            v = [v[0] + 0.5 * dt * a[0], v[1] + 0.5 * dt * a[1]];
            x = [x[0] + dt * v[0], x[1] + dt * v[1]];
            let a = acc(&x);
            v = [v[0] + 0.5 * dt * a[0], v[1] + 0.5 * dt * a[1]];
        }
        assert!(linalg::distance(&x, &law.mean) < 1e-8);
    }

    #[test]
    fn law_csv_dump() {
        let dir = std::env::temp_dir().join(format!("qsaddle-law-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("law.csv");
        GaussianLaw::isotropic(vec![1.0, 2.0], 0.5).write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "row,mean,cov_0,cov_1");
        assert_eq!(text.lines().count(), 3);
        std::fs::remove_dir_all(&dir).ok();
    }

    proptest! {
        #[test]
        fn continuous_at_zero_curvature(t in 0.0f64..10.0) {
            // sigma^2(t; l) = 1 + t^2/4 - l (t^2 + t^4/12) + O(l^2)
            let base = 1.0 + t * t / 4.0;
            for l in [1e-8, -1e-8] {
                let pred = base - l * (t * t + t.powi(4) / 12.0);
                prop_assert!((variance_sigma2(t, l).unwrap() - pred).abs() <= 1e-9);
            }
            if t <= 3.0 {
                prop_assert!((variance_sigma2(t, 1e-8).unwrap() - base).abs() <= 1e-6);
                prop_assert!((variance_sigma2(t, -1e-8).unwrap() - base).abs() <= 1e-6);
            }
        }

        #[test]
        fn negative_curvature_beats_free_dispersion(t in 0.0f64..10.0, a in 1e-3f64..3.0) {
            let s2 = variance_sigma2(t, -a * a).unwrap();
            prop_assert!(s2 >= (1.0 + t * t / 4.0) * (1.0 - 1e-12));
        }

        #[test]
        fn variance_two_sided_bounds(t in 0.0f64..10.0, a in 1e-3f64..3.0) {
            let tol = 1e-12;
            let s = variance_sigma2(t, a * a).unwrap().sqrt();
            let (lo, hi) = (1f64.min(0.5 / a), 1f64.max(0.5 / a));
            prop_assert!(s >= lo * (1.0 - tol) && s <= hi * (1.0 + tol));
            let s = variance_sigma2(t, -a * a).unwrap().sqrt();
            let phi = (a * t).sinh() / (2.0 * a) + (a * t).cosh();
            prop_assert!(s >= phi / 2f64.sqrt() * (1.0 - tol) && s <= phi * (1.0 + tol));
        }

        #[test]
        fn dispersion_monotone_under_negative_curvature(t in 0.0f64..9.9, dt in 0.0f64..0.1, a in 1e-3f64..3.0) {
            let l = -a * a;
            prop_assert!(variance_sigma2(t + dt, l).unwrap() >= variance_sigma2(t, l).unwrap() * (1.0 - 1e-14));
        }
    }

    #[test]
    fn ln_variance_matches_where_finite_and_survives_overflow() {
        for &(t, l) in &[(1.0f64, -1.0f64), (3.0, 0.5), (50.0, -2.0), (0.0, -3.0)] {
            let direct = variance_sigma2(t, l).unwrap().ln();
            assert!((ln_variance_sigma2(t, l).unwrap() - direct).abs() < 1e-12);
        }
        // alpha t = 500: cosh overflows, ln sigma^2 ~ 1000 + ln((1 + 1/4)/4)
        let v = ln_variance_sigma2(500.0f64, -1.0).unwrap();
        assert!((v - (1000.0 + (1.25f64 / 4.0).ln())).abs() < 1e-9);
    }

    #[test]
    fn log_scale_law_keeps_direction_law() {
        let h = Matrix::<f64>::from_diagonal(&[-1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        // representable: same second moments as the plain law
        let small = LogScaleLaw::new(&h, 2.0, 0.5).unwrap();
        assert!(small.representable());
        let m = 40_000;
        let mut acc = [0.0; 2];
        for _ in 0..m {
            let x = small.sample_offset(&mut rng);
            acc[0] += x[0] * x[0];
            acc[1] += x[1] * x[1];
        }
        let want0 = 0.25 * variance_sigma2(2.0, -1.0).unwrap();
        let want1 = 0.25 * variance_sigma2(2.0, 1.0).unwrap();
        assert!((acc[0] / m as f64 / want0 - 1.0).abs() < 0.03);
        assert!((acc[1] / m as f64 / want1 - 1.0).abs() < 0.03);
        // overflowing scale with a tiny spread: finite draws along the unstable axis
        let big = LogScaleLaw::new(&h, 800.0, 1e-20).unwrap();
        assert!(!big.representable());
        let x = big.sample_offset(&mut rng);
        assert!(x.iter().all(|v| v.is_finite()) && x[0].abs() > 1e100 * x[1].abs());
    }
}
