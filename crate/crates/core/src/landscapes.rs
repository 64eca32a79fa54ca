//! Objective functions with exact derivatives and declared smoothness
//! constants.
//!
//! The built-in test functions only have bounded Hessians on a box; their
//! `ell` (gradient Lipschitz) and `rho` (Hessian Lipschitz) constants are
//! derived on `|x_i| <= domain_radius`. Quadratics are globally valid.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::scalar::Real;

/// An objective `f: R^n -> R` together with its derivatives.
pub trait Landscape<T: Real>: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// `f(x)`; `x.len() == dim()` is the caller's responsibility.
    fn value(&self, x: &[T]) -> T;

    fn gradient_into(&self, x: &[T], out: &mut [T]);

    fn hessian(&self, _x: &[T]) -> Option<Matrix<T>> {
        None
    }

    /// Gradient Lipschitz constant `ell`.
    fn ell(&self) -> T;

    /// Hessian Lipschitz constant `rho`.
    fn rho(&self) -> T;

    /// Half-width of the box on which `ell`/`rho` are valid, if bounded.
    fn domain_radius(&self) -> Option<T> {
        None
    }

    fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut g = vec![T::zero(); self.dim()];
        self.gradient_into(x, &mut g);
        g
    }

    /// Smallest Hessian eigenvalue; `None` without a Hessian.
    fn lambda_min(&self, x: &[T]) -> Option<T> {
        self.hessian(x).and_then(|h| linalg::lambda_min(&h).ok())
    }
}

impl<T: Real> fmt::Debug for dyn Landscape<T> + '_ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Landscape")
            .field("name", &self.name())
            .field("dim", &self.dim())
            .finish()
    }
}

fn check_dim<T: Real, L: Landscape<T> + ?Sized>(l: &L, x: &[T]) -> Result<()> {
    if x.len() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: l.dim(),
            got: x.len(),
        });
    }
    Ok(())
}

/// Checked `f(x)`.
pub fn evaluate<T: Real, L: Landscape<T> + ?Sized>(l: &L, x: &[T]) -> Result<T> {
    check_dim(l, x)?;
    Ok(l.value(x))
}

/// Checked `grad f(x)`.
pub fn gradient<T: Real, L: Landscape<T> + ?Sized>(l: &L, x: &[T]) -> Result<Vec<T>> {
    check_dim(l, x)?;
    Ok(l.gradient(x))
}

/// Checked Hessian.
pub fn hessian<T: Real, L: Landscape<T> + ?Sized>(l: &L, x: &[T]) -> Result<Matrix<T>> {
    check_dim(l, x)?;
    l.hessian(x)
        .ok_or_else(|| Error::HessianUnavailable(l.name().to_string()))
}

/// Central finite-difference gradient of `value`.
pub fn fd_gradient<T: Real, L: Landscape<T> + ?Sized>(l: &L, x: &[T], h: T) -> Vec<T> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            xp[i] = x[i] + h;
            let fp = l.value(&xp);
            xp[i] = x[i] - h;
            let fm = l.value(&xp);
            xp[i] = x[i];
            (fp - fm) / (T::lit(2.0) * h)
        })
        .collect()
}

/// Central finite-difference Hessian built from the analytic gradient,
/// symmetrized.
pub fn fd_hessian<T: Real, L: Landscape<T> + ?Sized>(l: &L, x: &[T], h: T) -> Matrix<T> {
    let n = x.len();
    let mut m = Matrix::zeros(n);
    let mut xp = x.to_vec();
    for j in 0..n {
        xp[j] = x[j] + h;
        let gp = l.gradient(&xp);
        xp[j] = x[j] - h;
        let gm = l.gradient(&xp);
        xp[j] = x[j];
        for i in 0..n {
            m.set(i, j, (gp[i] - gm[i]) / (T::lit(2.0) * h));
        }
    }
    let mut s = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            s.set(i, j, (m.get(i, j) + m.get(j, i)) / T::lit(2.0));
        }
    }
    s
}

/// Hessian of the landscape, or a finite-difference estimate when the
/// landscape has none.
pub fn hessian_or_fd<T: Real, L: Landscape<T> + ?Sized>(l: &L, x: &[T]) -> Matrix<T> {
    l.hessian(x)
        .unwrap_or_else(|| fd_hessian(l, x, T::epsilon().cbrt()))
}

/// `f(x, y) = -x^2/2 + 3 y^2/2`, saddle at the origin.
#[derive(Clone, Debug, Default)]
pub struct Quad2d;

impl<T: Real> Landscape<T> for Quad2d {
    fn name(&self) -> &str {
        "quad2d"
    }
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[T]) -> T {
        -x[0] * x[0] / T::lit(2.0) + T::lit(1.5) * x[1] * x[1]
    }
    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        out[0] = -x[0];
        out[1] = T::lit(3.0) * x[1];
    }
    fn hessian(&self, _x: &[T]) -> Option<Matrix<T>> {
        Some(Matrix::from_diagonal(&[-T::one(), T::lit(3.0)]))
    }
    fn ell(&self) -> T {
        T::lit(3.0)
    }
    fn rho(&self) -> T {
        T::zero()
    }
    fn domain_radius(&self) -> Option<T> {
        Some(T::lit(3.0))
    }
}

/// `f(x, y) = x^4/12 - x^2/2 + y^2/2`: saddle at the origin, minima at
/// `(+-sqrt 3, 0)` with value `-3/4`.
///
/// On `|x|, |y| <= 3`: `ell = max |x^2 - 1| = 8`, and the Hessian varies as
/// `|x1^2 - x2^2| <= 6 |x1 - x2|`, so `rho = 6`.
#[derive(Clone, Debug, Default)]
pub struct Quartic2d;

impl<T: Real> Landscape<T> for Quartic2d {
    fn name(&self) -> &str {
        "quartic2d"
    }
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[T]) -> T {
        let x2 = x[0] * x[0];
        x2 * x2 / T::lit(12.0) - x2 / T::lit(2.0) + x[1] * x[1] / T::lit(2.0)
    }
    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        out[0] = x[0] * x[0] * x[0] / T::lit(3.0) - x[0];
        out[1] = x[1];
    }
    fn hessian(&self, x: &[T]) -> Option<Matrix<T>> {
        Some(Matrix::from_diagonal(&[x[0] * x[0] - T::one(), T::one()]))
    }
    fn ell(&self) -> T {
        T::lit(8.0)
    }
    fn rho(&self) -> T {
        T::lit(6.0)
    }
    fn domain_radius(&self) -> Option<T> {
        Some(T::lit(3.0))
    }
}

/// `g(x, y) = x^3 - y^3 - 2xy + 6`: saddle at the origin, no minimum.
///
/// On `|x|, |y| <= 3` the Hessian `[[6x, -2], [-2, -6y]]` has spectral norm
/// at most `3|x - y| + sqrt(9 (x + y)^2 + 4) <= 20`, and changes by at most
/// `6 max(|dx|, |dy|)`, so `ell = 20`, `rho = 6`.
#[derive(Clone, Debug, Default)]
pub struct Cubic2d;

impl<T: Real> Landscape<T> for Cubic2d {
    fn name(&self) -> &str {
        "cubic2d"
    }
    fn dim(&self) -> usize {
        2
    }
    fn value(&self, x: &[T]) -> T {
        x[0] * x[0] * x[0] - x[1] * x[1] * x[1] - T::lit(2.0) * x[0] * x[1] + T::lit(6.0)
    }
    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        out[0] = T::lit(3.0) * x[0] * x[0] - T::lit(2.0) * x[1];
        out[1] = -T::lit(3.0) * x[1] * x[1] - T::lit(2.0) * x[0];
    }
    fn hessian(&self, x: &[T]) -> Option<Matrix<T>> {
        Some(Matrix::from_rows(&[
            vec![T::lit(6.0) * x[0], -T::lit(2.0)],
            vec![-T::lit(2.0), -T::lit(6.0) * x[1]],
        ]))
    }
    fn ell(&self) -> T {
        T::lit(20.0)
    }
    fn rho(&self) -> T {
        T::lit(6.0)
    }
    fn domain_radius(&self) -> Option<T> {
        Some(T::lit(3.0))
    }
}

/// `h(x) = x^T H x / 2` with `H = diag(-eps, 1, ..., 1)`.
#[derive(Clone, Debug)]
pub struct DiagQuad<T> {
    n: usize,
    eps: T,
}

impl<T: Real> DiagQuad<T> {
    pub fn new(n: usize, eps: T) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("diagquad needs n >= 1".into()));
        }
        if !(eps > T::zero()) {
            return Err(Error::InvalidArgument("diagquad needs eps > 0".into()));
        }
        Ok(Self { n, eps })
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn curvatures(&self) -> Vec<T> {
        let mut d = vec![T::one(); self.n];
        d[0] = -self.eps;
        d
    }
}

impl<T: Real> Landscape<T> for DiagQuad<T> {
    fn name(&self) -> &str {
        "diagquad"
    }
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, x: &[T]) -> T {
        let tail: T = x[1..].iter().map(|&v| v * v).sum();
        (tail - self.eps * x[0] * x[0]) / T::lit(2.0)
    }
    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        out.copy_from_slice(x);
        out[0] = -self.eps * x[0];
    }
    fn hessian(&self, _x: &[T]) -> Option<Matrix<T>> {
        Some(Matrix::from_diagonal(&self.curvatures()))
    }
    fn lambda_min(&self, _x: &[T]) -> Option<T> {
        Some((-self.eps).min(T::one()))
    }
    fn ell(&self) -> T {
        self.eps.max(T::one())
    }
    fn rho(&self) -> T {
        T::zero()
    }
}

/// One-dimensional `f(x) = lambda/2 (x - d)^2`.
#[derive(Clone, Debug)]
pub struct ShiftedQuad1d<T> {
    lambda: T,
    d: T,
}

impl<T: Real> ShiftedQuad1d<T> {
    pub fn new(lambda: T, d: T) -> Self {
        Self { lambda, d }
    }
}

impl<T: Real> Landscape<T> for ShiftedQuad1d<T> {
    fn name(&self) -> &str {
        "shifted_quad1d"
    }
    fn dim(&self) -> usize {
        1
    }
    fn value(&self, x: &[T]) -> T {
        let u = x[0] - self.d;
        self.lambda * u * u / T::lit(2.0)
    }
    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        out[0] = self.lambda * (x[0] - self.d);
    }
    fn hessian(&self, _x: &[T]) -> Option<Matrix<T>> {
        Some(Matrix::from_diagonal(&[self.lambda]))
    }
    fn ell(&self) -> T {
        self.lambda.abs()
    }
    fn rho(&self) -> T {
        T::zero()
    }
}

/// `f(x) = x^T H x / 2` for an arbitrary symmetric `H`.
#[derive(Clone, Debug)]
pub struct Quadratic<T> {
    h: Matrix<T>,
    ell: T,
}

impl<T: Real> Quadratic<T> {
    pub fn new(h: Matrix<T>) -> Result<Self> {
        let ell = linalg::spectral_norm_sym(&h)?;
        Ok(Self { h, ell })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.h
    }
}

impl<T: Real> Landscape<T> for Quadratic<T> {
    fn name(&self) -> &str {
        "quadratic"
    }
    fn dim(&self) -> usize {
        self.h.dim()
    }
    fn value(&self, x: &[T]) -> T {
        self.h.quadratic_form(x) / T::lit(2.0)
    }
    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        out.copy_from_slice(&self.h.matvec(x));
    }
    fn hessian(&self, _x: &[T]) -> Option<Matrix<T>> {
        Some(self.h.clone())
    }
    fn ell(&self) -> T {
        self.ell
    }
    fn rho(&self) -> T {
        T::zero()
    }
}

type ValueFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type GradFn<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;
type HessFn<T> = Arc<dyn Fn(&[T]) -> Matrix<T> + Send + Sync>;

/// User-registered objective. Constants default to `+inf`/`0` until
/// declared or estimated with [`CustomLandscape::estimate_constants`].
#[derive(Clone)]
pub struct CustomLandscape<T> {
    name: String,
    dim: usize,
    value: ValueFn<T>,
    grad: GradFn<T>,
    hess: Option<HessFn<T>>,
    ell: T,
    rho: T,
    domain_radius: Option<T>,
}

impl<T: Real> CustomLandscape<T> {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[T]) -> T + Send + Sync + 'static,
        grad: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            value: Arc::new(value),
            grad: Arc::new(grad),
            hess: None,
            ell: T::infinity(),
            rho: T::zero(),
            domain_radius: None,
        }
    }

    pub fn with_hessian(mut self, hess: impl Fn(&[T]) -> Matrix<T> + Send + Sync + 'static) -> Self {
        self.hess = Some(Arc::new(hess));
        self
    }

    pub fn with_constants(mut self, ell: T, rho: T) -> Self {
        self.ell = ell;
        self.rho = rho;
        self
    }

    pub fn with_domain_radius(mut self, radius: T) -> Self {
        self.domain_radius = Some(radius);
        self
    }

    /// Estimates `ell` as the largest sampled Hessian spectral norm and `rho`
    /// as the largest sampled ratio `|H(a) - H(b)| / |a - b|` over uniform
    /// points in `[-radius, radius]^n`, each inflated by 10%.
    pub fn estimate_constants<R: Rng>(mut self, radius: T, samples: usize, rng: &mut R) -> Result<Self> {
        let draw = |rng: &mut R| -> Vec<T> {
            (0..self.dim)
                .map(|_| T::lit(rng.random_range(-1.0..1.0)) * radius)
                .collect()
        };
        let mut ell = T::zero();
        let mut rho = T::zero();
        for _ in 0..samples {
            let a = draw(rng);
            let b = draw(rng);
            let ha = hessian_or_fd(&self, &a);
            let hb = hessian_or_fd(&self, &b);
            ell = ell.max(linalg::spectral_norm_sym(&ha)?);
            let mut diff = ha.clone();
            for i in 0..self.dim {
                for j in 0..self.dim {
                    diff.set(i, j, ha.get(i, j) - hb.get(i, j));
                }
            }
            let dist = linalg::distance(&a, &b);
            if dist > T::zero() {
                rho = rho.max(linalg::spectral_norm_sym(&diff)? / dist);
            }
        }
        self.ell = ell * T::lit(1.1);
        self.rho = rho * T::lit(1.1);
        self.domain_radius = Some(radius);
        Ok(self)
    }
}

impl<T: Real> Landscape<T> for CustomLandscape<T> {
    fn name(&self) -> &str {
        &self.name
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn value(&self, x: &[T]) -> T {
        (self.value)(x)
    }
    fn gradient_into(&self, x: &[T], out: &mut [T]) {
        (self.grad)(x, out)
    }
    fn hessian(&self, x: &[T]) -> Option<Matrix<T>> {
        self.hess.as_ref().map(|h| h(x))
    }
    fn ell(&self) -> T {
        self.ell
    }
    fn rho(&self) -> T {
        self.rho
    }
    fn domain_radius(&self) -> Option<T> {
        self.domain_radius
    }
}

/// Names accepted by [`by_name`].
pub const BUILTIN_NAMES: &[&str] = &["quad2d", "quartic2d", "cubic2d", "diagquad", "shifted_quad1d"];

/// Looks up a built-in landscape. Parameters: `diagquad` takes `n` and `eps`;
/// `shifted_quad1d` takes `lambda` and `d`.
pub fn by_name<T: Real>(name: &str, params: &BTreeMap<String, f64>) -> Result<Arc<dyn Landscape<T>>> {
    let get = |key: &str| -> Result<f64> {
        params
            .get(key)
            .copied()
            .ok_or_else(|| Error::Config(format!("landscape `{name}` requires parameter `{key}`")))
    };
    Ok(match name {
        "quad2d" => Arc::new(Quad2d),
        "quartic2d" => Arc::new(Quartic2d),
        "cubic2d" => Arc::new(Cubic2d),
        "diagquad" => {
            let n = get("n")?;
            if n < 1.0 || n.fract() != 0.0 {
                return Err(Error::Config(format!("diagquad: n must be a positive integer, got {n}")));
            }
            Arc::new(DiagQuad::new(n as usize, T::lit(get("eps")?))?)
        }
        "shifted_quad1d" => Arc::new(ShiftedQuad1d::new(T::lit(get("lambda")?), T::lit(get("d")?))),
        other => return Err(Error::UnknownLandscape(other.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_points(dim: usize, radius: f64, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| (0..dim).map(|_| rng.random_range(-radius..radius)).collect())
            .collect()
    }

    fn builtins() -> Vec<(Box<dyn Landscape<f64>>, f64)> {
        vec![
            (Box::new(Quad2d), 3.0),
            (Box::new(Quartic2d), 3.0),
            (Box::new(Cubic2d), 3.0),
            (Box::new(DiagQuad::new(5, 0.01).unwrap()), 3.0),
            (Box::new(ShiftedQuad1d::new(-1.0, 0.1)), 3.0),
        ]
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(evaluate(&Quad2d, &[0.0, 0.0]).unwrap(), 0.0);
        let m = evaluate(&Quartic2d, &[3f64.sqrt(), 0.0]).unwrap();
        assert!((m + 0.75).abs() < 1e-15);
        assert_eq!(evaluate(&Cubic2d, &[0.0, 0.0]).unwrap(), 6.0);
    }

    #[test]
    fn gradient_examples() {
        assert_eq!(gradient(&Quad2d, &[1.0, 1.0]).unwrap(), vec![-1.0, 3.0]);
        let g = gradient(&Quartic2d, &[3f64.sqrt(), 0.0]).unwrap();
        assert!(g[0].abs() < 1e-15 && g[1] == 0.0);
        let dq = DiagQuad::new(3, 0.01).unwrap();
        assert_eq!(gradient(&dq, &[1.0, 1.0, 1.0]).unwrap(), vec![-0.01, 1.0, 1.0]);
    }

    #[test]
    fn hessian_examples() {
        let h = hessian(&Quad2d, &[0.3, -2.0]).unwrap();
        assert_eq!(h, Matrix::from_diagonal(&[-1.0, 3.0]));
        let h = hessian(&Cubic2d, &[0.0, 0.0]).unwrap();
        assert_eq!(h, Matrix::from_rows(&[vec![0.0, -2.0], vec![-2.0, 0.0]]));
        let e = linalg::SymmetricEigen::<f64>::new(&h).unwrap();
        assert!((e.values[0] + 2.0).abs() < 1e-14 && (e.values[1] - 2.0).abs() < 1e-14);
        let h = hessian(&Quartic2d, &[0.0, 0.0]).unwrap();
        assert_eq!(h, Matrix::from_diagonal(&[-1.0, 1.0]));
    }

    #[test]
    fn dimension_mismatch_and_missing_hessian() {
        assert!(matches!(
            evaluate(&Quad2d, &[1.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(gradient(&Quad2d, &[1.0, 2.0, 3.0]).is_err());
        let c = CustomLandscape::new("sq", 1, |x: &[f64]| x[0] * x[0], |x, g| g[0] = 2.0 * x[0]);
        assert!(matches!(hessian(&c, &[1.0]), Err(Error::HessianUnavailable(_))));
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for (l, radius) in builtins() {
            for x in random_points(l.dim(), radius, 100, 11) {
                let g = l.gradient(&x);
                let fd = fd_gradient(l.as_ref(), &x, 1e-5);
                let scale = linalg::norm(&g).max(1.0);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() <= 1e-5 * scale, "{}: grad {a} vs fd {b}", l.name());
                }
                let h = l.hessian(&x).unwrap();
                assert!(h.max_asymmetry() <= 1e-12);
                let fdh = fd_hessian(l.as_ref(), &x, 1e-5);
                let hscale = h.frobenius().max(1.0);
                assert!(h.max_abs_diff(&fdh) <= 1e-4 * hscale, "{}: hessian mismatch", l.name());
            }
        }
    }

    #[test]
    fn declared_ell_bounds_hessian_on_box() {
        for (l, radius) in builtins() {
            for x in random_points(l.dim(), radius, 100, 12) {
                let h = l.hessian(&x).unwrap();
                let norm = linalg::spectral_norm_sym(&h).unwrap();
                assert!(norm <= l.ell() + 1e-12, "{}: |H| = {norm} > ell", l.name());
            }
            // extreme corners as well
            let corner = vec![radius; l.dim()];
            let norm = linalg::spectral_norm_sym(&l.hessian(&corner).unwrap()).unwrap();
            assert!(norm <= l.ell() + 1e-12);
        }
        let c = Cubic2d;
        let h = Landscape::<f64>::hessian(&c, &[3.0, -3.0]).unwrap();
        assert!((linalg::spectral_norm_sym(&h).unwrap() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn declared_rho_bounds_hessian_variation() {
        for (l, radius) in builtins() {
            let pts = random_points(l.dim(), radius, 100, 13);
            for pair in pts.chunks(2) {
                let (a, b) = (&pair[0], &pair[1]);
                let ha = l.hessian(a).unwrap();
                let hb = l.hessian(b).unwrap();
                let mut d = ha.clone();
                for i in 0..l.dim() {
                    for j in 0..l.dim() {
                        d.set(i, j, ha.get(i, j) - hb.get(i, j));
                    }
                }
                let lhs = linalg::spectral_norm_sym(&d).unwrap();
                assert!(lhs <= l.rho() * linalg::distance(a, b) + 1e-12, "{}", l.name());
            }
        }
    }

    #[test]
    fn diagquad_single_negative_direction() {
        let dq = DiagQuad::new(10, 0.01).unwrap();
        for x in random_points(10, 2.0, 20, 3) {
            let e = linalg::SymmetricEigen::new(&dq.hessian(&x).unwrap()).unwrap();
            let negatives: Vec<_> = e.values.iter().filter(|v| **v < 0.0).collect();
            assert_eq!(negatives, vec![&-0.01]);
            assert_eq!(dq.lambda_min(&x), Some(-0.01));
        }
    }

    #[test]
    fn registry_lookup() {
        let mut p = BTreeMap::new();
        p.insert("n".to_string(), 100.0);
        p.insert("eps".to_string(), 0.01);
        let l = by_name::<f64>("diagquad", &p).unwrap();
        assert_eq!(l.dim(), 100);
        assert!(matches!(by_name::<f64>("nope", &p), Err(Error::UnknownLandscape(_))));
        assert!(by_name::<f64>("shifted_quad1d", &p).is_err());
    }

    #[test]
    fn custom_landscape_estimates_constants() {
        let c = CustomLandscape::new(
            "cosine",
            1,
            |x: &[f64]| x[0].cos(),
            |x, g| g[0] = -x[0].sin(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = c.estimate_constants(3.0, 200, &mut rng).unwrap();
        // |f''| = |cos| <= 1, |f'''| = |sin| <= 1
        assert!(c.ell() > 0.9 && c.ell() < 1.2);
        assert!(c.rho() > 0.5 && c.rho() < 1.2);
    }

    #[test]
    fn works_in_single_precision() {
        let g: Vec<f32> = gradient(&Quartic2d, &[1.0f32, 2.0]).unwrap();
        assert!((g[0] - (1.0 / 3.0 - 1.0)).abs() < 1e-6);
    }
}
