//! Finite-difference solver for the scaled Schrödinger equation
//!
//! ```text
//! i dPsi/dt = [ -(r0^2 / 2) Laplacian + V(x) / r0^2 ] Psi
//! ```
//!
//! on a box in one to three dimensions. The wave function is split into
//! `Psi = Q + iP`, giving the canonical system `Q' = H P`, `P' = -H Q`, which
//! is advanced with a kick-drift-kick leapfrog. `H` is applied matrix-free
//! with the second-order stencil.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::GaussianLaw;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default cap on the number of grid points.
pub const DEFAULT_POINT_CAP: usize = 1 << 24;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Dirichlet,
    Periodic,
}

impl FromStr for Boundary {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet" => Ok(Boundary::Dirichlet),
            "periodic" => Ok(Boundary::Periodic),
            other => Err(Error::Config(format!("unknown boundary `{other}`"))),
        }
    }
}

/// Uniform cell-centred grid on `center + [-M, M]^dim`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec<T> {
    pub dim: usize,
    pub half_width: T,
    pub mesh: usize,
    pub spacing: T,
    pub boundary: Boundary,
    pub center: Vec<T>,
}

/// Grid on `[-half_width, half_width]^dim`.
pub fn build_grid<T: Real>(dim: usize, half_width: T, mesh: usize, boundary: Boundary) -> Result<GridSpec<T>> {
    build_grid_with_cap(dim, half_width, mesh, boundary, DEFAULT_POINT_CAP)
}

pub fn build_grid_with_cap<T: Real>(
    dim: usize,
    half_width: T,
    mesh: usize,
    boundary: Boundary,
    cap: usize,
) -> Result<GridSpec<T>> {
    if !(1..=3).contains(&dim) {
        return Err(Error::InvalidArgument(format!("grid dimension must be 1..=3, got {dim}")));
    }
    if mesh < 4 {
        return Err(Error::InvalidArgument(format!("mesh must be >= 4, got {mesh}")));
    }
    if !(half_width > T::zero()) || !half_width.is_finite() {
        return Err(Error::InvalidArgument(format!("half width must be > 0, got {half_width}")));
    }
    let points = (mesh as u128).pow(dim as u32);
    if points > cap as u128 {
        return Err(Error::GridTooLarge { points, cap });
    }
    Ok(GridSpec {
        dim,
        half_width,
        mesh,
        spacing: T::lit(2.0) * half_width / T::from_usize_lossy(mesh),
        boundary,
        center: vec![T::zero(); dim],
    })
}

impl<T: Real> GridSpec<T> {
    /// Moves the box so that it is centred on `center`.
    pub fn centered_at(mut self, center: &[T]) -> Result<Self> {
        if center.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: center.len(),
            });
        }
        self.center = center.to_vec();
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.mesh.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> T {
        self.spacing.powi(self.dim as i32)
    }

    /// Coordinate of grid index `i` along `axis`.
    #[inline]
    pub fn coord(&self, axis: usize, i: usize) -> T {
        self.center[axis] - self.half_width + (T::from_usize_lossy(i) + T::lit(0.5)) * self.spacing
    }

    /// Per-axis indices of a flat index; the last axis varies fastest.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.mesh;
            flat /= self.mesh;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.mesh + i)
    }

    pub fn point(&self, flat: usize) -> Vec<T> {
        self.unflatten(flat)
            .into_iter()
            .enumerate()
            .map(|(axis, i)| self.coord(axis, i))
            .collect()
    }

    /// Calls `f(flat_index, coordinates)` for every grid point in order.
    pub fn for_each_point(&self, mut f: impl FnMut(usize, &[T])) {
        let mut x: Vec<T> = (0..self.dim).map(|a| self.coord(a, 0)).collect();
        let mut idx = vec![0usize; self.dim];
        for flat in 0..self.len() {
            f(flat, &x);
            for axis in (0..self.dim).rev() {
                idx[axis] += 1;
                if idx[axis] < self.mesh {
                    x[axis] = self.coord(axis, idx[axis]);
                    break;
                }
                idx[axis] = 0;
                x[axis] = self.coord(axis, 0);
            }
        }
    }

    pub fn contains(&self, x: &[T]) -> bool {
        x.len() == self.dim
            && x
                .iter()
                .zip(&self.center)
                .all(|(&xi, &c)| (xi - c).abs() <= self.half_width)
    }

    /// Flat index of the cell containing `x` (clamped to the box).
    pub fn nearest(&self, x: &[T]) -> usize {
        let idx: Vec<usize> = x
            .iter()
            .enumerate()
            .map(|(axis, &xi)| {
                let u = (xi - self.center[axis] + self.half_width) / self.spacing;
                let i = u.floor().to_isize().unwrap_or(0);
                i.clamp(0, self.mesh as isize - 1) as usize
            })
            .collect();
        self.flatten(&idx)
    }
}

/// `H = -(r0^2 / 2) L / a^2 + diag(V / r0^2)`, applied matrix-free.
#[derive(Clone, Debug)]
pub struct DiscreteHamiltonian<T> {
    pub grid: GridSpec<T>,
    pub r0: T,
    /// Shifted potential `V(x_j) - V(center)`.
    pub potential_values: Vec<T>,
    diag: Vec<T>,
    offdiag: T,
}

/// Samples `potential` on the grid, shifted so that it vanishes at the box
/// centre, and builds the Hamiltonian.
pub fn discretize<T: Real>(
    grid: &GridSpec<T>,
    potential: impl Fn(&[T]) -> T,
    r0: T,
) -> Result<DiscreteHamiltonian<T>> {
    if !(r0 > T::zero()) || !r0.is_finite() {
        return Err(Error::InvalidArgument(format!("r0 must be > 0, got {r0}")));
    }
    let v0 = potential(&grid.center);
    if !v0.is_finite() {
        return Err(Error::NonFinite("potential value"));
    }
    let mut values = vec![T::zero(); grid.len()];
    let mut finite = true;
    grid.for_each_point(|j, x| {
        let v = potential(x) - v0;
        finite &= v.is_finite();
        values[j] = v;
    });
    if !finite {
        return Err(Error::NonFinite("potential value"));
    }
    Ok(DiscreteHamiltonian::from_values(grid.clone(), values, r0))
}

impl<T: Real> DiscreteHamiltonian<T> {
    /// Builds from potential values already sampled on the grid (no shift).
    pub fn from_values(grid: GridSpec<T>, potential_values: Vec<T>, r0: T) -> Self {
        let a2 = grid.spacing * grid.spacing;
        let r02 = r0 * r0;
        let kin_diag = T::from_usize_lossy(grid.dim) * r02 / a2;
        let diag = potential_values.iter().map(|&v| kin_diag + v / r02).collect();
        Self {
            offdiag: -r02 / (T::lit(2.0) * a2),
            grid,
            r0,
            potential_values,
            diag,
        }
    }

    /// `-H`, used to run the dynamics backwards.
    pub fn negated(&self) -> Self {
        Self {
            grid: self.grid.clone(),
            r0: self.r0,
            potential_values: self.potential_values.clone(),
            diag: self.diag.iter().map(|&d| -d).collect(),
            offdiag: -self.offdiag,
        }
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diag
    }

    pub fn off_diagonal(&self) -> T {
        self.offdiag
    }

    /// Gershgorin bound on the spectral norm.
    pub fn norm_estimate(&self) -> T {
        let g = &self.grid;
        let r02 = self.r0 * self.r0;
        let vmax = self
            .potential_values
            .iter()
            .fold(T::zero(), |m, v| m.max(v.abs()));
        T::from_usize_lossy(2 * g.dim) * r02 / (g.spacing * g.spacing) + vmax / r02
    }

    /// `out = H input`.
    pub fn apply(&self, input: &[T], out: &mut [T]) {
        for ((o, &d), &x) in out.iter_mut().zip(&self.diag).zip(input) {
            *o = d * x;
        }
        let n = self.grid.mesh;
        let periodic = self.grid.boundary == Boundary::Periodic;
        let c = self.offdiag;
        for axis in 0..self.grid.dim {
            let inner = n.pow((self.grid.dim - 1 - axis) as u32);
            let block = n * inner;
            if inner == 1 {
                for (row_out, row_in) in out.chunks_exact_mut(n).zip(input.chunks_exact(n)) {
                    for i in 1..n - 1 {
                        row_out[i] += c * (row_in[i - 1] + row_in[i + 1]);
                    }
                    row_out[0] += c * row_in[1];
                    row_out[n - 1] += c * row_in[n - 2];
                    if periodic {
                        row_out[0] += c * row_in[n - 1];
                        row_out[n - 1] += c * row_in[0];
                    }
                }
                continue;
            }
            for (blk_out, blk_in) in out.chunks_exact_mut(block).zip(input.chunks_exact(block)) {
                for i in 0..n {
                    let prev = match i {
                        0 if periodic => Some(n - 1),
                        0 => None,
                        _ => Some(i - 1),
                    };
                    let next = match i + 1 {
                        j if j < n => Some(j),
                        _ if periodic => Some(0),
                        _ => None,
                    };
                    let dst = &mut blk_out[i * inner..(i + 1) * inner];
                    for nb in [prev, next].into_iter().flatten() {
                        let src = &blk_in[nb * inner..(nb + 1) * inner];
                        for (d, &s) in dst.iter_mut().zip(src) {
                            *d += c * s;
                        }
                    }
                }
            }
        }
    }
}

/// `Psi = q + i p` sampled at the grid points.
#[derive(Clone, Debug)]
pub struct WaveState<T> {
    pub grid: GridSpec<T>,
    pub q: Vec<T>,
    pub p: Vec<T>,
    pub t: T,
}

impl<T: Real> WaveState<T> {
    /// Probability of each cell, `(q^2 + p^2) a^dim`.
    pub fn probabilities(&self) -> Vec<T> {
        let vol = self.grid.cell_volume();
        self.q
            .iter()
            .zip(&self.p)
            .map(|(&q, &p)| (q * q + p * p) * vol)
            .collect()
    }

    /// Discrete L2 norm squared.
    pub fn norm_sq(&self) -> T {
        let s: T = self.q.iter().zip(&self.p).map(|(&q, &p)| q * q + p * p).sum();
        s * self.grid.cell_volume()
    }

    /// Discrete L2 distance to another state on the same grid.
    pub fn l2_distance(&self, other: &Self) -> T {
        let s: T = self
            .q
            .iter()
            .zip(&self.p)
            .zip(other.q.iter().zip(&other.p))
            .map(|((&q1, &p1), (&q2, &p2))| (q1 - q2) * (q1 - q2) + (p1 - p2) * (p1 - p2))
            .sum();
        (s * self.grid.cell_volume()).sqrt()
    }

    /// State with unit amplitude at one site.
    pub fn point_mass(grid: &GridSpec<T>, flat: usize) -> Self {
        let mut q = vec![T::zero(); grid.len()];
        q[flat] = T::one() / grid.cell_volume().sqrt();
        Self {
            grid: grid.clone(),
            q,
            p: vec![T::zero(); grid.len()],
            t: T::zero(),
        }
    }

    /// Writes one row per grid point: per-axis index, coordinates, Re, Im,
    /// probability.
    pub fn write_snapshot_csv(&self, path: &Path) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let dim = self.grid.dim;
        let names = ["x", "y", "z"];
        let header: Vec<String> = (0..dim)
            .map(|a| format!("i{a}"))
            .chain(names[..dim].iter().map(|s| s.to_string()))
            .chain(["re", "im", "prob"].iter().map(|s| s.to_string()))
            .collect();
        writeln!(w, "{}", header.join(","))?;
        let vol = self.grid.cell_volume();
        for j in 0..self.grid.len() {
            for i in self.grid.unflatten(j) {
                write!(w, "{i},")?;
            }
            for x in self.grid.point(j) {
                write!(w, "{:.8e},", x.as_f64())?;
            }
            let (q, p) = (self.q[j], self.p[j]);
            writeln!(
                w,
                "{:.8e},{:.8e},{:.8e}",
                q.as_f64(),
                p.as_f64(),
                ((q * q + p * p) * vol).as_f64()
            )?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Normalized real Gaussian `exp(-|x - center|^2 / (4 r0^2))` on the grid.
pub fn initial_gaussian<T: Real>(grid: &GridSpec<T>, center: &[T], r0: T) -> Result<WaveState<T>> {
    if center.len() != grid.dim {
        return Err(Error::DimensionMismatch {
            expected: grid.dim,
            got: center.len(),
        });
    }
    if !grid.contains(center) {
        return Err(Error::OutsideBox);
    }
    if !(r0 >= T::lit(2.0) * grid.spacing) {
        return Err(Error::UnderResolved {
            r0: r0.as_f64(),
            spacing: grid.spacing.as_f64(),
        });
    }
    let four_r2 = T::lit(4.0) * r0 * r0;
    let mut q = vec![T::zero(); grid.len()];
    grid.for_each_point(|j, x| {
        let d2: T = x.iter().zip(center).map(|(&a, &b)| (a - b) * (a - b)).sum();
        q[j] = (-d2 / four_r2).exp();
    });
    let norm = (q.iter().map(|&v| v * v).sum::<T>() * grid.cell_volume()).sqrt();
    for v in &mut q {
        *v /= norm;
    }
    Ok(WaveState {
        grid: grid.clone(),
        q,
        p: vec![T::zero(); grid.len()],
        t: T::zero(),
    })
}

/// Leapfrog time step selection.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum TimeStep<T> {
    /// `0.5 / |H|_est`.
    #[default]
    Auto,
    Fixed(T),
}

/// Number of uniform substeps and their length for a run of length `t_e`.
pub fn step_plan<T: Real>(h: &DiscreteHamiltonian<T>, t_e: T, dt: TimeStep<T>) -> Result<(usize, T)> {
    if !(t_e >= T::zero()) || !t_e.is_finite() {
        return Err(Error::InvalidArgument(format!("evolution time must be >= 0, got {t_e}")));
    }
    let norm = h.norm_estimate();
    let dt = match dt {
        TimeStep::Auto => T::lit(0.5) / norm,
        TimeStep::Fixed(dt) => {
            if !(dt > T::zero()) {
                return Err(Error::InvalidArgument(format!("time step must be > 0, got {dt}")));
            }
            if dt * norm >= T::lit(2.0) {
                return Err(Error::UnstableTimeStep {
                    dt: dt.as_f64(),
                    product: (dt * norm).as_f64(),
                });
            }
            dt
        }
    };
    if t_e == T::zero() {
        return Ok((0, T::zero()));
    }
    let steps = (t_e / dt).ceil().to_usize().unwrap_or(usize::MAX).max(1);
    Ok((steps, t_e / T::from_usize_lossy(steps)))
}

/// Advances `state` by `t_e`.
///
/// Uses `ceil(t_e / dt)` equal substeps, so a run with `H` followed by the
/// same run with `-H` retraces the trajectory up to rounding.
pub fn evolve<T: Real>(
    h: &DiscreteHamiltonian<T>,
    state: &WaveState<T>,
    t_e: T,
    dt: TimeStep<T>,
) -> Result<WaveState<T>> {
    if state.grid != h.grid {
        return Err(Error::InvalidArgument("state and Hamiltonian grids differ".into()));
    }
    let (steps, step) = step_plan(h, t_e, dt)?;
    let mut out = state.clone();
    if steps == 0 {
        return Ok(out);
    }
    let half = step / T::lit(2.0);
    let n = state.q.len();
    let mut hq = vec![T::zero(); n];
    let mut hp = vec![T::zero(); n];
    h.apply(&out.q, &mut hq);
    const CHECK_EVERY: usize = 256;
    for k in 0..steps {
        for (p, &v) in out.p.iter_mut().zip(&hq) {
            *p -= half * v;
        }
        h.apply(&out.p, &mut hp);
        for (q, &v) in out.q.iter_mut().zip(&hp) {
            *q += step * v;
        }
        h.apply(&out.q, &mut hq);
        for (p, &v) in out.p.iter_mut().zip(&hq) {
            *p -= half * v;
        }
        if (k + 1) % CHECK_EVERY == 0 || k + 1 == steps {
            let probe = out.q.iter().zip(&out.p).fold(T::zero(), |s, (&a, &b)| s + a * a + b * b);
            if !probe.is_finite() {
                let t = state.t + step * T::from_usize_lossy(k + 1);
                return Err(Error::BlowUp(t.as_f64()));
            }
        }
    }
    out.t = state.t + t_e;
    Ok(out)
}

/// States at each of the increasing `times` (absolute, measured from
/// `state.t`).
pub fn evolve_through<T: Real>(
    h: &DiscreteHamiltonian<T>,
    state: &WaveState<T>,
    times: &[T],
    dt: TimeStep<T>,
) -> Result<Vec<WaveState<T>>> {
    let mut out = Vec::with_capacity(times.len());
    let mut cur = state.clone();
    let mut elapsed = T::zero();
    for &t in times {
        if t < elapsed {
            return Err(Error::InvalidArgument("snapshot times must be increasing".into()));
        }
        cur = evolve(h, &cur, t - elapsed, dt)?;
        cur.t = state.t + t;
        elapsed = t;
        out.push(cur.clone());
    }
    Ok(out)
}

/// Inverse-CDF position sampler over the grid cells of a state.
#[derive(Clone, Debug)]
pub struct Measurement<T> {
    grid: GridSpec<T>,
    cdf: Vec<f64>,
}

impl<T: Real> Measurement<T> {
    pub fn new(state: &WaveState<T>) -> Self {
        let mut acc = 0.0f64;
        let cdf = state
            .probabilities()
            .into_iter()
            .map(|p| {
                acc += p.as_f64();
                acc
            })
            .collect();
        Self {
            grid: state.grid.clone(),
            cdf,
        }
    }

    /// Flat index of a sampled cell.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().unwrap_or(&0.0);
        let u = rng.random::<f64>() * total;
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }

    /// Cell-centre coordinates of a sampled cell.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        self.grid.point(self.sample_index(rng))
    }
}

/// Samples a position from `|Psi|^2`.
pub fn measure<T: Real, R: Rng + ?Sized>(state: &WaveState<T>, rng: &mut R) -> Vec<T> {
    Measurement::new(state).sample(rng)
}

/// Mean of coordinate `axis` under `|Psi|^2`.
pub fn marginal_mean<T: Real>(state: &WaveState<T>, axis: usize) -> T {
    let prob = state.probabilities();
    let mut m = T::zero();
    state.grid.for_each_point(|j, x| m += prob[j] * x[axis]);
    m
}

/// Variance of coordinate `axis` under `|Psi|^2`.
pub fn marginal_variance<T: Real>(state: &WaveState<T>, axis: usize) -> T {
    assert!(axis < state.grid.dim, "axis out of range");
    let prob = state.probabilities();
    let mean = marginal_mean(state, axis);
    let mut v = T::zero();
    state.grid.for_each_point(|j, x| {
        let d = x[axis] - mean;
        v += prob[j] * d * d;
    });
    v
}

/// `1/2 sum_j |P_j - density(x_j) a^dim|`.
pub fn tv_distance_to<T: Real>(state: &WaveState<T>, density: impl Fn(&[T]) -> T) -> T {
    let prob = state.probabilities();
    let vol = state.grid.cell_volume();
    let mut s = T::zero();
    state.grid.for_each_point(|j, x| s += (prob[j] - density(x) * vol).abs());
    (s / T::lit(2.0)).min(T::one())
}

/// Grid total-variation distance between the state and a Gaussian law.
pub fn tv_distance<T: Real>(state: &WaveState<T>, law: &GaussianLaw<T>) -> Result<T> {
    if law.dim() != state.grid.dim {
        return Err(Error::DimensionMismatch {
            expected: state.grid.dim,
            got: law.dim(),
        });
    }
    Ok(tv_distance_to(state, |x| law.density(x)))
}

/// Mass of the cells whose offset from the box centre lies within 45° of
/// `±direction`. In 2-D this is the pair of opposite quadrants bisected by
/// `direction`.
pub fn cone_mass<T: Real>(state: &WaveState<T>, direction: &[T]) -> T {
    let dn = direction.iter().map(|&v| v * v).sum::<T>().sqrt();
    let prob = state.probabilities();
    let c = &state.grid.center;
    let mut m = T::zero();
    state.grid.for_each_point(|j, x| {
        let mut along = T::zero();
        let mut r2 = T::zero();
        for k in 0..x.len() {
            let d = x[k] - c[k];
            along += d * direction[k];
            r2 += d * d;
        }
        let along = along / dn;
        // |cos| >= 1/sqrt 2  <=>  2 along^2 >= r^2
        if T::lit(2.0) * along * along > r2 {
            m += prob[j];
        }
    });
    m
}
