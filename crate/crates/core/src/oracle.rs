//! Independent verification machinery: finite-difference gradients,
//! double-double determinants and exhaustive grid search.
//!
//! Nothing here calls into the solvers or the analytic gradients; objectives
//! enter only as closures.

use rayon::prelude::*;
use twofloat::TwoFloat;

use crate::{CMat, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdSpec {
    /// Perturbation size.
    pub h: f64,
    /// Relative tolerance callers should compare against.
    pub rel_tol: f64,
}

impl Default for FdSpec {
    fn default() -> Self {
        Self { h: 1e-6, rel_tol: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdGradient {
    pub grad: Vec<f64>,
    /// Coordinates where a bound forced an asymmetric (first-order) difference.
    pub one_sided: Vec<bool>,
}

fn finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("objective is not finite at {what}")))
    }
}

/// Central differences of `objective` over a box-constrained real vector.
/// Near a bound the step on that side shrinks to stay feasible.
pub fn fd_grad_theta<F>(objective: F, theta: &[f64], bounds: (f64, f64), spec: &FdSpec) -> Result<FdGradient>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let (lo, hi) = bounds;
    let mut grad = Vec::with_capacity(theta.len());
    let mut one_sided = Vec::with_capacity(theta.len());
    let mut x = theta.to_vec();
    for m in 0..theta.len() {
        let up = spec.h.min(hi - theta[m]).max(0.0);
        let down = spec.h.min(theta[m] - lo).max(0.0);
        if up + down == 0.0 {
            return Err(Error::Domain("degenerate box, no room to perturb".into()));
        }
        x[m] = theta[m] + up;
        let fp = finite(objective(&x)?, "theta + h")?;
        x[m] = theta[m] - down;
        let fm = finite(objective(&x)?, "theta - h")?;
        x[m] = theta[m];
        grad.push((fp - fm) / (up + down));
        one_sided.push(up != spec.h || down != spec.h);
    }
    Ok(FdGradient { grad, one_sided })
}

/// Finite-difference conjugate cogradient `(df/dRe + i df/dIm) / 2` of a real
/// function of a complex matrix.
pub fn fd_grad_t<F>(objective: F, t: &CMat, spec: &FdSpec) -> Result<CMat>
where
    F: Fn(&CMat) -> Result<f64>,
{
    let mut out = CMat::zeros(t.nrows(), t.ncols());
    let mut x = t.clone();
    let h = spec.h;
    for i in 0..t.nrows() {
        for j in 0..t.ncols() {
            let mut partial = [0.0; 2];
            for (k, dir) in [C64::new(h, 0.0), C64::new(0.0, h)].into_iter().enumerate() {
                x[(i, j)] = t[(i, j)] + dir;
                let fp = finite(objective(&x)?, "T + h")?;
                x[(i, j)] = t[(i, j)] - dir;
                let fm = finite(objective(&x)?, "T - h")?;
                x[(i, j)] = t[(i, j)];
                partial[k] = (fp - fm) / (2.0 * h);
            }
            out[(i, j)] = C64::new(partial[0], partial[1]) * 0.5;
        }
    }
    Ok(out)
}

/// Largest grid size accepted by [`grid_search_theta`].
pub const MAX_GRID_DIM: usize = 3;

/// Exhaustive maximization over a uniform `resolution^m` grid on
/// `[lo, hi]^m`, endpoints included. Ties resolve to the first grid point in
/// lexicographic order.
pub fn grid_search_theta<F>(objective: F, bounds: (f64, f64), m: usize, resolution: usize) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    if m == 0 || m > MAX_GRID_DIM {
        return Err(Error::CostGuard(m));
    }
    if resolution < 2 {
        return Err(Error::Config("grid needs at least two points per axis".into()));
    }
    let (lo, hi) = bounds;
    let node = |k: usize| {
        if k + 1 == resolution {
            hi
        } else {
            lo + (hi - lo) * k as f64 / (resolution - 1) as f64
        }
    };
    let inner = resolution.pow(m as u32 - 1);
    // one chunk per first-axis index, reduced in index order
    let best_per_chunk: Vec<(usize, f64)> = (0..resolution)
        .into_par_iter()
        .map(|first| {
            let mut x = vec![0.0; m];
            let mut best = (usize::MAX, f64::NEG_INFINITY);
            for rest in 0..inner {
                let idx = first * inner + rest;
                let mut r = idx;
                for slot in x.iter_mut().rev() {
                    *slot = node(r % resolution);
                    r /= resolution;
                }
                let v = objective(&x);
                if v > best.1 {
                    best = (idx, v);
                }
            }
            best
        })
        .collect();
    let (idx, value) = best_per_chunk
        .into_iter()
        .fold((usize::MAX, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    if idx == usize::MAX {
        return Err(Error::Numeric("objective was never finite on the grid".into()));
    }
    let mut x = vec![0.0; m];
    let mut r = idx;
    for slot in x.iter_mut().rev() {
        *slot = node(r % resolution);
        r /= resolution;
    }
    Ok((x, value))
}

/// Complex number over double-double reals.
#[derive(Debug, Clone, Copy)]
struct Cdd {
    re: TwoFloat,
    im: TwoFloat,
}

impl Cdd {
    fn from_c64(z: C64) -> Self {
        Self {
            re: TwoFloat::from(z.re),
            im: TwoFloat::from(z.im),
        }
    }
    fn zero() -> Self {
        Self::from_c64(C64::new(0.0, 0.0))
    }
    fn add(self, o: Self) -> Self {
        Self { re: self.re + o.re, im: self.im + o.im }
    }
    fn sub(self, o: Self) -> Self {
        Self { re: self.re - o.re, im: self.im - o.im }
    }
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
    fn conj(self) -> Self {
        Self { re: self.re, im: -self.im }
    }
    fn norm_sqr(self) -> TwoFloat {
        self.re * self.re + self.im * self.im
    }
    fn div(self, o: Self) -> Self {
        let d = o.norm_sqr();
        let n = self.mul(o.conj());
        Self { re: n.re / d, im: n.im / d }
    }
}

fn matmul_dd(a: &[Vec<Cdd>], b: &[Vec<Cdd>]) -> Vec<Vec<Cdd>> {
    let (n, k, m) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(Cdd::zero(), |acc, l| acc.add(a[i][l].mul(b[l][j]))))
                .collect()
        })
        .collect()
}

fn to_dd(x: &CMat) -> Vec<Vec<Cdd>> {
    (0..x.nrows())
        .map(|i| (0..x.ncols()).map(|j| Cdd::from_c64(x[(i, j)])).collect())
        .collect()
}

/// Modulus of the determinant by Gaussian elimination with partial pivoting
/// in double-double arithmetic.
fn abs_det_dd(mut a: Vec<Vec<Cdd>>) -> f64 {
    let n = a.len();
    let mut det = Cdd::from_c64(C64::new(1.0, 0.0));
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                f64::from(a[i][col].norm_sqr()).total_cmp(&f64::from(a[j][col].norm_sqr()))
            })
            .unwrap();
        if f64::from(a[pivot][col].norm_sqr()) == 0.0 {
            return 0.0;
        }
        a.swap(col, pivot);
        let p = a[col][col];
        det = det.mul(p);
        for r in col + 1..n {
            let f = a[r][col].div(p);
            for c in col..n {
                let v = a[col][c];
                a[r][c] = a[r][c].sub(f.mul(v));
            }
        }
    }
    f64::from(det.norm_sqr().sqrt())
}

/// `log2 |det A|` evaluated in double-double arithmetic.
pub fn log2_abs_det_extended(a: &CMat) -> f64 {
    abs_det_dd(to_dd(a)).log2()
}

/// `log2 det(I + H T T^H H^H / sigma2)` with every product formed in
/// double-double arithmetic.
pub fn rate_extended(h: &CMat, t: &CMat, sigma2: f64) -> f64 {
    let ht = matmul_dd(&to_dd(h), &to_dd(t));
    let n = ht.len();
    let s = TwoFloat::from(sigma2);
    let mut a = vec![vec![Cdd::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut acc = Cdd::zero();
            for k in 0..ht[i].len() {
                acc = acc.add(ht[i][k].mul(ht[j][k].conj()));
            }
            a[i][j] = Cdd { re: acc.re / s, im: acc.im / s };
        }
        a[i][i].re += TwoFloat::from(1.0);
    }
    abs_det_dd(a).log2()
}

/// Norm-wise relative error `||a - b|| / ||b||` (absolute when `b = 0`).
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Norm-wise relative error between complex matrices.
pub fn relative_error_c(a: &CMat, b: &CMat) -> f64 {
    let diff = (a - b).norm();
    let scale = b.norm();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinusoid_gradient() {
        let theta = vec![-1.0, 0.2, 1.3, 2.0];
        let g = fd_grad_theta(
            |x| Ok(x.iter().map(|v| v.sin()).sum()),
            &theta,
            (-3.0, 3.0),
            &FdSpec::default(),
        )
        .unwrap();
        for (gm, t) in g.grad.iter().zip(&theta) {
            assert!((gm - t.cos()).abs() < 1e-9);
        }
        assert!(g.one_sided.iter().all(|f| !f));
    }

    #[test]
    fn quadratic_gradient() {
        let theta = vec![0.5, -0.25];
        let g = fd_grad_theta(
            |x| Ok(3.0 * x[0] * x[0] - x[0] * x[1] + 2.0 * x[1]),
            &theta,
            (-1.0, 1.0),
            &FdSpec::default(),
        )
        .unwrap();
        assert!((g.grad[0] - (3.0 + 0.25)).abs() < 1e-9);
        assert!((g.grad[1] - (-0.5 + 2.0)).abs() < 1e-9);
    }

    #[test]
    fn boundary_is_flagged() {
        let g = fd_grad_theta(|x| Ok(x[0]), &[2.0], (-2.0, 2.0), &FdSpec::default()).unwrap();
        assert!(g.one_sided[0]);
        assert!((g.grad[0] - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_finite_objective() {
        let r = fd_grad_theta(|_| Ok(f64::NAN), &[0.0], (-1.0, 1.0), &FdSpec::default());
        assert!(matches!(r, Err(Error::Numeric(_))));
    }

    #[test]
    fn complex_quadratic_cogradient() {
        // f(T) = ||A T||^2 has df/dT* = A^H A T.
        let a = CMat::from_row_slice(2, 2, &[
            C64::new(1.0, 0.5),
            C64::new(-0.3, 0.2),
            C64::new(0.0, 1.0),
            C64::new(2.0, -1.0),
        ]);
        let t = CMat::from_row_slice(2, 1, &[C64::new(0.4, -0.1), C64::new(-0.7, 0.9)]);
        let fd = fd_grad_t(|x| Ok((&a * x).norm_squared()), &t, &FdSpec::default()).unwrap();
        let exact = a.adjoint() * &a * &t;
        assert!(relative_error_c(&fd, &exact) < 1e-9);
    }

    #[test]
    fn grid_constant_and_peak() {
        let (x, v) = grid_search_theta(|_| 4.0, (-1.0, 1.0), 2, 11).unwrap();
        assert_eq!(v, 4.0);
        assert_eq!(x, vec![-1.0, -1.0]);
        let (x, v) = grid_search_theta(|x| -(x[0] - 0.2).powi(2), (-1.0, 1.0), 1, 11).unwrap();
        assert!((x[0] - 0.2).abs() < 1e-12);
        assert!(v.abs() < 1e-12);
        assert!(matches!(grid_search_theta(|_| 0.0, (0.0, 1.0), 4, 3), Err(Error::CostGuard(4))));
    }

    #[test]
    fn grid_refinement_is_lipschitz_bounded() {
        // |f'| <= 3 on the box, so halving the cell changes the max by at most 3 * cell.
        let f = |x: &[f64]| (3.0 * x[0]).sin() * (x[1] + 0.3).cos();
        let (_, coarse) = grid_search_theta(f, (-2.0, 2.0), 2, 41).unwrap();
        let (_, fine) = grid_search_theta(f, (-2.0, 2.0), 2, 81).unwrap();
        let cell = 4.0 / 40.0;
        assert!(fine >= coarse);
        assert!(fine - coarse <= 3.0 * cell * 2f64.sqrt());
    }

    #[test]
    fn extended_determinant_of_known_matrix() {
        let a = CMat::from_row_slice(2, 2, &[
            C64::new(2.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(1.0, -1.0),
            C64::new(3.0, 0.0),
        ]);
        // det = 6 - 2 = 4
        assert!((log2_abs_det_extended(&a) - 2.0).abs() < 1e-15);
    }
}
