//! The direction map `I -> v_I` on the equator of the simplex.

use crate::error::{Error, Result};
use crate::frame::EquatorFrame;
use crate::point::{axpy, dot, Point};

use super::sampling::KSubset;

/// `c_{n,k} = 1 / sqrt(1 - (k-1)/(n-1))`.
pub fn c_nk(n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    1.0 / (1.0 - (kf - 1.0) / (nf - 1.0)).sqrt()
}

/// `<v_I, v_J>` predicted from the overlap alone:
/// `(c^2/k) (-k^2/(n-1) + l (1 + 1/(n-1)))`.
pub fn predicted_inner_product(n: usize, k: usize, overlap: usize) -> f64 {
    let (nf, kf, lf) = (n as f64, k as f64, overlap as f64);
    let c = c_nk(n, k);
    (c * c / kf) * (-kf * kf / (nf - 1.0) + lf * (1.0 + 1.0 / (nf - 1.0)))
}

/// `n >= 100` and `k <= (n+3)/4`, where separated pairs satisfy
/// `<v_I, v_J> <= 3/4`.
pub fn in_separation_regime(n: usize, k: usize) -> bool {
    n >= 100 && 4 * k <= n + 3
}

fn check(n: usize, set: &KSubset) -> Result<()> {
    if set.ground() != n {
        return Err(Error::MismatchedGround(n, set.ground()));
    }
    // the v_i sum to zero, so I = [n] has no direction
    if set.k() == n {
        return Err(Error::BadRange(format!("v_I is undefined for k = n = {n}")));
    }
    Ok(())
}

/// `v_I = (c_{n,k}/sqrt k) sum_{i in I} v_i`, summed over the frame's stored
/// directions.
pub fn subset_direction(ef: &EquatorFrame, set: &KSubset) -> Result<Point> {
    check(ef.dim(), set)?;
    let mut s = Point::zeros(ef.dim());
    for &i in set.indices() {
        axpy(1.0, &ef.dirs()[i as usize], &mut s);
    }
    let k = set.k();
    Ok(s.scaled(c_nk(ef.dim(), k) / (k as f64).sqrt()))
}

/// `<v_I, v_J>`.
pub fn direction_separation(ef: &EquatorFrame, a: &KSubset, b: &KSubset) -> Result<f64> {
    Ok(dot(&subset_direction(ef, a)?, &subset_direction(ef, b)?))
}

/// `v_I` in `O(n + k)` for the frame produced by
/// [`SimplexFrame::build`](crate::frame::SimplexFrame::build).
///
/// Contact `u_c` has `u_c[j] = s d_j` for `c = j`, `s b_j` for `c > j` and 0
/// otherwise, with `s = sqrt((n+1)/n)`, `t = n - j`, `d_j = sqrt(t/(t+1))`,
/// `b_j = -1/sqrt(t(t+1))`. Summing `v_i ∝ a u_0 + b u_{i+1}` over `I` then
/// only needs, per coordinate, whether `j-1 ∈ I` and `#{i ∈ I : i >= j}`.
#[derive(Debug, Clone)]
pub struct DirectionMap {
    n: usize,
    diag: Vec<f64>,
    below: Vec<f64>,
    a: f64,
    b: f64,
}

impl DirectionMap {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall { min: 3, got: n });
        }
        let nf = n as f64;
        let s = ((nf + 1.0) / nf).sqrt();
        let mut diag = Vec::with_capacity(n);
        let mut below = Vec::with_capacity(n);
        for j in 0..n {
            let t = (n - j) as f64;
            diag.push(s * (t / (t + 1.0)).sqrt());
            below.push(-s / (t * (t + 1.0)).sqrt());
        }
        // p_i = a u_0 + b u_{i+1}, |p_i| = n c_n
        let len = nf * crate::frame::section_scale(n);
        let a = -nf / (nf + 1.0) / len;
        let b = -nf * nf / (nf + 1.0) / len;
        Ok(DirectionMap { n, diag, below, a, b })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The unnormalized sum `sum_{i in I} v_i`.
    pub fn raw_sum(&self, set: &KSubset) -> Result<Point> {
        check(self.n, set)?;
        let idx = set.indices();
        let k = idx.len();
        let mut out = Point::zeros(self.n);
        out[0] = k as f64 * self.a * self.diag[0];
        // number of elements of I that are >= j, maintained from the top
        let mut pos = k;
        for j in (0..self.n).rev() {
            while pos > 0 && idx[pos - 1] as usize >= j {
                pos -= 1;
            }
            let ge = (k - pos) as f64;
            let mut v = ge * self.below[j];
            if j >= 1 && set.contains((j - 1) as u32) {
                v += self.diag[j];
            }
            out[j] += self.b * v;
        }
        Ok(out)
    }

    /// `v_I = (c_{n,k}/sqrt k) sum_{i in I} v_i`.
    pub fn direction(&self, set: &KSubset) -> Result<Point> {
        let k = set.k();
        Ok(self.raw_sum(set)?.scaled(c_nk(self.n, k) / (k as f64).sqrt()))
    }
}
