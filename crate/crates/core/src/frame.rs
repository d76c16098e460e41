//! The regular simplex in John's position and its contact frame.
//!
//! The simplex `Δ_n = {x : <x, u_i> <= 1}` has inradius one; its contact
//! points `u_1..u_{n+1}` satisfy `<u_i, u_j> = -1/n` and its vertices are
//! `-n u_i`. The equatorial section `Δ_n ∩ {<x, u_1> = 0}` is again a regular
//! simplex, with vertex directions `v_1..v_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::point::{axpy, dot, norm, Point};
use crate::polytope::HPolytope;

/// Contact points and John weights of the regular simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexFrame {
    dim: usize,
    contacts: Vec<Point>,
    weights: Vec<f64>,
}

impl SimplexFrame {
    /// Builds the frame for `n >= 2`.
    ///
    /// The contacts are the normalized vectors `e_i - c` of `R^{n+1}` (with
    /// `c` the centroid of the standard basis) expressed in the orthonormal
    /// basis that Gram–Schmidt produces from `e_1 - c, ..., e_n - c` in that
    /// order. That basis has the closed form
    /// `q_j = (e_j - (1/(n+2-j)) sum_{i>=j} e_i) / |..|`, which is used here
    /// so that construction costs `O(n^2)`.
    pub fn build(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::DimensionTooSmall { min: 2, got: n });
        }
        let nf = n as f64;
        // |e_i - c| = sqrt(n / (n+1))
        let inv_len = ((nf + 1.0) / nf).sqrt();
        let mut contacts = vec![Point::zeros(n); n + 1];
        for j in 0..n {
            // 0-based j corresponds to q_{j+1}; t = n + 1 - (j+1) = n - j
            let t = (n - j) as f64;
            let diag = (t / (t + 1.0)).sqrt();
            let below = -1.0 / (t * (t + 1.0)).sqrt();
            contacts[j][j] = diag * inv_len;
            for u in contacts.iter_mut().skip(j + 1) {
                u[j] = below * inv_len;
            }
        }
        let weights = vec![nf / (nf + 1.0); n + 1];
        Ok(SimplexFrame { dim: n, contacts, weights })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn contacts(&self) -> &[Point] {
        &self.contacts
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Δ_n` as an H-polytope: normals are the contacts, offsets are one.
    pub fn hrep(&self) -> HPolytope {
        HPolytope::new(self.dim, self.contacts.clone(), vec![1.0; self.dim + 1])
            .expect("contact points are unit vectors")
    }

    /// Vertex `-n u_i` of the simplex.
    pub fn vertex(&self, i: usize) -> Point {
        self.contacts[i].scaled(-(self.dim as f64))
    }

    /// Coordinates `mu` with `sum mu_j u_j = x` and `sum mu_j = total`.
    ///
    /// Uses `sum u_j = 0` and `sum u_j u_j^T = ((n+1)/n) I`, so
    /// `mu_j = (total + n <x, u_j>) / (n + 1)`.
    pub fn affine_coordinates(&self, x: &[f64], total: f64) -> Vec<f64> {
        let nf = self.dim as f64;
        self.contacts.iter().map(|u| (total + nf * dot(x, u)) / (nf + 1.0)).collect()
    }

    /// Largest deviations `(| |u_i| - 1 |, |<u_i,u_j> + 1/n|)` over the frame.
    pub fn gram_errors(&self) -> (f64, f64) {
        let target = -1.0 / self.dim as f64;
        let mut norm_err = 0.0f64;
        let mut off_err = 0.0f64;
        for (i, ui) in self.contacts.iter().enumerate() {
            norm_err = norm_err.max((ui.norm() - 1.0).abs());
            for uj in &self.contacts[i + 1..] {
                off_err = off_err.max((dot(ui, uj) - target).abs());
            }
        }
        (norm_err, off_err)
    }

    /// `|sum u_i|_inf`.
    pub fn centroid_error(&self) -> f64 {
        let mut s = Point::zeros(self.dim);
        for u in &self.contacts {
            axpy(1.0, u, &mut s);
        }
        crate::point::max_abs(&s)
    }
}

/// Residuals of John's decomposition of the identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JohnReport {
    /// `|sum a_i x_i x_i^T - I|_F`
    pub identity_error: f64,
    /// `|sum a_i x_i|`
    pub barycenter_error: f64,
}

/// Evaluates how far `(points, weights)` is from a decomposition of the
/// identity with zero barycenter.
pub fn john_check(points: &[Point], weights: &[f64]) -> Result<JohnReport> {
    if points.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: points.len(), got: weights.len() });
    }
    let n = points.first().map_or(0, |p| p.dim());
    if let Some(p) = points.iter().find(|p| p.dim() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
    }
    // upper triangle of sum a_i x_i x_i^T
    let mut m = vec![0.0; n * n];
    let mut bary = Point::zeros(n);
    for (x, &a) in points.iter().zip(weights) {
        axpy(a, x, &mut bary);
        for r in 0..n {
            let s = a * x[r];
            if s != 0.0 {
                axpy(s, &x[r..], &mut m[r * n + r..(r + 1) * n]);
            }
        }
    }
    let mut fro = 0.0;
    for r in 0..n {
        let d = m[r * n + r] - 1.0;
        fro += d * d;
        fro += 2.0 * m[r * n + r + 1..(r + 1) * n].iter().map(|v| v * v).sum::<f64>();
    }
    Ok(JohnReport { identity_error: fro.sqrt(), barycenter_error: norm(&bary) })
}

/// Vertex directions of the equatorial section `Δ_n ∩ u_1^⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquatorFrame {
    dim: usize,
    beta: Point,
    dirs: Vec<Point>,
    c_n: f64,
}

impl EquatorFrame {
    /// The edge `[-n u_1, -n u_i]` crosses `u_1^⊥` at
    /// `p_i = -(n/(n+1)) u_1 - (n^2/(n+1)) u_i`; then `v_i = p_i / |p_i|`
    /// and `c_n = |p_i| / n`, so that `c_n n v_i` are the section's vertices.
    pub fn from_simplex(frame: &SimplexFrame) -> Result<Self> {
        let n = frame.dim;
        if n < 3 {
            return Err(Error::DimensionTooSmall { min: 3, got: n });
        }
        let nf = n as f64;
        let u1 = &frame.contacts[0];
        let a = -nf / (nf + 1.0);
        let b = -nf * nf / (nf + 1.0);
        let mut dirs = Vec::with_capacity(n);
        let mut len = 0.0;
        for ui in &frame.contacts[1..] {
            let mut p = u1.scaled(a);
            axpy(b, ui, &mut p);
            let r = p.norm();
            if dirs.is_empty() {
                len = r;
            }
            dirs.push(p.scaled(1.0 / r));
        }
        Ok(EquatorFrame { dim: n, beta: u1.clone(), dirs, c_n: len / nf })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The pole `β = u_1`.
    pub fn beta(&self) -> &Point {
        &self.beta
    }

    pub fn dirs(&self) -> &[Point] {
        &self.dirs
    }

    pub fn c_n(&self) -> f64 {
        self.c_n
    }

    /// `c_n n v_i`.
    pub fn section_vertex(&self, i: usize) -> Point {
        self.dirs[i].scaled(self.c_n * self.dim as f64)
    }
}

/// `c_n = sqrt((n-1)/(n+1))`, the scale of the equatorial section.
pub fn section_scale(n: usize) -> f64 {
    let nf = n as f64;
    ((nf - 1.0) / (nf + 1.0)).sqrt()
}

/// Serialized form of a simplex frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameRecord {
    pub dim: usize,
    pub contacts: Vec<Point>,
    pub c_n: f64,
}

impl FrameRecord {
    pub fn new(frame: &SimplexFrame) -> Self {
        let c_n = if frame.dim >= 3 { section_scale(frame.dim) } else { f64::NAN };
        FrameRecord { dim: frame.dim, contacts: frame.contacts.clone(), c_n }
    }
}
