//! Tilting equatorial directions off the equator `β^⊥`.
//!
//! For a unit `θ ⊥ β`:
//!
//! * `θ↓ = -(1/8) β + sqrt(1 - 1/64) θ`
//! * `θ↑ = sqrt(1 - 1/49) β + (1/7) θ`
//!
//! Every pair `(θ↑, θ↓)` has the same inner product `1/C0`, and
//! `<α↓, θ↑> > 0` forces `<α, θ> >= sqrt(48/63) > 3/4`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::{axpy, dot, Point};

/// Coefficient of `β` in `θ↓`.
pub const DOWN_BETA: f64 = -0.125;
/// `sqrt(63/64)`, the coefficient of `θ` in `θ↓`.
pub const DOWN_THETA: f64 = 0.992_156_741_649_221_5;
/// `sqrt(48/49)`, the coefficient of `β` in `θ↑`.
pub const UP_BETA: f64 = 0.989_743_318_610_787;
/// Coefficient of `θ` in `θ↑`.
pub const UP_THETA: f64 = 1.0 / 7.0;
/// `sqrt(48/63)`: the smallest `<α, θ>` compatible with `<α↓, θ↑> > 0`.
pub const SEPARATION_COS: f64 = 0.872_871_560_943_969_5;

/// `C0 = 1 / ((1/7) sqrt(1 - 1/64) (1 - sqrt(48/63)))
///     = (56/15)(3 sqrt 7 + 4 sqrt 3)`, evaluated to 40 digits offline.
pub const C0: f64 = 55.497_706_743_618_648_863_627_961_807_247_41;

/// The lift constant `C0 > 1` with `<θ↑, θ↓> = 1/C0`.
pub fn c0_constant() -> f64 {
    C0
}

pub const ORTHOGONALITY_TOL: f64 = 1e-10;
const UNIT_TOL: f64 = 1e-10;

/// Checks the preconditions and returns `θ` re-projected onto `β^⊥` and
/// renormalized.
pub fn equatorial(theta: &[f64], beta: &[f64]) -> Result<Point> {
    if theta.len() != beta.len() {
        return Err(Error::DimensionMismatch { expected: beta.len(), got: theta.len() });
    }
    let nb = dot(beta, beta).sqrt();
    if (nb - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit(nb));
    }
    let nt = dot(theta, theta).sqrt();
    if (nt - 1.0).abs() > UNIT_TOL {
        return Err(Error::NotUnit(nt));
    }
    let ip = dot(theta, beta);
    if ip.abs() > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthogonal(ip));
    }
    let mut t = Point(theta.iter().map(|x| x / nt).collect());
    let s = dot(&t, beta) / (nb * nb);
    axpy(-s, beta, &mut t);
    let r = t.norm();
    Ok(t.scaled(1.0 / r))
}

fn combine(b_coef: f64, t_coef: f64, theta: &[f64], beta: &[f64]) -> Point {
    theta.iter().zip(beta).map(|(t, b)| b_coef * b + t_coef * t).collect()
}

/// `θ↓ = -(1/8) β + sqrt(63/64) θ`.
pub fn lift_down(theta: &[f64], beta: &[f64]) -> Result<Point> {
    let t = equatorial(theta, beta)?;
    Ok(combine(DOWN_BETA, DOWN_THETA, &t, beta))
}

/// `θ↑ = sqrt(48/49) β + (1/7) θ`.
pub fn lift_up(theta: &[f64], beta: &[f64]) -> Result<Point> {
    let t = equatorial(theta, beta)?;
    Ok(combine(UP_BETA, UP_THETA, &t, beta))
}

/// Both lifts of one direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPair {
    pub theta: Point,
    pub beta: Point,
    pub up: Point,
    pub down: Point,
}

impl LiftedPair {
    pub fn new(theta: &[f64], beta: &[f64]) -> Result<Self> {
        let t = equatorial(theta, beta)?;
        let up = combine(UP_BETA, UP_THETA, &t, beta);
        let down = combine(DOWN_BETA, DOWN_THETA, &t, beta);
        Ok(LiftedPair { theta: t, beta: Point(beta.to_vec()), up, down })
    }

    /// `<θ↑, θ↓>`, equal to `1/C0`.
    pub fn pairing(&self) -> f64 {
        dot(&self.up, &self.down)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationReport {
    /// `<α↓, θ↑>`
    pub lhs: f64,
    /// `<α, θ>`
    pub rhs: f64,
    /// `lhs <= 0` or `rhs > 3/4`.
    pub implication_ok: bool,
}

/// Evaluates both sides of "`<α↓, θ↑> > 0` implies `<α, θ> > 3/4`".
pub fn separation_implication(alpha: &[f64], theta: &[f64], beta: &[f64]) -> Result<SeparationReport> {
    let a = equatorial(alpha, beta)?;
    let t = equatorial(theta, beta)?;
    let lhs = dot(&combine(DOWN_BETA, DOWN_THETA, &a, beta), &combine(UP_BETA, UP_THETA, &t, beta));
    let rhs = dot(&a, &t);
    Ok(SeparationReport { lhs, rhs, implication_ok: lhs <= 0.0 || rhs > 0.75 })
}

/// The value of `<α↓, θ↑>` predicted from `s = <α, θ>` alone:
/// `-(1/8) sqrt(48/49) + s (1/7) sqrt(63/64)`.
pub fn predicted_pairing(s: f64) -> f64 {
    DOWN_BETA * UP_BETA + s * UP_THETA * DOWN_THETA
}
