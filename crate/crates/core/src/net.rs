//! Outer approximation of a body from support values on a spherical net.
//!
//! For `B ⊂ K ⊂ R B` the support function `h` takes values in `[1, R]` and is
//! `R`-Lipschitz on the sphere. If `N` is a `δ/(2R)`-net, then
//! `P = {x : <α, x> <= h(α), α ∈ N}` satisfies `(1-δ) P ⊂ K ⊂ P`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::point::{dot, norm, sub, Point};
use crate::polytope::{inclusion_check, inclusion_check_tol, HPolytope, InclusionReport, INCLUSION_TOL};
use crate::rng::{stream, unit_vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NetStrategy {
    /// Deterministic nets with a proven covering radius (`n <= 3`).
    Grid,
    /// Uniform random points with an estimated covering radius.
    Random,
}

/// Number of random test directions used to estimate covering radii.
pub const COVERAGE_TEST_DIRS: usize = 10_000;
/// Leading constant in the size of random nets.
pub const RANDOM_NET_CONSTANT: f64 = 1.0;
const RANDOM_NET_DOUBLINGS: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphericalNet {
    pub dim: usize,
    pub points: Vec<Point>,
    /// Target covering radius (Euclidean).
    pub mesh: f64,
    pub strategy: NetStrategy,
    /// Whether `covering_radius` is a proven bound rather than an estimate.
    pub certified: bool,
    /// Proven bound for grid nets; the largest sampled gap for random nets.
    pub covering_radius: f64,
}

impl SphericalNet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `max_t min_p |t - p|` over the test directions.
pub fn covering_gap(points: &[Point], tests: &[Point]) -> f64 {
    tests
        .par_iter()
        .map(|t| {
            // |t - p|^2 = 2 - 2 <t, p> for unit vectors
            let best = points.iter().map(|p| dot(t, p)).fold(f64::NEG_INFINITY, f64::max);
            (2.0 - 2.0 * best.min(1.0)).max(0.0).sqrt()
        })
        .reduce(|| 0.0, f64::max)
}

fn circle(n_pts: usize) -> Vec<Point> {
    (0..n_pts)
        .map(|i| {
            let a = 2.0 * PI * i as f64 / n_pts as f64;
            Point(vec![a.cos(), a.sin()])
        })
        .collect()
}

/// Latitude bands of angular width `h <= eps` with band centres
/// `φ_b = (b + 1/2) h`; band `b` carries `ceil(2π sin φ_b / eps)` equally
/// spaced points. Any direction is within `h/2` of its band's centre circle
/// and within `eps/2` of a point along it, so the geodesic (hence
/// Euclidean) covering radius is at most `eps`.
fn bands(eps: f64) -> Vec<Point> {
    let nb = (PI / eps).ceil() as usize;
    let h = PI / nb as f64;
    let mut pts = Vec::new();
    for b in 0..nb {
        let phi = (b as f64 + 0.5) * h;
        let (s, c) = phi.sin_cos();
        let count = ((2.0 * PI * s / eps).ceil() as usize).max(1);
        // stagger alternate bands
        let offset = if b % 2 == 0 { 0.0 } else { 0.5 };
        for i in 0..count {
            let psi = 2.0 * PI * (i as f64 + offset) / count as f64;
            pts.push(Point(vec![s * psi.cos(), s * psi.sin(), c]));
        }
    }
    pts
}

/// Builds an `eps`-net of `S^{n-1}`.
///
/// Grid nets exist for `n = 2` (`ceil(2π/eps)` equally spaced angles) and
/// `n = 3` (latitude bands). Random nets draw
/// `ceil(C log(1/eps) (1/eps)^n)` uniform points, doubling the count until
/// the sampled gap drops below `eps` or the doubling budget runs out.
pub fn build_net(n: usize, eps: f64, strategy: NetStrategy, seed: u64) -> Result<SphericalNet> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { min: 2, got: n });
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::BadRange(format!("net mesh must be positive, got {eps}")));
    }
    match strategy {
        NetStrategy::Grid => {
            let (points, radius) = match n {
                2 => {
                    let count = (2.0 * PI / eps).ceil() as usize;
                    // half the angular gap, as a chord
                    let radius = 2.0 * (PI / (2.0 * count as f64)).sin();
                    (circle(count), radius)
                }
                3 => (bands(eps), eps.min(2.0)),
                _ => return Err(Error::StrategyUnavailable { strategy: "grid", dim: n }),
            };
            Ok(SphericalNet { dim: n, points, mesh: eps, strategy, certified: true, covering_radius: radius })
        }
        NetStrategy::Random => {
            if eps >= 1.0 {
                return Err(Error::BadRange(format!("random nets need eps < 1, got {eps}")));
            }
            let mut count =
                (RANDOM_NET_CONSTANT * (1.0 / eps).ln() * (1.0 / eps).powi(n as i32)).ceil().max(1.0) as usize;
            let mut test_rng = stream(seed, 1);
            let tests: Vec<Point> = (0..COVERAGE_TEST_DIRS).map(|_| unit_vector(&mut test_rng, n)).collect();
            let mut rng = stream(seed, 0);
            let mut points: Vec<Point> = Vec::new();
            let mut gap = f64::INFINITY;
            for _ in 0..=RANDOM_NET_DOUBLINGS {
                while points.len() < count {
                    points.push(unit_vector(&mut rng, n));
                }
                gap = covering_gap(&points, &tests);
                if gap <= eps {
                    break;
                }
                count *= 2;
            }
            Ok(SphericalNet { dim: n, points, mesh: eps, strategy, certified: false, covering_radius: gap })
        }
    }
}

/// A support function with values in `[1, R]` on the unit sphere.
pub trait SupportOracle: Sync {
    fn dim(&self) -> usize;
    /// `h(α)`.
    fn support(&self, alpha: &[f64]) -> Result<f64>;
    /// The declared outer radius `R`, which is also the Lipschitz constant.
    fn outer_radius(&self) -> f64;
}

/// Support function of an H-polytope, by linear programming.
pub struct PolytopeOracle<'a> {
    pub body: &'a HPolytope,
    pub r: f64,
}

impl SupportOracle for PolytopeOracle<'_> {
    fn dim(&self) -> usize {
        self.body.dim()
    }

    fn support(&self, alpha: &[f64]) -> Result<f64> {
        self.body.support_value(alpha)
    }

    fn outer_radius(&self) -> f64 {
        self.r
    }
}

/// Support function `radius |α|` of a centred ball.
pub struct BallOracle {
    pub dim: usize,
    pub radius: f64,
}

impl SupportOracle for BallOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self, alpha: &[f64]) -> Result<f64> {
        Ok(self.radius * norm(alpha))
    }

    fn outer_radius(&self) -> f64 {
        self.radius.max(1.0)
    }
}

const ORACLE_RANGE_TOL: f64 = 1e-9;

/// `P = {<α, x> <= h(α), α ∈ net}`; every value of `h` is checked against
/// `[1, R]`.
pub fn approx_polytope<O: SupportOracle + ?Sized>(h: &O, net: &SphericalNet) -> Result<HPolytope> {
    if net.is_empty() {
        return Err(Error::BadRange("empty net".into()));
    }
    if h.dim() != net.dim {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: net.dim });
    }
    let r = h.outer_radius();
    let offsets: Vec<f64> = net
        .points
        .par_iter()
        .enumerate()
        .map(|(index, a)| {
            let value = h.support(a)?;
            if !(value >= 1.0 - ORACLE_RANGE_TOL && value <= r + ORACLE_RANGE_TOL) {
                return Err(Error::OracleRangeViolation { index, value, r });
            }
            Ok(value)
        })
        .collect::<Result<_>>()?;
    HPolytope::new(net.dim, net.points.clone(), offsets)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SandwichReport {
    /// `K ⊂ P`
    pub outer_ok: bool,
    /// `(1-δ) P ⊂ K`
    pub inner_ok: bool,
    pub outer: InclusionReport,
    pub inner: InclusionReport,
}

/// Checks `(1-δ) P ⊂ K ⊂ P` with one support LP per facet.
pub fn sandwich_check(k: &HPolytope, p: &HPolytope, delta: f64) -> Result<SandwichReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadRange(format!("delta must lie in (0, 1), got {delta}")));
    }
    let outer = inclusion_check(k, p, 1.0)?;
    // (1-δ) P ⊂ K  <=>  h_P(y) <= b / (1-δ) for every facet (y, b) of K
    let inner = inclusion_check_tol(p, k, 1.0 / (1.0 - delta), INCLUSION_TOL)?;
    Ok(SandwichReport { outer_ok: outer.holds, inner_ok: inner.holds, outer, inner })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproxReport {
    pub n: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub delta: f64,
    pub net_size: usize,
    pub outer_ok: bool,
    pub inner_ok: bool,
    /// `ln|N| / (n ln(2R/δ))`
    pub bound_exponent_c: f64,
    pub strategy: NetStrategy,
    pub certified: bool,
    pub covering_radius: f64,
    pub outer_margin: f64,
    pub inner_margin: f64,
}

/// `ln|N| / (n ln(2R/δ))`.
pub fn bound_exponent(net_size: usize, n: usize, r: f64, delta: f64) -> f64 {
    (net_size as f64).ln() / (n as f64 * (2.0 * r / delta).ln())
}

/// Builds the net at mesh `δ/(2R)`, the polytope `P_δ`, and checks the
/// sandwich.
pub fn approximate(k: &HPolytope, r: f64, delta: f64, strategy: NetStrategy, seed: u64) -> Result<ApproxReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::BadRange(format!("delta must lie in (0, 1), got {delta}")));
    }
    if r.is_nan() || r < 1.0 {
        return Err(Error::BadRange(format!("R must be at least 1, got {r}")));
    }
    let n = k.dim();
    let net = build_net(n, delta / (2.0 * r), strategy, seed)?;
    let p = approx_polytope(&PolytopeOracle { body: k, r }, &net)?;
    let s = sandwich_check(k, &p, delta)?;
    Ok(ApproxReport {
        n,
        r,
        delta,
        net_size: net.len(),
        outer_ok: s.outer_ok,
        inner_ok: s.inner_ok,
        bound_exponent_c: bound_exponent(net.len(), n, r, delta),
        strategy,
        certified: net.certified,
        covering_radius: net.covering_radius,
        outer_margin: s.outer.worst_margin,
        inner_margin: s.inner.worst_margin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub trials: usize,
    /// `max |h(α) - h(θ)| / |α - θ|`
    pub worst_ratio: f64,
}

/// Samples pairs of unit vectors, half uniformly and half at small
/// separation, and records the largest difference quotient of `h`.
pub fn lipschitz_audit<O: SupportOracle + ?Sized>(h: &O, trials: usize, seed: u64) -> Result<LipschitzReport> {
    if trials == 0 {
        return Err(Error::BadRange("need at least one trial".into()));
    }
    let n = h.dim();
    let ratios: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            let a = unit_vector(&mut rng, n);
            let b = if t % 2 == 0 {
                unit_vector(&mut rng, n)
            } else {
                let scale = 10f64.powf(-rng.random_range(1.0..4.0));
                let mut p = a.clone();
                crate::point::axpy(scale, &unit_vector(&mut rng, n), &mut p);
                p.normalized().unwrap_or_else(|| a.clone())
            };
            let d = norm(&sub(&a, &b));
            if d == 0.0 {
                return Ok(0.0);
            }
            Ok((h.support(&a)? - h.support(&b)?).abs() / d)
        })
        .collect::<Result<_>>()?;
    Ok(LipschitzReport { trials, worst_ratio: ratios.into_iter().fold(0.0, f64::max) })
}

/// A random H-polytope with `B ⊂ K ⊂ R B`.
///
/// `facets` random unit normals get offsets uniform in `[1, R]`. Boundedness
/// inside `R B` comes from extra rows: for `n <= 3`, a grid net of geodesic
/// mesh `φ = 0.8 acos(1/R)` with offsets `R cos φ >= 1`; otherwise the cube
/// of half-width `R/sqrt(n)`, which needs `R >= sqrt(n)`.
pub fn random_sandwiched_body<G: Rng + ?Sized>(n: usize, r: f64, facets: usize, rng: &mut G) -> Result<HPolytope> {
    if !(r > 1.0 && r.is_finite()) {
        return Err(Error::BadRange(format!("need R > 1, got {r}")));
    }
    let mut normals = Vec::with_capacity(facets);
    let mut offsets = Vec::with_capacity(facets);
    for _ in 0..facets {
        normals.push(unit_vector(rng, n));
        offsets.push(rng.random_range(1.0..=r));
    }
    if n <= 3 {
        let phi = 0.8 * (1.0 / r).acos();
        let enclosure = build_net(n, phi, NetStrategy::Grid, 0)?;
        let b = r * phi.cos();
        for p in enclosure.points {
            normals.push(p);
            offsets.push(b);
        }
    } else {
        let w = r / (n as f64).sqrt();
        if w < 1.0 {
            return Err(Error::BadRange(format!("R = {r} is below sqrt(n) = {}", (n as f64).sqrt())));
        }
        for i in 0..n {
            for s in [1.0, -1.0] {
                normals.push(Point::basis(n, i).scaled(s));
                offsets.push(w);
            }
        }
    }
    HPolytope::new(n, normals, offsets)
}
