//! The hard body `K = Δ_n ∩ {<x, y_i> <= 1}` and its parameter algebra.
//!
//! Facet normals are `y_i = v_{I_i}↑` and the witnesses `x_i = C0 v_{I_i}↓`
//! for a separated family `I_1..I_m` of `k`-subsets of `[n]`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::certificate::Certificate;
use crate::designs::{find_separated_family, subset_direction, KSubset};
use crate::error::{Error, Result};
use crate::frame::{EquatorFrame, SimplexFrame};
use crate::lift::{lift_down, lift_up, C0};
use crate::point::Point;
use crate::polytope::HPolytope;
use crate::rng::stream;

/// Default cap on the family size.
pub const DEFAULT_M_MAX: u64 = 100_000;

/// Consecutive rejections allowed while growing the separated family.
pub const DEFAULT_MAX_ATTEMPTS: usize = 100_000;

/// `C' = 1 / (720 C0^2)`.
pub fn c_prime() -> f64 {
    1.0 / (720.0 * C0 * C0)
}

/// `c1 = min{1, sqrt(C'/8), 1/(60 C0)}`.
pub fn c1() -> f64 {
    1.0f64.min((c_prime() / 8.0).sqrt()).min(1.0 / (60.0 * C0))
}

/// `sqrt(2) e^4 / (6 C0)`, the coefficient of `sqrt n` in the lower limit on `R`.
pub fn c0_lower() -> f64 {
    std::f64::consts::SQRT_2 * 4.0f64.exp() / (6.0 * C0)
}

/// `R = n / (6 C0 sqrt k)`.
pub fn ratio_for(n: usize, k: usize) -> f64 {
    n as f64 / (6.0 * C0 * (k as f64).sqrt())
}

/// Which hypotheses of the asymptotic construction the parameters meet.
/// These are reported only; nothing downstream requires them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    /// `100 <= k <= n / (2 e^8)`
    pub k_range: bool,
    /// `sqrt(2) e^4 / (6 C0) sqrt(n) <= R`
    pub r_lower: bool,
    /// `R <= c1 n`
    pub r_upper: bool,
    /// `R > sqrt(e n)`
    pub r_above_sqrt_en: bool,
}

impl Admissibility {
    pub fn evaluate(n: usize, k: usize, r: f64) -> Self {
        let nf = n as f64;
        let kf = k as f64;
        Admissibility {
            k_range: kf >= 100.0 && kf <= nf / (2.0 * 8.0f64.exp()),
            r_lower: c0_lower() * nf.sqrt() <= r,
            r_upper: r <= c1() * nf,
            r_above_sqrt_en: r > (std::f64::consts::E * nf).sqrt(),
        }
    }

    pub fn all(&self) -> bool {
        self.k_range && self.r_lower && self.r_upper && self.r_above_sqrt_en
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardBodyParams {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    /// Realized ratio `n / (6 C0 sqrt k)`.
    #[serde(rename = "R")]
    pub r: f64,
    /// The ratio asked for, when the parameters were derived from `(n, R)`.
    #[serde(rename = "R_requested")]
    pub r_requested: Option<f64>,
    /// `ln` of the uncapped family size `(n/(2k))^{k/20}`.
    pub log_m: f64,
    pub seed: u64,
    pub admissibility: Admissibility,
}

impl HardBodyParams {
    /// Parameters with `k` and `m` chosen directly.
    pub fn from_nk(n: usize, k: usize, m: usize, seed: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::DimensionTooSmall { min: 3, got: n });
        }
        if k == 0 || k >= n {
            return Err(Error::BadRange(format!("need 1 <= k < n, got k = {k}, n = {n}")));
        }
        if m == 0 {
            return Err(Error::BadRange("family size must be at least 1".into()));
        }
        let r = ratio_for(n, k);
        Ok(HardBodyParams {
            n,
            k,
            m,
            r,
            r_requested: None,
            log_m: log_family_size(n, k),
            seed,
            admissibility: Admissibility::evaluate(n, k, r),
        })
    }

    /// The threshold `1/(2R)`.
    pub fn threshold(&self) -> f64 {
        1.0 / (2.0 * self.r)
    }
}

/// `(k/20) ln(n/(2k))`.
pub fn log_family_size(n: usize, k: usize) -> f64 {
    (k as f64 / 20.0) * (n as f64 / (2.0 * k as f64)).ln()
}

/// `k = round((n/(6 C0 R))^2)` (half up), `m = floor((n/(2k))^{k/20})`
/// capped at `m_max`.
pub fn derive_params(n: usize, r: f64, m_max: u64, seed: u64) -> Result<HardBodyParams> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { min: 3, got: n });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::BadRange(format!("R must be positive and finite, got {r}")));
    }
    let k_raw = (n as f64 / (6.0 * C0 * r)).powi(2);
    let k = (k_raw + 0.5).floor();
    if k < 1.0 {
        return Err(Error::DegenerateK { r, k_raw });
    }
    if k >= n as f64 {
        return Err(Error::BadRange(format!("R = {r} gives k = {k} >= n = {n}")));
    }
    let k = k as usize;
    let log_m = log_family_size(n, k);
    let m = if log_m >= ((m_max as f64) + 1.0).ln() {
        m_max
    } else {
        (log_m.exp().floor() as u64).min(m_max)
    };
    let realized = ratio_for(n, k);
    Ok(HardBodyParams {
        n,
        k,
        m: m as usize,
        r: realized,
        r_requested: Some(r),
        log_m,
        seed,
        admissibility: Admissibility::evaluate(n, k, realized),
    })
}

#[derive(Debug, Clone)]
pub struct HardBodyInstance {
    pub params: HardBodyParams,
    pub frame: SimplexFrame,
    pub equator: EquatorFrame,
    pub subsets: Vec<KSubset>,
    pub facet_dirs: Vec<Point>,
    pub witnesses: Vec<Point>,
    /// The `n+1` simplex rows followed by the `m` facet rows, all offsets 1.
    pub body: HPolytope,
}

pub fn build_instance(params: &HardBodyParams) -> Result<HardBodyInstance> {
    build_instance_with(params, DEFAULT_MAX_ATTEMPTS)
}

pub fn build_instance_with(params: &HardBodyParams, max_attempts: usize) -> Result<HardBodyInstance> {
    let n = params.n;
    let frame = SimplexFrame::build(n)?;
    let equator = EquatorFrame::from_simplex(&frame)?;
    let mut rng = stream(params.seed, 0);
    let subsets = find_separated_family(n, params.k, params.m, &mut rng, max_attempts)?;
    let mut facet_dirs = Vec::with_capacity(subsets.len());
    let mut witnesses = Vec::with_capacity(subsets.len());
    for set in &subsets {
        let v = subset_direction(&equator, set)?;
        facet_dirs.push(lift_up(&v, equator.beta())?);
        witnesses.push(lift_down(&v, equator.beta())?.scaled(C0));
    }
    let mut normals = frame.contacts().to_vec();
    normals.extend(facet_dirs.iter().cloned());
    let rows = normals.len();
    let body = HPolytope::new(n, normals, vec![1.0; rows])?;
    Ok(HardBodyInstance { params: params.clone(), frame, equator, subsets, facet_dirs, witnesses, body })
}

/// Bundles the witnesses, facet normals and the polar generators of the
/// simplex for verification.
pub fn extract_certificate(inst: &HardBodyInstance) -> Certificate {
    Certificate {
        witnesses: inst.witnesses.clone(),
        facet_dirs: inst.facet_dirs.clone(),
        polar_generators: inst.frame.contacts().to_vec(),
        r: inst.params.r,
        threshold: inst.params.threshold(),
    }
}

/// Lower bound on the facet count at theorem scale, in log form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoremBound {
    pub n: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// `ln(m/(2R))` with the uncapped `m`.
    pub log_bound: f64,
    /// `C' ln(R^2/n) n^2/R^2 - ln(2n)`.
    pub simplified: f64,
}

/// Relative slack on `R > sqrt(e n)`, so that `R = sqrt(e n)` evaluated in
/// floating point is accepted.
const SQRT_EN_SLACK: f64 = 1e-12;

/// `ln(m/(2R)) = -ln(2R) + ln(18 C0^2 R^2 / n) (n/(6 C0 R))^2 / 20` together
/// with the simplified bound. Requires `R >= sqrt(e n)`.
pub fn theorem_bound(n: f64, r: f64) -> Result<TheoremBound> {
    if !(n >= 1.0 && r.is_finite() && r > 0.0) {
        return Err(Error::BadRange(format!("need n >= 1 and R > 0, got n = {n}, R = {r}")));
    }
    let floor = (std::f64::consts::E * n).sqrt();
    if r < floor * (1.0 - SQRT_EN_SLACK) {
        return Err(Error::OutOfRegime(format!("R = {r} is below sqrt(e n) = {floor}")));
    }
    let q = n / r;
    let exponent = q * q / (720.0 * C0 * C0);
    let log_bound = -(2.0 * r).ln() + (18.0 * C0 * C0 * r * r / n).ln() * exponent;
    let simplified = c_prime() * (r * r / n).ln() * q * q - (2.0 * n).ln();
    Ok(TheoremBound { n, r, log_bound, simplified })
}

/// `ln(R^2/n) n^2 / R^2`, the exponent profile of the bound.
pub fn exponent_profile(n: f64, r: f64) -> f64 {
    (r * r / n).ln() * (n / r).powi(2)
}

/// `d/dR` of [`exponent_profile`]: `-(2 n^2 / R^3)(ln(R^2/n) - 1)`.
pub fn exponent_profile_derivative(n: f64, r: f64) -> f64 {
    -(2.0 * n * n / (r * r * r)) * ((r * r / n).ln() - 1.0)
}

/// `(1/2) C' ln(R^2/n) n^2/R^2 - ln(2n)` at `R = c1 n`.
pub fn activation_gap(n: f64) -> f64 {
    let r = c1() * n;
    0.5 * c_prime() * exponent_profile(n, r) - (2.0 * n).ln()
}

/// Smallest integer `n` with `activation_gap(n) >= 0`, found by doubling
/// then bisection. The gap is increasing once `c1^2 n > e`.
pub fn activation_threshold() -> u64 {
    let mut lo = (std::f64::consts::E / (c1() * c1())).ceil() as u64;
    let mut hi = lo.max(2);
    while activation_gap(hi as f64) < 0.0 {
        lo = hi;
        hi *= 2;
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if activation_gap(mid as f64) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRef {
    pub kind: String,
    pub dim: usize,
}

/// On-disk form of an instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFile {
    pub params: HardBodyParams,
    pub frame_ref: FrameRef,
    /// 0-based element lists.
    pub subsets: Vec<Vec<u32>>,
    pub polytope: HPolytope,
    pub witnesses: Vec<Point>,
}

impl BodyFile {
    pub fn from_instance(inst: &HardBodyInstance) -> Self {
        BodyFile {
            params: inst.params.clone(),
            frame_ref: FrameRef { kind: "regular_simplex".into(), dim: inst.params.n },
            subsets: inst.subsets.iter().map(|s| s.indices().to_vec()).collect(),
            polytope: inst.body.clone(),
            witnesses: inst.witnesses.clone(),
        }
    }

    pub fn write_to<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(w);
        serde_json::to_writer(&mut w, self)?;
        w.write_all(b"\n")?;
        w.flush()
    }

    pub fn read_from<R: Read>(r: R) -> std::io::Result<Self> {
        Ok(serde_json::from_reader(std::io::BufReader::new(r))?)
    }

    /// Splits the polytope back into the simplex rows and the facet rows.
    pub fn certificate(&self) -> Result<Certificate> {
        let n = self.params.n;
        let rows = self.polytope.num_facets();
        if rows != n + 1 + self.witnesses.len() {
            return Err(Error::DimensionMismatch { expected: n + 1 + self.witnesses.len(), got: rows });
        }
        let normals = self.polytope.normals();
        Ok(Certificate {
            witnesses: self.witnesses.clone(),
            facet_dirs: normals[n + 1..].to_vec(),
            polar_generators: normals[..n + 1].to_vec(),
            r: self.params.r,
            threshold: self.params.threshold(),
        })
    }
}
