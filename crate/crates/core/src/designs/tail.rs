//! Exact hypergeometric tails for the overlap of two random k-subsets.
//!
//! For `I, J` uniform among the `k`-subsets of `[n]`,
//! `P(|I ∩ J| = l) = C(k,l) C(n-k,k-l) / C(n,k)`. Everything is carried in
//! log space: at the sizes of interest the upper tail is far below the
//! smallest positive `f64`.

use serde::Serialize;

use crate::error::{Error, Result};

/// Binomials with `min(b, a-b)` up to this size are summed term by term.
const PRODUCT_LIMIT: u64 = 512;

/// `ln C(a, b)`; `-inf` when `b > a`.
pub fn ln_choose(a: u64, b: u64) -> f64 {
    if b > a {
        return f64::NEG_INFINITY;
    }
    let b = b.min(a - b);
    if b == 0 {
        return 0.0;
    }
    if b <= PRODUCT_LIMIT {
        let base = (a - b) as f64;
        let mut s = 0.0;
        let mut c = 0.0;
        for i in 1..=b {
            let i = i as f64;
            let t = ((base + i) / i).ln();
            // Neumaier
            let y = s + t;
            c += if s.abs() >= t.abs() { (s - y) + t } else { (t - y) + s };
            s = y;
        }
        s + c
    } else {
        libm::lgamma(a as f64 + 1.0) - libm::lgamma(b as f64 + 1.0) - libm::lgamma((a - b) as f64 + 1.0)
    }
}

fn check(n: u64, k: u64) -> Result<()> {
    if k > n {
        return Err(Error::BadRange(format!("k = {k} exceeds n = {n}")));
    }
    Ok(())
}

/// Smallest attainable overlap, `max(0, 2k - n)`.
pub fn min_overlap(n: u64, k: u64) -> u64 {
    (2 * k).saturating_sub(n)
}

/// `ln P(|I ∩ J| = l)`.
pub fn ln_point_mass(n: u64, k: u64, l: u64) -> Result<f64> {
    check(n, k)?;
    if l > k {
        return Err(Error::BadRange(format!("overlap {l} exceeds k = {k}")));
    }
    if l < min_overlap(n, k) {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ln_choose(k, l) + ln_choose(n - k, k - l) - ln_choose(n, k))
}

/// `P(|I ∩ J| = l)`.
pub fn exact_point_mass(n: u64, k: u64, l: u64) -> Result<f64> {
    ln_point_mass(n, k, l).map(f64::exp)
}

/// `ln sum exp(terms)` with the terms added from smallest to largest under
/// compensated summation.
pub fn log_sum_exp(terms: &mut [f64]) -> f64 {
    terms.sort_by(|a, b| a.total_cmp(b));
    let Some(&max) = terms.last() else {
        return f64::NEG_INFINITY;
    };
    if max == f64::NEG_INFINITY {
        return max;
    }
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for &t in terms.iter() {
        let v = (t - max).exp();
        let y = s + v;
        c += if s.abs() >= v.abs() { (s - y) + v } else { (v - y) + s };
        s = y;
    }
    max + (s + c).ln()
}

/// `ln P(|I ∩ J| >= t)`.
pub fn ln_exact_tail(n: u64, k: u64, t: u64) -> Result<f64> {
    check(n, k)?;
    let lo = min_overlap(n, k);
    if t <= lo {
        return Ok(0.0);
    }
    if t > k {
        return Ok(f64::NEG_INFINITY);
    }
    let mut terms = (t..=k).map(|l| ln_point_mass(n, k, l)).collect::<Result<Vec<_>>>()?;
    Ok(log_sum_exp(&mut terms).min(0.0))
}

/// `P(|I ∩ J| >= t)`.
pub fn exact_tail(n: u64, k: u64, t: u64) -> Result<f64> {
    ln_exact_tail(n, k, t).map(f64::exp)
}

/// Comparison of the exact overlap tail with `(2k/n)^{k/5}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailReport {
    pub n: u64,
    pub k: u64,
    /// `ceil(k/2)`
    pub t: u64,
    pub exact_tail_log: f64,
    pub bound_log: f64,
    pub satisfied: bool,
}

impl TailReport {
    pub const CSV_HEADER: &'static str = "n,k,t,exact_tail_log,bound_log,satisfied";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:?},{:?},{}",
            self.n, self.k, self.t, self.exact_tail_log, self.bound_log, self.satisfied
        )
    }
}

/// `n / (2 e^8)`, the upper end of the admissible `k` range.
pub fn tail_regime_upper(n: u64) -> f64 {
    n as f64 / (2.0 * 8.0f64.exp())
}

/// Whether `100 < k < n / (2 e^8)`.
pub fn in_tail_regime(n: u64, k: u64) -> bool {
    k > 100 && (k as f64) < tail_regime_upper(n)
}

/// Checks `P(|I ∩ J| >= k/2) <= (2k/n)^{k/5}` in log space. Inputs outside
/// `100 < k < n/(2e^8)` are reported as [`Error::OutOfRegime`].
pub fn tail_bound_check(n: u64, k: u64) -> Result<TailReport> {
    if !in_tail_regime(n, k) {
        return Err(Error::OutOfRegime(format!(
            "tail bound needs 100 < k < n/(2e^8) = {:.3}, got n = {n}, k = {k}",
            tail_regime_upper(n)
        )));
    }
    let t = k.div_ceil(2);
    let exact_tail_log = ln_exact_tail(n, k, t)?;
    let bound_log = (k as f64 / 5.0) * (2.0 * k as f64 / n as f64).ln();
    Ok(TailReport { n, k, t, exact_tail_log, bound_log, satisfied: exact_tail_log <= bound_log })
}
