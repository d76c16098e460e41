//! Checking the facet-counting certificate and the counting argument.
//!
//! A certificate is a set of points `x_1..x_m` in `K`, normals `y_1..y_m` of
//! `K` and generators of the polar of the remaining constraints `L`, with
//!
//! * `<x_i, y_i> = 1`
//! * `<x_i, y_j> <= 1/(2R)` for `i != j`
//! * `<x_i, g> <= 1/(2R)` for every polar generator `g`.
//!
//! Any polytope `P` with `K ⊂ P ⊂ R K` then has at least `m/(2R)` facets.

use rand::Rng;
use rand_distr::Exp1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOptions, Relation, VarKind};
use crate::point::{dot, Point};
use crate::polytope::{inclusion_check, ConvexCoefficients, HPolytope, InclusionReport};
use crate::rng::stream;

/// Default tolerance for the three inequality families and the boundary test.
pub const HYPOTHESIS_TOL: f64 = 1e-9;
/// Tolerance for `x_i ∈ K`.
pub const MEMBERSHIP_TOL: f64 = 1e-8;
/// Slack on the `λ_i >= 1/(2R)` floor.
pub const LAMBDA_FLOOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub witnesses: Vec<Point>,
    pub facet_dirs: Vec<Point>,
    pub polar_generators: Vec<Point>,
    #[serde(rename = "R")]
    pub r: f64,
    pub threshold: f64,
}

impl Certificate {
    pub fn m(&self) -> usize {
        self.witnesses.len()
    }

    pub fn dim(&self) -> usize {
        self.witnesses.first().or(self.facet_dirs.first()).map_or(0, |p| p.dim())
    }

    fn check_dims(&self) -> Result<()> {
        if self.facet_dirs.len() != self.witnesses.len() {
            return Err(Error::DimensionMismatch {
                expected: self.witnesses.len(),
                got: self.facet_dirs.len(),
            });
        }
        let n = self.dim();
        let all = self.witnesses.iter().chain(&self.facet_dirs).chain(&self.polar_generators);
        if let Some(p) = all.into_iter().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
        }
        Ok(())
    }

    /// Facet normals followed by the polar generators, the index order used
    /// by [`ConvexCoefficients`] throughout this module.
    pub fn polar_hull(&self) -> Vec<Point> {
        self.facet_dirs.iter().chain(&self.polar_generators).cloned().collect()
    }
}

/// All pairings `<x_i, y_j>` and `<x_i, g_l>`, row-major by witness.
#[derive(Debug, Clone)]
pub struct PairingTable {
    m: usize,
    g: usize,
    xy: Vec<f64>,
    xg: Vec<f64>,
}

impl PairingTable {
    pub fn new(c: &Certificate) -> Result<Self> {
        c.check_dims()?;
        let m = c.m();
        let g = c.polar_generators.len();
        let rows: Vec<(Vec<f64>, Vec<f64>)> = c
            .witnesses
            .par_iter()
            .map(|x| {
                let xy = c.facet_dirs.iter().map(|y| dot(x, y)).collect();
                let xg = c.polar_generators.iter().map(|u| dot(x, u)).collect();
                (xy, xg)
            })
            .collect();
        let mut xy = Vec::with_capacity(m * m);
        let mut xg = Vec::with_capacity(m * g);
        for (a, b) in rows {
            xy.extend(a);
            xg.extend(b);
        }
        Ok(PairingTable { m, g, xy, xg })
    }

    /// `<x_i, y_j>`
    pub fn xy(&self, i: usize, j: usize) -> f64 {
        self.xy[i * self.m + j]
    }

    /// `<x_i, g_l>`
    pub fn xg(&self, i: usize, l: usize) -> f64 {
        self.xg[i * self.g + l]
    }

    /// `<x_i, w>` for `w = sum_t λ_t h_t`, with `h` indexed as in
    /// [`Certificate::polar_hull`] and `λ` given sparsely.
    pub fn pair_with_combination(&self, i: usize, lambda: &[(usize, f64)]) -> f64 {
        lambda
            .iter()
            .map(|&(t, l)| l * if t < self.m { self.xy(i, t) } else { self.xg(i, t - self.m) })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Diagonal,
    Cross,
    Polar,
    Membership,
    Boundary,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Family::Diagonal => "diagonal",
            Family::Cross => "cross",
            Family::Polar => "polar",
            Family::Membership => "membership",
            Family::Boundary => "boundary",
        };
        f.write_str(s)
    }
}

/// The worst offender of a failing family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub family: Family,
    /// Witness index.
    pub i: usize,
    /// Facet or generator index, where the family has one.
    pub j: Option<usize>,
    pub value: f64,
}

/// Worst value per family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyMargins {
    /// `max_i |<x_i, y_i> - 1|`
    pub diagonal: f64,
    /// `max_{i != j} <x_i, y_j>` (`-inf` when `m = 1`)
    pub cross: f64,
    /// `max_{i,l} <x_i, g_l>`
    pub polar: f64,
    /// `max_i max_rows (<a, x_i> - b)` over `K`
    pub membership: f64,
    /// `max_i |max_rows (<a, x_i> - b)|`, zero when every `x_i ∈ ∂K`
    pub boundary: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub pass: bool,
    pub m: usize,
    #[serde(rename = "R")]
    pub r: f64,
    pub threshold: f64,
    pub tol: f64,
    pub families: FamilyMargins,
    pub violations: Vec<Violation>,
}

impl HypothesisReport {
    pub fn failed_families(&self) -> Vec<Family> {
        self.violations.iter().map(|v| v.family).collect()
    }
}

fn argmax(it: impl Iterator<Item = (usize, Option<usize>, f64)>) -> (usize, Option<usize>, f64) {
    it.fold((0, None, f64::NEG_INFINITY), |best, cur| if cur.2 > best.2 { cur } else { best })
}

/// Checks every hypothesis of the certificate against `k`.
pub fn verify_hypotheses(c: &Certificate, k: &HPolytope, tol: f64) -> Result<HypothesisReport> {
    let table = PairingTable::new(c)?;
    verify_with_table(c, &table, k, tol)
}

pub fn verify_with_table(
    c: &Certificate,
    table: &PairingTable,
    k: &HPolytope,
    tol: f64,
) -> Result<HypothesisReport> {
    c.check_dims()?;
    if k.dim() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), got: k.dim() });
    }
    let m = c.m();
    let t = c.threshold;
    let mut violations = Vec::new();

    let diag = argmax((0..m).map(|i| (i, Some(i), (table.xy(i, i) - 1.0).abs())));
    if diag.2 > tol {
        violations.push(Violation { family: Family::Diagonal, i: diag.0, j: diag.1, value: diag.2 });
    }

    let cross = argmax(
        (0..m).flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, Some(j), table.xy(i, j)))),
    );
    if cross.2 > t + tol {
        violations.push(Violation { family: Family::Cross, i: cross.0, j: cross.1, value: cross.2 });
    }

    let g = c.polar_generators.len();
    let polar = argmax((0..m).flat_map(|i| (0..g).map(move |l| (i, Some(l), table.xg(i, l)))));
    if polar.2 > t + tol {
        violations.push(Violation { family: Family::Polar, i: polar.0, j: polar.1, value: polar.2 });
    }

    let slack: Vec<f64> = c.witnesses.par_iter().map(|x| k.max_violation(x)).collect();
    let member = argmax(slack.iter().enumerate().map(|(i, &s)| (i, None, s)));
    if member.2 > MEMBERSHIP_TOL {
        violations.push(Violation { family: Family::Membership, i: member.0, j: None, value: member.2 });
    }
    let boundary = argmax(slack.iter().enumerate().map(|(i, &s)| (i, None, s.abs())));
    if boundary.2 > tol {
        violations.push(Violation { family: Family::Boundary, i: boundary.0, j: None, value: boundary.2 });
    }

    let families = FamilyMargins {
        diagonal: diag.2,
        cross: cross.2,
        polar: polar.2,
        membership: member.2,
        boundary: boundary.2,
    };
    Ok(HypothesisReport { pass: violations.is_empty() && m > 0, m, r: c.r, threshold: t, tol, families, violations })
}

/// `m / (2R)` for a certificate whose verification passed.
pub fn facet_lower_bound(report: &HypothesisReport) -> Result<f64> {
    if !report.pass {
        return Err(Error::UnverifiedCertificate);
    }
    Ok(report.m as f64 / (2.0 * report.r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountingReport {
    /// `|{i : R <x_i, w> >= 1}|`
    pub o_size: usize,
    /// `o_size <= 2R`
    pub ok: bool,
    /// `λ_i >= 1/(2R)` for every `i` counted in `o_size`
    pub lambda_floor_ok: bool,
}

fn count_from(r: f64, pairings: impl Iterator<Item = (usize, f64)>, lambda_y: impl Fn(usize) -> f64) -> CountingReport {
    let floor = 1.0 / (2.0 * r) - LAMBDA_FLOOR_TOL;
    let mut o_size = 0;
    let mut lambda_floor_ok = true;
    for (i, p) in pairings {
        if r * p >= 1.0 {
            o_size += 1;
            lambda_floor_ok &= lambda_y(i) >= floor;
        }
    }
    CountingReport { o_size, ok: o_size as f64 <= 2.0 * r, lambda_floor_ok }
}

/// Residual bounds on a decomposition of `w` over the polar hull.
const DECOMP_SUM_TOL: f64 = 1e-9;
const DECOMP_RESIDUAL_TOL: f64 = 1e-7;

/// Tests the counting step for `w = sum λ_t h_t`, `h` as in
/// [`Certificate::polar_hull`].
pub fn counting_check(c: &Certificate, w: &[f64], lambda: &ConvexCoefficients) -> Result<CountingReport> {
    c.check_dims()?;
    let hull = c.polar_hull();
    if lambda.len() != hull.len() {
        return Err(Error::NotInPolar(format!(
            "expected {} coefficients, got {}",
            hull.len(),
            lambda.len()
        )));
    }
    if w.len() != c.dim() {
        return Err(Error::DimensionMismatch { expected: c.dim(), got: w.len() });
    }
    let (min, sum_err, res) = lambda.residuals(&hull, w);
    if min < -1e-12 || sum_err > DECOMP_SUM_TOL || res > DECOMP_RESIDUAL_TOL {
        return Err(Error::NotInPolar(format!(
            "not a convex decomposition (min {min:e}, |sum-1| {sum_err:e}, residual {res:e})"
        )));
    }
    let pairings = c.witnesses.iter().enumerate().map(|(i, x)| (i, dot(x, w)));
    Ok(count_from(c.r, pairings, |i| lambda.lambda[i]))
}

/// The counting step for `w` given only by a sparse `λ`, using precomputed
/// pairings. Entries must be nonnegative and sum to one.
pub fn counting_check_sparse(
    c: &Certificate,
    table: &PairingTable,
    lambda: &[(usize, f64)],
) -> Result<CountingReport> {
    let len = table.m + table.g;
    if let Some(&(t, l)) = lambda.iter().find(|&&(t, l)| t >= len || l < 0.0 || !l.is_finite()) {
        return Err(Error::NotInPolar(format!("coefficient {l} at index {t}")));
    }
    let sum: f64 = lambda.iter().map(|p| p.1).sum();
    if (sum - 1.0).abs() > DECOMP_SUM_TOL {
        return Err(Error::NotInPolar(format!("coefficients sum to {sum}")));
    }
    let mut dense_y = vec![0.0; table.m];
    for &(t, l) in lambda {
        if t < table.m {
            dense_y[t] += l;
        }
    }
    let pairings = (0..table.m).map(|i| (i, table.pair_with_combination(i, lambda)));
    Ok(count_from(c.r, pairings, |i| dense_y[i]))
}

/// A sparse random point of the polar hull: up to six facet normals and up
/// to six polar generators with exponentially distributed weights,
/// normalized to sum to one.
pub fn random_polar_combination<G: Rng + ?Sized>(rng: &mut G, m: usize, g: usize) -> Vec<(usize, f64)> {
    let ny = if m == 0 { 0 } else { rng.random_range(1..=6usize) };
    let nu = if g == 0 { 0 } else { rng.random_range(usize::from(ny == 0)..=6usize) };
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(ny + nu);
    for _ in 0..ny {
        out.push((rng.random_range(0..m), rng.sample::<f64, _>(Exp1)));
    }
    for _ in 0..nu {
        out.push((m + rng.random_range(0..g), rng.sample::<f64, _>(Exp1)));
    }
    let total: f64 = out.iter().map(|p| p.1).sum();
    if total > 0.0 {
        out.iter_mut().for_each(|p| p.1 /= total);
    } else {
        let share = 1.0 / out.len() as f64;
        out.iter_mut().for_each(|p| p.1 = share);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CountingSweep {
    pub trials: usize,
    pub violations: usize,
    pub max_o_size: usize,
}

/// Runs [`counting_check_sparse`] on `trials` random polar points; trial `t`
/// uses stream `(seed, t)`.
pub fn counting_sweep(c: &Certificate, table: &PairingTable, trials: usize, seed: u64) -> Result<CountingSweep> {
    let (m, g) = (table.m, table.g);
    let reports: Vec<CountingReport> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream(seed, t as u64);
            counting_check_sparse(c, table, &random_polar_combination(&mut rng, m, g))
        })
        .collect::<Result<_>>()?;
    Ok(CountingSweep {
        trials,
        violations: reports.iter().filter(|r| !(r.ok && r.lambda_floor_ok)).count(),
        max_o_size: reports.iter().map(|r| r.o_size).max().unwrap_or(0),
    })
}

/// Decomposes `w` over the polar hull when the polar generators are the
/// contact points `u_0..u_n` of the regular simplex.
///
/// The contact weights are eliminated in closed form: with `s = 1 - sum λ`
/// and `z = w - sum λ_i y_i`, `μ_j = (s + n <z, u_j>)/(n+1)`. Requiring
/// `μ >= 0` leaves an LP in the `m` facet weights alone:
/// `sum_i λ_i (1 + n <y_i, u_j>) <= 1 + n <w, u_j>` for each `j`.
pub struct SimplexPolarDecomposer {
    n: usize,
    m: usize,
    /// `1 + n <y_i, u_j>`, row-major by `j`.
    coeffs: Vec<f64>,
    /// `<y_i, u_j>`, row-major by `i`.
    yu: Vec<f64>,
}

impl SimplexPolarDecomposer {
    pub fn new(c: &Certificate) -> Result<Self> {
        c.check_dims()?;
        let n = c.dim();
        if c.polar_generators.len() != n + 1 {
            return Err(Error::DimensionMismatch { expected: n + 1, got: c.polar_generators.len() });
        }
        let m = c.m();
        if m == 0 {
            return Err(Error::BadRange("certificate has no witnesses".into()));
        }
        let yu: Vec<f64> = c
            .facet_dirs
            .par_iter()
            .flat_map_iter(|y| c.polar_generators.iter().map(move |u| dot(y, u)))
            .collect();
        let nf = n as f64;
        let mut coeffs = vec![0.0; (n + 1) * m];
        for i in 0..m {
            for j in 0..=n {
                coeffs[j * m + i] = 1.0 + nf * yu[i * (n + 1) + j];
            }
        }
        Ok(SimplexPolarDecomposer { n, m, coeffs, yu })
    }

    pub fn decompose(&self, c: &Certificate, w: &[f64]) -> Result<ConvexCoefficients> {
        let (n, m) = (self.n, self.m);
        if w.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: w.len() });
        }
        let nf = n as f64;
        let wu: Vec<f64> = c.polar_generators.iter().map(|u| dot(w, u)).collect();
        let mut lp = LinearProgram::new(m, VarKind::NonNegative);
        for (row, wj) in self.coeffs.chunks(m).zip(&wu) {
            lp.add_row(row, Relation::Le, 1.0 + nf * wj);
        }
        let sol = match lp.solve(&LpOptions::default()) {
            Ok(s) => s,
            Err(Error::Infeasible) => return Err(Error::NotInPolar("no convex decomposition exists".into())),
            Err(e) => return Err(e),
        };
        let lam: Vec<f64> = sol.x.iter().map(|l| l.max(0.0)).collect();
        let s = 1.0 - lam.iter().sum::<f64>();
        let mut out = lam.clone();
        for (j, wj) in wu.iter().enumerate() {
            let ly: f64 = lam.iter().enumerate().map(|(i, l)| l * self.yu[i * (n + 1) + j]).sum();
            out.push(((s + nf * (wj - ly)) / (nf + 1.0)).max(0.0));
        }
        let coeffs = ConvexCoefficients { lambda: out };
        let (_, sum_err, res) = coeffs.residuals(&c.polar_hull(), w);
        if sum_err > DECOMP_SUM_TOL || res > DECOMP_RESIDUAL_TOL {
            return Err(Error::NotInPolar(format!(
                "decomposition residual {res:e}, |sum-1| {sum_err:e}"
            )));
        }
        Ok(coeffs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    /// `K ⊂ P` and `P ⊂ R K`.
    pub sandwich_ok: bool,
    pub inner: InclusionReport,
    pub outer: InclusionReport,
    pub facets_p: usize,
    pub bound: f64,
    /// False only if `P` is a sandwiched polytope with fewer facets than the
    /// bound allows.
    pub consistent: bool,
}

/// Tests a candidate `P = {<x, w_l> <= 1}` against the certified bound.
pub fn adversarial_facet_audit(c: &Certificate, k: &HPolytope, p: &HPolytope) -> Result<AuditReport> {
    if let Some((row, &offset)) = p.offsets().iter().enumerate().find(|(_, &b)| (b - 1.0).abs() > 1e-12) {
        return Err(Error::NonUnitOffsets { row, offset });
    }
    if k.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: k.dim(), got: p.dim() });
    }
    let inner = inclusion_check(k, p, 1.0)?;
    let outer = inclusion_check(p, k, c.r)?;
    let sandwich_ok = inner.holds && outer.holds;
    let bound = c.m() as f64 / (2.0 * c.r);
    let facets_p = p.num_facets();
    Ok(AuditReport {
        sandwich_ok,
        inner,
        outer,
        facets_p,
        bound,
        consistent: !(sandwich_ok && (facets_p as f64) < bound),
    })
}
