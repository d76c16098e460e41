//! Polytopes in H-representation and the LP-backed oracles on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpOptions, Relation, VarKind};
use crate::point::{axpy, dot, max_abs, norm, Point};

/// `{x : <a_i, x> <= b_i for all i}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolytope")]
pub struct HPolytope {
    dim: usize,
    normals: Vec<Point>,
    offsets: Vec<f64>,
}

#[derive(Deserialize)]
struct RawPolytope {
    dim: usize,
    normals: Vec<Point>,
    offsets: Vec<f64>,
}

impl TryFrom<RawPolytope> for HPolytope {
    type Error = Error;
    fn try_from(raw: RawPolytope) -> Result<Self> {
        HPolytope::new(raw.dim, raw.normals, raw.offsets)
    }
}

impl HPolytope {
    /// Builds a polytope, rejecting zero-norm normals and dimension
    /// mismatches. Duplicate rows are allowed.
    pub fn new(dim: usize, normals: Vec<Point>, offsets: Vec<f64>) -> Result<Self> {
        if normals.len() != offsets.len() {
            return Err(Error::DimensionMismatch { expected: normals.len(), got: offsets.len() });
        }
        for (i, a) in normals.iter().enumerate() {
            if a.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: a.dim() });
            }
            if !a.is_finite() {
                return Err(Error::NonFinite("facet normal"));
            }
            if a.norm() == 0.0 {
                return Err(Error::ZeroNormal(i));
            }
        }
        if offsets.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("facet offset"));
        }
        Ok(HPolytope { dim, normals, offsets })
    }

    /// The axis-aligned box `{|x_i| <= half_widths[i]}`.
    pub fn cube(half_widths: &[f64]) -> Self {
        let dim = half_widths.len();
        let mut normals = Vec::with_capacity(2 * dim);
        let mut offsets = Vec::with_capacity(2 * dim);
        for (i, &w) in half_widths.iter().enumerate() {
            normals.push(Point::basis(dim, i));
            normals.push(Point::basis(dim, i).scaled(-1.0));
            offsets.extend([w, w]);
        }
        HPolytope { dim, normals, offsets }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_facets(&self) -> usize {
        self.normals.len()
    }

    pub fn normals(&self) -> &[Point] {
        &self.normals
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn facet(&self, i: usize) -> (&Point, f64) {
        (&self.normals[i], self.offsets[i])
    }

    pub fn push_facet(&mut self, normal: Point, offset: f64) -> Result<()> {
        if normal.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: normal.dim() });
        }
        if normal.norm() == 0.0 {
            return Err(Error::ZeroNormal(self.normals.len()));
        }
        self.normals.push(normal);
        self.offsets.push(offset);
        Ok(())
    }

    /// The same polytope with row `i` removed.
    pub fn without_facet(&self, i: usize) -> Self {
        let mut p = self.clone();
        p.normals.remove(i);
        p.offsets.remove(i);
        p
    }

    /// Keeps the rows selected by `keep`.
    pub fn filter_facets(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        let (normals, offsets) = (0..self.num_facets())
            .filter(|&i| keep(i))
            .map(|i| (self.normals[i].clone(), self.offsets[i]))
            .unzip();
        HPolytope { dim: self.dim, normals, offsets }
    }

    /// `s * K` for `s > 0`.
    pub fn scaled(&self, s: f64) -> Self {
        HPolytope {
            dim: self.dim,
            normals: self.normals.clone(),
            offsets: self.offsets.iter().map(|b| b * s).collect(),
        }
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        Ok(())
    }

    /// `h_K(d) = max <x, d>` over `K`, by linear programming.
    pub fn support_value(&self, d: &[f64]) -> Result<f64> {
        self.support_point_with(d, &LpOptions::default()).map(|(v, _)| v)
    }

    /// The support value together with a maximizer.
    pub fn support_point_with(&self, d: &[f64], opts: &LpOptions) -> Result<(f64, Point)> {
        self.check_dim(d)?;
        let mut lp = LinearProgram::new(self.dim, VarKind::Free);
        lp.maximize(d);
        for (a, &b) in self.normals.iter().zip(&self.offsets) {
            lp.add_row(a, Relation::Le, b);
        }
        let sol = lp.solve(opts)?;
        Ok((dot(d, &sol.x), Point(sol.x)))
    }

    /// `rho_K(d) = sup{r > 0 : r d in K}`; `+inf` along recession directions.
    pub fn radial_value(&self, d: &[f64]) -> Result<f64> {
        self.check_dim(d)?;
        if norm(d) == 0.0 {
            return Err(Error::ZeroDirection);
        }
        if let Some(i) = self.offsets.iter().position(|&b| b <= 0.0) {
            return Err(Error::BadRange(format!(
                "radial function needs the origin in the interior (offset {i} is {})",
                self.offsets[i]
            )));
        }
        Ok(self
            .normals
            .iter()
            .zip(&self.offsets)
            .filter_map(|(a, &b)| {
                let s = dot(a, d);
                (s > 0.0).then(|| b / s)
            })
            .fold(f64::INFINITY, f64::min))
    }

    /// `1 / rho_K(d)`.
    pub fn gauge(&self, d: &[f64]) -> Result<f64> {
        self.radial_value(d).map(|r| 1.0 / r)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim
            && self.normals.iter().zip(&self.offsets).all(|(a, &b)| dot(a, x) <= b + tol)
    }

    /// `max_i (<a_i, x> - b_i)`; nonpositive iff `x` is in the polytope.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        self.normals
            .iter()
            .zip(&self.offsets)
            .map(|(a, &b)| dot(a, x) - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// For `K = {<x, a_i> <= 1}`, the polar is `conv{a_i}`; returns the `a_i`.
    pub fn polar_vertices(&self) -> Result<Vec<Point>> {
        for (row, &offset) in self.offsets.iter().enumerate() {
            if (offset - 1.0).abs() > 1e-12 {
                return Err(Error::NonUnitOffsets { row, offset });
            }
        }
        Ok(self.normals.clone())
    }
}

/// Outcome of testing `inner ⊂ scale · outer` facet by facet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InclusionReport {
    pub holds: bool,
    /// `max_j (h_inner(a_j) - scale * b_j)` over the facets of `outer`.
    pub worst_margin: f64,
    pub worst_facet: usize,
}

pub const INCLUSION_TOL: f64 = 1e-7;

/// Tests `inner ⊂ scale · outer` via one support LP per facet of `outer`.
pub fn inclusion_check(inner: &HPolytope, outer: &HPolytope, scale: f64) -> Result<InclusionReport> {
    inclusion_check_tol(inner, outer, scale, INCLUSION_TOL)
}

pub fn inclusion_check_tol(
    inner: &HPolytope,
    outer: &HPolytope,
    scale: f64,
    tol: f64,
) -> Result<InclusionReport> {
    if inner.dim != outer.dim {
        return Err(Error::DimensionMismatch { expected: inner.dim, got: outer.dim });
    }
    let margins: Vec<f64> = outer
        .normals
        .par_iter()
        .zip(&outer.offsets)
        .map(|(a, &b)| inner.support_value(a).map(|h| h - scale * b))
        .collect::<Result<_>>()?;
    let (worst_facet, worst_margin) = margins
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, m)| if m > best.1 { (i, m) } else { best });
    Ok(InclusionReport { holds: worst_margin <= tol, worst_margin, worst_facet })
}

/// Weights of a convex combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexCoefficients {
    pub lambda: Vec<f64>,
}

impl ConvexCoefficients {
    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    /// `sum_i lambda_i g_i`.
    pub fn combine(&self, generators: &[Point]) -> Point {
        let dim = generators.first().map_or(0, |g| g.dim());
        let mut out = Point::zeros(dim);
        for (l, g) in self.lambda.iter().zip(generators) {
            if *l != 0.0 {
                axpy(*l, g, &mut out);
            }
        }
        out
    }

    /// `(min lambda, |sum lambda - 1|, |sum lambda_i g_i - w|_inf)`.
    pub fn residuals(&self, generators: &[Point], w: &[f64]) -> (f64, f64, f64) {
        let min = self.lambda.iter().copied().fold(f64::INFINITY, f64::min);
        let sum: f64 = self.lambda.iter().sum();
        let mut diff = self.combine(generators);
        for (d, wi) in diff.iter_mut().zip(w) {
            *d -= wi;
        }
        (min, (sum - 1.0).abs(), max_abs(&diff))
    }
}

/// Writes `w` as a convex combination of `generators`.
///
/// Any feasible combination is returned (the first vertex reached by phase
/// one of the simplex method).
pub fn polar_decompose(generators: &[Point], w: &[f64]) -> Result<ConvexCoefficients> {
    let dim = w.len();
    if let Some(g) = generators.iter().find(|g| g.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
    }
    let m = generators.len();
    if m == 0 {
        return Err(Error::NotInHull { residual: max_abs(w) });
    }
    let mut lp = LinearProgram::new(m, VarKind::NonNegative);
    let mut row = vec![0.0; m];
    for c in 0..dim {
        for (r, g) in row.iter_mut().zip(generators) {
            *r = g[c];
        }
        lp.add_row(&row, Relation::Eq, w[c]);
    }
    lp.add_row(&vec![1.0; m], Relation::Eq, 1.0);
    let sol = match lp.solve(&LpOptions::default()) {
        Ok(s) => s,
        Err(Error::Infeasible) => {
            return Err(Error::NotInHull { residual: f64::NAN });
        }
        Err(e) => return Err(e),
    };
    let coeffs = ConvexCoefficients { lambda: sol.x.iter().map(|l| l.max(0.0)).collect() };
    let (_, sum_err, res) = coeffs.residuals(generators, w);
    if sum_err > 1e-9 || res > 1e-7 {
        return Err(Error::NotInHull { residual: res.max(sum_err) });
    }
    Ok(coeffs)
}
