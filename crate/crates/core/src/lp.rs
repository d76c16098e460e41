//! Dense two-phase simplex method.
//!
//! Problems are stated as `maximize c·x` subject to rows `a·x <= b` or
//! `a·x = b`, with each variable either free or nonnegative. The solver
//! keeps a dictionary (one row per basic variable, one column per nonbasic
//! variable), so free variables never need to be split into a difference
//! of two nonnegative ones. Phase one introduces one artificial variable per
//! row whose slack cannot start in the basis.
//!
//! Entering variables follow either Bland's rule throughout, or Dantzig's
//! largest-coefficient rule that falls back to Bland's rule for the rest of
//! the solve once a run of degenerate pivots is observed. Both terminate.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Free,
    NonNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Smallest eligible index enters, smallest index leaves on ties.
    Bland,
    /// Largest reduced cost enters until pivots stall, then Bland.
    DantzigThenBland,
}

#[derive(Debug, Clone, Copy)]
pub struct LpOptions {
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_rule: PivotRule,
    pub max_iterations: Option<usize>,
}

impl Default for LpOptions {
    fn default() -> Self {
        LpOptions {
            feasibility_tol: 1e-9,
            optimality_tol: 1e-9,
            pivot_rule: PivotRule::DantzigThenBland,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// A linear program in row form.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    num_vars: usize,
    kinds: Vec<VarKind>,
    objective: Vec<f64>,
    coeffs: Vec<f64>,
    relations: Vec<Relation>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    /// A program over `num_vars` variables of the given kind with a zero
    /// objective and no rows.
    pub fn new(num_vars: usize, kind: VarKind) -> Self {
        LinearProgram {
            num_vars,
            kinds: vec![kind; num_vars],
            objective: vec![0.0; num_vars],
            coeffs: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn set_kind(&mut self, var: usize, kind: VarKind) {
        self.kinds[var] = kind;
    }

    pub fn maximize(&mut self, objective: &[f64]) {
        assert_eq!(objective.len(), self.num_vars);
        self.objective.copy_from_slice(objective);
    }

    pub fn add_row(&mut self, coeffs: &[f64], relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.num_vars);
        self.coeffs.extend_from_slice(coeffs);
        self.relations.push(relation);
        self.rhs.push(rhs);
    }

    pub fn solve(&self, opts: &LpOptions) -> Result<LpSolution> {
        let mut tab = Tableau::build(self, opts);
        tab.run_phase_one()?;
        tab.run_phase_two(&self.objective)?;
        Ok(tab.solution(self.num_vars, &self.objective))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Structural,
    Slack,
    Artificial,
}

#[derive(Debug, Clone, Copy)]
struct Var {
    role: Role,
    free: bool,
    /// +1 or -1; the dictionary tracks `sign * value`.
    sign: f64,
}

const PIVOT_EPS: f64 = 1e-11;
const STALL_LIMIT: usize = 50;

struct Tableau {
    m: usize,
    nc: usize,
    /// Row-major `m x nc` dictionary: `basic[r] = rhs[r] + sum_j d[r][j] * nonbasic[j]`.
    d: Vec<f64>,
    rhs: Vec<f64>,
    obj: Vec<f64>,
    z0: f64,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    vars: Vec<Var>,
    row_active: Vec<bool>,
    col_blocked: Vec<bool>,
    opts: LpOptions,
    bland: bool,
    iterations: usize,
    max_iterations: usize,
    rhs_scale: f64,
    scratch: Vec<f64>,
}

impl Tableau {
    fn build(lp: &LinearProgram, opts: &LpOptions) -> Self {
        let n = lp.num_vars;
        let m = lp.num_rows();
        let mut vars: Vec<Var> = lp
            .kinds
            .iter()
            .map(|k| Var { role: Role::Structural, free: *k == VarKind::Free, sign: 1.0 })
            .collect();

        // Le rows with negative rhs keep their slack nonbasic (as a column).
        let mut extra_cols = Vec::new();
        for (r, (&rel, &b)) in lp.relations.iter().zip(&lp.rhs).enumerate() {
            if rel == Relation::Le && b < 0.0 {
                extra_cols.push(r);
            }
        }
        let nc = n + extra_cols.len();
        let mut nonbasic: Vec<usize> = (0..n).collect();
        let mut slack_col = vec![usize::MAX; m];
        for (c, &r) in extra_cols.iter().enumerate() {
            let id = vars.len();
            vars.push(Var { role: Role::Slack, free: false, sign: 1.0 });
            nonbasic.push(id);
            slack_col[r] = n + c;
        }

        let mut d = vec![0.0; m * nc];
        let mut rhs = vec![0.0; m];
        let mut basic = Vec::with_capacity(m);
        for r in 0..m {
            let a = &lp.coeffs[r * n..(r + 1) * n];
            let b = lp.rhs[r];
            let row = &mut d[r * nc..(r + 1) * nc];
            let (role, flip) = match lp.relations[r] {
                Relation::Le if b >= 0.0 => (Role::Slack, false),
                Relation::Le => {
                    // art = -b + a.x + s
                    row[slack_col[r]] = 1.0;
                    (Role::Artificial, true)
                }
                Relation::Eq => (Role::Artificial, b < 0.0),
            };
            if flip {
                row[..n].copy_from_slice(a);
                rhs[r] = -b;
            } else {
                for (x, y) in row[..n].iter_mut().zip(a) {
                    *x = -y;
                }
                rhs[r] = b;
            }
            let id = vars.len();
            vars.push(Var { role, free: false, sign: 1.0 });
            basic.push(id);
        }

        let rhs_scale = 1.0 + lp.rhs.iter().fold(0.0f64, |s, b| s.max(b.abs()));
        let max_iterations = opts.max_iterations.unwrap_or(50 * (m + nc) + 10_000);
        Tableau {
            m,
            nc,
            d,
            rhs,
            obj: vec![0.0; nc],
            z0: 0.0,
            basic,
            nonbasic,
            vars,
            row_active: vec![true; m],
            col_blocked: vec![false; nc],
            opts: *opts,
            bland: opts.pivot_rule == PivotRule::Bland,
            iterations: 0,
            max_iterations,
            rhs_scale,
            scratch: vec![0.0; nc],
        }
    }

    fn run_phase_one(&mut self) -> Result<()> {
        let art_rows: Vec<usize> = (0..self.m)
            .filter(|&r| self.vars[self.basic[r]].role == Role::Artificial)
            .collect();
        if art_rows.is_empty() {
            return Ok(());
        }
        self.obj.iter_mut().for_each(|c| *c = 0.0);
        self.z0 = 0.0;
        for &r in &art_rows {
            self.z0 -= self.rhs[r];
            for j in 0..self.nc {
                self.obj[j] -= self.d[r * self.nc + j];
            }
        }
        self.iterate()?;

        let infeasibility = -self.z0;
        let tol = self.opts.feasibility_tol * self.rhs_scale * (art_rows.len() as f64).max(1.0);
        if infeasibility > tol {
            return Err(Error::Infeasible);
        }

        // Drive remaining artificials out of the basis; rows where that is
        // impossible are linearly dependent on the others and are dropped.
        for r in 0..self.m {
            if !self.row_active[r] || self.vars[self.basic[r]].role != Role::Artificial {
                continue;
            }
            self.rhs[r] = 0.0;
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.nc {
                if self.col_blocked[j] || self.vars[self.nonbasic[j]].role == Role::Artificial {
                    continue;
                }
                let v = self.d[r * self.nc + j].abs();
                if v > 1e-9 && best.is_none_or(|(_, b)| v > b) {
                    best = Some((j, v));
                }
            }
            match best {
                Some((j, _)) => self.pivot(r, j),
                None => self.row_active[r] = false,
            }
        }
        for j in 0..self.nc {
            if self.vars[self.nonbasic[j]].role == Role::Artificial {
                self.col_blocked[j] = true;
            }
        }
        Ok(())
    }

    fn run_phase_two(&mut self, c: &[f64]) -> Result<()> {
        self.obj.iter_mut().for_each(|x| *x = 0.0);
        self.z0 = 0.0;
        for j in 0..self.nc {
            let v = self.nonbasic[j];
            if self.vars[v].role == Role::Structural {
                self.obj[j] = c[v] * self.vars[v].sign;
            }
        }
        for r in 0..self.m {
            if !self.row_active[r] {
                continue;
            }
            let v = self.basic[r];
            if self.vars[v].role != Role::Structural || c[v] == 0.0 {
                continue;
            }
            let w = c[v] * self.vars[v].sign;
            self.z0 += w * self.rhs[r];
            let nc = self.nc;
            for j in 0..nc {
                self.obj[j] += w * self.d[r * nc + j];
            }
        }
        if self.bland && self.opts.pivot_rule == PivotRule::DantzigThenBland {
            self.bland = false;
        }
        self.iterate()
    }

    fn iterate(&mut self) -> Result<()> {
        let mut stall = 0usize;
        loop {
            let Some((j, direction)) = self.choose_entering() else {
                return Ok(());
            };
            if direction < 0.0 {
                self.flip_column(j);
            }
            let Some(r) = self.choose_leaving(j) else {
                return Err(Error::Unbounded);
            };
            if self.rhs[r].abs() <= self.opts.feasibility_tol {
                stall += 1;
                if stall > STALL_LIMIT {
                    self.bland = true;
                }
            } else {
                stall = 0;
            }
            self.pivot(r, j);
            self.iterations += 1;
            if self.iterations > self.max_iterations {
                return Err(Error::IterationLimit(self.max_iterations));
            }
        }
    }

    fn choose_entering(&self) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.nc {
            if self.col_blocked[j] {
                continue;
            }
            let c = self.obj[j];
            let var = self.vars[self.nonbasic[j]];
            let eligible = c > tol || (var.free && c < -tol);
            if !eligible {
                continue;
            }
            if self.bland {
                match best {
                    Some((bj, _)) if self.nonbasic[bj] < self.nonbasic[j] => {}
                    _ => best = Some((j, c)),
                }
            } else if best.is_none_or(|(_, bc)| c.abs() > bc.abs()) {
                best = Some((j, c));
            }
        }
        best.map(|(j, c)| (j, c.signum()))
    }

    fn flip_column(&mut self, j: usize) {
        let nc = self.nc;
        for r in 0..self.m {
            self.d[r * nc + j] = -self.d[r * nc + j];
        }
        self.obj[j] = -self.obj[j];
        let v = self.nonbasic[j];
        self.vars[v].sign = -self.vars[v].sign;
    }

    fn choose_leaving(&self, j: usize) -> Option<usize> {
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..self.m {
            if !self.row_active[r] || self.vars[self.basic[r]].free {
                continue;
            }
            let a = self.d[r * self.nc + j];
            if a >= -PIVOT_EPS {
                continue;
            }
            let ratio = self.rhs[r].max(0.0) / -a;
            match best {
                None => best = Some((r, ratio, a)),
                Some((br, bratio, ba)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                    let better = if tie {
                        if self.bland {
                            self.basic[r] < self.basic[br]
                        } else {
                            a.abs() > ba.abs()
                        }
                    } else {
                        ratio < bratio
                    };
                    if better {
                        best = Some((r, ratio, a));
                    }
                }
            }
        }
        best.map(|(r, _, _)| r)
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.nc;
        let a = self.d[r * nc + j];
        let factor = -1.0 / a;
        {
            let row = &mut self.d[r * nc..(r + 1) * nc];
            for x in row.iter_mut() {
                *x *= factor;
            }
            row[j] = 1.0 / a;
        }
        self.rhs[r] *= factor;
        self.scratch.copy_from_slice(&self.d[r * nc..(r + 1) * nc]);
        let prow = &self.scratch;
        let prhs = self.rhs[r];

        for i in 0..self.m {
            if i == r || !self.row_active[i] {
                continue;
            }
            let b = self.d[i * nc + j];
            if b == 0.0 {
                continue;
            }
            let row = &mut self.d[i * nc..(i + 1) * nc];
            row[j] = 0.0;
            for (x, p) in row.iter_mut().zip(prow) {
                *x += b * p;
            }
            self.rhs[i] += b * prhs;
            if !self.vars[self.basic[i]].free
                && self.rhs[i] < 0.0
                && self.rhs[i] > -self.opts.feasibility_tol
            {
                self.rhs[i] = 0.0;
            }
        }
        let c = self.obj[j];
        if c != 0.0 {
            self.obj[j] = 0.0;
            for (x, p) in self.obj.iter_mut().zip(prow) {
                *x += c * p;
            }
            self.z0 += c * prhs;
        }
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[j]);
    }

    fn solution(&self, n: usize, c: &[f64]) -> LpSolution {
        let mut x = vec![0.0; n];
        for r in 0..self.m {
            if !self.row_active[r] {
                continue;
            }
            let v = self.basic[r];
            if v < n {
                x[v] = self.vars[v].sign * self.rhs[r];
            }
        }
        let objective = x.iter().zip(c).map(|(a, b)| a * b).sum();
        LpSolution { objective, x, iterations: self.iterations }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(rule: PivotRule) -> LpOptions {
        LpOptions { pivot_rule: rule, ..LpOptions::default() }
    }

    #[test]
    fn textbook_maximum() {
        // max 3x + 2y, x + y <= 4, x + 3y <= 6, x <= 3, x,y >= 0 -> (3,1), 11
        let mut lp = LinearProgram::new(2, VarKind::NonNegative);
        lp.maximize(&[3.0, 2.0]);
        lp.add_row(&[1.0, 1.0], Relation::Le, 4.0);
        lp.add_row(&[1.0, 3.0], Relation::Le, 6.0);
        lp.add_row(&[1.0, 0.0], Relation::Le, 3.0);
        for rule in [PivotRule::Bland, PivotRule::DantzigThenBland] {
            let s = lp.solve(&opts(rule)).unwrap();
            assert!((s.objective - 11.0).abs() < 1e-12);
            assert!((s.x[0] - 3.0).abs() < 1e-12 && (s.x[1] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn free_variables_move_in_both_directions() {
        // max -x - y over the box |x|,|y| <= 2 -> x = y = -2
        let mut lp = LinearProgram::new(2, VarKind::Free);
        lp.maximize(&[-1.0, -1.0]);
        for (a, b) in [([1.0, 0.0], 2.0), ([-1.0, 0.0], 2.0), ([0.0, 1.0], 2.0), ([0.0, -1.0], 2.0)] {
            lp.add_row(&a, Relation::Le, b);
        }
        let s = lp.solve(&LpOptions::default()).unwrap();
        assert!((s.objective - 4.0).abs() < 1e-12);
        assert!((s.x[0] + 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // x >= 1 written as -x <= -1; min x -> 1
        let mut lp = LinearProgram::new(1, VarKind::Free);
        lp.maximize(&[-1.0]);
        lp.add_row(&[-1.0], Relation::Le, -1.0);
        lp.add_row(&[1.0], Relation::Le, 5.0);
        let s = lp.solve(&LpOptions::default()).unwrap();
        assert!((s.x[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equality_rows_and_redundancy() {
        // x + y = 1, 2x + 2y = 2 (redundant), x - y = 0
        let mut lp = LinearProgram::new(2, VarKind::NonNegative);
        lp.add_row(&[1.0, 1.0], Relation::Eq, 1.0);
        lp.add_row(&[2.0, 2.0], Relation::Eq, 2.0);
        lp.add_row(&[1.0, -1.0], Relation::Eq, 0.0);
        let s = lp.solve(&LpOptions::default()).unwrap();
        assert!((s.x[0] - 0.5).abs() < 1e-12 && (s.x[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(1, VarKind::NonNegative);
        lp.add_row(&[1.0], Relation::Le, -1.0);
        assert_eq!(lp.solve(&LpOptions::default()).unwrap_err(), Error::Infeasible);

        let mut lp = LinearProgram::new(2, VarKind::Free);
        lp.maximize(&[1.0, 0.0]);
        lp.add_row(&[0.0, 1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve(&LpOptions::default()).unwrap_err(), Error::Unbounded);
    }

    #[test]
    fn degenerate_vertex_terminates_under_bland() {
        // Beale's classic cycling example (cycles under the textbook
        // largest-coefficient rule without anti-cycling).
        let mut lp = LinearProgram::new(4, VarKind::NonNegative);
        lp.maximize(&[0.75, -150.0, 0.02, -6.0]);
        lp.add_row(&[0.25, -60.0, -0.04, 9.0], Relation::Le, 0.0);
        lp.add_row(&[0.5, -90.0, -0.02, 3.0], Relation::Le, 0.0);
        lp.add_row(&[0.0, 0.0, 1.0, 0.0], Relation::Le, 1.0);
        for rule in [PivotRule::Bland, PivotRule::DantzigThenBland] {
            let s = lp.solve(&opts(rule)).unwrap();
            assert!((s.objective - 0.05).abs() < 1e-12, "{rule:?}: {}", s.objective);
        }
    }
}
