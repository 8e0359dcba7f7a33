//! Second-order cone programs over real variables.
//!
//! A [`ConeProgram`] is
//!
//! ```text
//! maximize    cᵀx
//! subject to  ‖A_i x + b_i‖ ≤ d_iᵀx + e_i    for every SOC i
//!             a_jᵀx = r_j                    for every equality j
//! ```
//!
//! Equalities are eliminated up front (`x = x₀ + Z y` by Gauss–Jordan with
//! pivoting), each cone is rescaled to unit magnitude, and the reduced
//! program is handed to a homogeneous self-dual interior-point method with
//! Nesterov–Todd scaling and Mehrotra predictor-corrector steps (see
//! `ipm`). The homogeneous embedding yields either an optimal pair or a
//! certificate of primal or dual infeasibility without a phase-one problem.

mod cone;
mod embed;
mod ipm;

use core::fmt;

use crate::linalg::{dot, norm_inf};
use crate::prelude::*;
use crate::{Error, Result};

pub use embed::ComplexEmbedding;

/// `‖A x + b‖ ≤ dᵀx + e`, with `A` stored row-major as `k × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SocConstraint {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub e: f64,
}

impl SocConstraint {
    pub fn new(a: Vec<f64>, b: Vec<f64>, d: Vec<f64>, e: f64) -> Self {
        Self { a, b, d, e }
    }

    /// Number of rows `k` of `A`.
    pub fn rows(&self) -> usize {
        self.b.len()
    }

    /// `‖A x + b‖ − (dᵀx + e)`; non-positive iff satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let lhs: f64 = (0..self.rows())
            .map(|r| {
                let v = dot(&self.a[r * n..(r + 1) * n], x) + self.b[r];
                v * v
            })
            .sum::<f64>()
            .sqrt();
        lhs - dot(&self.d, x) - self.e
    }
}

/// `aᵀx = r`.
#[derive(Debug, Clone, PartialEq)]
pub struct EqConstraint {
    pub a: Vec<f64>,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeProgram {
    pub n: usize,
    pub objective: Vec<f64>,
    pub soc: Vec<SocConstraint>,
    pub eq: Vec<EqConstraint>,
}

impl ConeProgram {
    /// Program in `n` variables with a zero objective and no constraints.
    pub fn new(n: usize) -> Self {
        Self { n, objective: vec![0.0; n], soc: Vec::new(), eq: Vec::new() }
    }

    pub fn with_objective(mut self, c: Vec<f64>) -> Self {
        self.objective = c;
        self
    }

    pub fn push_soc(&mut self, c: SocConstraint) {
        self.soc.push(c);
    }

    pub fn push_eq(&mut self, c: EqConstraint) {
        self.eq.push(c);
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::config("cone program needs at least one variable"));
        }
        crate::error::check_len(n, self.objective.len())?;
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        if !finite(&self.objective) {
            return Err(Error::domain("objective has non-finite entries"));
        }
        for c in &self.soc {
            if c.rows() == 0 {
                return Err(Error::config("second-order cone needs at least one row"));
            }
            crate::error::check_len(c.rows() * n, c.a.len())?;
            crate::error::check_len(n, c.d.len())?;
            if !(finite(&c.a) && finite(&c.b) && finite(&c.d) && c.e.is_finite()) {
                return Err(Error::domain("cone data has non-finite entries"));
            }
        }
        for c in &self.eq {
            crate::error::check_len(n, c.a.len())?;
            if !(finite(&c.a) && c.r.is_finite()) {
                return Err(Error::domain("equality data has non-finite entries"));
            }
        }
        Ok(())
    }

    /// Largest constraint violation at `x`: cone excess `‖Ax+b‖ − dᵀx − e`
    /// and absolute equality residuals. Zero or negative means feasible.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let cone = self.soc.iter().map(|c| c.violation(x));
        let eq = self.eq.iter().map(|c| (dot(&c.a, x) - c.r).abs());
        cone.chain(eq).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Plain-text canonical form, one labelled record per line, numbers in
    /// round-trip scientific notation.
    pub fn write_canonical<W: fmt::Write>(&self, out: &mut W) -> fmt::Result {
        fn row<W: fmt::Write>(out: &mut W, tag: &str, v: &[f64]) -> fmt::Result {
            out.write_str(tag)?;
            for x in v {
                write!(out, " {x:e}")?;
            }
            out.write_char('\n')
        }
        writeln!(out, "# maximize c'x s.t. ||A x + b|| <= d'x + e, a'x = r")?;
        writeln!(out, "n {}", self.n)?;
        writeln!(out, "soc {}", self.soc.len())?;
        writeln!(out, "eq {}", self.eq.len())?;
        row(out, "c", &self.objective)?;
        for (i, c) in self.soc.iter().enumerate() {
            writeln!(out, "cone {i} rows {}", c.rows())?;
            for r in 0..c.rows() {
                row(out, "A", &c.a[r * self.n..(r + 1) * self.n])?;
            }
            row(out, "b", &c.b)?;
            row(out, "d", &c.d)?;
            row(out, "e", &[c.e])?;
        }
        for (j, c) in self.eq.iter().enumerate() {
            writeln!(out, "equality {j}")?;
            row(out, "a", &c.a)?;
            row(out, "r", &[c.r])?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// The iterations stalled with every residual below `√tol` but not all
    /// below `tol`; `x` is the stalled iterate.
    OptimalInaccurate,
    /// The constraints admit no point; a dual certificate was found.
    Infeasible,
    /// The objective grows without bound over the feasible set.
    Unbounded,
    MaxIter,
    NumericalFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Residuals {
    /// Relative primal residual of the reduced conic form.
    pub primal: f64,
    /// Relative dual residual.
    pub dual: f64,
    /// Relative duality gap.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeSolution {
    pub status: SolveStatus,
    /// Primal point in the original variables (last iterate unless optimal).
    pub x: Vec<f64>,
    pub objective_value: f64,
    /// Upper bound on the optimum from the dual iterate.
    pub dual_objective: f64,
    pub iterations: usize,
    pub residuals: Residuals,
}

impl ConeSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal
    }

    /// Optimal, possibly to the reduced accuracy of a stalled solve.
    pub fn is_near_optimal(&self) -> bool {
        matches!(self.status, SolveStatus::Optimal | SolveStatus::OptimalInaccurate)
    }

    /// Converts any status but [`SolveStatus::Optimal`] and
    /// [`SolveStatus::OptimalInaccurate`] into a solver error.
    pub fn into_optimal(self) -> Result<Self> {
        if self.is_near_optimal() {
            Ok(self)
        } else {
            Err(self.error())
        }
    }

    pub fn error(&self) -> Error {
        Error::Solver {
            status: self.status,
            iterations: self.iterations,
            primal: self.residuals.primal,
            dual: self.residuals.dual,
            gap: self.residuals.gap,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 100 }
    }
}

/// `x = x₀ + Σ_j y_j z_j`, stored per original variable as a constant plus
/// sparse coefficients over the free variables.
struct Reduction {
    /// Original index of each free variable.
    free: Vec<usize>,
    /// For every original variable: `(constant, [(free position, coeff)])`.
    map: Vec<(f64, Vec<(usize, f64)>)>,
}

impl Reduction {
    fn identity(n: usize) -> Self {
        Self { free: (0..n).collect(), map: (0..n).map(|i| (0.0, vec![(i, 1.0)])).collect() }
    }

    fn expand(&self, y: &[f64]) -> Vec<f64> {
        self.map.iter().map(|(c0, terms)| c0 + terms.iter().map(|&(j, a)| a * y[j]).sum::<f64>()).collect()
    }

    /// Row `uᵀx` rewritten as `const + vᵀy`.
    fn row(&self, u: &[f64]) -> (f64, Vec<f64>) {
        let mut v = vec![0.0; self.free.len()];
        let mut c0 = 0.0;
        for (i, &ui) in u.iter().enumerate() {
            if ui == 0.0 {
                continue;
            }
            let (k, terms) = &self.map[i];
            c0 += ui * k;
            for &(j, a) in terms {
                v[j] += ui * a;
            }
        }
        (c0, v)
    }
}

/// Gauss–Jordan elimination of the equality rows. `Err(())` if the rows are
/// inconsistent.
fn eliminate(n: usize, eq: &[EqConstraint], tol: f64) -> core::result::Result<Reduction, ()> {
    if eq.is_empty() {
        return Ok(Reduction::identity(n));
    }
    let mut rows: Vec<(Vec<f64>, f64)> = eq.iter().map(|c| (c.a.clone(), c.r)).collect();
    let scale = rows.iter().map(|(a, r)| norm_inf(a).max(r.abs())).fold(1.0, f64::max);
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, column)
    let mut is_pivot = vec![false; n];
    for i in 0..rows.len() {
        let (col, mag) = rows[i]
            .0
            .iter()
            .enumerate()
            .filter(|(j, _)| !is_pivot[*j])
            .fold((usize::MAX, 0.0), |best, (j, &a)| if a.abs() > best.1 { (j, a.abs()) } else { best });
        if col == usize::MAX || mag <= tol * scale {
            if rows[i].1.abs() > tol.sqrt() * scale {
                return Err(());
            }
            continue;
        }
        let piv = rows[i].0[col];
        for a in rows[i].0.iter_mut() {
            *a /= piv;
        }
        rows[i].1 /= piv;
        let (prow, pr) = rows[i].clone();
        for (k, (a, r)) in rows.iter_mut().enumerate() {
            if k == i || a[col] == 0.0 {
                continue;
            }
            let f = a[col];
            for (aj, pj) in a.iter_mut().zip(&prow) {
                *aj -= f * pj;
            }
            *r -= f * pr;
            a[col] = 0.0;
        }
        is_pivot[col] = true;
        pivots.push((i, col));
    }
    let free: Vec<usize> = (0..n).filter(|&j| !is_pivot[j]).collect();
    let mut pos = vec![usize::MAX; n];
    for (p, &j) in free.iter().enumerate() {
        pos[j] = p;
    }
    let mut map: Vec<(f64, Vec<(usize, f64)>)> = (0..n).map(|j| (0.0, vec![(pos[j], 1.0)])).collect();
    for &(i, col) in &pivots {
        let (a, r) = &rows[i];
        let terms = free.iter().filter(|&&j| a[j] != 0.0).map(|&j| (pos[j], -a[j])).collect();
        map[col] = (*r, terms);
    }
    Ok(Reduction { free, map })
}

fn build_internal(p: &ConeProgram, red: &Reduction) -> (ipm::Problem, f64, f64) {
    let nf = red.free.len();
    let n = p.n;
    let (c0, mut c) = red.row(&p.objective);
    let c_scale = norm_inf(&c);
    let c_scale = if c_scale > 0.0 { c_scale } else { 1.0 };
    for v in c.iter_mut() {
        *v = -*v / c_scale;
    }
    let mut blocks = Vec::with_capacity(p.soc.len());
    let mut h = Vec::new();
    for cone in &p.soc {
        let k = cone.rows();
        let dim = k + 1;
        // Rows of G = −[dᵀ; A] and h = [e; b], in reduced variables.
        let mut g_rows = Vec::with_capacity(dim);
        let mut h_blk = Vec::with_capacity(dim);
        let (dc, dv) = red.row(&cone.d);
        g_rows.push(dv.iter().map(|v| -v).collect::<Vec<_>>());
        h_blk.push(cone.e + dc);
        for r in 0..k {
            let (ac, av) = red.row(&cone.a[r * n..(r + 1) * n]);
            g_rows.push(av.iter().map(|v| -v).collect());
            h_blk.push(cone.b[r] + ac);
        }
        let support: Vec<usize> = (0..nf).filter(|&j| g_rows.iter().any(|row| row[j] != 0.0)).collect();
        let mag = g_rows.iter().map(|row| norm_inf(row)).fold(norm_inf(&h_blk), f64::max);
        let rho = if mag > 0.0 { 1.0 / mag } else { 1.0 };
        let mut g = Vec::with_capacity(dim * support.len());
        for &j in &support {
            for row in &g_rows {
                g.push(rho * row[j]);
            }
        }
        let offset = h.len();
        h.extend(h_blk.iter().map(|v| rho * v));
        blocks.push(ipm::Block { offset, dim, support, g });
    }
    (ipm::Problem { n: nf, c, h, blocks }, c0, c_scale)
}

/// Solves a cone program with the default settings.
pub fn solve(p: &ConeProgram) -> Result<ConeSolution> {
    solve_with(p, &SolverSettings::default())
}

pub fn solve_with(p: &ConeProgram, settings: &SolverSettings) -> Result<ConeSolution> {
    p.validate()?;
    let red = match eliminate(p.n, &p.eq, 1e-12) {
        Ok(r) => r,
        Err(()) => {
            return Ok(ConeSolution {
                status: SolveStatus::Infeasible,
                x: vec![0.0; p.n],
                objective_value: f64::NEG_INFINITY,
                dual_objective: f64::NEG_INFINITY,
                iterations: 0,
                residuals: Residuals::default(),
            })
        }
    };
    let (prob, c0, c_scale) = build_internal(p, &red);
    let out = ipm::solve(&prob, settings.tol, settings.max_iter);
    let x = red.expand(&out.x);
    let (status, objective_value, dual_objective) = match out.status {
        ipm::Status::Optimal | ipm::Status::Inaccurate => {
            let dual = c0 + dot(&prob.h, &out.z) * c_scale;
            let status =
                if out.status == ipm::Status::Optimal { SolveStatus::Optimal } else { SolveStatus::OptimalInaccurate };
            (status, p.objective_value(&x), dual)
        }
        ipm::Status::PrimalInfeasible => (SolveStatus::Infeasible, f64::NEG_INFINITY, f64::NEG_INFINITY),
        ipm::Status::DualInfeasible => (SolveStatus::Unbounded, f64::INFINITY, f64::INFINITY),
        ipm::Status::MaxIter => (SolveStatus::MaxIter, p.objective_value(&x), f64::NAN),
        ipm::Status::NumericalFailure => (SolveStatus::NumericalFailure, p.objective_value(&x), f64::NAN),
    };
    Ok(ConeSolution {
        status,
        x,
        objective_value,
        dual_objective,
        iterations: out.iterations,
        residuals: Residuals { primal: out.pres, dual: out.dres, gap: out.gap },
    })
}

/// Relative slack threshold separating feasible from marginal programs.
pub const FEAS_TOL: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    /// Optimal slack at least `FEAS_TOL · (1 + max|e|)`: strictly feasible.
    Feasible,
    /// Slack within the threshold of zero either way.
    MarginallyFeasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityResult {
    pub verdict: Feasibility,
    /// Largest uniform slack `s` with `‖Ax+b‖ ≤ dᵀx + e − s` for all cones
    /// (capped at `1 + max|e|`).
    pub slack: f64,
    /// Maximizing point in the original variables.
    pub x: Vec<f64>,
    pub solution: ConeSolution,
}

impl FeasibilityResult {
    pub fn is_feasible(&self) -> bool {
        self.verdict == Feasibility::Feasible
    }
}

/// Decides feasibility of a program with zero objective by maximizing a
/// common slack subtracted from every cone's right-hand side.
pub fn solve_feasibility(p: &ConeProgram) -> Result<FeasibilityResult> {
    solve_feasibility_with(p, &SolverSettings::default())
}

pub fn solve_feasibility_with(p: &ConeProgram, settings: &SolverSettings) -> Result<FeasibilityResult> {
    p.validate()?;
    if p.objective.iter().any(|&c| c != 0.0) {
        return Err(Error::config("feasibility programs must have a zero objective"));
    }
    let n = p.n;
    let e_max = p.soc.iter().map(|c| c.e.abs()).fold(0.0, f64::max);
    let cap = 1.0 + e_max;
    let mut aug = ConeProgram::new(n + 1);
    aug.objective[n] = 1.0;
    for c in &p.soc {
        let k = c.rows();
        let mut a = vec![0.0; k * (n + 1)];
        for r in 0..k {
            a[r * (n + 1)..r * (n + 1) + n].copy_from_slice(&c.a[r * n..(r + 1) * n]);
        }
        let mut d = c.d.clone();
        d.push(-1.0);
        aug.push_soc(SocConstraint::new(a, c.b.clone(), d, c.e));
    }
    let mut d = vec![0.0; n + 1];
    d[n] = -1.0;
    aug.push_soc(SocConstraint::new(vec![0.0; n + 1], vec![0.0], d, cap));
    for c in &p.eq {
        let mut a = c.a.clone();
        a.push(0.0);
        aug.push_eq(EqConstraint { a, r: c.r });
    }
    let sol = solve_with(&aug, settings)?;
    let thresh = FEAS_TOL * cap;
    let (verdict, slack) = match sol.status {
        SolveStatus::Optimal | SolveStatus::OptimalInaccurate => {
            let s = sol.x[n];
            let v = if s >= thresh {
                Feasibility::Feasible
            } else if s <= -thresh {
                Feasibility::Infeasible
            } else {
                Feasibility::MarginallyFeasible
            };
            (v, s)
        }
        // Slack is bounded above and the slack program is always feasible
        // unless the equalities are inconsistent.
        SolveStatus::Infeasible => (Feasibility::Infeasible, f64::NEG_INFINITY),
        _ => return Err(sol.error()),
    };
    let x = sol.x[..n].to_vec();
    Ok(FeasibilityResult { verdict, slack, x, solution: sol })
}
