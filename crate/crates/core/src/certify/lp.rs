//! Dense two-phase simplex with Bland's rule, generic over the arithmetic.
//!
//! Sized for certificate and projection problems (a few hundred rows and
//! columns at most); no attempt is made at sparse or revised updates.

use std::fmt::{self, Debug, Display, Write as _};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::CertifyError;
use crate::seqspace::Rational;

/// Tolerance used by the floating-point arithmetic.
pub const FLOAT_TOL: f64 = 1e-9;

/// Field operations the tableau needs, plus a sign test that is exact for
/// rationals and tolerance-based for floats.
pub trait LpScalar:
    Clone
    + Debug
    + PartialOrd
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn is_pos(&self) -> bool;
    fn is_neg(&self) -> bool;
    fn from_f64(v: f64) -> Self;
    fn as_f64(&self) -> f64;
    fn is_negligible(&self) -> bool {
        !self.is_pos() && !self.is_neg()
    }
}

impl LpScalar for f64 {
    fn is_pos(&self) -> bool {
        *self > FLOAT_TOL
    }
    fn is_neg(&self) -> bool {
        *self < -FLOAT_TOL
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl LpScalar for Rational {
    fn is_pos(&self) -> bool {
        *self > Rational::zero()
    }
    fn is_neg(&self) -> bool {
        *self < Rational::zero()
    }
    /// Exact binary value of the float.
    fn from_f64(v: f64) -> Self {
        Rational::from_float(v).expect("finite input")
    }
    fn as_f64(&self) -> f64 {
        crate::seqspace::Entry::to_f64(self)
    }
}

/// Which arithmetic to run an LP in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpArithmetic {
    #[default]
    Float,
    /// Exact rationals; float coefficients are converted without rounding.
    Exact,
}

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Debug, Clone, PartialEq)]
pub struct VarBound<T> {
    pub lower: Option<T>,
    pub upper: Option<T>,
}

impl<T> VarBound<T> {
    pub fn free() -> Self {
        VarBound {
            lower: None,
            upper: None,
        }
    }
}

impl<T: Zero> VarBound<T> {
    pub fn nonneg() -> Self {
        VarBound {
            lower: Some(T::zero()),
            upper: None,
        }
    }
}

/// `min c^T x` subject to `G x <= h`, `E x = f` and variable bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram<T> {
    pub objective: Vec<T>,
    pub inequalities: Vec<(Vec<T>, T)>,
    pub equalities: Vec<(Vec<T>, T)>,
    pub bounds: Vec<VarBound<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome<T> {
    Optimal { point: Vec<T>, value: T },
    Infeasible,
    Unbounded,
}

impl<T> LpOutcome<T> {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpOutcome::Optimal { .. })
    }
}

impl<T: LpScalar> LinearProgram<T> {
    /// All variables free, no constraints yet.
    pub fn new(objective: Vec<T>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            inequalities: Vec::new(),
            equalities: Vec::new(),
            bounds: (0..n).map(|_| VarBound::free()).collect(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_le(&mut self, row: Vec<T>, rhs: T) {
        self.inequalities.push((row, rhs));
    }

    pub fn push_ge(&mut self, row: Vec<T>, rhs: T) {
        self.inequalities
            .push((row.into_iter().map(|v| -v).collect(), -rhs));
    }

    pub fn push_eq(&mut self, row: Vec<T>, rhs: T) {
        self.equalities.push((row, rhs));
    }

    fn check_dimensions(&self) -> Result<(), CertifyError> {
        let n = self.num_vars();
        let bad = self
            .inequalities
            .iter()
            .chain(self.equalities.iter())
            .any(|(row, _)| row.len() != n)
            || self.bounds.len() != n;
        if bad {
            return Err(CertifyError::BadDimensions(format!(
                "{n} variables, rows/bounds of other lengths"
            )));
        }
        Ok(())
    }
}

impl<T: LpScalar + Display> LinearProgram<T> {
    /// Plain-text LP file (CPLEX-like) for cross-checking with external solvers.
    pub fn to_lp_text(&self) -> String {
        fn terms<T: LpScalar + Display>(row: &[T]) -> String {
            let mut s = String::new();
            for (j, v) in row.iter().enumerate() {
                if v.is_negligible() && !v.is_zero() {
                    continue;
                }
                if v.is_zero() {
                    continue;
                }
                let _ = write!(s, " + {v} x{}", j + 1);
            }
            if s.is_empty() {
                s.push_str(" 0 x1");
            }
            s
        }
        let mut out = String::from("minimize\n obj:");
        out.push_str(&terms(&self.objective));
        out.push_str("\nsubject to\n");
        for (i, (row, rhs)) in self.inequalities.iter().enumerate() {
            let _ = writeln!(out, " c{}:{} <= {rhs}", i + 1, terms(row));
        }
        for (i, (row, rhs)) in self.equalities.iter().enumerate() {
            let _ = writeln!(out, " e{}:{} = {rhs}", i + 1, terms(row));
        }
        out.push_str("bounds\n");
        for (j, b) in self.bounds.iter().enumerate() {
            let _ = match (&b.lower, &b.upper) {
                (None, None) => writeln!(out, " x{} free", j + 1),
                (Some(l), None) => writeln!(out, " x{} >= {l}", j + 1),
                (None, Some(u)) => writeln!(out, " -inf <= x{} <= {u}", j + 1),
                (Some(l), Some(u)) => writeln!(out, " {l} <= x{} <= {u}", j + 1),
            };
        }
        out.push_str("end\n");
        out
    }
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Clone)]
enum Substitution<T> {
    /// `x = shift + col`
    Shifted { col: usize, shift: T },
    /// `x = shift - col`
    Mirrored { col: usize, shift: T },
    /// `x = pos - neg`
    Split { pos: usize, neg: usize },
}

struct Tableau<T> {
    // rows x (cols + 1); last column is the right-hand side
    a: Vec<Vec<T>>,
    basis: Vec<usize>,
    cols: usize,
}

const MAX_PIVOTS: usize = 200_000;

impl<T: LpScalar> Tableau<T> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.a[r][c].clone();
        for v in self.a[r].iter_mut() {
            *v = v.clone() / p.clone();
        }
        let pivot_row = self.a[r].clone();
        for (i, row) in self.a.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (v, pv) in row.iter_mut().zip(pivot_row.iter()) {
                *v = v.clone() - f.clone() * pv.clone();
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost^T z` over the current basis using Bland's rule on
    /// the columns allowed by `allowed`. Returns false if unbounded.
    fn optimize(
        &mut self,
        cost: &[T],
        allowed: &dyn Fn(usize) -> bool,
    ) -> Result<bool, CertifyError> {
        let rows = self.a.len();
        for _ in 0..MAX_PIVOTS {
            // reduced cost d_j = c_j - c_B^T column_j
            let entering = (0..self.cols)
                .filter(|&j| allowed(j) && !self.basis.contains(&j))
                .find(|&j| {
                    let mut d = cost[j].clone();
                    for i in 0..rows {
                        if !self.a[i][j].is_zero() {
                            d = d - cost[self.basis[i]].clone() * self.a[i][j].clone();
                        }
                    }
                    d.is_neg()
                });
            let Some(c) = entering else { return Ok(true) };
            let mut leave: Option<(usize, T)> = None;
            for i in 0..rows {
                let coef = &self.a[i][c];
                if !coef.is_pos() {
                    continue;
                }
                let ratio = self.a[i][self.cols].clone() / coef.clone();
                let better = match &leave {
                    None => true,
                    Some((li, best)) => {
                        let diff = ratio.clone() - best.clone();
                        diff.is_neg() || (diff.is_negligible() && self.basis[i] < self.basis[*li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                None => return Ok(false),
                Some((r, _)) => self.pivot(r, c),
            }
        }
        Err(CertifyError::IterationLimit(MAX_PIVOTS))
    }
}

/// Solves `lp` exactly (rationals) or to [`FLOAT_TOL`] (floats).
pub fn lp_solve<T: LpScalar>(lp: &LinearProgram<T>) -> Result<LpOutcome<T>, CertifyError> {
    lp.check_dimensions()?;
    let n = lp.num_vars();

    // 1. substitute bounded / free variables by nonnegative columns
    let mut subs = Vec::with_capacity(n);
    let mut ncols = 0;
    let mut extra_rows: Vec<(Vec<(usize, T)>, T)> = Vec::new();
    for b in &lp.bounds {
        match (&b.lower, &b.upper) {
            (Some(l), u) => {
                subs.push(Substitution::Shifted {
                    col: ncols,
                    shift: l.clone(),
                });
                if let Some(u) = u {
                    extra_rows.push((vec![(ncols, T::one())], u.clone() - l.clone()));
                }
                ncols += 1;
            }
            (None, Some(u)) => {
                subs.push(Substitution::Mirrored {
                    col: ncols,
                    shift: u.clone(),
                });
                ncols += 1;
            }
            (None, None) => {
                subs.push(Substitution::Split {
                    pos: ncols,
                    neg: ncols + 1,
                });
                ncols += 2;
            }
        }
    }

    // expresses a dense original row in the substituted columns; returns the
    // constant offset that moves to the right-hand side
    let translate = |row: &[T]| -> (Vec<T>, T) {
        let mut out = vec![T::zero(); ncols];
        let mut offset = T::zero();
        for (j, v) in row.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            match &subs[j] {
                Substitution::Shifted { col, shift } => {
                    out[*col] = out[*col].clone() + v.clone();
                    offset = offset + v.clone() * shift.clone();
                }
                Substitution::Mirrored { col, shift } => {
                    out[*col] = out[*col].clone() - v.clone();
                    offset = offset + v.clone() * shift.clone();
                }
                Substitution::Split { pos, neg } => {
                    out[*pos] = out[*pos].clone() + v.clone();
                    out[*neg] = out[*neg].clone() - v.clone();
                }
            }
        }
        (out, offset)
    };

    // 2. rows: inequalities (with slack), bound rows (with slack), equalities
    let mut le_rows: Vec<(Vec<T>, T)> = lp
        .inequalities
        .iter()
        .map(|(row, rhs)| {
            let (r, off) = translate(row);
            (r, rhs.clone() - off)
        })
        .collect();
    for (entries, rhs) in extra_rows {
        let mut r = vec![T::zero(); ncols];
        for (c, v) in entries {
            r[c] = v;
        }
        le_rows.push((r, rhs));
    }
    let eq_rows: Vec<(Vec<T>, T)> = lp
        .equalities
        .iter()
        .map(|(row, rhs)| {
            let (r, off) = translate(row);
            (r, rhs.clone() - off)
        })
        .collect();

    let n_slack = le_rows.len();
    let m = le_rows.len() + eq_rows.len();
    let art0 = ncols + n_slack;
    let total = art0 + m;
    let mut a: Vec<Vec<T>> = Vec::with_capacity(m);
    for (i, (row, rhs)) in le_rows.into_iter().chain(eq_rows).enumerate() {
        let mut full = row;
        full.resize(total + 1, T::zero());
        if i < n_slack {
            full[ncols + i] = T::one();
        }
        let mut rhs = rhs;
        if rhs.is_neg() || (rhs < T::zero()) {
            for v in full.iter_mut() {
                *v = -v.clone();
            }
            rhs = -rhs;
        }
        full[art0 + i] = T::one();
        full[total] = rhs;
        a.push(full);
    }
    let mut tab = Tableau {
        a,
        basis: (art0..art0 + m).collect(),
        cols: total,
    };

    // 3. phase one: minimize the sum of artificials
    let mut cost1 = vec![T::zero(); total];
    for c in cost1.iter_mut().skip(art0) {
        *c = T::one();
    }
    tab.optimize(&cost1, &|_| true)?;
    let infeasibility = tab
        .basis
        .iter()
        .enumerate()
        .filter(|(_, &b)| b >= art0)
        .fold(T::zero(), |acc, (i, _)| acc + tab.a[i][total].clone());
    if infeasibility.is_pos() {
        return Ok(LpOutcome::Infeasible);
    }
    // drive zero-level artificials out of the basis where possible
    for r in 0..m {
        if tab.basis[r] < art0 {
            continue;
        }
        if let Some(c) =
            (0..art0).find(|&c| !tab.a[r][c].is_negligible() && !tab.basis.contains(&c))
        {
            tab.pivot(r, c);
        }
    }

    // 4. phase two on the structural + slack columns
    let mut cost2 = vec![T::zero(); total];
    let (obj_cols, obj_offset) = translate(&lp.objective);
    for (c, v) in obj_cols.into_iter().enumerate() {
        cost2[c] = v;
    }
    if !tab.optimize(&cost2, &|j| j < art0)? {
        return Ok(LpOutcome::Unbounded);
    }

    let mut z = vec![T::zero(); total];
    for (i, &b) in tab.basis.iter().enumerate() {
        z[b] = tab.a[i][total].clone();
    }
    let point: Vec<T> = subs
        .iter()
        .map(|s| match s {
            Substitution::Shifted { col, shift } => shift.clone() + z[*col].clone(),
            Substitution::Mirrored { col, shift } => shift.clone() - z[*col].clone(),
            Substitution::Split { pos, neg } => z[*pos].clone() - z[*neg].clone(),
        })
        .collect();
    let value = lp
        .objective
        .iter()
        .zip(point.iter())
        .fold(T::zero(), |acc, (c, x)| acc + c.clone() * x.clone());
    let _ = obj_offset;
    Ok(LpOutcome::Optimal { point, value })
}

/// Converts a float LP to exact rationals (no rounding) and solves it exactly.
pub fn lp_solve_exact(lp: &LinearProgram<f64>) -> Result<LpOutcome<Rational>, CertifyError> {
    if lp
        .objective
        .iter()
        .chain(
            lp.inequalities
                .iter()
                .flat_map(|(r, b)| r.iter().chain(std::iter::once(b))),
        )
        .chain(
            lp.equalities
                .iter()
                .flat_map(|(r, b)| r.iter().chain(std::iter::once(b))),
        )
        .any(|v| !v.is_finite())
    {
        return Err(CertifyError::BadDimensions("non-finite coefficient".into()));
    }
    let conv = |v: &f64| Rational::from_f64(*v);
    let conv_row = |(r, b): &(Vec<f64>, f64)| (r.iter().map(conv).collect(), conv(b));
    let exact = LinearProgram {
        objective: lp.objective.iter().map(conv).collect(),
        inequalities: lp.inequalities.iter().map(conv_row).collect(),
        equalities: lp.equalities.iter().map(conv_row).collect(),
        bounds: lp
            .bounds
            .iter()
            .map(|b| VarBound {
                lower: b.lower.as_ref().map(conv),
                upper: b.upper.as_ref().map(conv),
            })
            .collect(),
    };
    lp_solve(&exact)
}

/// Float view of an outcome, whichever arithmetic produced it.
pub fn outcome_to_f64<T: LpScalar>(o: &LpOutcome<T>) -> LpOutcome<f64> {
    match o {
        LpOutcome::Optimal { point, value } => LpOutcome::Optimal {
            point: point.iter().map(LpScalar::as_f64).collect(),
            value: value.as_f64(),
        },
        LpOutcome::Infeasible => LpOutcome::Infeasible,
        LpOutcome::Unbounded => LpOutcome::Unbounded,
    }
}

/// Solves a float LP in the requested arithmetic, reporting the result in floats.
pub fn lp_solve_in(
    lp: &LinearProgram<f64>,
    arithmetic: LpArithmetic,
) -> Result<LpOutcome<f64>, CertifyError> {
    match arithmetic {
        LpArithmetic::Float => lp_solve(lp),
        LpArithmetic::Exact => lp_solve_exact(lp).map(|o| outcome_to_f64(&o)),
    }
}

impl<T: Display> Display for LpOutcome<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpOutcome::Optimal { value, .. } => write!(f, "optimal ({value})"),
            LpOutcome::Infeasible => write!(f, "infeasible"),
            LpOutcome::Unbounded => write!(f, "unbounded"),
        }
    }
}
