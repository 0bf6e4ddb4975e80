use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::lp::{lp_solve_in, LinearProgram, LpArithmetic, LpOutcome, VarBound};
use super::CertifyError;
use crate::mazur::{MazurError, MazurOperator};
use crate::seqspace::{
    canonical_primitive, EnumerationMode, FinSeq, Rational, Space, SphereEnumerator,
};

/// Slack on `|<eta, zeta_k>| <= 1` when checking a float LP solution.
const VIOLATION_TOL: f64 = 1e-9;
/// Most-violated constraints added per cutting-plane round.
const CUTS_PER_ROUND: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "+" | "plus" | "1" | "+1" => Ok(Sign::Plus),
            "-" | "minus" | "-1" => Ok(Sign::Minus),
            _ => Err(format!("unknown sign `{s}` (expected + or -)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CertificateVerdict {
    /// A minimal-l1 `eta` with `<eta, zeta_m> = s_m`, `<eta, zeta_n> = s_n`
    /// and `|<eta, zeta_k>| <= 1` for all `k <= K`.
    Feasible { eta: Vec<(usize, f64)>, eta_l1: f64 },
    /// The constraint set first becomes infeasible at `k`.
    InfeasibleAtK { k: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub m: usize,
    pub n: usize,
    pub signs: (Sign, Sign),
    pub k_requested: usize,
    /// `K` for a feasible verdict, the first infeasible `K'` otherwise.
    pub constraints_used: usize,
    pub verdict: CertificateVerdict,
    /// `2 / |s_m zeta_m + s_n zeta_n|_2`; `None` when that combination vanishes.
    pub expected_constant: Option<f64>,
    /// `(K', <eta, eta_tilde>)` for every feasible `eta` met during the scan.
    pub stage_constants: Vec<(usize, f64)>,
    pub lp_solves: usize,
    pub arithmetic: LpArithmetic,
}

impl Certificate {
    pub fn is_feasible(&self) -> bool {
        matches!(self.verdict, CertificateVerdict::Feasible { .. })
    }

    /// Largest deviation of a stage constant from the expected value.
    pub fn proof_constant_error(&self) -> Option<f64> {
        let c = self.expected_constant?;
        Some(
            self.stage_constants
                .iter()
                .map(|(_, v)| (v - c).abs())
                .fold(0.0, f64::max),
        )
    }
}

struct Scanner<'a> {
    b: &'a MazurOperator,
    m: usize,
    n: usize,
    signs: (f64, f64),
    arithmetic: LpArithmetic,
    // constraint indices carried between solves (1-based)
    active: Vec<usize>,
    solves: usize,
}

impl Scanner<'_> {
    fn column(&self, k: usize) -> &FinSeq<f64> {
        self.b.column(k).expect("index checked against the frame")
    }

    /// LP over the active constraints with index `<= kk`.
    fn program(&self, kk: usize) -> LinearProgram<f64> {
        let rows = self.b.rows();
        let row_of = |col: &FinSeq<f64>| {
            let mut r = vec![0.0; 2 * rows];
            for (i, &v) in col.iter() {
                r[i - 1] = v;
                r[rows + i - 1] = -v;
            }
            r
        };
        // eta = p - q with p, q >= 0, minimize sum(p + q)
        let mut lp = LinearProgram::new(vec![1.0; 2 * rows]);
        lp.bounds = (0..2 * rows).map(|_| VarBound::nonneg()).collect();
        lp.push_eq(row_of(self.column(self.m)), self.signs.0);
        lp.push_eq(row_of(self.column(self.n)), self.signs.1);
        for &k in self
            .active
            .iter()
            .filter(|&&k| k <= kk && k != self.m && k != self.n)
        {
            let r = row_of(self.column(k));
            lp.push_le(r.clone(), 1.0);
            lp.push_ge(r, -1.0);
        }
        lp
    }

    /// Min-l1 `eta` over the constraints `k <= kk`, or `None` if infeasible.
    fn solve(&mut self, kk: usize) -> Result<Option<Vec<f64>>, CertifyError> {
        let rows = self.b.rows();
        loop {
            let lp = self.program(kk);
            self.solves += 1;
            let point = match lp_solve_in(&lp, self.arithmetic)? {
                LpOutcome::Optimal { point, .. } => point,
                LpOutcome::Infeasible => return Ok(None),
                LpOutcome::Unbounded => unreachable!("objective is bounded below by zero"),
            };
            let eta: Vec<f64> = (0..rows).map(|i| point[i] - point[rows + i]).collect();
            let eta_seq = FinSeq::from_dense(&eta);

            let mut violated: Vec<(f64, usize)> = (1..=kk)
                .filter(|k| !self.active.contains(k))
                .filter_map(|k| {
                    let g = eta_seq.dot(self.column(k)).abs();
                    (g > 1.0 + VIOLATION_TOL).then_some((g, k))
                })
                .collect();
            if violated.is_empty() {
                return Ok(Some(eta));
            }
            violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
            self.active
                .extend(violated.iter().take(CUTS_PER_ROUND).map(|&(_, k)| k));
        }
    }
}

/// The certificate LP with every constraint `k <= K` written out, in
/// variables `eta = p - q` (`p` first, then `q`).
pub fn certificate_lp(
    b: &MazurOperator,
    m: usize,
    n: usize,
    signs: (Sign, Sign),
    k: usize,
) -> Result<LinearProgram<f64>, CertifyError> {
    if m == n {
        return Err(CertifyError::BadSupport(m));
    }
    if m == 0 || n == 0 || k < m.max(n) {
        return Err(CertifyError::KTooSmall { k, m, n });
    }
    if k > b.cols() {
        return Err(MazurError::OutOfFrame {
            index: k,
            frame: b.cols(),
        }
        .into());
    }
    let sc = Scanner {
        b,
        m,
        n,
        signs: (signs.0.value(), signs.1.value()),
        arithmetic: LpArithmetic::Float,
        active: (1..=k).collect(),
        solves: 0,
    };
    Ok(sc.program(k))
}

/// Minimal-l1 dual certificate in the float simplex.
pub fn minnorm_certificate(
    b: &MazurOperator,
    m: usize,
    n: usize,
    signs: (Sign, Sign),
    k: usize,
) -> Result<Certificate, CertifyError> {
    minnorm_certificate_with(b, m, n, signs, k, LpArithmetic::Float)
}

/// Solves the certificate LP with all constraints `k <= K`. If that is
/// infeasible, finds the smallest infeasible `K'` by bisection (the
/// constraint sets are nested, so feasibility is monotone in `K'`).
///
/// `eta` lives on the row frame of `b`; constraints are generated lazily, so
/// only violated ones ever enter the tableau.
pub fn minnorm_certificate_with(
    b: &MazurOperator,
    m: usize,
    n: usize,
    signs: (Sign, Sign),
    k: usize,
    arithmetic: LpArithmetic,
) -> Result<Certificate, CertifyError> {
    if m == n {
        return Err(CertifyError::BadSupport(m));
    }
    if m == 0 || n == 0 {
        return Err(CertifyError::KTooSmall { k, m, n });
    }
    let lo = m.max(n);
    if k < lo {
        return Err(CertifyError::KTooSmall { k, m, n });
    }
    if k > b.cols() {
        return Err(MazurError::OutOfFrame {
            index: k,
            frame: b.cols(),
        }
        .into());
    }

    let s = (signs.0.value(), signs.1.value());
    let combo = b
        .column(m)
        .unwrap()
        .scaled(s.0)
        .axpy(s.1, b.column(n).unwrap());
    let combo_norm = combo.norm(Space::L2);
    let (expected_constant, eta_tilde) = if combo_norm > 1e-12 {
        (Some(2.0 / combo_norm), Some(combo.scaled(1.0 / combo_norm)))
    } else {
        (None, None)
    };

    let mut sc = Scanner {
        b,
        m,
        n,
        signs: s,
        arithmetic,
        active: vec![m, n],
        solves: 0,
    };
    let mut stage_constants = Vec::new();
    let mut record = |kk: usize, eta: &[f64]| {
        if let Some(t) = &eta_tilde {
            stage_constants.push((kk, FinSeq::from_dense(eta).dot(t)));
        }
    };

    if let Some(eta) = sc.solve(k)? {
        record(k, &eta);
        let eta_l1 = eta.iter().map(|v| v.abs()).sum();
        return Ok(Certificate {
            m,
            n,
            signs,
            k_requested: k,
            constraints_used: k,
            verdict: CertificateVerdict::Feasible {
                eta: FinSeq::from_dense(&eta)
                    .iter()
                    .map(|(i, &v)| (i, v))
                    .collect(),
                eta_l1,
            },
            expected_constant,
            stage_constants,
            lp_solves: sc.solves,
            arithmetic,
        });
    }

    // invariant: infeasible at hi; feasible at lo - 1 (vacuously when lo - 1 < max(m, n))
    let (mut lo, mut hi) = (lo, k);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        match sc.solve(mid)? {
            Some(eta) => {
                record(mid, &eta);
                lo = mid + 1;
            }
            None => hi = mid,
        }
    }
    stage_constants.sort_by_key(|&(kk, _)| kk);
    Ok(Certificate {
        m,
        n,
        signs,
        k_requested: k,
        constraints_used: hi,
        verdict: CertificateVerdict::InfeasibleAtK { k: hi },
        expected_constant,
        stage_constants,
        lp_solves: sc.solves,
        arithmetic,
    })
}

/// Minimum-norm preimage when `y` is a multiple of a single enumerated atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialMinNorm {
    /// Enumeration index of the aligned atom; `None` for `y = 0`.
    pub index: Option<usize>,
    /// `x = coefficient * e_index`.
    pub coefficient: f64,
    /// `|x|_1 = |y|_2`.
    pub value: f64,
}

/// For `y = c zeta_k`, the l1-minimal solution of `B x = y` is `c e_k` with
/// value `|c| = |y|_2` (since `|B x|_2 <= |x|_1`). Scans the enumeration for
/// the first atom parallel to `y`, in either orientation.
pub fn minnorm_trivial(
    y: &FinSeq<Rational>,
    mode: EnumerationMode,
    budget: usize,
) -> Result<TrivialMinNorm, CertifyError> {
    if y.is_zero() {
        return Ok(TrivialMinNorm {
            index: None,
            coefficient: 0.0,
            value: 0.0,
        });
    }
    let prim = canonical_primitive(y)?;
    let neg = FinSeq::from_pairs(prim.iter().map(|(i, v)| (i, -v.clone())))?;
    let value = y.norm(Space::L2);
    for z in SphereEnumerator::new(mode).take(budget) {
        let d = z.direction();
        if d.support_len() != prim.support_len() {
            continue;
        }
        let d = d.to_rational();
        if d == prim {
            return Ok(TrivialMinNorm {
                index: Some(z.index()),
                coefficient: value,
                value,
            });
        }
        if d == neg {
            return Ok(TrivialMinNorm {
                index: Some(z.index()),
                coefficient: -value,
                value,
            });
        }
    }
    Err(CertifyError::NoAlignedAtom { budget })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canonical(cols: usize, rows: usize) -> MazurOperator {
        MazurOperator::new(EnumerationMode::Canonical, cols, rows).unwrap()
    }

    #[test]
    fn antipodal_pair_is_feasible() {
        let b = canonical(200, 12);
        let c = minnorm_certificate(&b, 1, 2, (Sign::Plus, Sign::Minus), 200).unwrap();
        match &c.verdict {
            CertificateVerdict::Feasible { eta, eta_l1 } => {
                assert_eq!(eta.len(), 1);
                assert_eq!(eta[0].0, 1);
                assert!((eta[0].1 - 1.0).abs() < 1e-12);
                assert!((eta_l1 - 1.0).abs() < 1e-12);
            }
            v => panic!("{v:?}"),
        }
        assert!(c.proof_constant_error().unwrap() < 1e-12);
    }

    #[test]
    fn diagonal_direction_breaks_e1_e2() {
        let b = canonical(40, 6);
        let e1 = b
            .zetas()
            .iter()
            .position(|z| *z.direction() == FinSeq::unit(1, 1))
            .unwrap()
            + 1;
        let e2 = b
            .zetas()
            .iter()
            .position(|z| *z.direction() == FinSeq::unit(2, 1))
            .unwrap()
            + 1;
        let c = minnorm_certificate(&b, e1, e2, (Sign::Plus, Sign::Plus), 40).unwrap();
        let diag = FinSeq::from_pairs([(1, 1), (2, 1)]).unwrap();
        let kstar = b
            .zetas()
            .iter()
            .position(|z| *z.direction() == diag)
            .unwrap()
            + 1;
        assert_eq!(c.verdict, CertificateVerdict::InfeasibleAtK { k: kstar });
        assert!(c.proof_constant_error().unwrap() < 1e-12);
        assert!(!c.stage_constants.is_empty());
    }

    #[test]
    fn exact_arithmetic_agrees() {
        let b = canonical(30, 5);
        for signs in [(Sign::Plus, Sign::Plus), (Sign::Plus, Sign::Minus)] {
            let f = minnorm_certificate_with(&b, 1, 3, signs, 30, LpArithmetic::Float).unwrap();
            let e = minnorm_certificate_with(&b, 1, 3, signs, 30, LpArithmetic::Exact).unwrap();
            assert_eq!(f.constraints_used, e.constraints_used);
            assert_eq!(f.is_feasible(), e.is_feasible());
        }
    }

    #[test]
    fn preconditions() {
        let b = canonical(10, 4);
        let s = (Sign::Plus, Sign::Plus);
        assert_eq!(
            minnorm_certificate(&b, 3, 3, s, 10),
            Err(CertifyError::BadSupport(3))
        );
        assert!(matches!(
            minnorm_certificate(&b, 2, 5, s, 4),
            Err(CertifyError::KTooSmall { .. })
        ));
        assert!(matches!(
            minnorm_certificate(&b, 1, 2, s, 11),
            Err(CertifyError::Mazur(_))
        ));
    }

    #[test]
    fn trivial_min_norm() {
        let y = FinSeq::from_ints([(1, 3), (2, 4)]).unwrap();
        let t = minnorm_trivial(&y, EnumerationMode::Canonical, 10_000).unwrap();
        assert_eq!(t.value, 5.0);
        let z = crate::seqspace::enumerate_sphere(EnumerationMode::Canonical, t.index.unwrap());
        let x = z.last().unwrap().unit().scaled(t.coefficient);
        assert!(x.axpy(-1.0, &y.to_f64()).norm(Space::L2) < 1e-12);

        let zero = minnorm_trivial(&FinSeq::new(), EnumerationMode::Canonical, 1).unwrap();
        assert_eq!(
            zero,
            TrivialMinNorm {
                index: None,
                coefficient: 0.0,
                value: 0.0
            }
        );

        let far = FinSeq::from_ints([(1, 1), (2, 1), (30, 1)]).unwrap();
        assert_eq!(
            minnorm_trivial(&far, EnumerationMode::Canonical, 100),
            Err(CertifyError::NoAlignedAtom { budget: 100 })
        );
    }
}
