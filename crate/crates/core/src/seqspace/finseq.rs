use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::SeqError;

/// Exact rational scalar used for directions and user-supplied data.
pub type Rational = BigRational;

/// Scalar types a [`FinSeq`] can hold.
pub trait Entry: Clone + PartialEq + fmt::Debug + Zero {
    fn to_f64(&self) -> f64;
}

impl Entry for f64 {
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Entry for i64 {
    fn to_f64(&self) -> f64 {
        *self as f64
    }
}

impl Entry for Rational {
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// Which sequence-space norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Space {
    L1,
    L2,
    LInf,
}

/// A finitely supported real sequence indexed from 1.
///
/// Zero entries are never stored, so two sequences are equal iff they agree
/// on every coordinate.
#[derive(Clone, PartialEq, Default)]
pub struct FinSeq<T: Entry = Rational> {
    entries: BTreeMap<usize, T>,
}

impl<T: Entry> fmt::Debug for FinSeq<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

impl<T: Entry> FinSeq<T> {
    pub fn new() -> Self {
        FinSeq {
            entries: BTreeMap::new(),
        }
    }

    /// Builds a sequence from `(index, value)` pairs. Zero values are dropped;
    /// index 0 and repeated indices are rejected.
    pub fn from_pairs<I: IntoIterator<Item = (usize, T)>>(pairs: I) -> Result<Self, SeqError> {
        let mut entries = BTreeMap::new();
        for (i, v) in pairs {
            if i == 0 {
                return Err(SeqError::BadIndex);
            }
            if entries.contains_key(&i) {
                return Err(SeqError::DuplicateIndex(i));
            }
            if !v.is_zero() {
                entries.insert(i, v);
            }
        }
        Ok(FinSeq { entries })
    }

    /// Coordinate `i + 1` takes `values[i]`.
    pub fn from_dense(values: &[T]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| (i + 1, v.clone()))
            .collect();
        FinSeq { entries }
    }

    /// The `l`-th unit vector.
    pub fn unit(l: usize, one: T) -> Self {
        assert!(l >= 1, "coordinates are 1-based");
        let mut entries = BTreeMap::new();
        entries.insert(l, one);
        FinSeq { entries }
    }

    pub fn get(&self, i: usize) -> Option<&T> {
        self.entries.get(&i)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> + '_ {
        self.entries.iter().map(|(&i, v)| (i, v))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    /// Number of nonzero entries.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Largest index carrying a nonzero entry, 0 for the empty sequence.
    pub fn max_index(&self) -> usize {
        self.entries.keys().next_back().copied().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self, space: Space) -> f64 {
        let vals = self.entries.values().map(Entry::to_f64);
        match space {
            Space::L1 => vals.map(f64::abs).sum(),
            Space::L2 => vals.map(|v| v * v).sum::<f64>().sqrt(),
            Space::LInf => vals.fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    /// Dense float coordinates `1..=len`; entries beyond `len` are dropped.
    pub fn to_dense_f64(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for (&i, v) in self.entries.range(1..=len) {
            out[i - 1] = v.to_f64();
        }
        out
    }

    pub fn to_f64(&self) -> FinSeq<f64> {
        FinSeq {
            entries: self.entries.iter().map(|(&i, v)| (i, v.to_f64())).collect(),
        }
    }

    /// Drops every coordinate above `len`.
    pub fn truncated(&self, len: usize) -> Self {
        FinSeq {
            entries: self
                .entries
                .range(1..=len)
                .map(|(&i, v)| (i, v.clone()))
                .collect(),
        }
    }
}

impl FinSeq<f64> {
    pub fn dot(&self, other: &FinSeq<f64>) -> f64 {
        let (small, large) = if self.support_len() <= other.support_len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .filter_map(|(i, a)| large.entries.get(i).map(|b| a * b))
            .sum()
    }

    pub fn all_finite(&self) -> bool {
        self.entries.values().all(|v| v.is_finite())
    }

    pub fn scaled(&self, c: f64) -> FinSeq<f64> {
        FinSeq::from_pairs(self.iter().map(|(i, v)| (i, c * v))).expect("indices already valid")
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &FinSeq<f64>) -> FinSeq<f64> {
        let mut entries = self.entries.clone();
        for (&i, v) in &other.entries {
            let slot = entries.entry(i).or_insert(0.0);
            *slot += c * v;
        }
        entries.retain(|_, v| *v != 0.0);
        FinSeq { entries }
    }
}

impl FinSeq<Rational> {
    /// Convenience constructor from integer `(index, numerator, denominator)` triples.
    pub fn from_ratios<I: IntoIterator<Item = (usize, i64, i64)>>(
        items: I,
    ) -> Result<Self, SeqError> {
        let mut pairs = Vec::new();
        for (i, num, den) in items {
            if den == 0 {
                return Err(SeqError::ZeroDenominator);
            }
            pairs.push((i, Rational::new(BigInt::from(num), BigInt::from(den))));
        }
        FinSeq::from_pairs(pairs)
    }

    pub fn from_ints<I: IntoIterator<Item = (usize, i64)>>(items: I) -> Result<Self, SeqError> {
        FinSeq::from_pairs(
            items
                .into_iter()
                .map(|(i, v)| (i, Rational::from_integer(BigInt::from(v)))),
        )
    }
}

impl FinSeq<i64> {
    pub fn to_rational(&self) -> FinSeq<Rational> {
        FinSeq {
            entries: self
                .entries
                .iter()
                .map(|(&i, &v)| (i, Rational::from_integer(BigInt::from(v))))
                .collect(),
        }
    }
}

/// Norm of `v` in the requested sequence space; 0 for the empty sequence.
pub fn norm<T: Entry>(v: &FinSeq<T>, space: Space) -> f64 {
    v.norm(space)
}

/// The unique integer vector with coprime entries that is a positive multiple of `v`.
pub fn canonical_primitive(v: &FinSeq<Rational>) -> Result<FinSeq<Rational>, SeqError> {
    if v.is_zero() {
        return Err(SeqError::ZeroVector);
    }
    let lcm = v
        .entries
        .values()
        .fold(BigInt::from(1), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<(usize, BigInt)> = v
        .entries
        .iter()
        .map(|(&i, r)| (i, r.numer() * (&lcm / r.denom())))
        .collect();
    let gcd = ints
        .iter()
        .fold(BigInt::zero(), |acc, (_, n)| acc.gcd(n))
        .abs();
    Ok(FinSeq {
        entries: ints
            .into_iter()
            .map(|(i, n)| (i, Rational::from_integer(n / &gcd)))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(items: &[(usize, i64, i64)]) -> FinSeq<Rational> {
        FinSeq::from_ratios(items.iter().copied()).unwrap()
    }

    #[test]
    fn norms_of_three_four() {
        let v = FinSeq::<Rational>::from_ints([(1, 3), (2, -4)]).unwrap();
        assert_eq!(v.norm(Space::L2), 5.0);
        assert_eq!(v.norm(Space::L1), 7.0);
        assert_eq!(v.norm(Space::LInf), 4.0);
        let empty = FinSeq::<Rational>::new();
        assert_eq!(norm(&empty, Space::LInf), 0.0);
        assert_eq!(norm(&empty, Space::L1), 0.0);
    }

    #[test]
    fn zeros_are_not_stored() {
        let v = FinSeq::from_dense(&[0.0, 1.5, 0.0, -2.0]);
        assert_eq!(v.support().collect::<Vec<_>>(), vec![2, 4]);
        assert_eq!(v.max_index(), 4);
        assert!(matches!(
            FinSeq::from_pairs([(0usize, 1.0)]),
            Err(SeqError::BadIndex)
        ));
        assert!(matches!(
            FinSeq::from_pairs([(3usize, 1.0), (3, 2.0)]),
            Err(SeqError::DuplicateIndex(3))
        ));
    }

    #[test]
    fn primitive_forms() {
        assert_eq!(
            canonical_primitive(&rat(&[(1, 2, 3), (2, 4, 3)])).unwrap(),
            rat(&[(1, 1, 1), (2, 2, 1)])
        );
        assert_eq!(
            canonical_primitive(&rat(&[(1, -5, 1)])).unwrap(),
            rat(&[(1, -1, 1)])
        );
        assert_eq!(
            canonical_primitive(&rat(&[(1, 6, 1), (3, -9, 1)])).unwrap(),
            rat(&[(1, 2, 1), (3, -3, 1)])
        );
        assert!(matches!(
            canonical_primitive(&FinSeq::new()),
            Err(SeqError::ZeroVector)
        ));
    }

    #[test]
    fn antipodes_stay_distinct() {
        let a = canonical_primitive(&rat(&[(1, 1, 2), (4, 1, 3)])).unwrap();
        let b = canonical_primitive(&rat(&[(1, -1, 2), (4, -1, 3)])).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn sparse_dot_and_axpy() {
        let a = FinSeq::from_pairs([(1, 2.0), (5, 1.0)]).unwrap();
        let b = FinSeq::from_pairs([(5, 3.0), (7, 1.0)]).unwrap();
        assert_eq!(a.dot(&b), 3.0);
        let c = a.axpy(-2.0, &FinSeq::from_pairs([(1, 1.0)]).unwrap());
        assert_eq!(c.support().collect::<Vec<_>>(), vec![5]);
    }
}
