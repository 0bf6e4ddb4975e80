use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use super::{FinSeq, SeqError};

// Weights of the enumeration height
//
//   h(v) = 2 n + |v|_inf + 8 (|v|_1 - |v|_inf) + 16 (s - 1)^2
//
// where n is the largest nonzero coordinate and s the support size. Every
// height class is finite, so the order is a well-ordering of all primitive
// integer vectors. The mass outside the dominant entry and the support size
// are penalised so that "one large coordinate plus a small perturbation"
// directions, which approximate unit vectors, show up early.
const INDEX_WEIGHT: i64 = 2;
const REST_WEIGHT: i64 = 8;
const SUPPORT_WEIGHT: i64 = 16;

/// Which variant of the sphere enumeration to produce. Serialized as
/// `canonical`, `no-singleton` or `adversarial:N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum EnumerationMode {
    /// Every primitive integer direction, in height order.
    Canonical,
    /// Canonical order with all single-coordinate directions removed.
    NoSingleton,
    /// The first `N` canonical directions supported in coordinates {1, 2},
    /// followed by the remaining canonical directions.
    AdversarialPrefix(usize),
}

impl fmt::Display for EnumerationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnumerationMode::Canonical => write!(f, "canonical"),
            EnumerationMode::NoSingleton => write!(f, "no-singleton"),
            EnumerationMode::AdversarialPrefix(n) => write!(f, "adversarial:{n}"),
        }
    }
}

impl From<EnumerationMode> for String {
    fn from(m: EnumerationMode) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for EnumerationMode {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl FromStr for EnumerationMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "canonical" => Ok(EnumerationMode::Canonical),
            "no-singleton" => Ok(EnumerationMode::NoSingleton),
            _ => match s.strip_prefix("adversarial:") {
                Some(n) => n
                    .parse()
                    .map(EnumerationMode::AdversarialPrefix)
                    .map_err(|_| format!("bad prefix length in mode '{s}'")),
                None => Err(format!(
                    "unknown mode '{s}' (expected canonical, no-singleton or adversarial:N)"
                )),
            },
        }
    }
}

/// One term of the enumeration: a point of the l2 unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphereVector {
    index: usize,
    direction: FinSeq<i64>,
    unit: FinSeq<f64>,
}

impl SphereVector {
    fn from_dense(index: usize, tuple: &[i64]) -> Self {
        let direction = FinSeq::from_dense(tuple);
        let len = tuple
            .iter()
            .map(|&v| (v as f64) * (v as f64))
            .sum::<f64>()
            .sqrt();
        let unit = FinSeq::from_dense(&tuple.iter().map(|&v| v as f64 / len).collect::<Vec<_>>());
        SphereVector {
            index,
            direction,
            unit,
        }
    }

    /// 1-based position in the enumeration.
    pub fn index(&self) -> usize {
        self.index
    }

    /// Primitive integer direction (coprime entries).
    pub fn direction(&self) -> &FinSeq<i64> {
        &self.direction
    }

    /// The normalized vector in floating point.
    pub fn unit(&self) -> &FinSeq<f64> {
        &self.unit
    }

    /// Largest coordinate index in the support.
    pub fn max_index(&self) -> usize {
        self.direction.max_index()
    }

    /// Euclidean distance to another float sequence.
    pub fn distance_to(&self, target: &FinSeq<f64>) -> f64 {
        l2_distance(&self.unit, target)
    }
}

pub(crate) fn l2_distance(a: &FinSeq<f64>, b: &FinSeq<f64>) -> f64 {
    let mut acc = 0.0;
    for (i, x) in a.iter() {
        let d = x - b.get(i).copied().unwrap_or(0.0);
        acc += d * d;
    }
    for (i, y) in b.iter() {
        if a.get(i).is_none() {
            acc += y * y;
        }
    }
    acc.sqrt()
}

/// Enumeration height of a dense integer tuple (see the module constants).
pub fn height(tuple: &[i64]) -> i64 {
    let n = tuple.iter().rposition(|&v| v != 0).map_or(0, |p| p + 1) as i64;
    let (m, s, supp) = tuple.iter().fold((0, 0, 0), |(m, s, k), &v| {
        (m.max(v.abs()), s + v.abs(), k + i64::from(v != 0))
    });
    cost(m, s, supp) + INDEX_WEIGHT * n
}

fn cost(max: i64, sum: i64, support: i64) -> i64 {
    if support == 0 {
        return 0;
    }
    max + REST_WEIGHT * (sum - max) + SUPPORT_WEIGHT * (support - 1) * (support - 1)
}

// 0 < 1 < -1 < 2 < -2 < ...
fn coord_key(v: i64) -> u64 {
    match v.signum() {
        0 => 0,
        1 => 2 * v as u64 - 1,
        _ => 2 * v.unsigned_abs(),
    }
}

struct ClassBuilder<'a> {
    n: usize,
    target: i64,
    buf: Vec<i64>,
    out: &'a mut Vec<Vec<i64>>,
}

impl ClassBuilder<'_> {
    fn fill(&mut self, pos: usize, max: i64, sum: i64, support: i64, gcd: i64) {
        if pos + 1 == self.n {
            self.finish(max, sum, support, gcd);
            return;
        }
        self.buf[pos] = 0;
        self.fill(pos + 1, max, sum, support, gcd);
        let mut a = 1;
        loop {
            let (m, s, k) = (max.max(a), sum + a, support + 1);
            // the last coordinate is nonzero and costs at least this much
            let tail = if m >= 1 { REST_WEIGHT } else { 1 };
            if cost(m, s, k) + SUPPORT_WEIGHT * (k * k - (k - 1) * (k - 1)) + tail > self.target {
                break;
            }
            let g = gcd.gcd(&a);
            for v in [a, -a] {
                self.buf[pos] = v;
                self.fill(pos + 1, m, s, k, g);
            }
            a += 1;
        }
        self.buf[pos] = 0;
    }

    fn finish(&mut self, max: i64, sum: i64, support: i64, gcd: i64) {
        let base = SUPPORT_WEIGHT * support * support;
        let mut candidates = [0i64; 2];
        let mut count = 0;
        if max >= 1 {
            let slack = self.target - max - REST_WEIGHT * (sum - max) - base;
            if slack > 0 && slack % REST_WEIGHT == 0 && slack / REST_WEIGHT <= max {
                candidates[count] = slack / REST_WEIGHT;
                count += 1;
            }
        }
        let a = self.target - REST_WEIGHT * sum - base;
        if a > max {
            candidates[count] = a;
            count += 1;
        }
        for &a in &candidates[..count] {
            if gcd.gcd(&a) != 1 {
                continue;
            }
            for v in [a, -a] {
                let last = self.n - 1;
                self.buf[last] = v;
                self.out.push(self.buf.clone());
            }
        }
    }
}

/// All primitive integer tuples of the given height, in enumeration order.
fn height_class(h: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut n = 1usize;
    while INDEX_WEIGHT * (n as i64) < h {
        let mut bucket = Vec::new();
        let mut builder = ClassBuilder {
            n,
            target: h - INDEX_WEIGHT * n as i64,
            buf: vec![0; n],
            out: &mut bucket,
        };
        builder.fill(0, 0, 0, 0, 0);
        bucket.sort_by_cached_key(|v| {
            let l1: i64 = v.iter().map(|x| x.abs()).sum();
            (l1, v.iter().map(|&x| coord_key(x)).collect::<Vec<_>>())
        });
        out.extend(bucket);
        n += 1;
    }
    out
}

/// Canonical order, unfiltered, as dense tuples.
struct CanonicalStream {
    height: i64,
    pending: VecDeque<Vec<i64>>,
}

impl CanonicalStream {
    fn new() -> Self {
        CanonicalStream {
            height: 0,
            pending: VecDeque::new(),
        }
    }
}

impl Iterator for CanonicalStream {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        while self.pending.is_empty() {
            self.height += 1;
            self.pending = height_class(self.height).into();
        }
        self.pending.pop_front()
    }
}

/// Lazy, unbounded enumeration of the unit sphere for one mode.
pub struct SphereEnumerator {
    mode: EnumerationMode,
    main: CanonicalStream,
    prefix: Option<CanonicalStream>,
    prefix_left: usize,
    skip_left: usize,
    emitted: usize,
}

impl SphereEnumerator {
    pub fn new(mode: EnumerationMode) -> Self {
        let (prefix, n) = match mode {
            EnumerationMode::AdversarialPrefix(n) => (Some(CanonicalStream::new()), n),
            _ => (None, 0),
        };
        SphereEnumerator {
            mode,
            main: CanonicalStream::new(),
            prefix,
            prefix_left: n,
            skip_left: n,
            emitted: 0,
        }
    }

    pub fn mode(&self) -> EnumerationMode {
        self.mode
    }

    fn next_tuple(&mut self) -> Vec<i64> {
        if self.prefix_left > 0 {
            let prefix = self
                .prefix
                .as_mut()
                .expect("prefix stream exists in adversarial mode");
            let t = prefix.find(|t| t.len() <= 2).expect("stream is unbounded");
            self.prefix_left -= 1;
            return t;
        }
        loop {
            let t = self.main.next().expect("stream is unbounded");
            match self.mode {
                EnumerationMode::Canonical => return t,
                EnumerationMode::NoSingleton => {
                    if t.iter().filter(|&&v| v != 0).count() >= 2 {
                        return t;
                    }
                }
                EnumerationMode::AdversarialPrefix(_) => {
                    if t.len() <= 2 && self.skip_left > 0 {
                        self.skip_left -= 1;
                        continue;
                    }
                    return t;
                }
            }
        }
    }
}

impl Iterator for SphereEnumerator {
    type Item = SphereVector;

    fn next(&mut self) -> Option<SphereVector> {
        let tuple = self.next_tuple();
        self.emitted += 1;
        Some(SphereVector::from_dense(self.emitted, &tuple))
    }
}

/// The first `k` terms of the enumeration.
pub fn enumerate_sphere(mode: EnumerationMode, k: usize) -> Vec<SphereVector> {
    SphereEnumerator::new(mode).take(k).collect()
}

/// A located enumeration term close to a target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub defect: f64,
}

/// Resumable scan for the first enumeration term within `eps` of a unit target.
pub struct DensitySearch {
    target: FinSeq<f64>,
    eps: f64,
    stream: SphereEnumerator,
    scanned: usize,
}

impl DensitySearch {
    pub fn new(target: FinSeq<f64>, eps: f64, mode: EnumerationMode) -> Result<Self, SeqError> {
        let n = target.norm(super::Space::L2);
        if (n - 1.0).abs() > 1e-9 {
            return Err(SeqError::NotUnit(n));
        }
        if !(eps > 0.0) {
            return Err(SeqError::BadTolerance(eps));
        }
        Ok(DensitySearch {
            target,
            eps,
            stream: SphereEnumerator::new(mode),
            scanned: 0,
        })
    }

    /// Number of enumeration terms inspected so far.
    pub fn scanned(&self) -> usize {
        self.scanned
    }

    /// Continues the scan until `budget` terms have been inspected in total.
    pub fn search(&mut self, budget: usize) -> Result<Witness, SeqError> {
        while self.scanned < budget {
            let z = self.stream.next().expect("stream is unbounded");
            self.scanned += 1;
            let defect = z.distance_to(&self.target);
            if defect <= self.eps {
                return Ok(Witness {
                    index: z.index(),
                    defect,
                });
            }
        }
        Err(SeqError::NotFoundWithinBudget {
            eps: self.eps,
            budget,
        })
    }
}

/// Smallest `k <= budget` with `|target - zeta_k|_2 <= eps`.
pub fn density_witness(
    target: &FinSeq<f64>,
    eps: f64,
    mode: EnumerationMode,
    budget: usize,
) -> Result<Witness, SeqError> {
    DensitySearch::new(target.clone(), eps, mode)?.search(budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqspace::Space;

    fn e(l: usize) -> FinSeq<f64> {
        FinSeq::unit(l, 1.0)
    }

    fn dir(z: &SphereVector) -> Vec<(usize, i64)> {
        z.direction().iter().map(|(i, &v)| (i, v)).collect()
    }

    #[test]
    fn canonical_prefix() {
        let zs = enumerate_sphere(EnumerationMode::Canonical, 3);
        assert_eq!(dir(&zs[0]), vec![(1, 1)]);
        assert_eq!(dir(&zs[1]), vec![(1, -1)]);
        assert_eq!(dir(&zs[2]), vec![(2, 1)]);
        assert_eq!(
            zs.iter().map(SphereVector::index).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
    }

    #[test]
    fn no_singleton_starts_with_diagonal() {
        let z = &enumerate_sphere(EnumerationMode::NoSingleton, 1)[0];
        assert_eq!(dir(z), vec![(1, 1), (2, 1)]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((z.unit().get(1).unwrap() - h).abs() < 1e-15);
        assert!((z.unit().get(2).unwrap() - h).abs() < 1e-15);
    }

    #[test]
    fn adversarial_prefix_stays_in_plane() {
        let zs = enumerate_sphere(EnumerationMode::AdversarialPrefix(100), 130);
        assert!(zs[..100].iter().all(|z| z.max_index() <= 2));
        assert!(zs[100..].iter().any(|z| z.max_index() > 2));
    }

    #[test]
    fn heights_are_nondecreasing_and_distinct() {
        let zs = enumerate_sphere(EnumerationMode::Canonical, 3000);
        let mut seen = std::collections::HashSet::new();
        let mut last = 0;
        for z in &zs {
            let t = z
                .direction()
                .to_dense_f64(z.max_index())
                .iter()
                .map(|&v| v as i64)
                .collect::<Vec<_>>();
            let h = height(&t);
            assert!(h >= last);
            last = h;
            assert!(seen.insert(t));
            assert!((z.unit().norm(Space::L2) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn witness_examples() {
        let w = density_witness(&e(1), 0.5, EnumerationMode::Canonical, 10).unwrap();
        assert_eq!(
            w,
            Witness {
                index: 1,
                defect: 0.0
            }
        );

        let w = density_witness(&e(2), 0.25, EnumerationMode::NoSingleton, 100_000).unwrap();
        assert!(w.defect > 0.0 && w.defect <= 0.25);

        assert!(matches!(
            density_witness(&e(1), 1e-9, EnumerationMode::NoSingleton, 10),
            Err(SeqError::NotFoundWithinBudget { budget: 10, .. })
        ));
        assert!(matches!(
            density_witness(&FinSeq::unit(1, 2.0), 0.5, EnumerationMode::Canonical, 10),
            Err(SeqError::NotUnit(_))
        ));
    }

    #[test]
    fn search_resumes_where_it_stopped() {
        let mut s = DensitySearch::new(e(3), 1.0 / 6.0, EnumerationMode::NoSingleton).unwrap();
        assert!(s.search(5).is_err());
        assert_eq!(s.scanned(), 5);
        let resumed = s.search(1_000_000).unwrap();
        let fresh =
            density_witness(&e(3), 1.0 / 6.0, EnumerationMode::NoSingleton, 1_000_000).unwrap();
        assert_eq!(resumed, fresh);
    }

    #[test]
    fn mode_strings_round_trip() {
        for m in [
            EnumerationMode::Canonical,
            EnumerationMode::NoSingleton,
            EnumerationMode::AdversarialPrefix(7),
        ] {
            assert_eq!(m.to_string().parse::<EnumerationMode>().unwrap(), m);
        }
        assert!("adversarial:x".parse::<EnumerationMode>().is_err());
    }
}
