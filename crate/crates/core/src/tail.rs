//! Exact hypergeometric probabilities for a uniformly random `b`-subset
//! meeting a fixed `a`-subset of an `n`-set, with certified comparisons
//! against exponential tail bounds.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest `n` for the cached binomial table.
pub const MAX_EXACT_N: usize = 2000;

/// Multiplier in the small-intersection bound.
pub const SMALL_INTERSECTION_FACTOR: f64 = 2.2;

/// Decimal enclosure of e²: `E2_LOWER < e² < E2_UPPER`.
const E2_LOWER: &str = "7.389056098930650227230427";
const E2_UPPER: &str = "7.389056098930650227230428";

/// Relative gap below which the floating-point comparison is trusted.
const FAST_MARGIN: f64 = 1e-9;

fn pascal() -> &'static Vec<Vec<BigUint>> {
    static TABLE: OnceLock<Vec<Vec<BigUint>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(MAX_EXACT_N + 1);
        rows.push(vec![BigUint::one()]);
        for n in 1..=MAX_EXACT_N {
            let prev = &rows[n - 1];
            let mut row = Vec::with_capacity(n + 1);
            row.push(BigUint::one());
            for k in 1..n {
                row.push(&prev[k - 1] + &prev[k]);
            }
            row.push(BigUint::one());
            rows.push(row);
        }
        rows
    })
}

/// Exact `C(n, k)`, zero outside `0 ≤ k ≤ n`.
pub fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    if n <= MAX_EXACT_N {
        return pascal()[n][k].clone();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Parameters of a query; `k` is the intersection threshold for tails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TailQuery {
    pub n: usize,
    pub a: usize,
    pub b: usize,
    pub k: Option<usize>,
}

impl TailQuery {
    pub fn new(n: usize, a: usize, b: usize) -> Result<Self> {
        if n == 0 || a > n || b > n {
            return Err(Error::InvalidParameter(format!("need 0 ≤ a, b ≤ n and n ≥ 1, got ({n}, {a}, {b})")));
        }
        Ok(TailQuery { n, a, b, k: None })
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = Some(k);
        self
    }

    /// Feasible intersection sizes.
    pub fn support(&self) -> std::ops::RangeInclusive<usize> {
        (self.a + self.b).saturating_sub(self.n)..=self.a.min(self.b)
    }
}

/// `Pr[|A ∩ B| = i]` as an exact rational.
pub fn point_prob(q: &TailQuery, i: usize) -> BigRational {
    let num = binomial(q.a, i) * binomial(q.n - q.a, q.b.saturating_sub(i));
    let num = if i > q.b { BigUint::zero() } else { num };
    BigRational::new(BigInt::from(num), BigInt::from(binomial(q.n, q.b)))
}

/// `Pr[|A ∩ B| ≤ k]` as an exact rational.
pub fn tail_prob(q: &TailQuery, k: usize) -> BigRational {
    let lo = *q.support().start();
    let hi = k.min(*q.support().end());
    if k < lo {
        return BigRational::zero();
    }
    let num: BigUint = (lo..=hi).map(|i| binomial(q.a, i) * binomial(q.n - q.a, q.b - i)).sum();
    BigRational::new(BigInt::from(num), BigInt::from(binomial(q.n, q.b)))
}

fn decimal(s: &str) -> BigRational {
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let digits: BigInt = format!("{int}{frac}").parse().expect("decimal literal");
    BigRational::new(digits, BigInt::from(10u32).pow(frac.len() as u32))
}

fn e2_bounds() -> &'static (BigRational, BigRational) {
    static B: OnceLock<(BigRational, BigRational)> = OnceLock::new();
    B.get_or_init(|| (decimal(E2_LOWER), decimal(E2_UPPER)))
}

/// Enclosure `lo ≤ e^t ≤ hi` for rational `t ≥ 0` from `terms` Taylor terms.
fn exp_enclosure(t: &BigRational, terms: usize) -> (BigRational, BigRational) {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for i in 0..terms {
        sum += &term;
        term = term * t / BigInt::from(i + 1);
    }
    // `term` is now t^K/K!; the remaining tail is at most term/(1 - t/(K+1)).
    let k1 = BigRational::from_integer(BigInt::from(terms + 1));
    let ratio = t / &k1;
    let tail = if ratio < BigRational::one() {
        term / (BigRational::one() - ratio)
    } else {
        // Not enough terms for a tail bound; signal with an unusable enclosure.
        return (sum.clone(), sum * BigInt::from(i64::MAX));
    };
    (sum.clone(), sum + tail)
}

/// Decides `p ≤ c·e^{-t}` exactly for rationals `p, c ≥ 0`, `t ≥ 0`.
fn le_scaled_exp_neg(p: &BigRational, c: &BigRational, t: &BigRational) -> bool {
    if p.is_zero() {
        return true;
    }
    let mut terms = 32 + 3 * t.to_f64().unwrap_or(0.0).ceil() as usize;
    // Equality is impossible for t > 0 (e^t is irrational); the cap only
    // guards against pathological inputs and resolves them conservatively.
    for _ in 0..8 {
        // p ≤ c/e^t  ⇔  p·e^t ≤ c
        let (lo, hi) = exp_enclosure(t, terms);
        if p * &hi <= *c {
            return true;
        }
        if p * &lo > *c {
            return false;
        }
        terms *= 2;
    }
    false
}

/// Outcome of comparing an exact probability against its bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct BoundCheck {
    pub exact: f64,
    pub bound: f64,
    /// Decided exactly: floating point when the gap is wide, rational
    /// arithmetic otherwise.
    pub holds: bool,
}

/// `Pr[A ∩ B = ∅]` against `e^{-ab/n}`.
pub fn disjoint_prob(q: &TailQuery) -> BoundCheck {
    let exact_r = if q.a + q.b > q.n {
        BigRational::zero()
    } else {
        BigRational::new(BigInt::from(binomial(q.n - q.a, q.b)), BigInt::from(binomial(q.n, q.b)))
    };
    let exact = exact_r.to_f64().unwrap_or(0.0);
    let t = BigRational::new(BigInt::from(q.a * q.b), BigInt::from(q.n));
    let bound = (-((q.a * q.b) as f64) / q.n as f64).exp();
    let holds = if exact <= bound * (1.0 - FAST_MARGIN) {
        true
    } else if exact >= bound * (1.0 + FAST_MARGIN) {
        false
    } else {
        le_scaled_exp_neg(&exact_r, &BigRational::one(), &t)
    };
    BoundCheck { exact, bound, holds }
}

/// `⌊ab/(e²n)⌋`, decided from the enclosure of e².
pub fn default_threshold(n: usize, a: usize, b: usize) -> Result<usize> {
    let (lo, hi) = e2_bounds();
    let ab = BigInt::from(a * b);
    let k_of = |e2: &BigRational| -> BigInt { (BigRational::from_integer(ab.clone()) / (e2 * BigInt::from(n))).floor().to_integer() };
    let (k1, k2) = (k_of(hi), k_of(lo));
    if k1 != k2 {
        return Err(Error::InvalidParameter(format!("ab/(e²n) too close to an integer for ({n}, {a}, {b})")));
    }
    Ok(k1.to_usize().expect("nonnegative threshold"))
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SmallIntersection {
    pub k: usize,
    pub exact_tail: f64,
    pub bound: f64,
    pub holds: bool,
    /// `k ≥ min(a, b)`: the tail is the whole distribution.
    pub degenerate: bool,
}

/// `Pr[|A ∩ B| ≤ k]` against `2.2·e^{-5ab/(2e²n)}`, with `k` defaulting to `⌊ab/(e²n)⌋`.
pub fn small_intersection_prob(q: &TailQuery) -> Result<SmallIntersection> {
    let k = match q.k {
        Some(k) => k,
        None => default_threshold(q.n, q.a, q.b)?,
    };
    let degenerate = k >= q.a.min(q.b);
    let exact_r = tail_prob(q, k);
    let exact_tail = exact_r.to_f64().unwrap_or(0.0);
    let x = (q.a * q.b) as f64 / q.n as f64;
    let e2 = std::f64::consts::E * std::f64::consts::E;
    let bound = SMALL_INTERSECTION_FACTOR * (-5.0 * x / (2.0 * e2)).exp();
    let holds = if exact_tail <= bound * (1.0 - FAST_MARGIN) {
        true
    } else if exact_tail >= bound * (1.0 + FAST_MARGIN) {
        false
    } else {
        // The bound decreases in t, so the largest t (smallest e²) gives a
        // lower bound on it: certify against that.
        let (lo, _) = e2_bounds();
        let t = BigRational::new(BigInt::from(5 * q.a * q.b), BigInt::from(2 * q.n)) / lo;
        let c = BigRational::new(BigInt::from(22), BigInt::from(10));
        le_scaled_exp_neg(&exact_r, &c, &t)
    };
    Ok(SmallIntersection { k, exact_tail, bound, holds, degenerate })
}

/// `(2e²/c)·n·ln n`.
pub fn size_threshold(n: usize, c: f64) -> Result<f64> {
    if n < 2 || c <= 0.0 {
        return Err(Error::InvalidParameter(format!("need n ≥ 2 and c > 0, got n = {n}, c = {c}")));
    }
    let e2 = std::f64::consts::E * std::f64::consts::E;
    Ok(2.0 * e2 / c * n as f64 * (n as f64).ln())
}

/// Balanced per-side size `⌈√(size_threshold(n, c))⌉`.
pub fn balanced_size(n: usize, c: f64) -> Result<usize> {
    Ok(size_threshold(n, c)?.sqrt().ceil() as usize)
}

/// Exhaustive sweep of both lemmas over `2 ≤ n ≤ max_n`, `1 ≤ a, b ≤ n`.
/// Returns the number of triples checked and any failures.
pub fn sweep(max_n: usize) -> Result<(usize, Vec<(usize, usize, usize)>)> {
    use rayon::prelude::*;
    let triples: Vec<(usize, usize, usize)> = (2..=max_n)
        .flat_map(|n| (1..=n).flat_map(move |a| (1..=n).map(move |b| (n, a, b))))
        .collect();
    let failures: Vec<(usize, usize, usize)> = triples
        .par_iter()
        .map(|&(n, a, b)| -> Result<Option<(usize, usize, usize)>> {
            let q = TailQuery::new(n, a, b)?;
            let ok = disjoint_prob(&q).holds && small_intersection_prob(&q)?.holds;
            Ok((!ok).then_some((n, a, b)))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    Ok((triples.len(), failures))
}

/// `gcd`-reduced rational as a string, for reports.
pub fn rational_string(r: &BigRational) -> String {
    let g = r.numer().gcd(r.denom());
    format!("{}/{}", r.numer() / &g, r.denom() / &g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(60, 30).to_string(), "118264581564861424");
        assert_eq!(binomial(5, 7), BigUint::zero());
        assert_eq!(binomial(2100, 2), BigUint::from(2100u32 * 2099 / 2));
    }

    #[test]
    fn disjoint_examples() {
        let r = disjoint_prob(&TailQuery::new(4, 2, 2).unwrap());
        assert!((r.exact - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.bound - (-1f64).exp()).abs() < 1e-15);
        assert!(r.holds);
        assert_eq!(disjoint_prob(&TailQuery::new(5, 3, 3).unwrap()).exact, 0.0);
        let r = disjoint_prob(&TailQuery::new(60, 10, 10).unwrap());
        assert!((r.bound - 0.18888).abs() < 1e-5);
        assert!(r.exact <= r.bound && r.holds);
    }

    #[test]
    fn small_intersection_examples() {
        let r = small_intersection_prob(&TailQuery::new(60, 30, 30).unwrap()).unwrap();
        assert_eq!(r.k, 2);
        assert!(r.holds && r.exact_tail <= r.bound);
        let r = small_intersection_prob(&TailQuery::new(4, 2, 2).unwrap()).unwrap();
        assert_eq!(r.k, 0);
        assert!((r.exact_tail - 1.0 / 6.0).abs() < 1e-15);
        let q = TailQuery::new(10, 10, 4).unwrap().with_k(3);
        assert_eq!(small_intersection_prob(&q).unwrap().exact_tail, 0.0);
        let q = TailQuery::new(10, 3, 4).unwrap().with_k(5);
        let r = small_intersection_prob(&q).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.exact_tail, 1.0);
    }

    #[test]
    fn distribution_sums_to_one() {
        for (n, a, b) in [(10, 3, 4), (60, 30, 30), (17, 17, 5), (9, 1, 9)] {
            let q = TailQuery::new(n, a, b).unwrap();
            let total: BigRational = q.support().map(|i| point_prob(&q, i)).sum();
            assert_eq!(total, BigRational::one());
            assert_eq!(tail_prob(&q, b), BigRational::one());
        }
    }

    #[test]
    fn enclosure_contains_exp() {
        for t in [0.0f64, 0.5, 3.0, 25.0] {
            let tr = BigRational::from_float(t).unwrap();
            let (lo, hi) = exp_enclosure(&tr, 120);
            assert!(lo.to_f64().unwrap() <= t.exp() * (1.0 + 1e-15));
            assert!(hi.to_f64().unwrap() >= t.exp() * (1.0 - 1e-15));
        }
        // exact decision near equality: e^{-1} vs slightly smaller and larger rationals
        let one = BigRational::one();
        let below = BigRational::new(BigInt::from(367879441171i64), BigInt::from(1_000_000_000_000i64));
        let above = BigRational::new(BigInt::from(367879441172i64), BigInt::from(1_000_000_000_000i64));
        assert!(le_scaled_exp_neg(&below, &one, &one));
        assert!(!le_scaled_exp_neg(&above, &one, &one));
    }

    #[test]
    fn thresholds() {
        let t = size_threshold(2520, 1.0).unwrap();
        assert!((t - 2.92e5).abs() / 2.92e5 < 0.01);
        assert_eq!(balanced_size(2520, 1.0).unwrap(), 541);
        assert!(size_threshold(60, 1.0).unwrap() > 3600.0);
        let half = size_threshold(500, 2.0).unwrap();
        assert!((half * 2.0 - size_threshold(500, 1.0).unwrap()).abs() < 1e-6);
        assert!(size_threshold(1, 1.0).is_err());
        assert_eq!(default_threshold(60, 30, 30).unwrap(), 2);
    }

    #[test]
    fn small_sweep_passes() {
        let (count, failures) = sweep(20).unwrap();
        assert_eq!(count, (2..=20).map(|n| n * n).sum::<usize>());
        assert!(failures.is_empty(), "{failures:?}");
    }
}
