//! Cycle statistics of permutations: the exponent `E(g)`, counts of
//! permutations with many fixed points, and class-product ratios in `A_n`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::{class_size, cycle_type, factorial, inverse, is_even, is_even_type, is_permutation, lex_unrank, partitions, compose};

/// Largest `n` for exact fixed-point counts.
pub const MAX_COUNT_N: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct PermStat {
    pub n: usize,
    pub cycle_type: Vec<usize>,
    pub fixed_points: usize,
    /// `sigma[i - 1]`: points lying in cycles of length at most `i`.
    pub sigma: Vec<usize>,
    /// `log_n max(1, sigma[i - 1])`.
    pub log_sigma: Vec<f64>,
    /// `e_i`, the successive differences of `log_sigma`.
    pub e: Vec<f64>,
    /// `Σ e_i / i`.
    #[serde(rename = "E")]
    pub exponent: f64,
}

impl PermStat {
    pub fn e_sum(&self) -> f64 {
        self.e.iter().sum()
    }
}

pub fn perm_stat(p: &[u8]) -> Result<PermStat> {
    let n = p.len();
    if n < 2 || !is_permutation(p) {
        return Err(Error::InvalidPermutation(format!("need a permutation of at least 2 points, got {p:?}")));
    }
    let cycle_type = cycle_type(p);
    let mut sigma = vec![0usize; n];
    for &len in &cycle_type {
        sigma[len - 1] += len;
    }
    for i in 1..n {
        sigma[i] += sigma[i - 1];
    }
    let ln_n = (n as f64).ln();
    let log_sigma: Vec<f64> = sigma.iter().map(|&s| (s.max(1) as f64).ln() / ln_n).collect();
    let mut e = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &l in &log_sigma {
        e.push(l - prev);
        prev = l;
    }
    let exponent = e.iter().enumerate().map(|(i, &ei)| ei / (i + 1) as f64).sum();
    Ok(PermStat {
        n,
        fixed_points: sigma[0],
        cycle_type,
        sigma,
        log_sigma,
        e,
        exponent,
    })
}

/// Derangement numbers `D(0..=k)`.
pub fn derangements(k: usize) -> Vec<u128> {
    let mut d = vec![1u128, 0];
    for i in 2..=k {
        d.push((i as u128 - 1) * (d[i - 1] + d[i - 2]));
    }
    d.truncate(k + 1);
    d
}

/// Even derangements: `(D(k) + (-1)^{k-1}(k-1)) / 2`, with `D_e(0) = 1`.
pub fn even_derangements(k: usize) -> Vec<u128> {
    derangements(k)
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            if i == 0 {
                return 1;
            }
            let corr = (i as i128 - 1) * if i % 2 == 1 { 1 } else { -1 };
            ((d as i128 + corr) / 2) as u128
        })
        .collect()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MinFixedCount {
    pub n: usize,
    pub m: usize,
    /// Permutations of `S_n` with at least `m` fixed points.
    pub exact: u128,
    /// The same count inside `A_n`.
    pub even: u128,
    /// `Σ_{i=m}^{n} n!/i!`.
    pub factorial_sum: f64,
    /// `2·n!/m!`.
    pub bound: f64,
    /// `exact ≤ factorial_sum ≤ bound`; fails only at `m = 0`, where the sum
    /// is about `e·n!`.
    pub bound_holds: bool,
}

pub fn count_min_fixed(n: usize, m: usize) -> Result<MinFixedCount> {
    if m > n || n > MAX_COUNT_N {
        return Err(Error::InvalidParameter(format!("need 0 ≤ m ≤ n ≤ {MAX_COUNT_N}, got n = {n}, m = {m}")));
    }
    let d = derangements(n);
    let de = even_derangements(n);
    let binom = |k: usize| factorial(n) / (factorial(k) * factorial(n - k));
    let exact = (m..=n).map(|i| binom(i) * d[n - i]).sum();
    let even = (m..=n).map(|i| binom(i) * de[n - i]).sum();
    let factorial_sum = (m..=n).map(|i| (factorial(n) / factorial(i)) as f64).sum();
    let bound = 2.0 * (factorial(n) / factorial(m)) as f64;
    let bound_holds = exact as f64 <= factorial_sum && factorial_sum <= bound;
    Ok(MinFixedCount { n, m, exact, even, factorial_sum, bound, bound_holds })
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ChainCheck {
    pub n: usize,
    pub m: usize,
    /// `ln[C(n,m)·√((n−m)!)/√(n!)]`.
    pub lhs: f64,
    /// `ln[(e²n/m²)^{m/2}]`.
    pub rhs: f64,
    pub holds: bool,
}

/// `C(n,m)·√((n−m)!/n!) < (e²n/m²)^{m/2}`, compared in logarithms.
pub fn inequality_chain(n: usize, m: usize) -> Result<ChainCheck> {
    if m == 0 || m > n {
        return Err(Error::InvalidParameter(format!("need 1 ≤ m ≤ n, got n = {n}, m = {m}")));
    }
    let ln_binom = ln_factorial(n) - ln_factorial(m) - ln_factorial(n - m);
    let lhs = ln_binom + 0.5 * (ln_factorial(n - m) - ln_factorial(n));
    let rhs = m as f64 / 2.0 * (2.0 + (n as f64).ln() - 2.0 * (m as f64).ln());
    Ok(ChainCheck { n, m, lhs, rhs, holds: lhs < rhs })
}

/// The range `n^{2/3} ≤ m ≤ 2n/3` in integers.
pub fn chain_range(n: usize) -> std::ops::RangeInclusive<usize> {
    let lo = (1..=n).find(|&m| m * m * m >= n * n).unwrap_or(n);
    lo..=(2 * n / 3)
}

/// Irreducible character degrees of `S_n` by the hook length formula, one
/// per partition.
pub fn symmetric_degrees(n: usize) -> Result<Vec<u128>> {
    if n == 0 || n > MAX_COUNT_N {
        return Err(Error::InvalidParameter(format!("need 1 ≤ n ≤ {MAX_COUNT_N}, got {n}")));
    }
    Ok(partitions(n)
        .into_iter()
        .map(|lambda| {
            let conj: Vec<usize> = (0..lambda[0]).map(|j| lambda.iter().filter(|&&r| r > j).count()).collect();
            let hooks: u128 = lambda
                .iter()
                .enumerate()
                .flat_map(|(i, &row)| {
                    let conj = &conj;
                    (0..row).map(move |j| (row - j + conj[j] - i - 1) as u128)
                })
                .product();
            factorial(n) / hooks
        })
        .collect())
}

/// `Σ_{χ ∈ Irr(S_n)} χ(1)^{-s}`, a diagnostic for character-degree zeta sums.
pub fn degree_zeta(n: usize, s: f64) -> Result<f64> {
    Ok(symmetric_degrees(n)?.into_iter().map(|d| (d as f64).powf(-s)).sum())
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClassRatio {
    /// `|{x ∈ C1 : x⁻¹g ∈ C2}|`.
    pub count: u64,
    /// `|C1||C2|/|A_n|`.
    pub expected: f64,
    pub ratio: f64,
}

/// Representation count of `g` as `x1·x2` with `x_i` in the `S_n`-classes of
/// cycle types `c1`, `c2` (both inside `A_n`), relative to `|C1||C2|/|A_n|`.
pub fn class_count_ratio(n: usize, c1: &[usize], c2: &[usize], g: &[u8]) -> Result<ClassRatio> {
    if !(4..=9).contains(&n) {
        return Err(Error::InvalidParameter(format!("class ratios need 4 ≤ n ≤ 9, got {n}")));
    }
    for t in [c1, c2] {
        if t.iter().sum::<usize>() != n || !is_even_type(t) {
            return Err(Error::InvalidParameter(format!("{t:?} is not an even cycle type on {n} points")));
        }
    }
    if g.len() != n || !is_permutation(g) || !is_even(g) {
        return Err(Error::InvalidPermutation(format!("{g:?} is not an even permutation of {n} points")));
    }
    let mut t1 = c1.to_vec();
    let mut t2 = c2.to_vec();
    t1.sort_unstable_by(|a, b| b.cmp(a));
    t2.sort_unstable_by(|a, b| b.cmp(a));
    let count = (0..factorial(n) as usize)
        .map(|r| lex_unrank(n, r))
        .filter(|x| cycle_type(x) == t1 && cycle_type(&compose(&inverse(x), g)) == t2)
        .count() as u64;
    let expected = class_size(&t1) as f64 * class_size(&t2) as f64 / (factorial(n) / 2) as f64;
    Ok(ClassRatio { count, expected, ratio: count as f64 / expected })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::{fixed_points, identity, random_perm};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn n_cycle(n: usize) -> Vec<u8> {
        (0..n).map(|i| ((i + 1) % n) as u8).collect()
    }

    #[test]
    fn exponent_examples() {
        assert_eq!(perm_stat(&identity(7)).unwrap().exponent, 1.0);
        let c = perm_stat(&n_cycle(9)).unwrap();
        assert_eq!(c.exponent, 1.0 / 9.0);
        assert_eq!(c.e[8], 1.0);
        // (0 1)(2 3 4 5 6 7)
        let g = [1u8, 0, 3, 4, 5, 6, 7, 2];
        let s = perm_stat(&g).unwrap();
        assert!((s.e[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((s.e[5] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.exponent - 5.0 / 18.0).abs() < 1e-15);
        assert_eq!(s.sigma, vec![0, 2, 2, 2, 2, 8, 8, 8]);
        assert!(perm_stat(&[0]).is_err());
        assert!(perm_stat(&[0, 0]).is_err());
    }

    #[test]
    fn exponent_decreases_with_support() {
        for n in 4..20 {
            let id = perm_stat(&identity(n)).unwrap().exponent;
            let mut t = identity(n);
            t.swap(0, 1);
            let tr = perm_stat(&t).unwrap().exponent;
            let cyc = perm_stat(&n_cycle(n)).unwrap().exponent;
            assert!(id > tr && tr > cyc, "n = {n}");
        }
    }

    #[test]
    fn e_sums_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [5, 17, 64, 100] {
            for _ in 0..50 {
                let s = perm_stat(&random_perm(n, &mut rng)).unwrap();
                assert!((s.e_sum() - 1.0).abs() < 1e-12);
                assert!(s.e.iter().all(|&x| x >= -1e-15));
                assert!(s.exponent > 0.0 && s.exponent <= 1.0);
            }
        }
    }

    #[test]
    fn derangement_numbers() {
        assert_eq!(derangements(6), vec![1, 0, 1, 2, 9, 44, 265]);
        assert_eq!(even_derangements(5), vec![1, 0, 0, 2, 3, 24]);
    }

    #[test]
    fn min_fixed_examples() {
        let c = count_min_fixed(5, 3).unwrap();
        assert_eq!(c.exact, 11);
        assert_eq!(c.even, 1);
        assert_eq!(c.bound, 40.0);
        assert_eq!(count_min_fixed(6, 6).unwrap().exact, 1);
        assert_eq!(count_min_fixed(6, 0).unwrap().exact, 720);
        assert_eq!(count_min_fixed(6, 0).unwrap().even, 360);
        assert!(count_min_fixed(21, 3).is_err());
    }

    #[test]
    fn min_fixed_matches_enumeration() {
        for n in 1..=8 {
            let perms: Vec<Vec<u8>> = (0..factorial(n) as usize).map(|r| lex_unrank(n, r)).collect();
            for m in 0..=n {
                let c = count_min_fixed(n, m).unwrap();
                let all = perms.iter().filter(|p| fixed_points(p) >= m).count() as u128;
                let even = perms.iter().filter(|p| fixed_points(p) >= m && is_even(p)).count() as u128;
                assert_eq!((c.exact, c.even), (all, even), "n = {n}, m = {m}");
                assert_eq!(c.bound_holds, m > 0 || n < 2, "n = {n}, m = {m}");
            }
        }
    }

    #[test]
    fn chain() {
        for n in 2..=200 {
            for m in chain_range(n) {
                assert!(inequality_chain(n, m).unwrap().holds, "n = {n}, m = {m}");
            }
        }
        assert_eq!(chain_range(8), 4..=5);
    }

    #[test]
    fn degrees() {
        let d = symmetric_degrees(5).unwrap();
        let mut sorted = d.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 1, 4, 4, 5, 5, 6]);
        for n in 1..=9 {
            let sum: u128 = symmetric_degrees(n).unwrap().iter().map(|d| d * d).sum();
            assert_eq!(sum, factorial(n));
        }
        assert_eq!(degree_zeta(5, 0.0).unwrap(), 7.0);
        assert!(degree_zeta(7, 2.0).unwrap() > 2.0);
    }

    #[test]
    fn class_ratio_five_cycles() {
        let r = class_count_ratio(5, &[5], &[5], &identity(5)).unwrap();
        assert_eq!(r.count, 24);
        assert!((r.ratio - 2.5).abs() < 1e-12);
        assert!(class_count_ratio(3, &[3], &[3], &identity(3)).is_err());
        assert!(class_count_ratio(5, &[2, 1, 1, 1], &[5], &identity(5)).is_err());
    }
}
