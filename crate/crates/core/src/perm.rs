//! Permutations as image arrays, and symmetric and alternating groups indexed
//! by lexicographic rank instead of a multiplication table.

use rand::Rng;

use crate::error::{Error, Result};
use crate::group::GroupOps;

/// Largest degree for the rank-indexed groups, which keep every element's
/// image array in memory.
pub const MAX_RANKED_DEGREE: usize = 10;

/// `(p·q)[i] = q[p[i]]`: apply `p` first.
pub fn compose(p: &[u8], q: &[u8]) -> Vec<u8> {
    p.iter().map(|&i| q[i as usize]).collect()
}

pub fn inverse(p: &[u8]) -> Vec<u8> {
    let mut q = vec![0u8; p.len()];
    for (i, &j) in p.iter().enumerate() {
        q[j as usize] = i as u8;
    }
    q
}

pub fn identity(n: usize) -> Vec<u8> {
    (0..n as u8).collect()
}

pub fn is_permutation(p: &[u8]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&j| {
        let j = j as usize;
        j < p.len() && !std::mem::replace(&mut seen[j], true)
    })
}

/// Cycle lengths in nonincreasing order, fixed points included as 1s.
pub fn cycle_type(p: &[u8]) -> Vec<usize> {
    let mut seen = vec![false; p.len()];
    let mut out = Vec::new();
    for start in 0..p.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p[i] as usize;
            len += 1;
        }
        out.push(len);
    }
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

pub fn fixed_points(p: &[u8]) -> usize {
    p.iter().enumerate().filter(|&(i, &j)| i == j as usize).count()
}

pub fn fixed_set(p: &[u8]) -> u32 {
    p.iter()
        .enumerate()
        .filter(|&(i, &j)| i == j as usize)
        .fold(0, |m, (i, _)| m | 1 << i)
}

pub fn is_even(p: &[u8]) -> bool {
    let t = cycle_type(p);
    t.iter().map(|&l| l - 1).sum::<usize>() % 2 == 0
}

/// Whether a cycle type (with 1s) describes even permutations.
pub fn is_even_type(t: &[usize]) -> bool {
    t.iter().map(|&l| l - 1).sum::<usize>() % 2 == 0
}

/// Compact label such as `7`, `3.2.2` (fixed points omitted) or `1` for the identity.
pub fn cycle_type_label(t: &[usize]) -> String {
    let parts: Vec<String> = t.iter().filter(|&&l| l > 1).map(|l| l.to_string()).collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(".")
    }
}

/// Number of permutations of `t.iter().sum()` points with cycle type `t`.
pub fn class_size(t: &[usize]) -> u128 {
    let n: usize = t.iter().sum();
    let mut denom: u128 = 1;
    let mut i = 0;
    while i < t.len() {
        let mut j = i;
        while j < t.len() && t[j] == t[i] {
            j += 1;
        }
        let mult = (j - i) as u32;
        denom *= (t[i] as u128).pow(mult) * factorial(mult as usize);
        i = j;
    }
    factorial(n) / denom
}

pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// All partitions of `n` in nonincreasing part order, themselves sorted in
/// reverse lexicographic order (so `[n]` first).
pub fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in (1..=max.min(rest)).rev() {
            cur.push(part);
            go(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, n, &mut Vec::new(), &mut out);
    out
}

/// Lexicographic rank of `p` among permutations of its degree.
pub fn lex_rank(p: &[u8]) -> usize {
    let n = p.len();
    let mut rank = 0usize;
    for i in 0..n {
        let smaller = p[i + 1..].iter().filter(|&&q| q < p[i]).count();
        rank = rank * (n - i) + smaller;
    }
    rank
}

pub fn lex_unrank(n: usize, mut rank: usize) -> Vec<u8> {
    let mut digits = vec![0usize; n];
    for i in (0..n).rev() {
        let base = n - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<u8> = (0..n as u8).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

/// Uniform random permutation of `n` points.
pub fn random_perm<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<u8> {
    use rand::seq::SliceRandom;
    let mut p = identity(n);
    p.shuffle(rng);
    p
}

/// `S_n` with elements indexed by lexicographic rank; rank 0 is the identity.
#[derive(Clone, Debug)]
pub struct SymmetricGroup {
    n: usize,
    perms: Vec<Vec<u8>>,
}

impl SymmetricGroup {
    pub fn new(n: usize) -> Result<Self> {
        check_degree(n)?;
        let perms = (0..factorial(n) as usize).map(|r| lex_unrank(n, r)).collect();
        Ok(SymmetricGroup { n, perms })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn perm(&self, g: usize) -> &[u8] {
        &self.perms[g]
    }

    pub fn index_of(&self, p: &[u8]) -> usize {
        lex_rank(p)
    }
}

impl GroupOps for SymmetricGroup {
    fn order(&self) -> usize {
        self.perms.len()
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        lex_rank(&compose(&self.perms[a], &self.perms[b]))
    }

    fn inv(&self, a: usize) -> usize {
        lex_rank(&inverse(&self.perms[a]))
    }
}

/// `A_n` with element `i` the even permutation in lexicographic pair `i`.
///
/// Lexicographic ranks `2i` and `2i + 1` differ by a transposition of the
/// last two entries, so exactly one of them is even; index 0 is the identity.
#[derive(Clone, Debug)]
pub struct AlternatingGroup {
    n: usize,
    perms: Vec<Vec<u8>>,
}

impl AlternatingGroup {
    pub fn new(n: usize) -> Result<Self> {
        check_degree(n)?;
        let count = if n < 2 { 1 } else { factorial(n) as usize / 2 };
        let perms = (0..count)
            .map(|i| {
                let mut p = lex_unrank(n, if n < 2 { 0 } else { 2 * i });
                if !is_even(&p) {
                    p.swap(n - 2, n - 1);
                }
                p
            })
            .collect();
        Ok(AlternatingGroup { n, perms })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn perm(&self, g: usize) -> &[u8] {
        &self.perms[g]
    }

    /// Index of an even permutation.
    pub fn index_of(&self, p: &[u8]) -> usize {
        if self.n < 2 {
            0
        } else {
            lex_rank(p) / 2
        }
    }

    pub fn perms(&self) -> &[Vec<u8>] {
        &self.perms
    }
}

impl GroupOps for AlternatingGroup {
    fn order(&self) -> usize {
        self.perms.len()
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.index_of(&compose(&self.perms[a], &self.perms[b]))
    }

    fn inv(&self, a: usize) -> usize {
        self.index_of(&inverse(&self.perms[a]))
    }
}

fn check_degree(n: usize) -> Result<()> {
    if n > MAX_RANKED_DEGREE {
        return Err(Error::InvalidParameter(format!("degree {n} exceeds {MAX_RANKED_DEGREE}")));
    }
    Ok(())
}

/// Generators of `A_m` as image arrays (none for `m < 3`).
pub fn alternating_generators(m: usize) -> Vec<Vec<usize>> {
    if m < 3 {
        return vec![];
    }
    let three: Vec<usize> = (0..m).map(|i| if i < 3 { (i + 1) % 3 } else { i }).collect();
    let long: Vec<usize> = if m % 2 == 1 {
        (0..m).map(|i| (i + 1) % m).collect()
    } else {
        (0..m).map(|i| if i == 0 { 0 } else { i % (m - 1) + 1 }).collect()
    };
    vec![three, long]
}
