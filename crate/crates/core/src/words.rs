//! Free-group words and the word maps they induce on finite groups.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cover::product_cover_check;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupOps};
use crate::mask::SubsetMask;

/// Largest `|G|^rank` enumerated in exhaustive mode.
pub const EXHAUSTIVE_TUPLE_BUDGET: f64 = 1e8;

/// Sampled mode draws this many tuples per group element by default.
pub const DEFAULT_TRIALS_PER_ELEMENT: usize = 200;

const SAMPLE_CHUNK: usize = 4096;

/// A freely reduced, nontrivial word in the free group of rank `rank`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FreeWord {
    rank: usize,
    syllables: Vec<(usize, i64)>,
}

impl FreeWord {
    /// Freely reduces `raw`: drops zero exponents and merges adjacent
    /// syllables on the same generator until none remain.
    pub fn reduce(rank: usize, raw: &[(usize, i64)]) -> Result<Self> {
        if rank == 0 {
            return Err(Error::InvalidParameter("word rank must be at least 1".into()));
        }
        let mut stack: Vec<(usize, i64)> = Vec::with_capacity(raw.len());
        for &(gen, exp) in raw {
            if gen >= rank {
                return Err(Error::InvalidParameter(format!("generator {gen} out of range for rank {rank}")));
            }
            if exp == 0 {
                continue;
            }
            match stack.last_mut() {
                Some((g, e)) if *g == gen => {
                    *e += exp;
                    if *e == 0 {
                        stack.pop();
                    }
                }
                _ => stack.push((gen, exp)),
            }
        }
        if stack.is_empty() {
            return Err(Error::TrivialWord);
        }
        Ok(FreeWord { rank, syllables: stack })
    }

    /// The single-letter word `x₀` of rank 1.
    pub fn generator() -> Self {
        FreeWord { rank: 1, syllables: vec![(0, 1)] }
    }

    /// `x₀^k`.
    pub fn power(k: i64) -> Result<Self> {
        Self::reduce(1, &[(0, k)])
    }

    /// `x₀⁻¹ x₁⁻¹ x₀ x₁`.
    pub fn commutator() -> Self {
        FreeWord {
            rank: 2,
            syllables: vec![(0, -1), (1, -1), (0, 1), (1, 1)],
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn syllables(&self) -> &[(usize, i64)] {
        &self.syllables
    }

    /// Value of the word at `tuple`, multiplying left to right.
    pub fn evaluate<G: GroupOps + ?Sized>(&self, g: &G, tuple: &[usize]) -> Result<usize> {
        if tuple.len() != self.rank {
            return Err(Error::RankMismatch { expected: self.rank, found: tuple.len() });
        }
        Ok(self.eval_unchecked(g, tuple))
    }

    #[inline]
    pub(crate) fn eval_unchecked<G: GroupOps + ?Sized>(&self, g: &G, tuple: &[usize]) -> usize {
        self.syllables
            .iter()
            .fold(g.identity(), |acc, &(gen, exp)| g.mul(acc, g.pow(tuple[gen], exp)))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &(gen, exp) in &self.syllables {
            let letter = (b'a' + gen as u8) as char;
            if exp == 1 {
                write!(f, "{letter}")?;
            } else {
                write!(f, "{letter}^{exp}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for FreeWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses literals such as `a^-1b^-1ab` or `a^2`: letters `a`..`z` are
/// generators, `^` introduces a signed exponent. The rank is one more than
/// the highest letter used.
impl FromStr for FreeWord {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let fail = |reason: &str| Error::WordParse { input: input.to_string(), reason: reason.to_string() };
        let chars: Vec<char> = input.chars().filter(|c| !c.is_whitespace()).collect();
        let mut raw = Vec::new();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if !c.is_ascii_lowercase() {
                return Err(fail(&format!("unexpected {c:?}")));
            }
            let gen = (c as u8 - b'a') as usize;
            i += 1;
            let mut exp = 1i64;
            if i < chars.len() && chars[i] == '^' {
                i += 1;
                let start = i;
                if i < chars.len() && (chars[i] == '-' || chars[i] == '+') {
                    i += 1;
                }
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let digits: String = chars[start..i].iter().collect();
                exp = digits.parse().map_err(|_| fail("bad exponent"))?;
            }
            raw.push((gen, exp));
        }
        if raw.is_empty() {
            return Err(fail("empty word"));
        }
        let rank = raw.iter().map(|&(g, _)| g + 1).max().unwrap_or(1);
        FreeWord::reduce(rank, &raw)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageMode {
    /// Enumerate all of `G^rank`.
    Exhaustive,
    /// Uniform random tuples; the image is flagged inexact.
    Sampled { trials: usize, seed: u64 },
}

impl ImageMode {
    pub fn sampled_default(g: &FiniteGroup, seed: u64) -> Self {
        ImageMode::Sampled { trials: DEFAULT_TRIALS_PER_ELEMENT * g.order(), seed }
    }
}

/// `w(G)`, closed under conjugation.
#[derive(Clone, Debug, Serialize)]
pub struct WordImage {
    pub word: FreeWord,
    #[serde(serialize_with = "crate::report::mask_as_list")]
    pub image: SubsetMask,
    /// True when computed by exhaustive enumeration.
    pub exact: bool,
}

fn tuple_count(n: usize, rank: usize) -> f64 {
    (n as f64).powi(rank as i32)
}

/// Image of the word map `G^rank → G`.
pub fn word_image(g: &FiniteGroup, w: &FreeWord, mode: ImageMode) -> Result<WordImage> {
    let n = g.order();
    let k = w.rank();
    let raw = match mode {
        ImageMode::Exhaustive => {
            let tuples = tuple_count(n, k);
            if tuples > EXHAUSTIVE_TUPLE_BUDGET {
                return Err(Error::EnumerationBudget { tuples, budget: EXHAUSTIVE_TUPLE_BUDGET });
            }
            (0..n)
                .into_par_iter()
                .fold(
                    || SubsetMask::empty(n),
                    |mut acc, first| {
                        let mut tuple = vec![0usize; k];
                        tuple[0] = first;
                        loop {
                            acc.insert(w.eval_unchecked(g, &tuple));
                            // odometer over coordinates 1..k
                            let mut pos = 1;
                            while pos < k {
                                tuple[pos] += 1;
                                if tuple[pos] < n {
                                    break;
                                }
                                tuple[pos] = 0;
                                pos += 1;
                            }
                            if pos >= k {
                                break;
                            }
                        }
                        acc
                    },
                )
                .reduce(|| SubsetMask::empty(n), |a, b| a.union(&b))
        }
        ImageMode::Sampled { trials, seed } => {
            let chunks = trials.div_ceil(SAMPLE_CHUNK);
            let mut raw = (0..chunks)
                .into_par_iter()
                .map(|c| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(c as u64);
                    let count = SAMPLE_CHUNK.min(trials - c * SAMPLE_CHUNK);
                    let mut acc = SubsetMask::empty(n);
                    let mut tuple = vec![0usize; k];
                    for _ in 0..count {
                        for t in tuple.iter_mut() {
                            *t = rng.gen_range(0..n);
                        }
                        acc.insert(w.eval_unchecked(g, &tuple));
                    }
                    acc
                })
                .reduce(|| SubsetMask::empty(n), |a, b| a.union(&b));
            raw.insert(0);
            raw
        }
    };
    Ok(WordImage {
        word: w.clone(),
        image: g.conjugation_closure(&raw),
        exact: matches!(mode, ImageMode::Exhaustive),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct WaringResult {
    pub holds: bool,
    #[serde(serialize_with = "crate::report::mask_as_list")]
    pub uncovered: SubsetMask,
    pub image1_size: usize,
    pub image2_size: usize,
}

/// Whether `w1(G)·w2(G) = G`, with exhaustively computed images.
pub fn waring_check(g: &FiniteGroup, w1: &FreeWord, w2: &FreeWord) -> Result<WaringResult> {
    let i1 = word_image(g, w1, ImageMode::Exhaustive)?;
    let i2 = if w1 == w2 { i1.clone() } else { word_image(g, w2, ImageMode::Exhaustive)? };
    let uncovered = product_cover_check(g, &i1.image, &i2.image, &g.full_mask());
    Ok(WaringResult {
        holds: uncovered.is_empty(),
        uncovered,
        image1_size: i1.image.count(),
        image2_size: i2.image.count(),
    })
}
