//! Stratified thin covers of `A_n` (5 ≤ n ≤ 9) by word-image classes.
//!
//! `A_n` is split by fixed-point count `f`:
//! * `f³ ≤ n²` (at most `n^{2/3}` fixed points): one thin pair sampled from
//!   the fewest-cycle `S_n`-classes in the word images;
//! * `n^{2/3} < f < ⌈2n/3⌉`: one stratum per fixed set `T`, covered inside
//!   the alternating group on the complement of `T`;
//! * `f ≥ ⌈2n/3⌉`: the tail, patched element by element.
//!
//! Elements no class pair can reach, and anything a sampler left uncovered,
//! are patched with a representation from the word images. The final cover
//! is certified by an exhaustive product check over `A_n`.

use std::collections::{BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cover::{find_representation, has_representation, product_cover_check, product_set};
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupOps, DEFAULT_SIZE_CAP};
use crate::mask::SubsetMask;
use crate::perm::{
    alternating_generators, class_size, compose, cycle_type, cycle_type_label, factorial, identity, inverse, is_even,
    random_perm, AlternatingGroup,
};
use crate::perm_stats::count_min_fixed;
use crate::report::mask_as_list;
use crate::sampler::sample_thin_pair;
use crate::words::{word_image, FreeWord, ImageMode, EXHAUSTIVE_TUPLE_BUDGET};

/// Largest degree whose word images are enumerated exhaustively.
pub const MAX_EXHAUSTIVE_DEGREE: usize = 7;

type CycleType = Vec<usize>;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct StratifiedParams {
    /// Thin-pair side is `min(|C|, ⌈factor·√(2e²|A| ln|A|)⌉)` for a class `C`
    /// of the alternating group `A` being covered.
    pub size_factor: f64,
    pub max_attempts: usize,
    /// Random tuples per sampled word image (degrees above 7).
    pub sample_trials: usize,
}

impl Default for StratifiedParams {
    fn default() -> Self {
        StratifiedParams { size_factor: 1.0, max_attempts: 20, sample_trials: 200_000 }
    }
}

/// A word image in `A_m` as the set of cycle types it meets. Word images are
/// invariant under every automorphism, so for `A_m` they are unions of
/// `S_m`-classes.
#[derive(Clone, Debug)]
pub struct CycleImage {
    pub types: BTreeSet<CycleType>,
    pub exact: bool,
}

fn perm_pow(p: &[u8], e: i64) -> Vec<u8> {
    let mut base = if e < 0 { inverse(p) } else { p.to_vec() };
    let mut k = e.unsigned_abs();
    let mut acc = identity(p.len());
    while k > 0 {
        if k & 1 == 1 {
            acc = compose(&acc, &base);
        }
        base = compose(&base, &base);
        k >>= 1;
    }
    acc
}

/// Evaluates `w` on a tuple of permutations, left to right.
pub fn evaluate_on_perms(w: &FreeWord, tuple: &[Vec<u8>]) -> Result<Vec<u8>> {
    if tuple.len() != w.rank() {
        return Err(Error::RankMismatch { expected: w.rank(), found: tuple.len() });
    }
    let n = tuple.first().map_or(0, |p| p.len());
    Ok(w
        .syllables()
        .iter()
        .fold(identity(n), |acc, &(g, e)| compose(&acc, &perm_pow(&tuple[g], e))))
}

fn random_even<R: Rng>(m: usize, rng: &mut R) -> Vec<u8> {
    let mut p = random_perm(m, rng);
    if !is_even(&p) {
        p.swap(0, 1);
    }
    p
}

/// `w(A_m)` as cycle types: exhaustive for `m ≤ 7` within the tuple budget,
/// otherwise `trials` uniform tuples (flagged inexact).
pub fn alternating_word_image(m: usize, w: &FreeWord, trials: usize, seed: u64) -> Result<CycleImage> {
    if m < 3 {
        return Ok(CycleImage { types: BTreeSet::from([vec![1; m]]), exact: true });
    }
    let order = (factorial(m) / 2) as f64;
    if m <= MAX_EXHAUSTIVE_DEGREE && order.powi(w.rank() as i32) <= EXHAUSTIVE_TUPLE_BUDGET {
        let g = FiniteGroup::from_permutations(&format!("A{m}"), m, &alternating_generators(m), DEFAULT_SIZE_CAP)?;
        let img = word_image(&g, w, ImageMode::Exhaustive)?;
        let types = img
            .image
            .iter()
            .map(|x| {
                let p: Vec<u8> = g.perm_image(x).expect("permutation group").iter().map(|&v| v as u8).collect();
                cycle_type(&p)
            })
            .collect();
        return Ok(CycleImage { types, exact: true });
    }
    const CHUNK: usize = 4096;
    let chunks = trials.div_ceil(CHUNK);
    let mut types: BTreeSet<CycleType> = (0..chunks)
        .into_par_iter()
        .map(|c| -> Result<BTreeSet<CycleType>> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut local = BTreeSet::new();
            for _ in 0..CHUNK.min(trials - c * CHUNK) {
                let tuple: Vec<Vec<u8>> = (0..w.rank()).map(|_| random_even(m, &mut rng)).collect();
                local.insert(cycle_type(&evaluate_on_perms(w, &tuple)?));
            }
            Ok(local)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    types.insert(vec![1; m]);
    Ok(CycleImage { types, exact: false })
}

/// Mixes a master seed with a stratum tag (splitmix64 finalizer).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Thin-pair side for a class of size `class` inside a group of order `order`.
fn thin_size(class: usize, order: usize, factor: f64) -> usize {
    if order < 2 {
        return class;
    }
    let e2 = std::f64::consts::E.powi(2);
    let n = order as f64;
    let s = (factor * (2.0 * e2 * n * n.ln()).sqrt()).ceil() as usize;
    s.clamp(1, class.max(1))
}

/// Fewest cycles (fixed points counted), ties to the larger class; never the identity.
fn choose_class(image: &CycleImage) -> Option<CycleType> {
    image
        .types
        .iter()
        .filter(|t| t.iter().any(|&l| l > 1))
        .min_by(|a, b| a.len().cmp(&b.len()).then_with(|| class_size(b).cmp(&class_size(a))))
        .cloned()
}

#[derive(Clone, Debug, Serialize)]
pub struct StratumReport {
    /// Points fixed by every element of the stratum; empty for the main part.
    pub fixed_set: Vec<usize>,
    /// Degree of the alternating group the stratum is covered in.
    pub degree: usize,
    pub target: usize,
    pub class1: Option<String>,
    pub class2: Option<String>,
    pub x_size: usize,
    pub y_size: usize,
    pub attempts: usize,
    pub sampler_certified: bool,
    /// Target elements outside `C1·C2`, left for patching.
    pub unreachable: usize,
    /// Target elements the best sampled pair missed, left for patching.
    pub missed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct StratifiedReport {
    pub n: usize,
    pub word1: String,
    pub word2: String,
    pub seed: u64,
    pub params: StratifiedParams,
    pub images_exact: bool,
    pub main: StratumReport,
    pub strata: Vec<StratumReport>,
    pub tail_size: usize,
    /// `count_min_fixed(n, ⌈2n/3⌉)` restricted to `A_n`.
    pub tail_expected: u128,
    pub tail_patched: usize,
    pub residual_patched: usize,
    pub x_size: usize,
    pub y_size: usize,
    /// `√(n!·ln n!)`.
    pub reference: f64,
    pub x_ratio: f64,
    pub y_ratio: f64,
    pub x_in_image: bool,
    pub y_in_image: bool,
    pub certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StratifiedCover {
    #[serde(serialize_with = "mask_as_list")]
    pub x: SubsetMask,
    #[serde(serialize_with = "mask_as_list")]
    pub y: SubsetMask,
    pub report: StratifiedReport,
}

struct Part {
    report: StratumReport,
    x: Vec<usize>,
    y: Vec<usize>,
}

/// Covers the fixed-point-free elements of `A_m` (or `target`, when given)
/// with a thin pair from the chosen classes. Returns local indices.
#[allow(clippy::too_many_arguments)]
fn cover_local(
    a: &AlternatingGroup,
    target: &SubsetMask,
    img1: &CycleImage,
    img2: &CycleImage,
    params: &StratifiedParams,
    seed: u64,
    fixed_set: Vec<usize>,
    to_global: impl Fn(usize) -> usize,
) -> Result<Part> {
    let mut report = StratumReport {
        fixed_set,
        degree: a.degree(),
        target: target.count(),
        class1: None,
        class2: None,
        x_size: 0,
        y_size: 0,
        attempts: 0,
        sampler_certified: false,
        unreachable: 0,
        missed: 0,
        skipped: None,
    };
    let (Some(t1), Some(t2)) = (choose_class(img1), choose_class(img2)) else {
        report.skipped = Some("word image has no nontrivial class".into());
        report.unreachable = target.count();
        return Ok(Part { report, x: vec![], y: vec![] });
    };
    report.class1 = Some(cycle_type_label(&t1));
    report.class2 = Some(cycle_type_label(&t2));
    let n = a.order();
    let class_mask = |t: &CycleType| SubsetMask::from_indices(n, (0..n).filter(|&g| &cycle_type(a.perm(g)) == t));
    let c1 = class_mask(&t1);
    let c2 = class_mask(&t2);
    let reach = product_set(a, &c1, &c2);
    let reachable = target.intersection(&reach);
    report.unreachable = target.count() - reachable.count();
    if reachable.is_empty() {
        report.skipped = Some("class product misses the target".into());
        return Ok(Part { report, x: vec![], y: vec![] });
    }
    let s1 = thin_size(c1.count(), n, params.size_factor);
    let s2 = thin_size(c2.count(), n, params.size_factor);
    let r = sample_thin_pair(a, &c1, &c2, &reachable, s1, s2, seed, params.max_attempts)?;
    report.x_size = r.x0.count();
    report.y_size = r.y0.count();
    report.attempts = r.attempts;
    report.sampler_certified = r.certified;
    report.missed = r.uncovered.count();
    Ok(Part {
        report,
        x: r.x0.iter().map(&to_global).collect(),
        y: r.y0.iter().map(&to_global).collect(),
    })
}

/// Embeds a permutation of the points `comp` (given on `0..m`) into `S_n`.
fn embed(p: &[u8], comp: &[usize], n: usize) -> Vec<u8> {
    let mut q = identity(n);
    for (i, &c) in comp.iter().enumerate() {
        q[c] = comp[p[i] as usize] as u8;
    }
    q
}

fn pad(t: &[usize], f: usize) -> CycleType {
    let mut out = t.to_vec();
    out.extend(std::iter::repeat_n(1, f));
    out.sort_unstable_by(|a, b| b.cmp(a));
    out
}

/// Certified cover `A_n = X·Y` with `X ⊆ w1(A_n)`, `Y ⊆ w2(A_n)`; a cover
/// that fails the final exhaustive check is an error.
pub fn stratified_thin_base(
    n: usize,
    w1: &FreeWord,
    w2: &FreeWord,
    params: StratifiedParams,
    seed: u64,
) -> Result<StratifiedCover> {
    if !(5..=9).contains(&n) {
        return Err(Error::InvalidParameter(format!("stratified covers need 5 ≤ n ≤ 9, got {n}")));
    }
    if params.max_attempts == 0 || params.size_factor <= 0.0 {
        return Err(Error::InvalidParameter("attempts and size factor must be positive".into()));
    }
    let a = AlternatingGroup::new(n)?;
    let order = a.order();
    let types: Vec<CycleType> = a.perms().iter().map(|p| cycle_type(p)).collect();
    let fixed: Vec<usize> = types.iter().map(|t| t.iter().filter(|&&l| l == 1).count()).collect();

    let tail_start = (2 * n).div_ceil(3);
    let in_main = |f: usize| f * f * f <= n * n;
    let stratum_sizes: Vec<usize> = (0..tail_start).filter(|&f| !in_main(f)).collect();

    // Word images, per degree, shared by every stratum of that degree.
    let mut degrees: Vec<usize> = stratum_sizes.iter().map(|&f| n - f).collect();
    degrees.push(n);
    let mut images: HashMap<usize, (CycleImage, CycleImage)> = HashMap::new();
    for &m in &degrees {
        let i1 = alternating_word_image(m, w1, params.sample_trials, derive_seed(seed, 1000 + m as u64))?;
        let i2 = if w1 == w2 {
            i1.clone()
        } else {
            alternating_word_image(m, w2, params.sample_trials, derive_seed(seed, 2000 + m as u64))?
        };
        images.insert(m, (i1, i2));
    }
    let images_exact = images.values().all(|(a, b)| a.exact && b.exact);

    // w_i(A_n) as masks: the image of A_n itself together with every smaller
    // image embedded (a substitution from A_m ⊆ A_n stays in w(A_n)).
    let mut w_types: [BTreeSet<CycleType>; 2] = [BTreeSet::new(), BTreeSet::new()];
    for (&m, (i1, i2)) in &images {
        for (side, img) in [i1, i2].into_iter().enumerate() {
            w_types[side].extend(img.types.iter().map(|t| pad(t, n - m)));
        }
    }
    let w_mask = |side: usize| SubsetMask::from_indices(order, (0..order).filter(|&g| w_types[side].contains(&types[g])));
    let (wm1, wm2) = (w_mask(0), w_mask(1));

    // Main part: at most n^{2/3} fixed points.
    let z_main = SubsetMask::from_indices(order, (0..order).filter(|&g| in_main(fixed[g])));
    let (mi1, mi2) = &images[&n];
    let main = cover_local(&a, &z_main, mi1, mi2, &params, derive_seed(seed, 0), vec![], |g| g)?;

    // Strata: one per fixed set T.
    let mut sets: Vec<u32> = Vec::new();
    for &f in &stratum_sizes {
        sets.extend((0u32..1 << n).filter(|t| t.count_ones() as usize == f));
    }
    let local_groups: HashMap<usize, AlternatingGroup> = stratum_sizes
        .iter()
        .map(|&f| Ok((n - f, AlternatingGroup::new(n - f)?)))
        .collect::<Result<_>>()?;
    let strata: Vec<Part> = sets
        .par_iter()
        .map(|&t| {
            let fixed_set: Vec<usize> = (0..n).filter(|&i| t >> i & 1 == 1).collect();
            let comp: Vec<usize> = (0..n).filter(|&i| t >> i & 1 == 0).collect();
            let m = comp.len();
            let local = &local_groups[&m];
            let target = SubsetMask::from_indices(
                local.order(),
                (0..local.order()).filter(|&g| cycle_type(local.perm(g)).iter().all(|&l| l > 1)),
            );
            let (i1, i2) = &images[&m];
            let to_global = |g: usize| a.index_of(&embed(local.perm(g), &comp, n));
            if local.order() < 2 {
                let report = StratumReport {
                    fixed_set,
                    degree: m,
                    target: target.count(),
                    class1: None,
                    class2: None,
                    x_size: 0,
                    y_size: 0,
                    attempts: 0,
                    sampler_certified: false,
                    unreachable: target.count(),
                    missed: 0,
                    skipped: Some("alternating group on the complement is trivial".into()),
                };
                return Ok(Part { report, x: vec![], y: vec![] });
            }
            cover_local(local, &target, i1, i2, &params, derive_seed(seed, t as u64), fixed_set, to_global)
        })
        .collect::<Result<_>>()?;

    let mut x = SubsetMask::from_indices(order, main.x.iter().copied());
    let mut y = SubsetMask::from_indices(order, main.y.iter().copied());
    for s in &strata {
        x.union_with(&SubsetMask::from_indices(order, s.x.iter().copied()));
        y.union_with(&SubsetMask::from_indices(order, s.y.iter().copied()));
    }

    // Patching: tail elements and anything still uncovered.
    let tail = SubsetMask::from_indices(order, (0..order).filter(|&g| fixed[g] >= tail_start));
    let tail_expected = count_min_fixed(n, tail_start)?.even;
    let uncovered = product_cover_check(&a, &x, &y, &SubsetMask::full(order));
    let (mut tail_patched, mut residual_patched) = (0, 0);
    for z in uncovered.iter() {
        if has_representation(&a, &x, &y, z) {
            continue;
        }
        let (p, q) = find_representation(&a, &wm1, &wm2, z).ok_or(Error::MissingRepresentation { element: z })?;
        x.insert(p);
        y.insert(q);
        if tail.contains(z) {
            tail_patched += 1;
        } else {
            residual_patched += 1;
        }
    }

    let certified = product_cover_check(&a, &x, &y, &SubsetMask::full(order)).is_empty();
    if !certified {
        return Err(Error::BoundViolation(format!("stratified cover of A{n} failed exhaustive verification")));
    }
    let reference = {
        let nf = factorial(n) as f64;
        (nf * nf.ln()).sqrt()
    };
    let report = StratifiedReport {
        n,
        word1: w1.to_string(),
        word2: w2.to_string(),
        seed,
        params,
        images_exact,
        main: main.report,
        strata: strata.into_iter().map(|s| s.report).collect(),
        tail_size: tail.count(),
        tail_expected,
        tail_patched,
        residual_patched,
        x_size: x.count(),
        y_size: y.count(),
        reference,
        x_ratio: x.count() as f64 / reference,
        y_ratio: y.count() as f64 / reference,
        x_in_image: x.is_subset(&wm1),
        y_in_image: y.is_subset(&wm2),
        certified,
    };
    Ok(StratifiedCover { x, y, report })
}
