//! Random thin pairs `X0 ⊆ X`, `Y0 ⊆ Y` with `Z ⊆ X0·Y0`, and the patching
//! step that completes a partial cover from word images.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cover::{find_representation, has_representation, product_cover_check};
use crate::error::{Error, Result};
use crate::group::GroupOps;
use crate::mask::SubsetMask;
use crate::report::mask_as_list;

/// RNG for one side of attempt `attempt` under `seed`: ChaCha stream
/// `2·attempt + side`, so a draw depends neither on earlier attempts nor on
/// the other side's size.
pub fn attempt_rng(seed: u64, attempt: u64, side: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 * attempt + side);
    rng
}

/// Attempt `attempt` of the sampler. Partial Fisher–Yates draws nested
/// subsets as the size grows under a fixed stream.
fn draw_pair(x: &SubsetMask, y: &SubsetMask, x0: usize, y0: usize, seed: u64, attempt: u64) -> Result<(SubsetMask, SubsetMask)> {
    let xs = random_subset(x, x0, &mut attempt_rng(seed, attempt, 0))?;
    let ys = random_subset(y, y0, &mut attempt_rng(seed, attempt, 1))?;
    Ok((xs, ys))
}

/// Uniform `k`-subset of `from` by partial Fisher–Yates.
pub fn random_subset<R: Rng + ?Sized>(from: &SubsetMask, k: usize, rng: &mut R) -> Result<SubsetMask> {
    let mut pool = from.to_vec();
    if k > pool.len() {
        return Err(Error::SampleTooLarge { requested: k, available: pool.len() });
    }
    let (chosen, _) = pool.partial_shuffle(rng, k);
    Ok(SubsetMask::from_indices(from.len(), chosen.iter().copied()))
}

#[derive(Clone, Debug, Serialize)]
pub struct ThinPairResult {
    #[serde(serialize_with = "mask_as_list")]
    pub x0: SubsetMask,
    #[serde(serialize_with = "mask_as_list")]
    pub y0: SubsetMask,
    /// Attempts drawn (the certified one included).
    pub attempts: usize,
    pub seed: u64,
    pub uncovered_history: Vec<usize>,
    /// `Z ∖ X0·Y0` for the returned pair.
    #[serde(serialize_with = "mask_as_list")]
    pub uncovered: SubsetMask,
    pub certified: bool,
    /// False when `Z ⊄ X·Y`, so no thinning can succeed.
    pub feasible: bool,
}

impl ThinPairResult {
    /// Fraction of `Z` covered on each attempt.
    pub fn coverage_fractions(&self, z_size: usize) -> Vec<f64> {
        self.uncovered_history
            .iter()
            .map(|&u| if z_size == 0 { 1.0 } else { 1.0 - u as f64 / z_size as f64 })
            .collect()
    }
}

/// Draws independent uniform `x0`-subsets of `X` and `y0`-subsets of `Y`
/// until `Z ⊆ X0·Y0`, for at most `max_attempts` attempts.
///
/// Returns the first certified pair, or else the attempt with the fewest
/// uncovered elements. A full-set pretest detects `Z ⊄ X·Y` up front; the
/// result then carries one attempt and `feasible = false`.
#[allow(clippy::too_many_arguments)]
pub fn sample_thin_pair<G: GroupOps>(
    g: &G,
    x: &SubsetMask,
    y: &SubsetMask,
    z: &SubsetMask,
    x0: usize,
    y0: usize,
    seed: u64,
    max_attempts: usize,
) -> Result<ThinPairResult> {
    for m in [x, y, z] {
        if m.len() != g.order() {
            return Err(Error::MaskLength { expected: g.order(), found: m.len() });
        }
    }
    for (k, set) in [(x0, x), (y0, y)] {
        if k > set.count() {
            return Err(Error::SampleTooLarge { requested: k, available: set.count() });
        }
    }
    if max_attempts == 0 {
        return Err(Error::InvalidParameter("max_attempts must be positive".into()));
    }
    let feasible = product_cover_check(g, x, y, z).is_empty();
    let budget = if feasible { max_attempts } else { 1 };
    let mut history = Vec::new();
    let mut best: Option<(SubsetMask, SubsetMask, SubsetMask)> = None;
    for attempt in 0..budget {
        let (xs, ys) = draw_pair(x, y, x0, y0, seed, attempt as u64)?;
        let uncovered = product_cover_check(g, &xs, &ys, z);
        history.push(uncovered.count());
        let done = uncovered.is_empty();
        if best.as_ref().is_none_or(|(_, _, u)| uncovered.count() < u.count()) {
            best = Some((xs, ys, uncovered));
        }
        if done {
            break;
        }
    }
    let (x0s, y0s, uncovered) = best.expect("at least one attempt");
    Ok(ThinPairResult {
        certified: uncovered.is_empty(),
        x0: x0s,
        y0: y0s,
        attempts: history.len(),
        seed,
        uncovered_history: history,
        uncovered,
        feasible,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub size: usize,
    /// Covered fraction of `Z` per attempt, all attempts drawn.
    pub fractions: Vec<f64>,
    pub mean: f64,
    pub certified_attempts: usize,
}

/// Coverage of `Z` by `X0·Y0` with `|X0| = |Y0| = size` for each size,
/// `attempts` draws each and no early stop. Attempt `i` uses the same
/// streams at every size, so its subsets grow by inclusion.
pub fn coverage_sweep<G: GroupOps + Sync>(
    g: &G,
    x: &SubsetMask,
    y: &SubsetMask,
    z: &SubsetMask,
    sizes: &[usize],
    seed: u64,
    attempts: usize,
) -> Result<Vec<SweepRow>> {
    use rayon::prelude::*;
    let total = z.count();
    sizes
        .iter()
        .map(|&size| {
            let uncovered = (0..attempts as u64)
                .into_par_iter()
                .map(|a| {
                    let (xs, ys) = draw_pair(x, y, size, size, seed, a)?;
                    Ok(product_cover_check(g, &xs, &ys, z).count())
                })
                .collect::<Result<Vec<usize>>>()?;
            let fractions: Vec<f64> =
                uncovered.iter().map(|&u| if total == 0 { 1.0 } else { 1.0 - u as f64 / total as f64 }).collect();
            Ok(SweepRow {
                size,
                mean: fractions.iter().sum::<f64>() / fractions.len().max(1) as f64,
                certified_attempts: uncovered.iter().filter(|&&u| u == 0).count(),
                fractions,
            })
        })
        .collect()
}

/// Rechecks `z ∈ X·Y` by direct search for a sampled `fraction` of `Z`
/// (at least one element). Returns the number of elements checked, or the
/// first failure.
pub fn spot_check<G: GroupOps>(
    g: &G,
    x: &SubsetMask,
    y: &SubsetMask,
    z: &SubsetMask,
    fraction: f64,
    seed: u64,
) -> std::result::Result<usize, usize> {
    let members = z.to_vec();
    if members.is_empty() {
        return Ok(0);
    }
    let k = ((members.len() as f64 * fraction).ceil() as usize).clamp(1, members.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for &c in members.choose_multiple(&mut rng, k) {
        if !has_representation(g, x, y, c) {
            return Err(c);
        }
    }
    Ok(k)
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchedCover {
    #[serde(serialize_with = "mask_as_list")]
    pub c1: SubsetMask,
    #[serde(serialize_with = "mask_as_list")]
    pub c2: SubsetMask,
    pub patches: usize,
    pub certified: bool,
}

/// `C1 = X0 ∪ {x_z}`, `C2 = Y0 ∪ {y_z}` over `z ∈ S1`, where `x_z y_z = z`
/// is the first representation in `W1 × W2` by `x` index. Certified when
/// `C1·C2 = G`.
pub fn patch_cover<G: GroupOps>(
    g: &G,
    x0: &SubsetMask,
    y0: &SubsetMask,
    s1: &SubsetMask,
    w1: &SubsetMask,
    w2: &SubsetMask,
) -> Result<PatchedCover> {
    let mut c1 = x0.clone();
    let mut c2 = y0.clone();
    for z in s1.iter() {
        let (a, b) = find_representation(g, w1, w2, z).ok_or(Error::MissingRepresentation { element: z })?;
        c1.insert(a);
        c2.insert(b);
    }
    let full = SubsetMask::full(g.order());
    let certified = product_cover_check(g, &c1, &c2, &full).is_empty();
    Ok(PatchedCover { c1, c2, patches: s1.count(), certified })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::words::{word_image, FreeWord, ImageMode};

    #[test]
    fn full_sets_certify_on_first_attempt() {
        let g = corpus::group("a5").unwrap();
        let f = g.full_mask();
        let r = sample_thin_pair(&g, &f, &f, &f, 60, 60, 0, 5).unwrap();
        assert!(r.certified && r.feasible);
        assert_eq!(r.attempts, 1);
        assert_eq!(r.x0.count(), 60);
    }

    #[test]
    fn infeasible_target_is_detected() {
        let g = corpus::group("a5").unwrap();
        let e = SubsetMask::singleton(60, 0);
        let r = sample_thin_pair(&g, &e, &e, &g.full_mask(), 1, 1, 0, 10).unwrap();
        assert!(!r.feasible && !r.certified);
        assert_eq!(r.attempts, 1);
        assert_eq!(r.uncovered.count(), 59);
    }

    #[test]
    fn oversized_request_is_an_error() {
        let g = corpus::group("a5").unwrap();
        let e = SubsetMask::singleton(60, 0);
        assert!(matches!(
            sample_thin_pair(&g, &e, &g.full_mask(), &e, 2, 1, 0, 1),
            Err(Error::SampleTooLarge { .. })
        ));
    }

    #[test]
    fn reproducible_and_exact_sizes() {
        let g = corpus::group("psl2_7").unwrap();
        let f = g.full_mask();
        let a = sample_thin_pair(&g, &f, &f, &f, 30, 30, 9, 4).unwrap();
        let b = sample_thin_pair(&g, &f, &f, &f, 30, 30, 9, 4).unwrap();
        assert_eq!(a.x0, b.x0);
        assert_eq!(a.y0, b.y0);
        assert_eq!(a.uncovered_history, b.uncovered_history);
        assert_eq!(a.x0.count(), 30);
        assert_eq!(a.y0.count(), 30);
        if a.certified {
            assert_eq!(spot_check(&g, &a.x0, &a.y0, &f, 0.5, 1), Ok(84));
        }
    }

    #[test]
    fn attempt_streams_are_independent_of_history() {
        let mut r3 = attempt_rng(5, 3, 0);
        let mut again = attempt_rng(5, 3, 0);
        assert_eq!(r3.gen::<u64>(), again.gen::<u64>());
        assert_ne!(attempt_rng(5, 3, 0).gen::<u64>(), attempt_rng(5, 4, 0).gen::<u64>());
        assert_ne!(attempt_rng(5, 3, 0).gen::<u64>(), attempt_rng(5, 3, 1).gen::<u64>());
    }

    #[test]
    fn sweep_subsets_are_nested() {
        let g = corpus::group("psl2_7").unwrap();
        let f = g.full_mask();
        let (x1, y1) = draw_pair(&f, &f, 20, 30, 4, 2).unwrap();
        let (x2, y2) = draw_pair(&f, &f, 40, 35, 4, 2).unwrap();
        assert!(x1.is_subset(&x2) && y1.is_subset(&y2));
        let rows = coverage_sweep(&g, &f, &f, &f, &[10, 20, 40], 0, 6).unwrap();
        for w in rows.windows(2) {
            assert!(w[0].fractions.iter().zip(&w[1].fractions).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn patching() {
        let g = corpus::group("a5").unwrap();
        let sq = word_image(&g, &FreeWord::power(2).unwrap(), ImageMode::Exhaustive).unwrap().image;
        let f = g.full_mask();
        let small = sample_thin_pair(&g, &sq, &sq, &f, 6, 6, 0, 1).unwrap();
        assert!(!small.certified);
        let p = patch_cover(&g, &small.x0, &small.y0, &small.uncovered, &sq, &sq).unwrap();
        assert!(p.certified);
        assert!(p.c1.count() <= 6 + small.uncovered.count());
        assert!(p.c1.is_subset(&sq) && p.c2.is_subset(&sq));

        let empty = SubsetMask::empty(60);
        let p = patch_cover(&g, &f, &f, &empty, &sq, &sq).unwrap();
        assert_eq!(p.c1, f);
        let one = SubsetMask::singleton(60, 17);
        let e = SubsetMask::singleton(60, 0);
        let mut w1 = f.clone();
        w1.remove(0);
        let p = patch_cover(&g, &e, &e, &one, &w1, &f).unwrap();
        assert_eq!(p.c1.to_vec(), vec![0, 1]);
        assert_eq!(p.c2.count(), 2);
        assert!(p.c2.contains(g.mul(g.inv(1), 17)));
    }

    #[test]
    fn missing_representation_names_the_witness() {
        let g = corpus::group("z2").unwrap();
        let sq = SubsetMask::singleton(2, 0);
        let s1 = SubsetMask::singleton(2, 1);
        match patch_cover(&g, &sq, &sq, &s1, &sq, &sq) {
            Err(Error::MissingRepresentation { element }) => assert_eq!(element, 1),
            other => panic!("{other:?}"),
        }
    }
}
