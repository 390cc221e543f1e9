//! Subset-product covering: which elements of `Z` fail to lie in `X·Y`.

use rayon::prelude::*;

use crate::group::{FiniteGroup, GroupOps};
use crate::mask::SubsetMask;

/// Above this many products the OR-reduction runs in parallel.
const PARALLEL_PRODUCTS: usize = 1 << 20;

/// `X·Y` as a mask.
pub fn product_set<G: GroupOps>(g: &G, x: &SubsetMask, y: &SubsetMask) -> SubsetMask {
    let n = g.order();
    let ys = y.to_vec();
    let translate = |acc: &mut SubsetMask, a: usize| {
        for &b in &ys {
            acc.insert(g.mul(a, b));
        }
    };
    let xs = x.to_vec();
    if xs.len() * ys.len() < PARALLEL_PRODUCTS {
        let mut acc = SubsetMask::empty(n);
        for &a in &xs {
            translate(&mut acc, a);
        }
        acc
    } else {
        xs.par_chunks(64)
            .fold(
                || SubsetMask::empty(n),
                |mut acc, chunk| {
                    for &a in chunk {
                        translate(&mut acc, a);
                    }
                    acc
                },
            )
            .reduce(|| SubsetMask::empty(n), |a, b| a.union(&b))
    }
}

/// `Z ∖ X·Y`. An empty result certifies `Z ⊆ X·Y`.
pub fn product_cover_check<G: GroupOps>(g: &G, x: &SubsetMask, y: &SubsetMask, z: &SubsetMask) -> SubsetMask {
    assert_eq!(x.len(), g.order());
    assert_eq!(y.len(), g.order());
    assert_eq!(z.len(), g.order());
    let mut uncovered = z.clone();
    uncovered.difference_with(&product_set(g, x, y));
    uncovered
}

/// Table-backed variant that reads translates straight from the table rows.
pub fn table_product_set(g: &FiniteGroup, x: &SubsetMask, y: &SubsetMask) -> SubsetMask {
    let ys = y.to_vec();
    let mut acc = SubsetMask::empty(g.order());
    for a in x.iter() {
        let row = g.row(a);
        for &b in &ys {
            acc.insert(row[b] as usize);
        }
    }
    acc
}

/// Whether `z ∈ X·Y`, by scanning `x ∈ X` for `x⁻¹z ∈ Y`.
///
/// Independent of [`product_set`]; used to recheck certified covers.
pub fn has_representation<G: GroupOps>(g: &G, x: &SubsetMask, y: &SubsetMask, z: usize) -> bool {
    x.iter().any(|a| y.contains(g.mul(g.inv(a), z)))
}

/// First `(x, y)` in `X × Y` (by `x` index) with `xy = z`.
pub fn find_representation<G: GroupOps>(g: &G, x: &SubsetMask, y: &SubsetMask, z: usize) -> Option<(usize, usize)> {
    x.iter().find_map(|a| {
        let b = g.mul(g.inv(a), z);
        y.contains(b).then_some((a, b))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::DEFAULT_SIZE_CAP;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(|X||Y|) pairwise oracle.
    fn pairwise_uncovered(g: &FiniteGroup, x: &[usize], y: &[usize], z: &[usize]) -> Vec<usize> {
        let mut hit = vec![false; g.order()];
        for &a in x {
            for &b in y {
                hit[g.mul(a, b)] = true;
            }
        }
        z.iter().copied().filter(|&c| !hit[c]).collect()
    }

    fn a5() -> FiniteGroup {
        FiniteGroup::from_permutations("A5", 5, &[vec![1, 2, 3, 4, 0], vec![1, 2, 0, 3, 4]], DEFAULT_SIZE_CAP).unwrap()
    }

    #[test]
    fn whole_group_covers_itself() {
        let g = a5();
        let f = g.full_mask();
        assert!(product_cover_check(&g, &f, &f, &f).is_empty());
    }

    #[test]
    fn identity_translate() {
        let g = a5();
        let e = SubsetMask::singleton(60, 0);
        let y = SubsetMask::from_indices(60, [3, 7, 11, 40]);
        assert!(product_cover_check(&g, &e, &y, &y).is_empty());
        let cy = y.complement();
        assert_eq!(product_cover_check(&g, &e, &y, &cy), cy);
    }

    #[test]
    fn five_cycles_with_identity() {
        let g = a5();
        let five = g
            .conjugacy_classes()
            .iter()
            .find(|c| c.size == 12)
            .unwrap()
            .members
            .clone();
        let mut x = five.clone();
        x.insert(0);
        let z = g.full_mask();
        let got = product_cover_check(&g, &x, &x, &z);
        let want = pairwise_uncovered(&g, &x.to_vec(), &x.to_vec(), &z.to_vec());
        assert_eq!(got.to_vec(), want);
        assert_eq!(table_product_set(&g, &x, &x), product_set(&g, &x, &x));
    }

    #[test]
    fn agrees_with_pairwise_oracle_on_random_triples() {
        let g = a5();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let pick = |rng: &mut ChaCha8Rng| {
                let p: f64 = rng.gen_range(0.02..0.3);
                SubsetMask::from_indices(60, (0..60).filter(|_| rng.gen_bool(p)))
            };
            let (x, y, z) = (pick(&mut rng), pick(&mut rng), g.full_mask());
            let got = product_cover_check(&g, &x, &y, &z);
            assert_eq!(got.to_vec(), pairwise_uncovered(&g, &x.to_vec(), &y.to_vec(), &z.to_vec()));
            for c in z.iter() {
                assert_eq!(has_representation(&g, &x, &y, c), !got.contains(c));
            }
        }
    }
}
