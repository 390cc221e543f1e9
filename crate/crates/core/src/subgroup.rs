//! Subgroups, normal subgroups, cosets and quotients of a [`FiniteGroup`].

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupOps};
use crate::mask::SubsetMask;

/// Class counts up to this bound get exhaustive union enumeration in
/// [`normal_subgroups`].
pub const MAX_CLASSES_FOR_UNION_ENUMERATION: usize = 20;

/// Generator pairs sampled by [`find_large_subgroup`].
pub const TWO_GENERATOR_BUDGET: usize = 2000;

/// Contains the identity and is closed under multiplication.
pub fn is_subgroup(g: &FiniteGroup, h: &SubsetMask) -> bool {
    if h.len() != g.order() || !h.contains(0) {
        return false;
    }
    let elems = h.to_vec();
    elems.iter().all(|&a| {
        let row = g.row(a);
        elems.iter().all(|&b| h.contains(row[b] as usize))
    })
}

/// Union of conjugacy classes, i.e. invariant under conjugation.
pub fn is_conjugation_invariant(g: &FiniteGroup, h: &SubsetMask) -> bool {
    g.conjugacy_classes()
        .iter()
        .all(|c| c.members.is_subset(h) || c.members.is_disjoint(h))
}

pub fn is_normal_subgroup(g: &FiniteGroup, h: &SubsetMask) -> bool {
    is_subgroup(g, h) && is_conjugation_invariant(g, h)
}

/// Incrementally grown subgroup closure.
struct Closure<'a, G: GroupOps> {
    group: &'a G,
    mask: SubsetMask,
    elements: Vec<usize>,
    gens: Vec<usize>,
}

impl<'a, G: GroupOps> Closure<'a, G> {
    fn new(group: &'a G) -> Self {
        Closure {
            group,
            mask: SubsetMask::singleton(group.order(), 0),
            elements: vec![0],
            gens: Vec::new(),
        }
    }

    fn from_subgroup(group: &'a G, h: &SubsetMask) -> Self {
        Closure {
            group,
            mask: h.clone(),
            elements: h.to_vec(),
            gens: Vec::new(),
        }
    }

    /// Adds generator `s` and closes.
    fn add(&mut self, s: usize) {
        if self.mask.contains(s) {
            return;
        }
        self.gens.push(s);
        // Every element of the new closure is a product of old elements and
        // generators; BFS from all current elements with all generators.
        let mut head = 0;
        while head < self.elements.len() {
            let a = self.elements[head];
            for k in 0..self.gens.len() {
                let p = self.group.mul(a, self.gens[k]);
                if !self.mask.contains(p) {
                    self.mask.insert(p);
                    self.elements.push(p);
                }
            }
            head += 1;
        }
    }
}

/// Subgroup generated by `gens`.
pub fn subgroup_closure<G: GroupOps, I: IntoIterator<Item = usize>>(g: &G, gens: I) -> SubsetMask {
    let mut c = Closure::new(g);
    for s in gens {
        c.add(s);
    }
    c.mask
}

/// Join of two subgroups.
fn join(g: &FiniteGroup, a: &SubsetMask, b: &SubsetMask) -> SubsetMask {
    let mut c = Closure::from_subgroup(g, a);
    for s in b.iter() {
        c.add(s);
    }
    c.mask
}

#[derive(Clone, Debug)]
pub struct NormalSubgroups {
    /// Sorted by order, then by element list.
    pub subgroups: Vec<SubsetMask>,
    /// True when every union of classes was enumerated.
    pub complete: bool,
}

/// All normal subgroups, as closures of unions of conjugacy classes.
///
/// With at most [`MAX_CLASSES_FOR_UNION_ENUMERATION`] classes every union is
/// enumerated. Otherwise the result is the join-closed family generated by
/// the normal closures of single classes and `complete` is false.
pub fn normal_subgroups(g: &FiniteGroup) -> NormalSubgroups {
    let classes = g.conjugacy_classes();
    let n = g.order();
    let mut found: HashSet<SubsetMask> = HashSet::new();
    found.insert(SubsetMask::singleton(n, 0));
    found.insert(SubsetMask::full(n));
    let complete = classes.len() <= MAX_CLASSES_FOR_UNION_ENUMERATION;
    if complete {
        let rest = &classes[1..];
        for bits in 1u64..(1u64 << rest.len()) {
            let mut c = Closure::new(g);
            for (i, class) in rest.iter().enumerate() {
                if bits >> i & 1 == 1 {
                    for m in class.members.iter() {
                        c.add(m);
                    }
                }
            }
            found.insert(c.mask);
        }
    } else {
        let singles: Vec<SubsetMask> = classes[1..]
            .iter()
            .map(|c| subgroup_closure(g, c.members.iter()))
            .collect();
        let mut frontier: Vec<SubsetMask> = Vec::new();
        for s in singles {
            if found.insert(s.clone()) {
                frontier.push(s);
            }
        }
        while let Some(a) = frontier.pop() {
            let current: Vec<SubsetMask> = found.iter().cloned().collect();
            for b in current {
                let j = join(g, &a, &b);
                if found.insert(j.clone()) {
                    frontier.push(j);
                }
            }
        }
    }
    let mut subgroups: Vec<SubsetMask> = found.into_iter().collect();
    subgroups.sort_by(|a, b| a.count().cmp(&b.count()).then_with(|| a.to_vec().cmp(&b.to_vec())));
    NormalSubgroups { subgroups, complete }
}

/// No normal subgroups other than `{e}` and `G`, for nontrivial `G`.
pub fn is_simple(g: &FiniteGroup) -> bool {
    let n = g.order();
    n > 1
        && g.conjugacy_classes()[1..]
            .iter()
            .all(|c| subgroup_closure(g, c.members.iter()).count() == n)
}

/// First proper subgroup in search order whose order satisfies `accept`.
///
/// Search order: point stabilizers of the permutation action (by point),
/// cyclic subgroups (by generator index), then [`TWO_GENERATOR_BUDGET`]
/// sampled generator pairs from a fixed seed.
pub fn find_subgroup<F: Fn(usize) -> bool>(g: &FiniteGroup, accept: F) -> Option<SubsetMask> {
    let n = g.order();
    let ok = |h: &SubsetMask| {
        let k = h.count();
        k < n && accept(k)
    };
    if let Some(deg) = g.degree() {
        for point in 0..deg {
            let stab = SubsetMask::from_indices(
                n,
                (0..n).filter(|&x| g.perm_image(x).unwrap()[point] as usize == point),
            );
            if ok(&stab) {
                debug_assert!(is_subgroup(g, &stab));
                return Some(stab);
            }
        }
    }
    for x in 0..n {
        let ord = g.element_order(x);
        if ord < n && accept(ord) {
            let mut h = SubsetMask::empty(n);
            let mut y = 0;
            for _ in 0..ord {
                h.insert(y);
                y = g.mul(y, x);
            }
            return Some(h);
        }
    }
    if n > 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..TWO_GENERATOR_BUDGET {
            let a = rng.gen_range(1..n);
            let b = rng.gen_range(1..n);
            let h = subgroup_closure(g, [a, b]);
            if ok(&h) {
                return Some(h);
            }
        }
    }
    None
}

/// A proper subgroup of order at least `threshold`, if the search finds one.
pub fn find_large_subgroup(g: &FiniteGroup, threshold: f64) -> Option<SubsetMask> {
    let h = find_subgroup(g, |k| k as f64 >= threshold)?;
    assert!(is_subgroup(g, &h));
    Some(h)
}

/// Representatives of the right cosets `H·y`, each the lowest index in its coset,
/// in increasing order.
pub fn right_coset_reps(g: &FiniteGroup, h: &SubsetMask) -> Vec<usize> {
    let n = g.order();
    let hs = h.to_vec();
    let mut seen = SubsetMask::empty(n);
    let mut reps = Vec::with_capacity(n / hs.len().max(1));
    for y in 0..n {
        if seen.contains(y) {
            continue;
        }
        reps.push(y);
        for &x in &hs {
            seen.insert(g.mul(x, y));
        }
    }
    reps
}

/// A map between two groups given on element indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupHomomorphism {
    pub map: Vec<usize>,
}

impl GroupHomomorphism {
    pub fn apply(&self, g: usize) -> usize {
        self.map[g]
    }

    /// Exhaustive check of `f(ab) = f(a)f(b)` and `f(e) = e`.
    pub fn verify(&self, source: &FiniteGroup, target: &FiniteGroup) -> bool {
        self.map.len() == source.order()
            && self.map[0] == 0
            && (0..source.order()).all(|a| {
                (0..source.order()).all(|b| self.map[source.mul(a, b)] == target.mul(self.map[a], self.map[b]))
            })
    }

    pub fn kernel(&self) -> SubsetMask {
        SubsetMask::from_indices(self.map.len(), (0..self.map.len()).filter(|&g| self.map[g] == 0))
    }
}

/// The quotient `G/N` with its projection.
///
/// Cosets are numbered by their lowest element, so the coset of the
/// identity is element 0.
pub fn quotient(g: &FiniteGroup, normal: &SubsetMask) -> Result<(FiniteGroup, GroupHomomorphism)> {
    g.check_mask(normal)?;
    if !is_subgroup(g, normal) {
        return Err(Error::NotSubgroup);
    }
    if !is_conjugation_invariant(g, normal) {
        return Err(Error::NotNormal);
    }
    let n = g.order();
    let ns = normal.to_vec();
    let mut coset_of = vec![u32::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if coset_of[x] != u32::MAX {
            continue;
        }
        let id = reps.len() as u32;
        reps.push(x);
        for &k in &ns {
            coset_of[g.mul(x, k)] = id;
        }
    }
    let m = reps.len();
    let mut mul = Vec::with_capacity(m * m);
    for &a in &reps {
        let row = g.row(a);
        mul.extend(reps.iter().map(|&b| coset_of[row[b] as usize]));
    }
    let inv = reps.iter().map(|&a| coset_of[g.inv(a)]).collect();
    let q = FiniteGroup::from_parts_unchecked(format!("{}/N{}", g.name(), ns.len()), m, mul, inv);
    let proj = GroupHomomorphism {
        map: coset_of.into_iter().map(|c| c as usize).collect(),
    };
    Ok((q, proj))
}
