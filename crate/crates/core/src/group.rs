//! Finite groups given by a full multiplication table.

use std::collections::HashMap;
use std::fmt;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mask::SubsetMask;

/// Default cap on the number of elements produced by a generator closure.
pub const DEFAULT_SIZE_CAP: usize = 1_000_000;

/// Orders up to this bound get an exhaustive associativity check.
pub const EXHAUSTIVE_ASSOCIATIVITY_LIMIT: usize = 512;

/// Random triples tested above [`EXHAUSTIVE_ASSOCIATIVITY_LIMIT`].
pub const RANDOM_ASSOCIATIVITY_TRIPLES: usize = 100_000;

/// Minimal interface shared by table-backed and implicit groups.
///
/// Elements are indices `0..order()`, with the identity at index 0.
pub trait GroupOps: Sync {
    fn order(&self) -> usize;
    fn mul(&self, a: usize, b: usize) -> usize;
    fn inv(&self, a: usize) -> usize;

    fn identity(&self) -> usize {
        0
    }

    /// `a^e` by repeated squaring; negative exponents go through the inverse.
    fn pow(&self, a: usize, e: i64) -> usize {
        let mut base = if e < 0 { self.inv(a) } else { a };
        let mut e = e.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// `g^h = h⁻¹ g h`.
    fn conjugate(&self, g: usize, h: usize) -> usize {
        self.mul(self.mul(self.inv(h), g), h)
    }
}

/// A conjugacy class of a [`FiniteGroup`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConjugacyClass {
    /// Lowest element index in the class.
    pub representative: usize,
    pub members: SubsetMask,
    pub size: usize,
}

#[derive(Clone, Debug)]
struct ClassData {
    classes: Vec<ConjugacyClass>,
    class_of: Vec<u32>,
}

/// A finite group on element indices `0..n` with identity 0.
///
/// Products are read from an `n × n` table. Groups built from permutations
/// keep each element's image array so point stabilizers can be read off.
#[derive(Clone)]
pub struct FiniteGroup {
    name: String,
    order: usize,
    mul: Vec<u32>,
    inv: Vec<u32>,
    degree: usize,
    perm_images: Option<Vec<u32>>,
    class_data: OnceLock<ClassData>,
}

impl fmt::Debug for FiniteGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteGroup")
            .field("name", &self.name)
            .field("order", &self.order)
            .field("degree", &self.perm_images.as_ref().map(|_| self.degree))
            .finish()
    }
}

impl GroupOps for FiniteGroup {
    fn order(&self) -> usize {
        self.order
    }

    #[inline]
    fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b] as usize
    }

    #[inline]
    fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }
}

/// Composition used for permutation generators: apply `p` first, then `q`.
pub(crate) fn compose(p: &[u32], q: &[u32]) -> Vec<u32> {
    p.iter().map(|&i| q[i as usize]).collect()
}

fn check_permutation(p: &[usize], degree: usize) -> Result<()> {
    if p.len() != degree {
        return Err(Error::InvalidPermutation(format!(
            "image array has length {}, domain has size {degree}",
            p.len()
        )));
    }
    let mut seen = vec![false; degree];
    for &i in p {
        if i >= degree || std::mem::replace(&mut seen[i], true) {
            return Err(Error::InvalidPermutation(format!("{p:?} is not a bijection of 0..{degree}")));
        }
    }
    Ok(())
}

impl FiniteGroup {
    /// Closure of permutation generators on `0..degree`.
    ///
    /// Elements are numbered in breadth-first discovery order from the
    /// identity, applying the generators in the order given, so the indexing
    /// is deterministic.
    pub fn from_permutations(name: &str, degree: usize, generators: &[Vec<usize>], cap: usize) -> Result<Self> {
        for g in generators {
            check_permutation(g, degree)?;
        }
        let gens: Vec<Vec<u32>> = generators
            .iter()
            .map(|g| g.iter().map(|&i| i as u32).collect())
            .collect();
        let identity: Vec<u32> = (0..degree as u32).collect();

        let mut elements = vec![identity.clone()];
        let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
        index.insert(identity, 0);
        // parent[b] = (a, k) with b = a · gens[k]
        let mut parent: Vec<(u32, u32)> = vec![(0, 0)];
        let mut right: Vec<u32> = Vec::new();

        let mut head = 0;
        while head < elements.len() {
            for (k, s) in gens.iter().enumerate() {
                let p = compose(&elements[head], s);
                let idx = match index.get(&p) {
                    Some(&i) => i,
                    None => {
                        if elements.len() >= cap {
                            return Err(Error::ClosureTooLarge { cap });
                        }
                        let i = elements.len() as u32;
                        index.insert(p.clone(), i);
                        elements.push(p);
                        parent.push((head as u32, k as u32));
                        i
                    }
                };
                right.push(idx);
            }
            head += 1;
        }

        let n = elements.len();
        let ngen = gens.len();
        let mut mul = vec![0u32; n * n];
        for a in 0..n {
            let row = &mut mul[a * n..(a + 1) * n];
            row[0] = a as u32;
            for b in 1..n {
                let (pb, k) = parent[b];
                row[b] = right[row[pb as usize] as usize * ngen + k as usize];
            }
        }

        let mut inv = vec![0u32; n];
        for (a, p) in elements.iter().enumerate() {
            let mut q = vec![0u32; degree];
            for (i, &j) in p.iter().enumerate() {
                q[j as usize] = i as u32;
            }
            inv[a] = index[&q];
        }

        let perm_images = elements.into_iter().flatten().collect();
        Ok(FiniteGroup {
            name: name.to_string(),
            order: n,
            mul,
            inv,
            degree,
            perm_images: Some(perm_images),
            class_data: OnceLock::new(),
        })
    }

    /// Group from an explicit Cayley table; element 0 must be the identity.
    ///
    /// The table is checked for the Latin-square property, identity,
    /// inverses and associativity.
    pub fn from_table(name: &str, table: &[Vec<usize>]) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        if n > DEFAULT_SIZE_CAP {
            return Err(Error::ClosureTooLarge { cap: DEFAULT_SIZE_CAP });
        }
        let mut mul = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!("row {i} has length {}, expected {n}", row.len())));
            }
            for &v in row {
                if v >= n {
                    return Err(Error::InvalidTable(format!("entry {v} in row {i} is out of range")));
                }
                mul.push(v as u32);
            }
        }
        let mut inv = vec![u32::MAX; n];
        for a in 0..n {
            if let Some(b) = (0..n).find(|&b| mul[a * n + b] == 0) {
                inv[a] = b as u32;
            }
        }
        let g = FiniteGroup {
            name: name.to_string(),
            order: n,
            mul,
            inv,
            degree: 0,
            perm_images: None,
            class_data: OnceLock::new(),
        };
        g.verify()?;
        Ok(g)
    }

    /// Checks every table invariant: Latin square, identity at 0, inverses,
    /// and associativity (exhaustive up to order 512, sampled above).
    pub fn verify(&self) -> Result<()> {
        let n = self.order;
        let mut seen = vec![0usize; n];
        for a in 0..n {
            let stamp = a + 1;
            for b in 0..n {
                let v = self.mul(a, b);
                if seen[v] == stamp {
                    return Err(Error::InvalidTable(format!("row {a} repeats {v}")));
                }
                seen[v] = stamp;
            }
        }
        seen.fill(0);
        for b in 0..n {
            let stamp = b + 1;
            for a in 0..n {
                let v = self.mul(a, b);
                if seen[v] == stamp {
                    return Err(Error::InvalidTable(format!("column {b} repeats {v}")));
                }
                seen[v] = stamp;
            }
        }
        for g in 0..n {
            if self.mul(0, g) != g || self.mul(g, 0) != g {
                return Err(Error::InvalidTable("element 0 is not the identity".into()));
            }
            let i = self.inv[g];
            if i == u32::MAX || self.mul(g, i as usize) != 0 || self.mul(i as usize, g) != 0 {
                return Err(Error::InvalidTable(format!("element {g} has no two-sided inverse")));
            }
        }
        let assoc = |a: usize, b: usize, c: usize| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c));
        if n <= EXHAUSTIVE_ASSOCIATIVITY_LIMIT {
            for a in 0..n {
                for b in 0..n {
                    let ab = self.mul(a, b);
                    for c in 0..n {
                        if self.mul(ab, c) != self.mul(a, self.mul(b, c)) {
                            return Err(Error::NotAssociative { a, b, c });
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..RANDOM_ASSOCIATIVITY_TRIPLES {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if !assoc(a, b, c) {
                    return Err(Error::NotAssociative { a, b, c });
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Row `a` of the table: `row(a)[b] = a·b`.
    #[inline]
    pub fn row(&self, a: usize) -> &[u32] {
        &self.mul[a * self.order..(a + 1) * self.order]
    }

    /// Permutation degree, when the group was built from permutations.
    pub fn degree(&self) -> Option<usize> {
        self.perm_images.as_ref().map(|_| self.degree)
    }

    /// Image array of element `g` on the permutation domain.
    pub fn perm_image(&self, g: usize) -> Option<&[u32]> {
        self.perm_images
            .as_ref()
            .map(|p| &p[g * self.degree..(g + 1) * self.degree])
    }

    pub fn element_order(&self, g: usize) -> usize {
        let mut k = 1;
        let mut x = g;
        while x != 0 {
            x = self.mul(x, g);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (a + 1..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn centralizer_order(&self, g: usize) -> usize {
        (0..self.order).filter(|&h| self.mul(g, h) == self.mul(h, g)).count()
    }

    pub fn full_mask(&self) -> SubsetMask {
        SubsetMask::full(self.order)
    }

    pub fn check_mask(&self, m: &SubsetMask) -> Result<()> {
        if m.len() != self.order {
            return Err(Error::MaskLength { expected: self.order, found: m.len() });
        }
        Ok(())
    }

    fn class_data(&self) -> &ClassData {
        self.class_data.get_or_init(|| {
            let n = self.order;
            let mut class_of = vec![u32::MAX; n];
            let mut classes = Vec::new();
            for g in 0..n {
                if class_of[g] != u32::MAX {
                    continue;
                }
                let id = classes.len() as u32;
                let mut members = SubsetMask::empty(n);
                for h in 0..n {
                    let c = self.conjugate(g, h);
                    members.insert(c);
                    class_of[c] = id;
                }
                let size = members.count();
                classes.push(ConjugacyClass { representative: g, members, size });
            }
            ClassData { classes, class_of }
        })
    }

    /// Conjugacy classes ordered by representative (lowest member index), so
    /// the identity class comes first. Computed once and cached.
    pub fn conjugacy_classes(&self) -> &[ConjugacyClass] {
        &self.class_data().classes
    }

    /// Index into [`conjugacy_classes`](Self::conjugacy_classes) of the class containing `g`.
    pub fn class_of(&self, g: usize) -> usize {
        self.class_data().class_of[g] as usize
    }

    /// Union of the classes meeting `m`.
    pub fn conjugation_closure(&self, m: &SubsetMask) -> SubsetMask {
        let classes = self.conjugacy_classes();
        let mut hit = vec![false; classes.len()];
        for g in m.iter() {
            hit[self.class_of(g)] = true;
        }
        let mut out = SubsetMask::empty(self.order);
        for (c, h) in classes.iter().zip(hit) {
            if h {
                out.union_with(&c.members);
            }
        }
        out
    }

    /// Materializes the subgroup `h` as a standalone group.
    ///
    /// Elements of `h` keep their relative index order, so the identity
    /// stays at 0. Returns the group and the embedding (new index → old index).
    pub fn induced_subgroup(&self, h: &SubsetMask, name: &str) -> Result<(FiniteGroup, Vec<usize>)> {
        self.check_mask(h)?;
        if !crate::subgroup::is_subgroup(self, h) {
            return Err(Error::NotSubgroup);
        }
        let embed = h.to_vec();
        let mut local = vec![u32::MAX; self.order];
        for (i, &g) in embed.iter().enumerate() {
            local[g] = i as u32;
        }
        let m = embed.len();
        let mut mul = Vec::with_capacity(m * m);
        for &a in &embed {
            let row = self.row(a);
            mul.extend(embed.iter().map(|&b| local[row[b] as usize]));
        }
        let inv = embed.iter().map(|&a| local[self.inv(a)]).collect();
        let perm_images = self.perm_images.as_ref().map(|p| {
            embed
                .iter()
                .flat_map(|&g| p[g * self.degree..(g + 1) * self.degree].iter().copied())
                .collect()
        });
        Ok((
            FiniteGroup {
                name: name.to_string(),
                order: m,
                mul,
                inv,
                degree: self.degree,
                perm_images,
                class_data: OnceLock::new(),
            },
            embed,
        ))
    }

    /// Group with a precomputed table that is known to be valid.
    pub(crate) fn from_parts_unchecked(name: String, order: usize, mul: Vec<u32>, inv: Vec<u32>) -> Self {
        FiniteGroup {
            name,
            order,
            mul,
            inv,
            degree: 0,
            perm_images: None,
            class_data: OnceLock::new(),
        }
    }

    /// Cyclic group `Z/n` as the closure of an `n`-cycle.
    pub fn cyclic(n: usize) -> Self {
        let gen: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        let gens = if n > 1 { vec![gen] } else { vec![] };
        FiniteGroup::from_permutations(&format!("Z/{n}"), n.max(1), &gens, DEFAULT_SIZE_CAP)
            .expect("cyclic generator is a permutation")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a5() -> FiniteGroup {
        FiniteGroup::from_permutations("A5", 5, &[vec![1, 2, 3, 4, 0], vec![1, 2, 0, 3, 4]], DEFAULT_SIZE_CAP).unwrap()
    }

    fn s4() -> FiniteGroup {
        FiniteGroup::from_permutations("S4", 4, &[vec![1, 2, 3, 0], vec![1, 0, 2, 3]], DEFAULT_SIZE_CAP).unwrap()
    }

    #[test]
    fn a5_has_order_60() {
        let g = a5();
        assert_eq!(g.order(), 60);
        g.verify().unwrap();
    }

    #[test]
    fn empty_generators_give_trivial_group() {
        let g = FiniteGroup::from_permutations("1", 3, &[], DEFAULT_SIZE_CAP).unwrap();
        assert_eq!(g.order(), 1);
        assert_eq!(g.perm_image(0).unwrap(), &[0, 1, 2]);
    }

    #[test]
    fn z2_from_table() {
        let g = FiniteGroup::from_table("Z/2", &[vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.inv(1), 1);
    }

    #[test]
    fn bad_tables_are_rejected() {
        assert!(matches!(
            FiniteGroup::from_table("x", &[vec![0, 1], vec![1, 1]]),
            Err(Error::InvalidTable(_))
        ));
        assert!(matches!(
            FiniteGroup::from_table("x", &[vec![1, 0], vec![0, 1]]),
            Err(Error::InvalidTable(_))
        ));
        assert!(FiniteGroup::from_table("x", &[vec![0, 2], vec![1, 0]]).is_err());
        // Latin square with identity 0 that is not associative (order 5 loop).
        let loop5 = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        assert!(matches!(FiniteGroup::from_table("loop", &loop5), Err(Error::NotAssociative { .. })));
    }

    #[test]
    fn closure_cap_is_enforced() {
        let r = FiniteGroup::from_permutations("A5", 5, &[vec![1, 2, 3, 4, 0], vec![1, 2, 0, 3, 4]], 59);
        assert!(matches!(r, Err(Error::ClosureTooLarge { cap: 59 })));
    }

    #[test]
    fn non_permutation_generator_is_rejected() {
        let r = FiniteGroup::from_permutations("bad", 3, &[vec![0, 0, 1]], DEFAULT_SIZE_CAP);
        assert!(matches!(r, Err(Error::InvalidPermutation(_))));
    }

    #[test]
    fn table_matches_permutation_composition() {
        let g = s4();
        for a in 0..g.order() {
            for b in 0..g.order() {
                let p = compose(g.perm_image(a).unwrap(), g.perm_image(b).unwrap());
                assert_eq!(g.perm_image(g.mul(a, b)).unwrap(), &p[..]);
            }
        }
    }

    #[test]
    fn class_sizes() {
        let sizes = |g: &FiniteGroup| {
            let mut s: Vec<usize> = g.conjugacy_classes().iter().map(|c| c.size).collect();
            s.sort();
            s
        };
        assert_eq!(sizes(&a5()), vec![1, 12, 12, 15, 20]);
        assert_eq!(sizes(&s4()), vec![1, 3, 6, 6, 8]);
        assert_eq!(sizes(&FiniteGroup::cyclic(5)), vec![1; 5]);
    }

    #[test]
    fn class_invariants() {
        for g in [a5(), s4(), FiniteGroup::cyclic(6)] {
            let classes = g.conjugacy_classes();
            assert_eq!(classes[0].members.to_vec(), vec![0]);
            let mut union = SubsetMask::empty(g.order());
            for c in classes {
                assert!(union.is_disjoint(&c.members));
                union.union_with(&c.members);
                assert_eq!(c.size, c.members.count());
                assert_eq!(c.size * g.centralizer_order(c.representative), g.order());
            }
            assert_eq!(union.count(), g.order());
        }
    }

    #[test]
    fn pow_handles_negative_exponents() {
        let g = FiniteGroup::cyclic(5);
        let one = 1;
        assert_eq!(g.pow(one, -1), g.inv(one));
        assert_eq!(g.pow(one, 5), 0);
        assert_eq!(g.pow(one, 0), 0);
    }
}
