//! Ingested character tables and the class-multiplication counts they yield.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupOps};

/// Tolerance for the orthogonality relations.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-9;

/// Tolerance for realness and integrality of class-multiplication counts.
pub const COUNT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableClass {
    pub label: String,
    pub size: usize,
    pub rep_order: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub representative: Option<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableFile {
    group: String,
    order: usize,
    classes: Vec<TableClass>,
    chars: Vec<Vec<[f64; 2]>>,
}

/// Irreducible characters (rows) evaluated on conjugacy classes (columns).
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub group: String,
    pub order: usize,
    pub classes: Vec<TableClass>,
    pub values: Vec<Vec<Complex64>>,
    identity_class: usize,
}

impl CharacterTable {
    pub fn new(group: String, order: usize, classes: Vec<TableClass>, values: Vec<Vec<Complex64>>) -> Result<Self> {
        let c = classes.len();
        if c == 0 {
            return Err(Error::CharacterTable("no classes".into()));
        }
        if values.len() != c || values.iter().any(|r| r.len() != c) {
            return Err(Error::CharacterTable(format!("value matrix is not {c}x{c}")));
        }
        let ids: Vec<usize> = (0..c).filter(|&j| classes[j].size == 1 && classes[j].rep_order == 1).collect();
        let [identity_class] = ids[..] else {
            return Err(Error::CharacterTable(format!("expected one identity class, found {}", ids.len())));
        };
        Ok(CharacterTable { group, order, classes, values, identity_class })
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: TableFile = serde_json::from_str(s)?;
        let values = f
            .chars
            .into_iter()
            .map(|row| row.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
            .collect();
        Self::new(f.group, f.order, f.classes, values)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        let f = TableFile {
            group: self.group.clone(),
            order: self.order,
            classes: self.classes.clone(),
            chars: self.values.iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn identity_class(&self) -> usize {
        self.identity_class
    }

    /// Degree χ(1) of character `r`.
    pub fn degree(&self, r: usize) -> f64 {
        self.values[r][self.identity_class].re
    }

    pub fn class_by_label(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.label == label)
    }

    fn check_class(&self, j: usize) -> Result<()> {
        if j >= self.class_count() {
            return Err(Error::CharacterTable(format!("class {j} out of range ({} classes)", self.class_count())));
        }
        Ok(())
    }

    /// `Σ_χ χ(c1)χ(c2)conj(χ(c3))/χ(1)` over the rows selected by `rows`.
    fn weighted_sum(&self, rows: impl Iterator<Item = usize>, c1: usize, c2: usize, c3: usize) -> Complex64 {
        rows.map(|r| {
            let v = &self.values[r];
            v[c1] * v[c2] * v[c3].conj() / self.degree(r)
        })
        .sum()
    }

    fn trivial_row(&self) -> Option<usize> {
        let one = Complex64::new(1.0, 0.0);
        (0..self.class_count()).find(|&r| self.values[r].iter().all(|&z| (z - one).norm() <= ORTHOGONALITY_TOLERANCE))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableValidation {
    pub max_row_residual: f64,
    pub max_column_residual: f64,
    pub degree_square_sum: f64,
    /// `class_map[j]` is the group class matched to table column `j`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_map: Option<Vec<usize>>,
}

/// Checks the table invariants; with a group, also matches its classes.
pub fn validate_table(t: &CharacterTable, g: Option<&FiniteGroup>) -> Result<TableValidation> {
    let c = t.class_count();
    let size_sum: usize = t.classes.iter().map(|k| k.size).sum();
    if size_sum != t.order {
        return Err(Error::CharacterTable(format!("class sizes sum to {size_sum}, order is {}", t.order)));
    }
    let n = t.order as f64;
    let mut max_row = 0.0f64;
    for r in 0..c {
        for s in r..c {
            let ip: Complex64 = (0..c)
                .map(|j| t.values[r][j] * t.values[s][j].conj() * t.classes[j].size as f64)
                .sum::<Complex64>()
                / n;
            let want = if r == s { 1.0 } else { 0.0 };
            let res = (ip - want).norm();
            if res > ORTHOGONALITY_TOLERANCE {
                return Err(Error::CharacterTable(format!("row orthogonality fails for ({r}, {s}): residual {res:.3e}")));
            }
            max_row = max_row.max(res);
        }
    }
    let mut max_col = 0.0f64;
    for j in 0..c {
        for k in j..c {
            let ip: Complex64 = (0..c).map(|r| t.values[r][j] * t.values[r][k].conj()).sum();
            let scale = n / t.classes[j].size as f64;
            let want = if j == k { scale } else { 0.0 };
            let res = (ip - want).norm() / scale;
            if res > ORTHOGONALITY_TOLERANCE {
                return Err(Error::CharacterTable(format!(
                    "column orthogonality fails for ({j}, {k}): residual {res:.3e}"
                )));
            }
            max_col = max_col.max(res);
        }
    }
    let trivial = (0..c)
        .filter(|&r| {
            t.values[r]
                .iter()
                .all(|&z| (z - Complex64::new(1.0, 0.0)).norm() <= ORTHOGONALITY_TOLERANCE)
        })
        .count();
    if trivial != 1 {
        return Err(Error::CharacterTable(format!("expected one trivial character, found {trivial}")));
    }
    let degree_square_sum: f64 = (0..c).map(|r| t.degree(r).powi(2)).sum();
    if (degree_square_sum - n).abs() > ORTHOGONALITY_TOLERANCE * n {
        return Err(Error::CharacterTable(format!("degrees squared sum to {degree_square_sum}, order is {n}")));
    }
    let class_map = g.map(|g| match_classes(t, g)).transpose()?;
    Ok(TableValidation { max_row_residual: max_row, max_column_residual: max_col, degree_square_sum, class_map })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct FrobeniusCount {
    /// Unrounded character sum.
    pub raw: Complex64,
    pub count: u64,
    /// Distance from `raw` to `count`.
    pub residual: f64,
}

/// Number of `(x, y) ∈ C1 × C2` with `xy = z` for a fixed `z ∈ C3`.
pub fn frobenius_count(t: &CharacterTable, c1: usize, c2: usize, c3: usize) -> Result<FrobeniusCount> {
    for j in [c1, c2, c3] {
        t.check_class(j)?;
    }
    let scale = (t.classes[c1].size * t.classes[c2].size) as f64 / t.order as f64;
    let raw = t.weighted_sum(0..t.class_count(), c1, c2, c3) * scale;
    let rounded = raw.re.round();
    let residual = (raw - rounded).norm();
    if raw.im.abs() > COUNT_TOLERANCE || residual > COUNT_TOLERANCE || rounded < 0.0 {
        return Err(Error::NonIntegralCount { value: format!("{raw}") });
    }
    Ok(FrobeniusCount { raw, count: rounded as u64, residual })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CharSum {
    pub value: Complex64,
    pub modulus: f64,
}

/// Sum over the nontrivial characters of `χ(c1)χ(c2)conj(χ(c3))/χ(1)`.
pub fn char_sum(t: &CharacterTable, c1: usize, c2: usize, c3: usize) -> Result<CharSum> {
    for j in [c1, c2, c3] {
        t.check_class(j)?;
    }
    let trivial = t
        .trivial_row()
        .ok_or_else(|| Error::CharacterTable("no trivial character".into()))?;
    let value = t.weighted_sum((0..t.class_count()).filter(|&r| r != trivial), c1, c2, c3);
    Ok(CharSum { value, modulus: value.norm() })
}

/// Whether the count reaches half its expected value `|C1||C2|/|G|`,
/// read off the character sum as `Re(1 + char_sum) ≥ 1/2`.
pub fn half_expected_count(t: &CharacterTable, c1: usize, c2: usize, c3: usize) -> Result<bool> {
    Ok(1.0 + char_sum(t, c1, c2, c3)?.value.re >= 0.5)
}

/// `counts[i][j][k]` = number of `(x, y) ∈ C_i × C_j` with `xy` equal to the
/// representative of `C_k`.
pub fn brute_force_class_counts(g: &FiniteGroup) -> Vec<Vec<Vec<u64>>> {
    let classes = g.conjugacy_classes();
    let c = classes.len();
    let mut counts = vec![vec![vec![0u64; c]; c]; c];
    for (k, ck) in classes.iter().enumerate() {
        let z = ck.representative;
        for (i, ci) in classes.iter().enumerate() {
            for x in ci.members.iter() {
                let y = g.mul(g.inv(x), z);
                counts[i][g.class_of(y)][k] += 1;
            }
        }
    }
    counts
}

/// Matches table columns to group classes by `(size, rep_order)` and then by
/// agreement of every class-multiplication count. Backtracks over
/// assignments within each ambiguous signature.
pub fn match_classes(t: &CharacterTable, g: &FiniteGroup) -> Result<Vec<usize>> {
    if t.order != g.order() {
        return Err(Error::CharacterTable(format!("table order {} but group order {}", t.order, g.order())));
    }
    let classes = g.conjugacy_classes();
    let c = t.class_count();
    if classes.len() != c {
        return Err(Error::CharacterTable(format!("table has {c} classes, group has {}", classes.len())));
    }
    let sig_t: Vec<(usize, usize)> = t.classes.iter().map(|k| (k.size, k.rep_order)).collect();
    let sig_g: Vec<(usize, usize)> = classes.iter().map(|k| (k.size, g.element_order(k.representative))).collect();
    let mut sorted_t = sig_t.clone();
    let mut sorted_g = sig_g.clone();
    sorted_t.sort_unstable();
    sorted_g.sort_unstable();
    if sorted_t != sorted_g {
        return Err(Error::CharacterTable("class (size, order) signatures differ from the group".into()));
    }

    let mut table_counts = vec![vec![vec![0u64; c]; c]; c];
    for a in 0..c {
        for b in 0..c {
            for d in 0..c {
                table_counts[a][b][d] = frobenius_count(t, a, b, d)?.count;
            }
        }
    }
    let group_counts = brute_force_class_counts(g);

    // Pinned representatives fix their column outright.
    let pinned: Vec<Option<usize>> = t
        .classes
        .iter()
        .map(|k| k.representative.map(|r| if r < g.order() { g.class_of(r) } else { usize::MAX }))
        .collect();

    struct Search<'a> {
        c: usize,
        sig_t: &'a [(usize, usize)],
        sig_g: &'a [(usize, usize)],
        pinned: &'a [Option<usize>],
        tc: &'a [Vec<Vec<u64>>],
        gc: &'a [Vec<Vec<u64>>],
        map: Vec<usize>,
        used: Vec<bool>,
    }

    impl Search<'_> {
        fn consistent(&self, a: usize) -> bool {
            (0..=a).all(|b| {
                (0..=a).all(|d| {
                    let idx = [a, b, d];
                    // every ordered triple among assigned columns that involves `a`
                    [[idx[0], idx[1], idx[2]], [idx[1], idx[0], idx[2]], [idx[1], idx[2], idx[0]]]
                        .iter()
                        .all(|&[p, q, r]| self.tc[p][q][r] == self.gc[self.map[p]][self.map[q]][self.map[r]])
                })
            })
        }

        fn run(&mut self, a: usize) -> bool {
            if a == self.c {
                return true;
            }
            for i in 0..self.c {
                if self.used[i] || self.sig_g[i] != self.sig_t[a] {
                    continue;
                }
                if matches!(self.pinned[a], Some(p) if p != i) {
                    continue;
                }
                self.map[a] = i;
                self.used[i] = true;
                if self.consistent(a) && self.run(a + 1) {
                    return true;
                }
                self.used[i] = false;
            }
            false
        }
    }

    let mut search = Search {
        c,
        sig_t: &sig_t,
        sig_g: &sig_g,
        pinned: &pinned,
        tc: &table_counts,
        gc: &group_counts,
        map: vec![usize::MAX; c],
        used: vec![false; c],
    };
    if search.run(0) {
        Ok(search.map)
    } else {
        Err(Error::CharacterTable(format!(
            "no class matching reproduces the brute-force counts of {}",
            g.name()
        )))
    }
}
