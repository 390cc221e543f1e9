//! Deterministic factorizations `G = X·Y` with `|X| ≤ x`, `|Y| ≤ 2|G|/x`,
//! and square roots `R² = G` with `|R| ≤ √(8|G|)`.
//!
//! Targets are held as exact rationals `x²`, so size bounds are integer
//! comparisons: `|X|² ≤ x²` and `|Y|²·x² ≤ 4|G|²`.

use std::fmt;
use std::str::FromStr;

use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::cover::product_cover_check;
use crate::error::{Error, Result};
use crate::group::{FiniteGroup, GroupOps};
use crate::mask::SubsetMask;
use crate::report::mask_as_list;
use crate::subgroup::{find_subgroup, normal_subgroups, quotient, right_coset_reps};

type Q = Ratio<i128>;

/// A positive real `x` given exactly by the rational `x²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Target {
    sq: Q,
}

impl Target {
    pub fn from_square(sq: Q) -> Result<Self> {
        if sq <= Q::zero() {
            return Err(Error::InvalidParameter(format!("target square {sq} is not positive")));
        }
        Ok(Target { sq })
    }

    pub fn from_ratio(x: Q) -> Result<Self> {
        Self::from_square(x * x)
    }

    pub fn integer(x: i128) -> Self {
        Target { sq: Q::from_integer(x * x) }
    }

    /// `√m` for a positive integer `m`.
    pub fn sqrt_of(m: i128) -> Self {
        Target { sq: Q::from_integer(m) }
    }

    pub fn square(&self) -> Q {
        self.sq
    }

    pub fn value(&self) -> f64 {
        (*self.sq.numer() as f64 / *self.sq.denom() as f64).sqrt()
    }

    /// `x / k`.
    pub fn div(&self, k: usize) -> Self {
        let k = k as i128;
        Target { sq: self.sq / (k * k) }
    }

    /// The mirrored target `2n/x`.
    pub fn mirror(&self, n: usize) -> Self {
        let n = n as i128;
        Target { sq: Q::from_integer(4 * n * n) / self.sq }
    }

    /// `k ≤ x`.
    pub fn admits_x(&self, k: usize) -> bool {
        Q::from_integer((k * k) as i128) <= self.sq
    }

    /// `k ≤ 2n/x`.
    pub fn admits_y(&self, k: usize, n: usize) -> bool {
        let (k, n) = (k as i128, n as i128);
        self.sq * (k * k) <= Q::from_integer(4 * n * n)
    }

    /// `x ≤ k`.
    pub fn at_most(&self, k: usize) -> bool {
        self.sq <= Q::from_integer((k * k) as i128)
    }

    /// `k < x`.
    pub fn exceeded_by(&self, k: usize) -> bool {
        Q::from_integer((k * k) as i128) > self.sq
    }

    /// `k ≥ x/2`.
    pub fn half_at_most(&self, k: usize) -> bool {
        Q::from_integer((4 * k * k) as i128) >= self.sq
    }

    /// `⌊x⌋`.
    pub fn floor(&self) -> usize {
        let q = (self.sq.numer() / self.sq.denom()) as u128;
        let mut r = q.sqrt();
        while Q::from_integer(((r + 1) * (r + 1)) as i128) <= self.sq {
            r += 1;
        }
        while r > 0 && Q::from_integer((r * r) as i128) > self.sq {
            r -= 1;
        }
        r as usize
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sqrt({})", self.sq)
    }
}

impl Serialize for Target {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.value())
    }
}

/// Accepts `sqrt(R)`, a fraction `p/q`, or a decimal such as `4.69`.
impl FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("cannot parse target {s:?}"));
        let s = s.trim();
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            return Target::from_square(parse_rational(inner).ok_or_else(bad)?);
        }
        Target::from_ratio(parse_rational(s).ok_or_else(bad)?)
    }
}

fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let (p, q): (i128, i128) = (p.trim().parse().ok()?, q.trim().parse().ok()?);
        return (q != 0).then(|| Q::new(p, q));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: i128 = format!("{int}{frac}").parse().ok()?;
    Some(Q::new(digits, 10i128.pow(frac.len() as u32)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Case {
    /// `x ≤ 2`: `X = {e}`, `Y = G`.
    Trivial,
    /// Subgroup `H` with `|H| > x`: recurse into `H`, spread `Y` over cosets.
    A,
    /// Subgroup `H` with `x/2 ≤ |H| ≤ x`: `X = H`, `Y` = coset representatives.
    APrime,
    /// Normal `N` with `|N| < x/2`: recurse into `G/N` with `x/|N|`.
    B,
    /// Prime cyclic group.
    Abelian,
    /// Nonabelian simple group via a subgroup of order at least `√|G|`.
    SimpleMax,
}

#[derive(Clone, Debug, Serialize)]
pub struct TraceStep {
    pub depth: usize,
    pub group_order: usize,
    pub x: f64,
    /// Exact `x²` as `[numerator, denominator]`.
    pub x_squared: [i128; 2],
    /// The target was above `√(2|G|)` and replaced by `2|G|/x`.
    pub mirrored: bool,
    pub case: Case,
    pub subgroup_order: Option<usize>,
    pub quotient_order: Option<usize>,
}

impl TraceStep {
    /// Re-derives the case precondition from the recorded numbers.
    pub fn precondition_holds(&self) -> bool {
        let Ok(t) = Target::from_square(Q::new(self.x_squared[0], self.x_squared[1])) else {
            return false;
        };
        let n = self.group_order;
        let normalized = t.sq <= Q::from_integer(2 * n as i128);
        normalized
            && match self.case {
                Case::Trivial => t.at_most(2),
                Case::A => self
                    .subgroup_order
                    .is_some_and(|h| h < n && n.is_multiple_of(h) && t.exceeded_by(h)),
                Case::SimpleMax => self
                    .subgroup_order
                    .is_some_and(|h| h < n && n.is_multiple_of(h) && t.half_at_most(h) && h * h >= n),
                Case::APrime => self.subgroup_order.is_some_and(|h| h < n && n.is_multiple_of(h) && t.half_at_most(h) && t.admits_x(h)),
                Case::B => match (self.subgroup_order, self.quotient_order) {
                    (Some(k), Some(q)) => k > 1 && k < n && k * q == n && !t.half_at_most(k),
                    _ => false,
                },
                Case::Abelian => n >= 2 && (2..n).all(|d| !n.is_multiple_of(d)),
            }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionCertificate {
    pub group: String,
    pub order: usize,
    pub x_target: Target,
    #[serde(serialize_with = "mask_as_list")]
    pub x: SubsetMask,
    #[serde(serialize_with = "mask_as_list")]
    pub y: SubsetMask,
    pub x_size: usize,
    pub y_size: usize,
    pub trace: Vec<TraceStep>,
    /// `X·Y = G` by exhaustive product check.
    pub verified: bool,
    pub bounds_hold: bool,
}

fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

/// Residue sets `X, Y ⊆ Z/p` with `X + Y = Z/p`, `|X| ≤ x`, `|Y| ≤ 2p/x`.
///
/// The direct construction is tried first; when its `Y` is too large the
/// construction for the mirrored target `2p/x` is used with the sides swapped.
pub fn cyclic_decompose(p: usize, x: &Target) -> Result<(Vec<usize>, Vec<usize>)> {
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    if !Target::integer(2).at_most_target(x) || !x.at_most(p) {
        return Err(Error::InvalidParameter(format!("need 2 ≤ x ≤ p, got x = {} for p = {p}", x.value())));
    }
    let ok = |xs: &[usize], ys: &[usize]| x.admits_x(xs.len()) && x.admits_y(ys.len(), p);
    let (xs, ys) = cyclic_direct(p, x);
    if ok(&xs, &ys) {
        return check_cyclic(p, x, xs, ys);
    }
    let (mx, my) = cyclic_direct(p, &x.mirror(p));
    if ok(&my, &mx) {
        return check_cyclic(p, x, my, mx);
    }
    Err(Error::BoundViolation(format!("no cyclic construction for p = {p}, x = {}", x.value())))
}

impl Target {
    fn at_most_target(&self, other: &Target) -> bool {
        self.sq <= other.sq
    }
}

fn cyclic_direct(p: usize, x: &Target) -> (Vec<usize>, Vec<usize>) {
    if p >= 11 && !x.exceeded_by(p - 2) {
        // x ≥ p − 2: even residues plus a unit step
        return ((0..p).step_by(2).collect(), vec![0, 1]);
    }
    let a = x.floor().clamp(1, p);
    let b = p.div_ceil(a);
    ((0..a).collect(), (0..b).map(|j| j * a).collect())
}

fn check_cyclic(p: usize, x: &Target, xs: Vec<usize>, ys: Vec<usize>) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut hit = vec![false; p];
    for &a in &xs {
        for &b in &ys {
            hit[(a + b) % p] = true;
        }
    }
    if !hit.iter().all(|&h| h) || !x.admits_x(xs.len()) || !x.admits_y(ys.len(), p) {
        return Err(Error::BoundViolation(format!("cyclic construction failed for p = {p}, x = {}", x.value())));
    }
    Ok((xs, ys))
}

struct Decomposer {
    trace: Vec<TraceStep>,
}

impl Decomposer {
    fn step(&mut self, depth: usize, n: usize, x: &Target, mirrored: bool, case: Case) -> usize {
        self.trace.push(TraceStep {
            depth,
            group_order: n,
            x: x.value(),
            x_squared: [*x.sq.numer(), *x.sq.denom()],
            mirrored,
            case,
            subgroup_order: None,
            quotient_order: None,
        });
        self.trace.len() - 1
    }

    /// `G = X·Y` with `|X| ≤ x`, `|Y| ≤ 2n/x`, for `2 ≤ x ≤ n`.
    fn run(&mut self, g: &FiniteGroup, x: Target, depth: usize) -> Result<(SubsetMask, SubsetMask)> {
        let n = g.order();
        if x.sq > Q::from_integer(2 * n as i128) {
            // G = G⁻¹ = Ỹ⁻¹X̃⁻¹ for a factorization with the mirrored target.
            let (xt, yt) = self.normalized(g, x.mirror(n), depth, true)?;
            let invert = |m: &SubsetMask| SubsetMask::from_indices(n, m.iter().map(|a| g.inv(a)));
            return Ok((invert(&yt), invert(&xt)));
        }
        self.normalized(g, x, depth, false)
    }

    fn normalized(&mut self, g: &FiniteGroup, x: Target, depth: usize, mirrored: bool) -> Result<(SubsetMask, SubsetMask)> {
        let n = g.order();
        if x.at_most(2) {
            self.step(depth, n, &x, mirrored, Case::Trivial);
            return Ok((SubsetMask::singleton(n, 0), g.full_mask()));
        }
        if let Some(h) = find_subgroup(g, |k| x.half_at_most(k)) {
            return self.via_subgroup(g, &h, x, depth, mirrored, None);
        }
        let normals = normal_subgroups(g);
        let proper: Vec<&SubsetMask> = normals.subgroups.iter().filter(|s| s.count() > 1 && s.count() < n).collect();
        if let Some(h) = proper.iter().find(|s| x.half_at_most(s.count())) {
            return self.via_subgroup(g, h, x, depth, mirrored, None);
        }
        if let Some(nrm) = proper.iter().max_by_key(|s| s.count()) {
            return self.via_quotient(g, nrm, x, depth, mirrored);
        }
        if g.is_abelian() {
            // simple abelian: Z/p
            let i = self.step(depth, n, &x, mirrored, Case::Abelian);
            let gen = 1;
            let (rx, ry) = cyclic_decompose(n, &x)?;
            self.trace[i].quotient_order = Some(n);
            let elem = |k: usize| g.pow(gen, k as i64);
            return Ok((
                SubsetMask::from_indices(n, rx.into_iter().map(elem)),
                SubsetMask::from_indices(n, ry.into_iter().map(elem)),
            ));
        }
        let root = Target::sqrt_of(n as i128);
        if let Some(h) = find_subgroup(g, |k| root.at_most(k)) {
            return self.via_subgroup(g, &h, x, depth, mirrored, Some(Case::SimpleMax));
        }
        Err(Error::DecompositionStuck { group: g.name().to_string(), order: n })
    }

    /// Case (b): factor `G/N` at `x/|N|`, take full preimages on the `X`
    /// side and the lowest element of each coset on the `Y` side.
    fn via_quotient(&mut self, g: &FiniteGroup, nrm: &SubsetMask, x: Target, depth: usize, mirrored: bool) -> Result<(SubsetMask, SubsetMask)> {
        let n = g.order();
        let k = nrm.count();
        let i = self.step(depth, n, &x, mirrored, Case::B);
        let (q, proj) = quotient(g, nrm)?;
        self.trace[i].subgroup_order = Some(k);
        self.trace[i].quotient_order = Some(q.order());
        let (xq, yq) = self.run(&q, x.div(k), depth + 1)?;
        let xs = SubsetMask::from_indices(n, (0..n).filter(|&a| xq.contains(proj.apply(a))));
        let mut ys = SubsetMask::empty(n);
        let mut want = yq;
        for a in 0..n {
            let c = proj.apply(a);
            if want.contains(c) {
                ys.insert(a);
                want.remove(c);
            }
        }
        Ok((xs, ys))
    }

    fn via_subgroup(
        &mut self,
        g: &FiniteGroup,
        h: &SubsetMask,
        x: Target,
        depth: usize,
        mirrored: bool,
        label: Option<Case>,
    ) -> Result<(SubsetMask, SubsetMask)> {
        let n = g.order();
        let k = h.count();
        let reps = right_coset_reps(g, h);
        if x.exceeded_by(k) {
            let i = self.step(depth, n, &x, mirrored, label.unwrap_or(Case::A));
            self.trace[i].subgroup_order = Some(k);
            let (sub, embed) = g.induced_subgroup(h, &format!("{}<{k}>", g.name()))?;
            let (xh, yh) = self.run(&sub, x, depth + 1)?;
            let xs = SubsetMask::from_indices(n, xh.iter().map(|a| embed[a]));
            let mut ys = SubsetMask::empty(n);
            for b in yh.iter() {
                for &r in &reps {
                    ys.insert(g.mul(embed[b], r));
                }
            }
            Ok((xs, ys))
        } else {
            let i = self.step(depth, n, &x, mirrored, label.unwrap_or(Case::APrime));
            self.trace[i].subgroup_order = Some(k);
            Ok((h.clone(), SubsetMask::from_indices(n, reps)))
        }
    }
}

/// Factorization `G = X·Y` with `|X| ≤ x` and `|Y| ≤ 2|G|/x`, certified by an
/// exhaustive product check.
pub fn group_decompose(g: &FiniteGroup, x: Target) -> Result<DecompositionCertificate> {
    let n = g.order();
    if n == 1 {
        if !x.at_most(2) {
            return Err(Error::InvalidParameter("the trivial group admits only 1 ≤ x ≤ 2".into()));
        }
    } else if !Target::integer(2).at_most_target(&x) || !x.at_most(n) {
        return Err(Error::InvalidParameter(format!("need 2 ≤ x ≤ |G| = {n}, got {}", x.value())));
    }
    let mut d = Decomposer { trace: Vec::new() };
    let (xs, ys) = if n == 1 {
        (SubsetMask::singleton(1, 0), SubsetMask::singleton(1, 0))
    } else {
        d.run(g, x, 0)?
    };
    let verified = product_cover_check(g, &xs, &ys, &g.full_mask()).is_empty();
    let bounds_hold = x.admits_x(xs.count()) && x.admits_y(ys.count(), n);
    if !verified || !bounds_hold {
        return Err(Error::BoundViolation(format!(
            "decomposition of {} at x = {} gave |X| = {}, |Y| = {}, cover {}",
            g.name(),
            x.value(),
            xs.count(),
            ys.count(),
            if verified { "ok" } else { "incomplete" }
        )));
    }
    Ok(DecompositionCertificate {
        group: g.name().to_string(),
        order: n,
        x_target: x,
        x_size: xs.count(),
        y_size: ys.count(),
        x: xs,
        y: ys,
        trace: d.trace,
        verified,
        bounds_hold,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SquareRoot {
    pub group: String,
    pub order: usize,
    #[serde(serialize_with = "mask_as_list")]
    pub root: SubsetMask,
    pub size: usize,
    /// `√(8|G|)`.
    pub bound: f64,
    pub verified: bool,
    pub certificate: Option<DecompositionCertificate>,
}

/// `R = X ∪ Y` from the factorization at `x = √(2|G|)`, so `|R| ≤ √(8|G|)`.
pub fn square_root(g: &FiniteGroup) -> Result<SquareRoot> {
    let n = g.order();
    let (root, certificate) = if n == 1 {
        (SubsetMask::singleton(1, 0), None)
    } else {
        let cert = group_decompose(g, Target::sqrt_of(2 * n as i128))?;
        (cert.x.union(&cert.y), Some(cert))
    };
    let size = root.count();
    let verified = product_cover_check(g, &root, &root, &g.full_mask()).is_empty();
    if !verified || size * size > 8 * n {
        return Err(Error::BoundViolation(format!("square root of {} has size {size}", g.name())));
    }
    Ok(SquareRoot {
        group: g.name().to_string(),
        order: n,
        root,
        size,
        bound: (8.0 * n as f64).sqrt(),
        verified,
        certificate,
    })
}

/// Whether a trace's recursion depth is within `log₂|G|` and every step's
/// precondition re-verifies.
pub fn trace_is_valid(cert: &DecompositionCertificate) -> bool {
    let max_depth = (cert.order as f64).log2().floor() as usize;
    cert.trace.iter().all(|s| s.depth <= max_depth && s.precondition_holds())
}

/// Grid of `count` targets spread over `[2, p]`, endpoints included.
pub fn target_grid(p: usize, count: usize) -> Vec<Target> {
    let span = (p - 2) as i128;
    let steps = (count - 1) as i128;
    (0..=steps)
        .map(|i| Target::from_ratio(Q::new(2 * steps + span * i, steps)).expect("positive"))
        .collect()
}

/// `x ↦ x` values used for whole-corpus decomposition runs:
/// `2, ⌈√n⌉, √(2n), n/2, n`.
pub fn standard_targets(n: usize) -> Vec<Target> {
    let ceil_root = {
        let r = n.sqrt();
        if r * r == n {
            r
        } else {
            r + 1
        }
    };
    vec![
        Target::integer(2),
        Target::integer(ceil_root as i128),
        Target::sqrt_of(2 * n as i128),
        Target::from_ratio(Q::new(n as i128, 2)).expect("positive"),
        Target::integer(n as i128),
    ]
}

pub fn target_to_f64(t: &Target) -> f64 {
    t.sq.to_f64().unwrap_or(f64::NAN).sqrt()
}
