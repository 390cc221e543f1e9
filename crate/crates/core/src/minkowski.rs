//! Packing numbers and upper Minkowski dimension for finite unions of
//! intervals, Cantor-type sets with `A + B = [-1, 1]`, and square roots of
//! the circle and tori built from them.
//!
//! Endpoints are exact: an [`IntervalSet`] stores integer numerators over a
//! common denominator. Packings use disjoint open balls, so two centers must
//! be more than `2δ` apart; on `[-1, 1]` this gives `⌊1/δ⌋` for `δ = 1/k`.
//! Products carry the sup metric.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

pub type Q = Ratio<i64>;

pub const CANTOR_MAX_DEPTH: u32 = 12;
pub const MAX_GRID_POINTS: f64 = 1e7;
/// Largest number of centers a packing witness may hold.
pub const MAX_WITNESS_CENTERS: u128 = 20_000_000;

/// Sorted disjoint closed intervals `[s/den, e/den]` (points when `s = e`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalSet {
    den: i64,
    intervals: Vec<(i64, i64)>,
}

fn numerator_over(q: Q, den: i64) -> i64 {
    q.numer() * (den / q.denom())
}

impl IntervalSet {
    /// Sorts and merges overlapping or touching intervals.
    pub fn new(den: i64, mut raw: Vec<(i64, i64)>) -> Result<Self> {
        if den <= 0 {
            return Err(Error::InvalidParameter(format!("denominator {den} must be positive")));
        }
        if let Some(&(s, e)) = raw.iter().find(|&&(s, e)| s > e) {
            return Err(Error::InvalidParameter(format!("interval [{s}, {e}] is reversed")));
        }
        raw.sort_unstable();
        let mut intervals: Vec<(i64, i64)> = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match intervals.last_mut() {
                Some(last) if s <= last.1 => last.1 = last.1.max(e),
                _ => intervals.push((s, e)),
            }
        }
        Ok(IntervalSet { den, intervals })
    }

    pub fn segment(lo: Q, hi: Q) -> Result<Self> {
        let den = lo.denom().lcm(hi.denom());
        Self::new(den, vec![(numerator_over(lo, den), numerator_over(hi, den))])
    }

    pub fn points(points: &[Q]) -> Result<Self> {
        let den = points.iter().fold(1, |d, q| d.lcm(q.denom()));
        Self::new(den, points.iter().map(|&q| (numerator_over(q, den), numerator_over(q, den))).collect())
    }

    pub fn den(&self) -> i64 {
        self.den
    }

    pub fn intervals(&self) -> &[(i64, i64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> Q {
        Q::new(self.intervals.iter().map(|&(s, e)| e - s).sum(), self.den)
    }

    pub fn contains(&self, q: Q) -> bool {
        let den = self.den.lcm(q.denom());
        let (f, x) = (den / self.den, numerator_over(q, den));
        let i = self.intervals.partition_point(|&(s, _)| s * f <= x);
        i > 0 && x <= self.intervals[i - 1].1 * f
    }

    fn over(&self, den: i64) -> Vec<(i64, i64)> {
        let f = den / self.den;
        self.intervals.iter().map(|&(s, e)| (s * f, e * f)).collect()
    }

    /// `{scale·x + shift}` for `scale > 0`.
    pub fn affine(&self, scale: Q, shift: Q) -> Result<Self> {
        if *scale.numer() <= 0 {
            return Err(Error::InvalidParameter("affine scale must be positive".into()));
        }
        let den = (self.den * scale.denom()).lcm(shift.denom());
        let f = den / (self.den * scale.denom());
        let t = numerator_over(shift, den);
        let map = |x: i64| x * scale.numer() * f + t;
        Self::new(den, self.intervals.iter().map(|&(s, e)| (map(s), map(e))).collect())
    }

    /// Minkowski sum `{a + b}`.
    pub fn sumset(&self, other: &IntervalSet) -> Self {
        let den = self.den.lcm(&other.den);
        let (a, b) = (self.over(den), other.over(den));
        let sums = a.iter().flat_map(|&(s, e)| b.iter().map(move |&(t, u)| (s + t, e + u))).collect();
        Self::new(den, sums).expect("sums of ordered intervals are ordered")
    }
}

/// Digit points `A = {-a₀ + Σ_{i≤k} a_i 4^{-i} : a_i ∈ {0,1}}` and
/// `B = {Σ_{i≤k} b_i 4^{-i} : b_i ∈ {0,2}}`, ascending.
pub fn cantor_points(k: u32) -> Result<(Vec<Q>, Vec<Q>)> {
    check_depth(k)?;
    let scale = 4i64.pow(k);
    let digits = |mask: u32, digit: i64| -> i64 {
        (0..k).filter(|i| mask >> i & 1 == 1).map(|i| digit * 4i64.pow(i)).sum()
    };
    let mut a: Vec<Q> = (0..2i64)
        .flat_map(|a0| (0..1u32 << k).map(move |m| (a0, m)))
        .map(|(a0, m)| Q::new(-a0 * scale + digits(m, 1), scale))
        .collect();
    let mut b: Vec<Q> = (0..1u32 << k).map(|m| Q::new(digits(m, 2), scale)).collect();
    a.sort();
    b.sort();
    Ok((a, b))
}

/// `A_k` and `B_k`: the digit points fattened to closed intervals of length
/// `4^{-k}/3`.
pub fn cantor_sets(k: u32) -> Result<(IntervalSet, IntervalSet)> {
    let (a, b) = cantor_points(k)?;
    let den = 3 * 4i64.pow(k);
    let fatten = |pts: &[Q]| {
        IntervalSet::new(den, pts.iter().map(|&q| numerator_over(q, den)).map(|x| (x, x + 1)).collect())
    };
    Ok((fatten(&a)?, fatten(&b)?))
}

fn check_depth(k: u32) -> Result<()> {
    if !(1..=CANTOR_MAX_DEPTH).contains(&k) {
        return Err(Error::InvalidParameter(format!("Cantor depth {k} outside 1..={CANTOR_MAX_DEPTH}")));
    }
    Ok(())
}

/// Greedy runs in units of `1/unit`: `count` centers at `base + j·width`,
/// the first exactly at `base` unless `shifted`, the rest an infinitesimal
/// step past it.
#[derive(Clone, Copy, Debug)]
struct Run {
    base: i128,
    shifted: bool,
    count: i128,
}

struct Greedy {
    unit: i128,
    width: i128,
    runs: Vec<Run>,
}

fn greedy(s: &IntervalSet, delta: Q) -> Result<Greedy> {
    if *delta.numer() <= 0 {
        return Err(Error::InvalidParameter("δ must be positive".into()));
    }
    let unit = s.den.lcm(delta.denom()) as i128;
    let f = unit / s.den as i128;
    let width = 2 * *delta.numer() as i128 * (unit / *delta.denom() as i128);
    let mut runs = Vec::new();
    let mut last: Option<i128> = None;
    for &(a, b) in &s.intervals {
        let (a, b) = (a as i128 * f, b as i128 * f);
        let (base, shifted) = match last {
            None => (a, false),
            Some(l) if a > l + width => (a, false),
            Some(l) if l + width < b => (l + width, true),
            Some(_) => continue,
        };
        let fit = Integer::div_ceil(&(b - base), &width);
        let count = if shifted { fit } else { fit.max(1) };
        runs.push(Run { base, shifted, count });
        last = Some(base + (count - 1) * width);
    }
    Ok(Greedy { unit, width, runs })
}

/// Largest number of disjoint open `δ`-balls centered in `s`: greedy from
/// the left, which is optimal on the line.
pub fn packing_number(s: &IntervalSet, delta: Q) -> Result<u128> {
    Ok(greedy(s, delta)?.runs.iter().map(|r| r.count as u128).sum())
}

/// Greedy centers plus the windows `[c, c + 2δ]` (`(c, c + 2δ]` for shifted
/// centers). Centers more than `2δ` apart give a lower bound; windows of
/// length `2δ` covering the set bound any packing from above, since each
/// holds at most one center.
#[derive(Clone, Debug)]
pub struct PackingWitness {
    unit: i128,
    width: i128,
    centers: Vec<(i128, bool)>,
}

pub fn packing_witness(s: &IntervalSet, delta: Q) -> Result<PackingWitness> {
    let g = greedy(s, delta)?;
    let total: i128 = g.runs.iter().map(|r| r.count).sum();
    if total as u128 > MAX_WITNESS_CENTERS {
        return Err(Error::InvalidParameter(format!("packing witness with {total} centers is too large")));
    }
    let centers = g
        .runs
        .iter()
        .flat_map(|r| (0..r.count).map(move |j| (r.base + j * g.width, r.shifted || j > 0)))
        .collect();
    Ok(PackingWitness { unit: g.unit, width: g.width, centers })
}

impl PackingWitness {
    pub fn count(&self) -> usize {
        self.centers.len()
    }

    /// Centers lie in `s` and are separated; windows cover `s`.
    pub fn verify(&self, s: &IntervalSet) -> bool {
        if self.unit % s.den as i128 != 0 {
            return false;
        }
        let f = self.unit / s.den as i128;
        let iv: Vec<(i128, i128)> = s.intervals.iter().map(|&(a, b)| (a as i128 * f, b as i128 * f)).collect();
        let inside = |&(v, shifted): &(i128, bool)| {
            let i = iv.partition_point(|&(a, _)| a <= v);
            i > 0 && (v < iv[i - 1].1 || (!shifted && v == iv[i - 1].1))
        };
        let separated = self.centers.windows(2).all(|p| {
            let gap = p[1].0 - p[0].0;
            gap > self.width || (gap == self.width && p[1].1)
        });
        separated && self.centers.iter().all(inside) && self.windows_cover(&iv)
    }

    fn windows_cover(&self, iv: &[(i128, i128)]) -> bool {
        let mut j = 0;
        let mut reach: Option<i128> = None;
        for &(a, b) in iv {
            let (mut p, mut need_p) = (a, true);
            loop {
                while let Some(&(lo, open)) = self.centers.get(j) {
                    if !(lo < p || (lo == p && (!open || !need_p))) {
                        break;
                    }
                    reach = Some(reach.map_or(lo + self.width, |r| r.max(lo + self.width)));
                    j += 1;
                }
                let Some(h) = reach else { return false };
                if h < p || (h == p && !need_p) {
                    return false;
                }
                if h >= b {
                    break;
                }
                p = h;
                need_p = false;
            }
        }
        true
    }
}

/// Packing number of a product under the sup metric. The product of the
/// factor centers is a packing and the products of the factor windows are
/// cliques covering it, so once both factor witnesses verify the count is
/// exactly the product of the factor counts.
pub fn product_packing_number(factors: &[&IntervalSet], delta: Q) -> Result<u128> {
    factors.iter().try_fold(1u128, |acc, s| {
        let w = packing_witness(s, delta)?;
        if !w.verify(s) {
            return Err(Error::BoundViolation("packing witness failed verification".into()));
        }
        Ok(acc * w.count() as u128)
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SumsetCover {
    pub covered: bool,
    /// Largest distance from a target point to `A + B`; `None` if the sum is empty.
    pub worst_gap: Option<f64>,
    #[serde(skip)]
    pub worst_gap_exact: Option<Ratio<i128>>,
    pub tolerance: f64,
    pub sum_intervals: usize,
}

/// Whether every point of `[lo, hi]` is within `tolerance` of `A + B`.
pub fn sumset_cover_check(a: &IntervalSet, b: &IntervalSet, target: (Q, Q), tolerance: Q) -> SumsetCover {
    type R = Ratio<i128>;
    let wide = |q: Q| R::new(*q.numer() as i128, *q.denom() as i128);
    let s = a.sumset(b);
    let den = s.den as i128;
    let iv: Vec<(R, R)> = s.intervals.iter().map(|&(x, y)| (R::new(x as i128, den), R::new(y as i128, den))).collect();
    let (lo, hi) = (wide(target.0), wide(target.1));
    let worst = (!iv.is_empty()).then(|| {
        let mut gaps = vec![(None, Some(iv[0].0))];
        gaps.extend(iv.windows(2).map(|w| (Some(w[0].1), Some(w[1].0))));
        gaps.push((Some(iv[iv.len() - 1].1), None));
        gaps.into_iter()
            .filter_map(|(l, r): (Option<R>, Option<R>)| {
                let from = l.map_or(lo, |l| l.max(lo));
                let to = r.map_or(hi, |r| r.min(hi));
                (from <= to).then(|| match (l, r) {
                    (None, Some(r)) => r - from,
                    (Some(l), None) => to - l,
                    (Some(l), Some(r)) => {
                        let x = ((l + r) / R::from_integer(2)).clamp(from, to);
                        (x - l).min(r - x)
                    }
                    (None, None) => unreachable!(),
                })
            })
            .map(|d| d.max(R::zero()))
            .max()
            .unwrap_or_else(R::zero)
    });
    let as_f64 = |r: &R| *r.numer() as f64 / *r.denom() as f64;
    SumsetCover {
        covered: worst.as_ref().is_some_and(|w| *w <= wide(tolerance)),
        worst_gap: worst.as_ref().map(as_f64),
        worst_gap_exact: worst,
        tolerance: *tolerance.numer() as f64 / *tolerance.denom() as f64,
        sum_intervals: iv.len(),
    }
}

/// Least-squares slope of `log N_δ` against `-log δ` over a scale window.
#[derive(Clone, Debug, Serialize)]
pub struct DimensionEstimate {
    pub scales: Vec<f64>,
    pub packing_counts: Vec<u128>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
    /// `-log N_δ / log δ` per scale.
    pub ratios: Vec<f64>,
    /// Counts do not decrease as `δ` shrinks.
    pub monotone: bool,
}

impl DimensionEstimate {
    pub fn fit(scales: &[Q], counts: Vec<u128>) -> Result<Self> {
        if scales.len() < 2 || scales.len() != counts.len() {
            return Err(Error::InvalidParameter("need at least two scales with one count each".into()));
        }
        if scales.iter().any(|d| *d <= Q::zero() || *d >= Q::one()) || counts.contains(&0) {
            return Err(Error::InvalidParameter("scales must lie in (0, 1) with positive counts".into()));
        }
        let deltas: Vec<f64> = scales.iter().map(|d| *d.numer() as f64 / *d.denom() as f64).collect();
        let xs: Vec<f64> = deltas.iter().map(|d| -d.ln()).collect();
        let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
        let k = xs.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let mut order: Vec<usize> = (0..scales.len()).collect();
        order.sort_by(|&i, &j| scales[j].cmp(&scales[i]));
        Ok(DimensionEstimate {
            residuals: xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect(),
            ratios: xs.iter().zip(&ys).map(|(x, y)| y / x).collect(),
            monotone: order.windows(2).all(|w| counts[w[0]] <= counts[w[1]]),
            scales: deltas,
            packing_counts: counts,
            slope,
            intercept,
        })
    }
}

/// `δ = 4^{-j}` for `j` in `from..=to`.
pub fn dyadic_scales(from: u32, to: u32) -> Vec<Q> {
    (from..=to).map(|j| Q::new(1, 4i64.pow(j))).collect()
}

/// Dimension estimate of a product of interval sets (one factor for a subset of the line).
pub fn estimate_dimension(factors: &[&IntervalSet], scales: &[Q]) -> Result<DimensionEstimate> {
    let counts = scales
        .iter()
        .map(|&d| match factors {
            [s] => packing_number(s, d),
            _ => product_packing_number(factors, d),
        })
        .collect::<Result<_>>()?;
    DimensionEstimate::fit(scales, counts)
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductRow {
    pub delta: f64,
    pub n_x: u128,
    pub n_y: u128,
    pub n_xy: u128,
    pub n_xy_4delta: u128,
    /// `N_{4δ}(X×Y) ≤ N_δ(X)·N_δ(Y)`.
    pub upper_holds: bool,
    /// `N_δ(X×Y) ≥ N_δ(X)·N_δ(Y)`.
    pub lower_holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProductCheck {
    pub rows: Vec<ProductRow>,
    pub all_hold: bool,
}

pub fn product_dim_inequality_check(x: &IntervalSet, y: &IntervalSet, scales: &[Q]) -> Result<ProductCheck> {
    let rows: Vec<ProductRow> = scales
        .iter()
        .map(|&d| {
            let (n_x, n_y) = (packing_number(x, d)?, packing_number(y, d)?);
            let n_xy = product_packing_number(&[x, y], d)?;
            let n_xy_4delta = product_packing_number(&[x, y], d * 4)?;
            Ok(ProductRow {
                delta: *d.numer() as f64 / *d.denom() as f64,
                n_x,
                n_y,
                n_xy,
                n_xy_4delta,
                upper_holds: n_xy_4delta <= n_x * n_y,
                lower_holds: n_xy >= n_x * n_y,
            })
        })
        .collect::<Result<_>>()?;
    let all_hold = rows.iter().all(|r| r.upper_holds && r.lower_holds);
    Ok(ProductCheck { rows, all_hold })
}

/// `X·Y = T^d` on the torus `R^d/Z^d`, both of upper Minkowski dimension `d/2`.
#[derive(Clone, Debug, Serialize)]
pub struct TorusSquareRoot {
    pub d: usize,
    pub depth: u32,
    /// Grid `(Z/R)^d` checked for coverage: `R = 4^depth` on the circle, `2^depth` otherwise.
    pub grid_resolution: u64,
    pub grid_points: u64,
    /// Coordinate factors of `X` and `Y` in the fundamental domain `[0, 1]^d`.
    pub x: Vec<IntervalSet>,
    pub y: Vec<IntervalSet>,
    pub uncovered: u64,
    pub certified: bool,
    pub x_dim: DimensionEstimate,
    pub y_dim: DimensionEstimate,
    pub target_dim: f64,
}

/// For `d = 2m` the factors are `T^m × {0}` and `{0} × T^m`. For odd `d`
/// the middle circle is split as `(A + 1)/2` and `B/2`, whose sum is all of
/// it mod 1. Every grid point is checked; an uncovered point is an error.
pub fn torus_square_root(d: usize, depth: u32) -> Result<TorusSquareRoot> {
    if d == 0 {
        return Err(Error::InvalidParameter("torus dimension must be positive".into()));
    }
    if !(3..=CANTOR_MAX_DEPTH).contains(&depth) {
        return Err(Error::InvalidParameter(format!("depth {depth} outside 3..={CANTOR_MAX_DEPTH}")));
    }
    let resolution: u64 = if d == 1 { 4u64.pow(depth) } else { 2u64.pow(depth) };
    let points = (resolution as f64).powi(d as i32);
    if points > MAX_GRID_POINTS {
        return Err(Error::GridTooLarge { points, limit: MAX_GRID_POINTS });
    }
    let m = d / 2;
    let full = IntervalSet::segment(Q::zero(), Q::one())?;
    let zero = IntervalSet::points(&[Q::zero()])?;
    let mut x = vec![full.clone(); m];
    let mut y = vec![zero.clone(); m];
    if d % 2 == 1 {
        let (a, b) = cantor_sets(depth)?;
        let half = Q::new(1, 2);
        x.push(a.affine(half, half)?);
        y.push(b.affine(half, Q::zero())?);
    }
    x.extend(std::iter::repeat_n(zero, m));
    y.extend(std::iter::repeat_n(full, m));

    let hit: Vec<Vec<bool>> = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| {
            let s = xi.sumset(yi);
            (0..resolution as i64)
                .map(|j| {
                    let g = Q::new(j, resolution as i64);
                    s.contains(g) || s.contains(g + 1)
                })
                .collect()
        })
        .collect();
    let inner = resolution.pow(d as u32 - 1);
    let uncovered: u64 = (0..resolution)
        .into_par_iter()
        .map(|first| {
            (0..inner)
                .filter(|&rest| {
                    let mut r = rest;
                    let mut ok = hit[0][first as usize];
                    for h in &hit[1..] {
                        ok &= h[(r % resolution) as usize];
                        r /= resolution;
                    }
                    !ok
                })
                .count() as u64
        })
        .sum();
    if uncovered > 0 {
        return Err(Error::BoundViolation(format!("{uncovered} grid points of T^{d} left uncovered")));
    }

    let scales = dyadic_scales(2, depth);
    let x_dim = estimate_dimension(&x.iter().collect::<Vec<_>>(), &scales)?;
    let y_dim = estimate_dimension(&y.iter().collect::<Vec<_>>(), &scales)?;
    Ok(TorusSquareRoot {
        d,
        depth,
        grid_resolution: resolution,
        grid_points: points as u64,
        x,
        y,
        uncovered,
        certified: uncovered == 0,
        x_dim,
        y_dim,
        target_dim: d as f64 / 2.0,
    })
}
