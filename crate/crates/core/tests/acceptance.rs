//! Acceptance run: one pass/fail line per criterion, each with its time budget.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinbase::characters::{brute_force_class_counts, char_sum, frobenius_count, validate_table};
use thinbase::corpus;
use thinbase::decompose::{cyclic_decompose, group_decompose, square_root, standard_targets, target_grid, trace_is_valid};
use thinbase::minkowski::{
    cantor_sets, dyadic_scales, estimate_dimension, packing_number, product_dim_inequality_check,
    sumset_cover_check, torus_square_root, IntervalSet, Q,
};
use thinbase::perm::{factorial, fixed_points, identity, is_even, lex_unrank, random_perm, AlternatingGroup};
use thinbase::perm_stats::{count_min_fixed, perm_stat};
use thinbase::sampler::{coverage_sweep, sample_thin_pair, spot_check};
use thinbase::stratified::{stratified_thin_base, StratifiedParams};
use thinbase::tail::{balanced_size, sweep};
use thinbase::words::{waring_check, word_image, FreeWord, ImageMode};
use thinbase::{GroupOps, SubsetMask};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// `X·Y = G` by enumerating every pair.
fn pairwise_covers<G: GroupOps>(g: &G, x: &SubsetMask, y: &SubsetMask) -> bool {
    let mut hit = vec![false; g.order()];
    for a in x.iter() {
        for b in y.iter() {
            hit[g.mul(a, b)] = true;
        }
    }
    hit.into_iter().all(|h| h)
}

fn tail_bounds() -> Outcome {
    let (count, failures) = sweep(60).map_err(|e| e.to_string())?;
    let expected: usize = (2..=60).map(|n| n * n).sum();
    ensure(count == expected, || format!("checked {count} triples, expected {expected}"))?;
    ensure(failures.is_empty(), || format!("bound fails at {:?}", &failures[..failures.len().min(5)]))?;
    Ok(format!("{count} triples, both lemmas hold exactly"))
}

fn frobenius_oracle() -> Outcome {
    let mut triples = 0usize;
    let mut worst_residual = 0.0f64;
    let mut worst_identity = 0.0f64;
    for key in corpus::table_keys() {
        let t = corpus::table(key).map_err(|e| e.to_string())?;
        let g = corpus::group(key).map_err(|e| e.to_string())?;
        ensure(g.order() <= 2000, || format!("{key} exceeds order 2000"))?;
        let map = validate_table(&t, Some(&g)).map_err(|e| format!("{key}: {e}"))?.class_map.unwrap();
        let brute = brute_force_class_counts(&g);
        let c = t.class_count();
        for i in 0..c {
            for j in 0..c {
                let mut weighted = 0u64;
                for k in 0..c {
                    let f = frobenius_count(&t, i, j, k).map_err(|e| format!("{key}: {e}"))?;
                    let want = brute[map[i]][map[j]][map[k]];
                    ensure(f.count == want, || format!("{key} ({i},{j},{k}): {} vs brute force {want}", f.count))?;
                    ensure(f.residual < 1e-6, || format!("{key} ({i},{j},{k}): residual {}", f.residual))?;
                    worst_residual = worst_residual.max(f.residual);
                    let s = char_sum(&t, i, j, k).map_err(|e| e.to_string())?;
                    let rhs = f.count as f64 * t.order as f64 / (t.classes[i].size * t.classes[j].size) as f64 - 1.0;
                    let err = (s.value.re - rhs).abs().max(s.value.im.abs());
                    ensure(err <= 1e-9, || format!("{key} ({i},{j},{k}): char sum off by {err:e}"))?;
                    worst_identity = worst_identity.max(err);
                    weighted += f.count * t.classes[k].size as u64;
                    triples += 1;
                }
                let want = (t.classes[i].size * t.classes[j].size) as u64;
                ensure(weighted == want, || format!("{key} ({i},{j}): counts sum to {weighted}, want {want}"))?;
            }
        }
    }
    Ok(format!(
        "{triples} triples over {} tables, max residual {worst_residual:.1e}, max char-sum error {worst_identity:.1e}",
        corpus::table_keys().count()
    ))
}

fn deterministic_decomposition() -> Outcome {
    let mut certs = 0;
    let mut out_of_domain = 0;
    let mut a5_root = 0;
    for key in corpus::group_keys() {
        let g = corpus::group(key).map_err(|e| e.to_string())?;
        let n = g.order();
        for x in standard_targets(n) {
            if x.value() < 2.0 {
                // |G|/2 falls below 2 for |G| ≤ 3.
                out_of_domain += 1;
                continue;
            }
            let c = group_decompose(&g, x).map_err(|e| format!("{key} at x = {}: {e}", x.value()))?;
            ensure(c.verified && c.bounds_hold, || format!("{key} at x = {}: certificate flags unset", x.value()))?;
            ensure(pairwise_covers(&g, &c.x, &c.y), || format!("{key} at x = {}: XY ≠ G", x.value()))?;
            ensure(trace_is_valid(&c), || format!("{key} at x = {}: invalid trace", x.value()))?;
            ensure(x.admits_x(c.x.count()) && x.admits_y(c.y.count(), n), || {
                format!("{key} at x = {}: |X| = {}, |Y| = {}", x.value(), c.x.count(), c.y.count())
            })?;
            certs += 1;
        }
        let r = square_root(&g).map_err(|e| format!("{key}: {e}"))?;
        ensure(pairwise_covers(&g, &r.root, &r.root), || format!("{key}: R² ≠ G"))?;
        ensure(r.size * r.size <= 8 * n, || format!("{key}: |R| = {} > √(8·{n})", r.size))?;
        if key == "a5" {
            a5_root = r.size;
        }
    }
    ensure(a5_root > 0 && a5_root <= 21, || format!("|R| = {a5_root} for A5"))?;
    Ok(format!(
        "{certs} certificates and {} square roots verified pairwise ({out_of_domain} targets below 2 skipped), |R(A5)| = {a5_root}",
        corpus::group_keys().count()
    ))
}

fn cyclic_sweep() -> Outcome {
    let primes: Vec<usize> = (2..=101).filter(|&p| (2..p).all(|d| p % d != 0)).collect();
    let mut runs = 0;
    for &p in &primes {
        for x in target_grid(p, 20) {
            let (xs, ys) = cyclic_decompose(p, &x).map_err(|e| format!("p = {p}, x = {}: {e}", x.value()))?;
            let mut hit = vec![false; p];
            for &a in &xs {
                for &b in &ys {
                    hit[(a + b) % p] = true;
                }
            }
            ensure(hit.iter().all(|&h| h), || format!("p = {p}, x = {}: X + Y ≠ Z/p", x.value()))?;
            ensure(x.admits_x(xs.len()) && x.admits_y(ys.len(), p), || {
                format!("p = {p}, x = {}: |X| = {}, |Y| = {}", x.value(), xs.len(), ys.len())
            })?;
            runs += 1;
        }
    }
    Ok(format!("{} primes, {runs} targets", primes.len()))
}

fn thin_base_sampler() -> Outcome {
    let g = corpus::group("a7").map_err(|e| e.to_string())?;
    let n = g.order();
    ensure(n == 2520, || format!("A7 has order {n}"))?;
    let e2 = std::f64::consts::E.powi(2);
    let x0 = (2.0 * e2 * n as f64 * (n as f64).ln()).sqrt().ceil() as usize;
    let from_lib = balanced_size(n, 1.0).map_err(|e| e.to_string())?;
    ensure(x0 == 541 && from_lib == x0, || format!("x0 = {x0}, balanced_size = {from_lib}"))?;
    let full = g.full_mask();
    let r = sample_thin_pair(&g, &full, &full, &full, x0, x0, 0, 20).map_err(|e| e.to_string())?;
    ensure(r.certified, || format!("not certified after {} attempts", r.attempts))?;
    let checked = spot_check(&g, &r.x0, &r.y0, &full, 0.01, 0).map_err(|z| format!("spot check fails at {z}"))?;
    let sizes = [300, 400, 500, 541, 700];
    let rows = coverage_sweep(&g, &full, &full, &full, &sizes, 0, 20).map_err(|e| e.to_string())?;
    for w in rows.windows(2) {
        let ok = w[0].fractions.iter().zip(&w[1].fractions).all(|(a, b)| a <= b) && w[0].mean <= w[1].mean;
        ensure(ok, || format!("coverage drops from size {} to {}", w[0].size, w[1].size))?;
    }
    let means: Vec<String> = rows.iter().map(|r| format!("{}:{:.4}", r.size, r.mean)).collect();
    Ok(format!(
        "x0 = {x0}, certified on attempt {}, {checked} elements rechecked, mean coverage {}",
        r.attempts,
        means.join(" ")
    ))
}

fn waring() -> Outcome {
    let sq = FreeWord::power(2).map_err(|e| e.to_string())?;
    let mut sizes = Vec::new();
    for key in ["a5", "a6", "psl2_7"] {
        let g = corpus::group(key).map_err(|e| e.to_string())?;
        let r = waring_check(&g, &sq, &sq).map_err(|e| e.to_string())?;
        ensure(r.holds, || format!("{key}: {} elements uncovered", r.uncovered.count()))?;
        sizes.push(format!("{key}:{}", r.image1_size));
    }
    let a5 = corpus::group("a5").map_err(|e| e.to_string())?;
    let img = word_image(&a5, &FreeWord::commutator(), ImageMode::Exhaustive).map_err(|e| e.to_string())?;
    ensure(img.exact && img.image == a5.full_mask(), || format!("commutator image has {} elements", img.image.count()))?;
    Ok(format!("square images {}, commutator image of A5 is all 60 elements", sizes.join(" ")))
}

fn stratified() -> Outcome {
    let c = FreeWord::commutator();
    let cover = stratified_thin_base(7, &c, &c, StratifiedParams::default(), 0).map_err(|e| e.to_string())?;
    let r = &cover.report;
    ensure(r.certified && r.x_in_image && r.y_in_image, || "report flags not all set".into())?;

    // Recheck on the table-backed A7: images and the cover by pairwise enumeration.
    let a7 = corpus::group("a7").map_err(|e| e.to_string())?;
    let index: HashMap<Vec<u8>, usize> = (0..a7.order())
        .map(|g| (a7.perm_image(g).unwrap().iter().map(|&v| v as u8).collect(), g))
        .collect();
    let ranked = AlternatingGroup::new(7).map_err(|e| e.to_string())?;
    let to_table = |m: &SubsetMask| SubsetMask::from_indices(a7.order(), m.iter().map(|g| index[ranked.perm(g)]));
    let (x, y) = (to_table(&cover.x), to_table(&cover.y));
    let image = word_image(&a7, &c, ImageMode::Exhaustive).map_err(|e| e.to_string())?.image;
    ensure(x.is_subset(&image) && y.is_subset(&image), || "X or Y leaves w(A7)".into())?;
    ensure(pairwise_covers(&a7, &x, &y), || "XY ≠ A7 under pairwise enumeration".into())?;
    ensure(r.tail_size as u128 == r.tail_expected, || format!("tail {} vs {}", r.tail_size, r.tail_expected))?;
    ensure(r.tail_expected == count_min_fixed(7, 5).unwrap().even, || "tail count mismatch".into())?;

    let c53 = count_min_fixed(5, 3).map_err(|e| e.to_string())?;
    ensure(c53.exact == 11 && c53.bound == 40.0 && c53.bound_holds, || format!("{c53:?}"))?;
    for n in 1..=8 {
        let perms: Vec<Vec<u8>> = (0..factorial(n) as usize).map(|k| lex_unrank(n, k)).collect();
        for m in 0..=n {
            let c = count_min_fixed(n, m).map_err(|e| e.to_string())?;
            let all = perms.iter().filter(|p| fixed_points(p) >= m).count() as u128;
            let even = perms.iter().filter(|p| fixed_points(p) >= m && is_even(p)).count() as u128;
            ensure(c.exact == all && c.even == even, || format!("n = {n}, m = {m}: {} vs {all}", c.exact))?;
        }
    }
    let skipped = r.strata.iter().filter(|s| s.skipped.is_some()).count();
    Ok(format!(
        "|X| = {}, |Y| = {}, |X|/√(7!·ln 7!) = {:.3}, {} strata ({skipped} with trivial image), tail {}, patches {}; count_min_fixed(5,3) = 11 ≤ 40",
        r.x_size,
        r.y_size,
        r.x_ratio,
        r.strata.len(),
        r.tail_size,
        r.tail_patched + r.residual_patched
    ))
}

fn exponent() -> Outcome {
    for n in 5..=50 {
        let id = perm_stat(&identity(n)).map_err(|e| e.to_string())?;
        ensure(id.exponent == 1.0, || format!("E(identity) = {} for n = {n}", id.exponent))?;
        let cycle: Vec<u8> = (0..n).map(|i| ((i + 1) % n) as u8).collect();
        let s = perm_stat(&cycle).map_err(|e| e.to_string())?;
        ensure(s.exponent == 1.0 / n as f64, || format!("E(n-cycle) = {} for n = {n}", s.exponent))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let n = rng.gen_range(5..=100);
        let s = perm_stat(&random_perm(n, &mut rng)).map_err(|e| e.to_string())?;
        worst = worst.max((s.e_sum() - 1.0).abs());
    }
    ensure(worst <= 1e-12, || format!("Σe_i off by {worst:e}"))?;
    let p: Vec<u8> = vec![1, 2, 3, 4, 5, 0, 7, 6];
    let s = perm_stat(&p).map_err(|e| e.to_string())?;
    ensure((s.exponent - 5.0 / 18.0).abs() <= 1e-12, || format!("E = {} for type (6,2)", s.exponent))?;
    Ok(format!("E(identity) = 1 and E(n-cycle) = 1/n for n = 5..50, max |Σe_i − 1| = {worst:.1e}, E(6,2) = {:.15}", s.exponent))
}

fn minkowski() -> Outcome {
    let unit = IntervalSet::segment(Q::from_integer(-1), Q::from_integer(1)).map_err(|e| e.to_string())?;
    for k in 1..=100 {
        let n = packing_number(&unit, Q::new(1, k)).map_err(|e| e.to_string())?;
        ensure(n == k as u128, || format!("N_(1/{k}) = {n}"))?;
    }
    let (a, b) = cantor_sets(10).map_err(|e| e.to_string())?;
    let scales = dyadic_scales(4, 10);
    let da = estimate_dimension(&[&a], &scales).map_err(|e| e.to_string())?;
    let db = estimate_dimension(&[&b], &scales).map_err(|e| e.to_string())?;
    for (name, d) in [("A", &da), ("B", &db)] {
        ensure((0.45..=0.55).contains(&d.slope), || format!("dim {name} ≈ {}", d.slope))?;
    }
    for k in 1..=10 {
        let (a, b) = cantor_sets(k).map_err(|e| e.to_string())?;
        let c = sumset_cover_check(&a, &b, (Q::from_integer(-1), Q::from_integer(1)), Q::new(1, 4i64.pow(k)));
        ensure(c.covered, || format!("A + B misses [-1, 1] at depth {k}: gap {:?}", c.worst_gap))?;
    }
    let point = IntervalSet::points(&[Q::from_integer(0)]).map_err(|e| e.to_string())?;
    let (a8, _) = cantor_sets(8).map_err(|e| e.to_string())?;
    let coarse = [Q::new(1, 10), Q::new(1, 100)];
    let checks = [
        ("[-1,1]²", product_dim_inequality_check(&unit, &unit, &coarse)),
        ("point×[-1,1]", product_dim_inequality_check(&point, &unit, &coarse)),
        ("A×A", product_dim_inequality_check(&a8, &a8, &dyadic_scales(2, 8))),
    ];
    let mut rows = 0;
    for (name, r) in checks {
        let r = r.map_err(|e| e.to_string())?;
        ensure(r.all_hold, || format!("product inequality fails on {name}"))?;
        rows += r.rows.len();
    }
    let mut dims = Vec::new();
    for (d, depth) in [(1, 8), (2, 8), (3, 6)] {
        let t = torus_square_root(d, depth).map_err(|e| format!("d = {d}: {e}"))?;
        let tol = 0.05 * d as f64;
        let ok = t.certified && (t.x_dim.slope - t.target_dim).abs() <= tol && (t.y_dim.slope - t.target_dim).abs() <= tol;
        ensure(ok, || format!("d = {d}: dims {} and {}", t.x_dim.slope, t.y_dim.slope))?;
        dims.push(format!("d={d}:{:.3}/{:.3}", t.x_dim.slope, t.y_dim.slope));
    }
    Ok(format!(
        "N_δ([-1,1]) = ⌊1/δ⌋ for k ≤ 100, dim A ≈ {:.3}, dim B ≈ {:.3}, sumset covers at depths 1..10, {rows} product rows hold, tori {}",
        da.slope,
        db.slope,
        dims.join(" ")
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, u64, fn() -> Outcome); 9] = [
        ("tail-bound certification", 30, tail_bounds),
        ("Frobenius oracle equivalence", 120, frobenius_oracle),
        ("deterministic decomposition", 120, deterministic_decomposition),
        ("cyclic lemma sweep", 10, cyclic_sweep),
        ("thin-base sampler", 300, thin_base_sampler),
        ("Waring check", 60, waring),
        ("alternating stratified cover", 600, stratified),
        ("E(g) statistic", 10, exponent),
        ("Minkowski module", 120, minkowski),
    ];
    let mut failed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let outcome = outcome.and_then(|detail| {
            if took <= Duration::from_secs(*budget) {
                Ok(detail)
            } else {
                Err(format!("{detail}; over the {budget} s budget"))
            }
        });
        let secs = took.as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {} ({name}): PASS in {secs:.2} s of {budget} s: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} ({name}): FAIL in {secs:.2} s: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
