//! `thinbase`: command-line harness over the thinbase library.
//!
//! Every subcommand writes one JSON report (stdout or `--out`). Exit status
//! is 0 when every certification in the report passed, 1 when a result came
//! back uncertified, and 2 on usage or data errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use thinbase::characters::{
    brute_force_class_counts, char_sum, frobenius_count, validate_table, CharacterTable, COUNT_TOLERANCE,
};
use thinbase::cover::table_product_set;
use thinbase::decompose::{group_decompose, square_root, Target};
use thinbase::io::GroupFile;
use thinbase::minkowski::{
    cantor_sets, dyadic_scales, estimate_dimension, product_dim_inequality_check, sumset_cover_check,
    torus_square_root, IntervalSet, Q,
};
use thinbase::perm::cycle_type;
use thinbase::perm_stats::{count_min_fixed, perm_stat};
use thinbase::sampler::{coverage_sweep, sample_thin_pair, spot_check};
use thinbase::stratified::{stratified_thin_base, StratifiedParams};
use thinbase::tail::{balanced_size, disjoint_prob, small_intersection_prob, sweep, TailQuery};
use thinbase::words::{waring_check, word_image, FreeWord, ImageMode};
use thinbase::{corpus, FiniteGroup, GroupOps};

#[derive(Parser)]
#[command(name = "thinbase", version, about = "Thin bases, square roots and word-map covers of finite groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Serialize)]
struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write tabular sweep data as CSV.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    /// Run the independent brute-force oracle where one exists (default).
    #[arg(long, global = true, overrides_with = "no_verify")]
    verify: bool,
    #[arg(long, global = true)]
    no_verify: bool,
    /// Omit wall-clock timings so reports compare byte for byte.
    #[arg(long, global = true)]
    normalize_timings: bool,
}

#[derive(Subcommand, Serialize)]
#[serde(untagged)]
enum Command {
    /// Factor G = XY with |X| ≤ x and |Y| ≤ 2|G|/x.
    Decompose(DecomposeArgs),
    /// A subset R with R² = G and |R| ≤ √(8|G|).
    SquareRoot(GroupArgs),
    /// Random thin pair X0·Y0 covering G, optionally inside a word image.
    ThinBase(ThinBaseArgs),
    /// Whether w1(G)·w2(G) = G.
    WaringCheck(WaringArgs),
    /// Class-multiplication counts from a character table, checked against the group.
    Frobenius(FrobeniusArgs),
    /// Character sum over nontrivial characters for one class triple.
    CharSum(CharSumArgs),
    /// Cycle statistics of a permutation and fixed-point counts.
    PermStats(PermStatsArgs),
    /// Stratified word-image cover of A_n.
    Stratified(StratifiedArgs),
    /// Packing numbers, dimension estimates, Cantor sumsets and torus square roots.
    MinkDim(MinkArgs),
    /// Exact hypergeometric probabilities against their exponential bounds.
    TailBounds(TailArgs),
    /// Combine reports; certified only if every input is.
    ReportMerge(MergeArgs),
}

#[derive(Args, Serialize)]
struct GroupArgs {
    /// Group JSON file, or the key of a shipped corpus group.
    #[arg(long)]
    group: String,
}

#[derive(Args, Serialize)]
struct DecomposeArgs {
    #[arg(long)]
    group: String,
    /// Target size: decimal, `p/q` or `sqrt(R)`.
    #[arg(long)]
    x: String,
}

#[derive(Args, Serialize)]
struct ThinBaseArgs {
    #[arg(long)]
    group: String,
    /// Restrict X and Y to the image of this word.
    #[arg(long)]
    word: Option<String>,
    /// Defaults to ⌈√(2e²|G| ln|G|)⌉.
    #[arg(long)]
    x0: Option<usize>,
    #[arg(long)]
    y0: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    attempts: usize,
    /// Fraction of G rechecked by direct search.
    #[arg(long, default_value_t = 0.01)]
    spot_fraction: f64,
    /// Also report coverage for these sizes (x0 = y0), all attempts drawn.
    #[arg(long, value_delimiter = ',')]
    sweep: Vec<usize>,
}

#[derive(Args, Serialize)]
struct WaringArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    word: String,
    /// Second word; defaults to the first.
    #[arg(long)]
    word2: Option<String>,
}

#[derive(Args, Serialize)]
struct FrobeniusArgs {
    #[arg(long)]
    group: String,
    /// Character-table JSON file, or the key of a shipped table.
    #[arg(long)]
    table: String,
    /// Class labels `c1,c2,c3`; all triples when omitted.
    #[arg(long, value_delimiter = ',')]
    classes: Vec<String>,
}

#[derive(Args, Serialize)]
struct CharSumArgs {
    #[arg(long)]
    table: String,
    /// Group for the brute-force recount.
    #[arg(long)]
    group: Option<String>,
    #[arg(long, value_delimiter = ',', required = true)]
    classes: Vec<String>,
}

#[derive(Args, Serialize)]
struct PermStatsArgs {
    /// Image list of a permutation, e.g. `1,2,0,4,3`.
    #[arg(long, value_delimiter = ',')]
    perm: Vec<u8>,
    /// Cycle lengths, e.g. `6,2`; padded with fixed points up to `--points`.
    #[arg(long, value_delimiter = ',')]
    cycle_type: Vec<usize>,
    #[arg(long)]
    points: Option<usize>,
    /// `n,m`: permutations of n points with at least m fixed points.
    #[arg(long, value_delimiter = ',')]
    min_fixed: Vec<usize>,
}

#[derive(Args, Serialize)]
struct StratifiedArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "a^-1b^-1ab")]
    word: String,
    #[arg(long)]
    word2: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    attempts: usize,
    #[arg(long, default_value_t = 1.0)]
    size_factor: f64,
    /// Random tuples per sampled word image.
    #[arg(long, default_value_t = 200_000)]
    trials: usize,
}

#[derive(Args, Serialize)]
struct MinkArgs {
    /// Cantor depth.
    #[arg(long, default_value_t = 10)]
    depth: u32,
    /// Scale window δ = 4^{-from} .. 4^{-to}.
    #[arg(long, default_value_t = 4)]
    from: u32,
    #[arg(long, default_value_t = 10)]
    to: u32,
    /// Torus dimensions to build square roots for.
    #[arg(long, value_delimiter = ',')]
    torus: Vec<usize>,
    #[arg(long, default_value_t = 6)]
    torus_depth: u32,
}

#[derive(Args, Serialize)]
struct TailArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    a: Option<usize>,
    #[arg(long)]
    b: Option<usize>,
    /// Intersection threshold; defaults to ⌊ab/(e²n)⌋.
    #[arg(long)]
    k: Option<usize>,
    /// Check every triple with 2 ≤ n ≤ MAX instead.
    #[arg(long)]
    sweep: Option<usize>,
}

#[derive(Args, Serialize)]
struct MergeArgs {
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
}

#[derive(Serialize)]
struct RunReport<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: &'a Command,
    verify: bool,
    certified: bool,
    result: Value,
    elapsed_ms: Option<f64>,
}

struct Outcome {
    certified: bool,
    result: Value,
    csv: Option<Vec<Vec<String>>>,
}

impl Outcome {
    fn new(certified: bool, result: impl Serialize) -> anyhow::Result<Self> {
        Ok(Outcome { certified, result: serde_json::to_value(result)?, csv: None })
    }
}

fn load_group(spec: &str) -> anyhow::Result<FiniteGroup> {
    if Path::new(spec).exists() {
        let file = GroupFile::load(spec).with_context(|| format!("reading group file {spec}"))?;
        return file.build().with_context(|| format!("building group from {spec}"));
    }
    corpus::group(spec).with_context(|| format!("{spec} is neither a file nor a corpus group"))
}

fn load_table(spec: &str) -> anyhow::Result<CharacterTable> {
    if Path::new(spec).exists() {
        return CharacterTable::load(spec).with_context(|| format!("reading character table {spec}"));
    }
    corpus::table(spec).with_context(|| format!("{spec} is neither a file nor a corpus table"))
}

fn parse_word(s: &str) -> anyhow::Result<FreeWord> {
    FreeWord::from_str(s).with_context(|| format!("parsing word {s:?}"))
}

fn class_index(t: &CharacterTable, label: &str) -> anyhow::Result<usize> {
    t.class_by_label(label).ok_or_else(|| anyhow!("table {} has no class {label:?}", t.group))
}

fn decompose(a: &DecomposeArgs, verify: bool) -> anyhow::Result<Outcome> {
    let g = load_group(&a.group)?;
    let x = Target::from_str(&a.x).with_context(|| format!("parsing target {:?}", a.x))?;
    let cert = group_decompose(&g, x)?;
    let oracle = verify.then(|| table_product_set(&g, &cert.x, &cert.y) == g.full_mask());
    let certified = cert.verified && cert.bounds_hold && oracle != Some(false);
    Outcome::new(certified, json!({ "certificate": cert, "oracle": oracle }))
}

fn square_root_cmd(a: &GroupArgs, verify: bool) -> anyhow::Result<Outcome> {
    let g = load_group(&a.group)?;
    let r = square_root(&g)?;
    let oracle = verify.then(|| table_product_set(&g, &r.root, &r.root) == g.full_mask());
    Outcome::new(r.verified && oracle != Some(false), json!({ "square_root": r, "oracle": oracle }))
}

fn thin_base(a: &ThinBaseArgs, verify: bool) -> anyhow::Result<Outcome> {
    let g = load_group(&a.group)?;
    let n = g.order();
    let base = match &a.word {
        Some(w) => word_image(&g, &parse_word(w)?, ImageMode::Exhaustive)?.image,
        None => g.full_mask(),
    };
    let full = g.full_mask();
    let default = balanced_size(n, 1.0)?.min(base.count());
    let (x0, y0) = (a.x0.unwrap_or(default), a.y0.unwrap_or(default));
    let r = sample_thin_pair(&g, &base, &base, &full, x0, y0, a.seed, a.attempts)?;
    let spot = (verify && r.certified).then(|| spot_check(&g, &r.x0, &r.y0, &full, a.spot_fraction, a.seed));
    let spot_ok = !matches!(spot, Some(Err(_)));
    let rows = coverage_sweep(&g, &base, &base, &full, &a.sweep, a.seed, a.attempts)?;
    let monotone = rows
        .windows(2)
        .all(|w| w[0].fractions.iter().zip(&w[1].fractions).all(|(p, q)| p <= q));
    let csv = (!rows.is_empty()).then(|| {
        let mut out = vec![vec!["size".into(), "attempt".into(), "fraction".into()]];
        for row in &rows {
            for (i, f) in row.fractions.iter().enumerate() {
                out.push(vec![row.size.to_string(), i.to_string(), f.to_string()]);
            }
        }
        out
    });
    let result = json!({
        "order": n,
        "base_size": base.count(),
        "coverage": r.coverage_fractions(n),
        "pair": r,
        "spot_check": spot.map(|s| match s { Ok(k) => json!({ "checked": k }), Err(z) => json!({ "failed_at": z }) }),
        "sweep": rows,
        "sweep_monotone": monotone,
    });
    Ok(Outcome { certified: r.certified && spot_ok && monotone, result, csv })
}

fn waring(a: &WaringArgs) -> anyhow::Result<Outcome> {
    let g = load_group(&a.group)?;
    let w1 = parse_word(&a.word)?;
    let w2 = a.word2.as_deref().map(parse_word).transpose()?.unwrap_or_else(|| w1.clone());
    let r = waring_check(&g, &w1, &w2)?;
    Outcome::new(r.holds, json!({ "group": g.name(), "order": g.order(), "word1": w1, "word2": w2, "waring": r }))
}

fn frobenius(a: &FrobeniusArgs, verify: bool) -> anyhow::Result<Outcome> {
    let g = load_group(&a.group)?;
    let t = load_table(&a.table)?;
    let validation = validate_table(&t, Some(&g))?;
    let map = validation.class_map.clone().expect("validated against a group");
    let c = t.class_count();
    let triples: Vec<(usize, usize, usize)> = match a.classes.as_slice() {
        [] => (0..c).flat_map(|i| (0..c).flat_map(move |j| (0..c).map(move |k| (i, j, k)))).collect(),
        [x, y, z] => vec![(class_index(&t, x)?, class_index(&t, y)?, class_index(&t, z)?)],
        _ => bail!("--classes takes three labels"),
    };
    let brute = verify.then(|| brute_force_class_counts(&g));
    let mut rows = Vec::new();
    let mut all_match = true;
    let mut max_residual = 0.0f64;
    for (i, j, k) in triples {
        let f = frobenius_count(&t, i, j, k)?;
        let oracle = brute.as_ref().map(|b| b[map[i]][map[j]][map[k]]);
        all_match &= oracle == Some(f.count);
        max_residual = max_residual.max(f.residual);
        rows.push(json!({
            "classes": [&t.classes[i].label, &t.classes[j].label, &t.classes[k].label],
            "count": f.count,
            "residual": f.residual,
            "oracle": oracle,
        }));
    }
    let certified = all_match && max_residual < COUNT_TOLERANCE;
    Outcome::new(
        certified,
        json!({ "group": g.name(), "order": g.order(), "validation": validation, "max_residual": max_residual, "counts": rows }),
    )
}

fn char_sum_cmd(a: &CharSumArgs, verify: bool) -> anyhow::Result<Outcome> {
    let t = load_table(&a.table)?;
    let [c1, c2, c3] = a.classes.as_slice() else { bail!("--classes takes three labels") };
    let (i, j, k) = (class_index(&t, c1)?, class_index(&t, c2)?, class_index(&t, c3)?);
    validate_table(&t, None)?;
    let s = char_sum(&t, i, j, k)?;
    let f = frobenius_count(&t, i, j, k)?;
    let (s1, s2) = (t.classes[i].size as f64, t.classes[j].size as f64);
    let rearranged = f.count as f64 * t.order as f64 / (s1 * s2) - 1.0;
    let identity_holds = (s.value.re - rearranged).abs() <= 1e-9 * rearranged.abs().max(1.0) && s.value.im.abs() <= 1e-9;
    let oracle = match (&a.group, verify) {
        (Some(spec), true) => {
            let g = load_group(spec)?;
            let map = validate_table(&t, Some(&g))?.class_map.expect("validated against a group");
            Some(brute_force_class_counts(&g)[map[i]][map[j]][map[k]] == f.count)
        }
        _ => None,
    };
    Outcome::new(
        identity_holds && oracle != Some(false),
        json!({ "classes": [c1, c2, c3], "char_sum": s, "count": f.count, "rearranged": rearranged, "identity_holds": identity_holds, "oracle": oracle }),
    )
}

fn perm_stats(a: &PermStatsArgs) -> anyhow::Result<Outcome> {
    let perm = match (a.perm.is_empty(), a.cycle_type.is_empty()) {
        (false, true) => Some(a.perm.clone()),
        (true, false) => {
            let used: usize = a.cycle_type.iter().sum();
            let n = a.points.unwrap_or(used);
            if n < used || a.cycle_type.contains(&0) {
                bail!("cycle type {:?} does not fit on {n} points", a.cycle_type);
            }
            let mut p: Vec<u8> = (0..n as u8).collect();
            let mut start = 0;
            for &len in &a.cycle_type {
                for i in 0..len {
                    p[start + i] = (start + (i + 1) % len) as u8;
                }
                start += len;
            }
            Some(p)
        }
        (true, true) => None,
        (false, false) => bail!("give either --perm or --cycle-type"),
    };
    let stat = perm.as_deref().map(perm_stat).transpose()?;
    let min_fixed = match a.min_fixed.as_slice() {
        [] => None,
        [n, m] => Some(count_min_fixed(*n, *m)?),
        _ => bail!("--min-fixed takes n,m"),
    };
    if stat.is_none() && min_fixed.is_none() {
        bail!("nothing to compute: give --perm, --cycle-type or --min-fixed");
    }
    let certified = min_fixed.is_none_or(|c| c.bound_holds);
    Outcome::new(
        certified,
        json!({ "cycle_type": perm.as_deref().map(cycle_type), "stat": stat, "min_fixed": min_fixed }),
    )
}

fn stratified(a: &StratifiedArgs) -> anyhow::Result<Outcome> {
    let w1 = parse_word(&a.word)?;
    let w2 = a.word2.as_deref().map(parse_word).transpose()?.unwrap_or_else(|| w1.clone());
    let params = StratifiedParams { size_factor: a.size_factor, max_attempts: a.attempts, sample_trials: a.trials };
    let c = stratified_thin_base(a.n, &w1, &w2, params, a.seed)?;
    let r = &c.report;
    Outcome::new(r.certified && r.x_in_image && r.y_in_image, &c)
}

fn mink_dim(a: &MinkArgs) -> anyhow::Result<Outcome> {
    if a.from >= a.to {
        bail!("scale window needs from < to");
    }
    let scales = dyadic_scales(a.from, a.to);
    let unit = IntervalSet::segment(Q::from_integer(-1), Q::from_integer(1))?;
    let (ca, cb) = cantor_sets(a.depth)?;
    let line = estimate_dimension(&[&unit], &scales)?;
    let dim_a = estimate_dimension(&[&ca], &scales)?;
    let dim_b = estimate_dimension(&[&cb], &scales)?;
    let tol = Q::new(1, 4i64.pow(a.depth));
    let sumset = sumset_cover_check(&ca, &cb, (Q::from_integer(-1), Q::from_integer(1)), tol);
    let product_scales = dyadic_scales(a.from.min(2), a.depth.min(a.to).min(8));
    let product = product_dim_inequality_check(&ca, &ca, &product_scales)?;
    let tori = a.torus.iter().map(|&d| torus_square_root(d, a.torus_depth)).collect::<Result<Vec<_>, _>>()?;
    let tori_ok = tori.iter().all(|t| t.certified);
    let mut csv = vec![vec!["set".into(), "delta".into(), "count".into()]];
    for (name, e) in [("unit", &line), ("cantor_a", &dim_a), ("cantor_b", &dim_b)] {
        for (d, n) in e.scales.iter().zip(&e.packing_counts) {
            csv.push(vec![name.into(), d.to_string(), n.to_string()]);
        }
    }
    let result = json!({
        "scales": scales.iter().map(|d| d.to_string()).collect::<Vec<_>>(),
        "unit_interval": line,
        "cantor_a": dim_a,
        "cantor_b": dim_b,
        "sumset": sumset,
        "product": product,
        "tori": tori,
    });
    Ok(Outcome { certified: sumset.covered && product.all_hold && tori_ok, result, csv: Some(csv) })
}

fn tail_bounds(a: &TailArgs) -> anyhow::Result<Outcome> {
    if let Some(max_n) = a.sweep {
        if max_n < 2 {
            bail!("--sweep needs a maximum n of at least 2");
        }
        let (count, failures) = sweep(max_n)?;
        return Outcome::new(failures.is_empty(), json!({ "max_n": max_n, "triples": count, "failures": failures }));
    }
    let (Some(n), Some(a_), Some(b)) = (a.n, a.a, a.b) else { bail!("give --n, --a and --b, or --sweep") };
    let mut q = TailQuery::new(n, a_, b)?;
    if let Some(k) = a.k {
        q = q.with_k(k);
    }
    let disjoint = disjoint_prob(&q);
    let small = small_intersection_prob(&q)?;
    let csv = vec![
        vec!["n".into(), "a".into(), "b".into(), "k".into(), "disjoint".into(), "disjoint_bound".into(), "tail".into(), "tail_bound".into()],
        vec![
            n.to_string(),
            a_.to_string(),
            b.to_string(),
            small.k.to_string(),
            disjoint.exact.to_string(),
            disjoint.bound.to_string(),
            small.exact_tail.to_string(),
            small.bound.to_string(),
        ],
    ];
    let result = json!({ "query": q, "disjoint": disjoint, "small_intersection": small });
    Ok(Outcome { certified: disjoint.holds && small.holds, result, csv: Some(csv) })
}

fn report_merge(a: &MergeArgs) -> anyhow::Result<Outcome> {
    let reports = a
        .inputs
        .iter()
        .map(|p| -> anyhow::Result<Value> {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            let v: Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?;
            if !v.get("certified").is_some_and(Value::is_boolean) {
                bail!("{} is not a report: no boolean \"certified\" field", p.display());
            }
            Ok(v)
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let certified = reports.iter().all(|r| r["certified"] == Value::Bool(true));
    Outcome::new(certified, json!({ "reports": reports }))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Decompose(_) => "decompose",
        Command::SquareRoot(_) => "square-root",
        Command::ThinBase(_) => "thin-base",
        Command::WaringCheck(_) => "waring-check",
        Command::Frobenius(_) => "frobenius",
        Command::CharSum(_) => "char-sum",
        Command::PermStats(_) => "perm-stats",
        Command::Stratified(_) => "stratified",
        Command::MinkDim(_) => "mink-dim",
        Command::TailBounds(_) => "tail-bounds",
        Command::ReportMerge(_) => "report-merge",
    }
}

fn run(cli: &Cli) -> anyhow::Result<bool> {
    let verify = !cli.common.no_verify;
    let start = Instant::now();
    let outcome = match &cli.command {
        Command::Decompose(a) => decompose(a, verify),
        Command::SquareRoot(a) => square_root_cmd(a, verify),
        Command::ThinBase(a) => thin_base(a, verify),
        Command::WaringCheck(a) => waring(a),
        Command::Frobenius(a) => frobenius(a, verify),
        Command::CharSum(a) => char_sum_cmd(a, verify),
        Command::PermStats(a) => perm_stats(a),
        Command::Stratified(a) => stratified(a),
        Command::MinkDim(a) => mink_dim(a),
        Command::TailBounds(a) => tail_bounds(a),
        Command::ReportMerge(a) => report_merge(a),
    }?;
    let elapsed = start.elapsed().as_secs_f64() * 1e3;
    let report = RunReport {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command_name(&cli.command),
        config: &cli.command,
        verify,
        certified: outcome.certified,
        result: outcome.result,
        elapsed_ms: (!cli.common.normalize_timings).then_some(elapsed),
    };
    let text = serde_json::to_string_pretty(&report)? + "\n";
    match &cli.common.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    if let Some(path) = &cli.common.csv {
        let rows = outcome.csv.ok_or_else(|| anyhow!("{} has no tabular output", command_name(&cli.command)))?;
        let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(report.certified)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
