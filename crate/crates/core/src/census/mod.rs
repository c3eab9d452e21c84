//! Experiment orchestration: the surjectivity census, class sieves, the
//! good-reduction census, the finite-field check and the merged report.

pub mod cache;
pub mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{inv_mod, is_prime, legendre, mul_mod, primes_upto, quadratic_character_table, reduce};
use crate::brun::{good_reduction_census, BadReductionForm, GoodReductionCensus};
use crate::chebotarev::{chebotarev_report, ChebotarevReport};
use crate::curves::{
    ap_count, reduction_type, specialize, surjectivity_verdict, trace_from_residues, CharPolyClass,
    CurveFamily, FamilyModel, FrobData, Reduction, Verdict,
};
use crate::heights::{chart_image, enumerate_affine, height_affine, AffinePoint, Chart, HeightBound};
use crate::sieve::{large_sieve_report, SieveSupport, SievingSet};
use crate::{Error, Exact, Result};
pub use cache::{CacheStats, FrobeniusCache};
pub use config::{ExperimentConfig, QRule};

pub const CENSUS_FILE: &str = "census.csv";
pub const POINTS_FILE: &str = "census_points.csv";
pub const GOODRED_FILE: &str = "goodred.csv";
pub const CHEBOTAREV_CSV: &str = "chebotarev.csv";
pub const CHEBOTAREV_JSON: &str = "chebotarev.json";
pub const CLASS_SIEVE_FILE: &str = "class_sieve.json";
pub const REPORT_FILE: &str = "report.json";
pub const FRACTION_TABLE: &str = "census_fraction.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Surjective,
    Undecided,
    /// No good witness prime was available for this `l`.
    Skipped,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Surjective => "surjective",
            Status::Undecided => "undecided",
            Status::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointVerdicts {
    pub t: AffinePoint,
    pub height: u64,
    /// One entry per configured `l`, in order.
    pub verdicts: Vec<(u64, Status)>,
}

impl PointVerdicts {
    pub fn undecided_somewhere(&self) -> bool {
        self.verdicts.iter().any(|(_, s)| *s == Status::Undecided)
    }

    pub fn status(&self, l: u64) -> Option<Status> {
        self.verdicts.iter().find(|(m, _)| *m == l).map(|(_, s)| *s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LCounts {
    pub l: u64,
    pub surjective: u64,
    pub undecided: u64,
    pub skipped: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusRow {
    pub x: u64,
    pub b_count: u64,
    pub per_l: Vec<LCounts>,
    pub undecided_any: u64,
    /// `undecided_any / b_count`.
    pub fraction: f64,
}

pub const CENSUS_HEADER: &str = "x,B,l,surjective,undecided,skipped,undecided_any,fraction";
pub const POINTS_HEADER: &str = "t,height,l,verdict";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CensusOutcome {
    pub rows: Vec<CensusRow>,
    pub points: Vec<PointVerdicts>,
    pub cache: CacheStats,
    /// `(t, p)` traces computed in this run rather than replayed.
    pub computed: usize,
}

impl CensusOutcome {
    pub fn census_csv(&self) -> String {
        let mut out = format!("{CENSUS_HEADER}\n");
        for row in &self.rows {
            for c in &row.per_l {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{},{:.6}",
                    row.x, row.b_count, c.l, c.surjective, c.undecided, c.skipped, row.undecided_any, row.fraction
                );
            }
        }
        out
    }

    pub fn points_csv(&self) -> String {
        let mut out = format!("{POINTS_HEADER}\n");
        for pt in &self.points {
            for (l, s) in &pt.verdicts {
                let _ = writeln!(out, "{},{},{},{}", pt.t.coords()[0], pt.height, l, s.as_str());
            }
        }
        out
    }
}

/// `a_p` per residue of `t mod p`, `None` on singular fibres.
pub type TraceTables = BTreeMap<u64, Arc<Vec<Option<i64>>>>;

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .map_err(|e| Error::Internal(e.to_string()))
}

fn one_parameter_genus1(family: &CurveFamily) -> Result<()> {
    if family.genus != 1 || family.r() != 1 {
        return Err(Error::Unsupported("the census runs on one-parameter genus 1 families".into()));
    }
    Ok(())
}

/// Traces `a_p(t mod p)` for every residue and every listed prime, filling
/// gaps in the cache. Tasks are shuffled by `seed`; results do not depend on
/// the order.
pub fn trace_tables(
    family: &CurveFamily,
    primes: &[u64],
    cache: &mut FrobeniusCache,
    pool: &rayon::ThreadPool,
    seed: u64,
) -> Result<(TraceTables, usize)> {
    let FamilyModel::Weierstrass { a, b } = &family.model else {
        return Err(Error::Unsupported("trace tables need a genus 1 family".into()));
    };
    let disc = family.discriminant_poly().expect("genus 1");
    let mut tasks: Vec<(u64, Vec<u64>)> = primes
        .iter()
        .map(|&p| (p, (0..p).filter(|&t| cache.get(p, t).is_none()).collect::<Vec<_>>()))
        .filter(|(_, missing)| !missing.is_empty())
        .collect();
    tasks.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let results: Vec<(u64, Vec<(u64, Option<i64>)>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|(p, missing)| {
                let p = *p;
                let chi = quadratic_character_table(p);
                let vals = missing
                    .iter()
                    .map(|&t| {
                        let ap = (disc.eval_mod(&[t], p) != 0)
                            .then(|| trace_from_residues(a.eval_mod(&[t], p), b.eval_mod(&[t], p), p, &chi));
                        (t, ap)
                    })
                    .collect();
                (p, vals)
            })
            .collect()
    });
    let mut computed = 0;
    for (p, vals) in results {
        computed += vals.len();
        for (t, ap) in vals {
            cache.insert(p, t, ap);
        }
    }
    cache.flush()?;
    let tables = primes
        .iter()
        .map(|&p| {
            let table: Vec<Option<i64>> = (0..p).map(|t| cache.get(p, t).expect("filled")).collect();
            (p, Arc::new(table))
        })
        .collect();
    Ok((tables, computed))
}

/// `(p, a_p)` over good primes of the table, for one rational parameter.
fn good_traces(
    family: &CurveFamily,
    t: &AffinePoint,
    tables: &TraceTables,
) -> Vec<(u64, i64)> {
    let mut exact = None;
    let mut out = Vec::new();
    for (&p, table) in tables {
        match t.residues_mod(p) {
            Some(r) => {
                if let Some(ap) = table[r[0] as usize] {
                    out.push((p, ap));
                }
            }
            None => {
                // p divides the denominator: fall back to the exact model
                let s = exact.get_or_insert_with(|| specialize(family, t).ok());
                if let Some(s) = s {
                    if reduction_type(s, p) == Reduction::Good {
                        if let Ok(rec) = ap_count(s, p) {
                            let FrobData::Genus1 { ap } = rec.data else { unreachable!() };
                            out.push((p, ap));
                        }
                    }
                }
            }
        }
    }
    out
}

fn verdicts_for(traces: &[(u64, i64)], ls: &[u64]) -> Vec<(u64, Status)> {
    ls.iter()
        .map(|&l| {
            let classes: BTreeSet<CharPolyClass> = traces
                .iter()
                .filter(|(p, _)| *p != l)
                .map(|&(p, ap)| CharPolyClass::Genus1 { l, trace: reduce(ap, l), det: p % l })
                .collect();
            let status = if classes.is_empty() {
                Status::Skipped
            } else {
                match surjectivity_verdict(&classes, l, 1) {
                    Verdict::Surjective => Status::Surjective,
                    Verdict::Undecided => Status::Undecided,
                }
            };
            (l, status)
        })
        .collect()
}

fn witness_primes(family: &CurveFamily, cap: u64) -> Vec<u64> {
    primes_upto(cap)
        .into_iter()
        .filter(|p| !family.excluded_primes.contains(p))
        .collect()
}

/// The census without touching the output directory.
pub fn run_census(config: &ExperimentConfig, family: &CurveFamily, cache: &mut FrobeniusCache) -> Result<CensusOutcome> {
    config.check_census_caps()?;
    one_parameter_genus1(family)?;
    let pool = thread_pool(config.workers)?;
    let x_max = *config.x.last().expect("validated");
    let points = enumerate_affine(1, HeightBound::integer(x_max)?, Chart::Default, &family.bad_locus)?;
    let primes = witness_primes(family, config.p_cap);
    let (tables, computed) = trace_tables(family, &primes, cache, &pool, config.seed)?;
    let verdicts: Vec<PointVerdicts> = pool.install(|| {
        points
            .par_iter()
            .map(|t| {
                let traces = good_traces(family, t, &tables);
                PointVerdicts {
                    t: t.clone(),
                    height: height_affine(t, Chart::Default).expect("chart defined"),
                    verdicts: verdicts_for(&traces, &config.l),
                }
            })
            .collect()
    });
    let rows = config
        .x
        .iter()
        .map(|&x| {
            let inside: Vec<&PointVerdicts> = verdicts.iter().filter(|v| v.height <= x).collect();
            let per_l = config
                .l
                .iter()
                .map(|&l| {
                    let count = |s: Status| inside.iter().filter(|v| v.status(l) == Some(s)).count() as u64;
                    LCounts {
                        l,
                        surjective: count(Status::Surjective),
                        undecided: count(Status::Undecided),
                        skipped: count(Status::Skipped),
                    }
                })
                .collect();
            let undecided_any = inside.iter().filter(|v| v.undecided_somewhere()).count() as u64;
            let b_count = inside.len() as u64;
            CensusRow {
                x,
                b_count,
                per_l,
                undecided_any,
                fraction: if b_count == 0 { 0.0 } else { undecided_any as f64 / b_count as f64 },
            }
        })
        .collect();
    Ok(CensusOutcome {
        rows,
        points: verdicts,
        cache: cache.stats.clone(),
        computed,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

/// Run the census and write `census.csv` and `census_points.csv`.
pub fn cmd_census(config: &ExperimentConfig) -> Result<CensusOutcome> {
    config.check_census_caps()?;
    let family = config.family()?;
    one_parameter_genus1(&family)?;
    let mut cache = FrobeniusCache::open(&config.cache_path(), &family.family_id())?;
    let outcome = run_census(config, &family, &mut cache)?;
    write_file(&config.out_dir.join(CENSUS_FILE), &outcome.census_csv())?;
    write_file(&config.out_dir.join(POINTS_FILE), &outcome.points_csv())?;
    Ok(outcome)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassSieveReport {
    pub l: u64,
    pub class: String,
    pub x: u64,
    pub q: u64,
    pub support: Vec<u64>,
    pub b_count: u64,
    /// `|Y_C(x)|`.
    pub count: u64,
    #[serde(skip)]
    pub survivors: Vec<AffinePoint>,
    pub l_of_q: String,
    /// Large-sieve bound without its implied constant.
    pub large_sieve_bound: f64,
    /// `(|SL_2(F_l)| / |C|) · l · log x / √x · x²`, up to a constant.
    pub bound_shape: f64,
}

/// Elements of `SL_2(F_l)` with trace `tr`.
fn sl2_trace_count(l: u64, tr: u64) -> u64 {
    let d = reduce(tr as i64 * tr as i64 - 4, l);
    match legendre(d, l) {
        1 => l * l + l,
        -1 => l * l - l,
        _ => l * l,
    }
}

/// `Y_C(x)`: points of `B(x)` whose Frobenius at no support prime has
/// char poly `C`. The support is `{p < Q : p ≡ 1 mod l}` minus excluded
/// primes.
pub fn sifted_class_set(
    family: &CurveFamily,
    x: u64,
    l: u64,
    class: CharPolyClass,
    q: u64,
    cache: &mut FrobeniusCache,
) -> Result<ClassSieveReport> {
    one_parameter_genus1(family)?;
    let CharPolyClass::Genus1 { l: cl, trace, det } = class else {
        return Err(Error::Invalid("class sieves take genus 1 classes".into()));
    };
    if cl != l || !is_prime(l) || l < 3 || trace >= l || det == 0 || det >= l {
        return Err(Error::Invalid(format!("class {class} is not a char-poly class mod {l}")));
    }
    if q > config::MAX_CLASS_SIEVE_Q {
        return Err(Error::Infeasible(format!("class sieve level {q}")));
    }
    let support = SieveSupport::primes_below(q, |p| p % l == 1 && !family.excluded_primes.contains(&p));
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let pool = thread_pool(None)?;
    let (tables, _) = trace_tables(family, support.primes(), cache, &pool, 0)?;
    let mut sets = Vec::new();
    for (&p, table) in &tables {
        let hits: Arc<Vec<bool>> = Arc::new(
            table
                .iter()
                .map(|ap| ap.is_some_and(|ap| reduce(ap, l) == trace && p % l == det))
                .collect(),
        );
        let residues = hits.iter().filter(|&&h| h).count() as u64;
        let member = Arc::clone(&hits);
        // (u0, u1) with u0 a unit and u1/u0 a hit residue
        sets.push(SievingSet::with_cardinality(p, 1, (p - 1) * residues, move |v| {
            v[0] != 0 && member[mul_mod(v[1], inv_mod(v[0], p).expect("unit"), p) as usize]
        })?);
    }
    let points = enumerate_affine(1, HeightBound::integer(x)?, Chart::Default, &family.bad_locus)?;
    let coords = |t: &AffinePoint| chart_image(t, Chart::Default).expect("chart").coords().to_vec();
    let report = large_sieve_report::<Exact, _>(&points, coords, &sets, &support, x, 1)?;
    let survivors = crate::sieve::sifted_set(&points, coords, &sets, &support)?;
    let xf = x.max(2) as f64;
    let sl2 = l * (l * l - 1);
    let bound_shape = sl2 as f64 / sl2_trace_count(l, trace) as f64 * l as f64 * xf.ln() / xf.sqrt() * xf * xf;
    Ok(ClassSieveReport {
        l,
        class: class.to_string(),
        x,
        q,
        support: support.primes().to_vec(),
        b_count: points.len() as u64,
        count: report.sifted_count,
        survivors,
        l_of_q: crate::SieveScalar::to_wire(&report.l_of_q),
        large_sieve_bound: crate::SieveScalar::to_f64(&report.bound),
        bound_shape,
    })
}

/// Class sieve at the largest configured `x`; writes `class_sieve.json`.
pub fn cmd_sifted_class_set(config: &ExperimentConfig, l: u64, trace: u64, det: u64) -> Result<ClassSieveReport> {
    config.validate()?;
    let family = config.family()?;
    one_parameter_genus1(&family)?;
    let x = *config.x.last().expect("validated");
    if x > config::MAX_CENSUS_X {
        return Err(Error::Infeasible(format!("class sieve height {x}")));
    }
    let q = config.q_rule.level(x);
    let mut cache = FrobeniusCache::open(&config.cache_path(), &family.family_id())?;
    let class = CharPolyClass::Genus1 { l, trace, det };
    let report = sifted_class_set(&family, x, l, class, q, &mut cache)?;
    write_file(&config.out_dir.join(CLASS_SIEVE_FILE), &to_json(&report))?;
    Ok(report)
}

/// Bad-reduction form of a family: its linear factors when listed, else the
/// homogenized bad locus.
pub fn bad_reduction_form(family: &CurveFamily) -> Result<BadReductionForm> {
    match &family.bad_locus_factors {
        Some(f) => BadReductionForm::from_linear_factors(1, f.clone()),
        None => {
            let d = family.bad_locus.total_degree();
            Ok(BadReductionForm::new(family.bad_locus.homogenize(d)))
        }
    }
}

pub fn run_goodred(config: &ExperimentConfig, family: &CurveFamily) -> Result<Vec<GoodReductionCensus>> {
    config.check_goodred_caps()?;
    let form = bad_reduction_form(family)?;
    config
        .x
        .iter()
        .map(|&x| {
            let q = config.q_rule.level(x).max(2);
            let support = SieveSupport::primes_below(q, |p| !family.excluded_primes.contains(&p));
            good_reduction_census(&form, HeightBound::integer(x)?, &support)
        })
        .collect()
}

/// Good-reduction census per configured `x`; writes `goodred.csv`.
pub fn cmd_goodred(config: &ExperimentConfig) -> Result<Vec<GoodReductionCensus>> {
    config.check_goodred_caps()?;
    let family = config.family()?;
    let rows = run_goodred(config, &family)?;
    let mut out = format!("{}\n", GoodReductionCensus::CSV_HEADER);
    for r in &rows {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    write_file(&config.out_dir.join(GOODRED_FILE), &out)?;
    Ok(rows)
}

/// Finite-field class statistics; writes `chebotarev.csv` and `.json`.
pub fn cmd_chebotarev(config: &ExperimentConfig) -> Result<ChebotarevReport> {
    config.validate()?;
    let family = config.family()?;
    let (lo, hi) = match (config.ffield_n.iter().min(), config.ffield_n.iter().max()) {
        (Some(&lo), Some(&hi)) if lo >= 1 => (lo, hi),
        _ => return Err(Error::Invalid("ffield_n must list positive degrees".into())),
    };
    let order = (config.ffield_q as f64).powi(hi as i32) * (config.ffield_q as f64).powi(family.r() as i32 - 1);
    if order > 1e7 {
        return Err(Error::Infeasible(format!("{} specializations", order)));
    }
    let report = chebotarev_report(&family, config.ffield_q, config.ffield_l, lo..=hi)?;
    write_file(&config.out_dir.join(CHEBOTAREV_CSV), &report.csv())?;
    write_file(&config.out_dir.join(CHEBOTAREV_JSON), &to_json(&report))?;
    Ok(report)
}

fn read_input(dir: &Path, name: &str) -> Result<String> {
    let path = dir.join(name);
    std::fs::read_to_string(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::MissingInput(path.display().to_string()),
        _ => Error::io(&path, e),
    })
}

fn read_optional(dir: &Path, name: &str) -> Result<Option<String>> {
    match read_input(dir, name) {
        Ok(s) => Ok(Some(s)),
        Err(Error::MissingInput(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn parse_csv(text: &str, name: &str) -> Result<Vec<BTreeMap<String, String>>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| Error::Invalid(format!("{name}: empty file")))?
        .split(',')
        .collect();
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != header.len() {
                return Err(Error::Invalid(format!("{name}: malformed row {line:?}")));
            }
            Ok(header.iter().map(|h| h.to_string()).zip(cols.iter().map(|c| c.to_string())).collect())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MergedReport {
    pub census: Vec<BTreeMap<String, String>>,
    pub goodred: Option<Vec<BTreeMap<String, String>>>,
    pub chebotarev: Option<serde_json::Value>,
    pub class_sieve: Option<serde_json::Value>,
}

/// Merge prior outputs into `report.json` plus a plot-ready fraction table.
/// `census.csv` is required; the other inputs are folded in when present.
pub fn cmd_report(config: &ExperimentConfig) -> Result<MergedReport> {
    let dir = &config.out_dir;
    let census = parse_csv(&read_input(dir, CENSUS_FILE)?, CENSUS_FILE)?;
    let goodred = read_optional(dir, GOODRED_FILE)?
        .map(|t| parse_csv(&t, GOODRED_FILE))
        .transpose()?;
    let json = |name: &str| -> Result<Option<serde_json::Value>> {
        read_optional(dir, name)?
            .map(|t| serde_json::from_str(&t).map_err(|e| Error::Invalid(format!("{name}: {e}"))))
            .transpose()
    };
    let report = MergedReport {
        chebotarev: json(CHEBOTAREV_JSON)?,
        class_sieve: json(CLASS_SIEVE_FILE)?,
        census,
        goodred,
    };
    let mut table = String::from("x,B,undecided_any,fraction\n");
    let mut seen = BTreeSet::new();
    for row in &report.census {
        if seen.insert(row["x"].clone()) {
            let _ = writeln!(table, "{},{},{},{}", row["x"], row["B"], row["undecided_any"], row["fraction"]);
        }
    }
    write_file(&dir.join(REPORT_FILE), &to_json(&report))?;
    write_file(&dir.join(FRACTION_TABLE), &table)?;
    Ok(report)
}

/// Paths of every artifact a full run writes, relative to `out_dir`.
pub fn artifact_paths(config: &ExperimentConfig) -> Vec<PathBuf> {
    [CENSUS_FILE, POINTS_FILE, GOODRED_FILE, CHEBOTAREV_CSV, CHEBOTAREV_JSON, REPORT_FILE, FRACTION_TABLE]
        .iter()
        .map(|n| config.out_dir.join(n))
        .collect()
}
