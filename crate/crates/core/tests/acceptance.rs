//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if a criterion fails that is not listed in `KNOWN_FAILURES`.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sievelab::arith::{is_prime, is_squarefree, prime_factors, primes_below, reduce};
use sievelab::brun::{sandwich, untruncated_depth, SandwichReport};
use sievelab::census::{run_census, run_goodred, sifted_class_set, ExperimentConfig, FrobeniusCache, QRule, Status};
use sievelab::chebotarev::{chebotarev_report, ffield_census};
use sievelab::curves::{
    ap_count, genus2_counts, genus2_record, reduction_type, specialize, CharPolyClass, CurveFamily, FamilyModel,
    FrobData, Reduction,
};
use sievelab::groups::{
    brute_force_order, class_table, group_order, jordan_check, pm1_lifting_check, property1_check, ClassMode, Flavor,
    GroupSpec,
};
use sievelab::heights::{count_projective, AffinePoint, HeightBound};
use sievelab::sieve::{large_sieve_l, SieveSupport, SievingSet};
use sievelab::{Exact, SieveScalar};

/// Criteria that fail on this family for reasons recorded in the README.
const KNOWN_FAILURES: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t <= limit, format!("{:.2}s", t.as_secs_f64()))
}

fn schanuel() -> Outcome {
    let start = Instant::now();
    let x = 500u64;
    let count = count_projective(1, HeightBound::integer(x).unwrap());
    let rel = count as f64 / (12.0 / (PI * PI) * (x * x) as f64) - 1.0;
    let (fast, t) = within(start, Duration::from_secs(5));
    outcome(rel.abs() <= 0.05 && fast, format!("count={count} rel_err={rel:.4} in {t}"))
}

fn goodred_floor() -> Outcome {
    let start = Instant::now();
    let config = ExperimentConfig {
        x: vec![1_000, 10_000],
        q_rule: QRule::Sqrt,
        ..ExperimentConfig::default()
    };
    let rows = run_goodred(&config, &CurveFamily::default_genus1()).unwrap();
    let c = rows[0].ratio;
    let (fast, t) = within(start, Duration::from_secs(120));
    outcome(
        rows[1].ratio >= 0.8 * c && c > 0.0 && fast,
        format!("c={c:.4} ratio(1e4)={:.4} in {t}", rows[1].ratio),
    )
}

fn brun_sandwich() -> Outcome {
    let start = Instant::now();
    let xs: Vec<i64> = (1..=1000).collect();
    let support = SieveSupport::primes_below(30, |_| true);
    let sets: Vec<SievingSet> = support
        .primes()
        .iter()
        .map(|&p| SievingSet::from_predicate(p, 0, |v| v[0] == 0))
        .collect();
    let coprime = xs.iter().filter(|&&n| support.primes().iter().all(|&p| n as u64 % p != 0)).count() as u64;
    let line = |n: &i64| vec![*n];
    let mut ok = true;
    for depth in 1..=3 {
        let rep: SandwichReport<Exact> = sandwich(&xs, line, &sets, &support, u64::MAX, depth).unwrap();
        ok &= rep.exact == Some(coprime) && rep.holds();
    }
    let full: SandwichReport<Exact> =
        sandwich(&xs, line, &sets, &support, u64::MAX, untruncated_depth(support.primes())).unwrap();
    let exact = Exact::from_u64(coprime);
    ok &= full.lower == exact && full.upper == exact;
    let (fast, t) = within(start, Duration::from_secs(1));
    outcome(ok && fast, format!("sifted={coprime} in {t}"))
}

/// `Σ_{a ≤ Q squarefree, a | P} Π_{p|a} w_p` by scanning every integer.
fn l_oracle(support: &[u64], q: u64, dens: &BTreeMap<u64, BigRational>) -> BigRational {
    let mut total = BigRational::zero();
    for a in 1..=q {
        if !is_squarefree(a) {
            continue;
        }
        let ps = prime_factors(a);
        if ps.iter().all(|p| support.contains(p)) {
            let mut term = BigRational::one();
            for p in ps {
                let nu = &dens[&p];
                term *= nu / (BigRational::one() - nu);
            }
            total += term;
        }
    }
    total
}

fn large_sieve_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut agree = 0;
    for _ in 0..50 {
        let q = rng.gen_range(2..=10_000u64);
        let primes: Vec<u64> = primes_below(q).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
        let dens: BTreeMap<u64, BigRational> = primes
            .iter()
            .map(|&p| {
                let k = rng.gen_range(0..p);
                (p, BigRational::new(BigInt::from(k), BigInt::from(p)))
            })
            .collect();
        let support = SieveSupport::new(primes.clone(), q).unwrap();
        if large_sieve_l(&support, &dens).unwrap() == l_oracle(&primes, q, &dens) {
            agree += 1;
        }
    }
    outcome(agree == 50, format!("{agree}/50 instances agree exactly"))
}

/// `a_p` from a full loop over affine points.
fn ap_point_loop(a: u64, b: u64, p: u64) -> i64 {
    let mut affine = 0i64;
    for x in 0..p {
        let rhs = (x * x % p * x + a * x + b) % p;
        affine += (0..p).filter(|y| y * y % p == rhs).count() as i64;
    }
    p as i64 + 1 - (affine + 1)
}

fn frobenius_oracle() -> Outcome {
    let fam = CurveFamily::default_genus1();
    let FamilyModel::Weierstrass { a, b } = &fam.model else { unreachable!() };
    let params: Vec<AffinePoint> = (2..=11)
        .map(|n| AffinePoint::from_integers(&[n]))
        .chain((2..=11).map(|d| AffinePoint::new(vec![num_rational::Rational64::new(1 - 2 * d, d)])))
        .collect();
    let (mut checked, mut bad) = (0, 0);
    for t in &params {
        let s = specialize(&fam, t).unwrap();
        for p in (5..=100).filter(|&p| is_prime(p)) {
            if reduction_type(&s, p) == Reduction::Bad {
                continue;
            }
            let Some(r) = t.residues_mod(p) else { continue };
            let rec = ap_count(&s, p).unwrap();
            let FrobData::Genus1 { ap } = rec.data else { unreachable!() };
            checked += 1;
            if ap != ap_point_loop(a.eval_mod(&r, p), b.eval_mod(&r, p), p) || !rec.within_weil_bounds() {
                bad += 1;
            }
        }
    }
    outcome(bad == 0 && checked > 0, format!("{checked} (t, p) pairs, {bad} mismatches"))
}

fn chebotarev_decay() -> Outcome {
    let start = Instant::now();
    let rep = chebotarev_report(&CurveFamily::default_genus1(), 5, 3, 1..=4).unwrap();
    let sums = rep.censuses.iter().all(|c| c.frequency_total().is_one());
    let last = rep.envelope.last().unwrap();
    let dev4 = last.deviation.unwrap_or(f64::INFINITY);
    let threshold = rep.c_emp.unwrap_or(0.0) * 5f64.powf(-1.5);
    let (fast, t) = within(start, Duration::from_secs(120));
    let devs: Vec<String> = rep
        .envelope
        .iter()
        .map(|r| format!("{:.5}", r.deviation.unwrap_or(f64::NAN)))
        .collect();
    outcome(
        sums && rep.strictly_decreasing() && dev4 <= threshold && fast,
        format!(
            "sums_to_1={sums} deviations=[{}] decreasing={} dev(4)={dev4:.4} C_emp*5^-1.5={threshold:.4} in {t}",
            devs.join(", "),
            rep.strictly_decreasing(),
        ),
    )
}

fn group_identities() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for l in [3u64, 5, 7] {
        for flavor in [Flavor::Similitude, Flavor::Symplectic] {
            let spec = GroupSpec::new(1, l, flavor).unwrap();
            ok &= group_order(&spec).unwrap() == brute_force_order(&spec).unwrap();
        }
        let gl2 = GroupSpec::new(1, l, Flavor::Similitude).unwrap();
        ok &= class_table(&gl2, ClassMode::Brute).unwrap().len() as u64 == l * l - 1;
    }
    let sp4 = brute_force_order(&GroupSpec::new(2, 3, Flavor::Symplectic).unwrap()).unwrap();
    ok &= sp4 == 51_840;
    notes.push(format!("|Sp4(F3)|={sp4}"));
    let mut jordan = 0;
    for l in [3u64, 5, 7] {
        for flavor in [
            Flavor::Similitude,
            Flavor::Symplectic,
            Flavor::SimilitudeModSign,
            Flavor::SymplecticModSign,
        ] {
            let spec = GroupSpec::new(1, l, flavor).unwrap();
            match jordan_check(&spec) {
                Ok(holds) => {
                    ok &= holds;
                    jordan += 1;
                }
                Err(sievelab::Error::Infeasible(_)) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
    notes.push(format!("jordan on {jordan} specs"));
    for (g, l) in [(1u8, 3u64), (1, 5), (1, 7), (2, 3), (2, 5)] {
        ok &= pm1_lifting_check(g, l).unwrap();
    }
    let p1 = property1_check(1, &[3, 5, 7]).unwrap();
    let p2 = property1_check(2, &[3]).unwrap();
    ok &= p1.passes(2.0) && p2.passes(2.0);
    notes.push(format!(
        "property1 g=1 ({:.3}, {:.3}) g=2 ({:.3}, {:.3})",
        p1.order_constant, p1.class_constant, p2.order_constant, p2.class_constant
    ));
    outcome(ok, notes.join("; "))
}

fn duke_trend() -> Outcome {
    let start = Instant::now();
    let fam = CurveFamily::default_genus1();
    let config = ExperimentConfig {
        x: vec![20, 100],
        l: vec![5, 7, 11, 13],
        p_cap: 1000,
        ..ExperimentConfig::default()
    };
    let mut cache = FrobeniusCache::in_memory(&fam.family_id());
    let big = run_census(&config, &fam, &mut cache).unwrap();
    let (f20, f100) = (big.rows[0].fraction, big.rows[1].fraction);
    let small = run_census(
        &ExperimentConfig {
            x: vec![20],
            ..config.clone()
        },
        &fam,
        &mut cache,
    )
    .unwrap();
    let restricted: Vec<_> = big.points.iter().filter(|v| v.height <= 20).cloned().collect();
    let containment = restricted == small.points;

    // every point undecided at l = 5 should survive some class sieve
    let l = 5;
    let undecided: BTreeSet<AffinePoint> = small
        .points
        .iter()
        .filter(|v| v.status(l) == Some(Status::Undecided))
        .map(|v| v.t.clone())
        .collect();
    let mut survivors = BTreeSet::new();
    for trace in 0..l {
        let class = CharPolyClass::Genus1 { l, trace, det: 1 };
        let rep = sifted_class_set(&fam, 20, l, class, config.p_cap, &mut cache).unwrap();
        survivors.extend(rep.survivors);
    }
    let uncovered = undecided.difference(&survivors).count();
    let (fast, t) = within(start, Duration::from_secs(600));
    outcome(
        f100 < f20 && containment && uncovered == 0 && fast,
        format!(
            "fraction(20)={f20:.4} fraction(100)={f100:.4} containment={containment} \
             undecided_l5={} uncovered={uncovered} in {t}",
            undecided.len()
        ),
    )
}

/// `#C(F_p)` for `y² = f(x)` of odd degree by looping over `(x, y)`.
fn genus2_n1_loop(c: &[u64], p: u64) -> u64 {
    let mut n = 1;
    for x in 0..p {
        let v = c.iter().rev().fold(0, |acc, &k| (acc * x + k) % p);
        n += (0..p).filter(|y| y * y % p == v).count() as u64;
    }
    n
}

fn genus2_desk() -> Outcome {
    let fam = CurveFamily::default_genus2();
    let mut ok = true;
    let mut checked = 0;
    let mut params = Vec::new();
    'outer: for a in 2..10i64 {
        for b in (a + 1)..12 {
            for c in (b + 1)..14 {
                params.push([a, b, c]);
                if params.len() == 20 {
                    break 'outer;
                }
            }
        }
    }
    for t in &params {
        let pt = AffinePoint::from_integers(t);
        let s = specialize(&fam, &pt).unwrap();
        for p in (3..=50).filter(|&p| is_prime(p)) {
            if reduction_type(&s, p) == Reduction::Bad {
                continue;
            }
            let (n1, n2) = genus2_counts(&s, p).unwrap();
            let coeffs: Vec<u64> = s.coeffs.iter().map(|k| reduce_rational(k, p)).collect();
            ok &= n1 == genus2_n1_loop(&coeffs, p);
            let a1 = p as i64 + 1 - n1 as i64;
            ok &= (a1 * a1 - (p as i64 * p as i64 + 1 - n2 as i64)) % 2 == 0;
            ok &= genus2_record(p, n1, n2).map(|r| r.within_weil_bounds()).unwrap_or(false);
            checked += 1;
        }
    }
    let census = ffield_census(&fam, 5, 1, 3).unwrap();
    let total_one = census.frequency_total().is_one();
    let predicted = census.predicted.as_ref();
    let in_table = predicted.is_some_and(|pr| census.frequencies.keys().all(|k| pr.get(k).is_some_and(|d| !d.is_zero())));
    let table_sums = predicted.is_some_and(|pr| pr.values().sum::<BigRational>().is_one());
    ok &= total_one && in_table && table_sums;
    outcome(
        ok && checked > 0,
        format!(
            "{checked} (t, p) pairs; F_5 census over {} points, frequencies sum to 1: {total_one}, classes in coset table: {in_table}",
            census.points
        ),
    )
}

fn reduce_rational(c: &BigRational, p: u64) -> u64 {
    let m = BigInt::from(p);
    let num = ((c.numer() % &m) + &m) % &m;
    let den = ((c.denom() % &m) + &m) % &m;
    let num: u64 = num.try_into().unwrap();
    let den: u64 = den.try_into().unwrap();
    let inv = sievelab::arith::inv_mod(den, p).expect("good prime");
    reduce((num * inv % p) as i64, p)
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "height count vs 12/pi^2 x^2", schanuel),
        (2, "good-reduction floor", goodred_floor),
        (3, "Bonferroni sandwich", brun_sandwich),
        (4, "L(Q) oracle", large_sieve_oracle),
        (5, "a_p oracle and Hasse bound", frobenius_oracle),
        (6, "finite-field class decay", chebotarev_decay),
        (7, "group identities", group_identities),
        (8, "surjectivity census trend", duke_trend),
        (9, "genus 2 desk check", genus2_desk),
    ];
    let mut unexpected = Vec::new();
    for (n, name, run) in criteria {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_FAILURES.contains(&n);
        let note = match (o.pass, known) {
            (false, true) => " (known failure)",
            (true, true) => " (listed as a known failure but passed)",
            _ => "",
        };
        println!("criterion {n} {tag}: {name}: {}{note}", o.detail);
        if o.pass == known {
            unexpected.push(n);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
