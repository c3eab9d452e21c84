//! Combinatorial lower/upper-bound sieve and the good-reduction census.
//!
//! Coefficients are Bonferroni truncations of the Möbius function: keeping
//! `ω(d) <= 2b` gives an upper-bound sieve, `ω(d) <= 2b - 1` a lower-bound
//! one. Sums `Σ λ_d S_d` are computed exactly, together with the main term
//! `H Π (1 - ν_p)` and the remainders `R^± = Σ |λ_d^± r_d|`.

use std::collections::{BTreeMap, HashMap};

use log::warn;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{gcd_binary, prime_factors};
use crate::heights::{enumerate_projective, HeightBound};
use crate::poly::MPoly;
use crate::scalar::SieveScalar;
use crate::sieve::{for_each_residue_tuple, local_density, SieveSupport, SievingSet};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SieveSign {
    Upper,
    Lower,
}

/// Sieve weights `λ_d ∈ {-1, 0, 1}` on squarefree `d < D` supported on the
/// given primes. Only nonzero weights are stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrunCoefficients {
    pub d_bound: u64,
    pub depth: u32,
    pub sign: SieveSign,
    pub values: BTreeMap<u64, i8>,
}

impl BrunCoefficients {
    pub fn get(&self, d: u64) -> i8 {
        self.values.get(&d).copied().unwrap_or(0)
    }

    /// Largest `ω(d)` kept.
    pub fn max_omega(&self) -> u32 {
        match self.sign {
            SieveSign::Upper => 2 * self.depth,
            SieveSign::Lower => 2 * self.depth - 1,
        }
    }
}

/// Depth large enough that nothing is truncated.
pub fn untruncated_depth(primes: &[u64]) -> u32 {
    primes.len() as u32 / 2 + 1
}

/// `λ_d = μ(d)` for `d < D` built from `primes` with `ω(d)` within the
/// truncation level, else 0.
pub fn brun_coefficients(primes: &[u64], d_bound: u64, depth: u32, sign: SieveSign) -> Result<BrunCoefficients> {
    if d_bound < 2 || depth < 1 {
        return Err(Error::Invalid("need D >= 2 and b >= 1".into()));
    }
    let mut sorted = primes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut out = BrunCoefficients {
        d_bound,
        depth,
        sign,
        values: BTreeMap::new(),
    };
    let max_omega = out.max_omega();
    fn dfs(ps: &[u64], start: usize, d: u64, omega: u32, max_omega: u32, bound: u64, vals: &mut BTreeMap<u64, i8>) {
        vals.insert(d, if omega % 2 == 0 { 1 } else { -1 });
        if omega == max_omega {
            return;
        }
        for i in start..ps.len() {
            match d.checked_mul(ps[i]) {
                Some(next) if next < bound => dfs(ps, i + 1, next, omega + 1, max_omega, bound, vals),
                _ => break,
            }
        }
    }
    dfs(&sorted, 0, 1, 0, max_omega, d_bound, &mut out.values);
    Ok(out)
}

/// Outcome of a Bonferroni sandwich.
#[derive(Clone, Debug, PartialEq)]
pub struct SandwichReport<S> {
    /// `H = |X|` under counting measure.
    pub h: u64,
    /// `H Π_{p ∈ support} (1 - ν_p)`.
    pub main_term: S,
    pub lower: S,
    pub upper: S,
    pub remainder_plus: S,
    pub remainder_minus: S,
    pub exact: Option<u64>,
}

impl<S: SieveScalar> SandwichReport<S> {
    pub fn holds(&self) -> bool {
        match self.exact {
            Some(e) => {
                let e = S::from_u64(e);
                self.lower <= e && e <= self.upper
            }
            None => true,
        }
    }
}

impl<S: SieveScalar> Serialize for SandwichReport<S> {
    fn serialize<Ser: serde::Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        #[derive(Serialize)]
        struct Wire {
            h: u64,
            main_term: String,
            lower: String,
            upper: String,
            remainder_plus: String,
            remainder_minus: String,
            exact: Option<u64>,
        }
        Wire {
            h: self.h,
            main_term: self.main_term.to_wire(),
            lower: self.lower.to_wire(),
            upper: self.upper.to_wire(),
            remainder_plus: self.remainder_plus.to_wire(),
            remainder_minus: self.remainder_minus.to_wire(),
            exact: self.exact,
        }
        .serialize(s)
    }
}

/// Bit mask of support primes whose sieving set contains each point.
fn hit_masks<P: Sync>(
    xs: &[P],
    f: &(impl Fn(&P) -> Vec<i64> + Sync),
    sets: &[&SievingSet],
) -> HashMap<u128, u64> {
    xs.par_iter()
        .fold(HashMap::new, |mut acc, x| {
            let v = f(x);
            let mut mask = 0u128;
            for (i, s) in sets.iter().enumerate() {
                if s.contains(&v) {
                    mask |= 1 << i;
                }
            }
            *acc.entry(mask).or_insert(0u64) += 1;
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        })
}

/// Run the upper and lower Bonferroni sieves on `xs`.
///
/// Every support prime must have a sieving set. With `depth` at least
/// [`untruncated_depth`] and `d_bound > P(Q)` both sides equal the sifted
/// count.
pub fn sandwich<S: SieveScalar, P: Sync>(
    xs: &[P],
    f: impl Fn(&P) -> Vec<i64> + Sync,
    sets: &[SievingSet],
    support: &SieveSupport,
    d_bound: u64,
    depth: u32,
) -> Result<SandwichReport<S>> {
    let primes = support.primes();
    if primes.len() > 128 {
        return Err(Error::Unsupported("more than 128 support primes".into()));
    }
    let mut ordered = Vec::with_capacity(primes.len());
    for &p in primes {
        let s = sets
            .iter()
            .find(|s| s.p() == p)
            .ok_or_else(|| Error::Invalid(format!("no sieving set for support prime {p}")))?;
        ordered.push(s);
    }
    if let Some(s) = sets.iter().find(|s| !support.contains(s.p())) {
        return Err(Error::SupportMismatch(s.p()));
    }
    let index: HashMap<u64, usize> = primes.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let nus: Vec<S> = ordered.iter().map(|s| local_density::<S>(s)).collect();

    let masks = hit_masks(xs, &f, &ordered);
    let h = xs.len() as u64;
    let h_s = S::from_u64(h);
    let exact = masks.get(&0).copied().unwrap_or(0);

    let upper_c = brun_coefficients(primes, d_bound, depth, SieveSign::Upper)?;
    let lower_c = brun_coefficients(primes, d_bound, depth, SieveSign::Lower)?;

    // S_d and r_d for every d in the union of both supports
    let mut cache: HashMap<u64, (S, S)> = HashMap::new();
    let mut stats = |d: u64| -> (S, S) {
        if let Some(v) = cache.get(&d) {
            return v.clone();
        }
        let mut dmask = 0u128;
        let mut nu_d = S::one();
        for q in prime_factors(d) {
            let i = index[&q];
            dmask |= 1 << i;
            nu_d = nu_d * nus[i].clone();
        }
        let s_d: u64 = masks
            .iter()
            .filter(|(m, _)| *m & dmask == dmask)
            .map(|(_, c)| *c)
            .sum();
        let s_d = S::from_u64(s_d);
        let r_d = s_d.clone() - nu_d * h_s.clone();
        cache.insert(d, (s_d.clone(), r_d.clone()));
        (s_d, r_d)
    };

    let mut side = |c: &BrunCoefficients| -> (S, S) {
        let mut sum = S::zero();
        let mut rem = S::zero();
        for (&d, &l) in &c.values {
            let (s_d, r_d) = stats(d);
            let l = S::from_ratio(l as i128, 1);
            sum = sum + l.clone() * s_d;
            rem = rem + (l * r_d).abs();
        }
        (sum, rem)
    };
    let (upper, remainder_plus) = side(&upper_c);
    let (lower, remainder_minus) = side(&lower_c);

    let main_term = nus
        .iter()
        .fold(h_s, |acc, nu| acc * (S::one() - nu.clone()));

    Ok(SandwichReport {
        h,
        main_term,
        lower,
        upper,
        remainder_plus,
        remainder_minus,
        exact: Some(exact),
    })
}

/// Whether `Q^{s(r+2)} <= x^{1/2}` (degree-one field). Not sharp, so a
/// violation only logs a warning.
pub fn level_check(q: f64, s: f64, r: usize, x: f64) -> bool {
    let ok = q.ln() * s * (r as f64 + 2.0) <= 0.5 * x.ln();
    if !ok {
        warn!("sieve level Q = {q} with s = {s} exceeds x^(1/2) for x = {x}");
    }
    ok
}

/// Measured remainder for a single modulus on the box `[-x, x]^{r+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RemainderAudit {
    pub d: u64,
    pub x: u64,
    pub r: usize,
    pub box_count: u64,
    pub omega_size: u64,
    pub hits: u64,
    /// `hits - ν_d |B|`, exact, as `num/den`.
    pub measured: String,
    pub measured_abs: f64,
    /// `|B| D² log x / x` (r = 1) or `|B| D^{r+1} / x`, with `D = d`.
    pub envelope: f64,
    /// `|r_d| / envelope`.
    pub c_audit: f64,
    pub within: bool,
}

/// Constant against which [`RemainderAudit::c_audit`] is checked.
pub const AUDIT_CONSTANT: f64 = 1.0;

/// Count `u ∈ [-x, x]^{r+1}` with `u mod d ∈ Ω_d`, compare with `ν_d |B|`.
pub fn lattice_remainder_audit(
    d: u64,
    omega: impl Fn(&[u64]) -> bool,
    x: u64,
    r: usize,
) -> Result<RemainderAudit> {
    if !crate::arith::is_squarefree(d) {
        return Err(Error::NotSquarefree(d));
    }
    if x < 2 {
        return Err(Error::Invalid("audit needs x >= 2".into()));
    }
    let n = r + 1;
    // integers in [-x, x] in each residue class mod d
    let mut per_class = vec![0u64; d as usize];
    for u in -(x as i64)..=(x as i64) {
        per_class[crate::arith::reduce(u, d) as usize] += 1;
    }
    let side = 2 * x + 1;
    let box_count = side.pow(n as u32);
    let mut hits = 0u64;
    let mut omega_size = 0u64;
    for_each_residue_tuple(d, n, |v| {
        if omega(v) {
            omega_size += 1;
            hits += v.iter().map(|&a| per_class[a as usize]).product::<u64>();
        }
    });
    let nu_box = num_rational::BigRational::new(
        BigInt::from(omega_size) * BigInt::from(box_count),
        BigInt::from(d).pow(n as u32),
    );
    let measured = num_rational::BigRational::from_integer(BigInt::from(hits)) - nu_box;
    let measured_abs = SieveScalar::to_f64(&measured.abs());
    let xf = x as f64;
    let df = d as f64;
    let envelope = if r == 1 {
        box_count as f64 * df * df * xf.ln() / xf
    } else {
        box_count as f64 * df.powi(n as i32) / xf
    };
    let c_audit = measured_abs / envelope;
    Ok(RemainderAudit {
        d,
        x,
        r,
        box_count,
        omega_size,
        hits,
        measured: format!("{}/{}", measured.numer(), measured.denom()),
        measured_abs,
        envelope,
        c_audit,
        within: c_audit <= AUDIT_CONSTANT,
    })
}

/// Homogeneous polynomial cutting out bad reduction, optionally known as a
/// product `c Π ℓ_i` of integer linear forms (which enables the fast kernel).
#[derive(Clone, Debug, PartialEq)]
pub struct BadReductionForm {
    pub poly: MPoly,
    pub scalar: i64,
    pub linear_factors: Option<Vec<Vec<i64>>>,
}

impl BadReductionForm {
    pub fn new(poly: MPoly) -> Self {
        BadReductionForm {
            poly,
            scalar: 1,
            linear_factors: None,
        }
    }

    pub fn from_linear_factors(scalar: i64, factors: Vec<Vec<i64>>) -> Result<Self> {
        let n = factors.first().map(|f| f.len()).unwrap_or(0);
        if n == 0 || factors.iter().any(|f| f.len() != n) {
            return Err(Error::Invalid("linear factors of inconsistent length".into()));
        }
        let mut poly = MPoly::constant(n, scalar);
        for f in &factors {
            let mut l = MPoly::zero(n);
            for (i, &c) in f.iter().enumerate() {
                l = l.add(&MPoly::var(n, i).scale(c));
            }
            poly = poly.mul(&l);
        }
        Ok(BadReductionForm {
            poly,
            scalar,
            linear_factors: Some(factors),
        })
    }

    /// `t_1 (t_0 - t_1)`: the homogenized bad locus of the default family
    /// away from 2 and 3.
    pub fn default_family() -> Self {
        Self::from_linear_factors(1, vec![vec![0, 1], vec![1, -1]]).expect("static factors")
    }

    pub fn r(&self) -> usize {
        self.poly.nvars() - 1
    }

    pub fn degree(&self) -> u32 {
        self.poly.total_degree()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodReductionCensus {
    pub x: u64,
    pub q: u64,
    pub count: u64,
    /// `x^{r+1} / (log Q)^κ`.
    pub floor_estimate: f64,
    /// `count (log x)^κ / x^{r+1}`.
    pub ratio: f64,
    pub kappa: u32,
    pub support_size: usize,
}

impl GoodReductionCensus {
    pub const CSV_HEADER: &'static str = "x,Q,count,floor_estimate,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{:.6},{:.9}",
            self.x, self.q, self.count, self.floor_estimate, self.ratio
        )
    }
}

/// `#{t ∈ B(x) : f(t) ≢ 0 mod p for every support prime}`, exactly.
pub fn good_reduction_census(
    form: &BadReductionForm,
    x: HeightBound,
    support: &SieveSupport,
) -> Result<GoodReductionCensus> {
    if form.poly.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let r = form.r();
    let xi = x.floor() as u64;
    let count = match (&form.linear_factors, r) {
        (Some(factors), 1) => census_linear_r1(form.scalar, factors, xi, support),
        _ => census_generic(&form.poly, r, x, support),
    };
    let kappa = form.degree();
    let xf = xi as f64;
    let floor_estimate = xf.powi(r as i32 + 1) / (support.q() as f64).ln().powi(kappa as i32);
    let ratio = count as f64 * xf.ln().powi(kappa as i32) / xf.powi(r as i32 + 1);
    Ok(GoodReductionCensus {
        x: xi,
        q: support.q(),
        count,
        floor_estimate,
        ratio,
        kappa,
        support_size: support.primes().len(),
    })
}

fn census_generic(poly: &MPoly, r: usize, x: HeightBound, support: &SieveSupport) -> u64 {
    let modulus: BigInt = support.primes().iter().map(|&p| BigInt::from(p)).product();
    enumerate_projective(r, x)
        .par_iter()
        .filter(|u| {
            let v = poly.eval_integer(u.coords());
            v.gcd(&modulus).is_one()
        })
        .count() as u64
}

/// `rough[n]`: no support prime divides `n` (0 is rough only for an empty
/// support).
fn rough_table(n_max: u64, support: &SieveSupport) -> Vec<bool> {
    let mut rough = vec![true; n_max as usize + 1];
    for &p in support.primes() {
        let mut m = 0;
        while m <= n_max {
            rough[m as usize] = false;
            m += p;
        }
    }
    if support.is_empty() {
        rough[0] = true;
    }
    rough
}

fn census_linear_r1(scalar: i64, factors: &[Vec<i64>], x: u64, support: &SieveSupport) -> u64 {
    if support.primes().iter().any(|&p| scalar % p as i64 == 0) {
        return 0;
    }
    let xi = x as i64;
    let n_max = factors
        .iter()
        .map(|f| f.iter().map(|c| c.unsigned_abs()).sum::<u64>() * x)
        .max()
        .unwrap_or(0);
    let rough = rough_table(n_max, support);
    let ok = |t0: i64, t1: i64| {
        factors
            .iter()
            .all(|f| rough[(f[0] * t0 + f[1] * t1).unsigned_abs() as usize])
    };
    // canonical points: (0 : 1), and t0 > 0 with gcd(t0, t1) = 1
    let infinity = u64::from(ok(0, 1));
    let finite: u64 = (1..=xi)
        .into_par_iter()
        .map(|t0| {
            let mut c = 0u64;
            for t1 in -xi..=xi {
                if ok(t0, t1) && gcd_binary(t0 as u64, t1.unsigned_abs()) == 1 {
                    c += 1;
                }
            }
            c
        })
        .sum();
    infinity + finite
}

/// Left side of the sieve-dimension condition and whether it holds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityCondition {
    pub w: u64,
    pub q: u64,
    /// `Π_{w <= p < Q} (1 - ν_p)^{-1}`.
    pub lhs: f64,
    /// `C (log Q / log w)^κ`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn density_condition_check<S: SieveScalar>(
    densities: &BTreeMap<u64, S>,
    w: u64,
    q: u64,
    kappa: f64,
    c: f64,
) -> Result<DensityCondition> {
    if w < 2 || w > q {
        return Err(Error::Invalid(format!("need 2 <= w <= Q, got w = {w}, Q = {q}")));
    }
    let mut lhs = 1.0;
    for (&p, nu) in densities.range(w..q) {
        let keep = 1.0 - nu.to_f64();
        if keep <= 0.0 {
            return Err(Error::DegenerateSievingSet(p));
        }
        lhs /= keep;
    }
    let rhs = if w == q {
        c
    } else {
        c * ((q as f64).ln() / (w as f64).ln()).powf(kappa)
    };
    Ok(DensityCondition {
        w,
        q,
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

/// Smallest `C` making the condition hold on every `(w, Q)` pair, and the
/// sieve exponent `s = 9κ + 1 + 10 log C` it implies.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityFit {
    pub kappa: f64,
    pub c: f64,
    pub implied_s: f64,
    pub pairs_checked: usize,
}

pub fn fit_density_constant<S: SieveScalar>(
    densities: &BTreeMap<u64, S>,
    kappa: f64,
    pairs: &[(u64, u64)],
) -> Result<DensityFit> {
    let mut c: f64 = 1.0;
    for &(w, q) in pairs {
        let probe = density_condition_check(densities, w, q, kappa, 1.0)?;
        if w < q {
            c = c.max(probe.lhs / probe.rhs);
        }
    }
    Ok(DensityFit {
        kappa,
        c,
        implied_s: 9.0 * kappa + 1.0 + 10.0 * c.ln(),
        pairs_checked: pairs.len(),
    })
}

/// Local densities `ν_p = |{f ≡ 0}| / p^{r+1}` by enumeration.
pub fn zero_locus_densities<S: SieveScalar>(form: &BadReductionForm, primes: &[u64]) -> BTreeMap<u64, S> {
    let r = form.r();
    primes
        .iter()
        .map(|&p| {
            let poly = form.poly.clone();
            let set = SievingSet::from_predicate(p, r, move |v| poly.eval_mod(v, p) == 0);
            (p, local_density::<S>(&set))
        })
        .collect()
}

/// Sieving sets `{f ≡ 0 mod p}` for every support prime.
pub fn zero_locus_sets(form: &BadReductionForm, support: &SieveSupport) -> Vec<SievingSet> {
    let r = form.r();
    support
        .primes()
        .iter()
        .map(|&p| {
            let poly = form.poly.clone();
            SievingSet::from_predicate(p, r, move |v| poly.eval_mod(v, p) == 0)
        })
        .collect()
}
