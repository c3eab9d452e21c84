//! Sieve vocabulary over `Q` and the large sieve.
//!
//! A point is sifted by a prime `p` when its reduction lands in the sieving
//! set `Ω_p ⊆ (Z/p)^{r+1}`. The large sieve bounds the number of survivors by
//! `max{x^{r+1}, Q^{2(r+1)}} / L(Q)` up to a constant that depends only on the
//! sieve setting; that constant is never applied here, only carried along.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::One;
use serde::{Serialize, Serializer};

use crate::arith::{is_prime, is_squarefree, prime_factors};
use crate::scalar::SieveScalar;
use crate::{Error, Result};

/// Ambient data: dimension and the rational primes available for sieving.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveSetting {
    pub r: usize,
    pub prime_universe: Vec<u64>,
}

impl SieveSetting {
    pub fn new(r: usize, mut primes: Vec<u64>) -> Result<Self> {
        primes.sort_unstable();
        primes.dedup();
        if let Some(&p) = primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        Ok(SieveSetting {
            r,
            prime_universe: primes,
        })
    }
}

/// Prime support `L*` and the norm bound `Q`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveSupport {
    primes: Vec<u64>,
    q: u64,
}

impl SieveSupport {
    pub fn new(primes: Vec<u64>, q: u64) -> Result<Self> {
        let mut sorted = primes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != primes.len() {
            return Err(Error::Invalid("repeated prime in support".into()));
        }
        for &p in &sorted {
            if !is_prime(p) {
                return Err(Error::Invalid(format!("{p} is not prime")));
            }
            if p >= q {
                return Err(Error::Invalid(format!("support prime {p} is not below Q = {q}")));
            }
        }
        Ok(SieveSupport { primes: sorted, q })
    }

    /// All primes `< q` satisfying `keep`.
    pub fn primes_below(q: u64, keep: impl Fn(u64) -> bool) -> Self {
        SieveSupport {
            primes: crate::arith::primes_below(q).into_iter().filter(|&p| keep(p)).collect(),
            q,
        }
    }

    pub fn empty(q: u64) -> Self {
        SieveSupport { primes: Vec::new(), q }
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Product of the support primes, `P(Q)`, if it fits.
    pub fn primorial(&self) -> Option<u64> {
        self.primes.iter().try_fold(1u64, |acc, &p| acc.checked_mul(p))
    }
}

type Membership = Arc<dyn Fn(&[u64]) -> bool + Send + Sync>;

/// Sieving set `Ω_p ⊆ (Z/p)^{r+1}` with its exact cardinality.
#[derive(Clone)]
pub struct SievingSet {
    p: u64,
    r: usize,
    membership: Membership,
    cardinality: u64,
}

impl fmt::Debug for SievingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SievingSet")
            .field("p", &self.p)
            .field("r", &self.r)
            .field("cardinality", &self.cardinality)
            .finish()
    }
}

/// Visit every tuple of `(Z/m)^n`.
pub(crate) fn for_each_residue_tuple(m: u64, n: usize, mut f: impl FnMut(&[u64])) {
    let mut cur = vec![0u64; n];
    loop {
        f(&cur);
        let mut i = n;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < m {
                break;
            }
            cur[i] = 0;
        }
    }
}

impl SievingSet {
    /// Build from a predicate on reduced residues, counting by enumeration.
    pub fn from_predicate(
        p: u64,
        r: usize,
        pred: impl Fn(&[u64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        let mut cardinality = 0;
        for_each_residue_tuple(p, r + 1, |v| {
            if pred(v) {
                cardinality += 1;
            }
        });
        SievingSet {
            p,
            r,
            membership: Arc::new(pred),
            cardinality,
        }
    }

    /// Build with a cardinality the caller has computed independently.
    pub fn with_cardinality(
        p: u64,
        r: usize,
        cardinality: u64,
        pred: impl Fn(&[u64]) -> bool + Send + Sync + 'static,
    ) -> Result<Self> {
        let total = p.checked_pow(r as u32 + 1).unwrap_or(u64::MAX);
        if cardinality > total {
            return Err(Error::Invalid(format!(
                "cardinality {cardinality} exceeds {p}^{}",
                r + 1
            )));
        }
        Ok(SievingSet {
            p,
            r,
            membership: Arc::new(pred),
            cardinality,
        })
    }

    pub fn empty(p: u64, r: usize) -> Self {
        SievingSet {
            p,
            r,
            membership: Arc::new(|_| false),
            cardinality: 0,
        }
    }

    pub fn full(p: u64, r: usize) -> Self {
        SievingSet {
            p,
            r,
            membership: Arc::new(|_| true),
            cardinality: p.pow(r as u32 + 1),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    /// Membership of already-reduced residues.
    pub fn contains_residues(&self, v: &[u64]) -> bool {
        (self.membership)(v)
    }

    /// Membership of an integer vector after reduction mod `p`.
    pub fn contains(&self, v: &[i64]) -> bool {
        let red: Vec<u64> = v.iter().map(|&c| crate::arith::reduce(c, self.p)).collect();
        (self.membership)(&red)
    }
}

/// `ν_p(Ω_p) = |Ω_p| / p^{r+1}`.
pub fn local_density<S: SieveScalar>(s: &SievingSet) -> S {
    let total = (s.p as i128).pow(s.r as u32 + 1);
    S::from_ratio(s.cardinality as i128, total)
}

fn check_sets(sets: &[SievingSet], support: &SieveSupport) -> Result<()> {
    match sets.iter().find(|s| !support.contains(s.p)) {
        Some(s) => Err(Error::SupportMismatch(s.p)),
        None => Ok(()),
    }
}

/// Points of `xs` whose image under `f` avoids `Ω_p` for every support
/// prime. Input order is preserved; primes without a set sift nothing.
pub fn sifted_set<P: Clone>(
    xs: &[P],
    f: impl Fn(&P) -> Vec<i64>,
    sets: &[SievingSet],
    support: &SieveSupport,
) -> Result<Vec<P>> {
    check_sets(sets, support)?;
    Ok(xs
        .iter()
        .filter(|x| {
            let v = f(x);
            sets.iter().all(|s| !s.contains(&v))
        })
        .cloned()
        .collect())
}

/// `L(Q) = Σ_a Π_{p | a} ν_p / (1 - ν_p)` over squarefree `a <= Q` built from
/// support primes; primes missing from `densities` have `ν_p = 0`.
pub fn large_sieve_l<S: SieveScalar>(
    support: &SieveSupport,
    densities: &BTreeMap<u64, S>,
) -> Result<S> {
    let mut weights = Vec::with_capacity(support.primes.len());
    for &p in &support.primes {
        let nu = densities.get(&p).cloned().unwrap_or_else(S::zero);
        if nu >= S::one() {
            return Err(Error::DegenerateSievingSet(p));
        }
        let w = nu.clone() / (S::one() - nu);
        weights.push((p, w));
    }
    // depth-first over sorted primes, cut off once the product exceeds Q
    fn dfs<S: SieveScalar>(ws: &[(u64, S)], start: usize, prod: u64, acc: S, q: u64, total: &mut S) {
        for i in start..ws.len() {
            let (p, ref w) = ws[i];
            let Some(next) = prod.checked_mul(p) else { break };
            if next > q {
                break;
            }
            let term = acc.clone() * w.clone();
            *total = total.clone() + term.clone();
            dfs(ws, i + 1, next, term, q, total);
        }
    }
    let mut total = S::one();
    dfs(&weights, 0, 1, S::one(), support.q, &mut total);
    Ok(total)
}

/// `max{x^{r+1}, Q^{2(r+1)}} / L(Q)`, without the implied constant.
pub fn large_sieve_bound<S: SieveScalar>(x: &S, q: &S, r: usize, l_of_q: &S) -> Result<S> {
    if *l_of_q <= S::zero() {
        return Err(Error::Invalid("L(Q) must be positive".into()));
    }
    let e = r as u32 + 1;
    let num = S::max_of(x.powu(e), q.powu(2 * e));
    Ok(num / l_of_q.clone())
}

/// Outcome of a large-sieve run.
#[derive(Clone, Debug, PartialEq)]
pub struct SieveReport<S> {
    pub sifted_count: u64,
    pub l_of_q: S,
    pub bound: S,
    pub densities: Vec<(u64, S)>,
}

impl<S: SieveScalar> SieveReport<S> {
    /// The bound is only meaningful up to a constant depending on `(K, r, φ)`.
    pub const IMPLIED_CONSTANT: &'static str = "unspecified; depends on the sieve setting only";
}

impl<S: SieveScalar> Serialize for SieveReport<S> {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        #[derive(Serialize)]
        struct Wire {
            sifted_count: u64,
            #[serde(rename = "L_of_Q")]
            l_of_q: String,
            bound: String,
            densities: Vec<(u64, String)>,
            implied_constant: &'static str,
        }
        Wire {
            sifted_count: self.sifted_count,
            l_of_q: self.l_of_q.to_wire(),
            bound: self.bound.to_wire(),
            densities: self.densities.iter().map(|(p, d)| (*p, d.to_wire())).collect(),
            implied_constant: Self::IMPLIED_CONSTANT,
        }
        .serialize(s)
    }
}

/// Sift `xs` and assemble the large-sieve report at height `x`.
pub fn large_sieve_report<S: SieveScalar, P: Clone>(
    xs: &[P],
    f: impl Fn(&P) -> Vec<i64>,
    sets: &[SievingSet],
    support: &SieveSupport,
    x: u64,
    r: usize,
) -> Result<SieveReport<S>> {
    let sifted = sifted_set(xs, f, sets, support)?;
    let densities: BTreeMap<u64, S> = sets.iter().map(|s| (s.p, local_density::<S>(s))).collect();
    let l_of_q = large_sieve_l(support, &densities)?;
    let bound = large_sieve_bound(&S::from_u64(x), &S::from_u64(support.q), r, &l_of_q)?;
    Ok(SieveReport {
        sifted_count: sifted.len() as u64,
        l_of_q,
        bound,
        densities: densities.into_iter().collect(),
    })
}

/// Composite density check for squarefree `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrtCheck {
    pub d: u64,
    /// `ν_d(Ω_d) = 1 - Π_{p | d} (1 - ν_p(Ω_p))`.
    pub density: BigRational,
    /// Whether the identity was confirmed by enumerating `(Z/d)^{r+1}`.
    pub verified_by_enumeration: bool,
}

/// Largest `d^{r+1}` enumerated by [`crt_density_check`].
pub const CRT_ENUMERATION_CAP: u64 = 10_000_000;

/// Check `1 - ν_d = Π (1 - ν_p)` where `Ω_d` is the set of residues mod `d`
/// that fall in `Ω_p` for some `p | d`.
pub fn crt_density_check(d: u64, sets: &[SievingSet]) -> Result<CrtCheck> {
    if !is_squarefree(d) {
        return Err(Error::NotSquarefree(d));
    }
    let ps = prime_factors(d);
    let mut chosen = Vec::with_capacity(ps.len());
    for p in &ps {
        let s = sets
            .iter()
            .find(|s| s.p == *p)
            .ok_or_else(|| Error::Invalid(format!("no sieving set for {p} | {d}")))?;
        chosen.push(s);
    }
    let r = chosen.first().map(|s| s.r).unwrap_or(0);
    if chosen.iter().any(|s| s.r != r) {
        return Err(Error::Invalid("sieving sets of different dimension".into()));
    }
    let keep: BigRational = chosen
        .iter()
        .map(|s| BigRational::one() - local_density::<BigRational>(s))
        .product();
    let density = BigRational::one() - keep;

    let n = r + 1;
    let feasible = d.checked_pow(n as u32).is_some_and(|t| t <= CRT_ENUMERATION_CAP);
    if feasible && d > 1 {
        let mut hits = 0u64;
        let mut red = vec![0u64; n];
        for_each_residue_tuple(d, n, |v| {
            let inside = chosen.iter().any(|s| {
                for (slot, &c) in red.iter_mut().zip(v) {
                    *slot = c % s.p;
                }
                s.contains_residues(&red)
            });
            if inside {
                hits += 1;
            }
        });
        let direct = BigRational::new(hits.into(), d.pow(n as u32).into());
        if direct != density {
            return Err(Error::Internal(format!(
                "CRT identity failed at d = {d}: product {density}, enumeration {direct}"
            )));
        }
    }
    Ok(CrtCheck {
        d,
        density,
        verified_by_enumeration: feasible && d > 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Exact;
    use num_traits::Zero;

    fn eratosthenes_sets(ps: &[u64]) -> Vec<SievingSet> {
        ps.iter()
            .map(|&p| SievingSet::from_predicate(p, 1, |v| v[1] == 0))
            .collect()
    }

    fn line(n: i64) -> Vec<i64> {
        vec![1, n]
    }

    #[test]
    fn sift_evens() {
        let xs: Vec<i64> = (1..=10).collect();
        let support = SieveSupport::new(vec![2], 3).unwrap();
        let out = sifted_set(&xs, |&n| line(n), &eratosthenes_sets(&[2]), &support).unwrap();
        assert_eq!(out, vec![1, 3, 5, 7, 9]);
    }

    #[test]
    fn sift_empty_support() {
        let xs: Vec<i64> = (1..=10).collect();
        let out = sifted_set(&xs, |&n| line(n), &[], &SieveSupport::empty(10)).unwrap();
        assert_eq!(out, xs);
    }

    #[test]
    fn sift_thirty() {
        let xs: Vec<i64> = (1..=30).collect();
        let support = SieveSupport::new(vec![2, 3, 5], 6).unwrap();
        let out = sifted_set(&xs, |&n| line(n), &eratosthenes_sets(&[2, 3, 5]), &support).unwrap();
        assert_eq!(out, vec![1, 7, 11, 13, 17, 19, 23, 29]);
    }

    #[test]
    fn sift_support_mismatch() {
        let support = SieveSupport::new(vec![2], 3).unwrap();
        let err = sifted_set(&[1i64], |&n| line(n), &eratosthenes_sets(&[3]), &support);
        assert_eq!(err, Err(Error::SupportMismatch(3)));
    }

    #[test]
    fn densities() {
        let s = SievingSet::from_predicate(5, 1, |v| (v[1] * ((v[0] + 5 - v[1]) % 5)) % 5 == 0);
        assert_eq!(local_density::<Exact>(&s), Exact::from_ratio(9, 25));
        assert_eq!(local_density::<Exact>(&SievingSet::empty(7, 1)), Exact::zero());
        assert_eq!(local_density::<Exact>(&SievingSet::full(3, 1)), Exact::one());
    }

    fn dens(pairs: &[(u64, i128, i128)]) -> BTreeMap<u64, Exact> {
        pairs.iter().map(|&(p, n, d)| (p, Exact::from_ratio(n, d))).collect()
    }

    #[test]
    fn l_of_q_examples() {
        let s = SieveSupport::new(vec![3], 10).unwrap();
        assert_eq!(large_sieve_l(&s, &dens(&[(3, 1, 3)])).unwrap(), Exact::from_ratio(3, 2));
        let s = SieveSupport::new(vec![2, 3], 10).unwrap();
        let d = dens(&[(2, 1, 2), (3, 1, 3)]);
        assert_eq!(large_sieve_l(&s, &d).unwrap(), Exact::from_ratio(3, 1));
        let s = SieveSupport::new(vec![2, 3], 5).unwrap();
        assert_eq!(large_sieve_l(&s, &d).unwrap(), Exact::from_ratio(5, 2));
        let s = SieveSupport::new(vec![2], 5).unwrap();
        assert_eq!(
            large_sieve_l(&s, &dens(&[(2, 1, 1)])),
            Err(Error::DegenerateSievingSet(2))
        );
    }

    #[test]
    fn bound_examples() {
        let b = large_sieve_bound(
            &Exact::from_u64(100),
            &Exact::from_u64(10),
            1,
            &Exact::from_ratio(3, 2),
        )
        .unwrap();
        assert_eq!(b, Exact::from_ratio(20000, 3));
        // Q = x^{1/2}: both arguments of the max agree
        let b = large_sieve_bound(&Exact::from_u64(81), &Exact::from_u64(9), 1, &Exact::one()).unwrap();
        assert_eq!(b, Exact::from_u64(81 * 81));
        let f = large_sieve_bound(&100.0f64, &10.0, 1, &1.5).unwrap();
        assert!((f - 6666.666666).abs() < 1e-3);
    }

    #[test]
    fn crt_examples() {
        let sets = vec![
            SievingSet::from_predicate(2, 1, |v| v[1] == 0),
            SievingSet::from_predicate(3, 1, |v| v[0] == 0 && v[1] == 0 || v[1] == 1 && v[0] == 2 || v[1] == 2 && v[0] == 1),
        ];
        // ν_2 = 1/2, ν_3 = 3/9 = 1/3
        let c = crt_density_check(6, &sets).unwrap();
        assert_eq!(c.density, Exact::from_ratio(2, 3));
        assert!(c.verified_by_enumeration);
        let c = crt_density_check(2, &sets).unwrap();
        assert_eq!(c.density, Exact::from_ratio(1, 2));
        assert_eq!(crt_density_check(12, &sets), Err(Error::NotSquarefree(12)));
    }

    #[test]
    fn crt_fifteen_by_enumeration() {
        // Ω_p = {ab ≡ 0}; ν_p = (2p - 1)/p²
        let sets: Vec<SievingSet> = [3u64, 5]
            .iter()
            .map(|&p| SievingSet::from_predicate(p, 1, move |v| (v[0] * v[1]) % p == 0))
            .collect();
        assert_eq!(local_density::<Exact>(&sets[0]), Exact::from_ratio(5, 9));
        let c = crt_density_check(15, &sets).unwrap();
        // 1 - (4/9)(16/25)
        assert_eq!(c.density, Exact::from_ratio(161, 225));
        assert!(c.verified_by_enumeration);
    }

    #[test]
    fn report_wire_format() {
        let xs: Vec<i64> = (1..=10).collect();
        let support = SieveSupport::new(vec![3], 10).unwrap();
        let sets = vec![SievingSet::from_predicate(3, 1, |v| v[1] == 0)];
        let rep: SieveReport<Exact> = large_sieve_report(&xs, |&n| line(n), &sets, &support, 10, 1).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["sifted_count"], 7);
        assert_eq!(v["L_of_Q"], "3/2");
        assert_eq!(v["densities"][0][0], 3);
        assert_eq!(v["densities"][0][1], "1/3");
        assert_eq!(v["bound"], "20000/3");
    }
}
