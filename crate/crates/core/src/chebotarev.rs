//! Frobenius class statistics of a family over `F_{q^n}` against the
//! char-poly densities of the monodromy coset.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::curves::{CharPolyClass, CurveFamily, FamilyModel};
use crate::ffield::{Elem, GaloisField};
use crate::groups::{charpoly_class_density, group_order, Flavor, GroupSpec};
use crate::scalar::SieveScalar;
use crate::{Error, Result};

/// All `t ∈ F^r` off the bad locus, in order of their encodings.
pub fn ffield_specializations(family: &CurveFamily, field: &GaloisField) -> Vec<Vec<Elem>> {
    let r = family.r();
    let q = field.order() as usize;
    let total = q.pow(r as u32);
    (0..total)
        .map(|mut code| {
            let mut t = vec![0; r];
            for c in t.iter_mut().rev() {
                *c = (code % q) as Elem;
                code /= q;
            }
            t
        })
        .filter(|t| field.eval_mpoly(&family.bad_locus, t) != 0)
        .collect()
}

/// Char-poly class of Frobenius for the fibre over `t ∈ F^r`.
pub fn ffield_frobenius(family: &CurveFamily, field: &GaloisField, t: &[Elem], l: u64) -> Result<CharPolyClass> {
    let big_q = field.order();
    if big_q % l == 0 {
        return Err(Error::ResidualCharacteristic(l));
    }
    match &family.model {
        FamilyModel::Weierstrass { a, b } => {
            let a = field.eval_mpoly(a, t);
            let b = field.eval_mpoly(b, t);
            let a3 = field.mul(field.mul(a, a), a);
            let disc = field.add(field.mul(field.from_int(4), a3), field.mul(field.from_int(27), field.mul(b, b)));
            if disc == 0 || field.p() <= 3 {
                return Err(Error::OutsideEtaleLocus);
            }
            let mut s = 0i64;
            for x in field.elements() {
                let x3 = field.mul(field.mul(x, x), x);
                s += field.chi(field.add(field.add(x3, field.mul(a, x)), b));
            }
            Ok(CharPolyClass::Genus1 {
                l,
                trace: crate::arith::reduce(-s, l),
                det: big_q % l,
            })
        }
        FamilyModel::Quintic { f } => {
            if field.degree() != 1 {
                return Err(Error::Unsupported("genus 2 counts over proper extensions".into()));
            }
            let p = field.p();
            let c: Vec<u64> = f.coeffs.iter().map(|c| field.eval_mpoly(c, t) as u64).collect();
            if !family.smooth_mod(&t.iter().map(|&x| x as u64).collect::<Vec<_>>(), p) {
                return Err(Error::OutsideEtaleLocus);
            }
            let (n1, n2) = crate::curves::genus2_counts_mod(&c, p);
            let rec = crate::curves::genus2_record(p, n1, n2)?;
            crate::curves::frob_class(&rec, l)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FFieldCensus {
    pub q: u64,
    pub n: usize,
    pub l: u64,
    pub points: usize,
    #[serde(serialize_with = "ser_map")]
    pub frequencies: BTreeMap<CharPolyClass, BigRational>,
    /// `None` when the group side cannot be tabulated.
    #[serde(serialize_with = "ser_opt_map")]
    pub predicted: Option<BTreeMap<CharPolyClass, BigRational>>,
    #[serde(serialize_with = "ser_opt_rational")]
    pub deviation: Option<BigRational>,
}

fn ser_map<S: serde::Serializer>(m: &BTreeMap<CharPolyClass, BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(m.iter().map(|(k, v)| (k.to_string(), v.to_wire())))
}

fn ser_opt_map<S: serde::Serializer>(
    m: &Option<BTreeMap<CharPolyClass, BigRational>>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match m {
        Some(m) => ser_map(m, s),
        None => s.serialize_none(),
    }
}

fn ser_opt_rational<S: serde::Serializer>(v: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.serialize_str(&v.to_wire()),
        None => s.serialize_none(),
    }
}

impl FFieldCensus {
    pub fn frequency_total(&self) -> BigRational {
        self.frequencies.values().sum()
    }

    fn keys(&self) -> Vec<CharPolyClass> {
        let mut keys: Vec<CharPolyClass> = self.frequencies.keys().copied().collect();
        if let Some(p) = &self.predicted {
            keys.extend(p.keys().copied());
        }
        keys.sort();
        keys.dedup();
        keys
    }
}

/// Measured class frequencies over `F_{q^n}` and, when available, the
/// predicted densities on the multiplier coset `δ = q^n mod l`.
pub fn ffield_census(family: &CurveFamily, q: u64, n: usize, l: u64) -> Result<FFieldCensus> {
    if !crate::arith::is_prime(q) {
        return Err(Error::Invalid(format!("base field size {q} must be prime")));
    }
    let field = GaloisField::new(q, n)?;
    let points = ffield_specializations(family, &field);
    let classes: Vec<CharPolyClass> = points
        .par_iter()
        .map(|t| ffield_frobenius(family, &field, t, l))
        .collect::<Result<_>>()?;
    let mut counts: BTreeMap<CharPolyClass, u64> = BTreeMap::new();
    for c in &classes {
        *counts.entry(*c).or_insert(0) += 1;
    }
    let total = BigInt::from(points.len());
    let frequencies: BTreeMap<CharPolyClass, BigRational> = counts
        .into_iter()
        .map(|(k, c)| (k, BigRational::new(BigInt::from(c), total.clone())))
        .collect();
    let delta = field.order() % l;
    let predicted = match charpoly_class_density(family.genus, l, delta) {
        Ok(p) => Some(p),
        Err(Error::PredictionUnavailable(why)) => {
            log::warn!("no prediction for q = {q}, n = {n}, l = {l}: {why}");
            None
        }
        Err(e) => return Err(e),
    };
    let mut census = FFieldCensus {
        q,
        n,
        l,
        points: points.len(),
        frequencies,
        predicted,
        deviation: None,
    };
    if census.predicted.is_some() && census.points > 0 {
        census.deviation = census
            .keys()
            .iter()
            .map(|k| class_gap(&census, k))
            .max();
    }
    Ok(census)
}

fn class_gap(c: &FFieldCensus, k: &CharPolyClass) -> BigRational {
    let zero = BigRational::zero();
    let m = c.frequencies.get(k).unwrap_or(&zero);
    let p = c.predicted.as_ref().and_then(|p| p.get(k)).unwrap_or(&zero);
    (m - p).abs()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnvelopeRow {
    pub n: usize,
    pub points: usize,
    pub deviation: Option<f64>,
    pub envelope: Option<f64>,
    pub within_envelope: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebotarevReport {
    pub q: u64,
    pub l: u64,
    pub genus: u8,
    /// `gcd(|GSp_{2g}(F_l)|, q) = 1`.
    pub order_coprime_to_q: bool,
    pub prediction_available: bool,
    /// `deviation(n₀) · q^{n₀/2}` at the smallest `n`.
    pub c_emp: Option<f64>,
    pub envelope: Vec<EnvelopeRow>,
    pub censuses: Vec<FFieldCensus>,
}

impl ChebotarevReport {
    pub const CSV_HEADER: &'static str = "q,n,l,class_key,measured,predicted,deviation";

    pub fn csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for c in &self.censuses {
            for k in &c.keys() {
                let measured = c.frequencies.get(k).map(|v| v.to_wire()).unwrap_or_else(|| "0/1".into());
                let (predicted, gap) = match &c.predicted {
                    Some(p) => (
                        p.get(k).map(|v| v.to_wire()).unwrap_or_else(|| "0/1".into()),
                        format!("{:.6}", SieveScalar::to_f64(&class_gap(c, k))),
                    ),
                    None => (String::new(), String::new()),
                };
                let _ = writeln!(out, "{},{},{},\"{}\",{},{},{}", c.q, c.n, c.l, k, measured, predicted, gap);
            }
        }
        out
    }

    /// Strictly decreasing deviations over consecutive `n`.
    pub fn strictly_decreasing(&self) -> bool {
        let d: Vec<BigRational> = self.censuses.iter().filter_map(|c| c.deviation.clone()).collect();
        d.len() == self.censuses.len() && d.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn chebotarev_report(
    family: &CurveFamily,
    q: u64,
    l: u64,
    ns: std::ops::RangeInclusive<usize>,
) -> Result<ChebotarevReport> {
    let spec = GroupSpec::new(family.genus, l, Flavor::Similitude)?;
    let order = group_order(&spec)?;
    let coprime = order.gcd(&(q as u128)) == 1;
    if !coprime {
        log::warn!("|G| = {order} is not prime to q = {q}");
    }
    let censuses = ns
        .map(|n| ffield_census(family, q, n, l))
        .collect::<Result<Vec<_>>>()?;
    let prediction_available = censuses.iter().all(|c| c.predicted.is_some());
    let c_emp = censuses.first().and_then(|c| {
        c.deviation
            .as_ref()
            .map(|d| SieveScalar::to_f64(d) * (q as f64).powf(c.n as f64 / 2.0))
    });
    let envelope = censuses
        .iter()
        .map(|c| {
            let dev = c.deviation.as_ref().map(SieveScalar::to_f64);
            let env = c_emp.map(|k| k * (q as f64).powf(-(c.n as f64) / 2.0));
            EnvelopeRow {
                n: c.n,
                points: c.points,
                deviation: dev,
                envelope: env,
                within_envelope: dev.zip(env).map(|(d, e)| d <= e * (1.0 + 1e-12)),
            }
        })
        .collect();
    Ok(ChebotarevReport {
        q,
        l,
        genus: family.genus,
        order_coprime_to_q: coprime,
        prediction_available,
        c_emp,
        envelope,
        censuses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    #[test]
    fn specialization_counts() {
        let fam = CurveFamily::default_genus1();
        assert_eq!(ffield_specializations(&fam, &GaloisField::new(5, 1).unwrap()).len(), 3);
        assert_eq!(ffield_specializations(&fam, &GaloisField::new(5, 2).unwrap()).len(), 23);
        let g2 = CurveFamily::default_genus2();
        assert!(ffield_specializations(&g2, &GaloisField::new(3, 1).unwrap()).is_empty());
    }

    #[test]
    fn frobenius_over_prime_field_matches_point_loop() {
        let fam = CurveFamily::default_genus1();
        let field = GaloisField::new(5, 1).unwrap();
        // t = 2: y² = x³ - 6x + 4 over F_5, counted by brute force
        let mut n = 1;
        for x in 0..5i64 {
            for y in 0..5i64 {
                if (y * y - (x * x * x - 6 * x + 4)).rem_euclid(5) == 0 {
                    n += 1;
                }
            }
        }
        let a: i64 = 5 + 1 - n;
        let c = ffield_frobenius(&fam, &field, &[2], 3).unwrap();
        assert_eq!(
            c,
            CharPolyClass::Genus1 { l: 3, trace: a.rem_euclid(3) as u64, det: 2 }
        );
    }

    #[test]
    fn det_component_is_field_size() {
        let fam = CurveFamily::default_genus1();
        for n in 1..=2 {
            let c = ffield_census(&fam, 7, n, 3).unwrap();
            assert!(c.frequencies.keys().all(|k| k.multiplier() == 7u64.pow(n as u32) % 3));
            assert_eq!(c.frequency_total(), BigRational::one());
        }
    }

    #[test]
    fn report_rows_and_csv() {
        let fam = CurveFamily::default_genus1();
        let r = chebotarev_report(&fam, 5, 3, 1..=2).unwrap();
        assert!(r.order_coprime_to_q);
        assert!(r.prediction_available);
        assert!(r.csv().starts_with(ChebotarevReport::CSV_HEADER));
        for c in &r.censuses {
            let p: BigRational = c.predicted.as_ref().unwrap().values().sum();
            assert_eq!(p, BigRational::one());
        }
    }
}
