//! Elliptic and genus-2 families, their specializations at rational
//! parameters, reduction data, and Frobenius traces by exhaustive counting.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::arith::{is_prime, mul_mod, pow_mod, quadratic_character_table, reduce};
use crate::ffield::GaloisField;
use crate::heights::AffinePoint;
use crate::poly::{MPoly, PolyInX, PolyWire};
use crate::{Error, Result};

/// Characteristic-polynomial data of a Frobenius (or matrix) mod `l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CharPolyClass {
    /// `x² - trace·x + det`.
    Genus1 { l: u64, trace: u64, det: u64 },
    /// `x⁴ - a1 x³ + a2 x² - mult·a1 x + mult²`.
    Genus2 { l: u64, a1: u64, a2: u64, mult: u64 },
}

impl CharPolyClass {
    pub fn l(&self) -> u64 {
        match *self {
            CharPolyClass::Genus1 { l, .. } | CharPolyClass::Genus2 { l, .. } => l,
        }
    }

    /// Determinant (`g = 1`) or multiplier (`g = 2`).
    pub fn multiplier(&self) -> u64 {
        match *self {
            CharPolyClass::Genus1 { det, .. } => det,
            CharPolyClass::Genus2 { mult, .. } => mult,
        }
    }
}

impl fmt::Display for CharPolyClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CharPolyClass::Genus1 { trace, det, .. } => write!(f, "({trace},{det})"),
            CharPolyClass::Genus2 { a1, a2, mult, .. } => write!(f, "({a1},{a2},{mult})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FamilyModel {
    /// `y² = x³ + A(t) x + B(t)`.
    Weierstrass { a: MPoly, b: MPoly },
    /// `y² = f(x; t)` with `f` monic of degree 5.
    Quintic { f: PolyInX },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveFamily {
    pub name: String,
    pub genus: u8,
    pub model: FamilyModel,
    pub bad_locus: MPoly,
    /// Linear forms in `(u0, u1, ...)` whose product is the homogenized bad
    /// locus, when known; enables the fast good-reduction census.
    pub bad_locus_factors: Option<Vec<Vec<i64>>>,
    pub excluded_primes: Vec<u64>,
}

/// JSON form of a family description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyFile {
    #[serde(default)]
    pub name: String,
    pub genus: u8,
    /// `[A, B]` for genus 1; `[f0, ..., f5]` for genus 2.
    pub coefficients: Vec<PolyWire>,
    pub bad_locus: PolyWire,
    pub excluded_primes: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bad_locus_factors: Option<Vec<Vec<i64>>>,
}

fn params(genus: u8) -> usize {
    (genus as usize) * (genus as usize + 1) / 2
}

impl CurveFamily {
    /// `y² = x³ + 3(1-t)t x + 2(1-t)²t`, bad outside `t(1-t) ≠ 0`.
    pub fn default_genus1() -> Self {
        let a = MPoly::univariate(&[0, 3, -3]);
        let b = MPoly::univariate(&[0, 2, -4, 2]);
        CurveFamily {
            name: "default-g1".into(),
            genus: 1,
            model: FamilyModel::Weierstrass { a, b },
            bad_locus: MPoly::univariate(&[0, 1, -1]),
            bad_locus_factors: Some(vec![vec![0, 1], vec![1, -1]]),
            excluded_primes: vec![2, 3],
        }
    }

    /// `y² = x(x-1)(x-t1)(x-t2)(x-t3)`.
    pub fn default_genus2() -> Self {
        let t: Vec<MPoly> = (0..3).map(|i| MPoly::var(3, i)).collect();
        let one = MPoly::constant(3, 1);
        let mut roots = vec![MPoly::zero(3), one.clone()];
        roots.extend(t.iter().cloned());
        let mut bad = one.clone();
        for ti in &t {
            bad = bad.mul(ti).mul(&ti.sub(&one));
        }
        for i in 0..3 {
            for j in i + 1..3 {
                bad = bad.mul(&t[i].sub(&t[j]));
            }
        }
        CurveFamily {
            name: "default-g2".into(),
            genus: 2,
            model: FamilyModel::Quintic {
                f: PolyInX::from_roots(3, &roots),
            },
            bad_locus: bad,
            bad_locus_factors: None,
            excluded_primes: vec![2],
        }
    }

    pub fn r(&self) -> usize {
        params(self.genus)
    }

    pub fn from_file(file: &FamilyFile) -> Result<Self> {
        if !(1..=2).contains(&file.genus) {
            return Err(Error::Unsupported(format!("genus {}", file.genus)));
        }
        let r = params(file.genus);
        let coeffs = file
            .coefficients
            .iter()
            .map(|w| w.to_poly(r))
            .collect::<Result<Vec<_>>>()?;
        let model = match (file.genus, coeffs.len()) {
            (1, 2) => FamilyModel::Weierstrass {
                a: coeffs[0].clone(),
                b: coeffs[1].clone(),
            },
            (2, 6) => FamilyModel::Quintic {
                f: PolyInX { coeffs },
            },
            (g, n) => {
                return Err(Error::Invalid(format!("genus {g} family with {n} coefficients")));
            }
        };
        let family = CurveFamily {
            name: file.name.clone(),
            genus: file.genus,
            model,
            bad_locus: file.bad_locus.to_poly(r)?,
            bad_locus_factors: file.bad_locus_factors.clone(),
            excluded_primes: file.excluded_primes.clone(),
        };
        family.validate()?;
        Ok(family)
    }

    pub fn to_file(&self) -> FamilyFile {
        let coefficients = match &self.model {
            FamilyModel::Weierstrass { a, b } => vec![a.to_wire(), b.to_wire()],
            FamilyModel::Quintic { f } => f.coeffs.iter().map(|c| c.to_wire()).collect(),
        };
        FamilyFile {
            name: self.name.clone(),
            genus: self.genus,
            coefficients,
            bad_locus: self.bad_locus.to_wire(),
            excluded_primes: self.excluded_primes.clone(),
            bad_locus_factors: self.bad_locus_factors.clone(),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: FamilyFile =
            serde_json::from_str(&text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))?;
        Self::from_file(&file)
    }

    /// Stable identifier: SHA-256 of the canonical JSON form, 16 hex digits.
    pub fn family_id(&self) -> String {
        let json = serde_json::to_string(&self.to_file()).expect("family serializes");
        let digest = Sha256::digest(json.as_bytes());
        hex::encode(&digest[..8])
    }

    /// `Δ(t) = -16(4A³ + 27B²)` as a polynomial (genus 1 only).
    pub fn discriminant_poly(&self) -> Option<MPoly> {
        match &self.model {
            FamilyModel::Weierstrass { a, b } => {
                Some(a.pow(3).scale(4).add(&b.pow(2).scale(27)).scale(-16))
            }
            FamilyModel::Quintic { .. } => None,
        }
    }

    /// Structural checks, plus a test at a few primes that the curve is
    /// nonsingular wherever the bad locus does not vanish.
    pub fn validate(&self) -> Result<()> {
        let r = self.r();
        if self.bad_locus.nvars() != r {
            return Err(Error::Invalid("bad locus arity".into()));
        }
        if self.bad_locus.is_zero() {
            return Err(Error::ZeroPolynomial);
        }
        if let Some(p) = self.excluded_primes.iter().find(|&&p| !is_prime(p)) {
            return Err(Error::Invalid(format!("excluded prime {p} is not prime")));
        }
        match &self.model {
            FamilyModel::Weierstrass { .. } => {
                if !self.excluded_primes.contains(&2) || !self.excluded_primes.contains(&3) {
                    return Err(Error::Invalid("genus 1 families must exclude 2 and 3".into()));
                }
                if self.discriminant_poly().is_some_and(|d| d.is_zero()) {
                    return Err(Error::Invalid("generic discriminant vanishes".into()));
                }
            }
            FamilyModel::Quintic { f } => {
                if f.degree() != 5 || !f.coeffs[5].is_one() {
                    return Err(Error::Invalid("genus 2 model must be a monic quintic".into()));
                }
                if !self.excluded_primes.contains(&2) {
                    return Err(Error::Invalid("genus 2 families must exclude 2".into()));
                }
            }
        }
        let mut any_smooth = false;
        for p in [11u64, 13, 17] {
            if self.excluded_primes.contains(&p) {
                continue;
            }
            let mut t = vec![0u64; r];
            loop {
                let smooth = self.smooth_mod(&t, p);
                any_smooth |= smooth;
                if !smooth && self.bad_locus.eval_mod(&t, p) != 0 {
                    return Err(Error::Invalid(format!(
                        "curve singular at {t:?} mod {p} off the bad locus"
                    )));
                }
                let Some(k) = t.iter().position(|&c| c + 1 < p) else {
                    break;
                };
                t[k] += 1;
                t[..k].iter_mut().for_each(|c| *c = 0);
            }
        }
        if !any_smooth {
            return Err(Error::Invalid("generic discriminant vanishes".into()));
        }
        Ok(())
    }

    /// Is the fibre over the residue point `t` nonsingular mod `p`?
    pub fn smooth_mod(&self, t: &[u64], p: u64) -> bool {
        match &self.model {
            FamilyModel::Weierstrass { .. } => {
                self.discriminant_poly().expect("genus 1").eval_mod(t, p) != 0
            }
            FamilyModel::Quintic { f } => {
                let c: Vec<u64> = f.coeffs.iter().map(|c| c.eval_mod(t, p)).collect();
                c[5] != 0 && squarefree_mod(&c, p)
            }
        }
    }
}

fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

fn poly_rem_mod(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = trim(a.to_vec());
    let inv = crate::arith::inv_mod(*b.last().unwrap(), p).expect("nonzero leading term");
    while r.len() >= b.len() {
        let shift = r.len() - b.len();
        let c = mul_mod(*r.last().unwrap(), inv, p);
        for (i, &bi) in b.iter().enumerate() {
            r[shift + i] = (r[shift + i] + p - mul_mod(c, bi, p)) % p;
        }
        r = trim(r);
    }
    r
}

/// `gcd(f, f') = 1` over `F_p`.
fn squarefree_mod(f: &[u64], p: u64) -> bool {
    let f = trim(f.to_vec());
    let df = trim(
        f.iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| mul_mod(c, k as u64 % p, p))
            .collect(),
    );
    if df.is_empty() {
        return false;
    }
    let (mut a, mut b) = (f, df);
    while !b.is_empty() {
        let r = poly_rem_mod(&a, &b, p);
        a = b;
        b = r;
    }
    a.len() == 1
}

/// Exact determinant by Gaussian elimination over `Q`.
fn det_rational(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for col in 0..n {
        let Some(pivot) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if pivot != col {
            m.swap(col, pivot);
            det = -det;
        }
        let pv = m[col][col].clone();
        det *= &pv;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let f = &m[r][col] / &pv;
            for j in col..n {
                let sub = &f * &m[col][j];
                m[r][j] -= sub;
            }
        }
    }
    det
}

/// Resultant of dense polynomials (coefficients low to high) via the
/// Sylvester matrix.
pub fn resultant(f: &[BigRational], g: &[BigRational]) -> BigRational {
    let (m, n) = (f.len() - 1, g.len() - 1);
    let size = m + n;
    let mut rows = vec![vec![BigRational::zero(); size]; size];
    for i in 0..n {
        for (k, c) in f.iter().rev().enumerate() {
            rows[i][i + k] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in g.iter().rev().enumerate() {
            rows[n + i][i + k] = c.clone();
        }
    }
    det_rational(rows)
}

/// `disc(f) = (-1)^{n(n-1)/2} Res(f, f') / a_n`.
pub fn discriminant(f: &[BigRational]) -> BigRational {
    let n = f.len() - 1;
    let df: Vec<BigRational> = f
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
        .collect();
    let res = resultant(f, &df) / &f[n];
    if (n * (n - 1) / 2) % 2 == 1 {
        -res
    } else {
        res
    }
}

/// A member of a family at a rational parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Specialization {
    pub t: AffinePoint,
    pub genus: u8,
    /// `[A, B]` or `[f0, ..., f5]`.
    pub coeffs: Vec<BigRational>,
    pub disc: BigRational,
    pub j: Option<BigRational>,
    pub excluded_primes: Vec<u64>,
}

pub fn specialize(family: &CurveFamily, t: &AffinePoint) -> Result<Specialization> {
    if t.dim() != family.r() {
        return Err(Error::Invalid("parameter dimension".into()));
    }
    let tb = t.to_big();
    if family.bad_locus.eval_rational(&tb).is_zero() {
        return Err(Error::OutsideEtaleLocus);
    }
    let (coeffs, disc, j) = match &family.model {
        FamilyModel::Weierstrass { a, b } => {
            let a = a.eval_rational(&tb);
            let b = b.eval_rational(&tb);
            let four_a3 = BigRational::from_integer(4.into()) * &a * &a * &a;
            let sum = &four_a3 + BigRational::from_integer(27.into()) * &b * &b;
            let disc = BigRational::from_integer((-16).into()) * &sum;
            if disc.is_zero() {
                return Err(Error::OutsideEtaleLocus);
            }
            let j = BigRational::from_integer(1728.into()) * four_a3 / sum;
            (vec![a, b], disc, Some(j))
        }
        FamilyModel::Quintic { f } => {
            let c: Vec<BigRational> = f.coeffs.iter().map(|c| c.eval_rational(&tb)).collect();
            let disc = discriminant(&c);
            if disc.is_zero() {
                return Err(Error::OutsideEtaleLocus);
            }
            (c, disc, None)
        }
    };
    Ok(Specialization {
        t: t.clone(),
        genus: family.genus,
        coeffs,
        disc,
        j,
        excluded_primes: family.excluded_primes.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reduction {
    Good,
    Bad,
}

fn divides(p: u64, n: &BigInt) -> bool {
    (n % BigInt::from(p)).is_zero()
}

/// Crude criterion: `p` not excluded, `p ∤ num(Δ)`, `p ∤` any coefficient
/// denominator.
pub fn reduction_type(s: &Specialization, p: u64) -> Reduction {
    if s.excluded_primes.contains(&p)
        || divides(p, s.disc.numer())
        || s.coeffs.iter().any(|c| divides(p, c.denom()))
    {
        Reduction::Bad
    } else {
        Reduction::Good
    }
}

fn residue(c: &BigRational, p: u64) -> u64 {
    let pb = BigInt::from(p);
    let n = c.numer().mod_floor(&pb);
    let d = c.denom().mod_floor(&pb);
    let n: u64 = n.try_into().expect("residue fits");
    let d: u64 = d.try_into().expect("residue fits");
    mul_mod(n, crate::arith::inv_mod(d, p).expect("unit denominator"), p)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrobData {
    Genus1 { ap: i64 },
    Genus2 { a1: i64, a2: i64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusRecord {
    pub p: u64,
    pub data: FrobData,
}

impl FrobeniusRecord {
    /// Hasse bound for `g = 1`; Weil bounds `|a1| ≤ 4√p`, `|a2| ≤ 6p` for `g = 2`.
    pub fn within_weil_bounds(&self) -> bool {
        let p = self.p as i128;
        match self.data {
            FrobData::Genus1 { ap } => (ap as i128).pow(2) <= 4 * p,
            FrobData::Genus2 { a1, a2 } => (a1 as i128).pow(2) <= 16 * p && (a2 as i128).abs() <= 6 * p,
        }
    }
}

/// `a_p = -Σ_x χ(x³ + A x + B)` from reduced coefficients.
pub fn trace_from_residues(a: u64, b: u64, p: u64, chi: &[i8]) -> i64 {
    let mut s = 0i64;
    for x in 0..p {
        let v = (mul_mod(mul_mod(x, x, p) + a, x, p) + b) % p;
        s += chi[v as usize] as i64;
    }
    -s
}

/// Frobenius trace of a genus-1 specialization by a character sum.
pub fn ap_count(s: &Specialization, p: u64) -> Result<FrobeniusRecord> {
    if s.genus != 1 {
        return Err(Error::Unsupported("ap_count needs a genus 1 curve".into()));
    }
    if !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    if reduction_type(s, p) == Reduction::Bad {
        return Err(Error::BadReduction(p));
    }
    let chi = quadratic_character_table(p);
    let ap = trace_from_residues(residue(&s.coeffs[0], p), residue(&s.coeffs[1], p), p, &chi);
    let rec = FrobeniusRecord {
        p,
        data: FrobData::Genus1 { ap },
    };
    assert!(rec.within_weil_bounds(), "Hasse bound violated: {rec:?}");
    Ok(rec)
}

/// `(#C(F_p), #C(F_{p²}))` for a genus-2 specialization with one point at
/// infinity.
pub fn genus2_counts(s: &Specialization, p: u64) -> Result<(u64, u64)> {
    if s.genus != 2 {
        return Err(Error::Unsupported("genus2_counts needs a genus 2 curve".into()));
    }
    if p == 2 {
        return Err(Error::Unsupported("p = 2".into()));
    }
    if !is_prime(p) {
        return Err(Error::Invalid(format!("{p} is not prime")));
    }
    if reduction_type(s, p) == Reduction::Bad {
        return Err(Error::BadReduction(p));
    }
    let c: Vec<u64> = s.coeffs.iter().map(|c| residue(c, p)).collect();
    Ok(genus2_counts_mod(&c, p))
}

/// Point counts of `y² = Σ c_k x^k` (degree 5) from reduced coefficients.
pub fn genus2_counts_mod(c: &[u64], p: u64) -> (u64, u64) {
    let chi = quadratic_character_table(p);
    let mut s1 = 0i64;
    for x in 0..p {
        s1 += chi[crate::poly::eval_dense_mod(c, x, p) as usize] as i64;
    }
    let field = GaloisField::quadratic(p).expect("p odd and small");
    let ce: Vec<u32> = c.iter().map(|&k| k as u32).collect();
    let mut s2 = 0i64;
    for x in field.elements() {
        s2 += field.chi(field.eval_dense(&ce, x));
    }
    let n1 = (p as i64 + 1 + s1) as u64;
    let n2 = (p as i64 * p as i64 + 1 + s2) as u64;
    (n1, n2)
}

/// `a1 = p + 1 - n1`, `a2 = (a1² - (p² + 1 - n2)) / 2`.
pub fn genus2_record(p: u64, n1: u64, n2: u64) -> Result<FrobeniusRecord> {
    let p_i = p as i64;
    let a1 = p_i + 1 - n1 as i64;
    let t2 = p_i * p_i + 1 - n2 as i64;
    let twice = a1 * a1 - t2;
    if twice % 2 != 0 {
        return Err(Error::Internal(format!("non-integral a2 at p = {p}")));
    }
    let rec = FrobeniusRecord {
        p,
        data: FrobData::Genus2 { a1, a2: twice / 2 },
    };
    assert!(rec.within_weil_bounds(), "Weil bound violated: {rec:?}");
    Ok(rec)
}

pub fn frob_class(record: &FrobeniusRecord, l: u64) -> Result<CharPolyClass> {
    if record.p == l {
        return Err(Error::ResidualCharacteristic(l));
    }
    let m = record.p % l;
    Ok(match record.data {
        FrobData::Genus1 { ap } => CharPolyClass::Genus1 {
            l,
            trace: reduce(ap, l),
            det: m,
        },
        FrobData::Genus2 { a1, a2 } => CharPolyClass::Genus2 {
            l,
            a1: reduce(a1, l),
            a2: reduce(a2, l),
            mult: m,
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Surjective,
    Undecided,
}

fn is_square_mod(a: u64, l: u64) -> bool {
    a % l == 0 || pow_mod(a % l, (l - 1) / 2, l) == 1
}

/// Do the observed units generate `F_l^×`?
fn generates_units(dets: &BTreeSet<u64>, l: u64) -> bool {
    let mut reached = BTreeSet::from([1u64]);
    let mut frontier = vec![1u64];
    while let Some(x) = frontier.pop() {
        for &d in dets {
            let y = mul_mod(x, d, l);
            if reached.insert(y) {
                frontier.push(y);
            }
        }
    }
    reached.len() as u64 == l - 1
}

/// Sufficient test for `image = GL_2(F_l)` from observed char-poly classes.
///
/// For `l ≥ 5`: the determinants generate `F_l^×`, and the set contains a
/// class with `tr ≠ 0` and `tr² - 4det` a nonzero square, a class with
/// `tr ≠ 0` and `tr² - 4det` a nonsquare, and a class with
/// `u = tr²/det ∉ {0, 1, 2, 4}`, `u² - 3u + 1 ≠ 0`. For `l = 3` the set must
/// escape the char-poly set of every proper subgroup. Genus 2 is never
/// certified.
pub fn surjectivity_verdict(classes: &BTreeSet<CharPolyClass>, l: u64, g: u8) -> Verdict {
    if g != 1 || l < 3 || !is_prime(l) {
        return Verdict::Undecided;
    }
    let pairs: Vec<(u64, u64)> = classes
        .iter()
        .filter_map(|c| match *c {
            CharPolyClass::Genus1 { l: cl, trace, det } if cl == l && det % l != 0 => Some((trace % l, det % l)),
            _ => None,
        })
        .collect();
    if l == 3 {
        let observed: BTreeSet<CharPolyClass> = pairs
            .iter()
            .map(|&(trace, det)| CharPolyClass::Genus1 { l, trace, det })
            .collect();
        let trapped = crate::groups::gl2_f3_proper_charpoly_sets()
            .iter()
            .any(|s| observed.is_subset(s));
        return if trapped { Verdict::Undecided } else { Verdict::Surjective };
    }
    let dets: BTreeSet<u64> = pairs.iter().map(|&(_, d)| d).collect();
    let disc = |t: u64, d: u64| (t * t % l + l * 4 - 4 * d % l) % l;
    let split = pairs
        .iter()
        .any(|&(t, d)| t != 0 && disc(t, d) != 0 && is_square_mod(disc(t, d), l));
    let nonsplit = pairs.iter().any(|&(t, d)| t != 0 && !is_square_mod(disc(t, d), l));
    let generic = pairs.iter().any(|&(t, d)| {
        let u = mul_mod(t * t % l, crate::arith::inv_mod(d, l).expect("unit"), l);
        ![0, 1, 2, 4].contains(&u) && (u * u + l * 3 - 3 * u + 1) % l != 0
    });
    if generates_units(&dets, l) && split && nonsplit && generic {
        Verdict::Surjective
    } else {
        Verdict::Undecided
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coverage {
    pub observed: usize,
    /// Number of char-poly classes of the full group, when tabulated.
    pub total: Option<usize>,
}

/// How many char-poly classes of `GSp_{2g}(F_l)` were seen.
pub fn class_coverage(classes: &BTreeSet<CharPolyClass>, l: u64, g: u8) -> Coverage {
    let total = crate::groups::GroupSpec::new(g, l, crate::groups::Flavor::Similitude)
        .and_then(|s| crate::groups::class_table(&s, crate::groups::ClassMode::CharPoly))
        .ok()
        .map(|t| t.len());
    Coverage {
        observed: classes.iter().filter(|c| c.l() == l).count(),
        total,
    }
}

/// Traces `a_p(t)` for every residue `t mod p` of a one-parameter genus-1
/// family; `None` where the fibre is singular.
pub fn residue_traces(family: &CurveFamily, p: u64) -> Result<Vec<Option<i64>>> {
    let FamilyModel::Weierstrass { a, b } = &family.model else {
        return Err(Error::Unsupported("residue tables need a genus 1 family".into()));
    };
    if family.r() != 1 {
        return Err(Error::Unsupported("residue tables need one parameter".into()));
    }
    let disc = family.discriminant_poly().expect("genus 1");
    let chi = quadratic_character_table(p);
    Ok((0..p)
        .map(|t| {
            if disc.eval_mod(&[t], p) == 0 {
                None
            } else {
                Some(trace_from_residues(a.eval_mod(&[t], p), b.eval_mod(&[t], p), p, &chi))
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn point(n: i64, d: i64) -> AffinePoint {
        AffinePoint::new(vec![Rational64::new(n, d)])
    }

    fn curve(a: i64, b: i64) -> Specialization {
        Specialization {
            t: point(0, 1),
            genus: 1,
            coeffs: vec![rat(a, 1), rat(b, 1)],
            disc: rat(-16 * (4 * a * a * a + 27 * b * b), 1),
            j: None,
            excluded_primes: vec![2],
        }
    }

    /// Affine points by looping over all `(x, y)`, plus infinity.
    fn naive_count(a: u64, b: u64, p: u64) -> i64 {
        let mut n = 1;
        for x in 0..p {
            for y in 0..p {
                if (y * y) % p == (x * x % p * x + a * x + b) % p {
                    n += 1;
                }
            }
        }
        p as i64 + 1 - n
    }

    #[test]
    fn specialize_default_family() {
        let fam = CurveFamily::default_genus1();
        let s = specialize(&fam, &point(2, 1)).unwrap();
        assert_eq!(s.coeffs, vec![rat(-6, 1), rat(4, 1)]);
        assert_eq!(s.disc, rat(6912, 1));
        assert_eq!(s.j, Some(rat(3456, 1)));
        assert_eq!(specialize(&fam, &point(0, 1)), Err(Error::OutsideEtaleLocus));
        assert_eq!(specialize(&fam, &point(1, 2)).unwrap().disc, rat(-54, 1));
    }

    #[test]
    fn discriminant_identity_on_default_family() {
        let fam = CurveFamily::default_genus1();
        for (n, d) in [(2, 1), (1, 2), (-3, 7), (5, 11), (-13, 4), (17, 3)] {
            let t = rat(n, d);
            let s = specialize(&fam, &point(n, d)).unwrap();
            let one = BigRational::one();
            let expect = rat(-1728, 1) * (&one - &t).pow(3) * t.pow(2);
            assert_eq!(s.disc, expect);
            assert_eq!(s.j.unwrap(), rat(1728, 1) * t);
        }
    }

    #[test]
    fn reduction_examples() {
        let s = specialize(&CurveFamily::default_genus1(), &point(2, 1)).unwrap();
        assert_eq!(reduction_type(&s, 5), Reduction::Good);
        assert_eq!(reduction_type(&s, 2), Reduction::Bad);
        assert_eq!(reduction_type(&s, 3), Reduction::Bad);
        assert_eq!(ap_count(&s, 3), Err(Error::BadReduction(3)));
    }

    #[test]
    fn ap_examples() {
        let s = curve(1, 0);
        assert_eq!(ap_count(&s, 3).unwrap().data, FrobData::Genus1 { ap: 0 });
        let s = curve(0, 1);
        assert_eq!(ap_count(&s, 5).unwrap().data, FrobData::Genus1 { ap: 0 });
    }

    #[test]
    fn ap_matches_point_loop() {
        for (a, b) in [(1, 1), (-6, 4), (2, -3), (0, 7)] {
            let s = curve(a, b);
            for p in crate::arith::primes_upto(60) {
                if let Ok(rec) = ap_count(&s, p) {
                    let FrobData::Genus1 { ap } = rec.data else { unreachable!() };
                    assert_eq!(ap, naive_count(reduce(a, p), reduce(b, p), p), "p = {p}");
                }
            }
        }
    }

    #[test]
    fn genus2_hand_example() {
        // y² = x⁵ + 1 over F_3
        let c = [1, 0, 0, 0, 0, 1];
        assert_eq!(genus2_counts_mod(&c, 3).0, 4);
    }

    #[test]
    fn genus2_default_family_bounds() {
        let fam = CurveFamily::default_genus2();
        let t = AffinePoint::from_integers(&[2, 3, 5]);
        let s = specialize(&fam, &t).unwrap();
        for p in [7u64, 11, 13, 17, 19, 23] {
            let (n1, n2) = genus2_counts(&s, p).unwrap();
            let rec = genus2_record(p, n1, n2).unwrap();
            assert!(rec.within_weil_bounds());
        }
        assert!(matches!(genus2_counts(&s, 2), Err(Error::Unsupported(_))));
        assert_eq!(genus2_counts(&s, 3), Err(Error::BadReduction(3)));
    }

    #[test]
    fn quintic_discriminant_matches_roots() {
        // disc of Π (x - r_i) is Π_{i<j} (r_i - r_j)²
        let roots = [0i64, 1, 2, 3, 5];
        let fam = CurveFamily::default_genus2();
        let s = specialize(&fam, &AffinePoint::from_integers(&roots[2..])).unwrap();
        let mut expect = 1i64;
        for i in 0..5 {
            for j in i + 1..5 {
                expect *= (roots[i] - roots[j]).pow(2);
            }
        }
        assert_eq!(s.disc, rat(expect, 1));
    }

    #[test]
    fn class_examples() {
        let r = |p, ap| FrobeniusRecord { p, data: FrobData::Genus1 { ap } };
        assert_eq!(frob_class(&r(3, 0), 5).unwrap(), CharPolyClass::Genus1 { l: 5, trace: 0, det: 3 });
        assert_eq!(frob_class(&r(7, -4), 3).unwrap(), CharPolyClass::Genus1 { l: 3, trace: 2, det: 1 });
        let g2 = FrobeniusRecord { p: 5, data: FrobData::Genus2 { a1: 1, a2: 2 } };
        assert_eq!(frob_class(&g2, 3).unwrap().to_string(), "(1,2,2)");
        assert_eq!(frob_class(&r(5, 1), 5), Err(Error::ResidualCharacteristic(5)));
    }

    #[test]
    fn verdict_examples() {
        let l = 7;
        let all: BTreeSet<_> = (0..l)
            .flat_map(|trace| (1..l).map(move |det| CharPolyClass::Genus1 { l, trace, det }))
            .collect();
        assert_eq!(surjectivity_verdict(&all, l, 1), Verdict::Surjective);
        let det_one: BTreeSet<_> = all.iter().filter(|c| c.multiplier() == 1).copied().collect();
        assert_eq!(surjectivity_verdict(&det_one, l, 1), Verdict::Undecided);
        let single = BTreeSet::from([CharPolyClass::Genus1 { l, trace: 0, det: 3 }]);
        assert_eq!(surjectivity_verdict(&single, l, 1), Verdict::Undecided);
        assert_eq!(surjectivity_verdict(&all, l, 2), Verdict::Undecided);
    }

    #[test]
    fn verdict_at_three_uses_subgroups() {
        // every char poly of GL_2(F_3) already occurs in a 2-Sylow subgroup
        let all: BTreeSet<_> = (0..3)
            .flat_map(|trace| (1..3).map(move |det| CharPolyClass::Genus1 { l: 3, trace, det }))
            .collect();
        assert_eq!(surjectivity_verdict(&all, 3, 1), Verdict::Undecided);
    }

    #[test]
    fn residue_table_matches_specializations() {
        let fam = CurveFamily::default_genus1();
        let table = residue_traces(&fam, 31).unwrap();
        for n in 2..20 {
            let s = specialize(&fam, &point(n, 1)).unwrap();
            match (ap_count(&s, 31), table[(n % 31) as usize]) {
                (Ok(rec), Some(ap)) => assert_eq!(rec.data, FrobData::Genus1 { ap }),
                (Err(Error::BadReduction(31)), None) => {}
                other => panic!("mismatch at t = {n}: {other:?}"),
            }
        }
    }

    #[test]
    fn family_file_round_trip() {
        for fam in [CurveFamily::default_genus1(), CurveFamily::default_genus2()] {
            let json = serde_json::to_string(&fam.to_file()).unwrap();
            let back = CurveFamily::from_file(&serde_json::from_str(&json).unwrap()).unwrap();
            assert_eq!(back, fam);
            assert_eq!(back.family_id(), fam.family_id());
        }
    }

    #[test]
    fn inconsistent_bad_locus_rejected() {
        let mut file = CurveFamily::default_genus1().to_file();
        // drop the factor (1 - t): fibres at t = 1 are singular
        file.bad_locus = PolyWire::Dense(vec![0, 1]);
        assert!(matches!(CurveFamily::from_file(&file), Err(Error::Invalid(_))));
    }
}
