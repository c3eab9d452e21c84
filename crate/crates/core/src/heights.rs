//! Heights on `P^r(Q)` and exhaustive enumeration of points of bounded height.
//!
//! Over `Q` a projective point has a unique primitive integer representative
//! whose first nonzero coordinate is positive; its absolute height is the
//! largest coordinate in absolute value. Enumeration walks the box
//! `[-x, x]^{r+1}` in lexicographic order and keeps canonical tuples, so the
//! output is sorted and duplicate-free by construction.

use std::f64::consts::PI;
use std::fmt;

use num_integer::Integer;
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::gcd;
use crate::poly::MPoly;
use crate::{Error, Result};

/// Primitive, sign-normalized integer tuple representing a point of `P^r(Q)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<i64>", into = "Vec<i64>")]
pub struct ProjectivePoint {
    coords: Vec<i64>,
}

impl ProjectivePoint {
    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// Dimension `r` of the ambient projective space.
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn height(&self) -> u64 {
        height(self)
    }

    /// CSV row: coordinates then height.
    pub fn csv_row(&self) -> String {
        let mut cols: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        cols.push(self.height().to_string());
        cols.join(",")
    }
}

impl TryFrom<Vec<i64>> for ProjectivePoint {
    type Error = Error;

    fn try_from(v: Vec<i64>) -> Result<Self> {
        canonicalize(&v)
    }
}

impl From<ProjectivePoint> for Vec<i64> {
    fn from(p: ProjectivePoint) -> Vec<i64> {
        p.coords
    }
}

impl fmt::Debug for ProjectivePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ":")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Point of affine `r`-space with rational coordinates in lowest terms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffinePoint {
    coords: Vec<Rational64>,
}

impl AffinePoint {
    pub fn new(coords: Vec<Rational64>) -> Self {
        // Ratio::new already reduces and makes the denominator positive
        AffinePoint { coords }
    }

    pub fn from_integers(coords: &[i64]) -> Self {
        AffinePoint::new(coords.iter().map(|&c| Rational64::from_integer(c)).collect())
    }

    pub fn coords(&self) -> &[Rational64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn to_big(&self) -> Vec<BigRational> {
        self.coords
            .iter()
            .map(|c| BigRational::new((*c.numer()).into(), (*c.denom()).into()))
            .collect()
    }

    /// Least common multiple of the coordinate denominators.
    pub fn common_denominator(&self) -> i64 {
        self.coords.iter().fold(1i64, |acc, c| acc.lcm(c.denom()))
    }

    /// Residues modulo `p`, or `None` if `p` divides a denominator.
    pub fn residues_mod(&self, p: u64) -> Option<Vec<u64>> {
        self.coords
            .iter()
            .map(|c| {
                let d = crate::arith::reduce(*c.denom(), p);
                let inv = crate::arith::inv_mod(d, p)?;
                Some(crate::arith::mul_mod(crate::arith::reduce(*c.numer(), p), inv, p))
            })
            .collect()
    }

    pub fn csv_row(&self, chart: Chart) -> Result<String> {
        let mut cols: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        cols.push(height_affine(self, chart)?.to_string());
        Ok(cols.join(","))
    }
}

impl fmt::Debug for AffinePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl fmt::Display for AffinePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl Serialize for AffinePoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let pairs: Vec<[i64; 2]> = self.coords.iter().map(|c| [*c.numer(), *c.denom()]).collect();
        pairs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AffinePoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[i64; 2]>::deserialize(d)?;
        let mut coords = Vec::with_capacity(pairs.len());
        for [n, den] in pairs {
            if den == 0 {
                return Err(serde::de::Error::custom("zero denominator"));
            }
            coords.push(Rational64::new(n, den));
        }
        Ok(AffinePoint::new(coords))
    }
}

/// Upper bound `x >= 1` on the height.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct HeightBound(Rational64);

impl HeightBound {
    pub fn new(x: Rational64) -> Result<Self> {
        if x < Rational64::from_integer(1) {
            return Err(Error::Invalid(format!("height bound {x} < 1")));
        }
        Ok(HeightBound(x))
    }

    pub fn integer(x: u64) -> Result<Self> {
        Self::new(Rational64::from_integer(x as i64))
    }

    pub fn value(&self) -> Rational64 {
        self.0
    }

    /// Heights are integers, so only the floor matters.
    pub fn floor(&self) -> i64 {
        self.0.floor().to_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

/// Affine chart `A^r -> P^r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Chart {
    /// `(t_1, ..., t_r) ↦ (d : n_1 : ... : n_r)`, the common denominator
    /// placed first.
    #[default]
    Default,
    /// Common denominator inserted at coordinate `k` instead.
    Standard(usize),
}

impl Chart {
    fn slot(self) -> usize {
        match self {
            Chart::Default => 0,
            Chart::Standard(k) => k,
        }
    }
}

/// Primitive, sign-normalized representative of `raw`.
pub fn canonicalize(raw: &[i64]) -> Result<ProjectivePoint> {
    let g = raw.iter().fold(0u64, |acc, &c| gcd(acc, c.unsigned_abs()));
    if g == 0 {
        return Err(Error::NotProjective);
    }
    let g = g as i64;
    let lead = raw.iter().find(|&&c| c != 0).copied().unwrap_or(1);
    let sign = if lead < 0 { -1 } else { 1 };
    Ok(ProjectivePoint {
        coords: raw.iter().map(|&c| sign * (c / g)).collect(),
    })
}

/// Absolute height of a canonical point: `max |u_i|`.
pub fn height(p: &ProjectivePoint) -> u64 {
    p.coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}

/// Image of an affine point under a chart, canonicalized.
pub fn chart_image(t: &AffinePoint, chart: Chart) -> Result<ProjectivePoint> {
    let r = t.dim();
    let k = chart.slot();
    if r == 0 || k > r {
        return Err(Error::ChartUndefined);
    }
    let d = t.common_denominator();
    let mut raw: Vec<i64> = t
        .coords
        .iter()
        .map(|c| c.numer() * (d / c.denom()))
        .collect();
    raw.insert(k, d);
    canonicalize(&raw)
}

pub fn height_affine(t: &AffinePoint, chart: Chart) -> Result<u64> {
    Ok(height(&chart_image(t, chart)?))
}

/// Inverse of [`chart_image`] on points with nonzero chart coordinate.
pub fn affine_from_projective(p: &ProjectivePoint, chart: Chart) -> Option<AffinePoint> {
    let k = chart.slot();
    let d = *p.coords.get(k)?;
    if d == 0 {
        return None;
    }
    Some(AffinePoint::new(
        p.coords
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != k)
            .map(|(_, &n)| Rational64::new(n, d))
            .collect(),
    ))
}

/// Odometer over `[-x, x]^{n}` in lexicographic order, with the first
/// coordinate restricted to `[0, x]`.
struct BoxWalk {
    cur: Vec<i64>,
    x: i64,
    done: bool,
}

impl BoxWalk {
    fn new(n: usize, x: i64) -> Self {
        let mut cur = vec![-x; n];
        cur[0] = 0;
        BoxWalk { cur, x, done: false }
    }
}

impl Iterator for BoxWalk {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let mut i = self.cur.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.cur[i] < self.x {
                self.cur[i] += 1;
                break;
            }
            self.cur[i] = if i == 0 { 0 } else { -self.x };
        }
        Some(out)
    }
}

fn is_canonical(v: &[i64]) -> bool {
    match v.iter().find(|&&c| c != 0) {
        None => false,
        Some(&lead) => lead > 0 && v.iter().fold(0u64, |a, &c| gcd(a, c.unsigned_abs())) == 1,
    }
}

/// All canonical points of `P^r(Q)` with height `<= x`, lexicographically.
pub fn enumerate_projective(r: usize, x: HeightBound) -> Vec<ProjectivePoint> {
    assert!(r >= 1, "projective dimension must be positive");
    BoxWalk::new(r + 1, x.floor())
        .filter(|v| is_canonical(v))
        .map(|coords| ProjectivePoint { coords })
        .collect()
}

/// `|B(x)|` without materializing the points.
pub fn count_projective(r: usize, x: HeightBound) -> u64 {
    assert!(r >= 1, "projective dimension must be positive");
    BoxWalk::new(r + 1, x.floor())
        .filter(|v| is_canonical(v))
        .count() as u64
}

/// Affine points of height `<= x` off the zero set of `bad_locus`.
pub fn enumerate_affine(
    r: usize,
    x: HeightBound,
    chart: Chart,
    bad_locus: &MPoly,
) -> Result<Vec<AffinePoint>> {
    if bad_locus.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    if bad_locus.nvars() != r || chart.slot() > r {
        return Err(Error::ChartUndefined);
    }
    Ok(enumerate_projective(r, x)
        .iter()
        .filter_map(|p| affine_from_projective(p, chart))
        .filter(|t| !bad_locus.eval_rational(&t.to_big()).is_zero())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchanuelReport {
    pub r: usize,
    pub x: f64,
    pub count: u64,
    /// `(12/π²) x²` for `r = 1`.
    pub main_term: Option<f64>,
    /// `|count - main| / (x log x)` for `r = 1`.
    pub deviation: Option<f64>,
    /// `count / x^{r+1}`.
    pub ratio: f64,
}

pub fn schanuel_check(r: usize, x: HeightBound) -> Result<SchanuelReport> {
    if !(1..=3).contains(&r) {
        return Err(Error::Unsupported(format!("schanuel_check for r = {r}")));
    }
    let count = count_projective(r, x);
    let xf = x.floor() as f64;
    let (main_term, deviation) = if r == 1 {
        let main = 12.0 / (PI * PI) * xf * xf;
        let scale = xf * xf.ln();
        let dev = if scale > 0.0 {
            (count as f64 - main).abs() / scale
        } else {
            f64::INFINITY
        };
        (Some(main), Some(dev))
    } else {
        (None, None)
    };
    Ok(SchanuelReport {
        r,
        x: x.to_f64(),
        count,
        main_term,
        deviation,
        ratio: count as f64 / xf.powi(r as i32 + 1),
    })
}

/// Is `t` off the zero locus of `g`?
pub fn off_locus(g: &MPoly, t: &AffinePoint) -> bool {
    !g.eval_rational(&t.to_big()).is_zero()
}

/// Exact `|max coordinate|` of an integer vector (helper for oracles).
pub fn sup_norm(v: &[i64]) -> u64 {
    v.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
}
