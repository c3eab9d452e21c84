//! Sparse multivariate polynomials with integer coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::arith::{mul_mod, pow_mod, reduce};

/// Polynomial in `nvars` variables. Terms are keyed by exponent vectors;
/// zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, i64>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: i64) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(vec![0; nvars], c);
        p
    }

    /// The `i`-th variable.
    pub fn var(nvars: usize, i: usize) -> Self {
        assert!(i < nvars);
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(e, 1);
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, i64)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    /// Univariate polynomial from dense coefficients `c0 + c1 t + ...`.
    pub fn univariate(coeffs: &[i64]) -> Self {
        Self::from_terms(
            1,
            coeffs
                .iter()
                .enumerate()
                .map(|(k, &c)| (vec![k as u32], c)),
        )
    }

    fn add_term(&mut self, e: Vec<u32>, c: i64) {
        if c == 0 {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert(0);
        *entry = entry.checked_add(c).expect("coefficient overflow");
        if *entry == 0 {
            self.terms.remove(&e);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &i64)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, &c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &MPoly) -> MPoly {
        self.add(&other.neg())
    }

    pub fn scale(&self, k: i64) -> MPoly {
        let mut out = Self::zero(self.nvars);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c.checked_mul(k).expect("coefficient overflow"));
        }
        out
    }

    pub fn mul(&self, other: &MPoly) -> MPoly {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (e1, &c1) in &self.terms {
            for (e2, &c2) in &other.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1.checked_mul(c2).expect("coefficient overflow"));
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut acc = Self::constant(self.nvars, 1);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn eval_rational(&self, t: &[BigRational]) -> BigRational {
        assert_eq!(t.len(), self.nvars, "evaluation point dimension");
        let mut acc = BigRational::zero();
        for (e, &c) in &self.terms {
            let mut term = BigRational::from_integer(BigInt::from(c));
            for (x, &k) in t.iter().zip(e) {
                for _ in 0..k {
                    term *= x;
                }
            }
            acc += term;
        }
        acc
    }

    /// Evaluate at residues modulo `m`.
    pub fn eval_mod(&self, t: &[u64], m: u64) -> u64 {
        assert_eq!(t.len(), self.nvars, "evaluation point dimension");
        let mut acc = 0u64;
        for (e, &c) in &self.terms {
            let mut term = reduce(c, m);
            for (&x, &k) in t.iter().zip(e) {
                term = mul_mod(term, pow_mod(x, k as u64, m), m);
            }
            acc = (acc + term) % m;
        }
        acc
    }

    /// Homogenize to `nvars + 1` variables at total degree `deg`, the new
    /// variable placed first: `t_i = u_{i+1} / u_0`.
    pub fn homogenize(&self, deg: u32) -> MPoly {
        assert!(deg >= self.total_degree());
        let mut out = Self::zero(self.nvars + 1);
        for (e, &c) in &self.terms {
            let d: u32 = e.iter().sum();
            let mut he = Vec::with_capacity(self.nvars + 1);
            he.push(deg - d);
            he.extend_from_slice(e);
            out.add_term(he, c);
        }
        out
    }

    /// Evaluate a polynomial whose coefficients are integers at integer
    /// points, exactly.
    pub fn eval_integer(&self, u: &[i64]) -> BigInt {
        assert_eq!(u.len(), self.nvars);
        let mut acc = BigInt::zero();
        for (e, &c) in &self.terms {
            let mut term = BigInt::from(c);
            for (&x, &k) in u.iter().zip(e) {
                term *= BigInt::from(x).pow(k);
            }
            acc += term;
        }
        acc
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&vec![0; self.nvars])
                .is_some_and(|&c| c == 1)
    }

    pub fn to_wire(&self) -> PolyWire {
        PolyWire::Terms(
            self.terms
                .iter()
                .map(|(e, &c)| {
                    let mut row = vec![c];
                    row.extend(e.iter().map(|&k| k as i64));
                    row
                })
                .collect(),
        )
    }
}

impl fmt::Debug for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, &c) in self.terms.iter().rev() {
            if !first {
                write!(f, " {} ", if c < 0 { '-' } else { '+' })?;
            } else if c < 0 {
                write!(f, "-")?;
            }
            first = false;
            let a = c.unsigned_abs();
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("t{}", i + 1)
                    } else {
                        format!("t{}^{}", i + 1, k)
                    }
                })
                .collect();
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a == 1 {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{a}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// JSON form of a polynomial: a dense coefficient array (univariate), or a
/// list of `[coeff, e1, ..., er]` term rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolyWire {
    Dense(Vec<i64>),
    Terms(Vec<Vec<i64>>),
}

impl PolyWire {
    pub fn to_poly(&self, nvars: usize) -> crate::Result<MPoly> {
        match self {
            PolyWire::Dense(c) if c.is_empty() => Ok(MPoly::zero(nvars)),
            PolyWire::Dense(c) => {
                if nvars != 1 {
                    return Err(crate::Error::Invalid(
                        "dense coefficient arrays are univariate".into(),
                    ));
                }
                Ok(MPoly::univariate(c))
            }
            PolyWire::Terms(rows) => {
                let mut terms = Vec::with_capacity(rows.len());
                for row in rows {
                    if row.len() != nvars + 1 || row[1..].iter().any(|&e| e < 0) {
                        return Err(crate::Error::Invalid(format!(
                            "term row {row:?} does not match {nvars} variables"
                        )));
                    }
                    terms.push((row[1..].iter().map(|&e| e as u32).collect(), row[0]));
                }
                Ok(MPoly::from_terms(nvars, terms))
            }
        }
    }
}

/// Dense univariate polynomial with polynomial coefficients: `Σ c_k(t) x^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyInX {
    pub coeffs: Vec<MPoly>,
}

impl PolyInX {
    /// `Π (x - r_i)` for roots given as polynomials in the parameters.
    pub fn from_roots(nvars: usize, roots: &[MPoly]) -> Self {
        let mut coeffs = vec![MPoly::constant(nvars, 1)];
        for r in roots {
            let mut next = vec![MPoly::zero(nvars); coeffs.len() + 1];
            for (k, c) in coeffs.iter().enumerate() {
                next[k + 1] = next[k + 1].add(c);
                next[k] = next[k].sub(&c.mul(r));
            }
            coeffs = next;
        }
        PolyInX { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }
}

/// Polynomial `Σ c_k x^k` over a prime field, coefficients reduced.
pub fn eval_dense_mod(coeffs: &[u64], x: u64, p: u64) -> u64 {
    coeffs
        .iter()
        .rev()
        .fold(0u64, |acc, &c| (mul_mod(acc, x, p) + c) % p)
}
