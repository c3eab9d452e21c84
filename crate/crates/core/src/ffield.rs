//! Finite fields `F_{p^n}` for small `p^n`, with log/antilog tables.
//!
//! An element is encoded as the integer `Σ c_i p^i` of its coefficient
//! vector in `F_p[z]/(m(z))`. Constants of `F_p` keep their own value, so the
//! prime field sits inside as `0..p`.

use crate::arith::{is_prime, mul_mod};
use crate::poly::MPoly;
use crate::{Error, Result};

pub type Elem = u32;

/// Largest field order built here.
pub const MAX_FIELD_ORDER: u64 = 1 << 22;

#[derive(Clone, Debug)]
pub struct GaloisField {
    p: u64,
    n: usize,
    order: u64,
    /// Monic modulus, coefficients low to high, length `n + 1`.
    modulus: Vec<u64>,
    exp: Vec<Elem>,
    log: Vec<u32>,
    square: Vec<bool>,
}

fn poly_mulmod(a: &[u64], b: &[u64], modulus: &[u64], p: u64) -> Vec<u64> {
    let n = modulus.len() - 1;
    let mut prod = vec![0u64; 2 * n];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + mul_mod(x, y, p)) % p;
        }
    }
    for k in (n..prod.len()).rev() {
        let c = prod[k];
        if c == 0 {
            continue;
        }
        prod[k] = 0;
        for i in 0..n {
            prod[k - n + i] = (prod[k - n + i] + p - mul_mod(c, modulus[i], p)) % p;
        }
    }
    prod.truncate(n);
    prod
}

fn encode(v: &[u64], p: u64) -> Elem {
    v.iter().rev().fold(0u64, |acc, &c| acc * p + c) as Elem
}

fn decode(mut a: u64, p: u64, n: usize) -> Vec<u64> {
    let mut v = vec![0u64; n];
    for c in v.iter_mut() {
        *c = a % p;
        a /= p;
    }
    v
}

/// Does the monic `m` have a monic factor of degree `1..=deg/2`?
fn has_small_factor(m: &[u64], p: u64) -> bool {
    let n = m.len() - 1;
    for d in 1..=n / 2 {
        let count = p.pow(d as u32);
        for code in 0..count {
            let mut f = decode(code, p, d);
            f.push(1);
            if poly_rem(m, &f, p).iter().all(|&c| c == 0) {
                return true;
            }
        }
    }
    false
}

/// Remainder of `a` by monic `b`.
fn poly_rem(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap();
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &c) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p - mul_mod(lead, c, p)) % p;
            }
        }
        r.pop();
    }
    r
}

impl GaloisField {
    /// `F_{p^n}` via the first primitive monic polynomial of degree `n` in
    /// lexicographic order of its lower coefficients.
    pub fn new(p: u64, n: usize) -> Result<Self> {
        Self::check_size(p, n)?;
        if n == 1 {
            return Self::with_modulus(p, vec![0, 1]);
        }
        let count = p.pow(n as u32);
        for code in 0..count {
            let mut m = decode(code, p, n);
            if m[0] == 0 {
                continue;
            }
            m.push(1);
            if has_small_factor(&m, p) {
                continue;
            }
            // z generates iff its multiplicative order is p^n - 1
            let field = Self::with_generator(p, n, m, &[0, 1])?;
            if let Some(f) = field {
                return Ok(f);
            }
        }
        Err(Error::Internal(format!("no primitive polynomial of degree {n} over F_{p}")))
    }

    /// `F_{p^n} = F_p[z]/(m)` for a given monic irreducible `m`.
    pub fn with_modulus(p: u64, modulus: Vec<u64>) -> Result<Self> {
        if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
            return Err(Error::Invalid("modulus must be monic of positive degree".into()));
        }
        let n = modulus.len() - 1;
        Self::check_size(p, n)?;
        if has_small_factor(&modulus, p) {
            return Err(Error::Invalid("modulus is reducible".into()));
        }
        let order = p.pow(n as u32);
        for g in 1..order {
            let gv = decode(g, p, n);
            if let Some(f) = Self::with_generator(p, n, modulus.clone(), &gv)? {
                return Ok(f);
            }
        }
        Err(Error::Internal("irreducible modulus without a generator".into()))
    }

    /// `F_{p^2} = F_p[z]/(z^2 - ν)` with `ν` the least nonresidue.
    pub fn quadratic(p: u64) -> Result<Self> {
        if p == 2 {
            return Self::new(2, 2);
        }
        let nu = crate::arith::least_nonresidue(p);
        Self::with_modulus(p, vec![p - nu, 0, 1])
    }

    fn check_size(p: u64, n: usize) -> Result<()> {
        if !is_prime(p) || n == 0 {
            return Err(Error::Invalid(format!("F_{p}^{n} is not a finite field")));
        }
        match p.checked_pow(n as u32) {
            Some(q) if q <= MAX_FIELD_ORDER => Ok(()),
            _ => Err(Error::Infeasible(format!("field of order {p}^{n} too large"))),
        }
    }

    /// Tables from a candidate generator, or `None` if it is not primitive.
    fn with_generator(p: u64, n: usize, modulus: Vec<u64>, g: &[u64]) -> Result<Option<Self>> {
        let order = p.pow(n as u32);
        let units = (order - 1) as usize;
        let mut exp = Vec::with_capacity(units);
        let mut log = vec![u32::MAX; order as usize];
        let mut cur = vec![0u64; n];
        cur[0] = 1;
        let g: Vec<u64> = g.iter().copied().chain(std::iter::repeat(0)).take(n).collect();
        for k in 0..units {
            let code = encode(&cur, p);
            if log[code as usize] != u32::MAX {
                return Ok(None);
            }
            log[code as usize] = k as u32;
            exp.push(code);
            cur = poly_mulmod(&cur, &g, &modulus, p);
        }
        if encode(&cur, p) != 1 {
            return Ok(None);
        }
        let mut square = vec![false; order as usize];
        square[0] = true;
        for k in (0..units).step_by(2) {
            square[exp[k] as usize] = true;
        }
        if p == 2 {
            square.iter_mut().for_each(|s| *s = true);
        }
        Ok(Some(GaloisField {
            p,
            n,
            order,
            modulus,
            exp,
            log,
            square,
        }))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        0..self.order as Elem
    }

    /// Image of an integer in the prime field.
    pub fn from_int(&self, a: i64) -> Elem {
        crate::arith::reduce(a, self.p) as Elem
    }

    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        if self.n == 1 {
            return ((a as u64 + b as u64) % self.p) as Elem;
        }
        let (mut a, mut b) = (a as u64, b as u64);
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.n {
            out += ((a % self.p + b % self.p) % self.p) * place;
            a /= self.p;
            b /= self.p;
            place *= self.p;
        }
        out as Elem
    }

    pub fn neg(&self, a: Elem) -> Elem {
        let mut a = a as u64;
        let mut out = 0u64;
        let mut place = 1u64;
        for _ in 0..self.n {
            out += ((self.p - a % self.p) % self.p) * place;
            a /= self.p;
            place *= self.p;
        }
        out as Elem
    }

    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        if a == 0 || b == 0 {
            return 0;
        }
        let units = self.order - 1;
        let k = (self.log[a as usize] as u64 + self.log[b as usize] as u64) % units;
        self.exp[k as usize]
    }

    pub fn pow(&self, a: Elem, e: u64) -> Elem {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let units = self.order - 1;
        let k = (self.log[a as usize] as u128 * e as u128 % units as u128) as usize;
        self.exp[k]
    }

    pub fn inv(&self, a: Elem) -> Option<Elem> {
        if a == 0 {
            return None;
        }
        let units = self.order - 1;
        let k = (units - self.log[a as usize] as u64) % units;
        Some(self.exp[k as usize])
    }

    pub fn is_square(&self, a: Elem) -> bool {
        self.square[a as usize]
    }

    /// Quadratic character, `χ(0) = 0`.
    pub fn chi(&self, a: Elem) -> i64 {
        if a == 0 {
            0
        } else if self.square[a as usize] {
            1
        } else {
            -1
        }
    }

    pub fn eval_mpoly(&self, f: &MPoly, t: &[Elem]) -> Elem {
        let mut acc = 0;
        for (e, &c) in f.terms() {
            let mut term = self.from_int(c);
            for (&x, &k) in t.iter().zip(e) {
                term = self.mul(term, self.pow(x, k as u64));
            }
            acc = self.add(acc, term);
        }
        acc
    }

    /// Horner evaluation of `Σ c_k x^k`.
    pub fn eval_dense(&self, coeffs: &[Elem], x: Elem) -> Elem {
        coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_axioms(f: &GaloisField) {
        let q = f.order() as Elem;
        for a in 0..q {
            assert_eq!(f.add(a, f.neg(a)), 0);
            if a != 0 {
                assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
            }
        }
        // distributivity on a sample
        for a in (0..q).step_by(3) {
            for b in (0..q).step_by(5) {
                let c = (a + b) % q;
                assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            }
        }
        let squares = (1..q).filter(|&a| f.is_square(a)).count() as u64;
        if f.p() != 2 {
            assert_eq!(squares, (f.order() - 1) / 2);
        }
    }

    #[test]
    fn prime_and_extension_fields() {
        for (p, n) in [(5u64, 1usize), (5, 2), (5, 3), (5, 4), (3, 2), (7, 2), (2, 3)] {
            let f = GaloisField::new(p, n).unwrap();
            assert_eq!(f.order(), p.pow(n as u32));
            check_axioms(&f);
        }
    }

    #[test]
    fn quadratic_model() {
        let f = GaloisField::quadratic(7).unwrap();
        assert_eq!(f.modulus(), &[4, 0, 1]); // z² - 3
        check_axioms(&f);
        // z² = 3
        assert_eq!(f.mul(7, 7), 3);
    }

    #[test]
    fn reducible_modulus_rejected() {
        // z² - 1 over F_5
        assert!(GaloisField::with_modulus(5, vec![4, 0, 1]).is_err());
    }

    #[test]
    fn frobenius_fixes_prime_field() {
        let f = GaloisField::new(5, 3).unwrap();
        for a in 0..5 {
            assert_eq!(f.pow(a, 5), a);
        }
        let fixed = f.elements().filter(|&a| f.pow(a, 5) == a).count();
        assert_eq!(fixed, 5);
    }
}
