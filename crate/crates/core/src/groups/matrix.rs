//! Dense square matrices over `F_l` for small odd `l`.

use std::fmt;

/// `N × N` matrix with entries in `0..l`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mat<const N: usize> {
    l: u8,
    e: [[u8; N]; N],
}

pub type Mat2 = Mat<2>;
pub type Mat4 = Mat<4>;

impl<const N: usize> Mat<N> {
    pub fn new(l: u64, rows: [[i64; N]; N]) -> Self {
        let mut e = [[0u8; N]; N];
        for i in 0..N {
            for j in 0..N {
                e[i][j] = rows[i][j].rem_euclid(l as i64) as u8;
            }
        }
        Mat { l: l as u8, e }
    }

    pub fn identity(l: u64) -> Self {
        Self::scalar(l, 1)
    }

    pub fn scalar(l: u64, c: i64) -> Self {
        let mut rows = [[0i64; N]; N];
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] = c;
        }
        Self::new(l, rows)
    }

    /// Matrix from a flat base-`l` code, row-major, first entry least significant.
    pub fn from_code(l: u64, mut code: u64) -> Self {
        let mut e = [[0u8; N]; N];
        for row in e.iter_mut() {
            for x in row.iter_mut() {
                *x = (code % l) as u8;
                code /= l;
            }
        }
        Mat { l: l as u8, e }
    }

    pub fn l(&self) -> u64 {
        self.l as u64
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.e[i][j] as u64
    }

    pub fn mul(&self, o: &Self) -> Self {
        let l = self.l as u32;
        let mut e = [[0u8; N]; N];
        for i in 0..N {
            for j in 0..N {
                let mut s = 0u32;
                for k in 0..N {
                    s += self.e[i][k] as u32 * o.e[k][j] as u32;
                }
                e[i][j] = (s % l) as u8;
            }
        }
        Mat { l: self.l, e }
    }

    pub fn neg(&self) -> Self {
        let mut e = self.e;
        for row in e.iter_mut() {
            for x in row.iter_mut() {
                *x = (self.l - *x) % self.l;
            }
        }
        Mat { l: self.l, e }
    }

    pub fn transpose(&self) -> Self {
        let mut e = [[0u8; N]; N];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                *x = self.e[j][i];
            }
        }
        Mat { l: self.l, e }
    }

    pub fn trace(&self) -> u64 {
        (0..N).map(|i| self.e[i][i] as u64).sum::<u64>() % self.l as u64
    }

    pub fn det(&self) -> u64 {
        principal_minor(&self.e, &(0..N).collect::<Vec<_>>(), self.l as i64)
    }

    /// Coefficients `e_k` of `det(x - M) = Σ (-1)^k e_k x^{N-k}`, `k = 0..=N`.
    pub fn charpoly(&self) -> [u64; 5] {
        let mut out = [0u64; 5];
        out[0] = 1;
        for k in 1..=N.min(4) {
            let mut s = 0u64;
            for subset in subsets(N, k) {
                s += principal_minor(&self.e, &subset, self.l as i64);
            }
            out[k] = s % self.l as u64;
        }
        out
    }

    pub fn inverse(&self) -> Option<Self> {
        let l = self.l as i64;
        let mut a = [[0i64; N]; N];
        let mut inv = [[0i64; N]; N];
        for i in 0..N {
            for j in 0..N {
                a[i][j] = self.e[i][j] as i64;
            }
            inv[i][i] = 1;
        }
        for col in 0..N {
            let pivot = (col..N).find(|&r| a[r][col] != 0)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            let pinv = inv_small(a[col][col], l);
            for j in 0..N {
                a[col][j] = a[col][j] * pinv % l;
                inv[col][j] = inv[col][j] * pinv % l;
            }
            for r in 0..N {
                if r != col && a[r][col] != 0 {
                    let f = a[r][col];
                    for j in 0..N {
                        a[r][j] = (a[r][j] - f * a[col][j]).rem_euclid(l);
                        inv[r][j] = (inv[r][j] - f * inv[col][j]).rem_euclid(l);
                    }
                }
            }
        }
        Some(Self::new(l as u64, inv))
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.l as u64)
    }

    /// Multiplicative order; the matrix must be invertible.
    pub fn order(&self) -> u64 {
        let mut k = 1;
        let mut cur = *self;
        while !cur.is_identity() {
            cur = cur.mul(self);
            k += 1;
        }
        k
    }
}

fn inv_small(a: i64, l: i64) -> i64 {
    (1..l).find(|&b| a * b % l == 1).expect("unit")
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|&i| m >> i & 1 == 1).collect())
        .collect()
}

/// Determinant of the principal submatrix on `idx`, reduced mod `l`.
fn principal_minor<const N: usize>(e: &[[u8; N]; N], idx: &[usize], l: i64) -> u64 {
    let k = idx.len();
    let mut a: Vec<Vec<i64>> = idx
        .iter()
        .map(|&i| idx.iter().map(|&j| e[i][j] as i64).collect())
        .collect();
    let mut det = 1i64;
    for col in 0..k {
        let Some(pivot) = (col..k).find(|&r| a[r][col] != 0) else {
            return 0;
        };
        if pivot != col {
            a.swap(col, pivot);
            det = -det;
        }
        det = (det * a[col][col]).rem_euclid(l);
        let pinv = inv_small(a[col][col], l);
        for r in col + 1..k {
            if a[r][col] != 0 {
                let f = a[r][col] * pinv % l;
                for j in col..k {
                    a[r][j] = (a[r][j] - f * a[col][j]).rem_euclid(l);
                }
            }
        }
    }
    det.rem_euclid(l) as u64
}

/// Standard symplectic form `[[0, I], [-I, 0]]`.
pub fn symplectic_form<const N: usize>(l: u64) -> Mat<N> {
    let g = N / 2;
    let mut rows = [[0i64; N]; N];
    for i in 0..g {
        rows[i][g + i] = 1;
        rows[g + i][i] = -1;
    }
    Mat::new(l, rows)
}

/// Multiplier `μ` with `Mᵀ J M = μ J`, if `M` is a symplectic similitude.
pub fn similitude<const N: usize>(m: &Mat<N>) -> Option<u64> {
    let j = symplectic_form::<N>(m.l());
    let lhs = m.transpose().mul(&j).mul(m);
    let mu = lhs.get(0, N / 2);
    if mu != 0 && lhs == Mat::<N>::scalar(m.l(), mu as i64).mul(&j) {
        Some(mu)
    } else {
        None
    }
}

impl<const N: usize> fmt::Debug for Mat<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl<const N: usize> fmt::Display for Mat<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .e
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "))
            .collect();
        write!(f, "[{}]", rows.join("; "))
    }
}
