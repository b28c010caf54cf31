//! Small dense complex matrices: products, inverse, exponential, logarithm.

use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::{cone, czero, creal, Real, C};

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T: Real> {
    n: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![czero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = cone();
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn from_real(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        Self::from_fn(n, |i, j| creal(f(i, j)))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, s: C<T>) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        (0..self.n)
            .map(|i| {
                (0..self.n).fold(czero(), |acc, j| acc + self[(i, j)] * v[j])
            })
            .collect()
    }

    pub fn norm_fro(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |a, z| a + z.norm_sqr())
            .sqrt()
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> T {
        (0..self.n)
            .map(|j| (0..self.n).fold(T::zero(), |a, i| a + self[(i, j)].norm()))
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |a, z| a.max(z.norm()))
    }

    pub fn trace(&self) -> C<T> {
        (0..self.n).fold(czero(), |a, i| a + self[(i, i)])
    }

    /// Symmetric part ½(M + Mᵀ).
    pub fn symmetrized(&self) -> Self {
        let h = T::lit(0.5);
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)]) * h)
    }

    /// [[a, b], [c, d]] from four n×n blocks.
    pub fn from_blocks(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let n = a.n;
        Self::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a[(i, j)],
            (true, false) => b[(i, j - n)],
            (false, true) => c[(i - n, j)],
            (false, false) => d[(i - n, j - n)],
        })
    }

    pub fn block(&self, r0: usize, c0: usize, m: usize) -> Self {
        Self::from_fn(m, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Gauss–Jordan inverse with partial pivoting; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs();
        if scale == T::zero() {
            return None;
        }
        for col in 0..n {
            let mut piv = col;
            let mut best = a[(col, col)].norm();
            for r in col + 1..n {
                let v = a[(r, col)].norm();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= scale * T::precision() * T::lit(1e-3) {
                return None;
            }
            if piv != col {
                for j in 0..n {
                    a.data.swap(col * n + j, piv * n + j);
                    inv.data.swap(col * n + j, piv * n + j);
                }
            }
            let p = a[(col, col)].inv();
            for j in 0..n {
                a[(col, j)] = a[(col, j)] * p;
                inv[(col, j)] = inv[(col, j)] * p;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == czero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] = a[(r, j)] - f * ac;
                    inv[(r, j)] = inv[(r, j)] - f * ic;
                }
            }
        }
        Some(inv)
    }

    /// Matrix exponential by scaling and squaring with a Taylor core run to
    /// working precision.
    pub fn expm(&self) -> Self {
        let n = self.n;
        let norm = self.norm_one();
        let mut s = 0i32;
        if norm > T::lit(0.5) {
            s = (norm / T::lit(0.5)).log2().ceil().to_i32().unwrap_or(0).max(0);
        }
        let a = self.scale_real(T::lit(0.5).powi(s));
        let mut sum = Self::identity(n);
        let mut term = Self::identity(n);
        for k in 1..200 {
            term = &term * &a;
            term = term.scale_real(T::one() / T::from_usize_lossy(k));
            sum = &sum + &term;
            if term.norm_one() <= T::precision() * T::lit(0.25) * sum.norm_one() {
                break;
            }
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    /// Principal square root by the Denman–Beavers iteration.
    pub fn sqrtm(&self) -> Result<Self> {
        let n = self.n;
        let mut y = self.clone();
        let mut z = Self::identity(n);
        let half = T::lit(0.5);
        for _ in 0..100 {
            let yi = y.inverse().ok_or_else(|| Error::LogBranch("singular iterate in square root".into()))?;
            let zi = z.inverse().ok_or_else(|| Error::LogBranch("singular iterate in square root".into()))?;
            let y_next = (&y + &zi).scale_real(half);
            let z_next = (&z + &yi).scale_real(half);
            let change = (&y_next - &y).norm_one();
            y = y_next;
            z = z_next;
            if change <= T::precision() * T::lit(8.0) * y.norm_one() {
                return Ok(y);
            }
        }
        Err(Error::LogBranch(
            "square-root iteration stalled (eigenvalue on the negative real axis?)".into(),
        ))
    }

    /// Principal logarithm via inverse scaling and squaring.
    pub fn logm(&self) -> Result<Self> {
        let n = self.n;
        let id = Self::identity(n);
        let mut x = self.clone();
        let mut k = 0;
        while (&x - &id).norm_one() > T::lit(0.25) {
            x = x.sqrtm()?;
            k += 1;
            if k > 60 {
                return Err(Error::LogBranch("too many square roots".into()));
            }
        }
        let e = &x - &id;
        let mut sum = e.clone();
        let mut pow = e.clone();
        for j in 2..1000 {
            pow = &pow * &e;
            let t = pow.scale_real(T::one() / T::from_usize_lossy(j));
            sum = if j % 2 == 0 { &sum - &t } else { &sum + &t };
            if t.norm_one() <= T::precision() * T::lit(0.25) * sum.norm_one() {
                break;
            }
        }
        Ok(sum.scale_real(T::lit(2.0).powi(k)))
    }

    /// Null vector of a (numerically) singular matrix by inverse iteration.
    pub fn null_vector(&self) -> Vec<C<T>> {
        let n = self.n;
        let shift = self.max_abs().max(T::one()) * T::lit(1e-11);
        let shifted = self - &Self::identity(n).scale_real(shift);
        let inv = shifted
            .inverse()
            .unwrap_or_else(|| Self::identity(n));
        let mut v: Vec<C<T>> = (0..n)
            .map(|i| creal(T::one() + T::lit(0.1) * T::from_usize_lossy(i)))
            .collect();
        for _ in 0..4 {
            v = inv.mul_vec(&v);
            let nv = v.iter().fold(T::zero(), |a, z| a + z.norm_sqr()).sqrt();
            if nv > T::zero() {
                v.iter_mut().for_each(|z| *z = *z / nv);
            }
        }
        v
    }
}

/// e^X together with its Fréchet derivative in direction E, from the block
/// exponential exp([[X, E], [0, X]]).
pub fn expm_frechet<T: Real>(x: &CMatrix<T>, e: &CMatrix<T>) -> (CMatrix<T>, CMatrix<T>) {
    let n = x.dim();
    let z = CMatrix::zeros(n);
    let big = CMatrix::from_blocks(x, e, &z, x).expm();
    (big.block(0, 0, n), big.block(0, n, n))
}

/// Standard symplectic unit J = [[0, I], [−I, 0]] of size 2d.
pub fn symplectic_j<T: Real>(size: usize) -> CMatrix<T> {
    let d = size / 2;
    CMatrix::from_fn(size, |i, j| {
        if i < d && j == i + d {
            cone()
        } else if i >= d && j + d == i {
            -cone::<T>()
        } else {
            czero()
        }
    })
}

/// ‖MᵀJM − J‖ in Frobenius norm.
pub fn symplectic_defect<T: Real>(m: &CMatrix<T>) -> T {
    let j = symplectic_j::<T>(m.dim());
    (&(&m.transpose() * &(&j * m)) - &j).norm_fro()
}

/// ‖AᵀJ + JA‖ in Frobenius norm (zero for Hamiltonian matrices).
pub fn hamiltonian_defect<T: Real>(a: &CMatrix<T>) -> T {
    let j = symplectic_j::<T>(a.dim());
    (&(&a.transpose() * &j) + &(&j * a)).norm_fro()
}

impl<T: Real> Index<(usize, usize)> for CMatrix<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.n + j]
    }
}

impl<T: Real> IndexMut<(usize, usize)> for CMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.n + j]
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == czero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] = out.data[i * n + j] + a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &CMatrix<T> {
    type Output = CMatrix<T>;
    fn neg(self) -> CMatrix<T> {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;

    fn sample(n: usize, seed: u64) -> CMatrix<f64> {
        let mut s = seed;
        CMatrix::from_fn(n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let a = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let b = ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
            cplx(a, b)
        })
    }

    #[test]
    fn inverse_roundtrip() {
        let a = sample(5, 3);
        let ai = a.inverse().unwrap();
        assert!((&(&a * &ai) - &CMatrix::identity(5)).norm_fro() < 1e-13);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let t: f64 = 0.7;
        let a = CMatrix::from_real(2, |i, j| match (i, j) {
            (0, 1) => -t,
            (1, 0) => t,
            _ => 0.0,
        });
        let e = a.expm();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-15);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-15);
    }

    #[test]
    fn expm_large_norm_scales() {
        let a = sample(4, 11).scale_real(6.0);
        let e = a.expm();
        let back = e.scale_real(1.0);
        // e^{A} e^{-A} = I
        let prod = &back * &a.scale_real(-1.0).expm();
        assert!((&prod - &CMatrix::identity(4)).norm_fro() < 1e-10);
    }

    #[test]
    fn log_inverts_exp() {
        let a = sample(4, 5).scale_real(0.8);
        let l = a.expm().logm().unwrap();
        assert!((&l - &a).norm_fro() < 1e-12, "{}", (&l - &a).norm_fro());
    }

    #[test]
    fn log_rejects_negative_axis() {
        let m = CMatrix::from_real(2, |i, j| if i == j { -1.0 } else { 0.0 });
        assert!(m.logm().is_err());
    }

    #[test]
    fn frechet_matches_finite_difference() {
        let x = sample(4, 7).scale_real(0.5);
        let e = sample(4, 8);
        let (ex, l) = expm_frechet(&x, &e);
        assert!((&ex - &x.expm()).norm_fro() < 1e-13);
        let h = 1e-6;
        let fd = (&(&x + &e.scale_real(h)).expm() - &(&x - &e.scale_real(h)).expm())
            .scale_real(0.5 / h);
        assert!((&fd - &l).norm_fro() < 1e-8);
    }

    #[test]
    fn exp_of_hamiltonian_is_symplectic() {
        let s = sample(4, 9);
        let s = s.symmetrized();
        let x = &symplectic_j::<f64>(4) * &s;
        assert!(hamiltonian_defect(&x) < 1e-14);
        assert!(symplectic_defect(&x.expm()) < 1e-13);
    }

    #[test]
    fn null_vector_of_singular() {
        let m = CMatrix::from_real(3, |i, j| ((i + 1) * (j + 1)) as f64);
        let shifted = &m - &CMatrix::identity(3).scale_real(14.0);
        let v = shifted.null_vector();
        let r = shifted.mul_vec(&v);
        assert!(r.iter().all(|z| z.norm() < 1e-9));
    }
}
