//! Truncated Fourier series on the n-torus.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::{cis, cplx, czero, creal, dot_k, Real, C};

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MultiIndex(SmallVec<[i32; 3]>);

impl MultiIndex {
    pub fn new(k: &[i32]) -> Self {
        assert!(!k.is_empty(), "multi-index needs n >= 1");
        Self(SmallVec::from_slice(k))
    }

    pub fn zero(dim: usize) -> Self {
        Self(SmallVec::from_elem(0, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    pub fn l1(&self) -> u32 {
        self.0.iter().map(|k| k.unsigned_abs()).sum()
    }

    pub fn linf(&self) -> u32 {
        self.0.iter().map(|k| k.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&k| k == 0)
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|k| -k).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// All indices with |k|₁ ≤ cutoff, in lexicographic order.
    pub fn ball(dim: usize, cutoff: u32) -> Vec<MultiIndex> {
        let c = cutoff as i32;
        let mut out = Vec::new();
        let mut cur = vec![-c; dim];
        loop {
            let l1: i32 = cur.iter().map(|x| x.abs()).sum();
            if l1 <= c {
                out.push(MultiIndex::new(&cur));
            }
            let mut d = dim;
            loop {
                if d == 0 {
                    return out;
                }
                d -= 1;
                if cur[d] < c {
                    cur[d] += 1;
                    break;
                }
                cur[d] = -c;
            }
        }
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for MultiIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiIndex {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<i32>::deserialize(d)?;
        if v.is_empty() {
            return Err(serde::de::Error::custom("empty multi-index"));
        }
        Ok(MultiIndex::new(&v))
    }
}

/// Uniform grid on Tⁿ with `side` points per dimension, row-major
/// (last coordinate fastest).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusGrid {
    pub dim: usize,
    pub side: usize,
}

impl TorusGrid {
    pub fn new(dim: usize, side: usize) -> Self {
        Self { dim, side }
    }

    pub fn len(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.side == 0
    }

    pub fn multi(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dim];
        for d in (0..self.dim).rev() {
            out[d] = idx % self.side;
            idx /= self.side;
        }
        out
    }

    pub fn point<T: Real>(&self, idx: usize) -> Vec<T> {
        let step = T::TAU() / T::from_usize_lossy(self.side);
        self.multi(idx)
            .into_iter()
            .map(|j| step * T::from_usize_lossy(j))
            .collect()
    }

    pub fn points<T: Real>(&self) -> Vec<Vec<T>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

/// Table of e^{2πi j/G}, j = 0..G.
fn roots<T: Real>(side: usize) -> Vec<C<T>> {
    let step = T::TAU() / T::from_usize_lossy(side);
    (0..side)
        .map(|j| cis(step * T::from_usize_lossy(j)))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly<T: Real> {
    dim: usize,
    cutoff: u32,
    strip_width: T,
    real: bool,
    coeffs: BTreeMap<MultiIndex, C<T>>,
}

impl<T: Real> TrigPoly<T> {
    pub fn zero(dim: usize, cutoff: u32, strip_width: T) -> Self {
        assert!(dim >= 1, "torus dimension must be at least 1");
        Self {
            dim,
            cutoff,
            strip_width,
            real: true,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, value: C<T>, strip_width: T) -> Self {
        let mut p = Self::zero(dim, 0, strip_width);
        if value != czero() {
            p.coeffs.insert(MultiIndex::zero(dim), value);
        }
        p.real = value.im == T::zero();
        p
    }

    /// sin(k·θ).
    pub fn sin(k: &[i32], strip_width: T) -> Self {
        let half = T::lit(0.5);
        let kk = MultiIndex::new(k);
        let mut p = Self::zero(k.len(), kk.l1(), strip_width);
        if !kk.is_zero() {
            p.coeffs.insert(kk.clone(), cplx(T::zero(), -half));
            p.coeffs.insert(kk.neg(), cplx(T::zero(), half));
        }
        p
    }

    /// cos(k·θ).
    pub fn cos(k: &[i32], strip_width: T) -> Self {
        let half = T::lit(0.5);
        let kk = MultiIndex::new(k);
        let mut p = Self::zero(k.len(), kk.l1(), strip_width);
        if kk.is_zero() {
            p.coeffs.insert(kk, creal(T::one()));
        } else {
            p.coeffs.insert(kk.clone(), creal(half));
            p.coeffs.insert(kk.neg(), creal(half));
        }
        p
    }

    /// Builds from explicit coefficients; the real flag is set when the
    /// stored coefficients are exactly conjugate-symmetric.
    pub fn from_coeffs<I>(dim: usize, cutoff: u32, strip_width: T, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, C<T>)>,
    {
        let mut p = Self::zero(dim, cutoff, strip_width);
        for (k, c) in coeffs {
            if k.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: k.dim(),
                });
            }
            if k.l1() > cutoff {
                return Err(Error::InvalidParameter(format!(
                    "mode {k} exceeds cutoff {cutoff}"
                )));
            }
            if c != czero() {
                *p.coeffs.entry(k).or_insert_with(czero) = c;
            }
        }
        p.real = p.conj_symmetric_exact();
        Ok(p)
    }

    fn conj_symmetric_exact(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(k, c)| self.coeff(&k.neg()) == c.conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn strip_width(&self) -> T {
        self.strip_width
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &MultiIndex) -> C<T> {
        self.coeffs.get(k).copied().unwrap_or_else(czero)
    }

    pub fn coeff_at(&self, k: &[i32]) -> C<T> {
        self.coeff(&MultiIndex::new(k))
    }

    pub fn mean(&self) -> C<T> {
        self.coeff(&MultiIndex::zero(self.dim))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, &C<T>)> {
        self.coeffs.iter()
    }

    /// Largest |k|₁ actually stored.
    pub fn effective_cutoff(&self) -> u32 {
        self.coeffs.keys().map(|k| k.l1()).max().unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.coeffs.values().fold(T::zero(), |a, c| a.max(c.norm()))
    }

    pub fn with_strip_width(mut self, strip_width: T) -> Self {
        self.strip_width = strip_width;
        self
    }

    pub fn with_cutoff_at_least(mut self, cutoff: u32) -> Self {
        self.cutoff = self.cutoff.max(cutoff);
        self
    }

    /// Max |coeff(−k) − conj(coeff(k))|.
    pub fn conj_symmetry_defect(&self) -> T {
        self.coeffs
            .iter()
            .map(|(k, c)| (self.coeff(&k.neg()) - c.conj()).norm())
            .fold(T::zero(), T::max)
    }

    /// Discrete Fourier transform of samples on a uniform grid, keeping
    /// |k|₁ ≤ cutoff. Real samples give an exactly conjugate-symmetric result.
    pub fn fourier_analyze(
        grid: TorusGrid,
        samples: &[C<T>],
        cutoff: u32,
        strip_width: T,
    ) -> Result<Self> {
        let required = 2 * cutoff as usize + 1;
        if grid.side < required {
            return Err(Error::GridTooCoarse {
                cutoff,
                required,
                got: grid.side,
            });
        }
        if samples.len() != grid.len() {
            return Err(Error::GridShape {
                dim: grid.dim,
                side: grid.side,
                got: samples.len(),
            });
        }
        let real = samples.iter().all(|z| z.im == T::zero());
        let g = grid.side;
        let c = cutoff as i32;
        let width = 2 * cutoff as usize + 1;
        let rt = roots::<T>(g);
        // Separable transform, one axis at a time.
        let mut data = samples.to_vec();
        let mut shape = vec![g; grid.dim];
        for axis in 0..grid.dim {
            let outer: usize = shape[..axis].iter().product();
            let inner: usize = shape[axis + 1..].iter().product();
            let mut next = vec![czero(); outer * width * inner];
            for o in 0..outer {
                for (ki, kv) in (-c..=c).enumerate() {
                    for i in 0..inner {
                        let mut acc = czero();
                        for j in 0..g {
                            let w = rt[((-(kv as i64) * j as i64).rem_euclid(g as i64)) as usize];
                            acc = acc + data[(o * g + j) * inner + i] * w;
                        }
                        next[(o * width + ki) * inner + i] = acc;
                    }
                }
            }
            data = next;
            shape[axis] = width;
        }
        let norm = T::one() / T::from_usize_lossy(grid.len());
        let mut p = Self::zero(grid.dim, cutoff, strip_width);
        let side = TorusGrid::new(grid.dim, width);
        for (idx, v) in data.into_iter().enumerate() {
            let k: Vec<i32> = side.multi(idx).into_iter().map(|j| j as i32 - c).collect();
            let k = MultiIndex::new(&k);
            if k.l1() > cutoff {
                continue;
            }
            let v = v * norm;
            if v != czero() {
                p.coeffs.insert(k, v);
            }
        }
        if real {
            p.enforce_conj_symmetry();
        }
        p.real = real;
        Ok(p)
    }

    /// Mirror the lexicographically positive half onto the negative half.
    fn enforce_conj_symmetry(&mut self) {
        let mut out = BTreeMap::new();
        for (k, c) in &self.coeffs {
            let mk = k.neg();
            if *k == mk {
                if c.re != T::zero() {
                    out.insert(k.clone(), creal(c.re));
                }
            } else if *k > mk {
                out.insert(mk, c.conj());
                out.insert(k.clone(), *c);
            }
        }
        self.coeffs = out;
    }

    /// Values on a uniform grid, row-major.
    pub fn sample(&self, grid: TorusGrid) -> Vec<C<T>> {
        assert_eq!(grid.dim, self.dim, "grid dimension mismatch");
        let g = grid.side as i64;
        let rt = roots::<T>(grid.side);
        let mut out = vec![czero(); grid.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let m = grid.multi(idx);
            let mut acc = czero();
            for (k, c) in &self.coeffs {
                let mut phase: i64 = 0;
                for (kj, &mj) in k.as_slice().iter().zip(&m) {
                    phase += *kj as i64 * mj as i64;
                }
                acc = acc + c * rt[phase.rem_euclid(g) as usize];
            }
            *slot = acc;
        }
        out
    }

    /// Σ coeff(k) e^{ik·θ} for θ in the complex strip.
    pub fn evaluate(&self, theta: &[C<T>]) -> Result<C<T>> {
        if theta.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: theta.len(),
            });
        }
        let im = theta.iter().fold(T::zero(), |a, z| a.max(z.im.abs()));
        if im > self.strip_width {
            return Err(Error::OutsideStrip {
                im: im.as_f64(),
                width: self.strip_width.as_f64(),
            });
        }
        let i = cplx(T::zero(), T::one());
        Ok(self.coeffs.iter().fold(czero(), |acc, (k, c)| {
            let mut arg = czero();
            for (kj, th) in k.as_slice().iter().zip(theta) {
                arg = arg + th * T::from_int(*kj as i64);
            }
            acc + c * (i * arg).exp()
        }))
    }

    /// Evaluation at a real angle (always inside the strip).
    pub fn evaluate_real(&self, theta: &[T]) -> C<T> {
        self.coeffs
            .iter()
            .fold(czero(), |acc, (k, c)| acc + c * cis(dot_k(theta, k.as_slice())))
    }

    /// Exponentially weighted ℓ¹ majorant Σ |coeff(k)| e^{|k|₁σ'}; bounds the
    /// sup over |Im θ| ≤ σ'. Precondition σ' ≤ strip_width.
    pub fn strip_norm(&self, sigma: T) -> T {
        self.coeffs.iter().fold(T::zero(), |a, (k, c)| {
            a + c.norm() * (sigma * T::from_int(k.l1() as i64)).exp()
        })
    }

    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut out = Self::zero(
            self.dim,
            self.cutoff + other.cutoff,
            self.strip_width.min(other.strip_width),
        );
        for (ka, ca) in &self.coeffs {
            for (kb, cb) in &other.coeffs {
                let e = out.coeffs.entry(ka.add(kb)).or_insert_with(czero);
                *e = *e + ca * cb;
            }
        }
        out.coeffs.retain(|_, c| *c != czero());
        out.real = self.real && other.real;
        Ok(out)
    }

    /// Split into |k|₁ ≤ K' and the rest; low + tail reproduces self exactly.
    pub fn truncate(&self, cutoff: u32) -> (Self, Self) {
        let mut low = Self::zero(self.dim, self.cutoff.min(cutoff), self.strip_width);
        let mut tail = Self::zero(self.dim, self.cutoff, self.strip_width);
        for (k, c) in &self.coeffs {
            if k.l1() <= cutoff {
                low.coeffs.insert(k.clone(), *c);
            } else {
                tail.coeffs.insert(k.clone(), *c);
            }
        }
        low.real = self.real;
        tail.real = self.real;
        (low, tail)
    }

    pub fn scale(&self, s: C<T>) -> Self {
        let mut out = self.map_coeffs(|c| c * s);
        out.real = self.real && s.im == T::zero();
        out
    }

    pub fn scale_real(&self, s: T) -> Self {
        let mut out = self.map_coeffs(|c| c * s);
        out.real = self.real;
        out
    }

    fn map_coeffs(&self, f: impl Fn(C<T>) -> C<T>) -> Self {
        let mut out = Self::zero(self.dim, self.cutoff, self.strip_width);
        for (k, c) in &self.coeffs {
            let v = f(*c);
            if v != czero() {
                out.coeffs.insert(k.clone(), v);
            }
        }
        out
    }

    /// Directional derivative ω·∂_θ.
    pub fn advect(&self, omega: &[T]) -> Self {
        assert_eq!(omega.len(), self.dim, "frequency dimension mismatch");
        let mut out = Self::zero(self.dim, self.cutoff, self.strip_width);
        for (k, c) in &self.coeffs {
            let v = c * cplx(T::zero(), dot_k(omega, k.as_slice()));
            if v != czero() {
                out.coeffs.insert(k.clone(), v);
            }
        }
        out.real = self.real;
        out
    }

    /// The function θ ↦ conj(p(θ)) for real θ.
    pub fn conj_fn(&self) -> Self {
        let mut out = Self::zero(self.dim, self.cutoff, self.strip_width);
        for (k, c) in &self.coeffs {
            out.coeffs.insert(k.neg(), c.conj());
        }
        out.real = self.real;
        out
    }

    /// Drop coefficients with modulus ≤ tol.
    pub fn prune(&self, tol: T) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|_, c| c.norm() > tol);
        out
    }

    /// Apply a coefficientwise map on the pair (k, c).
    pub fn map_indexed(&self, f: impl Fn(&MultiIndex, C<T>) -> C<T>) -> Self {
        let mut out = Self::zero(self.dim, self.cutoff, self.strip_width);
        for (k, c) in &self.coeffs {
            let v = f(k, *c);
            if v != czero() {
                out.coeffs.insert(k.clone(), v);
            }
        }
        out.real = out.conj_symmetric_exact();
        out
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        assert_eq!(self.dim, other.dim, "trig poly dimension mismatch");
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(other.cutoff);
        out.strip_width = self.strip_width.min(other.strip_width);
        for (k, c) in &other.coeffs {
            let e = out.coeffs.entry(k.clone()).or_insert_with(czero);
            *e = *e + c * sign;
        }
        out.coeffs.retain(|_, c| *c != czero());
        out.real = self.real && other.real;
        out
    }
}

impl<T: Real> Add for &TrigPoly<T> {
    type Output = TrigPoly<T>;
    fn add(self, rhs: &TrigPoly<T>) -> TrigPoly<T> {
        self.combine(rhs, T::one())
    }
}

impl<T: Real> Sub for &TrigPoly<T> {
    type Output = TrigPoly<T>;
    fn sub(self, rhs: &TrigPoly<T>) -> TrigPoly<T> {
        self.combine(rhs, -T::one())
    }
}

impl<T: Real> Neg for &TrigPoly<T> {
    type Output = TrigPoly<T>;
    fn neg(self) -> TrigPoly<T> {
        self.scale_real(-T::one())
    }
}

impl<T: Real> Mul for &TrigPoly<T> {
    type Output = TrigPoly<T>;
    fn mul(self, rhs: &TrigPoly<T>) -> TrigPoly<T> {
        self.product(rhs).expect("trig poly dimension mismatch")
    }
}

#[derive(Serialize, Deserialize)]
struct TrigPolyRepr<T> {
    dim: usize,
    cutoff: u32,
    strip_width: T,
    coeffs: Vec<(MultiIndex, T, T)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    real: Option<bool>,
}

impl<T: Real + Serialize> Serialize for TrigPoly<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TrigPolyRepr {
            dim: self.dim,
            cutoff: self.cutoff,
            strip_width: self.strip_width,
            coeffs: self
                .coeffs
                .iter()
                .map(|(k, c)| (k.clone(), c.re, c.im))
                .collect(),
            real: Some(self.real),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for TrigPoly<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = TrigPolyRepr::<T>::deserialize(d)?;
        let mut p = TrigPoly::from_coeffs(
            r.dim,
            r.cutoff,
            r.strip_width,
            r.coeffs.into_iter().map(|(k, re, im)| (k, cplx(re, im))),
        )
        .map_err(serde::de::Error::custom)?;
        if let Some(real) = r.real {
            p.real = real;
        }
        Ok(p)
    }
}
