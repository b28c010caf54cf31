//! Quadratic Hamiltonians in (ξ₁, ξ₂, η₁, η₂) with Fourier coefficients.
//!
//! A form is stored as a map monomial → coefficient; the matrix view uses
//! h = ½ wᵀ S w with w = (ξ₁, ξ₂, η₁, η₂).

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cplx, czero, Real, C};
use crate::trigpoly::{TorusGrid, TrigPoly};

pub mod gauge;

pub use gauge::{
    build_landau, build_symmetric, chart_map, fields_from_potentials, phase_matrix, ChartKind,
    FieldSample, Gauge, GaugeSystem, Modulation, PhasePoint, PotentialFamily,
};

/// ξ^α η^β with |α| + |β| = 2.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Monomial {
    pub alpha: [u8; 2],
    pub beta: [u8; 2],
}

impl Monomial {
    pub const XI1_XI1: Monomial = Monomial::new([2, 0], [0, 0]);
    pub const XI1_XI2: Monomial = Monomial::new([1, 1], [0, 0]);
    pub const XI1_ETA1: Monomial = Monomial::new([1, 0], [1, 0]);
    pub const XI1_ETA2: Monomial = Monomial::new([1, 0], [0, 1]);
    pub const XI2_XI2: Monomial = Monomial::new([0, 2], [0, 0]);
    pub const XI2_ETA1: Monomial = Monomial::new([0, 1], [1, 0]);
    pub const XI2_ETA2: Monomial = Monomial::new([0, 1], [0, 1]);
    pub const ETA1_ETA1: Monomial = Monomial::new([0, 0], [2, 0]);
    pub const ETA1_ETA2: Monomial = Monomial::new([0, 0], [1, 1]);
    pub const ETA2_ETA2: Monomial = Monomial::new([0, 0], [0, 2]);

    pub const fn new(alpha: [u8; 2], beta: [u8; 2]) -> Self {
        Self { alpha, beta }
    }

    fn exponents(&self) -> [u8; 4] {
        [self.alpha[0], self.alpha[1], self.beta[0], self.beta[1]]
    }

    /// Monomial w_i w_j for variable indices in (ξ₁, ξ₂, η₁, η₂) order.
    pub fn from_vars(i: usize, j: usize) -> Self {
        let mut e = [0u8; 4];
        e[i] += 1;
        e[j] += 1;
        Self::new([e[0], e[1]], [e[2], e[3]])
    }

    /// Variable indices (i ≤ j) with w_i w_j equal to this monomial.
    pub fn vars(&self) -> (usize, usize) {
        let e = self.exponents();
        let mut idx = Vec::with_capacity(2);
        for (v, &p) in e.iter().enumerate() {
            for _ in 0..p {
                idx.push(v);
            }
        }
        (idx[0], idx[1])
    }

    pub fn is_valid(&self) -> bool {
        self.exponents().iter().map(|&p| p as u32).sum::<u32>() == 2
    }

    /// Allowed in Landau-class forms (no η₂).
    pub fn is_landau(&self) -> bool {
        self.beta[1] == 0
    }

    /// (α₁ − β₁, α₂ − β₂).
    pub fn charge(&self) -> (i32, i32) {
        (
            self.alpha[0] as i32 - self.beta[0] as i32,
            self.alpha[1] as i32 - self.beta[1] as i32,
        )
    }

    /// All ten quadratic monomials in lexicographic (α₁, α₂, β₁, β₂) order.
    pub fn all() -> Vec<Monomial> {
        let mut v: Vec<Monomial> = (0..4)
            .flat_map(|i| (i..4).map(move |j| Monomial::from_vars(i, j)))
            .collect();
        v.sort();
        v
    }

    pub fn landau_class() -> Vec<Monomial> {
        Self::all().into_iter().filter(|m| m.is_landau()).collect()
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [&str; 4] = ["ξ₁", "ξ₂", "η₁", "η₂"];
        let (i, j) = self.vars();
        if i == j {
            write!(f, "{}²", NAMES[i])
        } else {
            write!(f, "{}{}", NAMES[i], NAMES[j])
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClassTag {
    /// β₂ = 0 enforced.
    Landau,
    Full,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadHamiltonian<T: Real> {
    dim: usize,
    strip_width: T,
    class: ClassTag,
    terms: BTreeMap<Monomial, TrigPoly<T>>,
}

impl<T: Real> QuadHamiltonian<T> {
    pub fn zero(dim: usize, strip_width: T, class: ClassTag) -> Self {
        Self {
            dim,
            strip_width,
            class,
            terms: BTreeMap::new(),
        }
    }

    pub fn from_terms<I>(dim: usize, strip_width: T, class: ClassTag, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, TrigPoly<T>)>,
    {
        let mut h = Self::zero(dim, strip_width, class);
        for (m, p) in terms {
            h.add_term(m, &p)?;
        }
        Ok(h)
    }

    /// Adds p to the coefficient of m.
    pub fn add_term(&mut self, m: Monomial, p: &TrigPoly<T>) -> Result<()> {
        if !m.is_valid() {
            return Err(Error::InvalidParameter(format!("{m:?} is not quadratic")));
        }
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.dim(),
            });
        }
        if p.is_zero() {
            return Ok(());
        }
        if self.class == ClassTag::Landau && !m.is_landau() {
            return Err(Error::ClassMismatch(format!(
                "monomial {m} not allowed in a Landau-class form"
            )));
        }
        let p = p.clone().with_strip_width(self.strip_width);
        let sum = match self.terms.get(&m) {
            Some(old) => old + &p,
            None => p,
        };
        if sum.is_zero() {
            self.terms.remove(&m);
        } else {
            self.terms.insert(m, sum);
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strip_width(&self) -> T {
        self.strip_width
    }

    pub fn class(&self) -> ClassTag {
        self.class
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term(&self, m: Monomial) -> TrigPoly<T> {
        self.terms
            .get(&m)
            .cloned()
            .unwrap_or_else(|| TrigPoly::zero(self.dim, 0, self.strip_width))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &TrigPoly<T>)> {
        self.terms.iter()
    }

    pub fn with_strip_width(mut self, strip_width: T) -> Self {
        self.strip_width = strip_width;
        for p in self.terms.values_mut() {
            *p = p.clone().with_strip_width(strip_width);
        }
        self
    }

    /// Re-tag as Landau class; fails if an η₂ monomial is present.
    pub fn into_landau(self) -> Result<Self> {
        if let Some(m) = self.terms.keys().find(|m| !m.is_landau()) {
            return Err(Error::ClassMismatch(format!(
                "monomial {m} present, form is not Landau class"
            )));
        }
        Ok(Self {
            class: ClassTag::Landau,
            ..self
        })
    }

    pub fn into_full(self) -> Self {
        Self {
            class: ClassTag::Full,
            ..self
        }
    }

    /// Largest |coefficient| of the η₂ monomials.
    pub fn eta2_content(&self) -> T {
        self.terms
            .iter()
            .filter(|(m, _)| !m.is_landau())
            .map(|(_, p)| p.max_abs_coeff())
            .fold(T::zero(), T::max)
    }

    /// Drop η₂ monomials and tag as Landau class.
    pub fn project_landau(&self) -> Self {
        let mut out = Self::zero(self.dim, self.strip_width, ClassTag::Landau);
        for (m, p) in &self.terms {
            if m.is_landau() {
                out.terms.insert(*m, p.clone());
            }
        }
        out
    }

    /// [q]_σ = max over monomials of the strip majorant.
    pub fn norm(&self, sigma: T) -> T {
        self.terms
            .values()
            .map(|p| p.strip_norm(sigma))
            .fold(T::zero(), T::max)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.terms
            .values()
            .map(|p| p.max_abs_coeff())
            .fold(T::zero(), T::max)
    }

    pub fn effective_cutoff(&self) -> u32 {
        self.terms
            .values()
            .map(|p| p.effective_cutoff())
            .max()
            .unwrap_or(0)
    }

    fn map_terms(&self, f: impl Fn(&TrigPoly<T>) -> TrigPoly<T>) -> Self {
        let mut out = Self::zero(self.dim, self.strip_width, self.class);
        for (m, p) in &self.terms {
            let v = f(p);
            if !v.is_zero() {
                out.terms.insert(*m, v);
            }
        }
        out
    }

    pub fn scale(&self, s: C<T>) -> Self {
        self.map_terms(|p| p.scale(s))
    }

    pub fn scale_real(&self, s: T) -> Self {
        self.map_terms(|p| p.scale_real(s))
    }

    pub fn prune(&self, tol: T) -> Self {
        self.map_terms(|p| p.prune(tol))
    }

    /// ω·∂_θ applied to every coefficient.
    pub fn advect(&self, omega: &[T]) -> Self {
        self.map_terms(|p| p.advect(omega))
    }

    /// Split every coefficient at |k|₁ ≤ K.
    pub fn truncate(&self, cutoff: u32) -> (Self, Self) {
        (
            self.map_terms(|p| p.truncate(cutoff).0),
            self.map_terms(|p| p.truncate(cutoff).1),
        )
    }

    /// θ-average part.
    pub fn average(&self) -> Self {
        self.map_terms(|p| TrigPoly::constant(self.dim, p.mean(), self.strip_width))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, T::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -T::one())
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        assert_eq!(self.dim, other.dim, "quadratic form dimension mismatch");
        let class = if self.class == ClassTag::Landau && other.class == ClassTag::Landau {
            ClassTag::Landau
        } else {
            ClassTag::Full
        };
        let mut out = Self {
            class,
            ..self.clone()
        };
        out.strip_width = self.strip_width.min(other.strip_width);
        for (m, p) in &other.terms {
            out.add_term(*m, &p.scale_real(sign))
                .expect("class checked above");
        }
        out
    }

    /// Matrix S with h = ½ wᵀ S w.
    pub fn to_matrix(&self) -> PolyMatrix<T> {
        let mut s = PolyMatrix::zero(self.dim, self.strip_width);
        for (m, p) in &self.terms {
            let (i, j) = m.vars();
            if i == j {
                s.set(i, i, p.scale_real(T::lit(2.0)));
            } else {
                s.set(i, j, p.clone());
                s.set(j, i, p.clone());
            }
        }
        s
    }

    /// Inverse of `to_matrix`, reading the upper triangle of the symmetrized
    /// matrix.
    pub fn from_matrix(s: &PolyMatrix<T>, class: ClassTag) -> Result<Self> {
        let mut h = Self::zero(s.dim, s.strip_width, ClassTag::Full);
        let half = T::lit(0.5);
        for i in 0..4 {
            for j in i..4 {
                let m = Monomial::from_vars(i, j);
                let p = if i == j {
                    s.get(i, i).scale_real(half)
                } else {
                    (s.get(i, j) + s.get(j, i)).scale_real(half)
                };
                h.add_term(m, &p)?;
            }
        }
        match class {
            ClassTag::Landau => h.into_landau(),
            ClassTag::Full => Ok(h),
        }
    }

    /// S(θ) at a real angle.
    pub fn matrix_at(&self, theta: &[T]) -> CMatrix<T> {
        let mut s = CMatrix::zeros(4);
        for (m, p) in &self.terms {
            let v = p.evaluate_real(theta);
            let (i, j) = m.vars();
            if i == j {
                s[(i, i)] = v * T::lit(2.0);
            } else {
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    /// h(θ, w).
    pub fn evaluate(&self, theta: &[T], w: &[C<T>; 4]) -> C<T> {
        self.terms.iter().fold(czero(), |acc, (m, p)| {
            let (i, j) = m.vars();
            acc + p.evaluate_real(theta) * w[i] * w[j]
        })
    }
}

/// 4×4 matrix of Fourier series.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMatrix<T: Real> {
    dim: usize,
    strip_width: T,
    entries: Vec<TrigPoly<T>>,
}

impl<T: Real> PolyMatrix<T> {
    pub fn zero(dim: usize, strip_width: T) -> Self {
        Self {
            dim,
            strip_width,
            entries: vec![TrigPoly::zero(dim, 0, strip_width); 16],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn strip_width(&self) -> T {
        self.strip_width
    }

    pub fn get(&self, i: usize, j: usize) -> &TrigPoly<T> {
        &self.entries[4 * i + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: TrigPoly<T>) {
        self.entries[4 * i + j] = p;
    }

    pub fn entries(&self) -> &[TrigPoly<T>] {
        &self.entries
    }

    pub fn effective_cutoff(&self) -> u32 {
        self.entries
            .iter()
            .map(|p| p.effective_cutoff())
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> T {
        self.entries
            .iter()
            .map(|p| p.max_abs_coeff())
            .fold(T::zero(), T::max)
    }

    pub fn strip_norm(&self, sigma: T) -> T {
        self.entries
            .iter()
            .map(|p| p.strip_norm(sigma))
            .fold(T::zero(), T::max)
    }

    pub fn map(&self, f: impl Fn(&TrigPoly<T>) -> TrigPoly<T>) -> Self {
        Self {
            dim: self.dim,
            strip_width: self.strip_width,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.dim, self.strip_width.min(other.strip_width));
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = TrigPoly::zero(self.dim, 0, out.strip_width);
                for k in 0..4 {
                    let a = self.get(i, k);
                    let b = other.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = &acc + &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn transpose(&self) -> Self {
        let mut out = self.clone();
        for i in 0..4 {
            for j in 0..4 {
                out.set(i, j, self.get(j, i).clone());
            }
        }
        out
    }

    /// Left multiplication by the constant matrix c.
    pub fn left_mul_const(&self, c: &CMatrix<T>) -> Self {
        let mut out = Self::zero(self.dim, self.strip_width);
        for i in 0..4 {
            for j in 0..4 {
                let mut acc = TrigPoly::zero(self.dim, 0, self.strip_width);
                for k in 0..4 {
                    if c[(i, k)] != czero() {
                        acc = &acc + &self.get(k, j).scale(c[(i, k)]);
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn at(&self, theta: &[T]) -> CMatrix<T> {
        CMatrix::from_fn(4, |i, j| self.get(i, j).evaluate_real(theta))
    }

    pub fn sample(&self, grid: TorusGrid) -> Vec<CMatrix<T>> {
        let cols: Vec<Vec<C<T>>> = self.entries.iter().map(|p| p.sample(grid)).collect();
        (0..grid.len())
            .map(|g| CMatrix::from_fn(4, |i, j| cols[4 * i + j][g]))
            .collect()
    }

    pub fn analyze(grid: TorusGrid, samples: &[CMatrix<T>], cutoff: u32, strip_width: T) -> Result<Self> {
        let mut out = Self::zero(grid.dim, strip_width);
        for i in 0..4 {
            for j in 0..4 {
                let col: Vec<C<T>> = samples.iter().map(|m| m[(i, j)]).collect();
                out.set(i, j, TrigPoly::fourier_analyze(grid, &col, cutoff, strip_width)?);
            }
        }
        Ok(out)
    }
}

/// J·M for J = [[0, I], [−I, 0]] (row shuffle with sign).
fn j_left<T: Real>(m: &PolyMatrix<T>) -> PolyMatrix<T> {
    let mut out = PolyMatrix::zero(m.dim, m.strip_width);
    for j in 0..4 {
        out.set(0, j, m.get(2, j).clone());
        out.set(1, j, m.get(3, j).clone());
        out.set(2, j, -m.get(0, j));
        out.set(3, j, -m.get(1, j));
    }
    out
}

/// Phase-space part of the bracket: {F, G} = i Σ (∂F/∂ξ_j ∂G/∂η_j − ∂F/∂η_j ∂G/∂ξ_j).
/// In matrix form the result has S = i(S_F J S_G − S_G J S_F).
pub fn poisson_bracket<T: Real>(f: &QuadHamiltonian<T>, g: &QuadHamiltonian<T>) -> QuadHamiltonian<T> {
    assert_eq!(f.dim, g.dim, "bracket of forms on different tori");
    let sf = f.to_matrix();
    let sg = g.to_matrix();
    let a = sf.matmul(&j_left(&sg));
    let b = sg.matmul(&j_left(&sf));
    let i = cplx(T::zero(), T::one());
    let mut h = PolyMatrix::zero(f.dim, f.strip_width.min(g.strip_width));
    for r in 0..4 {
        for c in 0..4 {
            h.set(r, c, (a.get(r, c) - b.get(r, c)).scale(i));
        }
    }
    let class = if f.class == ClassTag::Landau && g.class == ClassTag::Landau {
        ClassTag::Landau
    } else {
        ClassTag::Full
    };
    let out = QuadHamiltonian::from_matrix(&h, ClassTag::Full).expect("quadratic by construction");
    match class {
        ClassTag::Landau => out.into_landau().expect("Landau class is closed under the bracket"),
        ClassTag::Full => out,
    }
}

/// Bracket in the extended phase space: {ω_f·I + F, ω_g·I + G}, where the
/// angle part contributes {F, ω·I} = ω·∂_θF.
pub fn extended_bracket<T: Real>(
    omega_f: Option<&[T]>,
    f: &QuadHamiltonian<T>,
    omega_g: Option<&[T]>,
    g: &QuadHamiltonian<T>,
) -> QuadHamiltonian<T> {
    let mut out = poisson_bracket(f, g);
    if let Some(w) = omega_g {
        out = out.add(&f.advect(w));
    }
    if let Some(w) = omega_f {
        out = out.sub(&g.advect(w));
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalKind {
    /// a·ξ₁η₁ + c·ξ₂²
    Landau,
    /// ν₁ξ₁η₁ + ν₂ξ₂η₂
    Symmetric,
}

impl NormalKind {
    pub fn kernel(&self) -> [Monomial; 2] {
        match self {
            NormalKind::Landau => [Monomial::XI1_ETA1, Monomial::XI2_XI2],
            NormalKind::Symmetric => [Monomial::XI1_ETA1, Monomial::XI2_ETA2],
        }
    }

    pub fn class(&self) -> ClassTag {
        match self {
            NormalKind::Landau => ClassTag::Landau,
            NormalKind::Symmetric => ClassTag::Full,
        }
    }
}

/// Constant-coefficient normal form. `a` is ν₁ in both kinds; `c` is the
/// ξ₂² coefficient (Landau kind) or ν₂ (symmetric kind).
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct NormalForm<T: Real> {
    pub kind: NormalKind,
    pub a: T,
    pub c: T,
}

impl<T: Real> NormalForm<T> {
    pub fn landau(a: T, c: T) -> Self {
        Self {
            kind: NormalKind::Landau,
            a,
            c,
        }
    }

    pub fn symmetric(nu1: T, nu2: T) -> Self {
        Self {
            kind: NormalKind::Symmetric,
            a: nu1,
            c: nu2,
        }
    }

    pub fn nu1(&self) -> T {
        self.a
    }

    pub fn nu2(&self) -> T {
        match self.kind {
            NormalKind::Landau => T::zero(),
            NormalKind::Symmetric => self.c,
        }
    }

    pub fn zero_like(&self) -> Self {
        Self {
            kind: self.kind,
            a: T::zero(),
            c: T::zero(),
        }
    }

    pub fn plus(&self, inc: &Self) -> Self {
        debug_assert_eq!(self.kind, inc.kind);
        Self {
            kind: self.kind,
            a: self.a + inc.a,
            c: self.c + inc.c,
        }
    }

    pub fn to_quad(&self, dim: usize, strip_width: T) -> QuadHamiltonian<T> {
        let [m1, m2] = self.kind.kernel();
        let mut h = QuadHamiltonian::zero(dim, strip_width, self.kind.class());
        let c1 = TrigPoly::constant(dim, cplx(self.a, T::zero()), strip_width);
        let c2 = TrigPoly::constant(dim, cplx(self.c, T::zero()), strip_width);
        h.add_term(m1, &c1).expect("kernel monomial");
        h.add_term(m2, &c2).expect("kernel monomial");
        h
    }

    /// Eigenvalue i(ν₁(α₁−β₁) + ν₂(α₂−β₂) + ω·k) of {N + ω·I, ·} on the
    /// monomial e^{ik·θ} ξ^α η^β (ν₂ = 0 in the Landau kind).
    pub fn divisor(&self, m: Monomial, omega_dot_k: T) -> C<T> {
        let (d1, d2) = m.charge();
        let v = self.a * T::from_int(d1 as i64) + self.nu2() * T::from_int(d2 as i64) + omega_dot_k;
        cplx(T::zero(), v)
    }
}

/// Chart in which a form's reality involution is expressed.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealChart {
    /// (ξ, η) ↦ (η̄, ξ̄).
    Standard,
    /// After ξ₂ → ξ₂ − η₂: (ξ₁, ξ₂, η₁, η₂) ↦ (η̄₁, −ξ̄₂, ξ̄₁, conj(ξ₂ + η₂)).
    Ambio,
}

impl RealChart {
    pub fn for_class(class: ClassTag) -> Self {
        match class {
            ClassTag::Landau => RealChart::Ambio,
            ClassTag::Full => RealChart::Standard,
        }
    }

    /// Matrix R with I(w) = R·conj(w).
    pub fn involution<T: Real>(&self) -> CMatrix<T> {
        let mut r = CMatrix::zeros(4);
        let one = cplx(T::one(), T::zero());
        match self {
            RealChart::Standard => {
                r[(0, 2)] = one;
                r[(1, 3)] = one;
                r[(2, 0)] = one;
                r[(3, 1)] = one;
            }
            RealChart::Ambio => {
                r[(0, 2)] = one;
                r[(1, 1)] = -one;
                r[(2, 0)] = one;
                r[(3, 1)] = one;
                r[(3, 3)] = one;
            }
        }
        r
    }

    /// Phase-space point of the physical state (z₁, z₂).
    pub fn real_state<T: Real>(&self, z1: C<T>, z2: C<T>) -> [C<T>; 4] {
        match self {
            RealChart::Standard => [z1, z2, z1.conj(), z2.conj()],
            RealChart::Ambio => [z1, z2 - z2.conj(), z1.conj(), z2.conj()],
        }
    }

    /// Deterministic sample of real states.
    pub fn sample_states<T: Real>(&self) -> Vec<[C<T>; 4]> {
        const Z: [(f64, f64, f64, f64); 6] = [
            (1.0, 0.0, 0.0, 0.0),
            (0.0, 1.0, 0.0, 0.0),
            (0.0, 0.0, 1.0, 0.0),
            (0.0, 0.0, 0.0, 1.0),
            (0.37, -0.81, 0.52, 0.29),
            (-0.66, 0.14, -0.23, 0.91),
        ];
        Z.iter()
            .map(|&(a, b, c, d)| {
                self.real_state(cplx(T::lit(a), T::lit(b)), cplx(T::lit(c), T::lit(d)))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RealityReport {
    pub is_real: bool,
    pub max_violation: f64,
}

/// Checks that F is real on involution-fixed states, over a deterministic set
/// of real states and an angle grid. The chart follows the class tag.
pub fn reality_check<T: Real>(f: &QuadHamiltonian<T>) -> RealityReport {
    reality_check_in(f, RealChart::for_class(f.class()))
}

pub fn reality_check_in<T: Real>(f: &QuadHamiltonian<T>, chart: RealChart) -> RealityReport {
    let side = match f.dim() {
        1 => 32,
        2 => 12,
        _ => 6,
    };
    let grid = TorusGrid::new(f.dim(), side);
    let states = chart.sample_states::<T>();
    let mut worst = T::zero();
    let mut scale = T::zero();
    for g in 0..grid.len() {
        let theta = grid.point::<T>(g);
        for w in &states {
            let v = f.evaluate(&theta, w);
            worst = worst.max(v.im.abs());
            scale = scale.max(v.norm());
        }
    }
    let tol = T::lit(1e-12) * scale.max(T::one());
    RealityReport {
        is_real: worst <= tol,
        max_violation: worst.as_f64(),
    }
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "P: Serialize", deserialize = "P: Deserialize<'de>"))]
struct TermRepr<P> {
    alpha: [u8; 2],
    beta: [u8; 2],
    poly: P,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "P: Serialize", deserialize = "P: Deserialize<'de>"))]
struct QuadRepr<P> {
    class_tag: ClassTag,
    terms: Vec<TermRepr<P>>,
}

impl<T: Real + Serialize> Serialize for QuadHamiltonian<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        QuadRepr {
            class_tag: self.class,
            terms: self
                .terms
                .iter()
                .map(|(m, p)| TermRepr {
                    alpha: m.alpha,
                    beta: m.beta,
                    poly: p.clone(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de, T: Real + Deserialize<'de>> Deserialize<'de> for QuadHamiltonian<T> {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = QuadRepr::<TrigPoly<T>>::deserialize(d)?;
        let first = r
            .terms
            .first()
            .ok_or_else(|| serde::de::Error::custom("a serialized form needs at least one term"))?;
        let dim = first.poly.dim();
        let strip = first.poly.strip_width();
        QuadHamiltonian::from_terms(
            dim,
            strip,
            r.class_tag,
            r.terms
                .into_iter()
                .map(|t| (Monomial::new(t.alpha, t.beta), t.poly)),
        )
        .map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn constant_form(m: Monomial, c: C<f64>) -> QuadHamiltonian<f64> {
        QuadHamiltonian::from_terms(1, 1.0, ClassTag::Full, [(m, TrigPoly::constant(1, c, 1.0))]).unwrap()
    }

    #[test]
    fn monomial_order_and_vars() {
        let all = Monomial::all();
        assert_eq!(all.len(), 10);
        assert_eq!(Monomial::landau_class().len(), 6);
        for m in &all {
            let (i, j) = m.vars();
            assert_eq!(Monomial::from_vars(i, j), *m);
        }
        assert_eq!(all[0], Monomial::ETA2_ETA2);
        assert_eq!(all[9], Monomial::XI1_XI1);
    }

    #[test]
    fn bracket_of_xi1eta1_with_xi1_squared() {
        let f = constant_form(Monomial::XI1_ETA1, cplx(1.0, 0.0));
        let g = constant_form(Monomial::XI1_XI1, cplx(1.0, 0.0));
        let h = poisson_bracket(&f, &g);
        assert_eq!(h.terms().count(), 1);
        assert!((h.term(Monomial::XI1_XI1).mean() - cplx(0.0, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn bracket_self_is_zero() {
        let f = QuadHamiltonian::from_terms(
            1,
            1.0,
            ClassTag::Full,
            [
                (Monomial::XI1_XI2, TrigPoly::sin(&[1], 1.0)),
                (Monomial::ETA1_ETA2, TrigPoly::cos(&[2], 1.0)),
                (Monomial::XI2_ETA2, TrigPoly::constant(1, cplx(0.3, 0.0), 1.0)),
            ],
        )
        .unwrap();
        assert!(poisson_bracket(&f, &f).prune(1e-15).is_zero());
    }

    #[test]
    fn xi2_squared_commutes_with_landau_class() {
        let n = constant_form(Monomial::XI2_XI2, cplx(1.0, 0.0)).into_landau().unwrap();
        for m in Monomial::landau_class() {
            let q = QuadHamiltonian::from_terms(1, 1.0, ClassTag::Landau, [(m, TrigPoly::sin(&[1], 1.0))]).unwrap();
            assert!(poisson_bracket(&n, &q).is_zero(), "{m}");
        }
    }

    #[test]
    fn advection_term_signs() {
        let f = QuadHamiltonian::from_terms(1, 1.0, ClassTag::Full, [(Monomial::XI1_XI1, TrigPoly::sin(&[1], 1.0))])
            .unwrap();
        let zero = QuadHamiltonian::zero(1, 1.0, ClassTag::Full);
        let w = [2.0f64];
        // {F, ω·I} = ω ∂θ F
        let a = extended_bracket(None, &f, Some(&w), &zero);
        let expect: C<f64> = 2.0 * TrigPoly::cos(&[1], 1.0).coeff_at(&[1]);
        assert!((a.term(Monomial::XI1_XI1).coeff_at(&[1]) - expect).norm() < 1e-15);
        // {ω·I, F} = −ω ∂θ F
        let b = extended_bracket(Some(&w), &zero, None, &f);
        assert!((b.term(Monomial::XI1_XI1).coeff_at(&[1]) + expect).norm() < 1e-15);
    }

    #[test]
    fn matrix_roundtrip() {
        let f = QuadHamiltonian::from_terms(
            1,
            1.0,
            ClassTag::Full,
            Monomial::all()
                .into_iter()
                .enumerate()
                .map(|(i, m)| (m, TrigPoly::sin(&[i as i32 + 1], 1.0))),
        )
        .unwrap();
        let back = QuadHamiltonian::from_matrix(&f.to_matrix(), ClassTag::Full).unwrap();
        assert_eq!(back, f);
        // h(w) = ½ wᵀ S w
        let w = [cplx(0.3, 0.1), cplx(-0.2, 0.5), cplx(0.7, 0.0), cplx(0.1, -0.4)];
        let theta = [0.4];
        let s = f.matrix_at(&theta);
        let sw = s.mul_vec(&w);
        let quad: C<f64> = w.iter().zip(&sw).map(|(a, b)| a * b).sum::<C<f64>>() * 0.5;
        assert!((quad - f.evaluate(&theta, &w)).norm() < 1e-14);
    }

    #[test]
    fn landau_class_rejects_eta2() {
        let mut h = QuadHamiltonian::<f64>::zero(1, 1.0, ClassTag::Landau);
        assert!(h.add_term(Monomial::XI2_ETA2, &TrigPoly::sin(&[1], 1.0)).is_err());
    }

    #[test]
    fn reality_examples() {
        let h0 = constant_form(Monomial::XI1_ETA1, cplx(2.0, 0.0));
        assert!(reality_check(&h0).is_real);
        let bad = constant_form(Monomial::XI1_ETA1, cplx(0.0, 1.0));
        let r = reality_check(&bad);
        assert!(!r.is_real);
        assert!(r.max_violation > 0.5);
    }

    #[test]
    fn ambio_real_states_are_fixed() {
        let chart = RealChart::Ambio;
        let r = chart.involution::<f64>();
        for w in chart.sample_states::<f64>() {
            let conj: Vec<C<f64>> = w.iter().map(|z| z.conj()).collect();
            let img = r.mul_vec(&conj);
            for (a, b) in img.iter().zip(&w) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn normal_form_divisors() {
        let n = NormalForm::landau(2.0, 0.0);
        assert_eq!(n.divisor(Monomial::XI1_XI1, 0.0), cplx(0.0, 4.0));
        assert_eq!(n.divisor(Monomial::XI2_XI2, 2.4), cplx(0.0, 2.4));
        let s = NormalForm::symmetric(2.0, 0.1);
        assert!((s.divisor(Monomial::XI2_XI2, 0.0) - cplx(0.0, 0.2)).norm() < 1e-16);
    }

    #[test]
    fn json_roundtrip() {
        let f = QuadHamiltonian::from_terms(
            1,
            0.7,
            ClassTag::Landau,
            [
                (Monomial::XI1_XI2, TrigPoly::sin(&[1], 0.7).scale(cplx(0.1, 0.3))),
                (Monomial::XI2_XI2, TrigPoly::cos(&[2], 0.7)),
            ],
        )
        .unwrap();
        let s = serde_json::to_string(&f).unwrap();
        let back: QuadHamiltonian<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(s.starts_with("{\"class_tag\":\"landau\""));
    }

    fn arb_form(landau: bool) -> impl Strategy<Value = QuadHamiltonian<f64>> {
        let monos = if landau { Monomial::landau_class() } else { Monomial::all() };
        let n = monos.len();
        proptest::collection::vec(proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 5), n).prop_map(
            move |cs| {
                let terms = monos.iter().zip(cs).map(|(m, c)| {
                    let p = TrigPoly::from_coeffs(
                        1,
                        2,
                        1.0,
                        (-2..=2).zip(c).map(|(k, (a, b))| (crate::trigpoly::MultiIndex::new(&[k]), cplx(a, b))),
                    )
                    .unwrap();
                    (*m, p)
                });
                let class = if landau { ClassTag::Landau } else { ClassTag::Full };
                QuadHamiltonian::from_terms(1, 1.0, class, terms).unwrap()
            },
        )
    }

    fn max_diff(a: &QuadHamiltonian<f64>, b: &QuadHamiltonian<f64>) -> f64 {
        a.sub(b).max_abs_coeff()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bracket_bilinear(f in arb_form(false), g in arb_form(false), h in arb_form(false), s in -2.0f64..2.0) {
            let lhs = poisson_bracket(&f.add(&g.scale_real(s)), &h);
            let rhs = poisson_bracket(&f, &h).add(&poisson_bracket(&g, &h).scale_real(s));
            prop_assert!(max_diff(&lhs, &rhs) < 1e-11);
        }

        #[test]
        fn bracket_antisymmetric(f in arb_form(false), g in arb_form(false)) {
            let a = poisson_bracket(&f, &g);
            let b = poisson_bracket(&g, &f);
            prop_assert!(a.add(&b).max_abs_coeff() < 1e-11);
        }

        #[test]
        fn bracket_jacobi(f in arb_form(false), g in arb_form(false), h in arb_form(false)) {
            let j = poisson_bracket(&f, &poisson_bracket(&g, &h))
                .add(&poisson_bracket(&g, &poisson_bracket(&h, &f)))
                .add(&poisson_bracket(&h, &poisson_bracket(&f, &g)));
            prop_assert!(j.max_abs_coeff() < 1e-11);
        }

        #[test]
        fn extended_jacobi(f in arb_form(false), g in arb_form(false), h in arb_form(false)) {
            let w = [1.7];
            let b = |x: &QuadHamiltonian<f64>, y: &QuadHamiltonian<f64>, wx: bool, wy: bool| {
                extended_bracket(if wx { Some(&w[..]) } else { None }, x, if wy { Some(&w[..]) } else { None }, y)
            };
            // one member carries the ω·I term
            let j = b(&f, &b(&g, &h, false, false), true, false)
                .add(&b(&g, &b(&h, &f, false, true), false, false))
                .add(&b(&h, &b(&f, &g, true, false), false, false));
            prop_assert!(j.max_abs_coeff() < 1e-11);
        }

        #[test]
        fn landau_closure_with_normal_form(f in arb_form(true), a in -3.0f64..3.0, c in -1.0f64..1.0) {
            let n = NormalForm::landau(a, c).to_quad(1, 1.0);
            let h = poisson_bracket(&f, &n);
            prop_assert_eq!(h.class(), ClassTag::Landau);
            prop_assert!(h.eta2_content() == 0.0);
        }
    }
}
