//! Gauge-specific Hamiltonians, phase-space charts and the field check.

use serde::{Deserialize, Serialize};

use super::{ClassTag, Monomial, NormalForm, QuadHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::{cplx, Real, C};
use crate::trigpoly::TrigPoly;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Gauge {
    /// A = B(x₂, 0).
    Landau,
    /// A = (B/2)(x₂, −x₁).
    Symmetric,
}

/// Complexified system H = h₀ + ε r₁ + ε² r₂ for one gauge.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeSystem<T: Real> {
    pub gauge: Gauge,
    pub b0: T,
    pub eps: T,
    pub forcing: TrigPoly<T>,
    pub base: NormalForm<T>,
    /// ε r₁
    pub first_order: QuadHamiltonian<T>,
    /// ε² r₂
    pub second_order: QuadHamiltonian<T>,
}

impl<T: Real> GaugeSystem<T> {
    pub fn dim(&self) -> usize {
        self.forcing.dim()
    }

    pub fn strip_width(&self) -> T {
        self.forcing.strip_width()
    }

    pub fn perturbation(&self) -> QuadHamiltonian<T> {
        self.first_order.add(&self.second_order)
    }

    pub fn hamiltonian(&self) -> QuadHamiltonian<T> {
        self.base
            .to_quad(self.dim(), self.strip_width())
            .add(&self.perturbation())
    }
}

pub(crate) fn validate_inputs<T: Real>(b0: T, eps: T, f: &TrigPoly<T>) -> Result<()> {
    if !(b0 > T::zero()) || !b0.is_finite() {
        return Err(Error::InvalidParameter(format!("B0 must be positive, got {b0}")));
    }
    if !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("epsilon must be finite, got {eps}")));
    }
    let scale = f.max_abs_coeff().max(T::one());
    if f.conj_symmetry_defect() > T::lit(1e-14) * scale {
        return Err(Error::InvalidParameter("forcing must be real-valued".into()));
    }
    if f.mean().norm() > T::lit(1e-14) * scale {
        return Err(Error::InvalidParameter(format!(
            "forcing must have zero mean, got {}",
            f.mean()
        )));
    }
    Ok(())
}

fn term<T: Real>(p: &TrigPoly<T>, re: f64, im: f64) -> TrigPoly<T> {
    p.scale(cplx(T::lit(re), T::lit(im)))
}

/// Landau gauge in the chart ξ₁ = z₁, ξ₂ = z₂ − z̄₂, η₁ = z̄₁, η₂ = z̄₂:
/// h₀ = 2B₀ξ₁η₁, r₁ = f[(ξ₁ + η₁)² − iξ₂(ξ₁ + η₁)],
/// r₂ = (f²/2B₀)(ξ₁ + η₁ − iξ₂)².
pub fn build_landau<T: Real>(b0: T, eps: T, f: &TrigPoly<T>) -> Result<GaugeSystem<T>> {
    validate_inputs(b0, eps, f)?;
    let (dim, sigma) = (f.dim(), f.strip_width());
    let ef = f.scale_real(eps);
    let f2 = f.product(f)?.scale_real(eps * eps / (T::lit(2.0) * b0));
    let first = QuadHamiltonian::from_terms(
        dim,
        sigma,
        ClassTag::Landau,
        [
            (Monomial::XI1_XI1, term(&ef, 1.0, 0.0)),
            (Monomial::XI1_ETA1, term(&ef, 2.0, 0.0)),
            (Monomial::ETA1_ETA1, term(&ef, 1.0, 0.0)),
            (Monomial::XI1_XI2, term(&ef, 0.0, -1.0)),
            (Monomial::XI2_ETA1, term(&ef, 0.0, -1.0)),
        ],
    )?;
    let second = QuadHamiltonian::from_terms(
        dim,
        sigma,
        ClassTag::Landau,
        [
            (Monomial::XI1_XI1, term(&f2, 1.0, 0.0)),
            (Monomial::XI1_ETA1, term(&f2, 2.0, 0.0)),
            (Monomial::ETA1_ETA1, term(&f2, 1.0, 0.0)),
            (Monomial::XI1_XI2, term(&f2, 0.0, -2.0)),
            (Monomial::XI2_ETA1, term(&f2, 0.0, -2.0)),
            (Monomial::XI2_XI2, term(&f2, -1.0, 0.0)),
        ],
    )?;
    Ok(GaugeSystem {
        gauge: Gauge::Landau,
        b0,
        eps,
        forcing: f.clone(),
        base: NormalForm::landau(T::lit(2.0) * b0, T::zero()),
        first_order: first,
        second_order: second,
    })
}

/// Symmetric gauge in the standard chart:
/// h₀ = 2B₀ξ₁η₁, r₁ = f[2ξ₁η₁ − ξ₁ξ₂ − η₁η₂],
/// r₂ = (f²/2B₀)[ξ₁η₁ + ξ₂η₂ − ξ₁ξ₂ − η₁η₂].
pub fn build_symmetric<T: Real>(b0: T, eps: T, f: &TrigPoly<T>) -> Result<GaugeSystem<T>> {
    validate_inputs(b0, eps, f)?;
    let (dim, sigma) = (f.dim(), f.strip_width());
    let ef = f.scale_real(eps);
    let f2 = f.product(f)?.scale_real(eps * eps / (T::lit(2.0) * b0));
    let first = QuadHamiltonian::from_terms(
        dim,
        sigma,
        ClassTag::Full,
        [
            (Monomial::XI1_ETA1, term(&ef, 2.0, 0.0)),
            (Monomial::XI1_XI2, term(&ef, -1.0, 0.0)),
            (Monomial::ETA1_ETA2, term(&ef, -1.0, 0.0)),
        ],
    )?;
    let second = QuadHamiltonian::from_terms(
        dim,
        sigma,
        ClassTag::Full,
        [
            (Monomial::XI1_ETA1, term(&f2, 1.0, 0.0)),
            (Monomial::XI2_ETA2, term(&f2, 1.0, 0.0)),
            (Monomial::XI1_XI2, term(&f2, -1.0, 0.0)),
            (Monomial::ETA1_ETA2, term(&f2, -1.0, 0.0)),
        ],
    )?;
    Ok(GaugeSystem {
        gauge: Gauge::Symmetric,
        b0,
        eps,
        forcing: f.clone(),
        base: NormalForm::symmetric(T::lit(2.0) * b0, T::zero()),
        first_order: first,
        second_order: second,
    })
}

/// Cartesian quadratic forms (A₀, A₁, A₂) with H = ½xᵀ(A₀ + B A₁ + B² A₂)x,
/// x = (x₁, x₂, p₁, p₂), H = |p − A(x)|².
pub fn cartesian_forms<T: Real>(gauge: Gauge) -> [[[T; 4]; 4]; 3] {
    let z = T::zero();
    let mut a = [[[z; 4]; 4]; 3];
    a[0][2][2] = T::lit(2.0);
    a[0][3][3] = T::lit(2.0);
    match gauge {
        Gauge::Landau => {
            a[1][1][2] = T::lit(-2.0);
            a[1][2][1] = T::lit(-2.0);
            a[2][1][1] = T::lit(2.0);
        }
        Gauge::Symmetric => {
            a[1][1][2] = T::lit(-1.0);
            a[1][2][1] = T::lit(-1.0);
            a[1][0][3] = T::one();
            a[1][3][0] = T::one();
            a[2][0][0] = T::lit(0.5);
            a[2][1][1] = T::lit(0.5);
        }
    }
    a
}

/// Real symplectic map x = (x₁, x₂, p₁, p₂) ↦ (q₁, q₂, P₁, P₂) of the gauge's
/// chart; z_j = (q_j + iP_j)/√2.
pub fn canonical_matrix<T: Real>(gauge: Gauge, b0: T) -> [[T; 4]; 4] {
    let r = b0.sqrt();
    let ir = T::one() / r;
    let z = T::zero();
    let h = T::lit(0.5);
    match gauge {
        Gauge::Landau => [
            [z, r, -ir, z],
            [r, z, z, -ir],
            [z, z, z, ir],
            [z, z, ir, z],
        ],
        Gauge::Symmetric => [
            [z, h * r, -ir, z],
            [z, -h * r, -ir, z],
            [h * r, z, z, ir],
            [h * r, z, z, -ir],
        ],
    }
}

/// Complex matrix x ↦ w = (ξ₁, ξ₂, η₁, η₂) of the gauge's working chart
/// (ξ₂ = z₂ − z̄₂ for the Landau gauge).
pub fn phase_matrix<T: Real>(gauge: Gauge, b0: T) -> CMatrix<T> {
    let m = canonical_matrix(gauge, b0);
    let s = T::FRAC_1_SQRT_2();
    let z_row = |j: usize, sign: T| -> Vec<C<T>> {
        (0..4)
            .map(|c| cplx(m[j][c] * s, sign * m[j + 2][c] * s))
            .collect()
    };
    let rows = [
        z_row(0, T::one()),
        z_row(1, T::one()),
        z_row(0, -T::one()),
        z_row(1, -T::one()),
    ];
    // rows: z₁, z₂, z̄₁, z̄₂
    CMatrix::from_fn(4, |i, c| match (gauge, i) {
        (Gauge::Landau, 1) => rows[1][c] - rows[3][c],
        _ => rows[i][c],
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    Cartesian,
    /// Landau complex chart (z₁, z₂).
    Landau,
    /// Symmetric complex chart (z₁, z₂).
    Symmetric,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
#[serde(tag = "chart", rename_all = "lowercase")]
pub enum PhasePoint<T: Real> {
    Cartesian { x: [T; 2], p: [T; 2] },
    Landau { z: [C<T>; 2] },
    Symmetric { z: [C<T>; 2] },
}

impl<T: Real> PhasePoint<T> {
    pub fn kind(&self) -> ChartKind {
        match self {
            PhasePoint::Cartesian { .. } => ChartKind::Cartesian,
            PhasePoint::Landau { .. } => ChartKind::Landau,
            PhasePoint::Symmetric { .. } => ChartKind::Symmetric,
        }
    }

    fn to_cartesian(self, b0: T) -> Result<[T; 4]> {
        let (gauge, z) = match self {
            PhasePoint::Cartesian { x, p } => return Ok([x[0], x[1], p[0], p[1]]),
            PhasePoint::Landau { z } => (Gauge::Landau, z),
            PhasePoint::Symmetric { z } => (Gauge::Symmetric, z),
        };
        let r = T::SQRT_2();
        let qp = [z[0].re * r, z[1].re * r, z[0].im * r, z[1].im * r];
        let m = canonical_matrix(gauge, b0);
        let inv = CMatrix::from_real(4, |i, j| m[i][j])
            .inverse()
            .ok_or_else(|| Error::InvalidParameter("singular chart".into()))?;
        let mut x = [T::zero(); 4];
        for (i, xi) in x.iter_mut().enumerate() {
            *xi = (0..4).fold(T::zero(), |a, j| a + inv[(i, j)].re * qp[j]);
        }
        Ok(x)
    }
}

/// Maps a phase point between the Cartesian chart and the two complex charts.
pub fn chart_map<T: Real>(point: PhasePoint<T>, target: ChartKind, b0: T) -> Result<PhasePoint<T>> {
    if !(b0 > T::zero()) {
        return Err(Error::InvalidParameter(format!("B0 must be positive, got {b0}")));
    }
    if point.kind() == target {
        return Ok(point);
    }
    let x = point.to_cartesian(b0)?;
    let gauge = match target {
        ChartKind::Cartesian => {
            return Ok(PhasePoint::Cartesian {
                x: [x[0], x[1]],
                p: [x[2], x[3]],
            })
        }
        ChartKind::Landau => Gauge::Landau,
        ChartKind::Symmetric => Gauge::Symmetric,
    };
    let m = canonical_matrix(gauge, b0);
    let row = |j: usize| (0..4).fold(T::zero(), |a, c| a + m[j][c] * x[c]);
    let s = T::FRAC_1_SQRT_2();
    let z = [cplx(row(0) * s, row(2) * s), cplx(row(1) * s, row(3) * s)];
    Ok(match gauge {
        Gauge::Landau => PhasePoint::Landau { z },
        Gauge::Symmetric => PhasePoint::Symmetric { z },
    })
}

/// B(t) = B₀ + ε f(ωt).
#[derive(Clone, Debug, PartialEq)]
pub struct Modulation<T: Real> {
    pub b0: T,
    pub eps: T,
    pub forcing: TrigPoly<T>,
    pub omega: Vec<T>,
}

impl<T: Real> Modulation<T> {
    pub fn new(b0: T, eps: T, forcing: TrigPoly<T>, omega: Vec<T>) -> Result<Self> {
        validate_inputs(b0, eps, &forcing)?;
        if omega.len() != forcing.dim() {
            return Err(Error::DimensionMismatch {
                expected: forcing.dim(),
                got: omega.len(),
            });
        }
        Ok(Self {
            b0,
            eps,
            forcing,
            omega,
        })
    }

    fn angle(&self, t: T) -> Vec<T> {
        self.omega.iter().map(|&w| w * t).collect()
    }

    pub fn b(&self, t: T) -> T {
        self.b0 + self.eps * self.forcing.evaluate_real(&self.angle(t)).re
    }

    pub fn db(&self, t: T) -> T {
        self.eps * self.forcing.advect(&self.omega).evaluate_real(&self.angle(t)).re
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PotentialFamily {
    /// A = B(x₂, 0), U = 0.
    Landau,
    /// A = (B/2)(x₂, −x₁), U = 0.
    Symmetric,
    /// A = (B/2)(x₂, −x₁), U = (B'/2)x₁x₂.
    SymmetricWithScalar,
}

impl PotentialFamily {
    /// A = B(t)·K·x and U = B'(t)·½xᵀQx.
    fn coefficients<T: Real>(&self) -> ([[T; 2]; 2], [[T; 2]; 2]) {
        let (z, h, one) = (T::zero(), T::lit(0.5), T::one());
        match self {
            PotentialFamily::Landau => ([[z, one], [z, z]], [[z, z], [z, z]]),
            PotentialFamily::Symmetric => ([[z, h], [-h, z]], [[z, z], [z, z]]),
            PotentialFamily::SymmetricWithScalar => ([[z, h], [-h, z]], [[z, h], [h, z]]),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize)]
pub struct FieldSample<T: Real> {
    /// Field strength B(t); the field vector is (0, 0, −B).
    pub b: T,
    /// ∂₁A₂ − ∂₂A₁
    pub curl: T,
    /// E = −∂ₜA − ∇U
    pub e: [T; 2],
}

/// Fields generated by one of the supported potential families.
pub fn fields_from_potentials<T: Real>(
    family: PotentialFamily,
    modulation: &Modulation<T>,
    t: T,
    x: [T; 2],
) -> FieldSample<T> {
    let (k, q) = family.coefficients::<T>();
    let b = modulation.b(t);
    let db = modulation.db(t);
    let curl = b * (k[1][0] - k[0][1]);
    let e = [
        -db * (k[0][0] * x[0] + k[0][1] * x[1]) - db * (q[0][0] * x[0] + q[0][1] * x[1]),
        -db * (k[1][0] * x[0] + k[1][1] * x[1]) - db * (q[1][0] * x[0] + q[1][1] * x[1]),
    ];
    FieldSample { b: -curl, curl, e }
}
