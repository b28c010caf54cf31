//! Frequencies of the flow from the spectrum of the monodromy matrix.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::quadham::Gauge;
use crate::scalar::{cplx, Real, C};

use super::{fundamental_matrix, FlowSpec};

/// |det B|/‖B‖² below this marks a Jordan block at eigenvalue 1.
pub const JORDAN_RATIO: f64 = 1e-6;
/// ‖B‖ below this counts as the identity.
const TRIVIAL_BLOCK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RotationReport {
    /// (ν₁, ν₂), continued from the unperturbed (2B₀, 0).
    pub frequencies: [f64; 2],
    /// Forcing period 2π/|ω|.
    pub period: f64,
    /// μ = λ + 1/λ of the fast and slow eigenvalue pairs.
    pub mu: [f64; 2],
    /// The slow pair is a Jordan block at 1.
    pub jordan: bool,
    /// Secular x₁ velocity per unit p₁ when the slow pair is a Jordan block
    /// in the Landau gauge.
    pub landau_drift: Option<f64>,
    pub symplectic_defect: f64,
    pub warnings: Vec<String>,
}

type M = [[f64; 4]; 4];

fn mul(a: &M, b: &M) -> M {
    super::mul4(a, b)
}

fn lin(a: &M, x: f64, b: &M, y: f64) -> M {
    let mut c = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            c[i][j] = x * a[i][j] + y * b[i][j];
        }
    }
    c
}

fn eye() -> M {
    let mut m = [[0.0; 4]; 4];
    for (i, r) in m.iter_mut().enumerate() {
        r[i] = 1.0;
    }
    m
}

fn trace(m: &M) -> f64 {
    (0..4).map(|i| m[i][i]).sum()
}

/// Krein sign i·v̄ᵀJv of the eigenvector for λ.
fn krein(m: &M, lambda: C<f64>) -> f64 {
    let a = CMatrix::from_fn(4, |i, j| {
        let d = if i == j { lambda } else { cplx(0.0, 0.0) };
        cplx(m[i][j], 0.0) - d
    });
    let v = a.null_vector();
    // v̄ᵀJv with J = [[0, I], [−I, 0]]
    let q = v[0].conj() * v[2] + v[1].conj() * v[3] - v[2].conj() * v[0] - v[3].conj() * v[1];
    (cplx(0.0, 1.0) * q).re
}

/// 2×2 matrix of M − I on the range of q(M) = M² − μ·M + I.
fn restricted_shift(m: &M, q: &M) -> [[f64; 2]; 2] {
    let col = |j: usize| [q[0][j], q[1][j], q[2][j], q[3][j]];
    let dot = |a: &[f64; 4], b: &[f64; 4]| (0..4).map(|i| a[i] * b[i]).sum::<f64>();
    let norm = |a: &[f64; 4]| dot(a, a).sqrt();
    let mut cols: Vec<[f64; 4]> = (0..4).map(col).collect();
    cols.sort_by(|a, b| norm(b).total_cmp(&norm(a)));
    let u1 = cols[0].map(|x| x / norm(&cols[0]).max(f64::MIN_POSITIVE));
    let u2 = cols[1..]
        .iter()
        .map(|c| {
            let p = dot(c, &u1);
            let mut r = *c;
            for i in 0..4 {
                r[i] -= p * u1[i];
            }
            r
        })
        .max_by(|a, b| norm(a).total_cmp(&norm(b)))
        .expect("four columns");
    let u2 = u2.map(|x| x / norm(&u2).max(f64::MIN_POSITIVE));
    let shift = lin(m, 1.0, &eye(), -1.0);
    let apply = |u: &[f64; 4]| {
        let mut r = [0.0; 4];
        for (i, ri) in r.iter_mut().enumerate() {
            *ri = (0..4).map(|j| shift[i][j] * u[j]).sum();
        }
        r
    };
    let (b1, b2) = (apply(&u1), apply(&u2));
    [[dot(&u1, &b1), dot(&u1, &b2)], [dot(&u2, &b1), dot(&u2, &b2)]]
}

fn unwrap(nu: f64, spacing: f64, reference: f64) -> f64 {
    nu + ((reference - nu) / spacing).round() * spacing
}

/// Rotation numbers of a periodically forced flow (one forcing frequency).
/// The flow is periodic, so one period of the fundamental matrix carries the
/// whole spectrum.
pub fn rotation_numbers<T: Real>(spec: &FlowSpec<T>, dt: T) -> Result<RotationReport> {
    let omega = &spec.modulation.omega;
    if omega.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "rotation numbers need a single forcing frequency, got {}",
            omega.len()
        )));
    }
    let w = omega[0].as_f64().abs();
    if !(w > 0.0) {
        return Err(Error::InvalidParameter("forcing frequency must be nonzero".into()));
    }
    let period = std::f64::consts::TAU / w;
    let mono = fundamental_matrix(spec, T::zero(), T::lit(period), dt)?;
    let m: M = mono.matrix.map(|r| r.map(|x| x.as_f64()));
    analyze_monodromy(&m, period, spec.b0().as_f64(), spec.gauge, mono.symplectic_defect.as_f64())
}

pub(crate) fn analyze_monodromy(m: &M, period: f64, b0: f64, gauge: Gauge, defect: f64) -> Result<RotationReport> {
    let spacing = std::f64::consts::TAU / period;
    let mut warnings = Vec::new();
    let m2 = mul(m, m);
    let s1 = trace(m);
    let s2 = 0.5 * (s1 * s1 - trace(&m2));
    let mut disc = s1 * s1 - 4.0 * (s2 - 2.0);
    if disc < 0.0 {
        warnings.push(format!("complex quadruplet of multipliers (discriminant {disc:.3e})"));
        disc = 0.0;
    }
    let roots = [0.5 * (s1 + disc.sqrt()), 0.5 * (s1 - disc.sqrt())];
    // fast pair nearest its unperturbed multiplier sum
    let fast_ref = 2.0 * (2.0 * b0 * period).cos();
    let (mu_fast, mu_slow) = if (roots[0] - fast_ref).abs() + (roots[1] - 2.0).abs()
        <= (roots[1] - fast_ref).abs() + (roots[0] - 2.0).abs()
    {
        (roots[0], roots[1])
    } else {
        (roots[1], roots[0])
    };
    let references = [2.0 * b0, 0.0];

    let mut frequency = |mu: f64, reference: f64, label: &str| -> f64 {
        if mu.abs() > 2.0 + 1e-9 {
            warnings.push(format!("{label} pair is hyperbolic (mu = {mu:.12})"));
            return f64::NAN;
        }
        let phi = (0.5 * mu).clamp(-1.0, 1.0).acos();
        let sign = if phi == 0.0 {
            0.0
        } else if krein(m, C::from_polar(1.0, phi)) > 0.0 {
            -1.0
        } else {
            1.0
        };
        unwrap(sign * phi / period, spacing, reference)
    };

    let nu1 = frequency(mu_fast, references[0], "fast");

    // slow cluster: M − I restricted to the range of M² − μ_fast M + I
    let q = lin(&lin(&m2, 1.0, m, -mu_fast), 1.0, &eye(), 1.0);
    let b = restricted_shift(m, &q);
    let bnorm2: f64 = b.iter().flatten().map(|x| x * x).sum();
    let det = b[0][0] * b[1][1] - b[0][1] * b[1][0];
    let trivial = bnorm2.sqrt() < TRIVIAL_BLOCK;
    let jordan = !trivial && det.abs() / bnorm2 < JORDAN_RATIO;
    let nu2 = if trivial || jordan { 0.0 } else { frequency(mu_slow, references[1], "slow") };

    let landau_drift = (gauge == Gauge::Landau && (jordan || trivial)).then(|| {
        // R = q(M)/(2 − μ_fast) equals M on the slow cluster and 0 elsewhere
        let r = lin(&q, 1.0 / (2.0 - mu_fast), &eye(), 0.0);
        let n = lin(&mul(&r, &r), 1.0, &r, -1.0);
        n[0][2] / period
    });

    Ok(RotationReport {
        frequencies: [nu1, nu2],
        period,
        mu: [mu_fast, mu_slow],
        jordan,
        landau_drift,
        symplectic_defect: defect,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadham::Modulation;
    use crate::trigpoly::TrigPoly;

    fn spec(gauge: Gauge, eps: f64, w: f64) -> FlowSpec<f64> {
        FlowSpec::new(gauge, Modulation::new(1.0, eps, TrigPoly::sin(&[1], 1.0), vec![w]).unwrap())
    }

    #[test]
    fn unperturbed_frequencies() {
        for gauge in [Gauge::Landau, Gauge::Symmetric] {
            let s = spec(gauge, 0.0, 2.4);
            let r = rotation_numbers(&s, s.default_dt()).unwrap();
            assert!((r.frequencies[0] - 2.0).abs() < 1e-9, "{gauge:?} {r:?}");
            assert!(r.frequencies[1].abs() < 1e-9, "{gauge:?} {r:?}");
            assert!(r.warnings.is_empty());
        }
    }

    #[test]
    fn landau_slow_pair_is_a_jordan_block() {
        let s = spec(Gauge::Landau, 0.05, 2.4);
        let r = rotation_numbers(&s, s.default_dt()).unwrap();
        assert!(r.jordan, "{r:?}");
        let drift = r.landau_drift.unwrap();
        let c = crate::constants::c_omega(&TrigPoly::sin(&[1], 1.0), &[2.4], 1.0).unwrap() * 0.05 * 0.05;
        let predicted = -4.0 * c;
        assert!((drift / predicted - 1.0).abs() < 0.1, "{drift} vs {predicted}");
    }

    #[test]
    fn multi_frequency_rejected() {
        let f = TrigPoly::sin(&[1, 1], 1.0);
        let s = FlowSpec::new(Gauge::Landau, Modulation::new(1.0, 0.01, f, vec![2.4, 1.3]).unwrap());
        assert!(rotation_numbers(&s, 0.001).is_err());
    }
}
