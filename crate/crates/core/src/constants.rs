//! Closed forms of the first two reduction steps: g_ω, c_ω, h, d_ω, a_ω, χ₁.
//!
//! Averages over the torus are normalized means.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadham::{ClassTag, Monomial, QuadHamiltonian};
use crate::scalar::{cplx, Real, C};
use crate::trigpoly::{MultiIndex, TorusGrid, TrigPoly};

/// |divisor| < 1e-8·(1 + |k|₁) counts as resonant.
pub fn resonance_threshold<T: Real>(k: &MultiIndex) -> T {
    T::lit(1e-8) * (T::one() + T::from_int(k.l1() as i64))
}

fn check<T: Real>(value: T, k: &MultiIndex, monomial: Monomial) -> Result<T> {
    let thr = resonance_threshold::<T>(k);
    if value.abs() < thr {
        return Err(Error::Resonance {
            k: k.as_slice().to_vec(),
            monomial,
            modulus: value.abs().as_f64(),
            threshold: thr.as_f64(),
        });
    }
    Ok(value)
}

fn omega_k<T: Real>(omega: &[T], k: &MultiIndex) -> T {
    crate::scalar::dot_k(omega, k.as_slice())
}

fn check_dims<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T) -> Result<()> {
    if omega.len() != f.dim() {
        return Err(Error::DimensionMismatch {
            expected: f.dim(),
            got: omega.len(),
        });
    }
    crate::quadham::gauge::validate_inputs(b0, T::zero(), f)
}

/// Σ_{k≠0} |f̂(k)|² w(ω·k), with each divisor screened first.
fn weighted_sum<T: Real>(
    f: &TrigPoly<T>,
    omega: &[T],
    divisor: impl Fn(T) -> (T, Monomial),
    weight: impl Fn(T) -> T,
) -> Result<T> {
    let mut s = T::zero();
    for (k, c) in f.iter() {
        if k.is_zero() {
            continue;
        }
        let wk = omega_k(omega, k);
        let (d, m) = divisor(wk);
        check(d, k, m)?;
        s = s + (c * f.coeff(&k.neg())).re * weight(wk);
    }
    Ok(s)
}

/// g_ω(θ) = −(2B₀)^{-1/2} Σ_{k≠0} ω·k/(ω·k + 2B₀) f̂(k) e^{ik·θ}.
pub fn g_omega<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T) -> Result<TrigPoly<T>> {
    check_dims(f, omega, b0)?;
    let two_b = T::lit(2.0) * b0;
    let pre = -(T::one() / two_b.sqrt());
    for (k, _) in f.iter().filter(|(k, _)| !k.is_zero()) {
        check(omega_k(omega, k) + two_b, k, Monomial::XI1_XI2)?;
    }
    Ok(f.map_indexed(|k, c| {
        if k.is_zero() {
            return C::new(T::zero(), T::zero());
        }
        let wk = omega_k(omega, k);
        c * (pre * wk / (wk + two_b))
    }))
}

/// h(θ) = −(2B₀)^{-1/2} Σ (ω·k + 2iB₀)/(ω·k + 2B₀) f̂(k) e^{ik·θ}.
pub fn h_omega<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T) -> Result<TrigPoly<T>> {
    check_dims(f, omega, b0)?;
    let two_b = T::lit(2.0) * b0;
    let pre = -(T::one() / two_b.sqrt());
    for (k, _) in f.iter().filter(|(k, _)| !k.is_zero()) {
        check(omega_k(omega, k) + two_b, k, Monomial::XI1_XI2)?;
    }
    Ok(f.map_indexed(|k, c| {
        if k.is_zero() {
            return C::new(T::zero(), T::zero());
        }
        let wk = omega_k(omega, k);
        c * cplx(wk, two_b) * (pre / (wk + two_b))
    }))
}

/// Mean over the torus of p², exact for a trigonometric polynomial.
fn mean_square<T: Real>(p: &TrigPoly<T>) -> C<T> {
    let side = 4 * p.effective_cutoff().max(1) as usize + 2;
    let grid = TorusGrid::new(p.dim(), side);
    let vals = p.sample(grid);
    let n = T::from_usize_lossy(vals.len());
    vals.iter().fold(C::new(T::zero(), T::zero()), |a, v| a + v * v) / n
}

fn agree<T: Real>(what: &str, a: T, b: T) -> Result<()> {
    let tol = T::lit(1e-10) * (T::one() + a.abs().max(b.abs()));
    if (a - b).abs() > tol {
        return Err(Error::Consistency {
            what: what.into(),
            discrepancy: (a - b).abs().as_f64(),
            tolerance: tol.as_f64(),
        });
    }
    Ok(())
}

fn two_b_divisor<T: Real>(two_b: T) -> impl Fn(T) -> (T, Monomial) {
    move |wk: T| ((wk - two_b).abs().min((wk + two_b).abs()), Monomial::XI1_XI2)
}

/// c_ω = −(1/2B₀) Σ |f̂(k)|² (ω·k)²/((ω·k)² − 4B₀²), cross-checked against
/// −⟨g_ω²⟩.
pub fn c_omega<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T) -> Result<T> {
    check_dims(f, omega, b0)?;
    let two_b = T::lit(2.0) * b0;
    let series = -weighted_sum(f, omega, two_b_divisor(two_b), |wk| {
        wk * wk / (wk * wk - two_b * two_b)
    })? / two_b;
    let quad = -mean_square(&g_omega(f, omega, b0)?).re;
    agree("c_omega series vs quadrature", series, quad)?;
    Ok(series)
}

/// d_ω = (1/4B₀) Σ |f̂(ℓ)|² ((ℓ·ω)² + 4B₀²)/((ℓ·ω)² − 4B₀²), cross-checked
/// against ½⟨h²⟩ (h complex-valued, ⟨h²⟩ real).
pub fn d_omega<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T) -> Result<T> {
    check_dims(f, omega, b0)?;
    let two_b = T::lit(2.0) * b0;
    let series = weighted_sum(f, omega, two_b_divisor(two_b), |wk| {
        (wk * wk + two_b * two_b) / (wk * wk - two_b * two_b)
    })? / (T::lit(2.0) * two_b);
    let m = mean_square(&h_omega(f, omega, b0)?);
    let im_tol = T::lit(1e-10) * (T::one() + m.re.abs());
    if m.im.abs() > im_tol {
        return Err(Error::Consistency {
            what: "imaginary part of the mean of h²".into(),
            discrepancy: m.im.abs().as_f64(),
            tolerance: im_tol.as_f64(),
        });
    }
    agree("d_omega series vs quadrature", series, m.re * T::lit(0.5))?;
    Ok(series)
}

/// a_ω = (1/B₀) Σ |f̂(k)|² (ω·k)²/((ω·k)² − 16B₀²).
pub fn a_omega<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T) -> Result<T> {
    check_dims(f, omega, b0)?;
    let four_b = T::lit(4.0) * b0;
    let s = weighted_sum(
        f,
        omega,
        |wk| ((wk - four_b).abs().min((wk + four_b).abs()), Monomial::XI1_XI1),
        |wk| wk * wk / (wk * wk - four_b * four_b),
    )?;
    Ok(s / b0)
}

/// Second-order ξ₂η₂ frequency of the symmetric gauge, per ε²:
/// (1/2B₀) Σ |f̂(k)|² (ω·k)²/((ω·k)² − 4B₀²). This is what the bracket
/// engine produces for the average of ½{χ₁, r₁} + r₂; it equals −c_ω.
pub fn slow_coefficient<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T) -> Result<T> {
    check_dims(f, omega, b0)?;
    let two_b = T::lit(2.0) * b0;
    let s = weighted_sum(f, omega, two_b_divisor(two_b), |wk| {
        wk * wk / (wk * wk - two_b * two_b)
    })?;
    Ok(s / two_b)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepConstants {
    pub b0: f64,
    pub omega: Vec<f64>,
    pub c_omega: f64,
    pub d_omega: f64,
    pub a_omega: f64,
    pub slow_coeff: f64,
}

pub fn step_constants<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T) -> Result<StepConstants> {
    Ok(StepConstants {
        b0: b0.as_f64(),
        omega: omega.iter().map(|w| w.as_f64()).collect(),
        c_omega: c_omega(f, omega, b0)?.as_f64(),
        d_omega: d_omega(f, omega, b0)?.as_f64(),
        a_omega: a_omega(f, omega, b0)?.as_f64(),
        slow_coeff: slow_coefficient(f, omega, b0)?.as_f64(),
    })
}

/// χ₁ in the Landau working chart (z₁ = ξ₁, z̄₁ = η₁, z₂ − z̄₂ = ξ₂):
/// iε Σ f̂ e^{ik·θ}(ξ₁²/(ω·k+4B₀) + η₁²/(ω·k−4B₀) + 2ξ₁η₁/ω·k)
/// + ε ξ₂ Σ f̂ e^{ik·θ}(ξ₁/(ω·k+2B₀) + η₁/(ω·k−2B₀)).
pub fn chi1_landau<T: Real>(f: &TrigPoly<T>, omega: &[T], b0: T, eps: T) -> Result<QuadHamiltonian<T>> {
    check_dims(f, omega, b0)?;
    let two_b = T::lit(2.0) * b0;
    let four_b = T::lit(4.0) * b0;
    let parts: [(Monomial, T, C<T>); 5] = [
        (Monomial::XI1_XI1, four_b, cplx(T::zero(), eps)),
        (Monomial::ETA1_ETA1, -four_b, cplx(T::zero(), eps)),
        (Monomial::XI1_ETA1, T::zero(), cplx(T::zero(), T::lit(2.0) * eps)),
        (Monomial::XI1_XI2, two_b, cplx(eps, T::zero())),
        (Monomial::XI2_ETA1, -two_b, cplx(eps, T::zero())),
    ];
    for (k, _) in f.iter().filter(|(k, _)| !k.is_zero()) {
        for (m, shift, _) in &parts {
            check(omega_k(omega, k) + *shift, k, *m)?;
        }
    }
    let mut chi = QuadHamiltonian::zero(f.dim(), f.strip_width(), ClassTag::Landau);
    for (m, shift, pre) in parts {
        let p = f.map_indexed(|k, c| {
            if k.is_zero() {
                return C::new(T::zero(), T::zero());
            }
            c * pre / (omega_k(omega, k) + shift)
        });
        chi.add_term(m, &p)?;
    }
    Ok(chi)
}

/// Header of [`constants_table`].
pub const TABLE_HEADER: &str = "omega,b0,c_omega,d_omega,a_omega,slow_coeff,status";

/// One CSV row per frequency vector. Components of ω are joined with ';'.
/// Resonant rows keep empty value columns and status `resonant`.
pub fn constants_table(f: &TrigPoly<f64>, omegas: &[Vec<f64>], b0: f64) -> Result<String> {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for w in omegas {
        let label = w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";");
        match step_constants(f, w, b0) {
            Ok(c) => out.push_str(&format!(
                "{label},{b0},{},{},{},{},ok\n",
                c.c_omega + 0.0, c.d_omega + 0.0, c.a_omega + 0.0, c.slow_coeff + 0.0
            )),
            Err(Error::Resonance { .. }) => out.push_str(&format!("{label},{b0},,,,,resonant\n")),
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
