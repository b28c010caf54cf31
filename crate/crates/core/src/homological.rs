//! Small-divisor screening and the one-step homological solver
//! {h, χ} + q = Ñ + r with h = ω·I + N.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadham::{extended_bracket, ClassTag, Monomial, NormalForm, NormalKind, QuadHamiltonian};
use crate::scalar::{dot_k, Real};
use crate::trigpoly::{MultiIndex, TrigPoly};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiophantineParams {
    pub gamma: f64,
    pub tau: f64,
}

impl DiophantineParams {
    pub fn new(gamma: f64, tau: f64) -> Result<Self> {
        if !(gamma > 0.0 && tau > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Diophantine constants must be positive, got γ={gamma}, τ={tau}"
            )));
        }
        Ok(Self { gamma, tau })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiophantineReport {
    pub passed: bool,
    /// min |divisor| / bound over both families; the check passes iff ≥ 1.
    pub worst_margin: f64,
    pub worst_k: Vec<i32>,
    /// true when the minimizer is |ω·k + 2B₀|, false for |ω·k|.
    pub worst_is_shifted: bool,
}

/// |ω·k + 2B₀| ≥ γ/(1+|k|^τ) for |k|₁ ≤ K (k = 0 included) and
/// |ω·k| ≥ γ/|k|^τ for 0 < |k|₁ ≤ K.
pub fn diophantine_check<T: Real>(omega: &[T], b0: T, params: DiophantineParams, k_max: u32) -> DiophantineReport {
    let mut rep = DiophantineReport {
        passed: true,
        worst_margin: f64::INFINITY,
        worst_k: vec![0; omega.len()],
        worst_is_shifted: true,
    };
    let two_b = 2.0 * b0.as_f64();
    let w: Vec<f64> = omega.iter().map(|x| x.as_f64()).collect();
    for k in MultiIndex::ball(omega.len(), k_max) {
        let n = k.l1() as f64;
        let wk = dot_k(&w, k.as_slice());
        let shifted = (wk + two_b).abs() * (1.0 + n.powf(params.tau)) / params.gamma;
        let mut consider = |m: f64, is_shifted: bool| {
            if m < rep.worst_margin {
                rep.worst_margin = m;
                rep.worst_k = k.as_slice().to_vec();
                rep.worst_is_shifted = is_shifted;
            }
        };
        consider(shifted, true);
        if !k.is_zero() {
            consider(wk.abs() * n.powf(params.tau) / params.gamma, false);
        }
    }
    rep.passed = rep.worst_margin >= 1.0;
    rep
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisorEntry {
    pub monomial: Monomial,
    pub k: MultiIndex,
    /// Imaginary part of i(ν₁(α₁−β₁) + ν₂(α₂−β₂) + ω·k); the real part is 0.
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Offender {
    pub monomial: Monomial,
    pub k: MultiIndex,
    pub modulus: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisorReport {
    pub entries: Vec<DivisorEntry>,
    pub min_modulus: f64,
    pub offending: Option<Offender>,
}

impl DivisorReport {
    fn from_entries(entries: Vec<DivisorEntry>) -> Self {
        let min_modulus = entries
            .iter()
            .map(|e| e.value.abs())
            .fold(f64::INFINITY, f64::min);
        Self {
            entries,
            min_modulus,
            offending: None,
        }
    }

    /// Marks the first entry, in storage order, that violates the thresholds.
    pub fn screen<T: Real>(mut self, base: &NormalForm<T>, thr: &Thresholds<T>) -> Self {
        self.offending = self.entries.iter().find_map(|e| {
            let t = thr.for_pair(base.kind, e.monomial, &e.k).as_f64();
            (e.value.abs() < t).then(|| Offender {
                monomial: e.monomial,
                k: e.k.clone(),
                modulus: e.value.abs(),
                threshold: t,
            })
        });
        self
    }
}

fn is_kernel(kind: NormalKind, m: Monomial, k: &MultiIndex) -> bool {
    k.is_zero() && kind.kernel().contains(&m)
}

fn class_monomials(kind: NormalKind) -> Vec<Monomial> {
    match kind {
        NormalKind::Landau => Monomial::landau_class(),
        NormalKind::Symmetric => Monomial::all(),
    }
}

/// All divisors of the non-kernel (monomial, k) pairs with |k|₁ ≤ K.
pub fn small_divisors<T: Real>(base: &NormalForm<T>, omega: &[T], k_max: u32) -> DivisorReport {
    let mut entries = Vec::new();
    for m in class_monomials(base.kind) {
        for k in MultiIndex::ball(omega.len(), k_max) {
            if is_kernel(base.kind, m, &k) {
                continue;
            }
            let d = base.divisor(m, dot_k(omega, k.as_slice()));
            entries.push(DivisorEntry {
                monomial: m,
                k,
                value: d.im.as_f64(),
            });
        }
    }
    DivisorReport::from_entries(entries)
}

/// Divisor thresholds. `slow` applies in the symmetric kind to the pairs
/// whose divisor is ±2iν₂ (ξ₂², η₂² at k = 0); `kappa` to every other pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds<T: Real> {
    pub kappa: T,
    pub slow: T,
}

impl<T: Real> Thresholds<T> {
    pub fn uniform(kappa: T) -> Self {
        Self { kappa, slow: kappa }
    }

    /// min(0.5ε², κ) for the slow pairs.
    pub fn nondegenerate(kappa: T, eps: T) -> Self {
        Self {
            kappa,
            slow: (T::lit(0.5) * eps * eps).min(kappa),
        }
    }

    pub fn for_pair(&self, kind: NormalKind, m: Monomial, k: &MultiIndex) -> T {
        let (d1, d2) = m.charge();
        if kind == NormalKind::Symmetric && k.is_zero() && d1 == 0 && d2 != 0 {
            self.slow
        } else {
            self.kappa
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomologicalSolution<T: Real> {
    pub chi: QuadHamiltonian<T>,
    /// Ñ: kernel averages.
    pub increment: NormalForm<T>,
    /// Modes above the cutoff, plus any imaginary part of the kernel
    /// averages (zero for real q).
    pub remainder: QuadHamiltonian<T>,
    /// Divisors of the pairs actually present in q.
    pub report: DivisorReport,
    /// max |{h,χ} + q − Ñ − r| over coefficients.
    pub residual: T,
}

fn matching_class<T: Real>(kind: NormalKind, q: &QuadHamiltonian<T>) -> Result<QuadHamiltonian<T>> {
    match (kind, q.class()) {
        (NormalKind::Landau, ClassTag::Landau) | (NormalKind::Symmetric, ClassTag::Full) => Ok(q.clone()),
        (NormalKind::Landau, ClassTag::Full) => q.clone().into_landau(),
        (NormalKind::Symmetric, ClassTag::Landau) => Ok(q.clone().into_full()),
    }
}

pub fn solve_homological<T: Real>(
    base: &NormalForm<T>,
    omega: &[T],
    q: &QuadHamiltonian<T>,
    kappa: T,
    k_max: u32,
) -> Result<HomologicalSolution<T>> {
    solve_homological_with(base, omega, q, Thresholds::uniform(kappa), k_max)
}

pub fn solve_homological_with<T: Real>(
    base: &NormalForm<T>,
    omega: &[T],
    q: &QuadHamiltonian<T>,
    thr: Thresholds<T>,
    k_max: u32,
) -> Result<HomologicalSolution<T>> {
    if omega.len() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            got: omega.len(),
        });
    }
    let q = matching_class(base.kind, q)?;
    let (dim, sigma, class) = (q.dim(), q.strip_width(), q.class());
    let mut chi = QuadHamiltonian::zero(dim, sigma, class);
    let mut rem = QuadHamiltonian::zero(dim, sigma, class);
    let mut inc = base.zero_like();
    let mut entries = Vec::new();
    let [m1, _] = base.kind.kernel();
    for (m, p) in q.terms() {
        let mut chi_c = Vec::new();
        let mut rem_c = Vec::new();
        for (k, c) in p.iter() {
            if k.l1() > k_max {
                rem_c.push((k.clone(), *c));
                continue;
            }
            if is_kernel(base.kind, *m, k) {
                if *m == m1 {
                    inc.a = c.re;
                } else {
                    inc.c = c.re;
                }
                if c.im != T::zero() {
                    rem_c.push((k.clone(), crate::scalar::cplx(T::zero(), c.im)));
                }
                continue;
            }
            let d = base.divisor(*m, dot_k(omega, k.as_slice()));
            let t = thr.for_pair(base.kind, *m, k);
            entries.push(DivisorEntry {
                monomial: *m,
                k: k.clone(),
                value: d.im.as_f64(),
            });
            if d.norm() < t {
                return Err(Error::Resonance {
                    k: k.as_slice().to_vec(),
                    monomial: *m,
                    modulus: d.norm().as_f64(),
                    threshold: t.as_f64(),
                });
            }
            chi_c.push((k.clone(), c / d));
        }
        let cut = p.cutoff();
        chi.add_term(*m, &TrigPoly::from_coeffs(dim, cut, sigma, chi_c)?)?;
        rem.add_term(*m, &TrigPoly::from_coeffs(dim, cut, sigma, rem_c)?)?;
    }
    let n_quad = inc.to_quad(dim, sigma);
    let resid = extended_bracket(Some(omega), &base.to_quad(dim, sigma), None, &chi)
        .add(&q)
        .sub(&n_quad)
        .sub(&rem)
        .max_abs_coeff();
    let scale = q.max_abs_coeff().max(T::one());
    let tol = T::lit(1e-11).max(T::precision() * T::lit(4e4)) * scale;
    if !(resid <= tol) {
        return Err(Error::Consistency {
            what: "homological identity {h,χ}+q = Ñ+r".into(),
            discrepancy: resid.as_f64(),
            tolerance: tol.as_f64(),
        });
    }
    Ok(HomologicalSolution {
        chi,
        increment: inc,
        remainder: rem,
        report: DivisorReport::from_entries(entries),
        residual: resid,
    })
}

/// Solve with no truncation and only the exact-resonance guard.
pub fn solve_exact<T: Real>(
    base: &NormalForm<T>,
    omega: &[T],
    q: &QuadHamiltonian<T>,
) -> Result<(QuadHamiltonian<T>, NormalForm<T>, QuadHamiltonian<T>)> {
    let s = solve_homological(base, omega, q, T::lit(1e-8), q.effective_cutoff())?;
    Ok((s.chi, s.increment, s.remainder))
}
