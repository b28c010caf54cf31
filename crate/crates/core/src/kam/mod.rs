//! Iterative reduction to a constant normal form.
//!
//! The perturbation is removed step by step: each step solves the
//! homological equation for χ, then transports the whole Hamiltonian exactly
//! through e^{iJS_χ}. The bracket orientation runs the physical flow
//! backwards, so internally the iteration uses the frequency −ω; the composed
//! map is the physical conjugacy.

pub mod generator;
pub mod schedule;
pub mod transport;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::homological::{solve_homological_with, Thresholds};
use crate::quadham::{ClassTag, Gauge, GaugeSystem, Monomial, NormalForm, NormalKind, PolyMatrix, QuadHamiltonian};
use crate::scalar::Real;

pub use generator::{assemble_generator, GeneratorSeries};
pub use schedule::{make_schedule, make_schedule_scaled, Schedule, ScheduleStep, DEFAULT_KAPPA_SCALE, DEFAULT_MAX_STEPS};
pub use transport::{generator_matrix, transport, Transported};

/// Steps stop once [q] drops below this.
pub const NORM_FLOOR: f64 = 1e-13;
/// ‖X‖₁ above this on the grid counts as a failed step.
pub const GENERATOR_LIMIT: f64 = 20.0;

fn norm_floor<T: Real>() -> T {
    T::lit(NORM_FLOOR).max(T::precision() * T::lit(450.0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum KamStatus {
    Converged,
    Resonant {
        step: usize,
        k: Vec<i32>,
        monomial: Monomial,
        modulus: f64,
        threshold: f64,
    },
    Diverged {
        step: usize,
        reason: String,
    },
}

impl KamStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, KamStatus::Converged)
    }

    pub fn label(&self) -> &'static str {
        match self {
            KamStatus::Converged => "converged",
            KamStatus::Resonant { .. } => "resonant",
            KamStatus::Diverged { .. } => "diverged",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepDiagnostics {
    pub m: usize,
    pub sigma: f64,
    pub cutoff: u32,
    pub kappa: f64,
    pub eps_target: f64,
    /// [q_{m−1}] at σ_{m−1}
    pub q_in: f64,
    /// [q_m] at σ_m
    pub q_out: f64,
    pub min_divisor: f64,
    /// Ñ_m as (ξ₁η₁, second kernel monomial)
    pub increment: [f64; 2],
    /// [χ_m] at σ_m
    pub chi_norm: f64,
    pub generator_sup: f64,
    pub grid_side: usize,
    /// η₂ content dropped after a Landau-class step
    pub eta2_leak: f64,
}

#[derive(Clone, Debug)]
pub struct KamResult<T: Real> {
    pub status: KamStatus,
    pub gauge: Gauge,
    pub omega: Vec<T>,
    pub eps: T,
    pub normal_form: NormalForm<T>,
    /// [q_0], [q_1], … at σ₀, σ₁, …
    pub q_norms: Vec<f64>,
    pub steps: Vec<StepDiagnostics>,
    pub chis: Vec<QuadHamiltonian<T>>,
    pub remainder: QuadHamiltonian<T>,
    pub generator: GeneratorSeries<T>,
}

impl<T: Real> KamResult<T> {
    pub fn final_q(&self) -> f64 {
        self.q_norms.last().copied().unwrap_or(0.0)
    }
}

impl KamResult<f64> {
    pub fn to_json(&self, include_generator: bool) -> Value {
        let mut v = json!({
            "status": self.status,
            "gauge": self.gauge,
            "omega": self.omega,
            "eps": self.eps,
            "normal_form": self.normal_form,
            "q_norms": self.q_norms,
            "diagnostics": self.steps,
        });
        if include_generator {
            let entries: Vec<Value> = self
                .generator
                .a
                .entries()
                .iter()
                .map(|p| serde_json::to_value(p).expect("serializable"))
                .collect();
            v["generator"] = json!({ "grid_side": self.generator.grid_side, "a": entries });
        }
        v
    }
}

/// Output of one step.
#[derive(Clone, Debug)]
pub struct StepOutcome<T: Real> {
    pub normal_form: NormalForm<T>,
    pub q: QuadHamiltonian<T>,
    pub chi: QuadHamiltonian<T>,
    pub x: PolyMatrix<T>,
    pub min_divisor: f64,
    pub increment: NormalForm<T>,
    pub generator_sup: T,
    pub grid_side: usize,
    pub eta2_leak: T,
}

/// One step: {h, χ} = Ñ − q + r, then H ↦ H∘e^{χ} exactly. `omega` is the
/// physical frequency.
pub fn kam_step<T: Real>(
    normal_form: &NormalForm<T>,
    q: &QuadHamiltonian<T>,
    omega: &[T],
    step: &ScheduleStep,
    thresholds: Thresholds<T>,
) -> Result<StepOutcome<T>> {
    let wb: Vec<T> = omega.iter().map(|w| -*w).collect();
    let sol = solve_homological_with(normal_form, &wb, q, thresholds, step.cutoff)?;
    let (dim, sigma) = (q.dim(), q.strip_width());
    let h = normal_form.to_quad(dim, sigma).add(q);
    let moved = transport::transport(&h, &sol.chi, &wb)?;
    let nf = normal_form.plus(&sol.increment);
    let (hn, leak) = match normal_form.kind {
        NormalKind::Landau => {
            let leak = moved.h.eta2_content();
            let tol = T::lit(1e-10) * moved.h.max_abs_coeff().max(T::one());
            if leak > tol {
                return Err(Error::Consistency {
                    what: "Landau class after transport".into(),
                    discrepancy: leak.as_f64(),
                    tolerance: tol.as_f64(),
                });
            }
            (moved.h.project_landau(), leak)
        }
        NormalKind::Symmetric => (moved.h, T::zero()),
    };
    let tol = T::lit(2.0) * transport::tail_tolerance(hn.max_abs_coeff());
    let q_new = hn.sub(&nf.to_quad(dim, sigma)).prune(tol);
    Ok(StepOutcome {
        normal_form: nf,
        q: q_new,
        chi: sol.chi,
        x: moved.x,
        min_divisor: sol.report.min_modulus,
        increment: sol.increment,
        generator_sup: moved.x_sup,
        grid_side: moved.grid_side,
        eta2_leak: leak,
    })
}

fn check_omega<T: Real>(sys: &GaugeSystem<T>, omega: &[T]) -> Result<()> {
    if omega.len() != sys.dim() {
        return Err(Error::DimensionMismatch {
            expected: sys.dim(),
            got: omega.len(),
        });
    }
    if omega.iter().any(|w| !w.is_finite()) {
        return Err(Error::InvalidParameter("frequency must be finite".into()));
    }
    Ok(())
}

/// Degenerate reduction for the Landau gauge: normal form a·ξ₁η₁ + c·ξ₂².
pub fn kam_reduce<T: Real>(sys: &GaugeSystem<T>, omega: &[T], schedule: &Schedule) -> Result<KamResult<T>> {
    if sys.gauge != Gauge::Landau {
        return Err(Error::ClassMismatch("kam_reduce needs the Landau gauge system".into()));
    }
    check_omega(sys, omega)?;
    run(sys, omega, schedule, |st| Thresholds::uniform(T::lit(st.kappa)), None)
}

/// Non-degenerate reduction for the symmetric gauge: ν₁ξ₁η₁ + ν₂ξ₂η₂. After
/// the second step |2ν₂| must reach min(0.5ε², κ).
pub fn kam_reduce_nondegenerate<T: Real>(sys: &GaugeSystem<T>, omega: &[T], schedule: &Schedule) -> Result<KamResult<T>> {
    if sys.gauge != Gauge::Symmetric {
        return Err(Error::ClassMismatch(
            "kam_reduce_nondegenerate needs the symmetric gauge system".into(),
        ));
    }
    check_omega(sys, omega)?;
    let eps = sys.eps;
    run(
        sys,
        omega,
        schedule,
        |st| Thresholds::nondegenerate(T::lit(st.kappa), eps),
        Some(eps),
    )
}

fn run<T: Real>(
    sys: &GaugeSystem<T>,
    omega: &[T],
    schedule: &Schedule,
    thresholds: impl Fn(&ScheduleStep) -> Thresholds<T>,
    nondegenerate: Option<T>,
) -> Result<KamResult<T>> {
    let (dim, sigma) = (sys.dim(), sys.strip_width());
    let mut nf = sys.base;
    let mut q = sys.perturbation();
    let mut q_norm = q.norm(T::lit(schedule.sigma0)).as_f64();
    let mut res = KamResult {
        status: KamStatus::Converged,
        gauge: sys.gauge,
        omega: omega.to_vec(),
        eps: sys.eps,
        normal_form: nf,
        q_norms: vec![q_norm],
        steps: Vec::new(),
        chis: Vec::new(),
        remainder: q.clone(),
        generator: GeneratorSeries::identity(dim, sigma),
    };
    let floor = norm_floor::<T>().as_f64();
    let mut factors = Vec::new();
    let mut stalled = 0;
    let mut status = None;
    for st in &schedule.steps {
        if q_norm < floor {
            break;
        }
        let out = match kam_step(&nf, &q, omega, st, thresholds(st)) {
            Ok(o) => o,
            Err(Error::Resonance {
                k,
                monomial,
                modulus,
                threshold,
            }) => {
                status = Some(KamStatus::Resonant {
                    step: st.m,
                    k,
                    monomial,
                    modulus,
                    threshold,
                });
                break;
            }
            Err(Error::Unresolved { max_grid, tail }) => {
                status = Some(KamStatus::Diverged {
                    step: st.m,
                    reason: format!("transport unresolved on a {max_grid}-point grid (tail {tail:.2e})"),
                });
                break;
            }
            Err(e) => return Err(e),
        };
        let q_out = out.q.norm(T::lit(st.sigma)).as_f64();
        res.steps.push(StepDiagnostics {
            m: st.m,
            sigma: st.sigma,
            cutoff: st.cutoff,
            kappa: st.kappa,
            eps_target: st.eps_target,
            q_in: q_norm,
            q_out,
            min_divisor: out.min_divisor,
            increment: [out.increment.a.as_f64(), out.increment.c.as_f64()],
            chi_norm: out.chi.norm(T::lit(st.sigma)).as_f64(),
            generator_sup: out.generator_sup.as_f64(),
            grid_side: out.grid_side,
            eta2_leak: out.eta2_leak.as_f64(),
        });
        res.q_norms.push(q_out);
        nf = out.normal_form;
        q = out.q;
        res.chis.push(out.chi);
        factors.push(out.x);
        if out.generator_sup.as_f64() > GENERATOR_LIMIT {
            status = Some(KamStatus::Diverged {
                step: st.m,
                reason: format!("generator norm {:.3e} too large", out.generator_sup.as_f64()),
            });
            break;
        }
        stalled = if q_out >= q_norm { stalled + 1 } else { 0 };
        q_norm = q_out;
        if stalled >= 3 {
            status = Some(KamStatus::Diverged {
                step: st.m,
                reason: "perturbation failed to contract for 3 consecutive steps".into(),
            });
            break;
        }
        if let (Some(eps), 2) = (nondegenerate, st.m) {
            let value = (T::lit(2.0) * nf.nu2()).abs();
            let threshold = (T::lit(0.5) * eps * eps).min(T::lit(st.kappa));
            if value < threshold {
                return Err(Error::Degenerate {
                    value: value.as_f64(),
                    threshold: threshold.as_f64(),
                });
            }
        }
    }
    res.normal_form = nf;
    res.remainder = q;
    let status = status.unwrap_or_else(|| {
        let m = res.steps.len();
        let target = res.steps.last().map(|s| s.eps_target).unwrap_or(1.0);
        if q_norm <= target.max(floor) {
            KamStatus::Converged
        } else {
            KamStatus::Diverged {
                step: m,
                reason: format!("[q] = {q_norm:.3e} above the target {target:.3e} when the schedule ended"),
            }
        }
    });
    if status.is_converged() {
        res.generator = assemble_generator(&factors, dim, sigma)?;
    }
    res.status = status;
    Ok(res)
}

/// Frequencies of the normal form's physical dynamics: (ν₁, 0) for the
/// Landau kind, (ν₁, ν₂) for the symmetric kind.
pub fn normal_form_frequencies<T: Real>(nf: &NormalForm<T>) -> [T; 2] {
    [nf.nu1(), nf.nu2()]
}

/// Class tag used for the transported forms of each kind.
pub fn working_class(kind: NormalKind) -> ClassTag {
    kind.class()
}
