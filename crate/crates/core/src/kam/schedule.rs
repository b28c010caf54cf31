use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// κ scale used by the reduction drivers; the bare schedule uses 1.
pub const DEFAULT_KAPPA_SCALE: f64 = 0.1;
pub const DEFAULT_MAX_STEPS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleStep {
    pub m: usize,
    /// σ_m
    pub sigma: f64,
    /// K_m
    pub cutoff: u32,
    /// κ_m
    pub kappa: f64,
    /// ε_m
    pub eps_target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    pub eps: f64,
    pub sigma0: f64,
    pub kappa_scale: f64,
    pub steps: Vec<ScheduleStep>,
}

/// C* = 1/(2 Σ j⁻²) = 3/π².
pub fn c_star() -> f64 {
    3.0 / (std::f64::consts::PI * std::f64::consts::PI)
}

impl Schedule {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// σ before step m (σ₀ for m = 1).
    pub fn sigma_before(&self, m: usize) -> f64 {
        if m <= 1 {
            self.sigma0
        } else {
            self.steps[m - 2].sigma
        }
    }

    /// Number of steps to keep for a given truncation (used for residual sweeps).
    pub fn truncated(&self, steps: usize) -> Self {
        Self {
            steps: self.steps.iter().copied().take(steps).collect(),
            ..self.clone()
        }
    }
}

/// σ_{m−1} − σ_m = C*σ₀/m², K_m = ⌈2 ln(1/ε_{m−1})/(σ_{m−1} − σ_m)⌉,
/// κ_m = ε_{m−1}^{1/8}, ε_m = ε^{(3/2)^m}; stops after `max_steps` or when
/// ε_m underflows.
pub fn make_schedule(eps: f64, sigma0: f64, max_steps: usize) -> Result<Schedule> {
    make_schedule_scaled::<f64>(eps, sigma0, max_steps, 1.0)
}

/// As [`make_schedule`] with κ_m = kappa_scale·ε_{m−1}^{1/8}; underflow is
/// judged in the scalar type `T`.
pub fn make_schedule_scaled<T: Real>(eps: f64, sigma0: f64, max_steps: usize, kappa_scale: f64) -> Result<Schedule> {
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("schedule needs 0 ≤ ε < 1, got {eps}")));
    }
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::InvalidParameter(format!("σ₀ must be positive, got {sigma0}")));
    }
    if !(kappa_scale > 0.0 && kappa_scale.is_finite()) {
        return Err(Error::InvalidParameter(format!("κ scale must be positive, got {kappa_scale}")));
    }
    let mut s = Schedule {
        eps,
        sigma0,
        kappa_scale,
        steps: Vec::new(),
    };
    if eps == 0.0 {
        return Ok(s);
    }
    let tiny = T::min_positive_value().as_f64();
    let mut sigma = sigma0;
    let mut prev = eps;
    for m in 1..=max_steps {
        let target = eps.powf(1.5f64.powi(m as i32));
        if !(target > tiny) {
            break;
        }
        let drop = c_star() * sigma0 / (m * m) as f64;
        let k = (2.0 / drop * (1.0 / prev).ln()).ceil();
        sigma -= drop;
        s.steps.push(ScheduleStep {
            m,
            sigma,
            cutoff: k.min(u32::MAX as f64) as u32,
            kappa: kappa_scale * prev.powf(0.125),
            eps_target: target,
        });
        prev = target;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = make_schedule(0.1, 1.0, 12).unwrap();
        assert!((s.steps[0].eps_target - 0.0316228).abs() < 1e-7);
        assert!((s.steps[0].kappa - 0.74989).abs() < 1e-5);
        assert!(s.steps.windows(2).all(|w| w[1].sigma < w[0].sigma));
        assert!(s.steps.iter().all(|st| st.sigma > 0.5));
        // telescoping limit
        let total: f64 = (1..200_000).map(|m| c_star() / (m as f64 * m as f64)).sum();
        assert!((total - 0.5).abs() < 1e-5);
        let k1 = (2.0 / c_star() * (10f64).ln()).ceil() as u32;
        assert_eq!(s.steps[0].cutoff, k1);
    }

    #[test]
    fn rejects_and_trivial() {
        assert!(make_schedule(1.0, 1.0, 12).is_err());
        assert!(make_schedule(0.1, 0.0, 12).is_err());
        assert!(make_schedule(0.0, 1.0, 12).unwrap().is_empty());
    }

    #[test]
    fn underflow_stops_the_schedule() {
        let s = make_schedule(0.1, 1.0, 40).unwrap();
        assert!(s.len() < 40);
        assert!(s.steps.last().unwrap().eps_target > 0.0);
        let s32 = make_schedule_scaled::<f32>(0.1, 1.0, 40, 1.0).unwrap();
        assert!(s32.len() < s.len());
    }
}
