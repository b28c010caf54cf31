//! Monte-Carlo estimate of the excluded frequency set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kam::{kam_reduce, kam_reduce_nondegenerate, make_schedule_scaled, KamStatus, DEFAULT_KAPPA_SCALE, DEFAULT_MAX_STEPS};
use crate::quadham::{build_landau, build_symmetric, Gauge};
use crate::trigpoly::TrigPoly;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureSettings {
    pub gauge: Gauge,
    pub b0: f64,
    pub samples: usize,
    pub seed: u64,
    pub sigma0: f64,
    pub kappa_scale: f64,
    pub max_steps: usize,
}

impl MeasureSettings {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            gauge: Gauge::Landau,
            b0: 1.0,
            samples,
            seed,
            sigma0: 1.0,
            kappa_scale: DEFAULT_KAPPA_SCALE,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureEstimate {
    pub eps: f64,
    pub samples: usize,
    /// Samples stopped by a small divisor.
    pub excluded: usize,
    /// Samples that failed for other reasons; not counted as excluded.
    pub diverged: usize,
    pub fraction: f64,
    /// 95% Wilson interval for the excluded fraction.
    pub ci: [f64; 2],
}

/// Wilson score interval for k successes out of n at z standard deviations.
pub fn wilson_interval(k: usize, n: usize, z: f64) -> [f64; 2] {
    if n == 0 {
        return [0.0, 1.0];
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    [(centre - half).max(0.0), (centre + half).min(1.0)]
}

/// Draws ω uniformly from (0, 2π]ⁿ with a seeded ChaCha stream and runs the
/// reduction for each; the excluded fraction counts resonant stops.
pub fn measure_excluded(eps: f64, forcing: &TrigPoly<f64>, settings: &MeasureSettings) -> Result<MeasureEstimate> {
    if settings.samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let sys = match settings.gauge {
        Gauge::Landau => build_landau(settings.b0, eps, forcing)?,
        Gauge::Symmetric => build_symmetric(settings.b0, eps, forcing)?,
    };
    let schedule = make_schedule_scaled::<f64>(eps, settings.sigma0, settings.max_steps, settings.kappa_scale)?;
    let n = forcing.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let tau = std::f64::consts::TAU;
    let omegas: Vec<Vec<f64>> = (0..settings.samples)
        .map(|_| (0..n).map(|_| tau - rng.random::<f64>() * tau).collect())
        .collect();
    let outcomes: Vec<Result<KamStatus>> = omegas
        .par_iter()
        .map(|w| {
            let r = match settings.gauge {
                Gauge::Landau => kam_reduce(&sys, w, &schedule),
                Gauge::Symmetric => kam_reduce_nondegenerate(&sys, w, &schedule),
            };
            r.map(|r| r.status)
        })
        .collect();
    let mut excluded = 0;
    let mut diverged = 0;
    for o in outcomes {
        match o {
            Ok(KamStatus::Resonant { .. }) => excluded += 1,
            Ok(KamStatus::Converged) => {}
            Ok(KamStatus::Diverged { .. }) | Err(Error::Degenerate { .. }) => diverged += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(MeasureEstimate {
        eps,
        samples: settings.samples,
        excluded,
        diverged,
        fraction: excluded as f64 / settings.samples as f64,
        ci: wilson_interval(excluded, settings.samples, 1.96),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_brackets_the_proportion() {
        let [lo, hi] = wilson_interval(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        assert!((lo - 0.2189).abs() < 1e-3 && (hi - 0.3958).abs() < 1e-3);
        assert_eq!(wilson_interval(0, 0, 1.96), [0.0, 1.0]);
    }

    #[test]
    fn seeded_runs_repeat() {
        let f = TrigPoly::sin(&[1], 1.0);
        let s = MeasureSettings::new(40, 7);
        let a = measure_excluded(1e-2, &f, &s).unwrap();
        let b = measure_excluded(1e-2, &f, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.excluded > 0 && a.fraction < 0.5, "{a:?}");
    }
}
