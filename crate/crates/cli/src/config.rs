//! Experiment configuration (TOML).

use std::path::{Path, PathBuf};

use landau_kam::kam::{DEFAULT_KAPPA_SCALE, DEFAULT_MAX_STEPS};
use landau_kam::scalar::cplx;
use landau_kam::trigpoly::MultiIndex;
use landau_kam::trigpoly::TrigPoly;
use landau_kam::Gauge;
use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_gauge")]
    pub gauge: Gauge,
    #[serde(default = "one")]
    pub b0: f64,
    #[serde(default)]
    pub forcing: ForcingConfig,
    #[serde(default)]
    pub frequency: FrequencyConfig,
    #[serde(default)]
    pub amplitude: AmplitudeConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
    #[serde(default)]
    pub measure: MeasureConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config parses")
    }
}

fn default_gauge() -> Gauge {
    Gauge::Landau
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingConfig {
    /// "sin", "cos" (first angle) or "sin-sum" (Σ sin θ_j).
    pub preset: Option<String>,
    /// Torus dimension for presets; defaults to 1.
    pub dim: Option<usize>,
    pub coeffs: Option<Vec<Coefficient>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Coefficient {
    pub k: Vec<i32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum OmegaValue {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Sweep {
    fn points(&self) -> Result<Vec<f64>, String> {
        if self.count == 0 {
            return Err("sweep count must be at least 1".into());
        }
        if self.count == 1 {
            return Ok(vec![self.start]);
        }
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        Ok((0..self.count).map(|i| self.start + h * i as f64).collect())
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrequencyConfig {
    pub values: Option<Vec<OmegaValue>>,
    pub sweep: Option<Sweep>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeConfig {
    pub values: Option<Vec<f64>>,
    pub sweep: Option<Sweep>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "one")]
    pub sigma0: f64,
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_kappa_scale")]
    pub kappa_scale: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            sigma0: 1.0,
            max_steps: DEFAULT_MAX_STEPS,
            kappa_scale: DEFAULT_KAPPA_SCALE,
        }
    }
}

fn default_max_steps() -> usize {
    DEFAULT_MAX_STEPS
}

fn default_kappa_scale() -> f64 {
    DEFAULT_KAPPA_SCALE
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Defaults to 0.01/max(2B₀, |ω|₁).
    pub dt: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub x: [f64; 2],
    #[serde(default = "default_p")]
    pub p: [f64; 2],
    #[serde(default = "yes")]
    pub write_trajectories: bool,
    /// Run a symmetric-gauge control next to each Landau growth run.
    #[serde(default = "yes")]
    pub control: bool,
    /// Grid side for the conjugation residual.
    #[serde(default = "default_side")]
    pub residual_grid: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty section parses")
    }
}

fn default_duration() -> f64 {
    2e4
}

fn default_samples() -> usize {
    20_000
}

fn default_p() -> [f64; 2] {
    [1.0, 0.0]
}

fn yes() -> bool {
    true
}

fn default_side() -> usize {
    64
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureConfig {
    #[serde(default = "default_measure_samples")]
    pub samples: usize,
    #[serde(default = "one_u64")]
    pub seed: u64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        Self { samples: 2000, seed: 1 }
    }
}

fn default_measure_samples() -> usize {
    2000
}

fn one_u64() -> u64 {
    1
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

/// Validated run parameters.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub forcing: TrigPoly<f64>,
    pub omegas: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
}

impl Resolved {
    /// (ω, ε) grid in row-major order (ω outer).
    pub fn grid(&self) -> Vec<(Vec<f64>, f64)> {
        self.omegas
            .iter()
            .flat_map(|w| self.amplitudes.iter().map(move |&e| (w.clone(), e)))
            .collect()
    }
}

pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    toml::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn forcing(cfg: &ForcingConfig, sigma0: f64) -> Result<TrigPoly<f64>, String> {
    match (&cfg.preset, &cfg.coeffs) {
        (Some(_), Some(_)) => Err("forcing: give either preset or coeffs, not both".into()),
        (None, Some(coeffs)) => {
            let dim = coeffs.first().map(|c| c.k.len()).ok_or("forcing: empty coefficient list")?;
            if cfg.dim.is_some_and(|d| d != dim) {
                return Err(format!("forcing: dim {} does not match wave vectors of length {dim}", cfg.dim.unwrap_or(0)));
            }
            let cutoff = coeffs.iter().map(|c| c.k.iter().map(|x| x.unsigned_abs()).sum::<u32>()).max().unwrap_or(0);
            let f = TrigPoly::from_coeffs(
                dim,
                cutoff.max(1),
                sigma0,
                coeffs.iter().map(|c| (MultiIndex::new(&c.k), cplx(c.re, c.im))),
            )
            .map_err(|e| format!("forcing: {e}"))?;
            Ok(f)
        }
        (preset, None) => {
            let name = preset.as_deref().unwrap_or("sin");
            let dim = cfg.dim.unwrap_or(1);
            if dim == 0 {
                return Err("forcing: dim must be at least 1".into());
            }
            let unit = |j: usize| -> Vec<i32> { (0..dim).map(|i| i32::from(i == j)).collect() };
            match name {
                "sin" => Ok(TrigPoly::sin(&unit(0), sigma0)),
                "cos" => Ok(TrigPoly::cos(&unit(0), sigma0)),
                "sin-sum" => Ok((1..dim).fold(TrigPoly::sin(&unit(0), sigma0), |acc, j| {
                    &acc + &TrigPoly::sin(&unit(j), sigma0)
                })),
                other => Err(format!("forcing: unknown preset {other:?} (sin, cos, sin-sum)")),
            }
        }
    }
}

pub fn resolve(config: ExperimentConfig) -> Result<Resolved, String> {
    if !(config.b0 > 0.0 && config.b0.is_finite()) {
        return Err(format!("b0 must be positive, got {}", config.b0));
    }
    let s = &config.schedule;
    if !(s.sigma0 > 0.0 && s.sigma0.is_finite()) {
        return Err(format!("schedule.sigma0 must be positive, got {}", s.sigma0));
    }
    if !(s.kappa_scale > 0.0 && s.kappa_scale.is_finite()) {
        return Err(format!("schedule.kappa_scale must be positive, got {}", s.kappa_scale));
    }
    let f = forcing(&config.forcing, s.sigma0)?;
    let dim = f.dim();
    let omegas: Vec<Vec<f64>> = match (&config.frequency.values, &config.frequency.sweep) {
        (Some(_), Some(_)) => return Err("frequency: give either values or sweep".into()),
        (None, Some(sw)) => {
            if dim != 1 {
                return Err("frequency.sweep needs a one-dimensional forcing".into());
            }
            sw.points()?.into_iter().map(|w| vec![w]).collect()
        }
        (Some(v), None) => v
            .iter()
            .map(|x| match x {
                OmegaValue::Scalar(w) => vec![*w],
                OmegaValue::Vector(w) => w.clone(),
            })
            .collect(),
        (None, None) => vec![vec![2.4; dim]],
    };
    if omegas.is_empty() {
        return Err("frequency: no values".into());
    }
    for w in &omegas {
        if w.len() != dim {
            return Err(format!("frequency {w:?} has {} components, forcing has dimension {dim}", w.len()));
        }
        if w.iter().any(|x| !x.is_finite()) {
            return Err(format!("frequency {w:?} is not finite"));
        }
    }
    let amplitudes = match (&config.amplitude.values, &config.amplitude.sweep) {
        (Some(_), Some(_)) => return Err("amplitude: give either values or sweep".into()),
        (None, Some(sw)) => sw.points()?,
        (Some(v), None) => v.clone(),
        (None, None) => vec![1e-2],
    };
    if amplitudes.is_empty() {
        return Err("amplitude: no values".into());
    }
    if let Some(e) = amplitudes.iter().find(|e| !(0.0..1.0).contains(*e)) {
        return Err(format!("amplitude {e} outside [0, 1)"));
    }
    let o = &config.oracle;
    if !(o.duration > 0.0 && o.duration.is_finite()) {
        return Err(format!("oracle.duration must be positive, got {}", o.duration));
    }
    if o.dt.is_some_and(|dt| !(dt > 0.0)) {
        return Err("oracle.dt must be positive".into());
    }
    if o.samples < 2 || o.residual_grid == 0 {
        return Err("oracle.samples must be at least 2 and oracle.residual_grid positive".into());
    }
    Ok(Resolved {
        config,
        forcing: f,
        omegas,
        amplitudes,
    })
}
