//! Brute-force ground truth: direct integration of the linear flow in
//! Cartesian variables, and the quantities extracted from it.

mod measure;
mod residual;
mod rotation;

pub use measure::{measure_excluded, wilson_interval, MeasureEstimate, MeasureSettings};
pub use residual::conjugation_residual;
pub use rotation::{rotation_numbers, RotationReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadham::gauge::{canonical_matrix, cartesian_forms};
use crate::quadham::{chart_map, ChartKind, Gauge, Modulation, PhasePoint};
use crate::scalar::Real;

pub type Mat4<T> = [[T; 4]; 4];

/// Symplectic defect above which integration is abandoned.
pub const DEFECT_LIMIT: f64 = 1e-6;
/// dt·max(2B₀, |ω|₁) must not exceed this.
pub const MAX_STEP_FACTOR: f64 = 0.05;
/// Default dt·max(2B₀, |ω|₁).
pub const DEFAULT_STEP_FACTOR: f64 = 0.01;
/// Default number of recorded samples.
pub const DEFAULT_SAMPLES: usize = 20_000;

/// Gauge plus B(t) = B₀ + εf(ωt).
#[derive(Clone, Debug, PartialEq)]
pub struct FlowSpec<T: Real> {
    pub gauge: Gauge,
    pub modulation: Modulation<T>,
}

impl<T: Real> FlowSpec<T> {
    pub fn new(gauge: Gauge, modulation: Modulation<T>) -> Self {
        Self { gauge, modulation }
    }

    /// max(2B₀, |ω|₁)
    pub fn rate(&self) -> T {
        let w = self.modulation.omega.iter().fold(T::zero(), |a, x| a + x.abs());
        (T::lit(2.0) * self.modulation.b0).max(w)
    }

    pub fn default_dt(&self) -> T {
        T::lit(DEFAULT_STEP_FACTOR) / self.rate()
    }

    pub fn b0(&self) -> T {
        self.modulation.b0
    }
}

fn zero4<T: Real>() -> Mat4<T> {
    [[T::zero(); 4]; 4]
}

fn ident4<T: Real>() -> Mat4<T> {
    let mut m = zero4();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub(crate) fn mul4<T: Real>(a: &Mat4<T>, b: &Mat4<T>) -> Mat4<T> {
    let mut c = zero4();
    for i in 0..4 {
        for k in 0..4 {
            let aik = a[i][k];
            if aik == T::zero() {
                continue;
            }
            for j in 0..4 {
                c[i][j] = c[i][j] + aik * b[k][j];
            }
        }
    }
    c
}

fn jr<T: Real>() -> Mat4<T> {
    let mut j = zero4();
    j[0][2] = T::one();
    j[1][3] = T::one();
    j[2][0] = -T::one();
    j[3][1] = -T::one();
    j
}

/// ‖ΦᵀJΦ − J‖ (Frobenius).
pub fn real_symplectic_defect<T: Real>(m: &Mat4<T>) -> T {
    let j = jr::<T>();
    let mut mt = zero4();
    for i in 0..4 {
        for k in 0..4 {
            mt[i][k] = m[k][i];
        }
    }
    let d = mul4(&mt, &mul4(&j, m));
    let mut s = T::zero();
    for i in 0..4 {
        for k in 0..4 {
            let e = d[i][k] - j[i][k];
            s = s + e * e;
        }
    }
    s.sqrt()
}

pub fn det4<T: Real>(m: &Mat4<T>) -> T {
    let minor = |r: [usize; 3], cidx: [usize; 3]| -> T {
        let a = |i: usize, j: usize| m[r[i]][cidx[j]];
        a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
    };
    let mut det = T::zero();
    for j in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != j).collect();
        let sign = if j % 2 == 0 { T::one() } else { -T::one() };
        det = det + sign * m[0][j] * minor([1, 2, 3], [cols[0], cols[1], cols[2]]);
    }
    det
}

/// Generator F(t) = J·S(t), S from the Cartesian forms of the gauge.
struct Rhs<T: Real> {
    ja: [Mat4<T>; 3],
    b0: T,
    eps: T,
    /// (λ = ω·k, coefficient) for the forcing
    modes: Vec<(T, crate::scalar::C<T>)>,
}

impl<T: Real> Rhs<T> {
    fn new(spec: &FlowSpec<T>) -> Self {
        let a = cartesian_forms::<T>(spec.gauge);
        let j = jr::<T>();
        let m = &spec.modulation;
        let modes = m
            .forcing
            .iter()
            .map(|(k, c)| (crate::scalar::dot_k(&m.omega, k.as_slice()), *c))
            .collect();
        Self {
            ja: [mul4(&j, &a[0]), mul4(&j, &a[1]), mul4(&j, &a[2])],
            b0: m.b0,
            eps: m.eps,
            modes,
        }
    }

    fn b(&self, t: T) -> T {
        let f = self
            .modes
            .iter()
            .fold(T::zero(), |acc, (l, c)| {
                let (s, co) = (*l * t).sin_cos();
                acc + c.re * co - c.im * s
            });
        self.b0 + self.eps * f
    }

    fn at(&self, t: T) -> Mat4<T> {
        let b = self.b(t);
        let b2 = b * b;
        let mut f = zero4();
        for i in 0..4 {
            for j in 0..4 {
                f[i][j] = self.ja[0][i][j] + b * self.ja[1][i][j] + b2 * self.ja[2][i][j];
            }
        }
        f
    }
}

fn axpy<T: Real>(x: &Mat4<T>, a: T, y: &Mat4<T>) -> Mat4<T> {
    let mut out = *x;
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = out[i][j] + a * y[i][j];
        }
    }
    out
}

/// Classical RK4 step of Φ̇ = F(t)Φ.
fn rk4_step<T: Real>(rhs: &Rhs<T>, t: T, h: T, phi: &Mat4<T>) -> Mat4<T> {
    let half = T::lit(0.5) * h;
    let f0 = rhs.at(t);
    let f1 = rhs.at(t + half);
    let f2 = rhs.at(t + h);
    let k1 = mul4(&f0, phi);
    let k2 = mul4(&f1, &axpy(phi, half, &k1));
    let k3 = mul4(&f1, &axpy(phi, half, &k2));
    let k4 = mul4(&f2, &axpy(phi, h, &k3));
    let mut out = *phi;
    let w = h / T::lit(6.0);
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = out[i][j] + w * (k1[i][j] + T::lit(2.0) * (k2[i][j] + k3[i][j]) + k4[i][j]);
        }
    }
    out
}

fn check_dt<T: Real>(spec: &FlowSpec<T>, dt: T) -> Result<()> {
    let limit = T::lit(MAX_STEP_FACTOR) / spec.rate();
    if !(dt > T::zero()) || dt > limit * T::lit(1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "dt = {dt} must lie in (0, {limit}] to resolve max(2B0, |omega|_1)"
        )));
    }
    Ok(())
}

/// Fundamental matrix Φ(t₁) with Φ(t₀) = I.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Monodromy<T: Real> {
    pub matrix: Mat4<T>,
    pub symplectic_defect: T,
    pub det: T,
}

/// Integrates Φ over [t0, t1] with steps no longer than dt.
pub fn fundamental_matrix<T: Real>(spec: &FlowSpec<T>, t0: T, t1: T, dt: T) -> Result<Monodromy<T>> {
    check_dt(spec, dt)?;
    let rhs = Rhs::new(spec);
    let n = ((t1 - t0) / dt).ceil().to_usize().unwrap_or(1).max(1);
    let h = (t1 - t0) / T::from_usize_lossy(n);
    let mut phi = ident4();
    for i in 0..n {
        phi = rk4_step(&rhs, t0 + h * T::from_usize_lossy(i), h, &phi);
    }
    let defect = real_symplectic_defect(&phi);
    if defect > T::lit(DEFECT_LIMIT) {
        return Err(Error::StepSize {
            defect: defect.as_f64(),
            limit: DEFECT_LIMIT,
            t: t1.as_f64(),
        });
    }
    Ok(Monodromy {
        matrix: phi,
        symplectic_defect: defect,
        det: det4(&phi),
    })
}

/// Sampled trajectory in Cartesian variables (x₁, x₂, p₁, p₂).
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T: Real> {
    pub gauge: Gauge,
    pub b0: T,
    pub times: Vec<T>,
    pub states: Vec<[T; 4]>,
    /// Largest symplectic defect seen.
    pub max_defect: T,
    /// Φ at the final time.
    pub fundamental: Mat4<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn point(&self, i: usize) -> PhasePoint<T> {
        let s = self.states[i];
        PhasePoint::Cartesian {
            x: [s[0], s[1]],
            p: [s[2], s[3]],
        }
    }

    /// |z₁|, |z₂| in the gauge's complex chart.
    pub fn z_moduli(&self, i: usize) -> [T; 2] {
        let m = canonical_matrix(self.gauge, self.b0);
        let s = self.states[i];
        let row = |j: usize| (0..4).fold(T::zero(), |a, c| a + m[j][c] * s[c]);
        let h = T::FRAC_1_SQRT_2();
        [
            (row(0) * h).hypot(row(2) * h),
            (row(1) * h).hypot(row(3) * h),
        ]
    }

    /// CSV with header t,x1,x2,p1,p2,abs_z1,abs_z2.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,x1,x2,p1,p2,abs_z1,abs_z2\n");
        for (i, (t, s)) in self.times.iter().zip(&self.states).enumerate() {
            let z = self.z_moduli(i);
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                t.as_f64(),
                s[0].as_f64(),
                s[1].as_f64(),
                s[2].as_f64(),
                s[3].as_f64(),
                z[0].as_f64(),
                z[1].as_f64()
            ));
        }
        out
    }
}

/// Integrates ẋ = J S(t) x together with the fundamental matrix, recording
/// `DEFAULT_SAMPLES` uniformly spaced states.
pub fn integrate_flow<T: Real>(spec: &FlowSpec<T>, x0: PhasePoint<T>, t_end: T, dt: T) -> Result<Trajectory<T>> {
    integrate_flow_sampled(spec, x0, t_end, dt, DEFAULT_SAMPLES)
}

pub fn integrate_flow_sampled<T: Real>(
    spec: &FlowSpec<T>,
    x0: PhasePoint<T>,
    t_end: T,
    dt: T,
    samples: usize,
) -> Result<Trajectory<T>> {
    check_dt(spec, dt)?;
    if !(t_end > T::zero()) {
        return Err(Error::InvalidParameter(format!("duration must be positive, got {t_end}")));
    }
    let PhasePoint::Cartesian { x, p } = chart_map(x0, ChartKind::Cartesian, spec.b0())? else {
        unreachable!("chart_map returns the requested chart")
    };
    let start = [x[0], x[1], p[0], p[1]];
    let rhs = Rhs::new(spec);
    let n = (t_end / dt).ceil().to_usize().unwrap_or(1).max(1);
    let h = t_end / T::from_usize_lossy(n);
    let stride = n.div_ceil(samples.max(1)).max(1);
    let apply = |phi: &Mat4<T>| -> [T; 4] {
        let mut v = [T::zero(); 4];
        for (i, vi) in v.iter_mut().enumerate() {
            *vi = (0..4).fold(T::zero(), |a, j| a + phi[i][j] * start[j]);
        }
        v
    };
    let mut phi = ident4();
    let mut times = vec![T::zero()];
    let mut states = vec![start];
    let mut max_defect = T::zero();
    for i in 0..n {
        let t = h * T::from_usize_lossy(i);
        phi = rk4_step(&rhs, t, h, &phi);
        let done = i + 1;
        if done % 256 == 0 || done == n {
            let d = real_symplectic_defect(&phi);
            max_defect = max_defect.max(d);
            if d > T::lit(DEFECT_LIMIT) {
                return Err(Error::StepSize {
                    defect: d.as_f64(),
                    limit: DEFECT_LIMIT,
                    t: (t + h).as_f64(),
                });
            }
        }
        if done % stride == 0 || done == n {
            times.push(h * T::from_usize_lossy(done));
            states.push(apply(&phi));
        }
    }
    Ok(Trajectory {
        gauge: spec.gauge,
        b0: spec.b0(),
        times,
        states,
        max_defect,
        fundamental: phi,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coordinate {
    X1,
    X2,
    P1,
    P2,
}

impl Coordinate {
    pub fn index(&self) -> usize {
        match self {
            Coordinate::X1 => 0,
            Coordinate::X2 => 1,
            Coordinate::P1 => 2,
            Coordinate::P2 => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriftEstimate {
    pub slope: f64,
    /// Half-width of the confidence band on the slope.
    pub half_width: f64,
    pub samples: usize,
    pub window: [f64; 2],
}

impl DriftEstimate {
    pub fn is_zero(&self) -> bool {
        self.slope.abs() <= self.half_width
    }
}

/// Least-squares slope of one coordinate over [T/2, T]. The band is
/// 3·max|residual|/W + 3·(standard error), W the window length, so bounded
/// oscillations do not register as drift.
pub fn drift_rate<T: Real>(traj: &Trajectory<T>, coord: Coordinate) -> Result<DriftEstimate> {
    let t_end = traj.times.last().map(|t| t.as_f64()).unwrap_or(0.0);
    let lo = 0.5 * t_end;
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(t, _)| t.as_f64() >= lo)
        .map(|(t, s)| (t.as_f64(), s[coord.index()].as_f64()))
        .collect();
    if pts.len() < 10 {
        return Err(Error::WindowTooShort(format!(
            "{} samples in [T/2, T], at least 10 needed",
            pts.len()
        )));
    }
    let (slope, intercept, stderr) = least_squares(&pts);
    let max_res = pts
        .iter()
        .map(|(t, y)| (y - intercept - slope * t).abs())
        .fold(0.0, f64::max);
    let w = t_end - lo;
    Ok(DriftEstimate {
        slope,
        half_width: 3.0 * max_res / w + 3.0 * stderr,
        samples: pts.len(),
        window: [lo, t_end],
    })
}

/// T ≥ 10/|c| for a drift measurement driven by the coefficient c.
pub fn check_drift_window(duration: f64, c: f64) -> Result<()> {
    if c == 0.0 {
        return Ok(());
    }
    let need = 10.0 / c.abs();
    if duration < need {
        return Err(Error::WindowTooShort(format!(
            "duration {duration} shorter than 10/|c| = {need:.3e}"
        )));
    }
    Ok(())
}

/// (slope, intercept, standard error of the slope).
pub(crate) fn least_squares(pts: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mt;
    let rss: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let stderr = if pts.len() > 2 && sxx > 0.0 {
        (rss / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, intercept, stderr)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Boundedness {
    pub initial: f64,
    pub sup: f64,
    /// Slope of log sup_{s≤t}|x(s)| against log t over [T/10, T].
    pub exponent: f64,
}

pub fn boundedness_metric<T: Real>(traj: &Trajectory<T>) -> Boundedness {
    let norm = |s: &[T; 4]| s.iter().map(|v| v.as_f64().powi(2)).sum::<f64>().sqrt();
    let initial = traj.states.first().map(norm).unwrap_or(0.0);
    let t_end = traj.times.last().map(|t| t.as_f64()).unwrap_or(0.0);
    let mut sup = 0.0f64;
    let mut pts = Vec::new();
    for (t, s) in traj.times.iter().zip(&traj.states) {
        sup = sup.max(norm(s));
        let t = t.as_f64();
        if t >= 0.1 * t_end && t > 0.0 && sup > 0.0 {
            pts.push((t.ln(), sup.ln()));
        }
    }
    let exponent = if pts.len() >= 2 { least_squares(&pts).0 } else { 0.0 };
    Boundedness { initial, sup, exponent }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trigpoly::TrigPoly;

    fn spec(gauge: Gauge, eps: f64, w: f64) -> FlowSpec<f64> {
        FlowSpec::new(gauge, Modulation::new(1.0, eps, TrigPoly::sin(&[1], 1.0), vec![w]).unwrap())
    }

    #[test]
    fn unperturbed_landau_rotates_z1() {
        let s = spec(Gauge::Landau, 0.0, 2.4);
        let z0 = [crate::scalar::cplx(0.6, 0.2), crate::scalar::cplx(0.1, -0.3)];
        let tr = integrate_flow(&s, PhasePoint::Landau { z: z0 }, 7.0, s.default_dt()).unwrap();
        let last = tr.states.len() - 1;
        let PhasePoint::Landau { z } = chart_map(tr.point(last), ChartKind::Landau, 1.0).unwrap() else {
            panic!()
        };
        let want = z0[0] * crate::scalar::cis(-2.0 * 7.0);
        assert!((z[0] - want).norm() < 1e-8);
        assert!((z[1] - z0[1]).norm() < 1e-10);
    }

    #[test]
    fn unimodular_and_linear() {
        let s = spec(Gauge::Symmetric, 0.2, 3.0);
        let p = PhasePoint::Cartesian { x: [0.3, -0.4], p: [1.0, 0.2] };
        let tr = integrate_flow(&s, p, 20.0, s.default_dt()).unwrap();
        assert!((det4(&tr.fundamental) - 1.0).abs() < 1e-10);
        assert!(tr.max_defect < 1e-9);
        let m = fundamental_matrix(&s, 0.0, 20.0, s.default_dt()).unwrap();
        let last = *tr.states.last().unwrap();
        let x0 = [0.3, -0.4, 1.0, 0.2];
        for i in 0..4 {
            let v: f64 = (0..4).map(|j| m.matrix[i][j] * x0[j]).sum();
            assert!((v - last[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn step_size_is_checked() {
        let s = spec(Gauge::Landau, 0.1, 2.4);
        let p = PhasePoint::Cartesian { x: [0.0, 0.0], p: [1.0, 0.0] };
        assert!(integrate_flow(&s, p, 1.0, 0.1).is_err());
    }

    #[test]
    fn integrator_is_fourth_order() {
        let s = spec(Gauge::Landau, 0.3, 2.4);
        let t1 = 5.0;
        let dt = 0.02;
        let reference = fundamental_matrix(&s, 0.0, t1, dt / 8.0).unwrap().matrix;
        let err = |h: f64| {
            let m = fundamental_matrix(&s, 0.0, t1, h).unwrap().matrix;
            (0..4)
                .flat_map(|i| (0..4).map(move |j| (i, j)))
                .map(|(i, j)| (m[i][j] - reference[i][j]).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(dt), err(dt / 2.0));
        assert!(e1 / e2 >= 16.0 * 0.9, "ratio {}", e1 / e2);
    }

    #[test]
    fn drift_needs_enough_samples() {
        let s = spec(Gauge::Landau, 0.0, 2.4);
        let p = PhasePoint::Cartesian { x: [0.0, 0.0], p: [1.0, 0.0] };
        let tr = integrate_flow_sampled(&s, p, 1.0, s.default_dt(), 8).unwrap();
        assert!(matches!(drift_rate(&tr, Coordinate::X1), Err(Error::WindowTooShort(_))));
        let tr = integrate_flow(&s, p, 200.0, s.default_dt()).unwrap();
        let d = drift_rate(&tr, Coordinate::X1).unwrap();
        assert!(d.is_zero(), "{d:?}");
        let b = boundedness_metric(&tr);
        assert!(b.exponent.abs() < 0.05);
        assert!((b.sup - b.initial).abs() < 1e-9 * b.initial.max(1.0) || b.sup >= b.initial);
    }

    #[test]
    fn csv_header() {
        let s = spec(Gauge::Landau, 0.0, 2.4);
        let p = PhasePoint::Cartesian { x: [0.0, 1.0], p: [0.0, 0.0] };
        let tr = integrate_flow_sampled(&s, p, 1.0, s.default_dt(), 4).unwrap();
        let csv = tr.to_csv();
        assert!(csv.starts_with("t,x1,x2,p1,p2,abs_z1,abs_z2\n"));
        assert_eq!(csv.lines().count(), tr.times.len() + 1);
    }
}
