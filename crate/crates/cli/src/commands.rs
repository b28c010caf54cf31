//! The five subcommands. Each writes fixed-header CSV (and JSON for
//! `reduce`) into the output directory and returns a one-line summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use landau_kam::constants::{c_omega, constants_table, d_omega, slow_coefficient};
use landau_kam::kam::{kam_reduce, kam_reduce_nondegenerate, make_schedule_scaled, KamResult, KamStatus};
use landau_kam::oracle::{
    boundedness_metric, check_drift_window, conjugation_residual, drift_rate, integrate_flow_sampled,
    measure_excluded, rotation_numbers, Coordinate, FlowSpec, MeasureSettings,
};
use landau_kam::quadham::{build_landau, build_symmetric, Modulation, PhasePoint};
use landau_kam::{Error, Gauge};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Resolved;

/// Process exit codes.
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESONANT: i32 = 3;
pub const EXIT_DIVERGED: i32 = 4;
pub const EXIT_IO: i32 = 1;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Resonance { .. } => EXIT_RESONANT,
            Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::ClassMismatch(_)
            | Error::WindowTooShort(_)
            | Error::GridTooCoarse { .. }
            | Error::GridShape { .. }
            | Error::OutsideStrip { .. } => EXIT_CONFIG,
            _ => EXIT_DIVERGED,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Outcome of a command: summary text plus a nonzero code for runs that
/// completed their output but hit resonance or divergence.
pub struct Outcome {
    pub summary: String,
    pub code: i32,
}

fn write(dir: &Path, name: &str, text: &str) -> CliResult<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), text)?;
    Ok(())
}

fn omega_label(w: &[f64]) -> String {
    w.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| (v + 0.0).to_string()).unwrap_or_default()
}

pub fn constants(run: &Resolved, out: &Path) -> CliResult<Outcome> {
    let table = constants_table(&run.forcing, &run.omegas, run.config.b0)?;
    write(out, "constants.csv", &table)?;
    let flagged = table.lines().filter(|l| l.ends_with(",resonant")).count();
    Ok(Outcome {
        summary: format!("constants.csv: {} rows, {flagged} resonant", run.omegas.len()),
        code: 0,
    })
}

struct Reduced {
    omega: Vec<f64>,
    eps: f64,
    result: KamResult<f64>,
    residual: f64,
}

fn reduce_one(run: &Resolved, omega: &[f64], eps: f64) -> CliResult<Reduced> {
    let c = &run.config;
    let s = &c.schedule;
    let schedule = make_schedule_scaled::<f64>(eps, s.sigma0, s.max_steps, s.kappa_scale)?;
    let (sys, result) = match c.gauge {
        Gauge::Landau => {
            let sys = build_landau(c.b0, eps, &run.forcing)?;
            let r = kam_reduce(&sys, omega, &schedule)?;
            (sys, r)
        }
        Gauge::Symmetric => {
            let sys = build_symmetric(c.b0, eps, &run.forcing)?;
            let r = kam_reduce_nondegenerate(&sys, omega, &schedule)?;
            (sys, r)
        }
    };
    let residual = conjugation_residual(&sys, &result, c.oracle.residual_grid)?;
    Ok(Reduced {
        omega: omega.to_vec(),
        eps,
        result,
        residual,
    })
}

pub const REDUCE_HEADER: &str =
    "omega,eps,gauge,status,a,c,nu1,nu2,slow_over_eps2,closed_form,slow_coeff,rel_error,final_q,residual";
pub const CONVERGENCE_HEADER: &str = "omega,eps,m,q_norm";

pub fn reduce(run: &Resolved, out: &Path) -> CliResult<Outcome> {
    let c = &run.config;
    let grid = run.grid();
    let runs: Vec<CliResult<Reduced>> = grid.par_iter().map(|(w, e)| reduce_one(run, w, *e)).collect();
    let runs: Vec<Reduced> = runs.into_iter().collect::<CliResult<_>>()?;

    let mut table = format!("{REDUCE_HEADER}\n");
    let mut conv = format!("{CONVERGENCE_HEADER}\n");
    let mut json_runs = Vec::new();
    let mut code = 0;
    for r in &runs {
        let nf = &r.result.normal_form;
        let label = omega_label(&r.omega);
        let (closed, slow_pred) = match c.gauge {
            Gauge::Landau => {
                let v = c_omega(&run.forcing, &r.omega, c.b0).ok();
                (v, v)
            }
            Gauge::Symmetric => (
                d_omega(&run.forcing, &r.omega, c.b0).ok(),
                slow_coefficient(&run.forcing, &r.omega, c.b0).ok(),
            ),
        };
        let slow = (r.eps > 0.0).then(|| nf.c / (r.eps * r.eps));
        let rel = match (slow, closed) {
            (Some(s), Some(cl)) if cl != 0.0 => Some(s / cl - 1.0),
            _ => None,
        };
        let _ = writeln!(
            table,
            "{label},{},{},{},{},{},{},{},{},{},{},{},{:e},{:e}",
            r.eps,
            gauge_name(c.gauge),
            r.result.status.label(),
            nf.a + 0.0,
            nf.c + 0.0,
            nf.nu1() + 0.0,
            nf.nu2() + 0.0,
            opt(slow),
            opt(closed),
            opt(slow_pred),
            opt(rel),
            r.result.final_q(),
            r.residual,
        );
        for (m, q) in r.result.q_norms.iter().enumerate() {
            let _ = writeln!(conv, "{label},{},{m},{q:e}", r.eps);
        }
        let mut v = r.result.to_json(false);
        v["conjugation_residual"] = json!(r.residual);
        json_runs.push(v);
        code = code.max(match r.result.status {
            KamStatus::Converged => 0,
            KamStatus::Resonant { .. } => EXIT_RESONANT,
            KamStatus::Diverged { .. } => EXIT_DIVERGED,
        });
    }
    // resonance outranks divergence
    if runs.iter().any(|r| matches!(r.result.status, KamStatus::Resonant { .. })) {
        code = EXIT_RESONANT;
    }
    write(out, "reduce.csv", &table)?;
    write(out, "convergence.csv", &conv)?;
    let doc = Value::Array(json_runs);
    write(out, "reduce.json", &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))?;
    let converged = runs.iter().filter(|r| r.result.status.is_converged()).count();
    Ok(Outcome {
        summary: format!("reduce: {converged}/{} converged", runs.len()),
        code,
    })
}

fn gauge_name(g: Gauge) -> &'static str {
    match g {
        Gauge::Landau => "landau",
        Gauge::Symmetric => "symmetric",
    }
}

fn flow_spec(run: &Resolved, gauge: Gauge, omega: &[f64], eps: f64) -> CliResult<FlowSpec<f64>> {
    let m = Modulation::new(run.config.b0, eps, run.forcing.clone(), omega.to_vec())?;
    Ok(FlowSpec::new(gauge, m))
}

fn initial(run: &Resolved) -> PhasePoint<f64> {
    PhasePoint::Cartesian {
        x: run.config.oracle.x,
        p: run.config.oracle.p,
    }
}

pub const GROWTH_HEADER: &str =
    "gauge,omega,eps,p1,slope,half_width,drift_detected,predicted,rel_error,slope_over_eps2,monodromy_slope,exponent,max_defect";

struct GrowthRow {
    line: String,
    trajectory: Option<(String, String)>,
}

fn growth_one(run: &Resolved, gauge: Gauge, idx: usize, omega: &[f64], eps: f64) -> CliResult<GrowthRow> {
    let c = &run.config;
    let o = &c.oracle;
    let spec = flow_spec(run, gauge, omega, eps)?;
    let p1 = o.p[0];
    let (predicted, coefficient) = match gauge {
        Gauge::Landau => {
            let cw = c_omega(&run.forcing, omega, c.b0)?;
            let ce = cw * eps * eps;
            (-4.0 / c.b0 * ce * p1, ce)
        }
        Gauge::Symmetric => (0.0, 0.0),
    };
    if p1 != 0.0 {
        check_drift_window(o.duration, coefficient)?;
    }
    let dt = o.dt.unwrap_or_else(|| spec.default_dt());
    let traj = integrate_flow_sampled(&spec, initial(run), o.duration, dt, o.samples)?;
    let drift = drift_rate(&traj, Coordinate::X1)?;
    let bound = boundedness_metric(&traj);
    let monodromy = if gauge == Gauge::Landau && omega.len() == 1 && omega[0] != 0.0 {
        rotation_numbers(&spec, dt)?.landau_drift.map(|d| d * p1)
    } else {
        None
    };
    let rel = (predicted != 0.0).then(|| drift.slope / predicted - 1.0);
    let line = format!(
        "{},{},{eps},{p1},{:e},{:e},{},{},{},{},{},{},{:e}",
        gauge_name(gauge),
        omega_label(omega),
        drift.slope,
        drift.half_width,
        !drift.is_zero(),
        predicted + 0.0,
        opt(rel),
        opt((eps > 0.0).then(|| drift.slope / (eps * eps))),
        opt(monodromy),
        bound.exponent,
        traj.max_defect,
    );
    let trajectory = o
        .write_trajectories
        .then(|| (format!("trajectory_{}_{idx}.csv", gauge_name(gauge)), traj.to_csv()));
    Ok(GrowthRow { line, trajectory })
}

pub fn landau_growth(run: &Resolved, out: &Path) -> CliResult<Outcome> {
    let mut jobs = Vec::new();
    for (i, (w, e)) in run.grid().into_iter().enumerate() {
        jobs.push((Gauge::Landau, i, w.clone(), e));
        if run.config.oracle.control {
            jobs.push((Gauge::Symmetric, i, w, e));
        }
    }
    let rows: Vec<CliResult<GrowthRow>> = jobs
        .par_iter()
        .map(|(g, i, w, e)| growth_one(run, *g, *i, w, *e))
        .collect();
    let rows: Vec<GrowthRow> = rows.into_iter().collect::<CliResult<_>>()?;
    let mut table = format!("{GROWTH_HEADER}\n");
    for r in &rows {
        table.push_str(&r.line);
        table.push('\n');
        if let Some((name, csv)) = &r.trajectory {
            write(out, name, csv)?;
        }
    }
    write(out, "growth.csv", &table)?;
    Ok(Outcome {
        summary: format!("growth.csv: {} runs", rows.len()),
        code: 0,
    })
}

pub const BOUNDED_HEADER: &str = "omega,eps,duration,initial_norm,sup,exponent,bounded,max_defect";
pub const ROTATION_HEADER: &str = "omega,eps,nu1_oracle,nu2_oracle,nu1_kam,nu2_kam,max_diff,status";

pub fn symmetric_bounded(run: &Resolved, out: &Path) -> CliResult<Outcome> {
    let o = &run.config.oracle;
    let grid = run.grid();
    type Row = (String, Option<String>, Option<String>);
    let rows: Vec<CliResult<Row>> = grid
        .par_iter()
        .map(|(w, e)| -> CliResult<Row> {
            let spec = flow_spec(run, Gauge::Symmetric, w, *e)?;
            let dt = o.dt.unwrap_or_else(|| spec.default_dt());
            let traj = integrate_flow_sampled(&spec, initial(run), o.duration, dt, o.samples)?;
            let b = boundedness_metric(&traj);
            let line = format!(
                "{},{e},{},{},{},{:e},{},{:e}",
                omega_label(w),
                o.duration,
                b.initial,
                b.sup,
                b.exponent,
                b.exponent < 0.05,
                traj.max_defect
            );
            let rotation = if w.len() == 1 && w[0] != 0.0 {
                let rot = rotation_numbers(&spec, dt)?;
                let mut sym = run.clone();
                sym.config.gauge = Gauge::Symmetric;
                let red = reduce_one(&sym, w, *e)?;
                let kam = [red.result.normal_form.nu1(), red.result.normal_form.nu2()];
                let diff = (rot.frequencies[0] - kam[0]).abs().max((rot.frequencies[1] - kam[1]).abs());
                Some(format!(
                    "{},{e},{},{},{},{},{:e},{}",
                    omega_label(w),
                    rot.frequencies[0],
                    rot.frequencies[1],
                    kam[0],
                    kam[1],
                    diff,
                    red.result.status.label()
                ))
            } else {
                None
            };
            let name_csv = o.write_trajectories.then(|| traj.to_csv());
            Ok((line, rotation, name_csv))
        })
        .collect();
    let rows: Vec<Row> = rows.into_iter().collect::<CliResult<_>>()?;
    let mut table = format!("{BOUNDED_HEADER}\n");
    let mut rot = format!("{ROTATION_HEADER}\n");
    for (i, (line, r, traj)) in rows.iter().enumerate() {
        table.push_str(line);
        table.push('\n');
        if let Some(r) = r {
            rot.push_str(r);
            rot.push('\n');
        }
        if let Some(csv) = traj {
            write(out, &format!("trajectory_symmetric_{i}.csv"), csv)?;
        }
    }
    write(out, "bounded.csv", &table)?;
    write(out, "rotation.csv", &rot)?;
    let bounded = rows.iter().filter(|(l, _, _)| l.contains(",true,")).count();
    Ok(Outcome {
        summary: format!("bounded.csv: {bounded}/{} bounded", rows.len()),
        code: 0,
    })
}

pub const MEASURE_HEADER: &str = "eps,samples,excluded,diverged,fraction,ci_low,ci_high,bound";

pub fn measure(run: &Resolved, out: &Path, seed: u64) -> CliResult<Outcome> {
    let c = &run.config;
    if c.measure.samples == 0 {
        return Err(CliError::config("measure.samples must be at least 1"));
    }
    let settings = MeasureSettings {
        gauge: c.gauge,
        b0: c.b0,
        samples: c.measure.samples,
        seed,
        sigma0: c.schedule.sigma0,
        kappa_scale: c.schedule.kappa_scale,
        max_steps: c.schedule.max_steps,
    };
    let mut table = format!("{MEASURE_HEADER}\n");
    for &eps in &run.amplitudes {
        let m = measure_excluded(eps, &run.forcing, &settings)?;
        let _ = writeln!(
            table,
            "{eps},{},{},{},{},{},{},{}",
            m.samples,
            m.excluded,
            m.diverged,
            m.fraction,
            m.ci[0],
            m.ci[1],
            3.0 * eps.powf(1.0 / 9.0)
        );
    }
    write(out, "measure.csv", &table)?;
    Ok(Outcome {
        summary: format!("measure.csv: {} amplitudes", run.amplitudes.len()),
        code: 0,
    })
}
