//! Sweep engine: a one- or two-axis scalar-metric scan over the classical
//! trajectory model. Points are fault-isolated: a failed point yields a NaN
//! metric and an error cell, never an aborted sweep.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use becsync_core::meanfield::{
    covering_areas, evolve, imbalance_phase, oscillation_amplitude, trajectory_distance,
    unwrap_phase, ClassicalState, ModelParams,
};

use crate::config::{valid_key, ConfigError, RawConfig, Resolver};
use crate::experiments::{
    resolve_couplings, resolve_initial_amplitudes, resolve_time_grid, resolve_transient_window,
};
use crate::output::{fmt_float, AxisMeta, Cell, RunOutput, SweepMeta};
use crate::CliError;

const MAX_GRID_POINTS: usize = 10_000_000;

pub const METRICS: &[&str] = &[
    "r_minus_amplitude",
    "phi_minus_amplitude",
    "s_a",
    "s_b",
    "s_abs_diff",
    "d_ab",
];

/// Run `f` over 0..n on `workers` threads, preserving index order.
pub(crate) fn indexed_parallel<T, F>(n: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().map(|i| f(i)).collect()),
        // thread spawn failure: same results, just sequential
        Err(_) => (0..n).map(f).collect(),
    }
}

#[derive(Debug, Clone)]
pub struct Axis {
    pub name: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub count: usize,
}

impl Axis {
    fn value(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }
}

fn axis_err(spec: &str, msg: &str) -> ConfigError {
    ConfigError::Value { key: "axis".into(), msg: format!("`{spec}`: {msg}") }
}

/// Parse `name=start:stop:step` with finite bounds, step > 0, stop >= start.
pub fn parse_axis(spec: &str) -> Result<Axis, ConfigError> {
    let Some((name, range)) = spec.split_once('=') else {
        return Err(axis_err(spec, "expected name=start:stop:step"));
    };
    if !valid_key(name) {
        return Err(axis_err(spec, "axis name must be lowercase [a-z0-9_]"));
    }
    let parts: Vec<&str> = range.split(':').collect();
    let [start, stop, step] = parts.as_slice() else {
        return Err(axis_err(spec, "expected start:stop:step"));
    };
    let parse = |s: &str| -> Result<f64, ConfigError> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| axis_err(spec, &format!("`{s}` is not a number")))?;
        if !v.is_finite() {
            return Err(axis_err(spec, &format!("`{s}` is not finite")));
        }
        Ok(v)
    };
    let (start, stop, step) = (parse(start)?, parse(stop)?, parse(step)?);
    if step <= 0.0 {
        return Err(axis_err(spec, "step must be > 0"));
    }
    if stop < start {
        return Err(axis_err(spec, "stop must be >= start"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok(Axis { name: name.to_string(), start, stop, step, count })
}

/// Fully-resolved trajectory point: the sweep's per-point model.
struct Point {
    delta: f64,
    g: f64,
    chi: f64,
    a0: C64,
    b0: C64,
    t_max: f64,
    samples: usize,
    transient: f64,
    window: f64,
}

fn resolve_sweep_point(r: &mut Resolver) -> Result<Point, ConfigError> {
    let (delta, g, chi) = resolve_couplings(r)?;
    let (a0, b0) = resolve_initial_amplitudes(r)?;
    let (t_max, samples) = resolve_time_grid(r)?;
    let (transient, window) = resolve_transient_window(r, t_max)?;
    Ok(Point { delta, g, chi, a0, b0, t_max, samples, transient, window })
}

/// Schema-check a sweep base config without axes, for `validate`.
pub fn validate_base(raw: &RawConfig) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    resolve_sweep_point(&mut r)?;
    let output_path = r.str_or("output", "sweep.csv");
    let echo = r.finish("sweep")?;
    Ok(RunOutput { echo, output_path, ..Default::default() })
}

/// Axis values of point `k`, row-major with `axes[0]` outermost.
fn point_values(axes: &[Axis], k: usize) -> Vec<f64> {
    match axes {
        [a] => vec![a.value(k)],
        [a, b] => vec![a.value(k / b.count), b.value(k % b.count)],
        _ => unreachable!("axis count is validated to 1..=2"),
    }
}

fn sanitize(e: impl std::fmt::Display) -> String {
    e.to_string().replace(',', ";").replace('\n', " ")
}

fn evaluate(p: &Point, metric: &str) -> Result<f64, String> {
    let params = ModelParams::new(p.delta, p.g, p.chi);
    let s0 = ClassicalState::normalized(p.a0, p.b0).map_err(|e| e.to_string())?;
    let traj = evolve(&s0, &params, p.t_max, p.samples).map_err(|e| e.to_string())?;
    Ok(match metric {
        "r_minus_amplitude" => {
            let series: Vec<f64> = imbalance_phase(&traj).iter().map(|q| q.r_minus).collect();
            oscillation_amplitude(&traj.times, &series, p.transient, p.window)
        }
        "phi_minus_amplitude" => {
            let wrapped: Option<Vec<f64>> =
                imbalance_phase(&traj).iter().map(|q| q.phi_minus).collect();
            let Some(wrapped) = wrapped else {
                return Err("relative phase undefined near a mode zero".into());
            };
            oscillation_amplitude(&traj.times, &unwrap_phase(&wrapped), p.transient, p.window)
        }
        "s_a" => covering_areas(&traj, p.window).0,
        "s_b" => covering_areas(&traj, p.window).1,
        "s_abs_diff" => {
            let (sa, sb) = covering_areas(&traj, p.window);
            (sa - sb).abs()
        }
        "d_ab" => trajectory_distance(&traj, p.window),
        other => unreachable!("unvalidated metric {other}"),
    })
}

fn point_metric(raw: &RawConfig, axes: &[Axis], k: usize, metric: &str) -> Result<f64, String> {
    let mut cfg = raw.clone();
    for (a, v) in axes.iter().zip(point_values(axes, k)) {
        cfg.insert_value(&a.name, fmt_float(v));
    }
    // the base pass already vetted the key set; only values vary here
    let mut r = Resolver::new(&cfg);
    let point = resolve_sweep_point(&mut r).map_err(sanitize)?;
    evaluate(&point, metric)
}

fn remap_axis_unknown(e: ConfigError, axes: &[Axis]) -> CliError {
    if let ConfigError::Unknown { key, .. } = &e {
        if axes.iter().any(|a| &a.name == key) {
            return CliError::Config(ConfigError::Value {
                key: "axis".into(),
                msg: format!("`{key}` is not a key of the sweep point model"),
            });
        }
    }
    CliError::Config(e)
}

pub fn run_sweep(
    raw: &RawConfig,
    axes: &[Axis],
    metric: &str,
    workers: usize,
    execute: bool,
) -> Result<(RunOutput, SweepMeta), CliError> {
    if !METRICS.contains(&metric) {
        return Err(CliError::Config(ConfigError::Value {
            key: "metric".into(),
            msg: format!("`{metric}` is not one of {}", METRICS.join(", ")),
        }));
    }
    if axes.is_empty() || axes.len() > 2 {
        return Err(CliError::Config(ConfigError::Value {
            key: "axis".into(),
            msg: "need one or two axes".into(),
        }));
    }
    if axes.len() == 2 && axes[0].name == axes[1].name {
        return Err(CliError::Config(ConfigError::Value {
            key: "axis".into(),
            msg: format!("both axes name `{}`", axes[0].name),
        }));
    }
    if workers < 1 {
        return Err(CliError::Config(ConfigError::Value {
            key: "workers".into(),
            msg: "need at least 1 worker".into(),
        }));
    }
    let total: usize = axes.iter().map(|a| a.count).product();
    if total > MAX_GRID_POINTS {
        return Err(CliError::Config(ConfigError::Value {
            key: "axis".into(),
            msg: format!("grid has {total} points; the limit is {MAX_GRID_POINTS}"),
        }));
    }

    // Validate the point schema once with axis start values injected, so
    // bad fixed keys fail fast instead of NaN-ing every point.
    let mut base = raw.clone();
    for a in axes {
        base.insert_value(&a.name, fmt_float(a.start));
    }
    let mut r = Resolver::new(&base);
    resolve_sweep_point(&mut r).map_err(|e| remap_axis_unknown(e, axes))?;
    let output_path = r.str_or("output", "sweep.csv");
    let mut echo = r.finish("sweep").map_err(|e| remap_axis_unknown(e, axes))?;
    // axis values vary per point; the sidecar's sweep block carries them
    for a in axes {
        echo.remove(&a.name);
    }

    let mut columns: Vec<String> = axes.iter().map(|a| a.name.clone()).collect();
    columns.push(metric.to_string());
    columns.push("error".to_string());
    let meta = SweepMeta {
        axes: axes
            .iter()
            .map(|a| AxisMeta {
                name: a.name.clone(),
                start: a.start,
                stop: a.stop,
                step: a.step,
                count: a.count,
            })
            .collect(),
        metric: metric.to_string(),
        workers,
    };
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok((out, meta));
    }

    let results = indexed_parallel(total, workers, |k| point_metric(raw, axes, k, metric));
    for (k, res) in results.into_iter().enumerate() {
        let mut row: Vec<Cell> = point_values(axes, k).into_iter().map(Cell::F).collect();
        match res {
            Ok(v) => {
                row.push(Cell::F(v));
                row.push(Cell::S(String::new()));
            }
            Err(msg) => {
                row.push(Cell::F(f64::NAN));
                row.push(Cell::S(msg));
            }
        }
        out.rows.push(row);
    }
    Ok((out, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_parsing_counts_and_rejections() {
        let a = parse_axis("chi=-1:0:0.25").unwrap();
        assert_eq!(a.name, "chi");
        assert_eq!(a.count, 5);
        assert_eq!(a.value(4), 0.0);

        let single = parse_axis("g=2:2:1").unwrap();
        assert_eq!(single.count, 1);

        // a count that lands exactly on the stop must include it
        let exact = parse_axis("delta=0:1:0.1").unwrap();
        assert_eq!(exact.count, 11);

        assert!(parse_axis("chi").is_err());
        assert!(parse_axis("chi=0:1").is_err());
        assert!(parse_axis("chi=0:1:0").is_err());
        assert!(parse_axis("chi=1:0:0.1").is_err());
        assert!(parse_axis("chi=0:inf:1").is_err());
        assert!(parse_axis("Chi=0:1:0.1").is_err());
    }

    #[test]
    fn indexed_parallel_preserves_order() {
        let seq = indexed_parallel(100, 1, |i| i * i);
        let par = indexed_parallel(100, 4, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[7], 49);
    }

    #[test]
    fn point_values_row_major() {
        let a = parse_axis("delta=0:1:1").unwrap();
        let b = parse_axis("chi=0:2:1").unwrap();
        let axes = [a, b];
        // delta outermost: (0,0) (0,1) (0,2) (1,0) ...
        assert_eq!(point_values(&axes, 0), [0.0, 0.0]);
        assert_eq!(point_values(&axes, 2), [0.0, 2.0]);
        assert_eq!(point_values(&axes, 3), [1.0, 0.0]);
        assert_eq!(point_values(&axes, 5), [1.0, 2.0]);
    }

    #[test]
    fn sanitize_keeps_cells_csv_safe() {
        assert_eq!(sanitize("bad, worse\nend"), "bad; worse end");
    }
}
