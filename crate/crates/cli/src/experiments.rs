//! The nine experiments: each resolves its key schema, optionally
//! executes, and hands back columns + rows + the canonical config echo.
//!
//! `execute = false` runs the full schema resolution and nothing else,
//! which is exactly what `validate` needs. Execution starts only after
//! the whole schema (including unknown-key rejection) has passed.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;

use becsync_core::focksector::{
    evolve_fock, sector_moments, spectrum_vs_chi, FockStateN, QuantumParams, SectorMoments,
};
use becsync_core::fullspace::{
    build_blocks, coherent_initial_windowed, evolve_full, full_moments, FullMoments, FullParams,
    TwoModeState,
};
use becsync_core::husimi::{q_marginal_full, q_snapshot, Mode, StateRef};
use becsync_core::meanfield::{
    covering_areas, energy, evolve, imbalance_phase, oscillation_amplitude, phase_portrait,
    trajectory_distance, ClassicalState, ModelParams, SeedKind,
};
use becsync_core::numerics::{polar_quadrature, MeasureConvention, PolarGrid};
use becsync_core::syncmeasures::{
    mari_measure, mutual_information_direct, reduced_mutual_information_fixed_n,
    reduced_mutual_information_full, von_neumann_mutual, MiVariant,
};

use crate::config::{ConfigError, RawConfig, Resolver};
use crate::output::{Cell, RunOutput};
use crate::sweep::indexed_parallel;
use crate::CliError;

pub const EXPERIMENTS: &[&str] = &[
    "meanfield-run",
    "phase-portrait",
    "ms-scan",
    "amplitude-map",
    "spectrum",
    "fock-evolve",
    "coherent-evolve",
    "q-snapshot",
    "measures",
];

const MAX_GRID_POINTS: usize = 10_000_000;

pub fn run(experiment: &str, raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    match experiment {
        "meanfield-run" => meanfield_run(raw, execute),
        "phase-portrait" => portrait(raw, execute),
        "ms-scan" => ms_scan(raw, execute),
        "amplitude-map" => amplitude_map(raw, execute),
        "spectrum" => spectrum(raw, execute),
        "fock-evolve" => fock_evolve(raw, execute),
        "coherent-evolve" => coherent_evolve(raw, execute),
        "q-snapshot" => q_snapshot_run(raw, execute),
        "measures" => measures(raw, execute),
        other => Err(CliError::Config(ConfigError::Value {
            key: "experiment".into(),
            msg: format!("`{other}` is not one of {}", EXPERIMENTS.join(", ")),
        })),
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn cols(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

/// Uniform sample times over [0, t_max], endpoints included, matching the
/// integrators' sampling contract.
fn linspace_times(t_max: f64, samples: usize) -> Vec<f64> {
    (0..samples)
        .map(|i| t_max * i as f64 / (samples - 1) as f64)
        .collect()
}

fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![start];
    }
    (0..points)
        .map(|i| start + (stop - start) * i as f64 / (points - 1) as f64)
        .collect()
}

pub(crate) fn resolve_couplings(r: &mut Resolver) -> Result<(f64, f64, f64), ConfigError> {
    let delta = r.require_f64("delta")?;
    let g = resolve_g(r)?;
    let chi = r.require_f64("chi")?;
    Ok((delta, g, chi))
}

fn resolve_g(r: &mut Resolver) -> Result<f64, ConfigError> {
    let g = r.require_f64("g")?;
    r.check(g > 0.0, "g", "must be > 0")?;
    Ok(g)
}

pub(crate) fn resolve_initial_amplitudes(r: &mut Resolver) -> Result<(C64, C64), ConfigError> {
    let a = C64::new(r.require_f64("alpha0_re")?, r.require_f64("alpha0_im")?);
    let b = C64::new(r.require_f64("beta0_re")?, r.require_f64("beta0_im")?);
    r.check(
        a.norm_sqr() + b.norm_sqr() > 0.0,
        "alpha0_re",
        "mode amplitudes are all zero",
    )?;
    Ok((a, b))
}

pub(crate) fn resolve_time_grid(r: &mut Resolver) -> Result<(f64, usize), ConfigError> {
    let t_max = r.require_f64("t_max")?;
    r.check(t_max > 0.0, "t_max", "must be > 0")?;
    let samples = r.require_usize("samples")?;
    r.check(samples >= 2, "samples", "need at least 2 samples")?;
    Ok((t_max, samples))
}

/// Settling time plus measurement window, defaulting to the trajectory's
/// second half, constrained to fit inside [0, t_max].
pub(crate) fn resolve_transient_window(
    r: &mut Resolver,
    t_max: f64,
) -> Result<(f64, f64), ConfigError> {
    let transient = r.f64_or("transient", t_max / 2.0)?;
    r.check(
        (0.0..t_max).contains(&transient),
        "transient",
        "must lie in [0, t_max)",
    )?;
    let window = r.f64_or("window", t_max - transient)?;
    r.check(window > 0.0, "window", "must be > 0")?;
    r.check(
        transient + window <= t_max * (1.0 + 1e-12),
        "window",
        "transient + window exceeds t_max",
    )?;
    Ok((transient, window))
}

fn resolve_chi_scan(r: &mut Resolver) -> Result<Vec<f64>, ConfigError> {
    let start = r.require_f64("chi_start")?;
    let stop = r.require_f64("chi_stop")?;
    let points = r.require_usize("chi_points")?;
    r.check(points >= 1, "chi_points", "need at least 1 point")?;
    r.check(points <= MAX_GRID_POINTS, "chi_points", "grid exceeds 10^7 points")?;
    Ok(linspace(start, stop, points))
}

fn resolve_workers(r: &mut Resolver) -> Result<usize, ConfigError> {
    let workers = r.usize_or("workers", 1)?;
    r.check(workers >= 1, "workers", "need at least 1 worker")?;
    Ok(workers)
}

fn phase_or_nan(phi: Option<f64>) -> f64 {
    phi.unwrap_or(f64::NAN)
}

fn meanfield_run(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let (delta, g, chi) = resolve_couplings(&mut r)?;
    let (a0, b0) = resolve_initial_amplitudes(&mut r)?;
    let (t_max, samples) = resolve_time_grid(&mut r)?;
    let output_path = r.str_or("output", "meanfield-run.csv");
    let echo = r.finish("meanfield-run")?;
    let columns = cols(&[
        "time", "alpha_re", "alpha_im", "beta_re", "beta_im", "r_minus", "phi_minus", "norm",
        "energy",
    ]);
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    let p = ModelParams::new(delta, g, chi);
    let s0 = ClassicalState::normalized(a0, b0).map_err(runtime)?;
    let traj = evolve(&s0, &p, t_max, samples).map_err(runtime)?;
    let ip = imbalance_phase(&traj);
    out.rows = traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(&ip)
        .map(|((t, s), q)| {
            vec![
                Cell::F(*t),
                Cell::F(s.alpha.re),
                Cell::F(s.alpha.im),
                Cell::F(s.beta.re),
                Cell::F(s.beta.im),
                Cell::F(q.r_minus),
                Cell::F(phase_or_nan(q.phi_minus)),
                Cell::F(s.norm_sq()),
                Cell::F(energy(s, &p)),
            ]
        })
        .collect();
    Ok(out)
}

fn portrait(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let (delta, g, chi) = resolve_couplings(&mut r)?;
    let n_orbits = r.usize_or("n_orbits", 8)?;
    r.check(n_orbits >= 1, "n_orbits", "need at least 1 orbit")?;
    let rng_seed = r.u64_or("rng_seed", 1)?;
    let (t_max, samples) = resolve_time_grid(&mut r)?;
    let output_path = r.str_or("output", "phase-portrait.csv");
    let echo = r.finish("phase-portrait")?;
    let columns = cols(&["orbit", "kind", "time", "r_minus", "phi_minus"]);
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    let p = ModelParams::new(delta, g, chi);
    let orbits = phase_portrait(&p, n_orbits, rng_seed, t_max, samples).map_err(runtime)?;
    let times = linspace_times(t_max, samples);
    for (i, orbit) in orbits.iter().enumerate() {
        let kind = match orbit.kind {
            SeedKind::Random => "random",
            SeedKind::Separatrix => "separatrix",
        };
        for (t, q) in times.iter().zip(&orbit.samples) {
            out.rows.push(vec![
                Cell::I(i),
                Cell::S(kind.into()),
                Cell::F(*t),
                Cell::F(q.r_minus),
                Cell::F(phase_or_nan(q.phi_minus)),
            ]);
        }
    }
    Ok(out)
}

fn ms_scan(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let delta = r.require_f64("delta")?;
    let g = resolve_g(&mut r)?;
    let chis = resolve_chi_scan(&mut r)?;
    let (a0, b0) = resolve_initial_amplitudes(&mut r)?;
    let (t_max, samples) = resolve_time_grid(&mut r)?;
    let window = r.f64_or("window", t_max / 2.0)?;
    r.check(
        window > 0.0 && window <= t_max,
        "window",
        "must lie in (0, t_max]",
    )?;
    let workers = resolve_workers(&mut r)?;
    let output_path = r.str_or("output", "ms-scan.csv");
    let echo = r.finish("ms-scan")?;
    let columns = cols(&["chi", "s_a", "s_b", "s_abs_diff", "d_ab"]);
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    let s0 = ClassicalState::normalized(a0, b0).map_err(runtime)?;
    let results = indexed_parallel(chis.len(), workers, |i| {
        let p = ModelParams::new(delta, g, chis[i]);
        let traj = evolve(&s0, &p, t_max, samples)?;
        let (sa, sb) = covering_areas(&traj, window);
        Ok::<_, becsync_core::Error>((sa, sb, trajectory_distance(&traj, window)))
    });
    for (chi, res) in chis.iter().zip(results) {
        let (sa, sb, d) = res.map_err(runtime)?;
        out.rows.push(vec![
            Cell::F(*chi),
            Cell::F(sa),
            Cell::F(sb),
            Cell::F((sa - sb).abs()),
            Cell::F(d),
        ]);
    }
    Ok(out)
}

fn amplitude_map(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let g = resolve_g(&mut r)?;
    let deltas = {
        let start = r.require_f64("delta_start")?;
        let stop = r.require_f64("delta_stop")?;
        let points = r.require_usize("delta_points")?;
        r.check(points >= 1, "delta_points", "need at least 1 point")?;
        linspace(start, stop, points)
    };
    let chis = resolve_chi_scan(&mut r)?;
    r.check(
        deltas.len().saturating_mul(chis.len()) <= MAX_GRID_POINTS,
        "delta_points",
        "grid exceeds 10^7 points",
    )?;
    let (a0, b0) = resolve_initial_amplitudes(&mut r)?;
    let (t_max, samples) = resolve_time_grid(&mut r)?;
    let (transient, window) = resolve_transient_window(&mut r, t_max)?;
    let workers = resolve_workers(&mut r)?;
    let output_path = r.str_or("output", "amplitude-map.csv");
    let echo = r.finish("amplitude-map")?;
    let columns = cols(&["delta", "chi", "r_minus_amplitude"]);
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    let s0 = ClassicalState::normalized(a0, b0).map_err(runtime)?;
    let n_chi = chis.len();
    let results = indexed_parallel(deltas.len() * n_chi, workers, |k| {
        let p = ModelParams::new(deltas[k / n_chi], g, chis[k % n_chi]);
        let traj = evolve(&s0, &p, t_max, samples)?;
        let r_series: Vec<f64> = imbalance_phase(&traj).iter().map(|q| q.r_minus).collect();
        Ok::<_, becsync_core::Error>(oscillation_amplitude(
            &traj.times,
            &r_series,
            transient,
            window,
        ))
    });
    for (k, res) in results.into_iter().enumerate() {
        let amp = res.map_err(runtime)?;
        out.rows.push(vec![
            Cell::F(deltas[k / n_chi]),
            Cell::F(chis[k % n_chi]),
            Cell::F(amp),
        ]);
    }
    Ok(out)
}

fn spectrum(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let n_total = r.require_usize("n_total")?;
    r.check(n_total >= 1, "n_total", "need at least 1 atom")?;
    let delta = r.require_f64("delta")?;
    let g = resolve_g(&mut r)?;
    let chis = resolve_chi_scan(&mut r)?;
    let output_path = r.str_or("output", "spectrum.csv");
    let echo = r.finish("spectrum")?;
    let mut columns = vec!["chi".to_string()];
    columns.extend((0..=n_total).map(|k| format!("lambda_{k}")));
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    for (chi, values) in spectrum_vs_chi(n_total, delta, g, &chis).map_err(runtime)? {
        let mut row = vec![Cell::F(chi)];
        row.extend(values.into_iter().map(Cell::F));
        out.rows.push(row);
    }
    Ok(out)
}

const FOCK_OBS: &[&str] = &["n_a", "var_n_a", "var_x_minus", "var_p_minus", "s_c", "s_c_bound"];

fn sector_observable(m: &SectorMoments, s_c: f64, bound: f64, name: &str) -> f64 {
    match name {
        "n_a" => m.n_a,
        "var_n_a" => m.var_n_a,
        "var_x_minus" => m.var_x_minus,
        "var_p_minus" => m.var_p_minus,
        "s_c" => s_c,
        "s_c_bound" => bound,
        other => unreachable!("unvalidated observable {other}"),
    }
}

fn fock_evolve(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let n_total = r.require_usize("n_total")?;
    r.check(n_total >= 1, "n_total", "need at least 1 atom")?;
    let j_init = r.usize_or("j_init", n_total)?;
    r.check(j_init <= n_total, "j_init", "exceeds n_total")?;
    let (delta, g, chi) = resolve_couplings(&mut r)?;
    let (t_max, samples) = resolve_time_grid(&mut r)?;
    let observables = r.list_or("observables", FOCK_OBS, FOCK_OBS)?;
    let output_path = r.str_or("output", "fock-evolve.csv");
    let echo = r.finish("fock-evolve")?;
    let mut columns = vec!["time".to_string()];
    columns.extend(observables.iter().cloned());
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    let p = QuantumParams::new(delta, g, chi, n_total);
    let c0 = FockStateN::number_state(n_total, j_init);
    let times = linspace_times(t_max, samples);
    let states = evolve_fock(&c0, &p, &times).map_err(runtime)?;
    for (t, state) in times.iter().zip(&states) {
        let m = sector_moments(state);
        let (s_c, bound) = mari_measure(m.var_x_minus, m.var_p_minus).map_err(runtime)?;
        let mut row = vec![Cell::F(*t)];
        row.extend(
            observables
                .iter()
                .map(|name| Cell::F(sector_observable(&m, s_c, bound, name))),
        );
        out.rows.push(row);
    }
    Ok(out)
}

const FULL_OBS: &[&str] = &[
    "n_a",
    "var_n_a",
    "mean_x_a",
    "mean_p_a",
    "mean_x_b",
    "mean_p_b",
    "var_x_minus",
    "var_p_minus",
    "s_c",
    "s_c_bound",
];

fn full_observable(m: &FullMoments, s_c: f64, bound: f64, name: &str) -> f64 {
    match name {
        "n_a" => m.n_a,
        "var_n_a" => m.var_n_a,
        "mean_x_a" => m.mean_x_a,
        "mean_p_a" => m.mean_p_a,
        "mean_x_b" => m.mean_x_b,
        "mean_p_b" => m.mean_p_b,
        "var_x_minus" => m.var_x_minus,
        "var_p_minus" => m.var_p_minus,
        "s_c" => s_c,
        "s_c_bound" => bound,
        other => unreachable!("unvalidated observable {other}"),
    }
}

fn coherent_evolve(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let spec = resolve_full_state(&mut r)?;
    let (t_max, samples) = resolve_time_grid(&mut r)?;
    let observables = r.list_or("observables", FULL_OBS, FULL_OBS)?;
    let output_path = r.str_or("output", "coherent-evolve.csv");
    let echo = r.finish("coherent-evolve")?;
    let mut columns = vec!["time".to_string()];
    columns.extend(observables.iter().cloned());
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    let times = linspace_times(t_max, samples);
    let EvolvedStates::Full(states) = spec.evolve(&times)? else {
        unreachable!("full spec evolves to full states");
    };
    for (t, state) in times.iter().zip(&states) {
        let m = full_moments(state);
        let (s_c, bound) = mari_measure(m.var_x_minus, m.var_p_minus).map_err(runtime)?;
        let mut row = vec![Cell::F(*t)];
        row.extend(
            observables
                .iter()
                .map(|name| Cell::F(full_observable(&m, s_c, bound, name))),
        );
        out.rows.push(row);
    }
    Ok(out)
}

/// Fully-resolved state + evolution parameters for the experiments that
/// accept either a fixed-N sector or the truncated full space.
enum StateSpec {
    Sector { n_total: usize, j_init: usize, delta: f64, g: f64, chi: f64 },
    Full { n_trunc: usize, alpha0: C64, poisson_window: bool, delta: f64, g: f64, chi: f64 },
}

/// Evolved snapshots in either representation.
enum EvolvedStates {
    Sector(Vec<FockStateN>),
    Full(Vec<TwoModeState>),
}

impl StateSpec {
    /// Largest reachable occupation of one mode, for grid defaults.
    fn cap(&self) -> usize {
        match self {
            StateSpec::Sector { n_total, .. } => *n_total,
            StateSpec::Full { n_trunc, .. } => *n_trunc,
        }
    }

    fn evolve(&self, times: &[f64]) -> Result<EvolvedStates, CliError> {
        let initial_only = times.len() == 1 && times[0] == 0.0;
        match *self {
            StateSpec::Sector { n_total, j_init, delta, g, chi } => {
                let c0 = FockStateN::number_state(n_total, j_init);
                if initial_only {
                    return Ok(EvolvedStates::Sector(vec![c0]));
                }
                let p = QuantumParams::new(delta, g, chi, n_total);
                Ok(EvolvedStates::Sector(
                    evolve_fock(&c0, &p, times).map_err(runtime)?,
                ))
            }
            StateSpec::Full { n_trunc, alpha0, poisson_window, delta, g, chi } => {
                let s0 = coherent_initial_windowed(alpha0, n_trunc, poisson_window)
                    .map_err(runtime)?;
                if initial_only {
                    return Ok(EvolvedStates::Full(vec![s0]));
                }
                let p = FullParams::new(delta, g, chi, n_trunc);
                let blocks = build_blocks(&p);
                Ok(EvolvedStates::Full(
                    evolve_full(&s0, &blocks, times).map_err(runtime)?,
                ))
            }
        }
    }
}

impl EvolvedStates {
    fn state_ref(&self, i: usize) -> StateRef<'_> {
        match self {
            EvolvedStates::Sector(v) => StateRef::Sector(&v[i]),
            EvolvedStates::Full(v) => StateRef::Full(&v[i]),
        }
    }

    fn variances(&self, i: usize) -> (f64, f64) {
        match self {
            EvolvedStates::Sector(v) => {
                let m = sector_moments(&v[i]);
                (m.var_x_minus, m.var_p_minus)
            }
            EvolvedStates::Full(v) => {
                let m = full_moments(&v[i]);
                (m.var_x_minus, m.var_p_minus)
            }
        }
    }
}

fn resolve_sector_state(r: &mut Resolver) -> Result<StateSpec, ConfigError> {
    let n_total = r.require_usize("n_total")?;
    r.check(n_total >= 1, "n_total", "need at least 1 atom")?;
    let j_init = r.usize_or("j_init", n_total)?;
    r.check(j_init <= n_total, "j_init", "exceeds n_total")?;
    let (delta, g, chi) = resolve_couplings(r)?;
    Ok(StateSpec::Sector { n_total, j_init, delta, g, chi })
}

fn resolve_full_state(r: &mut Resolver) -> Result<StateSpec, ConfigError> {
    let n_trunc = r.require_usize("n_trunc")?;
    r.check(n_trunc >= 1, "n_trunc", "need at least 1 quantum")?;
    let alpha0 = C64::new(r.require_f64("alpha0_re")?, r.require_f64("alpha0_im")?);
    let poisson_window = r.bool_or("poisson_window", false)?;
    let (delta, g, chi) = resolve_couplings(r)?;
    Ok(StateSpec::Full { n_trunc, alpha0, poisson_window, delta, g, chi })
}

fn resolve_state_spec(r: &mut Resolver) -> Result<StateSpec, ConfigError> {
    let space = r.require_choice("space", &["sector", "full"])?;
    if space == "sector" {
        resolve_sector_state(r)
    } else {
        resolve_full_state(r)
    }
}

fn q_snapshot_run(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let spec = resolve_state_spec(&mut r)?;
    let t = r.f64_or("t", 0.0)?;
    r.check(t >= 0.0, "t", "must be >= 0")?;
    let mode = r.choice_or("mode", &["a", "b"], "a")?;
    let convention = r.choice_or("convention", &["standard", "plain"], "standard")?;
    let n_r = r.usize_or("n_r", 240)?;
    r.check(n_r >= 2, "n_r", "need at least 2 radial nodes")?;
    let n_theta = r.usize_or("n_theta", 128)?;
    r.check(n_theta >= 1, "n_theta", "need at least 1 angular node")?;
    let r_max = r.f64_or("r_max", (4.0 * (spec.cap() as f64 + 1.0)).sqrt().max(5.5))?;
    r.check(r_max > 0.0, "r_max", "must be > 0")?;
    let output_path = r.str_or("output", "q-snapshot.csv");
    let echo = r.finish("q-snapshot")?;
    let columns = cols(&["r", "theta", "q"]);
    let mut out = RunOutput { columns, echo, output_path, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    let states = spec.evolve(&[t])?;
    let conv = if convention == "plain" {
        MeasureConvention::Plain
    } else {
        MeasureConvention::Standard
    };
    let mode = if mode == "b" { Mode::B } else { Mode::A };
    let grid = PolarGrid::new(r_max, n_r, n_theta, conv);
    let q = q_snapshot(states.state_ref(0), &grid, mode);
    let boundary = q.boundary_max();
    if boundary > 1e-6 {
        eprintln!(
            "warning: Q carries {boundary:.3e} at the grid boundary; raise r_max to resolve the state"
        );
    }
    out.boundary_max = Some(boundary);
    for (i_r, radius) in q.grid.r_nodes.iter().enumerate() {
        for (i_th, theta) in q.grid.theta_nodes.iter().enumerate() {
            out.rows.push(vec![
                Cell::F(*radius),
                Cell::F(*theta),
                Cell::F(q.value(i_r, i_th)),
            ]);
        }
    }
    Ok(out)
}

const MI_VARIANTS: &[&str] = &["direct_kl", "reduced_radial", "reduced_area", "von_neumann"];

fn mi_variant(name: &str) -> MiVariant {
    match name {
        "direct_kl" => MiVariant::DirectKl,
        "reduced_radial" => MiVariant::ReducedRadial,
        "reduced_area" => MiVariant::ReducedArea,
        "von_neumann" => MiVariant::VonNeumann,
        other => unreachable!("unvalidated variant {other}"),
    }
}

/// Mutual information of one sample under the chosen variant; grids are
/// rebuilt per call so the parallel workers stay independent.
fn sample_mi(
    states: &EvolvedStates,
    i: usize,
    variant: MiVariant,
    n_r: usize,
    n_theta: usize,
    r_max: f64,
) -> f64 {
    match variant {
        MiVariant::VonNeumann => von_neumann_mutual(states.state_ref(i)),
        MiVariant::DirectKl => {
            let grid = PolarGrid::new(r_max, n_r, n_theta, MeasureConvention::Standard);
            mutual_information_direct(states.state_ref(i), &grid, &grid)
        }
        MiVariant::ReducedRadial | MiVariant::ReducedArea => match states {
            EvolvedStates::Sector(v) => {
                let both = reduced_mutual_information_fixed_n(&v[i], n_r, r_max);
                if variant == MiVariant::ReducedRadial {
                    both.radial
                } else {
                    both.area
                }
            }
            EvolvedStates::Full(v) => {
                if variant == MiVariant::ReducedRadial {
                    let grid = PolarGrid::new(r_max, n_r, n_theta, MeasureConvention::Plain);
                    reduced_mutual_information_full(&v[i], &grid)
                } else {
                    // the area companion: the same plain-form marginal,
                    // integrated with the Jacobian, -2 ∫ Q ln Q d²α/π
                    let grid = PolarGrid::new(r_max, n_r, n_theta, MeasureConvention::Standard);
                    -2.0 * polar_quadrature(&grid, |radius, theta| {
                        let q = q_marginal_full(
                            &v[i],
                            C64::from_polar(radius, theta),
                            Mode::A,
                            MeasureConvention::Plain,
                        );
                        if q > 1e-300 {
                            q * q.ln()
                        } else {
                            0.0
                        }
                    })
                }
            }
        },
    }
}

fn measures(raw: &RawConfig, execute: bool) -> Result<RunOutput, CliError> {
    let mut r = Resolver::new(raw);
    let spec = resolve_state_spec(&mut r)?;
    let (t_max, samples) = resolve_time_grid(&mut r)?;
    let variant_name = r.require_choice("variant", MI_VARIANTS)?;
    let variant = mi_variant(&variant_name);
    // direct KL integrates over the joint grid (node count squared), so its
    // default grid is much coarser than the single-mode variants'
    let (r_default, theta_default) =
        if variant == MiVariant::DirectKl { (48, 16) } else { (160, 64) };
    let n_r = r.usize_or("n_r", r_default)?;
    r.check(n_r >= 2, "n_r", "need at least 2 radial nodes")?;
    let n_theta = r.usize_or("n_theta", theta_default)?;
    r.check(n_theta >= 1, "n_theta", "need at least 1 angular node")?;
    let r_max = r.f64_or("r_max", (4.0 * (spec.cap() as f64 + 1.0)).sqrt().max(5.5))?;
    r.check(r_max > 0.0, "r_max", "must be > 0")?;
    let workers = resolve_workers(&mut r)?;
    let output_path = r.str_or("output", "measures.csv");
    let echo = r.finish("measures")?;
    let columns = cols(&["time", "s_c", "s_c_bound", "i_ab"]);
    let mut column_variants = BTreeMap::new();
    column_variants.insert("i_ab".to_string(), variant.name().to_string());
    let mut out =
        RunOutput { columns, echo, output_path, column_variants, ..Default::default() };
    if !execute {
        return Ok(out);
    }
    let times = linspace_times(t_max, samples);
    let states = spec.evolve(&times)?;
    let i_ab = indexed_parallel(times.len(), workers, |i| {
        sample_mi(&states, i, variant, n_r, n_theta, r_max)
    });
    for (i, t) in times.iter().enumerate() {
        let (var_x, var_p) = states.variances(i);
        let (s_c, bound) = mari_measure(var_x, var_p).map_err(runtime)?;
        out.rows.push(vec![
            Cell::F(*t),
            Cell::F(s_c),
            Cell::F(bound),
            Cell::F(i_ab[i]),
        ]);
    }
    Ok(out)
}
