//! Classical mean-field dynamics of the two coupled modes and the
//! measure-synchronization diagnostics defined on their phase-space orbits.
//!
//! State variables are the normalized amplitudes (|α|² + |β|² = 1); time is
//! the rescaled τ and all frequencies are in units of the linear coupling.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64 as C64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::numerics::integrate_ode;
use crate::{Error, Result};

/// Amplitude below which a relative phase is reported as indeterminate.
pub const PHASE_FLOOR: f64 = 1e-12;

/// Local error target for `evolve`; tight enough that norm drift stays an
/// order below 1e-9 over the longest runs used anywhere.
const EVOLVE_TOL: f64 = 1e-12;

/// Separatrix portrait seeds sit just inside the poles, where the relative
/// phase is still defined.
const SEPARATRIX_IMBALANCE: f64 = 1.0 - 1e-6;

/// Model frequencies: detuning, linear coupling, nonlinear coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub delta_bar: f64,
    pub g_bar: f64,
    pub chi: f64,
}

impl ModelParams {
    pub fn new(delta_bar: f64, g_bar: f64, chi: f64) -> Self {
        assert!(
            delta_bar.is_finite() && g_bar.is_finite() && chi.is_finite(),
            "model parameters must be finite"
        );
        assert!(g_bar > 0.0, "linear coupling must be positive");
        Self { delta_bar, g_bar, chi }
    }
}

/// Pair of mode amplitudes on the unit shell |α|² + |β|² = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalState {
    pub alpha: C64,
    pub beta: C64,
}

impl ClassicalState {
    pub fn new(alpha: C64, beta: C64) -> Self {
        let s = Self { alpha, beta };
        assert!((s.norm_sq() - 1.0).abs() <= 1e-9, "state off the unit shell");
        s
    }

    /// Rescale an arbitrary nonzero pair onto the unit shell.
    pub fn normalized(alpha: C64, beta: C64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !n.is_finite() || n == 0.0 {
            return Err(Error::NonFiniteInput { what: "state norm".into() });
        }
        Ok(Self { alpha: alpha / n, beta: beta / n })
    }

    pub fn norm_sq(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }
}

/// Build the unit-shell state with intensity imbalance R₋ and relative
/// phase φ₋ (mode B taken real nonnegative).
pub fn state_from_imbalance(r_minus: f64, phi_minus: f64) -> ClassicalState {
    assert!(r_minus.abs() <= 1.0, "imbalance outside [-1, 1]");
    let ra = ((1.0 + r_minus) / 2.0).sqrt();
    let rb = ((1.0 - r_minus) / 2.0).sqrt();
    ClassicalState { alpha: C64::from_polar(ra, phi_minus), beta: C64::new(rb, 0.0) }
}

/// Trajectory sampled on a uniform τ grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<ClassicalState>,
}

/// Amplitude ratio r = r_A/r_B and relative phase φ₋.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarState {
    pub r: f64,
    pub phi_minus: f64,
}

/// One trajectory sample mapped to (R₋, φ₋); the phase is absent where
/// either amplitude sits below `PHASE_FLOOR`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    pub r_minus: f64,
    pub phi_minus: Option<f64>,
}

/// Right-hand sides (dα/dτ, dβ/dτ) of the coupled-mode equations.
///
/// Swapping (α, β) and negating the detuning swaps the two outputs.
pub fn derivatives(s: &ClassicalState, p: &ModelParams) -> (C64, C64) {
    let (a, b) = (s.alpha, s.beta);
    let na = a.norm_sqr();
    let nb = b.norm_sqr();
    let i = C64::new(0.0, 1.0);
    let rhs_a = p.delta_bar * a
        + p.g_bar * b
        + 2.0 * p.chi * (1.0 + nb) * a
        + p.chi * (1.0 + na) * b
        + p.chi * b.conj() * a * a;
    let rhs_b = -p.delta_bar * b
        + p.g_bar * a
        + 2.0 * p.chi * (1.0 + na) * b
        + p.chi * (1.0 + nb) * a
        + p.chi * a.conj() * b * b;
    (-i * rhs_a, -i * rhs_b)
}

/// Integrate the coupled-mode equations from τ = 0 to `t_max`, sampling
/// `samples` states uniformly (endpoints included).
pub fn evolve(
    s0: &ClassicalState,
    p: &ModelParams,
    t_max: f64,
    samples: usize,
) -> Result<Trajectory> {
    assert!(t_max > 0.0, "t_max must be positive");
    assert!((s0.norm_sq() - 1.0).abs() <= 1e-9, "initial state off the unit shell");
    let y0 = [s0.alpha, s0.beta];
    let sol = integrate_ode(
        |_, y, dy| {
            let s = ClassicalState { alpha: y[0], beta: y[1] };
            let (da, db) = derivatives(&s, p);
            dy[0] = da;
            dy[1] = db;
        },
        &y0,
        (0.0, t_max),
        EVOLVE_TOL,
        samples,
    )?;
    let states = sol
        .states
        .iter()
        .map(|y| ClassicalState { alpha: y[0], beta: y[1] })
        .collect();
    Ok(Trajectory { times: sol.times, states })
}

/// Quadrature errors (x₋, p₋) per sample; with x = √2 Re α, p = √2 Im α
/// the halved differences reduce to x₋ = Re(α − β), p₋ = Im(α − β).
pub fn quadrature_errors(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.states
        .iter()
        .map(|s| {
            let d = s.alpha - s.beta;
            (d.re, d.im)
        })
        .collect()
}

/// Map a trajectory to (R₋ = |α|² − |β|², φ₋ = arg α − arg β), the phase
/// wrapped to [0, 2π) and dropped near the poles.
pub fn imbalance_phase(traj: &Trajectory) -> Vec<PhaseSample> {
    traj.states
        .iter()
        .map(|s| {
            let r_minus = s.alpha.norm_sqr() - s.beta.norm_sqr();
            let phi_minus = if s.alpha.norm() < PHASE_FLOOR || s.beta.norm() < PHASE_FLOOR {
                None
            } else {
                Some((s.alpha.arg() - s.beta.arg()).rem_euclid(TAU))
            };
            PhaseSample { r_minus, phi_minus }
        })
        .collect()
}

/// Polar flow (ṙ, φ̇₋) for the amplitude ratio r = r_A/r_B.
pub fn polar_flow(ps: &PolarState, p: &ModelParams) -> Result<(f64, f64)> {
    if !(ps.r > 0.0) || !ps.r.is_finite() {
        return Err(Error::NonpositiveRadius { r: ps.r });
    }
    let (sin_phi, cos_phi) = ps.phi_minus.sin_cos();
    let gc = p.g_bar + p.chi;
    let r2 = ps.r * ps.r;
    let r_dot = -gc * (r2 + 1.0) * sin_phi;
    let phi_dot = -2.0 * p.delta_bar
        + 2.0 * p.chi * (r2 - 1.0) / (r2 + 1.0)
        + gc * (ps.r - 1.0 / ps.r) * cos_phi;
    Ok((r_dot, phi_dot))
}

/// Conserved energy on the unit shell.
///
/// The normalized equations of motion are canonical only on the shell;
/// restricted there, the generating functional reduces (up to a constant)
/// to this form. χ = 0 gives the familiar linear-coupling energy.
pub fn energy(s: &ClassicalState, p: &ModelParams) -> f64 {
    let na = s.alpha.norm_sqr();
    let nb = s.beta.norm_sqr();
    let cross = 2.0 * (s.alpha.conj() * s.beta).re;
    p.delta_bar * (na - nb) + (p.g_bar + p.chi) * cross + 2.0 * p.chi * na * nb
}

/// How a portrait orbit was seeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedKind {
    Random,
    Separatrix,
}

/// One phase-portrait orbit: its seed and the sampled (R₋, φ₋) curve.
#[derive(Debug, Clone)]
pub struct PortraitOrbit {
    pub kind: SeedKind,
    pub seed: ClassicalState,
    pub samples: Vec<PhaseSample>,
}

/// Evolve `n_orbits` randomly seeded orbits plus the four distinguished
/// separatrix seeds (φ₋ = π/2, 3π/2 next to each pole), all deterministic
/// in `rng_seed`.
pub fn phase_portrait(
    p: &ModelParams,
    n_orbits: usize,
    rng_seed: u64,
    t_max: f64,
    samples: usize,
) -> Result<Vec<PortraitOrbit>> {
    assert!(n_orbits >= 1, "need at least one random orbit");
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut orbits = Vec::with_capacity(n_orbits + 4);
    for _ in 0..n_orbits {
        let r_minus = (2.0 * unit_f64(&mut rng) - 1.0) * 0.999;
        let phi = unit_f64(&mut rng) * TAU;
        orbits.push(run_orbit(SeedKind::Random, r_minus, phi, p, t_max, samples)?);
    }
    for &(phi, r_minus) in &[
        (FRAC_PI_2, SEPARATRIX_IMBALANCE),
        (FRAC_PI_2, -SEPARATRIX_IMBALANCE),
        (3.0 * FRAC_PI_2, SEPARATRIX_IMBALANCE),
        (3.0 * FRAC_PI_2, -SEPARATRIX_IMBALANCE),
    ] {
        orbits.push(run_orbit(SeedKind::Separatrix, r_minus, phi, p, t_max, samples)?);
    }
    Ok(orbits)
}

fn run_orbit(
    kind: SeedKind,
    r_minus: f64,
    phi_minus: f64,
    p: &ModelParams,
    t_max: f64,
    samples: usize,
) -> Result<PortraitOrbit> {
    let seed = state_from_imbalance(r_minus, phi_minus);
    let traj = evolve(&seed, p, t_max, samples)?;
    Ok(PortraitOrbit { kind, seed, samples: imbalance_phase(&traj) })
}

/// Uniform draw on [0, 1) with the full 53-bit mantissa.
fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Covering areas (S_A, S_B), S = π(max r² − min r²), over the trailing
/// `window` of the trajectory.
pub fn covering_areas(traj: &Trajectory, window: f64) -> (f64, f64) {
    let start = window_start(traj, window);
    let (ra, rb) = radii_series(traj, start);
    let area = |r: &[f64]| {
        let (lo, hi) = refined_extrema(r);
        PI * (hi * hi - lo * lo)
    };
    (area(&ra), area(&rb))
}

/// Trajectory distance d_AB = min r_A − max r_B over the trailing window;
/// positive means the two rings are disjoint.
pub fn trajectory_distance(traj: &Trajectory, window: f64) -> f64 {
    let start = window_start(traj, window);
    let (ra, rb) = radii_series(traj, start);
    refined_extrema(&ra).0 - refined_extrema(&rb).1
}

/// Half the peak-to-peak excursion of `values` over the time window
/// [transient, transient + window].
pub fn oscillation_amplitude(
    times: &[f64],
    values: &[f64],
    transient: f64,
    window: f64,
) -> f64 {
    assert_eq!(times.len(), values.len(), "series length mismatch");
    assert!(window > 0.0 && transient >= 0.0);
    let t_end = transient + window;
    assert!(
        t_end <= *times.last().expect("empty series") * (1.0 + 1e-12) + 1e-300,
        "window extends past the series"
    );
    let picked: Vec<f64> = times
        .iter()
        .zip(values)
        .filter(|(t, _)| **t >= transient && **t <= t_end)
        .map(|(_, v)| *v)
        .collect();
    assert!(picked.len() >= 2, "window contains fewer than two samples");
    let (lo, hi) = refined_extrema(&picked);
    (hi - lo) / 2.0
}

/// Continue a wrapped phase series across branch cuts by nearest-branch
/// steps; the first sample is kept as given.
pub fn unwrap_phase(wrapped: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(wrapped.len());
    let mut offset = 0.0;
    for (i, &w) in wrapped.iter().enumerate() {
        if i > 0 {
            let prev: f64 = out[i - 1];
            let mut d = w + offset - prev;
            while d > PI {
                offset -= TAU;
                d -= TAU;
            }
            while d < -PI {
                offset += TAU;
                d += TAU;
            }
        }
        out.push(w + offset);
    }
    out
}

/// Index of the first sample inside the trailing window.
fn window_start(traj: &Trajectory, window: f64) -> usize {
    let t_end = *traj.times.last().expect("empty trajectory");
    let span = t_end - traj.times[0];
    assert!(window > 0.0 && window <= span * (1.0 + 1e-12), "window exceeds the trajectory span");
    let cut = t_end - window - 1e-12 * span.max(1.0);
    traj.times.iter().position(|&t| t >= cut).unwrap()
}

fn radii_series(traj: &Trajectory, start: usize) -> (Vec<f64>, Vec<f64>) {
    let ra = traj.states[start..].iter().map(|s| s.alpha.norm()).collect();
    let rb = traj.states[start..].iter().map(|s| s.beta.norm()).collect();
    (ra, rb)
}

/// Grid extrema sharpened by the parabola through each interior extremum
/// and its neighbors; assumes uniform sampling.
fn refined_extrema(values: &[f64]) -> (f64, f64) {
    assert!(!values.is_empty());
    let n = values.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let v = values[i];
        let mut refined = v;
        if i > 0 && i + 1 < n {
            let local_max = v >= values[i - 1] && v >= values[i + 1];
            let local_min = v <= values[i - 1] && v <= values[i + 1];
            if local_max || local_min {
                let den = values[i - 1] - 2.0 * v + values[i + 1];
                if den.abs() > 1e-12 * v.abs().max(1.0) {
                    let num = values[i + 1] - values[i - 1];
                    refined = v - num * num / (8.0 * den);
                }
            }
        }
        lo = lo.min(refined.min(v));
        hi = hi.max(refined.max(v));
    }
    (lo, hi)
}
