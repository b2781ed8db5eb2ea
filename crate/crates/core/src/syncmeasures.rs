//! Synchronization measures: the variance-based S_c with its bound chain,
//! mutual information over Q-functions in three variants, and windowed
//! fluctuation statistics.
//!
//! The mutual-information variants are deliberately separate and never
//! interchanged:
//! - `DirectKl`: KL divergence of the joint Q from the product of its
//!   marginals under the standard measure. A true mutual information,
//!   zero exactly on product states.
//! - `ReducedRadial` and `ReducedArea`: marginal-entropy reductions over
//!   the plain-convention marginal of mode A. They are entropy-like series
//!   for figure-style comparisons, not KL quantities: product states give
//!   nonzero values (the vacuum gives a negative one).
//! - `VonNeumann`: 2 S(ρ_A) from the reduced density operator, the pure
//!   state entanglement form.

use num_complex::Complex64 as C64;

use crate::focksector::FockStateN;
use crate::fullspace::{tri_index, TwoModeState};
use crate::husimi::{
    q_joint_fixed_n, q_joint_full, q_marginal_fixed_n, q_marginal_full, Mode, StateRef,
};
use crate::numerics::{
    gauss_legendre, hermitian_eigenvalues, polar_quadrature, MeasureConvention, PolarGrid,
};
use crate::{Error, Result};

/// Densities below this are treated as exact zeros inside logarithms.
const DENSITY_FLOOR: f64 = 1e-300;

/// S_c = 1/(σ²(x₋)+σ²(p₋)) and its bound 1/(2σ(x₋)σ(p₋)); with exact
/// variances s_c ≤ bound ≤ 1/2.
pub fn mari_measure(var_x_minus: f64, var_p_minus: f64) -> Result<(f64, f64)> {
    for v in [var_x_minus, var_p_minus] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::NonpositiveVariance { value: v });
        }
    }
    let s_c = 1.0 / (var_x_minus + var_p_minus);
    let bound = 1.0 / (2.0 * (var_x_minus * var_p_minus).sqrt());
    Ok((s_c, bound))
}

// −Σ λ ln λ over the positive entries; tiny negatives from eigensolver
// roundoff are dropped with the zeros
fn entropy<I: IntoIterator<Item = f64>>(probs: I) -> f64 {
    probs
        .into_iter()
        .filter(|l| *l > DENSITY_FLOOR)
        .map(|l| -l * l.ln())
        .sum()
}

/// Reduced density matrix of one mode, row-major (n_trunc+1)²;
/// entry (k, k') = Σ_b C_{k,b} C*_{k',b} for mode A.
pub fn reduced_density_full(s: &TwoModeState, mode: Mode) -> Vec<C64> {
    let n = s.n_trunc;
    let dim = n + 1;
    let mut rho = vec![C64::new(0.0, 0.0); dim * dim];
    for k in 0..dim {
        for kp in 0..dim {
            let b_max = (n - k).min(n - kp);
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..=b_max {
                let (i, ip) = match mode {
                    Mode::A => (tri_index(k, b), tri_index(kp, b)),
                    Mode::B => (tri_index(b, k), tri_index(b, kp)),
                };
                acc += s.c[i] * s.c[ip].conj();
            }
            rho[k * dim + kp] = acc;
        }
    }
    rho
}

/// I = 2 S(ρ_A) for a pure state. In a fixed-total sector ρ_A is diagonal
/// with entries |C_j|², so no eigensolve is needed there.
pub fn von_neumann_mutual(state: StateRef) -> f64 {
    match state {
        StateRef::Sector(c) => 2.0 * entropy(c.c.iter().map(|z| z.norm_sqr())),
        StateRef::Full(s) => {
            let dim = s.n_trunc + 1;
            let evals = hermitian_eigenvalues(&reduced_density_full(s, Mode::A), dim);
            2.0 * entropy(evals)
        }
    }
}

/// ∬∬ Q ln[Q/(Q_A Q_B)] d²α_A/π d²α_B/π on the product of the two grids,
/// both of which must carry the standard measure. Nodes where the joint or
/// the marginal product underflow `DENSITY_FLOOR` are dropped.
pub fn mutual_information_direct(
    state: StateRef,
    grid_a: &PolarGrid,
    grid_b: &PolarGrid,
) -> f64 {
    assert!(
        grid_a.convention == MeasureConvention::Standard
            && grid_b.convention == MeasureConvention::Standard,
        "KL form is defined under the standard measure"
    );
    let marginal = |alpha: C64, mode: Mode| match state {
        StateRef::Sector(c) => q_marginal_fixed_n(c, alpha, mode, MeasureConvention::Standard),
        StateRef::Full(s) => q_marginal_full(s, alpha, mode, MeasureConvention::Standard),
    };
    let joint = |aa: C64, ab: C64| match state {
        StateRef::Sector(c) => q_joint_fixed_n(c, aa, ab),
        StateRef::Full(s) => q_joint_full(s, aa, ab),
    };
    // marginals once per node of each grid
    let nodes = |g: &PolarGrid, mode: Mode| -> (Vec<C64>, Vec<f64>, Vec<f64>) {
        let mut alphas = Vec::with_capacity(g.n_r * g.n_theta);
        let mut weights = Vec::with_capacity(alphas.capacity());
        let mut q = Vec::with_capacity(alphas.capacity());
        for (i, &r) in g.r_nodes.iter().enumerate() {
            for (k, &th) in g.theta_nodes.iter().enumerate() {
                let alpha = C64::from_polar(r, th);
                alphas.push(alpha);
                weights.push(g.node_weight(i, k));
                q.push(marginal(alpha, mode));
            }
        }
        (alphas, weights, q)
    };
    let (alphas_a, w_a, q_a) = nodes(grid_a, Mode::A);
    let (alphas_b, w_b, q_b) = nodes(grid_b, Mode::B);
    let mut total = 0.0;
    for ia in 0..alphas_a.len() {
        for ib in 0..alphas_b.len() {
            let qj = joint(alphas_a[ia], alphas_b[ib]);
            if qj < DENSITY_FLOOR {
                continue;
            }
            let denom = q_a[ia] * q_b[ib];
            if denom < DENSITY_FLOOR {
                continue;
            }
            total += w_a[ia] * w_b[ib] * qj * (qj / denom).ln();
        }
    }
    total
}

/// The two marginal-entropy reductions evaluated from one radial rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedMi {
    /// −4 ∫ Q(r) ln Q(r) dr, no radial Jacobian
    pub radial: f64,
    /// −2 ∫ Q ln Q d²α/π over the same plain-convention marginal
    pub area: f64,
}

/// Marginal-entropy reductions of a fixed-total state; the integrand is
/// the plain-convention mode-A marginal, which is radially symmetric, so a
/// Gauss-Legendre rule on [0, r_max] resolves both forms.
pub fn reduced_mutual_information_fixed_n(
    c: &FockStateN,
    n_r: usize,
    r_max: f64,
) -> ReducedMi {
    assert!(r_max.is_finite() && r_max > 0.0, "radial cutoff must be positive");
    let (x, w) = gauss_legendre(n_r);
    let half = 0.5 * r_max;
    let (mut radial, mut area) = (0.0, 0.0);
    for (xi, wi) in x.iter().zip(&w) {
        let r = half * (xi + 1.0);
        let wr = half * wi;
        let q = q_marginal_fixed_n(c, C64::new(r, 0.0), Mode::A, MeasureConvention::Plain);
        if q > DENSITY_FLOOR {
            let f = q * q.ln();
            radial += wr * f;
            // θ-independent integrand: ∫ d²α/π = 2 ∫ r dr
            area += wr * r * f;
        }
    }
    ReducedMi { radial: -4.0 * radial, area: -4.0 * area }
}

/// −(2/π) ∬ Q(r,θ) ln Q(r,θ) dr dθ over the plain-convention mode-A
/// marginal of a truncated state; the grid must carry the plain measure.
pub fn reduced_mutual_information_full(s: &TwoModeState, grid: &PolarGrid) -> f64 {
    assert!(
        grid.convention == MeasureConvention::Plain,
        "the reduced form integrates dr dθ without the Jacobian"
    );
    // polar_quadrature already divides by π, so −2/π ∬ is −2 × it
    -2.0 * polar_quadrature(grid, |r, th| {
        let q = q_marginal_full(s, C64::from_polar(r, th), Mode::A, MeasureConvention::Plain);
        if q > DENSITY_FLOOR {
            q * q.ln()
        } else {
            0.0
        }
    })
}

/// Which formula produced a mutual-information series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiVariant {
    DirectKl,
    ReducedRadial,
    ReducedArea,
    VonNeumann,
}

impl MiVariant {
    pub fn name(self) -> &'static str {
        match self {
            MiVariant::DirectKl => "mi_direct_kl",
            MiVariant::ReducedRadial => "mi_reduced_radial",
            MiVariant::ReducedArea => "mi_reduced_area",
            MiVariant::VonNeumann => "mi_von_neumann",
        }
    }
}

/// Synchronization measures sampled on a common time grid.
#[derive(Debug, Clone)]
pub struct MeasureSeries {
    pub times: Vec<f64>,
    pub s_c: Vec<f64>,
    pub s_c_bound: Vec<f64>,
    pub i_ab: Vec<f64>,
    pub variant: MiVariant,
}

impl MeasureSeries {
    pub fn new(
        times: Vec<f64>,
        s_c: Vec<f64>,
        s_c_bound: Vec<f64>,
        i_ab: Vec<f64>,
        variant: MiVariant,
    ) -> Self {
        assert!(
            times.len() == s_c.len()
                && times.len() == s_c_bound.len()
                && times.len() == i_ab.len(),
            "series lengths must agree"
        );
        Self { times, s_c, s_c_bound, i_ab, variant }
    }
}

/// Mean of each consecutive disjoint window of `len` samples; a trailing
/// partial window is dropped.
pub fn windowed_mean(v: &[f64], len: usize) -> Vec<f64> {
    assert!(len >= 1 && v.len() >= len, "window longer than the series");
    v.chunks_exact(len)
        .map(|w| w.iter().sum::<f64>() / len as f64)
        .collect()
}

/// Population variance of each consecutive disjoint window.
pub fn windowed_variance(v: &[f64], len: usize) -> Vec<f64> {
    assert!(len >= 2 && v.len() >= len, "window too short");
    v.chunks_exact(len)
        .map(|w| {
            let m = w.iter().sum::<f64>() / len as f64;
            w.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / len as f64
        })
        .collect()
}

/// Spearman rank correlation. Exact ties get distinct ranks in input
/// order; the series compared here are continuous-valued.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "series lengths must agree");
    assert!(a.len() >= 2, "need at least two samples");
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].total_cmp(&v[j]));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    pearson(&rank(a), &rank(b))
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}
