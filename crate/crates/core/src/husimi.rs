//! Husimi Q-function evaluation for both state families: joint values,
//! their Cauchy bounds, single-mode marginals in two measure conventions,
//! and grid snapshots.
//!
//! All factorial and Gamma factors are accumulated in the log domain, so
//! occupations up to a few hundred stay finite. The `Standard` convention
//! integrates mode B out with the Jacobian-correct measure d²α/π and keeps
//! marginals bounded by 1; `Plain` drops the radial Jacobian, which turns
//! the traced factorials into half-integer Gamma factors and lets marginal
//! values exceed 1 (the vacuum marginal reaches Γ(1/2) = √π).

use num_complex::Complex64 as C64;

use crate::focksector::FockStateN;
use crate::fullspace::{tri_index, TwoModeState};
use crate::numerics::{ln_factorial, log_gamma, MeasureConvention, PolarGrid};

/// Which mode a marginal keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    A,
    B,
}

/// Borrowed state of either family for grid snapshots.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Sector(&'a FockStateN),
    Full(&'a TwoModeState),
}

// k · ln r with the k = 0 case pinned to 0 so r = 0 never produces 0 · (−∞)
fn ln_pow(r: f64, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * r.ln()
    }
}

// log of the traced-mode weight: b! under Standard, Γ(b+1/2) under Plain
fn ln_trace_weight(traced: usize, convention: MeasureConvention) -> f64 {
    match convention {
        MeasureConvention::Standard => ln_factorial(traced),
        MeasureConvention::Plain => log_gamma(traced as f64 + 0.5),
    }
}

/// Joint Q of a fixed-total state,
/// |Σ_j C_j (αA*)ʲ(αB*)^{N−j}/√(j!(N−j)!)|² e^{−(|αA|²+|αB|²)}.
pub fn q_joint_fixed_n(c: &FockStateN, alpha_a: C64, alpha_b: C64) -> f64 {
    let n = c.n_total;
    let (ra, rb) = (alpha_a.norm(), alpha_b.norm());
    let r_sq = ra * ra + rb * rb;
    let mut ln_mags = vec![f64::NEG_INFINITY; n + 1];
    let mut m = f64::NEG_INFINITY;
    for j in 0..=n {
        if c.c[j] == C64::new(0.0, 0.0) || (ra == 0.0 && j > 0) || (rb == 0.0 && j < n) {
            continue;
        }
        let lm = c.c[j].norm().ln() + ln_pow(ra, j) + ln_pow(rb, n - j)
            - 0.5 * (ln_factorial(j) + ln_factorial(n - j));
        ln_mags[j] = lm;
        m = m.max(lm);
    }
    if m == f64::NEG_INFINITY {
        return 0.0;
    }
    let (ta, tb) = (alpha_a.arg(), alpha_b.arg());
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..=n {
        if ln_mags[j] == f64::NEG_INFINITY {
            continue;
        }
        let phase = c.c[j].arg() - j as f64 * ta - (n - j) as f64 * tb;
        acc += C64::from_polar((ln_mags[j] - m).exp(), phase);
    }
    (2.0 * m - r_sq).exp() * acc.norm_sqr()
}

/// Cauchy bound on the fixed-total joint Q, (R²)ᴺ e^{−R²}/N! at
/// R² = |αA|² + |αB|²; every `q_joint_fixed_n` value sits at or below it.
pub fn q_joint_bound_fixed_n(n_total: usize, alpha_a: C64, alpha_b: C64) -> f64 {
    let r_sq = alpha_a.norm_sqr() + alpha_b.norm_sqr();
    if r_sq == 0.0 {
        return if n_total == 0 { 1.0 } else { 0.0 };
    }
    (n_total as f64 * r_sq.ln() - r_sq - ln_factorial(n_total)).exp()
}

/// Single-mode marginal of a fixed-total state. Under `Plain` this is the
/// half-integer-Gamma series (weight Γ(N−j+1/2) for mode A, Γ(j+1/2) for
/// mode B); under `Standard` the traced factorial replaces the Gamma and
/// the series collapses to the Husimi function of the reduced state.
pub fn q_marginal_fixed_n(
    c: &FockStateN,
    alpha: C64,
    mode: Mode,
    convention: MeasureConvention,
) -> f64 {
    let n = c.n_total;
    let x = alpha.norm_sqr();
    let mut ln_terms = vec![f64::NEG_INFINITY; n + 1];
    let mut m = f64::NEG_INFINITY;
    for j in 0..=n {
        let w = c.c[j].norm_sqr();
        let (kept, traced) = match mode {
            Mode::A => (j, n - j),
            Mode::B => (n - j, j),
        };
        if w == 0.0 || (x == 0.0 && kept > 0) {
            continue;
        }
        let lt = w.ln() + ln_trace_weight(traced, convention) + ln_pow(x, kept)
            - ln_factorial(j)
            - ln_factorial(n - j);
        ln_terms[j] = lt;
        m = m.max(lt);
    }
    if m == f64::NEG_INFINITY {
        return 0.0;
    }
    let sum: f64 = ln_terms
        .iter()
        .filter(|lt| **lt > f64::NEG_INFINITY)
        .map(|lt| (lt - m).exp())
        .sum();
    (m - x).exp() * sum
}

/// Joint Q of a truncated two-mode state,
/// |Σ C_{k,l} (αA*)ᵏ(αB*)ˡ/√(k!l!)|² e^{−(|αA|²+|αB|²)}; always in [0, 1].
pub fn q_joint_full(s: &TwoModeState, alpha_a: C64, alpha_b: C64) -> f64 {
    let n = s.n_trunc;
    let (ra, rb) = (alpha_a.norm(), alpha_b.norm());
    let r_sq = ra * ra + rb * rb;
    let mut ln_mags = vec![f64::NEG_INFINITY; s.c.len()];
    let mut m = f64::NEG_INFINITY;
    for k in 0..=n {
        for l in 0..=(n - k) {
            let i = tri_index(k, l);
            if s.c[i] == C64::new(0.0, 0.0)
                || (ra == 0.0 && k > 0)
                || (rb == 0.0 && l > 0)
            {
                continue;
            }
            let lm = s.c[i].norm().ln() + ln_pow(ra, k) + ln_pow(rb, l)
                - 0.5 * (ln_factorial(k) + ln_factorial(l));
            ln_mags[i] = lm;
            m = m.max(lm);
        }
    }
    if m == f64::NEG_INFINITY {
        return 0.0;
    }
    let (ta, tb) = (alpha_a.arg(), alpha_b.arg());
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..=n {
        for l in 0..=(n - k) {
            let i = tri_index(k, l);
            if ln_mags[i] == f64::NEG_INFINITY {
                continue;
            }
            let phase = s.c[i].arg() - k as f64 * ta - l as f64 * tb;
            acc += C64::from_polar((ln_mags[i] - m).exp(), phase);
        }
    }
    (2.0 * m - r_sq).exp() * acc.norm_sqr()
}

/// Single-mode marginal of a truncated state: per traced occupation b the
/// kept mode contributes a coherent inner sum S_b, and the traced weight is
/// b!/b! = 1 under `Standard` or Γ(b+1/2)/b! under `Plain`.
pub fn q_marginal_full(
    s: &TwoModeState,
    alpha: C64,
    mode: Mode,
    convention: MeasureConvention,
) -> f64 {
    let n = s.n_trunc;
    let r = alpha.norm();
    let theta = alpha.arg();
    // shared log-scale across the inner sums keeps their relative sizes
    let mut m = f64::NEG_INFINITY;
    for a in 0..=n {
        if r == 0.0 && a > 0 {
            continue;
        }
        m = m.max(ln_pow(r, a) - 0.5 * ln_factorial(a));
    }
    let mut total = 0.0;
    for b in 0..=n {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..=(n - b) {
            let coef = match mode {
                Mode::A => s.c[tri_index(a, b)],
                Mode::B => s.c[tri_index(b, a)],
            };
            if coef == C64::new(0.0, 0.0) || (r == 0.0 && a > 0) {
                continue;
            }
            let lm = ln_pow(r, a) - 0.5 * ln_factorial(a) - m;
            acc += coef * C64::from_polar(lm.exp(), -(a as f64) * theta);
        }
        if acc == C64::new(0.0, 0.0) {
            continue;
        }
        let ln_w = ln_trace_weight(b, convention) - ln_factorial(b);
        total += ln_w.exp() * acc.norm_sqr();
    }
    (2.0 * m - r * r).exp() * total
}

/// Marginal Q sampled on a polar grid; the marginal convention is the
/// grid's, so integrating the values is meaningful by construction.
#[derive(Debug, Clone)]
pub struct QGrid {
    pub grid: PolarGrid,
    /// row-major, values[i_r * n_theta + i_theta]
    pub values: Vec<f64>,
}

impl QGrid {
    pub fn value(&self, i_r: usize, i_theta: usize) -> f64 {
        self.values[i_r * self.grid.n_theta + i_theta]
    }

    /// Largest value on the outermost radial ring; above ~1e-6 the grid is
    /// cutting off mass and r_max should grow.
    pub fn boundary_max(&self) -> f64 {
        let last = self.grid.n_r - 1;
        (0..self.grid.n_theta)
            .map(|k| self.value(last, k))
            .fold(0.0, f64::max)
    }

    /// Integral of the sampled marginal under the grid's measure.
    pub fn integrate(&self) -> f64 {
        self.grid.integrate_values(&self.values)
    }
}

/// Grid sized for states occupying up to `max_total` quanta:
/// r_max = √(4(max_total+1)) floored at 5.5 so small truncations still
/// resolve the exponential tail; 240 radial and 128 angular nodes.
pub fn default_grid(max_total: usize, convention: MeasureConvention) -> PolarGrid {
    let r_max = (4.0 * (max_total as f64 + 1.0)).sqrt().max(5.5);
    PolarGrid::new(r_max, 240, 128, convention)
}

/// Sample the single-mode marginal of either state family on the grid.
pub fn q_snapshot(state: StateRef, grid: &PolarGrid, mode: Mode) -> QGrid {
    let mut values = vec![0.0; grid.n_r * grid.n_theta];
    for (i, &r) in grid.r_nodes.iter().enumerate() {
        for (k, &th) in grid.theta_nodes.iter().enumerate() {
            let alpha = C64::from_polar(r, th);
            values[i * grid.n_theta + k] = match state {
                StateRef::Sector(c) => q_marginal_fixed_n(c, alpha, mode, grid.convention),
                StateRef::Full(s) => q_marginal_full(s, alpha, mode, grid.convention),
            };
        }
    }
    QGrid { grid: grid.clone(), values }
}
