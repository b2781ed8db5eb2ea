//! Quadrature over the complex plane in polar form.
//!
//! Radial direction: Gauss-Legendre on (0, r_max]. Angular direction:
//! uniform nodes on [0, 2pi), where the plain Riemann sum is the trapezoid
//! rule for periodic integrands and converges spectrally.
//!
//! Two area measures appear in the literature for phase-space marginals, so
//! the grid carries its convention explicitly:
//! `Standard` integrates f r dr dtheta / pi, `Plain` integrates
//! f dr dtheta / pi (no Jacobian).

use std::f64::consts::PI;

/// Which polar area measure the grid weights encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureConvention {
    /// d^2 alpha / pi = r dr dtheta / pi
    Standard,
    /// dr dtheta / pi, as used by the half-integer-gamma marginal forms
    Plain,
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess, then Newton on P_n
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for it in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
            assert!(it < 99, "Gauss-Legendre Newton iteration stalled");
        }
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Product quadrature grid on the disk of radius `r_max`.
///
/// Radial nodes are strictly interior (Gauss points never touch 0 or r_max),
/// which keeps integrands with ln r or 1/r factors finite.
#[derive(Debug, Clone)]
pub struct PolarGrid {
    pub r_max: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub convention: MeasureConvention,
    pub r_nodes: Vec<f64>,
    /// Plain dr weights on (0, r_max); the measure factor is applied in
    /// `node_weight`, not baked in here.
    pub r_weights: Vec<f64>,
    pub theta_nodes: Vec<f64>,
}

impl PolarGrid {
    pub fn new(r_max: f64, n_r: usize, n_theta: usize, convention: MeasureConvention) -> Self {
        assert!(r_max.is_finite() && r_max > 0.0);
        assert!(n_r >= 1 && n_theta >= 1);
        let (x, w) = gauss_legendre(n_r);
        let half = 0.5 * r_max;
        let r_nodes: Vec<f64> = x.iter().map(|&xi| half * (xi + 1.0)).collect();
        let r_weights: Vec<f64> = w.iter().map(|&wi| half * wi).collect();
        let dtheta = 2.0 * PI / n_theta as f64;
        let theta_nodes: Vec<f64> = (0..n_theta).map(|k| k as f64 * dtheta).collect();
        PolarGrid { r_max, n_r, n_theta, convention, r_nodes, r_weights, theta_nodes }
    }

    /// Full quadrature weight of node (i, k), measure factor included.
    pub fn node_weight(&self, i_r: usize, i_theta: usize) -> f64 {
        let _ = i_theta; // uniform in theta
        let jac = match self.convention {
            MeasureConvention::Standard => self.r_nodes[i_r],
            MeasureConvention::Plain => 1.0,
        };
        self.r_weights[i_r] * jac * (2.0 * PI / self.n_theta as f64) / PI
    }

    /// Integrate tabulated values laid out as values[i_r * n_theta + i_theta].
    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        assert_eq!(values.len(), self.n_r * self.n_theta);
        let mut total = 0.0;
        for i in 0..self.n_r {
            let mut ring = 0.0;
            for k in 0..self.n_theta {
                ring += values[i * self.n_theta + k];
            }
            total += ring * self.node_weight(i, 0);
        }
        total
    }
}

/// Integrate f(r, theta) over the grid under its measure convention.
pub fn polar_quadrature<F: FnMut(f64, f64) -> f64>(grid: &PolarGrid, mut f: F) -> f64 {
    let mut total = 0.0;
    for (i, &r) in grid.r_nodes.iter().enumerate() {
        let mut ring = 0.0;
        for &th in &grid.theta_nodes {
            ring += f(r, th);
        }
        total += ring * grid.node_weight(i, 0);
    }
    total
}
