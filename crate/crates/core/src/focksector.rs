//! Exact quantum dynamics and observables in a fixed total-number sector.
//!
//! With the atom number N conserved, the two-mode state is the (N+1)-vector
//! of coefficients C_j over the bare states |j, N−j⟩, and the Hamiltonian
//! restricted to the sector is real symmetric tridiagonal.

use num_complex::Complex64 as C64;

use crate::numerics::{tridiag_eigen, TridiagSym};
use crate::{Error, Result};

/// Quantum model parameters; frequencies in units of the linear coupling g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumParams {
    pub delta: f64,
    pub g: f64,
    pub chi: f64,
    pub n_total: usize,
}

impl QuantumParams {
    pub fn new(delta: f64, g: f64, chi: f64, n_total: usize) -> Self {
        assert!(
            delta.is_finite() && g.is_finite() && chi.is_finite(),
            "parameters must be finite"
        );
        assert!(g > 0.0, "linear coupling must be positive");
        assert!(n_total >= 1, "need at least one atom");
        Self { delta, g, chi, n_total }
    }

    /// Residual of the trapping condition g + (N−1)χ = 0; zero means the
    /// sector couplings vanish and populations freeze.
    pub fn trapping_residual(&self) -> f64 {
        self.g + (self.n_total as f64 - 1.0) * self.chi
    }
}

/// Normalized coefficient vector C_0..C_N over the sector basis |j, N−j⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct FockStateN {
    pub n_total: usize,
    pub c: Vec<C64>,
}

impl FockStateN {
    pub fn new(n_total: usize, c: Vec<C64>) -> Self {
        assert_eq!(c.len(), n_total + 1, "coefficient count must be N+1");
        let s = Self { n_total, c };
        assert!((s.norm_sq() - 1.0).abs() <= 1e-10, "state not normalized");
        s
    }

    /// Bare state |j, N−j⟩.
    pub fn number_state(n_total: usize, j: usize) -> Self {
        assert!(j <= n_total, "occupation exceeds the sector");
        let mut c = vec![C64::new(0.0, 0.0); n_total + 1];
        c[j] = C64::new(1.0, 0.0);
        Self { n_total, c }
    }

    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// Sector second moments; the mean quadratures are identically zero by
/// number conservation and are stored as exact zeros.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorMoments {
    pub n_a: f64,
    pub var_n_a: f64,
    pub cross: C64,
    pub var_x_minus: f64,
    pub var_p_minus: f64,
    pub mean_x_minus: f64,
    pub mean_p_minus: f64,
}

/// Hamiltonian of the n-atom sector: diag_j = χn² − (χ+δ)n + 2j(δ+χn) − 2χj²
/// with coupling √(j(n−j+1))·(g + (n−1)χ) between j−1 and j.
///
/// Every fixed-total block of the full two-mode Hamiltonian has this shape,
/// so the builder accepts n independently of `QuantumParams` (n = 0 gives
/// the 1x1 vacuum block).
pub fn sector_matrix(delta: f64, g: f64, chi: f64, n: usize) -> TridiagSym {
    let nf = n as f64;
    let hop = g + (nf - 1.0) * chi;
    let diag = (0..=n)
        .map(|j| {
            let jf = j as f64;
            chi * nf * nf - (chi + delta) * nf + 2.0 * jf * (delta + chi * nf)
                - 2.0 * chi * jf * jf
        })
        .collect();
    let offdiag = (1..=n)
        .map(|j| (j as f64 * (nf - j as f64 + 1.0)).sqrt() * hop)
        .collect();
    TridiagSym::new(diag, offdiag)
}

pub fn build_hamiltonian(p: &QuantumParams) -> TridiagSym {
    sector_matrix(p.delta, p.g, p.chi, p.n_total)
}

/// Propagate `c0` to every requested time by spectral decomposition,
/// C(t) = V e^{−iΛt} Vᵀ C(0).
pub fn evolve_fock(
    c0: &FockStateN,
    p: &QuantumParams,
    times: &[f64],
) -> Result<Vec<FockStateN>> {
    assert_eq!(c0.n_total, p.n_total, "state and parameters disagree on N");
    assert!(!times.is_empty(), "no output times");
    assert!(times.iter().all(|t| t.is_finite()), "times must be finite");
    assert!(times.windows(2).all(|w| w[0] < w[1]), "times must ascend");
    let es = tridiag_eigen(&build_hamiltonian(p))?;
    let dim = c0.c.len();
    let weights: Vec<C64> = (0..dim)
        .map(|k| es.vectors[k].iter().zip(&c0.c).map(|(v, c)| v * c).sum())
        .collect();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let mut c = vec![C64::new(0.0, 0.0); dim];
        for k in 0..dim {
            let amp = C64::from_polar(1.0, -es.values[k] * t) * weights[k];
            for (ci, vk) in c.iter_mut().zip(&es.vectors[k]) {
                *ci += amp * vk;
            }
        }
        out.push(FockStateN { n_total: c0.n_total, c });
    }
    Ok(out)
}

/// Analytic evolution at the trapping point: with all couplings zero each
/// coefficient only picks up its bare phase, C_j(t) = C_j(0) e^{−i·diag_j·t}.
pub fn trapped_phase_evolution(
    c0: &FockStateN,
    p: &QuantumParams,
    t: f64,
) -> Result<FockStateN> {
    assert_eq!(c0.n_total, p.n_total, "state and parameters disagree on N");
    assert!(t.is_finite());
    let residual = p.trapping_residual();
    if residual.abs() > 1e-12 {
        return Err(Error::NotTrapped { residual });
    }
    let h = build_hamiltonian(p);
    let c = c0
        .c
        .iter()
        .enumerate()
        .map(|(j, cj)| C64::from_polar(1.0, -h.diag[j] * t) * cj)
        .collect();
    Ok(FockStateN { n_total: c0.n_total, c })
}

/// Ascending sector spectrum for each requested χ; branches are continued
/// by sorted order.
pub fn spectrum_vs_chi(
    n_total: usize,
    delta: f64,
    g: f64,
    chi_values: &[f64],
) -> Result<Vec<(f64, Vec<f64>)>> {
    chi_values
        .iter()
        .map(|&chi| {
            let es = tridiag_eigen(&sector_matrix(delta, g, chi, n_total))?;
            Ok((chi, es.values))
        })
        .collect()
}

/// Occupation and error-operator moments of a sector state.
///
/// All sector-changing expectations (⟨a⟩, ⟨a²⟩, ⟨a_A a_B⟩) vanish
/// identically here, which collapses the error-operator variances to
/// σ²(x₋) = σ²(p₋) = N + 1 − 2Re⟨a_A†a_B⟩.
pub fn sector_moments(c: &FockStateN) -> SectorMoments {
    let n = c.n_total;
    let mut n_a = 0.0;
    let mut n_a_sq = 0.0;
    for (j, cj) in c.c.iter().enumerate() {
        let w = cj.norm_sqr();
        n_a += j as f64 * w;
        n_a_sq += (j * j) as f64 * w;
    }
    let mut cross = C64::new(0.0, 0.0);
    for j in 0..n {
        let amp = ((j + 1) as f64 * (n - j) as f64).sqrt();
        cross += amp * c.c[j + 1].conj() * c.c[j];
    }
    let var = n as f64 + 1.0 - 2.0 * cross.re;
    SectorMoments {
        n_a,
        var_n_a: (n_a_sq - n_a * n_a).max(0.0),
        cross,
        var_x_minus: var,
        var_p_minus: var,
        mean_x_minus: 0.0,
        mean_p_minus: 0.0,
    }
}

/// Covariance-free fluctuation magnitudes (σ(x₋), σ(p₋)) built from the
/// mode-local variances alone, σ = √((σ²_A + σ²_B)/2) with σ²_A = 2n_A + 1.
///
/// The cross term −2Re⟨a_A†a_B⟩ is deliberately absent, so in a fixed-N
/// sector both components collapse to √(N+1); `sector_moments` carries the
/// exact variances.
pub fn covariance_free_fluctuations(c: &FockStateN) -> (f64, f64) {
    let n_a = sector_moments(c).n_a;
    let n_b = c.n_total as f64 - n_a;
    let sigma = ((2.0 * n_a + 1.0 + 2.0 * n_b + 1.0) / 2.0).sqrt();
    (sigma, sigma)
}

/// Energy expectation ⟨H⟩ = cᴴ H c.
pub fn sector_energy(c: &FockStateN, p: &QuantumParams) -> f64 {
    let hc = build_hamiltonian(p).matvec_complex(&c.c);
    c.c.iter().zip(&hc).map(|(a, b)| (a.conj() * b).re).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spread_state(n_total: usize) -> FockStateN {
        // fixed, unremarkable coefficients exercising every entry
        let raw: Vec<C64> = (0..=n_total)
            .map(|j| C64::new(1.0 + 0.3 * j as f64, 0.2 - 0.1 * (j % 3) as f64))
            .collect();
        let norm: f64 = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        FockStateN::new(n_total, raw.into_iter().map(|z| z / norm).collect())
    }

    #[test]
    fn two_level_matrix_entries() {
        let h = build_hamiltonian(&QuantumParams::new(1.0, 1.0, 0.0, 1));
        assert_eq!(h.diag, vec![-1.0, 1.0]);
        assert_eq!(h.offdiag, vec![1.0]);
    }

    #[test]
    fn trapping_condition_zeroes_couplings() {
        let chi = -1.0 / 9.0;
        let p = QuantumParams::new(0.3, 1.0, chi, 10);
        assert_eq!(p.trapping_residual(), 0.0);
        let h = build_hamiltonian(&p);
        assert!(h.offdiag.iter().all(|e| *e == 0.0), "couplings {:?}", h.offdiag);

        let p3 = QuantumParams::new(0.0, 1.0, -0.5, 3);
        let h3 = build_hamiltonian(&p3);
        assert!(h3.offdiag.iter().all(|e| *e == 0.0));
    }

    #[test]
    fn vacuum_block_is_one_by_one_zero() {
        let h = sector_matrix(0.7, 1.0, -0.3, 0);
        assert_eq!(h.diag, vec![0.0]);
        assert!(h.offdiag.is_empty());
    }

    #[test]
    fn two_level_spectrum_closed_form() {
        let delta = 0.8;
        let curves = spectrum_vs_chi(1, delta, 1.0, &[0.0]).unwrap();
        let omega = (delta * delta + 1.0).sqrt();
        assert!((curves[0].1[0] + omega).abs() < 1e-14);
        assert!((curves[0].1[1] - omega).abs() < 1e-14);
    }

    #[test]
    fn four_level_ladder_spectrum() {
        // N=3, δ=0, χ=0 is the spin-3/2 ladder 2J_x: eigenvalues ±1, ±3
        let curves = spectrum_vs_chi(3, 0.0, 1.0, &[0.0]).unwrap();
        let want = [-3.0, -1.0, 1.0, 3.0];
        for (v, w) in curves[0].1.iter().zip(&want) {
            assert!((v - w).abs() < 1e-12, "{v} vs {w}");
        }
    }

    #[test]
    fn degenerate_point_reads_off_diagonal() {
        let p = QuantumParams::new(0.0, 1.0, -0.5, 3);
        let curves = spectrum_vs_chi(3, 0.0, 1.0, &[-0.5]).unwrap();
        let mut diag = build_hamiltonian(&p).diag;
        diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(curves[0].1, diag);
    }

    #[test]
    fn two_level_rabi_oscillation() {
        let p = QuantumParams::new(0.0, 1.0, 0.0, 1);
        let c0 = FockStateN::number_state(1, 1);
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let states = evolve_fock(&c0, &p, &times).unwrap();
        for (t, s) in times.iter().zip(&states) {
            assert!((s.c[1].norm_sqr() - t.cos().powi(2)).abs() < 1e-12, "at t={t}");
            assert!((s.norm_sq() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn trapped_populations_freeze() {
        let p = QuantumParams::new(0.3, 1.0, -1.0 / 9.0, 10);
        let c0 = spread_state(10);
        let times = [1.0, 10.0, 100.0, 1000.0];
        let states = evolve_fock(&c0, &p, &times).unwrap();
        for s in &states {
            for (a, b) in s.c.iter().zip(&c0.c) {
                assert!((a.norm() - b.norm()).abs() < 1e-10);
            }
        }
        // analytic phases match the spectral propagator
        let t = 7.3;
        let analytic = trapped_phase_evolution(&c0, &p, t).unwrap();
        let spectral = &evolve_fock(&c0, &p, &[t]).unwrap()[0];
        for (a, b) in analytic.c.iter().zip(&spectral.c) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn trapped_evolution_rejects_coupled_sector() {
        let p = QuantumParams::new(0.0, 1.0, 0.0, 4);
        let c0 = FockStateN::number_state(4, 0);
        match trapped_phase_evolution(&c0, &p, 1.0) {
            Err(Error::NotTrapped { residual }) => assert!((residual - 1.0).abs() < 1e-15),
            other => panic!("expected NotTrapped, got {other:?}"),
        }
        // t = 0 is the identity at a trapped point
        let pt = QuantumParams::new(0.2, 1.0, -0.25, 5);
        let c5 = spread_state(5);
        let same = trapped_phase_evolution(&c5, &pt, 0.0).unwrap();
        assert_eq!(same.c, c5.c);
    }

    #[test]
    fn unitary_round_trip() {
        let p = QuantumParams::new(0.4, 1.0, -0.1, 8);
        let c0 = spread_state(8);
        let fwd = &evolve_fock(&c0, &p, &[5.0]).unwrap()[0];
        let back = &evolve_fock(fwd, &p, &[-5.0]).unwrap()[0];
        for (a, b) in back.c.iter().zip(&c0.c) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn spectral_propagation_matches_ode() {
        use crate::numerics::integrate_ode;
        let p = QuantumParams::new(0.3, 1.0, -0.1, 6);
        let h = build_hamiltonian(&p);
        let c0 = spread_state(6);
        let times: Vec<f64> = (0..=50).map(|i| i as f64).collect();
        let spectral = evolve_fock(&c0, &p, &times).unwrap();
        let ode = integrate_ode(
            |_, y, dy| {
                let hy = h.matvec_complex(y);
                for (d, v) in dy.iter_mut().zip(&hy) {
                    *d = C64::new(0.0, -1.0) * v;
                }
            },
            &c0.c,
            (0.0, 50.0),
            1e-11,
            times.len(),
        )
        .unwrap();
        for (s, y) in spectral.iter().zip(&ode.states) {
            for (a, b) in s.c.iter().zip(y) {
                assert!((a - b).norm() < 1e-8);
            }
        }
        // energy is constant along the spectral run
        let e0 = sector_energy(&c0, &p);
        for s in &spectral {
            assert!((sector_energy(s, &p) - e0).abs() < 1e-9);
        }
    }

    #[test]
    fn moments_of_polarized_state() {
        let n = 15;
        let c = FockStateN::number_state(n, n);
        let m = sector_moments(&c);
        assert_eq!(m.n_a, n as f64);
        assert_eq!(m.var_n_a, 0.0);
        assert_eq!(m.cross, C64::new(0.0, 0.0));
        assert_eq!(m.var_x_minus, (n + 1) as f64);
        assert_eq!(m.var_p_minus, (n + 1) as f64);
        assert_eq!(m.mean_x_minus, 0.0);
        assert_eq!(m.mean_p_minus, 0.0);
        let (sx, sp) = covariance_free_fluctuations(&c);
        assert!((sx - ((n + 1) as f64).sqrt()).abs() < 1e-14);
        assert_eq!(sx, sp);
    }

    #[test]
    fn covariance_free_form_collapses_to_sector_constant() {
        // the mode-local variances always sum to 2(N+1) in the sector
        for n in [1, 4, 9] {
            let c = spread_state(n);
            let (sx, sp) = covariance_free_fluctuations(&c);
            assert!((sx - ((n + 1) as f64).sqrt()).abs() < 1e-13);
            assert_eq!(sx, sp);
            // divergence from the exact variance is the cross term
            let m = sector_moments(&c);
            assert!((sx * sx - m.var_x_minus - 2.0 * m.cross.re).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_two_level_superposition_squeezes() {
        let h = 0.5f64.sqrt();
        let c = FockStateN::new(1, vec![C64::new(h, 0.0), C64::new(h, 0.0)]);
        let m = sector_moments(&c);
        assert!((m.cross.re - 0.5).abs() < 1e-15);
        assert!((m.var_x_minus - 1.0).abs() < 1e-14);
        let (sx, _) = covariance_free_fluctuations(&c);
        assert!((sx * sx - 2.0).abs() < 1e-14);
    }

    #[test]
    fn moments_match_dense_ladder_oracle() {
        use crate::testkit::{dot, DenseTwoMode};
        for n in [2usize, 3, 4] {
            let s = spread_state(n);
            let dense = DenseTwoMode { cap: n + 2 };
            let psi = dense.embed_fock(&s);

            let a_psi = dense.lower_a(&psi);
            let b_psi = dense.lower_b(&psi);
            let n_a = dot(&a_psi, &a_psi).re;
            let cross = dot(&a_psi, &b_psi);

            // x₋ = (x_A − x_B)/√2 applied by ladders
            let mut x_psi = dense.zero();
            for (o, (la, (ra, (lb, rb)))) in x_psi.iter_mut().zip(
                a_psi.iter().zip(
                    dense.raise_a(&psi).iter().zip(
                        b_psi.iter().zip(dense.raise_b(&psi).iter()),
                    ),
                ),
            ) {
                *o = (la + ra - lb - rb) / 2f64.sqrt();
            }
            let mean_x = dot(&psi, &x_psi);
            let var_x = dot(&x_psi, &x_psi).re - mean_x.norm_sqr();

            // p₋ = (p_A − p_B)/√2 with p = −i(a − a†)
            let mut p_psi = dense.zero();
            for (o, (la, (ra, (lb, rb)))) in p_psi.iter_mut().zip(
                a_psi.iter().zip(
                    dense.raise_a(&psi).iter().zip(
                        b_psi.iter().zip(dense.raise_b(&psi).iter()),
                    ),
                ),
            ) {
                *o = C64::new(0.0, -1.0) * ((la - ra) - (lb - rb)) / 2f64.sqrt();
            }
            let mean_p = dot(&psi, &p_psi);
            let var_p = dot(&p_psi, &p_psi).re - mean_p.norm_sqr();

            let m = sector_moments(&s);
            assert!((m.n_a - n_a).abs() < 1e-12, "n_a at N={n}");
            assert!((m.cross - cross).norm() < 1e-12, "cross at N={n}");
            assert!(mean_x.norm() < 1e-13 && mean_p.norm() < 1e-13);
            assert!((m.var_x_minus - var_x).abs() < 1e-12, "σ²(x₋) at N={n}");
            assert!((m.var_p_minus - var_p).abs() < 1e-12, "σ²(p₋) at N={n}");
        }
    }

    #[test]
    fn uncertainty_product_at_least_one() {
        for n in [1usize, 5, 12] {
            let m = sector_moments(&spread_state(n));
            assert!(m.var_x_minus * m.var_p_minus >= 1.0 - 1e-12);
        }
    }
}
