//! Exact quantum dynamics in the truncated two-mode space.
//!
//! The state is the triangular coefficient array C_{k,l} over bare states
//! |k, l⟩ with k + l ≤ n. Total number is conserved, so the Hamiltonian is
//! block tridiagonal over the fixed-total sectors and each block is the
//! corresponding `sector_matrix`; evolution runs sector by sector.

use num_complex::Complex64 as C64;

use crate::focksector::{sector_matrix, FockStateN};
use crate::numerics::{ln_factorial, tridiag_eigen, TridiagSym};
use crate::{Error, Result};

/// Flat index of (k, l): sectors stored consecutively by total k + l,
/// ascending k inside each sector.
pub fn tri_index(k: usize, l: usize) -> usize {
    let n = k + l;
    n * (n + 1) / 2 + k
}

/// Number of stored coefficients for truncation n, (n+1)(n+2)/2.
pub fn tri_dim(n_trunc: usize) -> usize {
    (n_trunc + 1) * (n_trunc + 2) / 2
}

/// Model parameters for the truncated space; same frequency conventions as
/// `QuantumParams`, with the truncation in place of a fixed total.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullParams {
    pub delta: f64,
    pub g: f64,
    pub chi: f64,
    pub n_trunc: usize,
}

impl FullParams {
    pub fn new(delta: f64, g: f64, chi: f64, n_trunc: usize) -> Self {
        assert!(
            delta.is_finite() && g.is_finite() && chi.is_finite(),
            "parameters must be finite"
        );
        assert!(g > 0.0, "linear coupling must be positive");
        Self { delta, g, chi, n_trunc }
    }
}

/// Normalized triangular coefficient array over |k, l⟩ with k + l ≤ n_trunc,
/// stored per `tri_index`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeState {
    pub n_trunc: usize,
    pub c: Vec<C64>,
}

impl TwoModeState {
    pub fn new(n_trunc: usize, c: Vec<C64>) -> Self {
        assert_eq!(c.len(), tri_dim(n_trunc), "coefficient count mismatch");
        let s = Self { n_trunc, c };
        assert!((s.norm_sq() - 1.0).abs() <= 1e-10, "state not normalized");
        s
    }

    pub fn norm_sq(&self) -> f64 {
        self.c.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn get(&self, k: usize, l: usize) -> C64 {
        assert!(k + l <= self.n_trunc, "occupation pair exceeds truncation");
        self.c[tri_index(k, l)]
    }
}

/// Place a fixed-total state into the triangular array, every other sector
/// zero.
pub fn embed_sector(state: &FockStateN, n_trunc: usize) -> TwoModeState {
    assert!(state.n_total <= n_trunc, "sector exceeds truncation");
    let mut c = vec![C64::new(0.0, 0.0); tri_dim(n_trunc)];
    for (j, cj) in state.c.iter().enumerate() {
        c[tri_index(j, state.n_total - j)] = *cj;
    }
    TwoModeState { n_trunc, c }
}

/// Norm lost to truncation by a coherent amplitude alpha0 in mode A, i.e.
/// the Poisson tail above n_trunc.
pub fn coherent_truncation_deficit(alpha0: C64, n_trunc: usize) -> f64 {
    let lam = alpha0.norm_sqr();
    if lam == 0.0 {
        return 0.0;
    }
    let kept: f64 = (0..=n_trunc)
        .map(|k| (-lam + k as f64 * lam.ln() - ln_factorial(k)).exp())
        .sum();
    1.0 - kept
}

/// Product state |alpha0⟩ ⊗ |0⟩ truncated to k ≤ n_trunc and renormalized.
///
/// Rejects truncations that drop more than 1e-2 of the norm. The returned
/// amplitudes are C_{k,0} = e^{−|α0|²/2} α0^k/√k! up to the overall
/// renormalization.
pub fn coherent_initial(alpha0: C64, n_trunc: usize) -> Result<TwoModeState> {
    coherent_initial_windowed(alpha0, n_trunc, false)
}

/// Same as `coherent_initial`, optionally keeping only the Poisson bulk
/// |k − |α0|²| ≤ |α0| before renormalizing. With the window on, the tails
/// are dropped by construction, so the truncation is rejected only when it
/// clips the bulk itself.
pub fn coherent_initial_windowed(
    alpha0: C64,
    n_trunc: usize,
    poisson_window: bool,
) -> Result<TwoModeState> {
    assert!(
        alpha0.re.is_finite() && alpha0.im.is_finite(),
        "amplitude must be finite"
    );
    let lam = alpha0.norm_sqr();
    let theta = alpha0.arg();
    let mut c = vec![C64::new(0.0, 0.0); tri_dim(n_trunc)];
    for k in 0..=n_trunc {
        // log-domain magnitude keeps large k and large |α0| finite
        let ln_mag = if k == 0 {
            -lam / 2.0
        } else {
            -lam / 2.0 + 0.5 * (k as f64) * lam.ln() - 0.5 * ln_factorial(k)
        };
        c[tri_index(k, 0)] = C64::from_polar(ln_mag.exp(), k as f64 * theta);
    }
    let kept: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    let mut total = kept;
    if poisson_window {
        let (lo, hi) = (lam - lam.sqrt(), lam + lam.sqrt());
        if hi > n_trunc as f64 {
            let deficit: f64 = (n_trunc + 1..=hi.floor() as usize)
                .map(|k| (-lam + k as f64 * lam.ln() - ln_factorial(k)).exp())
                .sum();
            return Err(Error::TruncationDeficit { deficit, n_trunc });
        }
        for k in 0..=n_trunc {
            if (k as f64) < lo || (k as f64) > hi {
                c[tri_index(k, 0)] = C64::new(0.0, 0.0);
            }
        }
        total = c.iter().map(|z| z.norm_sqr()).sum();
    } else {
        let deficit = 1.0 - kept;
        if deficit > 1e-2 {
            return Err(Error::TruncationDeficit { deficit, n_trunc });
        }
    }
    let scale = 1.0 / total.sqrt();
    for z in c.iter_mut() {
        *z *= scale;
    }
    Ok(TwoModeState { n_trunc, c })
}

/// Hamiltonian blocks for every total 0..=n_trunc; block N acts on the
/// contiguous slice of sector N and reproduces the flat-index couplings
/// √(l(k+1))·(g+(k+l−1)χ) between (k, l) and (k+1, l−1).
pub fn build_blocks(p: &FullParams) -> Vec<TridiagSym> {
    (0..=p.n_trunc)
        .map(|n| sector_matrix(p.delta, p.g, p.chi, n))
        .collect()
}

/// Propagate to every requested time by per-sector spectral decomposition.
pub fn evolve_full(
    s0: &TwoModeState,
    blocks: &[TridiagSym],
    times: &[f64],
) -> Result<Vec<TwoModeState>> {
    assert_eq!(blocks.len(), s0.n_trunc + 1, "block count must be n_trunc+1");
    assert!(!times.is_empty(), "no output times");
    assert!(times.iter().all(|t| t.is_finite()), "times must be finite");
    assert!(times.windows(2).all(|w| w[0] < w[1]), "times must ascend");
    let mut eigs = Vec::with_capacity(blocks.len());
    for (n, b) in blocks.iter().enumerate() {
        assert_eq!(b.dim(), n + 1, "block dimension must be total+1");
        eigs.push(tridiag_eigen(b)?);
    }
    // spectral weights of each initial sector slice
    let weights: Vec<Vec<C64>> = eigs
        .iter()
        .enumerate()
        .map(|(n, es)| {
            let base = n * (n + 1) / 2;
            let slice = &s0.c[base..base + n + 1];
            (0..=n)
                .map(|k| es.vectors[k].iter().zip(slice).map(|(v, c)| v * c).sum())
                .collect()
        })
        .collect();
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let mut c = vec![C64::new(0.0, 0.0); s0.c.len()];
        for (n, es) in eigs.iter().enumerate() {
            let base = n * (n + 1) / 2;
            for k in 0..=n {
                let amp = C64::from_polar(1.0, -es.values[k] * t) * weights[n][k];
                if amp.norm_sqr() == 0.0 {
                    continue;
                }
                for (ci, vk) in c[base..base + n + 1].iter_mut().zip(&es.vectors[k]) {
                    *ci += amp * vk;
                }
            }
        }
        out.push(TwoModeState { n_trunc: s0.n_trunc, c });
    }
    Ok(out)
}

/// Squared norm carried by each fixed-total sector; conserved one by one.
pub fn sector_norms(s: &TwoModeState) -> Vec<f64> {
    (0..=s.n_trunc)
        .map(|n| {
            let base = n * (n + 1) / 2;
            s.c[base..base + n + 1].iter().map(|z| z.norm_sqr()).sum()
        })
        .collect()
}

/// ⟨H⟩ assembled block by block; constant under `evolve_full`.
pub fn full_energy(s: &TwoModeState, blocks: &[TridiagSym]) -> f64 {
    assert_eq!(blocks.len(), s.n_trunc + 1, "block count must be n_trunc+1");
    let mut e = 0.0;
    for (n, b) in blocks.iter().enumerate() {
        let base = n * (n + 1) / 2;
        let slice = &s.c[base..base + n + 1];
        let h_slice = b.matvec_complex(slice);
        e += slice
            .iter()
            .zip(&h_slice)
            .map(|(c, hc)| (c.conj() * hc).re)
            .sum::<f64>();
    }
    e
}

/// First and second moments of the truncated state. Mode means are free,
/// so the relative-quadrature variances carry the full mean subtraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullMoments {
    pub a_a_mean: C64,
    pub a_b_mean: C64,
    pub n_a: f64,
    pub var_n_a: f64,
    pub mean_x_a: f64,
    pub mean_p_a: f64,
    pub mean_x_b: f64,
    pub mean_p_b: f64,
    pub var_x_minus: f64,
    pub var_p_minus: f64,
}

/// Contract the ladder moments directly on the triangular array; raising
/// contributions that would leave the truncation are dropped, consistent
/// with the state being exactly zero there.
pub fn full_moments(s: &TwoModeState) -> FullMoments {
    let n = s.n_trunc;
    let zero = C64::new(0.0, 0.0);
    let (mut a_a, mut a_b) = (zero, zero);
    let (mut a_a_sq, mut a_b_sq, mut pair, mut cross) = (zero, zero, zero, zero);
    let (mut n_a, mut n_a_sq, mut n_b) = (0.0, 0.0, 0.0);
    for k in 0..=n {
        for l in 0..=(n - k) {
            let c = s.c[tri_index(k, l)];
            let w = c.norm_sqr();
            n_a += k as f64 * w;
            n_a_sq += (k * k) as f64 * w;
            n_b += l as f64 * w;
            // ⟨a_A†a_B⟩ stays inside the sector, no truncation guard
            if l >= 1 {
                cross += ((k + 1) as f64 * l as f64).sqrt()
                    * s.c[tri_index(k + 1, l - 1)].conj()
                    * c;
            }
            if k + l < n {
                a_a += ((k + 1) as f64).sqrt() * c.conj() * s.c[tri_index(k + 1, l)];
                a_b += ((l + 1) as f64).sqrt() * c.conj() * s.c[tri_index(k, l + 1)];
            }
            if k + l + 2 <= n {
                a_a_sq += (((k + 1) * (k + 2)) as f64).sqrt() * c.conj()
                    * s.c[tri_index(k + 2, l)];
                a_b_sq += (((l + 1) * (l + 2)) as f64).sqrt() * c.conj()
                    * s.c[tri_index(k, l + 2)];
                pair += (((k + 1) * (l + 1)) as f64).sqrt() * c.conj()
                    * s.c[tri_index(k + 1, l + 1)];
            }
        }
    }
    // u = a_A − a_B gives x₋ = (u + u†)/√2 and p₋ = −i(u − u†)/√2
    let u = a_a - a_b;
    let u_sq = a_a_sq + a_b_sq - 2.0 * pair;
    let udag_u = n_a + n_b - 2.0 * cross.re;
    FullMoments {
        a_a_mean: a_a,
        a_b_mean: a_b,
        n_a,
        var_n_a: (n_a_sq - n_a * n_a).max(0.0),
        mean_x_a: 2.0 * a_a.re,
        mean_p_a: 2.0 * a_a.im,
        mean_x_b: 2.0 * a_b.re,
        mean_p_b: 2.0 * a_b.im,
        var_x_minus: u_sq.re + udag_u + 1.0 - 2.0 * u.re * u.re,
        var_p_minus: -u_sq.re + udag_u + 1.0 - 2.0 * u.im * u.im,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::focksector::{evolve_fock, QuantumParams};
    use crate::numerics::integrate_ode;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    // deterministic full-triangle state with no accidental symmetry
    fn spread_full(n_trunc: usize) -> TwoModeState {
        let mut v = Vec::with_capacity(tri_dim(n_trunc));
        for n in 0..=n_trunc {
            for k in 0..=n {
                let kf = k as f64;
                let nf = n as f64;
                v.push(c(1.0 + 0.4 * kf - 0.1 * nf, 0.3 - 0.2 * ((k + n) % 3) as f64));
            }
        }
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let s = 1.0 / norm.sqrt();
        TwoModeState::new(n_trunc, v.into_iter().map(|z| z * s).collect())
    }

    #[test]
    fn index_map_walks_sectors_in_order() {
        // ascending totals, ascending k inside each sector
        let expect = [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)];
        for (i, (k, l)) in expect.into_iter().enumerate() {
            assert_eq!(tri_index(k, l), i);
        }
        assert_eq!(tri_dim(0), 1);
        assert_eq!(tri_dim(6), 28);
        // bijectivity over a full triangle
        let n = 9;
        let mut seen = vec![false; tri_dim(n)];
        for k in 0..=n {
            for l in 0..=(n - k) {
                let i = tri_index(k, l);
                assert!(!seen[i], "index collision at ({k},{l})");
                seen[i] = true;
            }
        }
        assert!(seen.into_iter().all(|b| b));
    }

    #[test]
    fn coherent_amplitudes_follow_the_poisson_ladder() {
        let alpha0 = c(1.0, 2.0);
        let s = coherent_initial(alpha0, 15).unwrap();
        let deficit = coherent_truncation_deficit(alpha0, 15);
        assert!(deficit > 0.0 && deficit < 1e-3, "deficit {deficit:.3e}");
        // undo the renormalization and compare against e^{−|α0|²/2} α0^k/√k!
        let undo = (1.0 - deficit).sqrt();
        let mut expect = c((-alpha0.norm_sqr() / 2.0).exp(), 0.0);
        for k in 0..=15usize {
            let got = s.get(k, 0) * undo;
            assert!((got - expect).norm() < 1e-14, "k = {k}");
            expect *= alpha0 / ((k + 1) as f64).sqrt();
        }
        // nothing outside the l = 0 column
        for k in 0..15usize {
            for l in 1..=(15 - k) {
                assert_eq!(s.get(k, l), c(0.0, 0.0));
            }
        }
    }

    #[test]
    fn coherent_vacuum_amplitude_is_exact() {
        let s = coherent_initial(c(0.0, 0.0), 4).unwrap();
        assert_eq!(s.get(0, 0), c(1.0, 0.0));
        assert!((s.norm_sq() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn severe_truncation_is_rejected() {
        // |α0|² = 25 against n_trunc = 10 leaves almost nothing below the cut
        let err = coherent_initial(c(3.0, 4.0), 10).unwrap_err();
        match err {
            Error::TruncationDeficit { deficit, n_trunc } => {
                assert!(deficit > 0.9, "deficit {deficit}");
                assert_eq!(n_trunc, 10);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn poisson_window_keeps_only_the_bulk() {
        let alpha0 = c(1.0, 2.0);
        let s = coherent_initial_windowed(alpha0, 15, true).unwrap();
        // window is |k − 5| ≤ √5, i.e. k = 3..=7
        for k in 0..=15usize {
            let inside = (3..=7).contains(&k);
            assert_eq!(s.get(k, 0).norm_sqr() > 0.0, inside, "k = {k}");
        }
        assert!((s.norm_sq() - 1.0).abs() < 1e-12);
        // relative weights inside the window are untouched Poisson ratios
        let r = s.get(4, 0) / s.get(3, 0);
        assert!((r - alpha0 / 2.0).norm() < 1e-13);
    }

    #[test]
    fn poisson_window_tolerates_a_clipped_tail_but_not_a_clipped_bulk() {
        // |α0|² = 5: the tail above 10 exceeds the plain 1e-2 gate, yet the
        // bulk k = 3..=7 fits comfortably
        let alpha0 = c(1.0, 2.0);
        assert!(coherent_initial(alpha0, 10).is_err());
        let s = coherent_initial_windowed(alpha0, 10, true).unwrap();
        assert!((s.norm_sq() - 1.0).abs() < 1e-12);
        for k in 0..=10usize {
            let inside = (3..=7).contains(&k);
            assert_eq!(s.get(k, 0).norm_sqr() > 0.0, inside, "k = {k}");
        }
        // a truncation cutting into the bulk itself is still rejected
        let err = coherent_initial_windowed(alpha0, 6, true).unwrap_err();
        match err {
            Error::TruncationDeficit { deficit, n_trunc } => {
                assert!(deficit > 0.05, "deficit {deficit}");
                assert_eq!(n_trunc, 6);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn blocks_are_the_sector_matrices() {
        let p = FullParams::new(0.7, 1.0, -0.1, 5);
        let blocks = build_blocks(&p);
        assert_eq!(blocks.len(), 6);
        assert_eq!(blocks[0].dim(), 1);
        assert_eq!(blocks[0].diag[0], 0.0);
        let qp = QuantumParams::new(p.delta, p.g, p.chi, 3);
        let direct = crate::focksector::build_hamiltonian(&qp);
        assert_eq!(blocks[3].diag, direct.diag);
        assert_eq!(blocks[3].offdiag, direct.offdiag);
    }

    // independently coded flat-index right-hand side:
    // i dC_{kl}/dt = [δ(k−l) + χ(k²+l²+4kl−k−l)] C_{kl}
    //   + √(l(k+1)) [g+(k+l−1)χ] C_{k+1,l−1}
    //   + √(k(l+1)) [g+(k+l−1)χ] C_{k−1,l+1}
    fn flat_rhs(p: &FullParams, y: &[C64], dy: &mut [C64]) {
        let n = p.n_trunc;
        for k in 0..=n {
            for l in 0..=(n - k) {
                let (kf, lf) = (k as f64, l as f64);
                let hop = p.g + (kf + lf - 1.0) * p.chi;
                let mut acc = (p.delta * (kf - lf)
                    + p.chi * (kf * kf + lf * lf + 4.0 * kf * lf - kf - lf))
                    * y[tri_index(k, l)];
                if l >= 1 {
                    acc += (lf * (kf + 1.0)).sqrt() * hop * y[tri_index(k + 1, l - 1)];
                }
                if k >= 1 {
                    acc += (kf * (lf + 1.0)).sqrt() * hop * y[tri_index(k - 1, l + 1)];
                }
                dy[tri_index(k, l)] = C64::new(0.0, -1.0) * acc;
            }
        }
    }

    #[test]
    fn spectral_evolution_matches_flat_index_integration() {
        let p = FullParams::new(0.3, 1.0, -0.05, 6);
        let s0 = coherent_initial(c(1.0, 1.0), 6).unwrap();
        let times: Vec<f64> = (1..=6).map(|i| 5.0 * i as f64).collect();
        let blocks = build_blocks(&p);
        let spectral = evolve_full(&s0, &blocks, &times).unwrap();
        let sol = integrate_ode(
            |_, y, dy| flat_rhs(&p, y, dy),
            &s0.c,
            (0.0, 30.0),
            1e-12,
            7,
        )
        .unwrap();
        for (i, st) in spectral.iter().enumerate() {
            let ode = &sol.states[i + 1];
            let err: f64 = st
                .c
                .iter()
                .zip(ode)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(err < 1e-8, "t = {}: err {err:.3e}", times[i]);
        }
    }

    #[test]
    fn single_sector_slice_reproduces_fixed_total_evolution() {
        let n_total = 5;
        let qp = QuantumParams::new(-0.4, 1.0, 0.15, n_total);
        let mut v = vec![c(0.3, 0.1), c(0.2, -0.4), c(0.5, 0.0), c(0.1, 0.2), c(0.4, -0.1), c(0.3, 0.3)];
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        for z in v.iter_mut() {
            *z /= norm.sqrt();
        }
        let fock = FockStateN::new(n_total, v);
        let full0 = embed_sector(&fock, 8);
        let p = FullParams::new(qp.delta, qp.g, qp.chi, 8);
        let times = [2.5, 7.0, 11.0];
        let full = evolve_full(&full0, &build_blocks(&p), &times).unwrap();
        let sector = evolve_fock(&fock, &qp, &times).unwrap();
        for (ft, st) in full.iter().zip(&sector) {
            for j in 0..=n_total {
                let d = (ft.get(j, n_total - j) - st.c[j]).norm();
                assert!(d < 1e-12, "coefficient drift {d:.3e}");
            }
            // the other sectors never acquire amplitude
            let norms = sector_norms(ft);
            for (n, w) in norms.iter().enumerate() {
                if n != n_total {
                    assert_eq!(*w, 0.0, "sector {n} leaked");
                }
            }
        }
    }

    #[test]
    fn evolution_is_reversible_and_conserves_sector_norms_and_energy() {
        let p = FullParams::new(-1.0, 1.0, -0.01, 12);
        let s0 = coherent_initial(c(1.0, 2.0), 12).unwrap();
        let blocks = build_blocks(&p);
        let norms0 = sector_norms(&s0);
        let e0 = full_energy(&s0, &blocks);
        let fwd = evolve_full(&s0, &blocks, &[17.0]).unwrap();
        let norms1 = sector_norms(&fwd[0]);
        for (a, b) in norms0.iter().zip(&norms1) {
            assert!((a - b).abs() < 1e-10, "sector norm drift");
        }
        assert!((full_energy(&fwd[0], &blocks) - e0).abs() < 1e-9 * e0.abs().max(1.0));
        let back = evolve_full(&fwd[0], &blocks, &[-17.0]).unwrap();
        let err: f64 = back[0]
            .c
            .iter()
            .zip(&s0.c)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-9, "round trip err {err:.3e}");
    }

    #[test]
    fn coherent_vacuum_product_moments() {
        let alpha0 = c(1.0, 2.0);
        let s = coherent_initial(alpha0, 15).unwrap();
        let m = full_moments(&s);
        // truncation at n = 15 perturbs the exact coherent values by ~1e-4;
        // the k² weighting in var(n_A) amplifies the tail loss to ~9e-3
        assert!((m.a_a_mean - alpha0).norm() < 1e-3);
        assert_eq!(m.a_b_mean, c(0.0, 0.0));
        assert!((m.n_a - alpha0.norm_sqr()).abs() < 1e-3);
        assert!((m.var_n_a - alpha0.norm_sqr()).abs() < 2e-2);
        assert!((m.mean_x_a - 2.0).abs() < 1e-3);
        assert!((m.mean_p_a - 4.0).abs() < 1e-3);
        assert!((m.var_x_minus - 1.0).abs() < 5e-3);
        assert!((m.var_p_minus - 1.0).abs() < 5e-3);
    }

    #[test]
    fn moments_match_dense_ladder_oracle() {
        use crate::testkit::{dot, DenseTwoMode};
        let s = spread_full(4);
        let dense = DenseTwoMode { cap: 6 };
        let psi = dense.embed_two_mode(&s);
        let a_psi = dense.lower_a(&psi);
        let b_psi = dense.lower_b(&psi);

        let m = full_moments(&s);
        assert!((m.a_a_mean - dot(&psi, &a_psi)).norm() < 1e-14);
        assert!((m.a_b_mean - dot(&psi, &b_psi)).norm() < 1e-14);
        assert!((m.n_a - dot(&a_psi, &a_psi).re).abs() < 1e-14);
        // n̂ψ = a†(aψ), so ⟨n̂²⟩ is its squared norm
        let n_psi = dense.raise_a(&a_psi);
        let n_mean = dot(&a_psi, &a_psi).re;
        let var = dot(&n_psi, &n_psi).re - n_mean * n_mean;
        assert!((m.var_n_a - var).abs() < 1e-13, "var n_A");

        // x₋ and p₋ from explicit ladder application
        let ra = dense.raise_a(&psi);
        let rb = dense.raise_b(&psi);
        let mut x_psi = dense.zero();
        let mut p_psi = dense.zero();
        for i in 0..x_psi.len() {
            x_psi[i] = (a_psi[i] + ra[i] - b_psi[i] - rb[i]) / 2f64.sqrt();
            p_psi[i] = C64::new(0.0, -1.0) * ((a_psi[i] - ra[i]) - (b_psi[i] - rb[i]))
                / 2f64.sqrt();
        }
        let mean_x = dot(&psi, &x_psi);
        let var_x = dot(&x_psi, &x_psi).re - mean_x.norm_sqr();
        let mean_p = dot(&psi, &p_psi);
        let var_p = dot(&p_psi, &p_psi).re - mean_p.norm_sqr();
        assert!((m.var_x_minus - var_x).abs() < 1e-13, "σ²(x₋)");
        assert!((m.var_p_minus - var_p).abs() < 1e-13, "σ²(p₋)");
        assert!(
            (m.mean_x_a - m.mean_x_b - 2f64.sqrt() * mean_x.re).abs() < 1e-13,
            "x₋ mean"
        );

        let prod = m.var_x_minus * m.var_p_minus;
        assert!(prod >= 1.0 - 1e-12, "uncertainty product {prod}");
    }
}
