//! Symmetric tridiagonal eigenproblem.
//!
//! Eigenvalues by bisection on the Sturm sign count, eigenvectors by inverse
//! iteration with reorthogonalization inside close clusters. The matrix is
//! first split at negligible couplings, so a diagonal input reduces to
//! reading off its entries.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

/// Symmetric tridiagonal matrix; `offdiag[i]` couples rows i and i+1.
#[derive(Debug, Clone)]
pub struct TridiagSym {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl TridiagSym {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Self {
        assert!(!diag.is_empty(), "empty matrix");
        assert_eq!(offdiag.len() + 1, diag.len(), "offdiag length must be dim - 1");
        assert!(
            diag.iter().chain(offdiag.iter()).all(|x| x.is_finite()),
            "matrix entries must be finite"
        );
        TridiagSym { diag, offdiag }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Row-sum (infinity) norm; used to scale residual tolerances.
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let lo = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let hi = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
                self.diag[i].abs() + lo + hi
            })
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    pub fn matvec_complex(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n);
        let mut out = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }
}

/// Eigen decomposition; `vectors[k]` pairs with `values[k]`, values ascending.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Number of eigenvalues of the block strictly below x (Sturm count).
fn sturm_count(d: &[f64], e: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        q = if i == 0 { d[0] - x } else { d[i] - x - e[i - 1] * e[i - 1] / q };
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn bisect_eigenvalue(d: &[f64], e: &[f64], k: usize, gl: f64, gu: f64, pivmin: f64) -> f64 {
    let mut a = gl;
    let mut b = gu;
    for _ in 0..120 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break; // interval at rounding limit
        }
        if sturm_count(d, e, mid, pivmin) > k {
            b = mid;
        } else {
            a = mid;
        }
        if b - a <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) + 2.0 * pivmin {
            break;
        }
    }
    0.5 * (a + b)
}

/// Solve (T - lambda I) x = rhs in place via LU with partial pivoting.
/// Fill-in creates a second superdiagonal, hence the u2 band.
fn shifted_solve(d: &[f64], e: &[f64], lambda: f64, rhs: &mut [f64], pivmin: f64) {
    let m = d.len();
    if m == 1 {
        let p = d[0] - lambda;
        let p = if p.abs() < pivmin { pivmin.copysign(if p < 0.0 { -1.0 } else { 1.0 }) } else { p };
        rhs[0] /= p;
        return;
    }
    let mut u0 = vec![0.0; m];
    let mut u1 = vec![0.0; m];
    let mut u2 = vec![0.0; m];
    // running row (cur0, cur1, cur2) holds the active pivot row
    let mut cur0 = d[0] - lambda;
    let mut cur1 = e[0];
    let mut cur2 = 0.0;
    for i in 0..m - 1 {
        let sub = e[i];
        let next0 = d[i + 1] - lambda;
        let next1 = if i + 1 < m - 1 { e[i + 1] } else { 0.0 };
        if sub.abs() > cur0.abs() {
            // swap rows i and i+1
            u0[i] = sub;
            u1[i] = next0;
            u2[i] = next1;
            let l = cur0 / sub;
            cur0 = cur1 - l * next0;
            cur1 = cur2 - l * next1;
            cur2 = 0.0;
            let tmp = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = tmp - l * rhs[i];
        } else {
            let piv = if cur0.abs() < pivmin { pivmin.copysign(cur0) } else { cur0 };
            u0[i] = piv;
            u1[i] = cur1;
            u2[i] = cur2;
            let l = sub / piv;
            cur0 = next0 - l * cur1;
            cur1 = next1 - l * cur2;
            cur2 = 0.0;
            rhs[i + 1] -= l * rhs[i];
        }
    }
    u0[m - 1] = if cur0.abs() < pivmin { pivmin.copysign(cur0) } else { cur0 };
    u1[m - 1] = 0.0;
    u2[m - 1] = 0.0;
    // back substitution
    rhs[m - 1] /= u0[m - 1];
    if m >= 2 {
        rhs[m - 2] = (rhs[m - 2] - u1[m - 2] * rhs[m - 1]) / u0[m - 2];
    }
    for i in (0..m.saturating_sub(2)).rev() {
        rhs[i] = (rhs[i] - u1[i] * rhs[i + 1] - u2[i] * rhs[i + 2]) / u0[i];
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Full eigen decomposition. Values ascending; vectors orthonormal with the
/// largest-magnitude component made positive so output is reproducible.
pub fn tridiag_eigen(t: &TridiagSym) -> Result<EigenSystem> {
    let n = t.dim();
    let scale = t.norm_bound().max(f64::MIN_POSITIVE);

    // split at negligible couplings into unreduced blocks
    let mut blocks: Vec<(usize, usize)> = Vec::new();
    let mut lo = 0;
    for i in 0..n.saturating_sub(1) {
        if t.offdiag[i].abs() <= f64::EPSILON * (t.diag[i].abs() + t.diag[i + 1].abs()) {
            blocks.push((lo, i));
            lo = i + 1;
        }
    }
    blocks.push((lo, n - 1));

    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for &(blo, bhi) in &blocks {
        let m = bhi - blo + 1;
        if m == 1 {
            let mut v = vec![0.0; n];
            v[blo] = 1.0;
            pairs.push((t.diag[blo], v));
            continue;
        }
        let d = &t.diag[blo..=bhi];
        let e = &t.offdiag[blo..bhi];
        let maxe2 = e.iter().map(|x| x * x).fold(0.0, f64::max);
        let pivmin = f64::MIN_POSITIVE.max(f64::EPSILON * f64::EPSILON * maxe2);

        // Gershgorin bounds for the block
        let mut gl = f64::INFINITY;
        let mut gu = f64::NEG_INFINITY;
        for i in 0..m {
            let rad = (if i > 0 { e[i - 1].abs() } else { 0.0 })
                + (if i + 1 < m { e[i].abs() } else { 0.0 });
            gl = gl.min(d[i] - rad);
            gu = gu.max(d[i] + rad);
        }
        let pad = 2.0 * f64::EPSILON * gl.abs().max(gu.abs()) + 2.0 * pivmin;
        gl -= pad;
        gu += pad;

        let values: Vec<f64> =
            (0..m).map(|k| bisect_eigenvalue(d, e, k, gl, gu, pivmin)).collect();

        // inverse iteration, reorthogonalizing inside clusters
        let cluster_gap = 1e-5 * scale;
        let mut block_vecs: Vec<Vec<f64>> = Vec::with_capacity(m);
        for (k, &lam) in values.iter().enumerate() {
            let cluster_start = (0..k)
                .rev()
                .take_while(|&j| values[j + 1] - values[j] <= cluster_gap)
                .last()
                .unwrap_or(k);
            let mut converged = false;
            let mut v = vec![0.0; m];
            for attempt in 0..4 {
                // deterministic start vectors, varied across restarts
                for (i, x) in v.iter_mut().enumerate() {
                    *x = match attempt {
                        0 => 1.0,
                        1 => if i == k % m { 1.0 } else { 0.0 },
                        2 => if i % 2 == 0 { 1.0 } else { -1.0 },
                        _ => 1.0 + (i as f64) / (m as f64),
                    };
                }
                normalize(&mut v);
                // tiny shift perturbation on retries breaks exact singularity
                let lam_try = lam + attempt as f64 * 4.0 * f64::EPSILON * scale;
                // fixed iteration count: every vector must reach its floor
                // before cluster partners orthogonalize against it, so the
                // residual is judged only after the full sweep
                let mut dead = false;
                for _ in 0..4 {
                    shifted_solve(d, e, lam_try, &mut v, pivmin);
                    for prev in &block_vecs[cluster_start..] {
                        let dot: f64 = prev.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
                        for (x, p) in v.iter_mut().zip(prev.iter()) {
                            *x -= dot * p;
                        }
                    }
                    if normalize(&mut v) == 0.0 {
                        dead = true;
                        break;
                    }
                }
                if !dead && residual_block(d, e, lam, &v) <= 1e-11 * scale {
                    converged = true;
                    break;
                }
            }
            if !converged {
                return Err(Error::EigenNoConverge { index: blo + k });
            }
            block_vecs.push(v);
        }

        for (k, v) in block_vecs.into_iter().enumerate() {
            let mut full = vec![0.0; n];
            full[blo..=bhi].copy_from_slice(&v);
            pairs.push((values[k], full));
        }
    }

    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for (lam, mut v) in pairs {
        // sign convention: largest-magnitude component positive
        let mut imax = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[imax].abs() {
                imax = i;
            }
        }
        if v[imax] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
        values.push(lam);
        vectors.push(v);
    }
    Ok(EigenSystem { values, vectors })
}

fn residual_block(d: &[f64], e: &[f64], lam: f64, v: &[f64]) -> f64 {
    let m = d.len();
    let mut worst = 0.0f64;
    for i in 0..m {
        let mut acc = (d[i] - lam) * v[i];
        if i > 0 {
            acc += e[i - 1] * v[i - 1];
        }
        if i + 1 < m {
            acc += e[i] * v[i + 1];
        }
        worst = worst.max(acc.abs());
    }
    worst
}
