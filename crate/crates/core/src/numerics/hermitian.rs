//! Eigenvalues of dense Hermitian matrices by cyclic complex Jacobi
//! rotations. Only the spectrum is needed (entropy of reduced density
//! matrices), so accumulating eigenvectors is skipped.

use num_complex::Complex64 as C64;

/// Eigenvalues, ascending. `a` is row-major n x n and must be Hermitian;
/// the strict lower triangle is ignored and rebuilt from the upper one.
pub fn hermitian_eigenvalues(a: &[C64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    let mut m = a.to_vec();
    // enforce exact hermiticity so rotation updates stay consistent
    for p in 0..n {
        m[p * n + p] = C64::new(m[p * n + p].re, 0.0);
        for q in p + 1..n {
            m[q * n + p] = m[p * n + q].conj();
        }
    }
    let frob: f64 = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if frob == 0.0 {
        return vec![0.0; n];
    }
    let tol = 1e-28 * frob * frob; // on squared off-diagonal mass

    for _sweep in 0..60 {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| m[p * n + q].norm_sqr())
            .sum();
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag; // e^{i phi}
                let tau = (m[q * n + q].re - m[p * n + p].re) / (2.0 * mag);
                // smaller root of t^2 - 2 tau t - 1 = 0 rotates the least
                let t = if tau >= 0.0 {
                    -1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // columns: col_p <- c col_p + s e^{-i phi} col_q,
                //          col_q <- -s e^{i phi} col_p + c col_q
                for r in 0..n {
                    let mrp = m[r * n + p];
                    let mrq = m[r * n + q];
                    m[r * n + p] = c * mrp + s * phase.conj() * mrq;
                    m[r * n + q] = -s * phase * mrp + c * mrq;
                }
                // rows: row_p <- c row_p + s e^{i phi} row_q, etc.
                for cidx in 0..n {
                    let mpc = m[p * n + cidx];
                    let mqc = m[q * n + cidx];
                    m[p * n + cidx] = c * mpc + s * phase * mqc;
                    m[q * n + cidx] = -s * phase.conj() * mpc + c * mqc;
                }
                m[p * n + q] = C64::new(0.0, 0.0);
                m[q * n + p] = C64::new(0.0, 0.0);
                m[p * n + p] = C64::new(m[p * n + p].re, 0.0);
                m[q * n + q] = C64::new(m[q * n + q].re, 0.0);
            }
        }
    }

    let mut vals: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}
