//! Embedded Dormand-Prince 5(4) integrator for complex state vectors.
//!
//! Step size adapts to a mixed absolute/relative error target; output is
//! sampled on a uniform time grid (endpoints included) by clamping steps to
//! land exactly on sample times, so no interpolation error enters.

use num_complex::Complex64 as C64;

use crate::{Error, Result};

// Dormand-Prince coefficients. The last a-row doubles as the 5th-order
// solution weights (FSAL).
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 6] = [
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// b5 - b4: weights of the embedded error estimate
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Trajectory sampled on the uniform grid handed back in `times`.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub times: Vec<f64>,
    pub states: Vec<Vec<C64>>,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

/// Integrate dy/dt = f(t, y) from t_span.0 to t_span.1.
///
/// `n_samples >= 2` states are returned at uniform times including both
/// endpoints. `rel_tol` controls the local error per step; the absolute
/// floor is tied to the same value, which suits unit-norm state vectors.
pub fn integrate_ode<F>(
    mut f: F,
    y0: &[C64],
    t_span: (f64, f64),
    rel_tol: f64,
    n_samples: usize,
) -> Result<OdeSolution>
where
    F: FnMut(f64, &[C64], &mut [C64]),
{
    assert!((1e-14..=1e-4).contains(&rel_tol), "rel_tol out of range: {rel_tol:e}");
    assert!(n_samples >= 2, "need at least the two endpoint samples");
    let (t0, t1) = t_span;
    assert!(t0.is_finite() && t1.is_finite() && t0 != t1, "bad time span");
    let dir = (t1 - t0).signum();
    let n = y0.len();
    assert!(n > 0);
    if !y0.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFiniteState { t: t0 });
    }

    let times: Vec<f64> = (0..n_samples)
        .map(|i| {
            if i == n_samples - 1 {
                t1
            } else {
                t0 + (t1 - t0) * (i as f64) / ((n_samples - 1) as f64)
            }
        })
        .collect();

    let mut states: Vec<Vec<C64>> = Vec::with_capacity(n_samples);
    states.push(y0.to_vec());

    let mut y = y0.to_vec();
    let mut t = t0;
    let mut k: Vec<Vec<C64>> = vec![vec![C64::new(0.0, 0.0); n]; 7];
    f(t, &y, &mut k[0]);

    // conservative first step from the magnitudes of y and f
    let ymag = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let fmag = k[0].iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut h = dir * (0.01 * (1.0 + ymag) / (1.0 + fmag)).min((t1 - t0).abs() / 10.0);

    let mut ynew = vec![C64::new(0.0, 0.0); n];
    let mut ystage = vec![C64::new(0.0, 0.0); n];
    let mut next_sample = 1usize;
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut just_rejected = false;

    while next_sample < n_samples {
        let target = times[next_sample];
        let mut hitting = false;
        if (t + h - target) * dir >= 0.0 {
            h = target - t;
            hitting = true;
        }
        if h.abs() < 4.0 * f64::EPSILON * t.abs().max(1.0) {
            if hitting {
                // sample time indistinguishable from t at working precision
                states.push(y.clone());
                t = target;
                next_sample += 1;
                h = dir * (target - t0).abs().max(f64::EPSILON);
                continue;
            }
            return Err(Error::StepSizeUnderflow { t, h });
        }

        // stages 2..7; stage 7 evaluates at the 5th-order solution (FSAL)
        for s in 1..7 {
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate().take(s) {
                    let a = A[s - 1][j];
                    if a != 0.0 {
                        acc += a * kj[i];
                    }
                }
                ystage[i] = y[i] + h * acc;
            }
            if s == 6 {
                ynew.copy_from_slice(&ystage);
            }
            let (head, tail) = k.split_at_mut(s);
            let _ = head;
            f(t + C[s] * h, &ystage, &mut tail[0]);
        }

        // scaled RMS error of the embedded difference
        let mut errsq = 0.0;
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for (j, kj) in k.iter().enumerate() {
                if E[j] != 0.0 {
                    acc += E[j] * kj[i];
                }
            }
            let e = (h * acc).norm();
            let scale = rel_tol * (1.0 + y[i].norm().max(ynew[i].norm()));
            errsq += (e / scale) * (e / scale);
        }
        let err = (errsq / n as f64).sqrt();

        if err.is_finite() && err <= 1.0 {
            t = if hitting { target } else { t + h };
            std::mem::swap(&mut y, &mut ynew);
            k.swap(0, 6);
            accepted += 1;
            if !y.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::NonFiniteState { t });
            }
            if hitting {
                states.push(y.clone());
                next_sample += 1;
            }
            let fac_max = if just_rejected { 1.0 } else { 5.0 };
            let fac = (0.9 * err.powf(-0.2)).clamp(0.2, fac_max);
            h *= fac;
            just_rejected = false;
        } else {
            rejected += 1;
            just_rejected = true;
            let fac = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= fac;
        }
    }

    Ok(OdeSolution { times, states, steps_accepted: accepted, steps_rejected: rejected })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oscillator_phase_rotation() {
        // y'' = -y recast as z' = -iz, z = y + iy'; solution e^{-it}
        let z0 = [C64::new(1.0, 0.0)];
        let sol = integrate_ode(
            |_, y, dy| dy[0] = C64::new(0.0, -1.0) * y[0],
            &z0,
            (0.0, 2.0 * std::f64::consts::PI),
            1e-9,
            17,
        )
        .unwrap();
        let end = sol.states.last().unwrap()[0];
        assert!((end - z0[0]).norm() < 1e-8, "endpoint error {:e}", (end - z0[0]).norm());
        // interior samples match the exact rotation too
        for (t, s) in sol.times.iter().zip(&sol.states) {
            let want = C64::from_polar(1.0, -t);
            assert!((s[0] - want).norm() < 1e-8);
        }
    }

    #[test]
    fn sample_grid_is_uniform_with_endpoints() {
        let sol = integrate_ode(
            |_, y, dy| dy[0] = -y[0],
            &[C64::new(1.0, 0.0)],
            (0.0, 3.0),
            1e-8,
            7,
        )
        .unwrap();
        assert_eq!(sol.times.len(), 7);
        assert_eq!(sol.states.len(), 7);
        assert_eq!(sol.times[0], 0.0);
        assert_eq!(*sol.times.last().unwrap(), 3.0);
        for w in sol.times.windows(2) {
            assert!((w[1] - w[0] - 0.5).abs() < 1e-12);
        }
        for (t, s) in sol.times.iter().zip(&sol.states) {
            assert!((s[0].re - (-t).exp()).abs() < 1e-7);
        }
    }

    #[test]
    fn tighter_tolerance_tightens_error() {
        let run = |tol: f64| {
            let sol = integrate_ode(
                |t, y, dy| dy[0] = C64::new(0.0, -1.0) * y[0] * (1.0 + 0.5 * t.sin()),
                &[C64::new(1.0, 0.0)],
                (0.0, 20.0),
                tol,
                3,
            )
            .unwrap();
            sol.states.last().unwrap()[0]
        };
        let loose = run(1e-6);
        let tight = run(1e-12);
        let reference = run(1e-13);
        assert!((loose - reference).norm() > (tight - reference).norm());
        assert!((tight - reference).norm() < 1e-10);
    }

    #[test]
    fn reversibility_round_trip() {
        let rhs = |_: f64, y: &[C64], dy: &mut [C64]| {
            // coupled two-level rotation
            dy[0] = C64::new(0.0, -1.0) * y[1];
            dy[1] = C64::new(0.0, -1.0) * y[0];
        };
        let y0 = [C64::new(0.8, 0.1), C64::new(0.2, -0.3)];
        let tol = 1e-9;
        let fwd = integrate_ode(rhs, &y0, (0.0, 10.0), tol, 2).unwrap();
        let yend = fwd.states.last().unwrap().clone();
        let back = integrate_ode(
            |t, y, dy| {
                rhs(t, y, dy);
                for d in dy.iter_mut() {
                    *d = -*d;
                }
            },
            &yend,
            (0.0, 10.0),
            tol,
            2,
        )
        .unwrap();
        let yrt = back.states.last().unwrap();
        for (a, b) in yrt.iter().zip(&y0) {
            assert!((a - b).norm() <= 10.0 * tol, "round trip error {:e}", (a - b).norm());
        }
    }

    #[test]
    fn backward_span_supported() {
        let sol = integrate_ode(
            |_, y, dy| dy[0] = y[0],
            &[C64::new(1.0, 0.0)],
            (2.0, 0.0),
            1e-10,
            5,
        )
        .unwrap();
        // y' = y integrated backwards from y(2)=1 gives y(0) = e^{-2}
        assert!((sol.states.last().unwrap()[0].re - (-2.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn blowup_reports_step_underflow() {
        // y' = y^2 from y(0)=1 blows up at t=1
        let res = integrate_ode(
            |_, y, dy| dy[0] = y[0] * y[0],
            &[C64::new(1.0, 0.0)],
            (0.0, 2.0),
            1e-9,
            3,
        );
        assert!(matches!(
            res,
            Err(Error::StepSizeUnderflow { .. }) | Err(Error::NonFiniteState { .. })
        ));
    }

    #[test]
    fn adaptivity_rejects_then_recovers() {
        // sharp kick near t = 5 forces rejections without killing the run
        let sol = integrate_ode(
            |t, y, dy| {
                let kick = 50.0 * (-((t - 5.0) / 0.01).powi(2)).exp();
                dy[0] = C64::new(0.0, -(1.0 + kick)) * y[0];
            },
            &[C64::new(1.0, 0.0)],
            (0.0, 10.0),
            1e-9,
            11,
        )
        .unwrap();
        assert!(sol.steps_rejected > 0);
        // modulus is conserved by a pure phase equation
        for s in &sol.states {
            assert!((s[0].norm() - 1.0).abs() < 1e-7);
        }
    }
}
