//! Small shared numerical routines: root bracketing, 1-D maximization,
//! peak refinement, quadrature, dense solves, and a damped least-squares
//! fitter for the line-shape models.

use crate::error::{Error, Result};

/// Bisection for a root of `f` on `[a, b]`; requires a sign change.
/// Runs until the interval shrinks below `xtol` (absolute).
pub fn bisect_root(mut f: impl FnMut(f64) -> f64, mut a: f64, mut b: f64, xtol: f64) -> Result<f64> {
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::analysis(format!(
            "bisection: no sign change on [{a}, {b}]"
        )));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || (b - a).abs() < xtol {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Golden-section search for the maximum of `f` on `[a, b]`.
/// Deterministic: fixed iteration count derived from the tolerance.
pub fn golden_section_max(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, xtol: f64) -> (f64, f64) {
    const INVPHI: f64 = 0.618_033_988_749_894_8;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INVPHI * (hi - lo);
    let mut x2 = lo + INVPHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let n = ((((b - a) / xtol).ln() / (1.0 / INVPHI).ln()).ceil() as usize).max(1);
    for _ in 0..n {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INVPHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INVPHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Vertex of the parabola through three equally spaced samples
/// `(x0 - h, y0)`, `(x0, y1)`, `(x0 + h, y2)`. Returns `(x_peak, y_peak)`.
/// Falls back to the center sample when the points are collinear.
pub fn parabolic_vertex(x0: f64, h: f64, y0: f64, y1: f64, y2: f64) -> (f64, f64) {
    let denom = y0 - 2.0 * y1 + y2;
    if denom.abs() < 1e-300 {
        return (x0, y1);
    }
    let delta = 0.5 * (y0 - y2) / denom;
    let delta = delta.clamp(-1.0, 1.0);
    let y = y1 - 0.25 * (y0 - y2) * delta;
    (x0 + delta * h, y)
}

/// Trapezoid rule over sample pairs `(x, y)`; `x` need not be uniform.
pub fn trapezoid(points: &[(f64, f64)]) -> f64 {
    points
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1))
        .sum()
}

/// In-place Gaussian elimination with partial pivoting for `A x = b`.
/// `a` is row-major `n x n`.
pub fn solve_dense(a: &mut [f64], b: &mut [f64], n: usize) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(b.len(), n);
    for col in 0..n {
        let mut pivot = col;
        for row in col + 1..n {
            if a[row * n + col].abs() > a[pivot * n + col].abs() {
                pivot = row;
            }
        }
        if a[pivot * n + col].abs() < 1e-300 {
            return Err(Error::analysis("singular linear system"));
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        let inv = 1.0 / a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] * inv;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    for col in (0..n).rev() {
        let mut s = b[col];
        for k in col + 1..n {
            s -= a[col * n + k] * b[k];
        }
        b[col] = s / a[col * n + col];
    }
    Ok(())
}

/// Bessel function J1, Abramowitz & Stegun 9.4 rational approximations
/// (absolute error below 1e-7). Used for mode-matched excitation profiles.
pub fn bessel_j1(x: f64) -> f64 {
    let ax = x.abs();
    let val = if ax < 3.0 {
        let t = (ax / 3.0) * (ax / 3.0);
        ax * (0.5 - 0.562_499_85 * t + 0.210_935_73 * t * t - 0.039_542_89 * t.powi(3)
            + 0.004_433_19 * t.powi(4)
            - 0.000_317_61 * t.powi(5)
            + 0.000_011_09 * t.powi(6))
    } else {
        let t = 3.0 / ax;
        let f1 = 0.797_884_56 + 0.000_001_56 * t + 0.016_596_67 * t * t
            - 0.000_171_05 * t.powi(3)
            - 0.002_495_11 * t.powi(4)
            + 0.001_136_53 * t.powi(5)
            - 0.000_200_33 * t.powi(6);
        let theta = ax - 2.356_194_49 + 0.124_996_12 * t + 0.000_056_50 * t * t
            - 0.006_378_79 * t.powi(3)
            + 0.000_743_48 * t.powi(4)
            + 0.000_798_24 * t.powi(5)
            - 0.000_291_66 * t.powi(6);
        f1 * theta.cos() / ax.sqrt()
    };
    if x < 0.0 {
        -val
    } else {
        val
    }
}

/// A located spectral peak with parabolic refinement applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub x: f64,
    pub height: f64,
    /// Index of the grid sample the peak came from.
    pub index: usize,
}

/// Local maxima of `ys` over the uniform grid starting at `x0` with step
/// `dx`, keeping only peaks taller than `rel_threshold` times the global
/// maximum. Peak positions and heights are refined through the parabola
/// fitted to each maximum and its neighbors. Sorted by `x`.
pub fn find_peaks(x0: f64, dx: f64, ys: &[f64], rel_threshold: f64) -> Vec<Peak> {
    if ys.len() < 3 {
        return Vec::new();
    }
    let max = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Vec::new();
    }
    let cut = max * rel_threshold;
    let mut peaks = Vec::new();
    for i in 1..ys.len() - 1 {
        if ys[i] >= cut && ys[i] > ys[i - 1] && ys[i] >= ys[i + 1] {
            // Skip the flat-plateau continuation: only the first sample of a
            // plateau qualifies through the strict left inequality.
            let (x, height) = parabolic_vertex(x0 + i as f64 * dx, dx, ys[i - 1], ys[i], ys[i + 1]);
            peaks.push(Peak { x, height, index: i });
        }
    }
    peaks
}

/// Model interface for [`fit_least_squares`]: residuals and an analytic
/// Jacobian evaluated at parameter vector `p`.
pub trait FitModel {
    fn param_count(&self) -> usize;
    fn residual_count(&self) -> usize;
    /// Fill `r[i]` with `model(x_i; p) - y_i`.
    fn residuals(&self, p: &[f64], r: &mut [f64]);
    /// Fill `jac[i * np + j]` with `d r_i / d p_j`.
    fn jacobian(&self, p: &[f64], jac: &mut [f64]);
}

/// Result of a damped least-squares fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: Vec<f64>,
    /// Sum of squared residuals at the solution.
    pub ssr: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Levenberg-Marquardt with a bounded iteration count.
///
/// Classic damped normal equations: `(J^T J + lambda diag(J^T J)) dp = -J^T r`
/// with multiplicative damping adaptation. Good enough for the 4-parameter
/// line-shape fits this crate needs; not a general-purpose optimizer.
pub fn fit_least_squares(model: &dyn FitModel, initial: &[f64], max_iter: usize) -> Result<FitResult> {
    let np = model.param_count();
    let nr = model.residual_count();
    assert_eq!(initial.len(), np);
    if nr < np {
        return Err(Error::analysis("fit: fewer samples than parameters"));
    }

    let mut p = initial.to_vec();
    let mut r = vec![0.0; nr];
    let mut jac = vec![0.0; nr * np];
    model.residuals(&p, &mut r);
    let mut ssr: f64 = r.iter().map(|v| v * v).sum();
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let mut last_rel = f64::INFINITY;

    for iter in 0..max_iter {
        iterations = iter + 1;
        model.jacobian(&p, &mut jac);

        // Normal equations.
        let mut jtj = vec![0.0; np * np];
        let mut jtr = vec![0.0; np];
        for i in 0..nr {
            for a in 0..np {
                let ja = jac[i * np + a];
                jtr[a] += ja * r[i];
                for b in a..np {
                    jtj[a * np + b] += ja * jac[i * np + b];
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                jtj[a * np + b] = jtj[b * np + a];
            }
        }

        let mut improved = false;
        for _ in 0..12 {
            let mut lhs = jtj.clone();
            for a in 0..np {
                let d = jtj[a * np + a];
                lhs[a * np + a] = d + lambda * d.max(1e-12);
            }
            let mut step: Vec<f64> = jtr.iter().map(|v| -v).collect();
            if solve_dense(&mut lhs, &mut step, np).is_err() {
                lambda *= 10.0;
                continue;
            }
            let trial: Vec<f64> = p.iter().zip(&step).map(|(a, b)| a + b).collect();
            let mut rt = vec![0.0; nr];
            model.residuals(&trial, &mut rt);
            let ssr_t: f64 = rt.iter().map(|v| v * v).sum();
            if ssr_t.is_finite() && ssr_t < ssr {
                last_rel = (ssr - ssr_t) / ssr.max(1e-300);
                p = trial;
                r = rt;
                ssr = ssr_t;
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                if last_rel < 1e-12 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if converged {
            break;
        }
        if !improved {
            // Damping saturated: treat the current point as the optimum.
            converged = ssr.is_finite();
            break;
        }
    }
    // Ran out of iterations while the objective was barely moving: that is a
    // converged fit for practical purposes.
    if !converged && last_rel < 1e-8 && ssr.is_finite() {
        converged = true;
    }

    Ok(FitResult {
        params: p,
        ssr,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_j1_reference_points() {
        // First maximum at x = 1.8412 with value 0.5819, first zero at 3.8317.
        assert!((bessel_j1(1.8412) - 0.5819).abs() < 1e-4);
        assert!(bessel_j1(3.8317).abs() < 1e-4);
        assert!((bessel_j1(0.5) - 0.242268).abs() < 1e-5);
        assert!((bessel_j1(7.0) - -0.004683).abs() < 1e-5);
        assert_eq!(bessel_j1(0.0), 0.0);
        assert!((bessel_j1(-0.5) + bessel_j1(0.5)).abs() < 1e-15);
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-11);
    }

    #[test]
    fn golden_section_finds_quadratic_peak() {
        let (x, y) = golden_section_max(|x| 3.0 - (x - 1.25) * (x - 1.25), 0.0, 4.0, 1e-10);
        // Function-value comparison limits localization to ~sqrt(eps) at a
        // quadratic maximum.
        assert!((x - 1.25).abs() < 1e-6);
        assert!((y - 3.0).abs() < 1e-12);
    }

    #[test]
    fn parabola_recovers_shifted_vertex() {
        // y = 5 - (x - 0.3)^2 sampled at x = -1, 0, 1.
        let f = |x: f64| 5.0 - (x - 0.3) * (x - 0.3);
        let (x, y) = parabolic_vertex(0.0, 1.0, f(-1.0), f(0.0), f(1.0));
        assert!((x - 0.3).abs() < 1e-12);
        assert!((y - 5.0).abs() < 1e-12);
    }

    #[test]
    fn dense_solve_3x3() {
        let mut a = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let mut b = vec![8.0, -11.0, -3.0];
        solve_dense(&mut a, &mut b, 3).unwrap();
        assert!((b[0] - 2.0).abs() < 1e-12);
        assert!((b[1] - 3.0).abs() < 1e-12);
        assert!((b[2] - -1.0).abs() < 1e-12);
    }

    struct Quadratic {
        xs: Vec<f64>,
        ys: Vec<f64>,
    }

    impl FitModel for Quadratic {
        fn param_count(&self) -> usize {
            2
        }
        fn residual_count(&self) -> usize {
            self.xs.len()
        }
        fn residuals(&self, p: &[f64], r: &mut [f64]) {
            for (i, (&x, &y)) in self.xs.iter().zip(&self.ys).enumerate() {
                r[i] = p[0] * x * x + p[1] - y;
            }
        }
        fn jacobian(&self, _p: &[f64], jac: &mut [f64]) {
            for (i, &x) in self.xs.iter().enumerate() {
                jac[i * 2] = x * x;
                jac[i * 2 + 1] = 1.0;
            }
        }
    }

    #[test]
    fn lm_fits_quadratic() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * x * x - 0.7).collect();
        let fit = fit_least_squares(&Quadratic { xs, ys }, &[1.0, 0.0], 50).unwrap();
        assert!(fit.converged);
        assert!((fit.params[0] - 2.5).abs() < 1e-8);
        assert!((fit.params[1] + 0.7).abs() < 1e-8);
    }
}
