use serde::Serialize;

use crate::{Error, Result};

/// Absolute tolerance of every profile quadrature.
pub const QUAD_TOL: f64 = 1e-10;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (fa, fb) = (f(a), f(b));
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Radial profile `W_n(r) = ∫_0^r (1 + s^n)^{1/n} ds`.
pub fn w_profile(n: u32, r: f64) -> f64 {
    assert!(n >= 1);
    let r = r.abs();
    if n == 1 {
        return r + 0.5 * r * r;
    }
    let nf = n as f64;
    integrate(&|s: f64| (1.0 + s.powf(nf)).powf(1.0 / nf), 0.0, r, QUAD_TOL)
}

/// Radial derivative `(1 + r^n)^{1/n}`.
pub fn w_slope(n: u32, r: f64) -> f64 {
    (1.0 + r.abs().powi(n as i32)).powf(1.0 / n as f64)
}

/// Value and gradient of `W_n` at `x`. The gradient at the origin is `None`:
/// the subdifferential there is the closed unit ball.
pub fn eval_w(n: u32, x: &[f64]) -> (f64, Option<Vec<f64>>) {
    let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let value = w_profile(n, r);
    if r == 0.0 {
        return (value, None);
    }
    let s = w_slope(n, r) / r;
    (value, Some(x.iter().map(|v| v * s).collect()))
}

/// Least-squares fit of `W_n(r) − r²/2` on a radius ladder.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthFit {
    pub n: u32,
    /// Human-readable model, e.g. `a*log(r) + b + c/r^2`.
    pub model: String,
    pub radii: Vec<f64>,
    pub excess: Vec<f64>,
    pub params: Vec<f64>,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    /// Fitted constant `c(n)` for `n ≥ 3`.
    pub constant: Option<f64>,
}

/// Fits the large-|x| growth of `W_n − |x|²/2`.
///
/// For `n = 2` the model is `a·log r + b + c·r⁻²`; the `r⁻²` term is the first
/// correction of the exact expansion and keeps the residual small on short
/// ladders. For `n ≥ 3` it is `c + b·r^{2−n}`.
pub fn growth_check(n: u32, radii: &[f64]) -> Result<GrowthFit> {
    if n < 2 {
        return Err(Error::Config(format!("growth check needs n >= 2, got {n}")));
    }
    if radii.len() < 3 {
        return Err(Error::Config(format!(
            "radius ladder needs at least 3 points, got {}",
            radii.len()
        )));
    }
    if radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Config("radii must be positive".into()));
    }
    let excess: Vec<f64> = radii.iter().map(|&r| w_profile(n, r) - 0.5 * r * r).collect();
    let basis: Vec<Vec<f64>> = if n == 2 {
        radii.iter().map(|&r| vec![r.ln(), 1.0, r.powi(-2)]).collect()
    } else {
        radii.iter().map(|&r| vec![1.0, r.powi(2 - n as i32)]).collect()
    };
    let params = least_squares(&basis, &excess);
    let residuals: Vec<f64> = basis
        .iter()
        .zip(&excess)
        .map(|(row, e)| row.iter().zip(&params).map(|(b, p)| b * p).sum::<f64>() - e)
        .collect();
    let max_residual = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
    Ok(GrowthFit {
        n,
        model: if n == 2 {
            "a*log(r) + b + c/r^2".into()
        } else {
            format!("c + b*r^{}", 2 - n as i32)
        },
        radii: radii.to_vec(),
        excess,
        constant: if n >= 3 { Some(params[0]) } else { None },
        params,
        residuals,
        max_residual,
    })
}

/// Normal-equation least squares for a handful of columns.
fn least_squares(rows: &[Vec<f64>], rhs: &[f64]) -> Vec<f64> {
    let m = rows[0].len();
    let mut a = vec![vec![0.0; m + 1]; m];
    for (row, y) in rows.iter().zip(rhs) {
        for i in 0..m {
            for j in 0..m {
                a[i][j] += row[i] * row[j];
            }
            a[i][m] += row[i] * y;
        }
    }
    for c in 0..m {
        let piv = (c..m).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, piv);
        for r in 0..m {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    (0..m).map(|i| a[i][m] / a[i][i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn w2_matches_closed_form() {
        for r in [0.0, 0.2, 0.5, 1.0, 3.0] {
            let exact = 0.5 * (r * (1.0f64 + r * r).sqrt() + f64::asinh(r));
            assert!((w_profile(2, r) - exact).abs() < 1e-10);
        }
        assert!((w_profile(1, 1.0) - 1.5).abs() < 1e-15);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = [0.3, -0.7, 0.2];
        let (_, g) = eval_w(3, &x);
        let g = g.unwrap();
        for d in 0..3 {
            let mut p = x;
            let mut m = x;
            p[d] += 1e-5;
            m[d] -= 1e-5;
            let fd = (eval_w(3, &p).0 - eval_w(3, &m).0) / 2e-5;
            assert!((fd - g[d]).abs() < 1e-6);
        }
        assert!(eval_w(2, &[0.0, 0.0]).1.is_none());
    }

    #[test]
    fn growth_fits() {
        let fit = growth_check(2, &[2.0, 4.0, 8.0, 16.0]).unwrap();
        assert!(fit.max_residual <= 1e-3);
        assert!((fit.params[0] - 0.5).abs() < 0.01);
        let short = growth_check(3, &[2.0, 4.0, 8.0]).unwrap().constant.unwrap();
        let long = growth_check(3, &[2.0, 4.0, 8.0, 16.0]).unwrap().constant.unwrap();
        assert!(short > 0.0 && ((short - long) / long).abs() < 1e-3);
        assert!(growth_check(2, &[4.0]).is_err());
    }
}
