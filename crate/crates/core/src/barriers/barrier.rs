use serde::{Deserialize, Serialize};

use super::radial::w_profile;
use crate::linalg;
use crate::{Error, Result};

/// Affine form `⟨normal, p⟩ + offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearForm {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl LinearForm {
    fn eval(&self, p: &[f64]) -> f64 {
        self.normal.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + self.offset
    }
}

/// Explicit comparison functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum BarrierSpec {
    /// `W_n(x) − W_n(ε e)`.
    LowerD { n: u32, eps: f64 },
    /// `|(x, y)|²/2 + |x|/4` on `ℝ^{n−k} × ℝ^k`.
    PhiLine { n: usize, k: usize },
    /// `|(x, y)|²/2 + |x|/16 + L` with `|∇L| = 1/8`.
    PhiPolytope {
        n: usize,
        k: usize,
        face: Option<LinearForm>,
    },
    /// `|p|²/2 + Σ dist(p, ⟨d_i⟩)/(8k)` for `k` directions.
    PhiCross { directions: Vec<Vec<f64>> },
    /// `(x² + y²)/2 + |x|` in the plane.
    Caffarelli,
    /// `x²/2 + C|y|^{4/3}(1 + z²)` on `ℝ × ℝ² × ℝ`.
    Interaction4d { c: f64 },
}

impl BarrierSpec {
    pub fn name(&self) -> &'static str {
        match self {
            BarrierSpec::LowerD { .. } => "lower_D",
            BarrierSpec::PhiLine { .. } => "phi_line",
            BarrierSpec::PhiPolytope { .. } => "phi_polytope",
            BarrierSpec::PhiCross { .. } => "phi_cross",
            BarrierSpec::Caffarelli => "caffarelli",
            BarrierSpec::Interaction4d { .. } => "interaction4d",
        }
    }

    /// Ambient dimension, when fixed by the parameters.
    pub fn dim(&self) -> Option<usize> {
        match self {
            BarrierSpec::LowerD { n, .. } => Some(*n as usize),
            BarrierSpec::PhiLine { n, .. } | BarrierSpec::PhiPolytope { n, .. } => Some(*n),
            BarrierSpec::PhiCross { directions } => directions.first().map(|d| d.len()),
            BarrierSpec::Caffarelli => Some(2),
            BarrierSpec::Interaction4d { .. } => Some(4),
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Distance from `p` to the line spanned by `d`.
pub fn dist_to_span(p: &[f64], d: &[f64]) -> f64 {
    let dd: f64 = d.iter().map(|a| a * a).sum();
    let t = p.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / dd;
    p.iter()
        .zip(d)
        .map(|(a, b)| (a - t * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn check_split(n: usize, k: usize) -> Result<()> {
    if n < 2 || k < 1 || k >= n {
        return Err(Error::Config(format!("need 1 <= k <= n-1, got n = {n}, k = {k}")));
    }
    Ok(())
}

/// Evaluates a barrier at `point`.
pub fn eval_barrier(spec: &BarrierSpec, point: &[f64]) -> Result<f64> {
    if let Some(d) = spec.dim() {
        if d != point.len() {
            return Err(Error::Config(format!(
                "{} expects {d} coordinates, got {}",
                spec.name(),
                point.len()
            )));
        }
    }
    let sq = 0.5 * point.iter().map(|a| a * a).sum::<f64>();
    match spec {
        BarrierSpec::LowerD { n, eps } => {
            if *n < 1 || !(*eps > 0.0) {
                return Err(Error::Config("lower_D needs n >= 1 and eps > 0".into()));
            }
            Ok(w_profile(*n, norm(point)) - w_profile(*n, *eps))
        }
        BarrierSpec::PhiLine { n, k } => {
            check_split(*n, *k)?;
            Ok(sq + norm(&point[..n - k]) / 4.0)
        }
        BarrierSpec::PhiPolytope { n, k, face } => {
            check_split(*n, *k)?;
            let face = face
                .as_ref()
                .ok_or_else(|| Error::Config("phi_polytope needs face data (the linear form L)".into()))?;
            if face.normal.len() != *n {
                return Err(Error::Config("face normal has the wrong dimension".into()));
            }
            if (norm(&face.normal) - 0.125).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "face form must have gradient norm 1/8, got {}",
                    norm(&face.normal)
                )));
            }
            Ok(sq + norm(&point[..n - k]) / 16.0 + face.eval(point))
        }
        BarrierSpec::PhiCross { directions } => {
            if directions.is_empty() || directions.iter().any(|d| norm(d) == 0.0) {
                return Err(Error::Config("phi_cross needs nonzero directions".into()));
            }
            let k = directions.len() as f64;
            Ok(sq + directions.iter().map(|d| dist_to_span(point, d)).sum::<f64>() / (8.0 * k))
        }
        BarrierSpec::Caffarelli => Ok(sq + point[0].abs()),
        BarrierSpec::Interaction4d { c } => {
            let r = (point[1] * point[1] + point[2] * point[2]).sqrt();
            Ok(0.5 * point[0] * point[0] + c * r.powf(4.0 / 3.0) * (1.0 + point[3] * point[3]))
        }
    }
}

/// Exact Hessian determinant of the interaction barrier at `|y| > 0`:
/// `(32/27) C³ (1 + z²)(1 − 7z²)`, independent of `x` and `|y|`.
pub fn interaction_det_exact(c: f64, z: f64) -> f64 {
    32.0 / 27.0 * c.powi(3) * (1.0 + z * z) * (1.0 - 7.0 * z * z)
}

/// Central-difference Hessian with one Richardson step (`h` and `h/2`).
pub fn fd_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let coarse = raw_hessian(f, x, h);
    let fine = raw_hessian(f, x, 0.5 * h);
    coarse
        .iter()
        .zip(&fine)
        .map(|(rc, rf)| rc.iter().zip(rf).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
        .collect()
}

fn raw_hessian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let n = x.len();
    let at = |di: &[(usize, f64)]| {
        let mut p = x.to_vec();
        for &(i, s) in di {
            p[i] += s;
        }
        f(&p)
    };
    let f0 = f(x);
    let mut hm = vec![vec![0.0; n]; n];
    for i in 0..n {
        hm[i][i] = (at(&[(i, h)]) - 2.0 * f0 + at(&[(i, -h)])) / (h * h);
        for j in (i + 1)..n {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hm[i][j] = v;
            hm[j][i] = v;
        }
    }
    hm
}

/// Finite-difference step used by [`hessian_det_check`].
pub const FD_STEP: f64 = 1e-4;
/// Minimum distance of accepted samples from the singular set `{y = 0}`.
pub const SINGULAR_MARGIN: f64 = 0.01;

#[derive(Debug, Clone, Serialize)]
pub struct DetCheck {
    pub c: f64,
    pub min_det: f64,
    pub argmin: [f64; 4],
    pub accepted: usize,
    /// Indices of samples rejected for being too close to `{y = 0}`.
    pub rejected: Vec<usize>,
}

/// Minimum finite-difference Hessian determinant of the interaction barrier
/// with constant `c` over the samples `(x, y₁, y₂, z)`.
pub fn hessian_det_check(c: f64, samples: &[[f64; 4]]) -> Result<DetCheck> {
    let spec = BarrierSpec::Interaction4d { c };
    let f = |p: &[f64]| eval_barrier(&spec, p).expect("four coordinates");
    let mut rejected = Vec::new();
    let mut best = (f64::INFINITY, [0.0; 4]);
    let mut accepted = 0;
    for (i, s) in samples.iter().enumerate() {
        if (s[1] * s[1] + s[2] * s[2]).sqrt() < SINGULAR_MARGIN {
            rejected.push(i);
            continue;
        }
        accepted += 1;
        let d = linalg::det(fd_hessian(&f, s, FD_STEP));
        if d < best.0 {
            best = (d, *s);
        }
    }
    if accepted == 0 {
        return Err(Error::Config("every sample lies within the singular tube".into()));
    }
    Ok(DetCheck {
        c,
        min_det: best.0,
        argmin: best.1,
        accepted,
        rejected,
    })
}

/// Result of the search for the smallest admissible constant.
#[derive(Debug, Clone, Serialize)]
pub struct CStarSearch {
    pub c_star: f64,
    pub at_c_star: DetCheck,
    pub at_quarter: DetCheck,
}

/// Smallest `C` with `min det ≥ 1` over the samples, by doubling then bisection
/// with [`hessian_det_check`] as the oracle.
pub fn find_c_star(samples: &[[f64; 4]]) -> Result<CStarSearch> {
    let passes = |c: f64| hessian_det_check(c, samples).map(|r| r.min_det >= 1.0);
    let mut hi = 1e-3;
    let mut history = Vec::new();
    let mut bracketed = false;
    for _ in 0..45 {
        let r = hessian_det_check(hi, samples)?;
        history.push(r.min_det);
        if r.min_det >= 1.0 {
            bracketed = true;
            break;
        }
        hi *= 2.0;
    }
    if !bracketed {
        return Err(Error::NonConvergence {
            iterations: history.len(),
            residual: *history.last().unwrap_or(&f64::NAN),
            history,
        });
    }
    let mut lo = 0.5 * hi;
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if passes(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(CStarSearch {
        c_star: hi,
        at_c_star: hessian_det_check(hi, samples)?,
        at_quarter: hessian_det_check(0.25 * hi, samples)?,
    })
}

/// Tensor grid on `[lo, hi]⁴` with `m` points per axis.
pub fn grid4(lo: f64, hi: f64, m: usize) -> Vec<[f64; 4]> {
    let t = |i: usize| lo + (hi - lo) * i as f64 / (m - 1) as f64;
    let mut out = Vec::with_capacity(m.pow(4));
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    out.push([t(a), t(b), t(c), t(d)]);
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn caffarelli_values() {
        assert!((eval_barrier(&BarrierSpec::Caffarelli, &[0.5, 0.0]).unwrap() - 0.625).abs() < 1e-15);
        let h = 1e-7;
        let right = (eval_barrier(&BarrierSpec::Caffarelli, &[h, 0.3]).unwrap()
            - eval_barrier(&BarrierSpec::Caffarelli, &[0.0, 0.3]).unwrap())
            / h;
        let left = (eval_barrier(&BarrierSpec::Caffarelli, &[0.0, 0.3]).unwrap()
            - eval_barrier(&BarrierSpec::Caffarelli, &[-h, 0.3]).unwrap())
            / h;
        assert!((right - left - 2.0).abs() < 1e-6);
    }

    #[test]
    fn line_barrier_on_the_sphere() {
        let s = BarrierSpec::PhiLine { n: 2, k: 1 };
        let v = eval_barrier(&s, &[0.5, 0.0]).unwrap();
        assert!((v - 0.25).abs() < 1e-15);
        let d = BarrierSpec::LowerD { n: 2, eps: 0.2 };
        assert!(eval_barrier(&d, &[0.0, 0.2]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn polytope_needs_face() {
        let s = BarrierSpec::PhiPolytope { n: 2, k: 1, face: None };
        assert!(matches!(eval_barrier(&s, &[0.0, 0.0]), Err(Error::Config(_))));
    }

    #[test]
    fn fd_determinant_matches_closed_form() {
        for (c, z) in [(1.0, 0.0), (2.0, 0.3), (1.5, 0.8)] {
            let r = hessian_det_check(c, &[[0.2, 0.4, -0.3, z]]).unwrap();
            let exact = interaction_det_exact(c, z);
            assert!((r.min_det - exact).abs() < 1e-5 * (1.0 + exact.abs()), "{} vs {exact}", r.min_det);
        }
    }

    #[test]
    fn x_block_decouples() {
        let spec = BarrierSpec::Interaction4d { c: 3.0 };
        let f = |p: &[f64]| eval_barrier(&spec, p).unwrap();
        let h = fd_hessian(&f, &[0.3, 0.5, 0.2, -0.4], FD_STEP);
        for j in 1..4 {
            assert!(h[0][j].abs() < 1e-6);
        }
        assert!((h[0][0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn small_constant_fails() {
        let r = hessian_det_check(0.01, &[[0.0, 0.5, 0.5, 0.0]]).unwrap();
        assert!(r.min_det < 1.0);
        let all_bad = hessian_det_check(1.0, &[[0.0, 0.001, 0.0, 0.0]]);
        assert!(all_bad.is_err());
    }

    #[test]
    fn constant_exists_on_a_slab_but_not_on_the_full_grid() {
        let slab: Vec<[f64; 4]> = grid4(-1.0, 1.0, 9).into_iter().filter(|p| p[3].abs() <= 0.3).collect();
        let s = find_c_star(&slab).unwrap();
        assert!(s.at_c_star.min_det >= 1.0 && s.at_quarter.min_det < 1.0);
        let exact = (1.0 / interaction_det_exact(1.0, 0.25)).cbrt();
        assert!((s.c_star - exact).abs() <= 1e-3 * exact, "{} vs {exact}", s.c_star);
        assert!(matches!(find_c_star(&grid4(-1.0, 1.0, 9)), Err(Error::NonConvergence { .. })));
    }
}
