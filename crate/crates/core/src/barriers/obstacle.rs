use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Upper bound of the tail profile at `r = 1`.
pub const TAIL_CAP: f64 = 5.0;

/// Extended real used for obstacle values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtReal {
    Finite(f64),
    Infinity,
}

impl ExtReal {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// `f64::INFINITY` for the infinite marker.
    pub fn to_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// One-dimensional obstacle profile `g_1`: `r²/2` up to `α`, then the tail
///
/// `φ(r) = α²/2 + ∫_α^r s + β (s − α)² (1 − s)^{−1/2} ds`,
///
/// which matches `r²/2` to second order at `α`, has a derivative blowing up at
/// 1 and reaches exactly [`TAIL_CAP`] there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailProfile {
    pub alpha: f64,
    pub beta: f64,
}

impl TailProfile {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let c = 1.0 - alpha;
        let beta = (TAIL_CAP - 0.5) / (16.0 / 15.0 * c.powf(2.5));
        Ok(TailProfile { alpha, beta })
    }

    /// `∫_α^r (s − α)² (1 − s)^{−1/2} ds` in closed form.
    fn kernel_integral(&self, r: f64) -> f64 {
        let c = 1.0 - self.alpha;
        let big = |t: f64| 2.0 * c * c * t.sqrt() - 4.0 / 3.0 * c * t.powf(1.5) + 0.4 * t.powf(2.5);
        big(c) - big(1.0 - r)
    }

    pub fn value(&self, r: f64) -> ExtReal {
        let r = r.abs();
        if r <= self.alpha {
            ExtReal::Finite(0.5 * r * r)
        } else if r <= 1.0 {
            ExtReal::Finite(0.5 * r * r + self.beta * self.kernel_integral(r))
        } else {
            ExtReal::Infinity
        }
    }

    /// Derivative for `0 ≤ r < 1`.
    pub fn slope(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.alpha {
            r
        } else {
            r + self.beta * (r - self.alpha).powi(2) / (1.0 - r).sqrt()
        }
    }

    /// Second derivative for `0 ≤ r < 1`.
    pub fn curvature(&self, r: f64) -> f64 {
        let r = r.abs();
        if r <= self.alpha {
            1.0
        } else {
            let d = r - self.alpha;
            let t = 1.0 - r;
            1.0 + self.beta * (2.0 * d / t.sqrt() + 0.5 * d * d / t.powf(1.5))
        }
    }
}

/// The obstacle `g_{n,k,α}` after the quadratic rescale that puts its support
/// on `{x = 0, |y| ≤ ε}`: `g(0, y) = ε² g_1(|y|/ε)`, `+∞` off that set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub n: usize,
    pub k: usize,
    pub alpha: f64,
    pub eps: f64,
}

impl ObstacleSpec {
    pub fn validate(&self) -> Result<TailProfile> {
        if self.n < 2 || self.k < 1 || self.k >= self.n {
            return Err(Error::Config(format!(
                "need 1 <= k <= n-1, got n = {}, k = {}",
                self.n, self.k
            )));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Config(format!("eps must be positive, got {}", self.eps)));
        }
        TailProfile::new(self.alpha)
    }

    /// Radial part `ε² g_1(|p|/ε)` without the support restriction.
    pub fn radial(&self, r: f64) -> Result<ExtReal> {
        let tail = self.validate()?;
        Ok(match tail.value(r / self.eps) {
            ExtReal::Finite(v) => ExtReal::Finite(self.eps * self.eps * v),
            ExtReal::Infinity => ExtReal::Infinity,
        })
    }
}

/// Evaluates the rescaled obstacle at `point = (x, y) ∈ ℝ^{n−k} × ℝ^k`.
pub fn eval_obstacle(spec: &ObstacleSpec, point: &[f64]) -> Result<ExtReal> {
    spec.validate()?;
    if point.len() != spec.n {
        return Err(Error::Config(format!(
            "point has {} coordinates, expected {}",
            point.len(),
            spec.n
        )));
    }
    let split = spec.n - spec.k;
    let off = point[..split].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if off > 1e-12 * spec.eps {
        return Ok(ExtReal::Infinity);
    }
    let r = point[split..].iter().map(|v| v * v).sum::<f64>().sqrt();
    spec.radial(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_meets_the_cap_and_blows_up() {
        let t = TailProfile::new(0.5).unwrap();
        assert!((t.value(1.0).to_f64() - TAIL_CAP).abs() < 1e-12);
        assert!(t.slope(1.0 - 1e-6) >= 1e3);
        assert!(!t.value(1.0 + 1e-9).is_finite());
        // C² junction
        let a = 0.5;
        assert!((t.slope(a + 1e-9) - a).abs() < 1e-8);
        assert!((t.curvature(a + 1e-9) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let t = TailProfile::new(0.3).unwrap();
        let r = 0.9;
        let q = 0.5 * 0.09 + super::super::radial::integrate(&|s| t.slope(s), 0.3, r, 1e-12);
        assert!((t.value(r).to_f64() - q).abs() < 1e-9);
    }

    #[test]
    fn obstacle_support() {
        let spec = ObstacleSpec {
            n: 2,
            k: 1,
            alpha: 0.5,
            eps: 0.2,
        };
        let v = eval_obstacle(&spec, &[0.0, 0.3 * 0.2]).unwrap().to_f64();
        assert!((v - 0.045 * 0.04).abs() < 1e-15);
        assert_eq!(eval_obstacle(&spec, &[0.01, 0.0]).unwrap(), ExtReal::Infinity);
    }
}
