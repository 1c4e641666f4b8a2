use serde::Serialize;

use crate::geom::P2;
use crate::{Error, Result};

/// Closed-form transport from the unit disk to its halves pushed apart by `±e₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SplitBallValue {
    /// `T(x, y) = (x ± 1, y)` and `u = (x² + y²)/2 + |x|`.
    Point { map: P2, potential: f64 },
    /// On `x = 0` the subdifferential is the segment `[−1, 1] × {y}`.
    Interval { lo: P2, hi: P2, potential: f64 },
}

pub fn split_ball_reference(p: P2) -> Result<SplitBallValue> {
    let [x, y] = p;
    if !(x * x + y * y < 1.0) {
        return Err(Error::Range(format!("({x}, {y}) is outside the unit disk")));
    }
    let potential = 0.5 * (x * x + y * y) + x.abs();
    Ok(if x > 0.0 {
        SplitBallValue::Point {
            map: [x + 1.0, y],
            potential,
        }
    } else if x < 0.0 {
        SplitBallValue::Point {
            map: [x - 1.0, y],
            potential,
        }
    } else {
        SplitBallValue::Interval {
            lo: [-1.0, y],
            hi: [1.0, y],
            potential,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        match split_ball_reference([0.5, 0.0]).unwrap() {
            SplitBallValue::Point { map, potential } => {
                assert_eq!(map, [1.5, 0.0]);
                assert!((potential - 0.625).abs() < 1e-15);
            }
            v => panic!("{v:?}"),
        }
        match split_ball_reference([-0.5, 0.2]).unwrap() {
            SplitBallValue::Point { map, .. } => assert_eq!(map, [-1.5, 0.2]),
            v => panic!("{v:?}"),
        }
        assert_eq!(
            split_ball_reference([0.0, 0.3]).unwrap(),
            SplitBallValue::Interval {
                lo: [-1.0, 0.3],
                hi: [1.0, 0.3],
                potential: 0.045
            }
        );
        assert!(split_ball_reference([1.0, 0.0]).is_err());
    }
}
