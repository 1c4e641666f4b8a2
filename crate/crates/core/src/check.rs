use serde::Serialize;

/// One named pass/fail comparison of a measured value against a threshold.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    pub fn above(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.into(),
            value,
            threshold,
            pass: value > threshold,
        }
    }

    /// Pass/fail flag reported as `0` (pass) or `1` (fail) against threshold `0`.
    pub fn flag(name: &str, ok: bool) -> Check {
        Check {
            name: name.into(),
            value: if ok { 0.0 } else { 1.0 },
            threshold: 0.0,
            pass: ok,
        }
    }
}
