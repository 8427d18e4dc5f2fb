use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bounded shaping function applied to each seminorm level in the sum-form
/// metric. Every variant satisfies `φ(0) = 0`, is strictly increasing,
/// subadditive and bounded by 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phi {
    /// `t / (1 + t)`
    #[default]
    Rational,
    /// `(2/π)·atan(t)`
    Arctan,
}

impl Phi {
    pub fn eval(self, t: f64) -> f64 {
        match self {
            Phi::Rational => {
                if t.is_infinite() {
                    1.0
                } else {
                    t / (1.0 + t)
                }
            }
            Phi::Arctan => std::f64::consts::FRAC_2_PI * t.atan(),
        }
    }

    /// Inverse on `[0, 1)`; `+∞` for `y ≥ 1`.
    pub fn inverse(self, y: f64) -> f64 {
        if y >= 1.0 {
            return f64::INFINITY;
        }
        if y <= 0.0 {
            return 0.0;
        }
        match self {
            Phi::Rational => y / (1.0 - y),
            Phi::Arctan => (y * std::f64::consts::FRAC_PI_2).tan(),
        }
    }

    /// `φ'(0)`, the small-radius slope that governs strictness limits.
    pub fn slope_at_zero(self) -> f64 {
        match self {
            Phi::Rational => 1.0,
            Phi::Arctan => std::f64::consts::FRAC_2_PI,
        }
    }

    /// Checks the shaping-function axioms on a sample grid.
    pub fn check_axioms(self, grid: &[f64]) -> Result<()> {
        if self.eval(0.0) != 0.0 {
            return Err(Error::InvalidParameter("φ(0) ≠ 0".into()));
        }
        let mut pts: Vec<f64> = grid.iter().copied().filter(|t| *t >= 0.0).collect();
        pts.sort_by(|a, b| a.total_cmp(b));
        for w in pts.windows(2) {
            if w[1] > w[0] && self.eval(w[1]) <= self.eval(w[0]) && self.eval(w[0]) < 1.0 {
                return Err(Error::InvalidParameter(format!("φ not increasing at {}", w[0])));
            }
        }
        for &a in &pts {
            if self.eval(a) > 1.0 {
                return Err(Error::InvalidParameter(format!("φ({a}) > 1")));
            }
            for &b in &pts {
                if self.eval(a + b) > self.eval(a) + self.eval(b) + 1e-15 {
                    return Err(Error::InvalidParameter(format!("φ not subadditive at ({a}, {b})")));
                }
            }
        }
        Ok(())
    }
}
