use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `f^{(order)}(point) = value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetCondition {
    pub point: f64,
    pub order: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetOptions {
    /// Shrink each bump until `‖v_n‖_{C^k} < 2^{-n}` for `k < n`.
    pub smallness: bool,
    /// Smoothness of the plateau cutoff (`C^P` across its edges).
    pub plateau_smoothness: Option<usize>,
}

impl Default for JetOptions {
    fn default() -> Self {
        Self { smallness: false, plateau_smoothness: None }
    }
}

/// One bump `value (t − p)^n / n! · χ((t − p) / ρ)`, with `χ = 1` on
/// `[-1/2, 1/2]` and `0` outside `(-1, 1)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetTerm {
    pub center: f64,
    pub radius: f64,
    pub order: usize,
    pub value: f64,
}

/// A smooth (to the plateau order) function on `[0,1]` built from bumps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetFunction {
    pub terms: Vec<JetTerm>,
    pub smoothness: usize,
    /// Monomial coefficients of the smoothstep `S` with `χ(x) = 1 − S(2|x| − 1)`.
    step: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

/// `S(y) = y^{P+1} Σ_{k≤P} C(P+k, k) (1−y)^k` as monomial coefficients.
fn smoothstep(p: usize) -> Vec<f64> {
    let mut coeffs = vec![0.0; 2 * p + 2];
    for k in 0..=p {
        let c = binomial(p + k, k);
        for (m, slot) in (0..=k).zip(p + 1..) {
            let term = c * binomial(k, m) * if m % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[slot] += term;
        }
    }
    coeffs
}

fn poly_derivative_at(coeffs: &[f64], order: usize, y: f64) -> f64 {
    let mut acc = 0.0;
    for (k, &c) in coeffs.iter().enumerate().rev() {
        if k < order {
            break;
        }
        let falling = (0..order).fold(1.0, |a, i| a * (k - i) as f64);
        acc += c * falling * y.powi((k - order) as i32);
    }
    acc
}

impl JetFunction {
    fn cutoff(&self, x: f64, order: usize) -> f64 {
        let a = x.abs();
        if a >= 1.0 {
            return 0.0;
        }
        if a <= 0.5 {
            return if order == 0 { 1.0 } else { 0.0 };
        }
        let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
        let d = poly_derivative_at(&self.step, order, 2.0 * a - 1.0) * 2f64.powi(order as i32) * sign;
        if order == 0 {
            1.0 - d
        } else {
            -d
        }
    }

    fn term_derivative(&self, term: &JetTerm, t: f64, order: usize) -> f64 {
        let x = t - term.center;
        if x.abs() >= term.radius {
            return 0.0;
        }
        let n = term.order;
        // Leibniz rule on monomial × rescaled cutoff.
        let mut acc = 0.0;
        for i in 0..=order {
            let j = order - i;
            if j > n {
                continue;
            }
            let mono = x.powi((n - j) as i32) / factorial(n - j);
            let cut = self.cutoff(x / term.radius, i) / term.radius.powi(i as i32);
            acc += binomial(order, i) * mono * cut;
        }
        term.value * acc
    }

    pub fn derivative(&self, t: f64, order: usize) -> f64 {
        self.terms.iter().map(|term| self.term_derivative(term, t, order)).sum()
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.derivative(t, 0)
    }

    /// `max_{j≤k} sup_{[0,1]} |v^{(j)}|` of a single term, on a fine grid
    /// over its support.
    pub fn term_ck_norm(&self, index: usize, k: usize) -> f64 {
        let term = &self.terms[index];
        let (lo, hi) = ((term.center - term.radius).max(0.0), (term.center + term.radius).min(1.0));
        if hi <= lo {
            return 0.0;
        }
        let steps = 2000;
        let mut best = 0.0f64;
        for j in 0..=k {
            for s in 0..=steps {
                let t = lo + (hi - lo) * s as f64 / steps as f64;
                best = best.max(self.term_derivative(term, t, j).abs());
            }
        }
        best
    }

    /// Supports `[p − ρ, p + ρ]` of all terms.
    pub fn supports(&self) -> Vec<(f64, f64)> {
        self.terms.iter().map(|t| (t.center - t.radius, t.center + t.radius)).collect()
    }
}

/// A function with prescribed derivatives at distinct points, as a sum of
/// disjointly supported bumps of radius `2^{-n-2}` around the order-`n`
/// condition.
pub fn prescribed_jet(conditions: &[JetCondition], opts: &JetOptions) -> Result<JetFunction> {
    for (i, c) in conditions.iter().enumerate() {
        if !(c.point.is_finite() && c.value.is_finite()) || !(0.0..=1.0).contains(&c.point) {
            return Err(Error::InvalidParameter(format!("condition {i} must have a finite point in [0,1]")));
        }
        for (j, d) in conditions.iter().enumerate().skip(i + 1) {
            if c.point == d.point {
                return Err(Error::InvalidParameter(format!("conditions {i} and {j} share the point {}", c.point)));
            }
        }
    }
    let max_order = conditions.iter().map(|c| c.order).max().unwrap_or(0);
    let smoothness = opts.plateau_smoothness.unwrap_or(max_order + 2);
    let mut f = JetFunction {
        terms: conditions
            .iter()
            .map(|c| JetTerm { center: c.point, radius: 0.5f64.powi(c.order as i32 + 2), order: c.order, value: c.value })
            .collect(),
        smoothness,
        step: smoothstep(smoothness),
    };
    for i in 0..f.terms.len() {
        for j in i + 1..f.terms.len() {
            let (a, b) = (&f.terms[i], &f.terms[j]);
            if (a.center - b.center).abs() < a.radius + b.radius {
                return Err(Error::OverlappingSupports { first: i, second: j });
            }
        }
    }
    if opts.smallness {
        for i in 0..f.terms.len() {
            let n = f.terms[i].order;
            if n == 0 {
                continue;
            }
            let bound = 0.5f64.powi(n as i32);
            let mut guard = 0;
            while f.term_ck_norm(i, n - 1) >= bound {
                f.terms[i].radius *= 0.5;
                guard += 1;
                if guard > 200 {
                    return Err(Error::Evaluation(format!("bump {i} cannot be made small")));
                }
            }
        }
    }
    Ok(f)
}
