use super::certificate::TamenessCertificate;
use super::norm::{dyadic_directions, dyadic_table_with};
use super::{GradedOperator, NormOptions};
use crate::error::{Error, Result};
use crate::graded_space::Phi;

pub(crate) fn phi_saturating(phi: Phi, t: f64) -> f64 {
    if t.is_infinite() {
        phi.eval(f64::MAX)
    } else {
        phi.eval(t)
    }
}

/// Levels `M = b..=top` entering the metric, with `top` limited by both
/// dyadic ranges.
pub(crate) fn metric_levels(a: &GradedOperator, r: usize, b: usize) -> Result<Vec<usize>> {
    let st = a.source().dyadic_top();
    if r > st {
        return Err(Error::InvalidParameter(format!("order {r} exceeds source top level {st}")));
    }
    let top = (st - r).min(a.target().dyadic_top());
    if b > top {
        return Err(Error::InvalidParameter(format!("basis {b} exceeds truncation {top}")));
    }
    Ok((b..=top).collect())
}

/// Lower dyadic norms `‖D‖_{M+r,M}` for `M` in `levels`.
pub(crate) fn diagonal_norms(d: &GradedOperator, r: usize, levels: &[usize], opts: &NormOptions) -> Result<Vec<f64>> {
    let src: Vec<usize> = levels.iter().map(|m| m + r).collect();
    let dirs = dyadic_directions(d.source().dim(), opts)?;
    let t = dyadic_table_with(d, &src, levels, dirs)?;
    Ok((0..levels.len()).map(|i| t.lower[i][i]).collect())
}

pub(crate) fn metric_from_norms(levels: &[usize], norms: &[f64], phi: Phi, lambda: f64) -> f64 {
    levels
        .iter()
        .zip(norms)
        .map(|(&m, &l)| 0.5f64.powi(m as i32) * if l == 0.0 { 0.0 } else { phi_saturating(phi, lambda * l) })
        .sum()
}

fn covers(c: &TamenessCertificate, op: &GradedOperator, r: usize, b: usize) -> bool {
    c.r <= r && c.b <= b && &c.source_model == op.source().id() && &c.target_model == op.target().id()
}

/// `Σ_{M=b}^{N} 2^{-M} φ(‖A − B‖_{M+r,M})` over the truncation, using the
/// lower dyadic norms from the direction set fixed by `opts`. The lower norm
/// is a seminorm in the operator, so this is a metric on the truncated space.
pub fn trb_metric(
    a: &GradedOperator,
    cert_a: &TamenessCertificate,
    b_op: &GradedOperator,
    cert_b: &TamenessCertificate,
    r: usize,
    b: usize,
    opts: &NormOptions,
) -> Result<f64> {
    if !covers(cert_a, a, r, b) {
        return Err(Error::Uncertified { r: cert_a.r, b: cert_a.b });
    }
    if !covers(cert_b, b_op, r, b) {
        return Err(Error::Uncertified { r: cert_b.r, b: cert_b.b });
    }
    let diff = a.sub(b_op)?;
    let levels = metric_levels(&diff, r, b)?;
    let norms = diagonal_norms(&diff, r, &levels, opts)?;
    Ok(metric_from_norms(&levels, &norms, diff.target().phi(), 1.0))
}
