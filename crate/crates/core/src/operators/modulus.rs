use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::certificate::TamenessCertificate;
use super::trb::{diagonal_norms, metric_from_norms, metric_levels};
use super::{GradedOperator, NormOptions};
use crate::error::{Error, Result};
use crate::rng::{self, stream};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusOptions {
    pub seed: u64,
    /// Operators drawn from the metric ball.
    pub operators: usize,
    /// Source vectors tested against each operator.
    pub vectors_per_operator: usize,
    pub norm: NormOptions,
}

impl Default for ModulusOptions {
    fn default() -> Self {
        Self { seed: 0, operators: 100, vectors_per_operator: 100, norm: NormOptions::default() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub n: usize,
    pub r: usize,
    pub b: usize,
    pub delta: f64,
    pub samples: usize,
    pub violations: usize,
    /// Largest `d(G v, 0)` seen, to compare with the radius `2^{-n}`.
    pub max_image_distance: f64,
}

/// Samples operators `G` with `d_{r,b}(G, 0) < δ = 2^{-n} φ(1) / 2` and
/// vectors `v ∈ B_{2^{-n-r}}`, counting images `G v` outside `B_{2^{-n}}`.
///
/// Operator directions are random matrices plus `base`; each is scaled along
/// its ray to a random fraction of `δ`, using homogeneity of the dyadic norms.
pub fn eval_modulus(base: &GradedOperator, cert: &TamenessCertificate, n: usize, opts: &ModulusOptions) -> Result<ModulusReport> {
    let (src, tgt) = (base.source().clone(), base.target().clone());
    let r = cert.r;
    let levels = metric_levels(base, r, cert.b)?;
    if !levels.contains(&n) {
        return Err(Error::LevelOutOfRange { level: n, top: *levels.last().unwrap() });
    }
    let phi = tgt.phi();
    let delta = 0.5f64.powi(n as i32) * phi.eval(1.0) / 2.0;
    let radius = 0.5f64.powi(n as i32);
    let inner = 0.5f64.powi((n + r) as i32);
    let mut rg = rng::stream_rng(opts.seed, stream::MODULUS);
    let mut report = ModulusReport { n, r, b: cert.b, delta, samples: 0, violations: 0, max_image_distance: 0.0 };
    for k in 0..opts.operators {
        let dir = if k == 0 {
            base.clone()
        } else {
            let cols = DMatrix::from_fn(tgt.dim(), src.dim(), |_, c| rng::gaussian(&mut rg) / (1 + c) as f64 * if k % 2 == 0 { 1.0 } else { (1 + c) as f64 });
            GradedOperator::new(cols, src.clone(), tgt.clone())?
        };
        let norms = diagonal_norms(&dir, r, &levels, &opts.norm)?;
        if norms.iter().all(|l| *l == 0.0) {
            continue;
        }
        let fraction = if k % 2 == 0 { 1.0 - 1e-9 } else { rg.gen_range(0.0..1.0) };
        let lambda = scale_to(&levels, &norms, phi, fraction * delta);
        let g = dir.scaled(lambda);
        for i in 0..opts.vectors_per_operator {
            let u = rng::mixed_decay(&mut rg, src.dim(), i % 4);
            let p = src.profile(&u);
            let s = src.ray_radius(&u, &p, inner);
            let t = if i % 2 == 0 { 1.0 } else { rg.gen_range(0.0..1.0) };
            let v: DVector<f64> = if s.is_infinite() { u * 1e6 } else { u * (s * t) };
            let d = tgt.norm(&g.apply(&v));
            report.samples += 1;
            report.max_image_distance = report.max_image_distance.max(d);
            if d >= radius {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

/// Largest `λ` (from below) with `Σ 2^{-M} φ(λ L_M) ≤ target`.
fn scale_to(levels: &[usize], norms: &[f64], phi: crate::graded_space::Phi, target: f64) -> f64 {
    let f = |l: f64| metric_from_norms(levels, norms, phi, l);
    let mut hi = 1.0;
    while f(hi) < target && hi < 1e300 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::super::{certify_tame, NormVariant};
    use super::*;
    use crate::witnesses::build_trig_model;

    #[test]
    fn delta_formula() {
        let model = build_trig_model("trig", 4, 5, 16).unwrap();
        let d = model.derivative(1).unwrap();
        let c = certify_tame(&d, 1, 0, NormVariant::Hamilton, &NormOptions::default()).unwrap();
        let opts = ModulusOptions { operators: 2, vectors_per_operator: 4, ..Default::default() };
        let rep = eval_modulus(&d, &c, 3, &opts).unwrap();
        assert_eq!(rep.delta, 0.5f64.powi(5));
    }

    #[test]
    fn small_sample_has_no_violations() {
        let model = build_trig_model("trig", 6, 5, 24).unwrap();
        let d = model.derivative(1).unwrap();
        let c = certify_tame(&d, 1, 0, NormVariant::Hamilton, &NormOptions::default()).unwrap();
        let opts = ModulusOptions { operators: 20, vectors_per_operator: 20, ..Default::default() };
        let rep = eval_modulus(&d, &c, 2, &opts).unwrap();
        assert_eq!(rep.samples, 400);
        assert_eq!(rep.violations, 0, "{rep:?}");
    }
}
