use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::norm::{self, dyadic_table_with, hamilton_ratio};
use super::{Backend, GradedOperator, NormOptions, NormVariant};
use crate::error::{Error, Result};
use crate::graded_space::ModelId;
use crate::rng::{self, stream};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateOrigin {
    Direct,
    Normalized,
    Composed,
}

/// Constants `K_b..=K_N` with `‖A‖_{n+r,n} ≤ K_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TamenessCertificate {
    pub r: usize,
    pub b: usize,
    pub constants: Vec<f64>,
    pub variant: NormVariant,
    pub truncation: usize,
    pub source_top: usize,
    pub target_top: usize,
    pub backend: Backend,
    pub origin: CertificateOrigin,
    pub seed: u64,
    pub source_model: ModelId,
    pub target_model: ModelId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecheckReport {
    pub passed: bool,
    /// Largest observed `‖A‖_{n+r,n}` estimate minus `K_n`, and its level.
    pub worst_excess: f64,
    pub worst_level: usize,
    pub samples: usize,
}

fn tops(a: &GradedOperator, variant: NormVariant) -> (usize, usize) {
    match variant {
        NormVariant::Hamilton => (a.source().n_max(), a.target().n_max()),
        NormVariant::Dyadic => (a.source().dyadic_top(), a.target().dyadic_top()),
    }
}

impl TamenessCertificate {
    pub fn levels(&self) -> std::ops::RangeInclusive<usize> {
        self.b..=self.truncation
    }

    pub fn constant(&self, n: usize) -> Option<f64> {
        if n < self.b || n > self.truncation {
            None
        } else {
            self.constants.get(n - self.b).copied()
        }
    }

    pub fn tolerance(k: f64) -> f64 {
        1e-9 * k.max(1.0)
    }

    /// Re-checks `‖A‖_{n+r,n} ≤ K_n` on fresh random samples drawn from the
    /// recheck stream only.
    pub fn recheck(&self, a: &GradedOperator, samples: usize, seed: u64) -> Result<RecheckReport> {
        if a.source().id() != &self.source_model {
            return Err(Error::ModelMismatch { left: self.source_model.0.clone(), right: a.source().id().0.clone() });
        }
        if a.target().id() != &self.target_model {
            return Err(Error::ModelMismatch { left: self.target_model.0.clone(), right: a.target().id().0.clone() });
        }
        let dim = a.source().dim();
        let mut r = rng::stream_rng(seed, stream::RECHECK);
        let vectors: Vec<DVector<f64>> = (0..samples)
            .map(|i| {
                let v = rng::mixed_decay(&mut r, dim, i % 4);
                let nv = v.norm().max(f64::MIN_POSITIVE);
                v / nv
            })
            .collect();
        let levels: Vec<usize> = self.levels().collect();
        let observed: Vec<f64> = match self.variant {
            NormVariant::Hamilton => levels
                .iter()
                .map(|&n| vectors.iter().map(|v| hamilton_ratio(a, v, n + self.r, n)).fold(0.0, f64::max))
                .collect(),
            NormVariant::Dyadic => {
                let src: Vec<usize> = levels.iter().map(|n| n + self.r).collect();
                let t = dyadic_table_with(a, &src, &levels, vectors)?;
                (0..levels.len()).map(|i| t.lower[i][i]).collect()
            }
        };
        let mut report = RecheckReport { passed: true, worst_excess: f64::NEG_INFINITY, worst_level: self.b, samples };
        for (i, &n) in levels.iter().enumerate() {
            let k = self.constants[i];
            let excess = observed[i] - k;
            if excess > report.worst_excess {
                report.worst_excess = excess;
                report.worst_level = n;
            }
            if excess > Self::tolerance(k) {
                report.passed = false;
            }
        }
        Ok(report)
    }
}

/// Certifies `A` as `r`-tame with basis `b` up to the truncation
/// `N = min(source_top − r, target_top)`.
pub fn certify_tame(a: &GradedOperator, r: usize, b: usize, variant: NormVariant, opts: &NormOptions) -> Result<TamenessCertificate> {
    let (st, tt) = tops(a, variant);
    if r > st {
        return Err(Error::InvalidParameter(format!("order {r} exceeds source top level {st}")));
    }
    let top = (st - r).min(tt);
    if b > top {
        return Err(Error::InvalidParameter(format!("basis {b} exceeds truncation {top}")));
    }
    let levels: Vec<usize> = (b..=top).collect();
    let (values, backend) = match variant {
        NormVariant::Hamilton => {
            let pairs: Vec<(usize, usize)> = levels.iter().map(|&n| (n + r, n)).collect();
            let norms = norm::hamilton(a, &pairs, opts)?;
            let backend = norms.iter().fold(norms[0].backend, |acc, x| acc.join(x.backend));
            (norms.iter().map(|x| x.bound()).collect::<Vec<_>>(), backend)
        }
        NormVariant::Dyadic => {
            let src: Vec<usize> = levels.iter().map(|n| n + r).collect();
            let t = norm::dyadic_table(a, &src, &levels, opts)?;
            let exact = a.source().dim() == 1 && a.target().dim() == 1;
            let backend = if exact { Backend::ExactWeightedMax } else { Backend::Sampled };
            ((0..levels.len()).map(|i| t.upper[i][i]).collect(), backend)
        }
    };
    for (&n, k) in levels.iter().zip(&values) {
        if !k.is_finite() {
            return Err(Error::CertificationFailed {
                level: n,
                reason: format!("‖A‖_{{{},{}}} is unbounded", n + r, n),
            });
        }
    }
    let cert = TamenessCertificate {
        r,
        b,
        constants: values,
        variant,
        truncation: top,
        source_top: st,
        target_top: tt,
        backend,
        origin: CertificateOrigin::Direct,
        seed: opts.seed,
        source_model: a.source().id().clone(),
        target_model: a.target().id().clone(),
    };
    let check = cert.recheck(a, opts.samples.max(16), opts.seed.wrapping_add(1))?;
    if !check.passed {
        return Err(Error::CertificationFailed {
            level: check.worst_level,
            reason: format!("re-check exceeded the constant by {:e}", check.worst_excess),
        });
    }
    Ok(cert)
}

/// Rewrites an `(r, b)` certificate as an `(r + b, 0)` certificate.
pub fn normalize_basis(c: &TamenessCertificate) -> TamenessCertificate {
    if c.b == 0 {
        return c.clone();
    }
    let order = c.r + c.b;
    let top = c.source_top.saturating_sub(order).min(c.target_top).min(c.truncation);
    let shrink = match c.variant {
        NormVariant::Hamilton => 1.0,
        NormVariant::Dyadic => 0.5f64.powi(c.b as i32),
    };
    let k = |n: usize| c.constant(n).expect("level inside certificate");
    let constants = (0..=top).map(|n| shrink * if n < c.b { k(c.b) } else { k(n) }).collect();
    TamenessCertificate {
        r: order,
        b: 0,
        constants,
        truncation: top,
        origin: CertificateOrigin::Normalized,
        ..c.clone()
    }
}

/// Certificate for `B ∘ A` from certificates of `A` and `B`:
/// `K_n = K^B_n · K^A_{n + r_B}` after normalizing both to basis 0.
pub fn compose_certified(
    a: &GradedOperator,
    cert_a: &TamenessCertificate,
    b: &GradedOperator,
    cert_b: &TamenessCertificate,
) -> Result<(GradedOperator, TamenessCertificate)> {
    if cert_a.variant != cert_b.variant {
        return Err(Error::InvalidParameter("certificates use different norm variants".into()));
    }
    if cert_a.source_model != *a.source().id() || cert_a.target_model != *a.target().id() {
        return Err(Error::ModelMismatch { left: cert_a.source_model.0.clone(), right: a.source().id().0.clone() });
    }
    if cert_b.source_model != *b.source().id() || cert_b.target_model != *b.target().id() {
        return Err(Error::ModelMismatch { left: cert_b.source_model.0.clone(), right: b.source().id().0.clone() });
    }
    let product = a.then(b)?;
    let (na, nb) = (normalize_basis(cert_a), normalize_basis(cert_b));
    if na.truncation < nb.r {
        return Err(Error::InvalidParameter(format!(
            "truncation {} of the inner certificate is below the outer order {}",
            na.truncation, nb.r
        )));
    }
    let top = nb.truncation.min(na.truncation - nb.r);
    let constants = (0..=top)
        .map(|n| nb.constant(n).unwrap() * na.constant(n + nb.r).unwrap())
        .collect();
    let cert = TamenessCertificate {
        r: na.r + nb.r,
        b: 0,
        constants,
        variant: na.variant,
        truncation: top,
        source_top: na.source_top,
        target_top: nb.target_top,
        backend: na.backend.join(nb.backend),
        origin: CertificateOrigin::Composed,
        seed: na.seed,
        source_model: na.source_model.clone(),
        target_model: nb.target_model.clone(),
    };
    Ok((product, cert))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witnesses::{build_sequence_model, build_trig_model, polynomial_weights};
    use proptest::prelude::*;

    #[test]
    fn derivative_is_one_tame() {
        let model = build_trig_model("trig", 16, 4, 64).unwrap();
        let d = model.derivative(1).unwrap();
        let c = certify_tame(&d, 1, 0, NormVariant::Hamilton, &NormOptions::default()).unwrap();
        assert_eq!(c.truncation, 3);
        assert!(c.constants.iter().all(|k| (*k - 1.0).abs() <= 1e-9), "{:?}", c.constants);
    }

    #[test]
    fn diagonal_constants_are_weight_ratios() {
        let model = build_sequence_model("seq", 4, polynomial_weights(4, 2)).unwrap();
        let diag = nalgebra::DMatrix::from_diagonal(&DVector::from_fn(4, |k, _| (k + 1) as f64));
        let a = GradedOperator::new(diag, model.metric().clone(), model.metric().clone()).unwrap();
        let c0 = certify_tame(&a, 0, 0, NormVariant::Hamilton, &NormOptions::default()).unwrap();
        assert_eq!(c0.constants, vec![4.0, 4.0, 4.0]);
        let c1 = certify_tame(&a, 1, 0, NormVariant::Hamilton, &NormOptions::default()).unwrap();
        assert_eq!(c1.constants, vec![1.0, 1.0]);
    }

    #[test]
    fn zero_operator_certificate() {
        let model = build_trig_model("trig", 4, 3, 16).unwrap();
        let z = GradedOperator::zero(model.metric().clone(), model.metric().clone());
        for variant in [NormVariant::Hamilton, NormVariant::Dyadic] {
            let c = certify_tame(&z, 0, 0, variant, &NormOptions::default()).unwrap();
            assert!(c.constants.iter().all(|k| *k == 0.0));
        }
    }

    #[test]
    fn unbounded_level_is_named() {
        let model = build_sequence_model("prod", 3, crate::witnesses::product_weights(3, 2)).unwrap();
        let id = model.identity();
        // ‖e_2‖_0 = 0 while the shift moves e_2 onto e_0, seen at level 0.
        let shift = GradedOperator::new(
            nalgebra::DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]),
            id.source().clone(),
            id.target().clone(),
        )
        .unwrap();
        match certify_tame(&shift, 0, 0, NormVariant::Hamilton, &NormOptions::default()) {
            Err(Error::CertificationFailed { level, .. }) => assert_eq!(level, 0),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn normalization_examples() {
        let model = build_trig_model("trig", 12, 6, 48).unwrap();
        let d = model.derivative(1).unwrap();
        let opts = NormOptions::default();
        let c = certify_tame(&d, 1, 2, NormVariant::Hamilton, &opts).unwrap();
        let n = normalize_basis(&c);
        assert_eq!((n.r, n.b), (3, 0));
        assert!(n.recheck(&d, 64, 9).unwrap().passed);
        let direct = certify_tame(&d, 3, 0, NormVariant::Hamilton, &opts).unwrap();
        assert_eq!(direct.truncation, n.truncation);
        for (p, q) in n.constants.iter().zip(&direct.constants) {
            assert!((p - q).abs() <= 1e-9, "{p} vs {q}");
        }
        let c0 = certify_tame(&d, 1, 0, NormVariant::Hamilton, &opts).unwrap();
        assert_eq!(normalize_basis(&c0), c0);
    }

    #[test]
    fn composition_of_derivatives_has_order_two() {
        let model = build_trig_model("trig", 12, 5, 48).unwrap();
        let d = model.derivative(1).unwrap();
        let opts = NormOptions::default();
        let c = certify_tame(&d, 1, 0, NormVariant::Hamilton, &opts).unwrap();
        let (dd, cc) = compose_certified(&d, &c, &d, &c).unwrap();
        assert_eq!(cc.r, 2);
        assert!(cc.recheck(&dd, 64, 3).unwrap().passed);
        let id = model.identity();
        let ci = certify_tame(&id, 0, 0, NormVariant::Hamilton, &opts).unwrap();
        let (_, c2) = compose_certified(&d, &c, &id, &ci).unwrap();
        assert_eq!(c2.constants, c.constants);
        assert_eq!(c2.r, c.r);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn certificates_recheck_on_fresh_samples(seed in 0u64..1000, dyadic in any::<bool>()) {
            let model = build_sequence_model("seq", 4, polynomial_weights(4, 3)).unwrap();
            let mut r = rng::stream_rng(seed, 0);
            let a = GradedOperator::random(model.metric().clone(), model.metric().clone(), 1.0, &mut r);
            let variant = if dyadic { NormVariant::Dyadic } else { NormVariant::Hamilton };
            let opts = NormOptions { directions: 16, samples: 32, ..NormOptions::with_seed(seed) };
            let c = certify_tame(&a, 1, 0, variant, &opts).unwrap();
            prop_assert!(c.recheck(&a, 200, seed ^ 0xabc).unwrap().passed);
        }

        #[test]
        fn composed_constants_dominate_direct(seed in 0u64..1000) {
            let model = build_sequence_model("seq", 4, polynomial_weights(4, 3)).unwrap();
            let mut r = rng::stream_rng(seed, 0);
            let a = GradedOperator::random(model.metric().clone(), model.metric().clone(), 1.0, &mut r);
            let b = GradedOperator::random(model.metric().clone(), model.metric().clone(), 1.0, &mut r);
            let opts = NormOptions::with_seed(seed);
            let ca = certify_tame(&a, 1, 0, NormVariant::Hamilton, &opts).unwrap();
            let cb = certify_tame(&b, 1, 0, NormVariant::Hamilton, &opts).unwrap();
            let (ba, cba) = compose_certified(&a, &ca, &b, &cb).unwrap();
            let direct = certify_tame(&ba, 2, 0, NormVariant::Hamilton, &opts).unwrap();
            prop_assert!(cba.r <= ca.r + cb.r);
            for n in direct.levels() {
                let pred = cba.constant(n).unwrap();
                let k = direct.constant(n).unwrap();
                prop_assert!(pred >= k * (1.0 - 1e-12), "level {}: {} < {}", n, pred, k);
            }
        }
    }
}
