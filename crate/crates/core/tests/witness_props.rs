use nalgebra::DVector;
use proptest::prelude::*;
use rand::Rng;
use tame_core::rng::{gaussian_vector, stream_rng};
use tame_core::witnesses::{
    build_euclidean_sequence_model, build_sequence_model, build_trig_model, dominated_extension, prescribed_jet,
    polynomial_weights, product_weights, unbounded_functional, ExtensionOptions, JetCondition, JetOptions, Sublinear,
};

fn conditions() -> impl Strategy<Value = Vec<JetCondition>> {
    prop::collection::vec((2usize..6, -5.0f64..5.0), 1..5).prop_map(|raw| {
        raw.into_iter()
            .enumerate()
            .map(|(i, (order, value))| JetCondition { point: 0.1 + 0.25 * i as f64, order, value })
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jets_hit_their_conditions_with_disjoint_supports(conds in conditions(), smallness in any::<bool>()) {
        let f = prescribed_jet(&conds, &JetOptions { smallness, plateau_smoothness: None }).unwrap();
        for c in &conds {
            let got = f.derivative(c.point, c.order);
            prop_assert!((got - c.value).abs() <= 1e-6 * c.value.abs().max(1.0), "{got} vs {}", c.value);
        }
        let supports = f.supports();
        for i in 0..supports.len() {
            for j in i + 1..supports.len() {
                let (a, b) = (supports[i], supports[j]);
                prop_assert!(a.1 <= b.0 || b.1 <= a.0, "supports {i} and {j} meet");
            }
        }
    }

    #[test]
    fn extensions_stay_below_the_sublinear_bound(seed in 0u64..10_000, euclidean in any::<bool>(), level in 0usize..3, frac in -1.0f64..1.0) {
        let weights = polynomial_weights(4, 2);
        let model = if euclidean {
            build_euclidean_sequence_model("e", 4, weights).unwrap()
        } else {
            build_sequence_model("s", 4, weights).unwrap()
        };
        let metric = model.metric();
        let mut rng = stream_rng(seed, 950);
        let w = model.vector(gaussian_vector(&mut rng, 4)).unwrap();
        let p = Sublinear::scaled(level, 1.5);
        let c = frac * p.eval(metric, &w.coords);
        let ext = dominated_extension(metric, &w, c, &p, &ExtensionOptions { seed, samples: 1000 }).unwrap();
        let f = DVector::from_column_slice(&ext.functional);
        prop_assert!((f.dot(&w.coords) - c).abs() <= 1e-9 * c.abs().max(1.0));
        let mut probes: Vec<DVector<f64>> = (0..4)
            .flat_map(|k| {
                let mut e = DVector::zeros(4);
                e[k] = 1.0;
                [e.clone(), -e]
            })
            .collect();
        probes.extend((0..10_000).map(|_| gaussian_vector(&mut rng, 4) * 10f64.powf(rng.gen_range(-2.0..2.0))));
        for v in probes {
            let pv = p.eval(metric, &v);
            prop_assert!(f.dot(&v) <= pv + 1e-9 * pv.max(1.0), "f(v) = {} > p(v) = {pv}", f.dot(&v));
        }
    }
}

#[test]
fn unbounded_functional_partial_sums_are_continuous() {
    for model in [
        build_sequence_model("prod", 10, product_weights(10, 9)).unwrap(),
        build_trig_model("trig", 8, 3, 32).unwrap(),
    ] {
        let u = unbounded_functional(&model, 0.1, 3, 3).unwrap();
        for rung in &u.ladder {
            assert!(rung.continuity_norm.is_finite(), "{}: rung {}", model.id(), rung.terms);
        }
        for (n, v) in u.vectors.iter().enumerate() {
            assert!(model.metric().norm(&DVector::from_column_slice(v)) < 0.1, "{}: v_{n} outside the ball", model.id());
        }
    }
}
