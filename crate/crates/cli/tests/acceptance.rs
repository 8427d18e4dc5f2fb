//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use tame_core::graded_space::{log_grid, FrechetMetric, MetricMode};
use tame_core::operators::{
    certify_tame, compose_certified, dyadic_table, eval_modulus, hausdorff_witness, kj_membership, nontameness_scan,
    GradedOperator, KSetSpec, ModulusOptions, NormOptions, NormVariant, Thresholds, Verdict,
};
use tame_core::palettes::{
    absorption_index, builtin_palette, AxiomOptions, ClosureFlags, ConvexBody, PaletteFamily, PaletteName, PaletteParams,
};
use tame_core::rng::{gaussian, gaussian_vector, stream_rng};
use tame_core::witnesses::{
    build_euclidean_sequence_model, build_normed_model, build_scalar_model, build_scalar_sqrt_model, build_sequence_model,
    build_trig_model, eval_discontinuity_gadget, polynomial_weights, step_full_witness, ModelSpace,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn builtin_models() -> Vec<ModelSpace> {
    vec![
        build_trig_model("trig", 4, 3, 32).unwrap(),
        build_sequence_model("seq", 4, polynomial_weights(4, 3)).unwrap(),
        build_euclidean_sequence_model("seq_l2", 4, polynomial_weights(4, 3)).unwrap(),
        build_scalar_model("scalar", 3).unwrap(),
        build_scalar_sqrt_model("sqrt").unwrap(),
        build_normed_model("l2", 3, true).unwrap(),
        build_normed_model("linf", 3, false).unwrap(),
    ]
}

fn derivative_tameness() -> Outcome {
    let start = Instant::now();
    let model = build_trig_model("trig", 64, 8, 256).unwrap();
    let d = model.derivative(1).unwrap();
    let cert = certify_tame(&d, 1, 0, NormVariant::Hamilton, &NormOptions::with_seed(1)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    let worst = cert.constants.iter().copied().fold(0.0f64, f64::max);
    ensure(cert.constants.len() == cert.truncation + 1, || "missing levels".into())?;
    ensure(worst <= 1.0 + 1e-9, || format!("max K_n = {worst}"))?;
    ensure(elapsed < 5.0, || format!("took {elapsed:.2}s"))?;
    Ok(format!("max K_n = {worst} over n ≤ {}, {elapsed:.2}s", cert.truncation))
}

fn derivative_scan() -> Outcome {
    let start = Instant::now();
    let ladder = [8, 16, 32, 64];
    let ev = nontameness_scan(
        |n| build_trig_model(format!("t{n}"), n, 1, 256.max(4 * n))?.derivative(1),
        0,
        0,
        &ladder,
        &NormOptions::with_seed(2),
    )
    .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_secs_f64();
    for p in &ev.points {
        ensure(p.constant >= p.truncation as f64, || format!("K_0 = {} < N = {}", p.constant, p.truncation))?;
    }
    ensure(ev.verdict == Verdict::DivergingFit, || format!("verdict {:?}, slope {}", ev.verdict, ev.slope))?;
    ensure(elapsed < 10.0, || format!("took {elapsed:.2}s"))?;
    let ks: Vec<String> = ev.points.iter().map(|p| format!("{:.1}", p.constant)).collect();
    Ok(format!("K_0 = [{}], slope {:.2}, {elapsed:.2}s", ks.join(", "), ev.slope))
}

fn gradus() -> Outcome {
    let mut checked = 0usize;
    for model in builtin_models() {
        let metric = model.metric().clone();
        let levels: Vec<usize> = (0..=metric.dyadic_top().min(3)).collect();
        let top = *levels.last().unwrap();
        for k in 0..100u64 {
            let mut rng = stream_rng(k, 100);
            let a = GradedOperator::random(metric.clone(), metric.clone(), 1.0, &mut rng);
            let opts = NormOptions { directions: 8, ..NormOptions::with_seed(k) };
            let t = dyadic_table(&a, &levels, &levels, &opts).map_err(|e| e.to_string())?;
            for m in 0..=top {
                for n in 0..=top {
                    for table in [&t.lower, &t.upper] {
                        if n < top {
                            let (lo, hi) = (table[m][n], table[m][n + 1]);
                            ensure(hi >= 2.0 * lo * (1.0 - 1e-9), || {
                                format!("{}: ‖A‖_{{{m},{}}} = {hi} < 2·{lo}", model.id(), n + 1)
                            })?;
                        }
                        if m < top {
                            let (lo, hi) = (table[m][n], table[m + 1][n]);
                            ensure(hi <= 0.5 * lo * (1.0 + 1e-9), || {
                                format!("{}: ‖A‖_{{{},{n}}} = {hi} > {lo}/2", model.id(), m + 1)
                            })?;
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (m, n) cells on 7 models × 100 operators, 0 violations"))
}

/// Direct evaluation of the shaped-sum metric.
fn reference_distance(metric: &FrechetMetric, x: &DVector<f64>) -> f64 {
    match metric.mode() {
        MetricMode::SqrtScalar => x[0].abs().sqrt(),
        MetricMode::SumForm => (0..=metric.n_max())
            .map(|n| {
                let t = metric.seminorm(x, n);
                0.5f64.powi(n as i32) * t / (1.0 + t)
            })
            .sum(),
    }
}

fn scalar_bound() -> Outcome {
    let mut samples = 0usize;
    let mut worst = f64::INFINITY;
    for (mi, model) in builtin_models().iter().enumerate() {
        let metric = model.metric();
        let mut rng = stream_rng(4, mi as u64);
        for _ in 0..10_000 {
            let v = gaussian_vector(&mut rng, model.dim()) * 10f64.powf(rng.gen_range(-6.0..3.0));
            let s = 10.0 * (1.0 - rng.gen::<f64>());
            let lhs = reference_distance(metric, &(&v * s));
            let rhs = s.ceil() * reference_distance(metric, &v);
            ensure(lhs <= rhs + 1e-12, || format!("{}: d(sv) = {lhs} > ⌈s⌉d(v) = {rhs}", model.id()))?;
            let b = metric.scalar_bound_check(&model.vector(v).unwrap(), s).map_err(|e| e.to_string())?;
            ensure(b.holds, || format!("{}: library check failed, margin {}", model.id(), b.margin))?;
            worst = worst.min(rhs - lhs);
            samples += 1;
        }
    }
    Ok(format!("{samples} samples, 0 violations, smallest margin {worst:.3e}"))
}

fn composition() -> Outcome {
    let model = build_trig_model("trig", 16, 5, 64).unwrap();
    let d = model.derivative(1).unwrap();
    let opts = NormOptions::with_seed(5);
    let c = certify_tame(&d, 1, 0, NormVariant::Hamilton, &opts).map_err(|e| e.to_string())?;
    let (dd, cc) = compose_certified(&d, &c, &d, &c).map_err(|e| e.to_string())?;
    ensure(cc.r == 2, || format!("composed order {}", cc.r))?;
    ensure(cc.recheck(&dd, 64, 6).map_err(|e| e.to_string())?.passed, || "composed certificate fails recheck".into())?;
    let direct = certify_tame(&dd, 2, 0, NormVariant::Hamilton, &opts).map_err(|e| e.to_string())?;
    ensure(direct.constants.iter().all(|k| *k <= 1.0 + 1e-9), || format!("∂∘∂ constants {:?}", direct.constants))?;

    let seq = build_sequence_model("seq", 4, polynomial_weights(4, 3)).unwrap();
    let mut pairs = 0;
    for k in 0..50u64 {
        let mut rng = stream_rng(k, 55);
        let a = GradedOperator::random(seq.metric().clone(), seq.metric().clone(), 1.0, &mut rng);
        let b = GradedOperator::random(seq.metric().clone(), seq.metric().clone(), 1.0, &mut rng);
        let o = NormOptions::with_seed(k);
        let ca = certify_tame(&a, 1, 0, NormVariant::Hamilton, &o).map_err(|e| e.to_string())?;
        let cb = certify_tame(&b, 1, 0, NormVariant::Hamilton, &o).map_err(|e| e.to_string())?;
        let (ba, _) = compose_certified(&a, &ca, &b, &cb).map_err(|e| e.to_string())?;
        let direct = certify_tame(&ba, 2, 0, NormVariant::Hamilton, &o).map_err(|e| e.to_string())?;
        for n in direct.levels() {
            let (Some(kb), Some(ka)) = (cb.constant(n), ca.constant(n + cb.r)) else { continue };
            let predicted = kb * ka;
            let k_direct = direct.constant(n).unwrap();
            ensure(predicted >= k_direct * (1.0 - 1e-12), || format!("pair {k}, level {n}: {predicted} < {k_direct}"))?;
        }
        pairs += 1;
    }
    Ok(format!("∂∘∂ order 2 with K ≤ 1; {pairs} random pairs dominated"))
}

fn step_full() -> Outcome {
    let model = build_trig_model("trig", 12, 8, 64).unwrap();
    for s in [1.0f64, 2.0, 3.0] {
        let (v, rep) = step_full_witness(&model, s).map_err(|e| e.to_string())?;
        ensure(rep.holds, || format!("s = {s}: report does not hold"))?;
        for i in 1..=8usize {
            let value = model.metric().seminorm(&v.coords, i);
            let closed = (2.0 * s).powi(i as i32);
            ensure((value - closed).abs() <= 1e-9 * closed, || format!("s = {s}, i = {i}: {value} vs (2s)^i = {closed}"))?;
            ensure(s.powi(i as i32) < value && value < (4.0 * s).powi(i as i32), || format!("s = {s}, i = {i}: {value}"))?;
        }
    }
    Ok("s^i < ‖sin(2s·)‖_i < (4s)^i for s ∈ {1,2,3}, 1 ≤ i ≤ 8".into())
}

fn strictness() -> Outcome {
    let grid = log_grid(-10.0, 2.0, 61);
    let mut parts = Vec::new();
    for top in [4usize, 6, 8] {
        let weights = (0..=top).map(|n| vec![4f64.powi(n as i32)]).collect();
        let model = build_sequence_model("grow", 1, weights).unwrap();
        let rep = model.metric().strictness(&model.vector(DVector::from_element(1, 1.0)).unwrap(), &grid).map_err(|e| e.to_string())?;
        let expected = 2f64.powi(top as i32 + 1) - 1.0;
        let rel = (rep.value - expected).abs() / expected;
        ensure(rel <= 0.05, || format!("N = {top}: {} vs {expected}", rep.value))?;
        parts.push(format!("N={top}: {:.2}/{expected}", rep.value));
    }
    let sqrt = build_scalar_sqrt_model("sqrt").unwrap();
    let rep = sqrt.metric().strictness(&sqrt.vector(DVector::from_element(1, 1.0)).unwrap(), &[1e-6]).map_err(|e| e.to_string())?;
    ensure(rep.value >= 1e3 * (1.0 - 1e-12), || format!("sqrt model: {}", rep.value))?;
    parts.push(format!("sqrt: {:.1}", rep.value));
    Ok(parts.join(", "))
}

fn modulus() -> Outcome {
    let model = build_trig_model("trig", 6, 5, 32).unwrap();
    let mut parts = Vec::new();
    for (n, r) in [(2usize, 1usize), (3, 1), (3, 2)] {
        let base = model.derivative(r).unwrap();
        let opts = NormOptions::with_seed(8);
        let cert = certify_tame(&base, r, 0, NormVariant::Hamilton, &opts).map_err(|e| e.to_string())?;
        let mopts = ModulusOptions { seed: 80 + n as u64 * 10 + r as u64, operators: 100, vectors_per_operator: 100, norm: opts };
        let rep = eval_modulus(&base, &cert, n, &mopts).map_err(|e| e.to_string())?;
        let delta = 0.5f64.powi(n as i32) * 0.5 / 2.0;
        ensure((rep.delta - delta).abs() <= 1e-15, || format!("δ = {} vs {delta}", rep.delta))?;
        ensure(rep.samples >= 10_000, || format!("only {} samples", rep.samples))?;
        ensure(rep.violations == 0, || format!("(n, r) = ({n}, {r}): {} violations", rep.violations))?;
        ensure(rep.max_image_distance < 0.5f64.powi(n as i32), || format!("max d(Gv) = {}", rep.max_image_distance))?;
        parts.push(format!("({n},{r}): max d = {:.2e}", rep.max_image_distance));
    }
    Ok(format!("10^4 pairs each, 0 violations; {}", parts.join(", ")))
}

fn gadget() -> Outcome {
    let model = build_trig_model("trig", 8, 4, 32).unwrap();
    let g = eval_discontinuity_gadget(&model, 6).map_err(|e| e.to_string())?;
    ensure(g.rungs.len() >= 5, || format!("{} rungs", g.rungs.len()))?;
    ensure(g.disjoint, || "gadget reports overlapping supports".into())?;
    let metric = model.metric();
    for r in &g.rungs {
        ensure(r.value > r.index as f64, || format!("E(w_{}) = {}", r.index, r.value))?;
        ensure(r.distance <= 0.5f64.powi(r.index as i32), || format!("d(w_{}, 0) = {}", r.index, r.distance))?;
    }
    // Disjointness by the triangle inequality: balls with d(c_k, c_l) ≥ ρ_k + ρ_l do not meet.
    let centers = g.centers();
    for k in 0..centers.len() {
        ensure((g.evaluate(&centers[k]) - g.rungs[k].value).abs() <= 1e-9 * g.rungs[k].value, || format!("E at center {k}"))?;
        for l in k + 1..centers.len() {
            let gap = metric.norm(&(&centers[k] - &centers[l]));
            ensure(gap >= g.rungs[k].radius + g.rungs[l].radius, || format!("supports {k}, {l} may overlap"))?;
        }
    }
    Ok(format!("{} rungs, E(w_n) > n, d(w_n,0) ≤ 2^-n, supports disjoint", g.rungs.len()))
}

fn kset() -> Outcome {
    let model = build_sequence_model("seq", 3, polynomial_weights(3, 3)).unwrap();
    let metric = model.metric().clone();
    let spec = KSetSpec::geometric(1);
    let opts = NormOptions { directions: 16, ..NormOptions::with_seed(10) };
    let mut rng = stream_rng(10, 0);
    let mut members = Vec::new();
    for _ in 0..60 {
        let scale = 0.5f64.powi(rng.gen_range(0..6));
        let a = GradedOperator::random(metric.clone(), metric.clone(), scale, &mut rng);
        if kj_membership(&a, &spec, &opts).map_err(|e| e.to_string())?.member {
            members.push(a);
        }
    }
    ensure(members.len() >= 5, || format!("only {} members found", members.len()))?;
    for k in 0..1000 {
        let (i, j) = (rng.gen_range(0..members.len()), rng.gen_range(0..members.len()));
        let theta = rng.gen::<f64>();
        let c = members[i].affine_combination(&members[j], theta).map_err(|e| e.to_string())?;
        ensure(kj_membership(&c, &spec, &opts).map_err(|e| e.to_string())?.member, || format!("combination {k} left K_j"))?;
    }
    let trig = build_trig_model("trig", 4, 3, 32).unwrap();
    let d = trig.derivative(1).unwrap();
    let h = hausdorff_witness(&d, &Thresholds::default(), &opts).map_err(|e| e.to_string())?;
    let zero = GradedOperator::zero(trig.metric().clone(), trig.metric().clone());
    ensure(hausdorff_witness(&zero, &Thresholds::default(), &opts).is_err(), || "witness found for 0".into())?;
    Ok(format!("{} members, 1000 combinations stay inside; ∂ separated at j = {}, N = {}; 0 rejected", members.len(), h.j, h.n_scale))
}

fn all_palette_names() -> Vec<PaletteName> {
    vec![
        PaletteName::FC,
        PaletteName::F,
        PaletteName::CC,
        PaletteName::C,
        PaletteName::PC,
        PaletteName::S,
        PaletteName::BS { s: 2.0 },
        PaletteName::B,
        PaletteName::T { alpha: 2.0 },
    ]
}

/// Box spanning the first `axes` coordinates with half-width `side`.
fn axis_box(metric: &FrechetMetric, axes: usize, side: f64, dim: usize) -> ConvexBody {
    let verts = (0..1usize << axes)
        .map(|mask| DVector::from_fn(dim, |k, _| if k < axes { if mask >> k & 1 == 1 { side } else { -side } } else { 0.0 }))
        .collect();
    ConvexBody::polytope(metric, verts).unwrap()
}

/// First chain position whose box contains every generator after doublings.
fn brute_force_index(chain: &[(usize, f64)], generators: &[ConvexBody]) -> Option<usize> {
    chain.iter().position(|&(axes, side)| {
        generators.iter().all(|g| {
            g.finite_points().unwrap().iter().all(|p| {
                p.iter().enumerate().all(|(k, x)| if k < axes { x.abs() <= side * 2f64.powi(40) } else { *x == 0.0 })
            })
        })
    }).map(|i| i + 1)
}

fn palettes() -> Outcome {
    let trig = build_trig_model("t", 2, 3, 64).unwrap();
    let probes = vec![trig.derivative(1).unwrap(), trig.identity()];
    let params = PaletteParams::default();
    for name in all_palette_names() {
        let p = builtin_palette(name, trig.metric().clone(), &params).map_err(|e| e.to_string())?;
        let rep = p.check_axioms(&probes, &AxiomOptions::default()).map_err(|e| e.to_string())?;
        ensure(rep.axioms.len() == 5, || format!("{name}: {} axioms checked", rep.axioms.len()))?;
        ensure(rep.all_passed(), || {
            let failed: Vec<u8> = rep.axioms.iter().filter(|a| !a.passed).map(|a| a.axiom).collect();
            format!("{name} fails axioms {failed:?}")
        })?;
    }
    let bs = builtin_palette(PaletteName::BS { s: 2.0 }, trig.metric().clone(), &params).map_err(|e| e.to_string())?;
    ensure(bs.is_strong().map_err(|e| e.to_string())?.strong, || "B_s not strong".into())?;

    let seq = build_sequence_model("q", 2, polynomial_weights(2, 3)).unwrap();
    let wide = ConvexBody::segment(seq.metric(), DVector::from_vec(vec![0.6, 0.0])).unwrap();
    let wide_family = PaletteFamily::custom(seq.metric().clone(), vec![wide], ClosureFlags::default(), None, 0).unwrap();
    ensure(!wide_family.is_strong().map_err(|e| e.to_string())?.strong, || "wide family reported strong".into())?;

    let dim = 4;
    let normed = build_normed_model("n", dim, false).unwrap();
    let fc = builtin_palette(PaletteName::FC, normed.metric().clone(), &params).map_err(|e| e.to_string())?;
    let chains: [&[(usize, f64)]; 4] = [
        &[(1, 1.0), (2, 1.0), (3, 1.0), (4, 1.0)],
        &[(1, 0.5), (3, 1.0), (4, 2.0)],
        &[(2, 1.0), (2, 4.0), (3, 4.0), (4, 4.0), (4, 8.0)],
        &[(1, 1.0), (2, 2.0), (3, 3.0)],
    ];
    for chain in chains {
        let bodies: Vec<ConvexBody> = chain.iter().map(|&(a, s)| axis_box(normed.metric(), a, s, dim)).collect();
        let got = absorption_index(&bodies, &fc).map_err(|e| e.to_string())?.index;
        let want = brute_force_index(chain, &fc.generators);
        ensure(got == want, || format!("chain {chain:?}: index {got:?}, brute force {want:?}"))?;
    }
    Ok("9 built-ins pass axioms 1–5; B_s strong; wide family not strong; 4 box chains match brute force".into())
}

fn banach() -> Outcome {
    let mut worst = 0.0f64;
    for k in 0..20u64 {
        let mut rng = stream_rng(k, 12);
        let dim = 2 + (k as usize % 4);
        let m = DMatrix::from_fn(dim, dim, |_, _| gaussian(&mut rng));
        let l2 = build_normed_model("l2", dim, true).unwrap();
        let linf = build_normed_model("linf", dim, false).unwrap();
        let scalar = build_scalar_model("r", 0).unwrap();
        let a = GradedOperator::new(m.clone(), l2.metric().clone(), l2.metric().clone()).unwrap();
        let b = GradedOperator::new(m.clone(), linf.metric().clone(), linf.metric().clone()).unwrap();
        let c = GradedOperator::new(DMatrix::from_element(1, 1, m[(0, 0)]), scalar.metric().clone(), scalar.metric().clone()).unwrap();
        let opts = NormOptions::with_seed(k);
        let norm = |op: &GradedOperator| op.op_norm(0, 0, NormVariant::Hamilton, &opts).map(|v| v.value.value).map_err(|e| e.to_string());
        let sigma = m.clone().svd(false, false).singular_values.max();
        let row_sum = (0..dim).map(|i| m.row(i).abs().sum()).fold(0.0, f64::max);
        for (got, want) in [(norm(&a)?, sigma), (norm(&b)?, row_sum), (norm(&c)?, m[(0, 0)].abs())] {
            let rel = (got - want).abs() / want.max(f64::MIN_POSITIVE);
            ensure(rel <= 1e-12, || format!("{got} vs classical {want}"))?;
            worst = worst.max(rel);
        }
    }
    Ok(format!("ℓ², ℓ^∞ and scalar operator norms, max relative error {worst:.1e}"))
}

fn determinism() -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/demo.toml");
    let run = |dir: &Path| -> Result<Vec<u8>, String> {
        let o = Command::new(env!("CARGO_BIN_EXE_tame"))
            .arg("--config")
            .arg(&config)
            .arg("--out")
            .arg(dir)
            .arg("report")
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        std::fs::read(dir.join("report.jsonl")).map_err(|e| e.to_string())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let (x, y) = (run(a.path())?, run(b.path())?);
    ensure(!x.is_empty() && x == y, || "reports differ between runs".into())?;
    Ok(format!("two runs of the demo config, {} identical bytes", x.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("derivative tameness", derivative_tameness),
        ("derivative divergence scan", derivative_scan),
        ("gradus inequalities", gradus),
        ("scalar bound", scalar_bound),
        ("composition additivity", composition),
        ("step-full bracket", step_full),
        ("non-strictness ladder", strictness),
        ("evaluation modulus", modulus),
        ("evaluation-discontinuity gadget", gadget),
        ("K-set convexity and Hausdorff witness", kset),
        ("palette axioms", palettes),
        ("Banach specialization", banach),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.2}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
