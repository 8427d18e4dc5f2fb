//! Task execution and per-task contracts.

use nalgebra::DVector;
use serde::Serialize;
use serde_json::{json, Value};
use tame_core::graded_space::log_grid;
use tame_core::operators::{
    certify_tame, eval_modulus, hausdorff_witness, kj_membership, nontameness_scan, trb_metric, KSetSpec, ModulusOptions,
    NormOptions, NormVariant, Thresholds, Verdict,
};
use tame_core::palettes::{builtin_palette, AxiomOptions, PaletteName};
use tame_core::witnesses::{
    build_trig_model, dominated_extension, eval_discontinuity_gadget, prescribed_jet, step_full_witness, unbounded_functional,
    ExtensionOptions, JetOptions, Sublinear,
};
use tame_core::Result;

use crate::config::{Expect, TaskKind, TaskSpec, Tolerances, WitnessSpec};
use crate::registry::Registry;

/// What a task computed and whether its contract held.
pub struct Outcome {
    pub contract_met: bool,
    pub results: Value,
    pub truncation: Option<usize>,
    /// `(N, K_n, fit)` rows, present for scans.
    pub ladder: Option<Vec<LadderRow>>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LadderRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K_n")]
    pub k: f64,
    pub fit: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ExpectedNegative,
    Failed,
}

impl Status {
    pub fn from_contract(expect: Expect, contract_met: bool) -> Self {
        match (expect.is_negative(), contract_met) {
            (false, true) => Status::Ok,
            (true, false) => Status::ExpectedNegative,
            _ => Status::Failed,
        }
    }

    pub fn is_success(self) -> bool {
        !matches!(self, Status::Failed)
    }
}

fn value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).unwrap_or(Value::Null)
}

fn outcome(contract_met: bool, results: Value, truncation: Option<usize>) -> Outcome {
    Outcome { contract_met, results, truncation, ladder: None }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + b.abs())
}

/// Least-squares line through `(log N, log K)`, returned as `(slope, intercept)`.
fn log_log_fit(points: &[(usize, f64)]) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points.iter().filter(|(_, k)| *k > 0.0).map(|&(n, k)| ((n as f64).ln(), k.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let len = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / len;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / len;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

pub fn run_task(task: &TaskSpec, seed: u64, tol: &Tolerances, reg: &Registry) -> Result<Outcome> {
    let opts = NormOptions::with_seed(seed);
    match &task.kind {
        TaskKind::Certify { operator, r, b, variant } => {
            let a = reg.operator(operator)?;
            let cert = certify_tame(a, *r, *b, *variant, &opts)?;
            let recheck = cert.recheck(a, tol.recheck_samples, seed.wrapping_add(1))?;
            let finite = cert.constants.iter().all(|k| k.is_finite());
            let results = json!({
                "r": cert.r,
                "b": cert.b,
                "K": cert.constants,
                "certificate": value(&cert),
                "recheck": value(&recheck),
            });
            Ok(outcome(finite && recheck.passed, results, Some(cert.truncation)))
        }
        TaskKind::Scan { order, r, level, ladder, levels, grid } => {
            let (order, levels, grid) = (*order, *levels, *grid);
            let ev = nontameness_scan(
                |n| build_trig_model(format!("scan_{n}"), n, levels, grid.max(4 * n))?.derivative(order),
                *r,
                *level,
                ladder,
                &opts,
            )?;
            let pairs: Vec<(usize, f64)> = ev.points.iter().map(|p| (p.truncation, p.constant)).collect();
            let (slope, intercept) = log_log_fit(&pairs).unwrap_or((0.0, f64::NEG_INFINITY));
            let rows: Vec<LadderRow> = pairs
                .iter()
                .map(|&(n, k)| LadderRow { n, k, fit: intercept.exp() * (n as f64).powf(slope) })
                .collect();
            let results = json!({
                "evidence": value(&ev),
                "fit": { "slope": slope, "intercept": intercept },
                "ladder": value(&rows),
            });
            let top = ladder.last().copied();
            Ok(Outcome { contract_met: ev.verdict == Verdict::BoundedFit, results, truncation: top, ladder: Some(rows) })
        }
        TaskKind::Norm { operator, m, n, variant } => {
            let a = reg.operator(operator)?;
            let v = a.op_norm(*m, *n, *variant, &opts)?;
            let v_json = json!({
                "value": v.value.value,
                "lower": v.value.lower,
                "upper": if v.value.upper.is_finite() { json!(v.value.upper) } else { json!("inf") },
                "kind": value(&v.value.kind),
                "width": v.value.width(),
                "backend": value(&v.backend),
            });
            let within = v.value.upper.is_finite() && v.value.width() <= tol.bracket * v.value.upper.abs().max(1.0);
            let top = match variant {
                NormVariant::Hamilton => a.target().n_max(),
                NormVariant::Dyadic => a.target().dyadic_top(),
            };
            Ok(outcome(within, json!({ "m": m, "n": n, "variant": value(variant), "norm": v_json }), Some(top)))
        }
        TaskKind::Metric { left, right, r, basis } => {
            let (a, b) = (reg.operator(left)?, reg.operator(right)?);
            let ca = certify_tame(a, *r, *basis, NormVariant::Hamilton, &opts)?;
            let cb = certify_tame(b, *r, *basis, NormVariant::Hamilton, &opts)?;
            let d = trb_metric(a, &ca, b, &cb, *r, *basis, &opts)?;
            Ok(outcome(d.is_finite(), json!({ "distance": d, "r": r, "b": basis }), Some(ca.truncation.min(cb.truncation))))
        }
        TaskKind::Palette { model, palette, params, probes, strong } => {
            let space = reg.model(model)?;
            let mut params = params.clone();
            params.seed = seed;
            let mut name: PaletteName = palette.parse()?;
            if let PaletteName::BS { s } = &mut name {
                if *s == 0.0 {
                    *s = params.s;
                }
            }
            let family = builtin_palette(name, space.metric().clone(), &params)?;
            let probe_ops = if probes.is_empty() {
                vec![space.identity()]
            } else {
                probes.iter().map(|p| reg.operator(p).cloned()).collect::<Result<Vec<_>>>()?
            };
            let axioms = family.check_axioms(&probe_ops, &AxiomOptions::default())?;
            let strong_report = family.is_strong()?;
            let strong_ok = strong.map_or(true, |want| want == strong_report.strong);
            let results = json!({
                "palette": name.to_string(),
                "generators": family.generators.len(),
                "axioms": value(&axioms),
                "strong": value(&strong_report),
            });
            Ok(outcome(axioms.all_passed() && strong_ok, results, Some(space.metric().n_max())))
        }
        TaskKind::Witness { witness } => run_witness(witness, seed, reg),
    }
}

fn run_witness(w: &WitnessSpec, seed: u64, reg: &Registry) -> Result<Outcome> {
    let opts = NormOptions::with_seed(seed);
    match w {
        WitnessSpec::StepFull { model, s } => {
            let m = reg.model(model)?;
            let (v, rep) = step_full_witness(m, *s)?;
            let coords: Vec<f64> = v.coords.iter().copied().collect();
            Ok(outcome(rep.holds, json!({ "vector": coords, "report": value(&rep) }), Some(m.metric().n_max())))
        }
        WitnessSpec::Strictness { model, coords, lo, hi, count } => {
            let m = reg.model(model)?;
            let v = m.vector(DVector::from_column_slice(coords))?;
            let rep = m.metric().strictness(&v, &log_grid(*lo, *hi, *count))?;
            Ok(outcome(rep.value.is_finite(), value(&rep), Some(m.metric().n_max())))
        }
        WitnessSpec::UnboundedFunctional { model, eps, terms } => {
            let m = reg.model(model)?;
            let u = unbounded_functional(m, *eps, *terms, seed)?;
            let grows = u.ladder.iter().all(|r| r.terms == 0 || r.sup_on_ball >= 2f64.powi(r.terms as i32));
            let inside = u.line_inside_ball.iter().all(|x| *x);
            Ok(outcome(grows && inside, value(&u), Some(m.metric().n_max())))
        }
        WitnessSpec::Gadget { model, length } => {
            let m = reg.model(model)?;
            let g = eval_discontinuity_gadget(m, *length)?;
            let rungs_hold = g.rungs.iter().all(|r| r.value > r.index as f64 && r.distance <= 0.5f64.powi(r.index as i32));
            let results = json!({ "disjoint": g.disjoint, "rungs": value(&g.rungs) });
            Ok(outcome(g.disjoint && rungs_hold && g.rungs.len() == *length, results, Some(m.metric().n_max())))
        }
        WitnessSpec::Jet { conditions, smallness } => {
            let f = prescribed_jet(conditions, &JetOptions { smallness: *smallness, plateau_smoothness: None })?;
            let residuals: Vec<f64> = conditions.iter().map(|c| f.derivative(c.point, c.order) - c.value).collect();
            let met = conditions.iter().all(|c| close(f.derivative(c.point, c.order), c.value));
            Ok(outcome(met, json!({ "function": value(&f), "residuals": residuals }), None))
        }
        WitnessSpec::Extension { model, w, c, terms } => {
            let m = reg.model(model)?;
            let wv = m.vector(DVector::from_column_slice(w))?;
            let p = Sublinear { terms: terms.clone() };
            let ext = dominated_extension(m.metric(), &wv, *c, &p, &ExtensionOptions { seed, samples: 10_000 })?;
            let met = close(ext.value_at_w, *c) && ext.max_excess <= 1e-9;
            Ok(outcome(met, value(&ext), Some(m.metric().n_max())))
        }
        WitnessSpec::Modulus { operator, r, b, n, operators, vectors } => {
            let a = reg.operator(operator)?;
            let cert = certify_tame(a, *r, *b, NormVariant::Hamilton, &opts)?;
            let mopts = ModulusOptions { seed, operators: *operators, vectors_per_operator: *vectors, norm: opts.clone() };
            let rep = eval_modulus(a, &cert, *n, &mopts)?;
            Ok(outcome(rep.violations == 0, value(&rep), Some(cert.truncation)))
        }
        WitnessSpec::Hausdorff { operator } => {
            let a = reg.operator(operator)?;
            let h = hausdorff_witness(a, &Thresholds::default(), &opts)?;
            Ok(outcome(true, value(&h), Some(a.source().dyadic_top())))
        }
        WitnessSpec::Kset { operator, j } => {
            let a = reg.operator(operator)?;
            let k = kj_membership(a, &KSetSpec::geometric(*j), &opts)?;
            Ok(outcome(k.member, value(&k), Some(a.source().dyadic_top())))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_table() {
        assert_eq!(Status::from_contract(Expect::Pass, true), Status::Ok);
        assert_eq!(Status::from_contract(Expect::Pass, false), Status::Failed);
        assert_eq!(Status::from_contract(Expect::Diverging, false), Status::ExpectedNegative);
        assert_eq!(Status::from_contract(Expect::Fail, true), Status::Failed);
    }

    #[test]
    fn fit_recovers_power_law() {
        let pts: Vec<(usize, f64)> = [8, 16, 32].iter().map(|&n| (n, 3.0 * (n as f64).powi(2))).collect();
        let (slope, intercept) = log_log_fit(&pts).unwrap();
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept.exp() - 3.0).abs() < 1e-9);
    }
}
