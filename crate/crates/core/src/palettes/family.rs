//! Palette families: generators, closure flags, the built-in palettes and
//! the axiom and strongness checks.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::body::{BodySet, ConvexBody, Geometry};
use crate::error::{Error, Result};
use crate::graded_space::{FrechetMetric, MetricMode};
use crate::operators::GradedOperator;
use crate::rng::{self, stream};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PaletteName {
    /// Convex compact sets in finite-dimensional subspaces.
    FC,
    /// Compact sets in finite-dimensional subspaces.
    F,
    /// Convex compact sets.
    CC,
    /// Compact sets.
    C,
    /// Precompact sets.
    PC,
    /// Bounded sets in the topological vector space sense.
    S,
    /// Metrically bounded sets of diameter at most `s`.
    BS { s: f64 },
    /// Metrically bounded sets.
    B,
    /// `α`-tame sets.
    T { alpha: f64 },
}

impl fmt::Display for PaletteName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PaletteName::FC => write!(f, "FC"),
            PaletteName::F => write!(f, "F"),
            PaletteName::CC => write!(f, "CC"),
            PaletteName::C => write!(f, "C"),
            PaletteName::PC => write!(f, "PC"),
            PaletteName::S => write!(f, "S"),
            PaletteName::BS { s } => write!(f, "B_{s}"),
            PaletteName::B => write!(f, "B"),
            PaletteName::T { alpha } => write!(f, "T_{alpha}"),
        }
    }
}

impl FromStr for PaletteName {
    type Err = Error;

    /// Accepts `FC, F, CC, C, PC, S, B, B_s, B_<s>, T, T_<α>`; a bare `B_s`
    /// takes `s` from the palette parameters later, so it parses to `s = 0`.
    fn from_str(s: &str) -> Result<Self> {
        let number = |t: &str| {
            t.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite() && *x > 0.0)
                .ok_or_else(|| Error::InvalidParameter(format!("unknown palette `{s}`")))
        };
        Ok(match s {
            "FC" => PaletteName::FC,
            "F" => PaletteName::F,
            "CC" => PaletteName::CC,
            "C" => PaletteName::C,
            "PC" => PaletteName::PC,
            "S" => PaletteName::S,
            "B" => PaletteName::B,
            "B_s" => PaletteName::BS { s: 0.0 },
            "T" => PaletteName::T { alpha: 2.0 },
            _ if s.starts_with("B_") => PaletteName::BS { s: number(&s[2..])? },
            _ if s.starts_with("T_") => PaletteName::T { alpha: number(&s[2..])? },
            _ => return Err(Error::InvalidParameter(format!("unknown palette `{s}`"))),
        })
    }
}

/// The membership predicate a closure result has to satisfy.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum PaletteClass {
    ConvexCompact,
    Compact,
    Bounded,
    Diameter { s: f64 },
    MetricBounded,
    Tame { alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClosureFlags {
    pub union: bool,
    pub scaling: bool,
    pub hull_with_point: bool,
}

impl ClosureFlags {
    pub fn all() -> Self {
        Self { union: true, scaling: true, hull_with_point: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PaletteParams {
    /// Generator sizes.
    pub scales: Vec<f64>,
    /// Diameter bound for `B_s`.
    pub s: f64,
    /// Constant `D` of the tame boxes `‖v‖_n < D·α^n`.
    pub box_constant: f64,
    pub seed: u64,
}

impl Default for PaletteParams {
    fn default() -> Self {
        Self { scales: vec![1.0, 0.5], s: 2.0, box_constant: 1.0, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct PaletteFamily {
    pub name: Option<PaletteName>,
    pub class: Option<PaletteClass>,
    pub generators: Vec<ConvexBody>,
    pub flags: ClosureFlags,
    geometry: Geometry,
}

impl PaletteFamily {
    pub fn custom(
        metric: Arc<FrechetMetric>,
        generators: Vec<ConvexBody>,
        flags: ClosureFlags,
        class: Option<PaletteClass>,
        seed: u64,
    ) -> Result<Self> {
        for g in &generators {
            g.validate(&metric)?;
        }
        Ok(Self { name: None, class, generators, flags, geometry: Geometry::new(metric, seed)? })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    pub fn metric(&self) -> &Arc<FrechetMetric> {
        self.geometry.metric()
    }

    /// Whether `set` satisfies the class predicate; families without a class
    /// accept every closure result.
    pub fn class_holds(&self, set: &BodySet) -> (bool, String) {
        match self.class {
            None => (true, "no class predicate".into()),
            Some(c) => class_holds(&self.geometry, c, set),
        }
    }

    /// Whether some generator (scaled by `2^k`, `k ≤ max_doublings`, when the
    /// family is closed under scaling) contains `set`.
    pub fn absorbs(&self, set: &BodySet, max_doublings: u32) -> Result<Option<(usize, u32)>> {
        let top = if self.flags.scaling { max_doublings } else { 0 };
        for k in 0..=top {
            let lambda = 2f64.powi(k as i32);
            for (i, g) in self.generators.iter().enumerate() {
                if self.geometry.covers(g, lambda, set)?.0 {
                    return Ok(Some((i, k)));
                }
            }
        }
        Ok(None)
    }
}

fn basis(dim: usize, k: usize, t: f64) -> DVector<f64> {
    let mut e = DVector::zeros(dim);
    e[k] = t;
    e
}

fn total_weight(metric: &FrechetMetric) -> f64 {
    match metric.mode() {
        MetricMode::SqrtScalar => f64::INFINITY,
        MetricMode::SumForm => metric.config().weights.iter().sum(),
    }
}

/// The named palette at truncation, as a finite generating family.
pub fn builtin_palette(name: PaletteName, metric: Arc<FrechetMetric>, params: &PaletteParams) -> Result<PaletteFamily> {
    if params.scales.is_empty() || params.scales.iter().any(|t| !(t.is_finite() && *t > 0.0)) {
        return Err(Error::InvalidParameter("palette scales must be positive".into()));
    }
    let dim = metric.dim();
    let top = metric.n_max();
    let w0 = total_weight(&metric);
    let mut gens = Vec::new();
    let name = match name {
        PaletteName::BS { s } if s == 0.0 => PaletteName::BS { s: params.s },
        other => other,
    };
    let class = match name {
        PaletteName::FC | PaletteName::CC => {
            for &t in &params.scales {
                for k in 0..dim {
                    gens.push(ConvexBody::segment(&metric, basis(dim, k, t))?);
                }
                let cross = (0..dim).flat_map(|k| [basis(dim, k, t), basis(dim, k, -t)]).collect();
                gens.push(ConvexBody::polytope(&metric, cross)?);
            }
            PaletteClass::ConvexCompact
        }
        PaletteName::F | PaletteName::C | PaletteName::PC => {
            for &t in &params.scales {
                for k in 0..dim {
                    gens.push(ConvexBody::point_set(&metric, vec![basis(dim, k, t), basis(dim, k, -t)])?);
                }
                let all = (0..dim).flat_map(|k| [basis(dim, k, t), basis(dim, k, -t)]).collect();
                gens.push(ConvexBody::point_set(&metric, all)?);
            }
            PaletteClass::Compact
        }
        PaletteName::S => {
            for &t in &params.scales {
                gens.push(ConvexBody::sublevel(&metric, top, t)?);
            }
            PaletteClass::Bounded
        }
        PaletteName::BS { s } => {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidParameter(format!("B_s needs s > 0, got {s}")));
            }
            // Radii s/2, s/4, … down past the smallest dyadic ball, kept
            // below the metric's supremum so every ball is proper.
            for k in 0..=metric.dyadic_top() + 1 {
                let rho = 0.5 * s * 0.5f64.powi(k as i32);
                if rho < w0 {
                    gens.push(ConvexBody::ball(&metric, DVector::zeros(dim), rho)?);
                }
            }
            PaletteClass::Diameter { s }
        }
        PaletteName::B => {
            let mut radii: Vec<f64> = if w0.is_finite() {
                (1..=3).map(|k| w0 * (1.0 - 0.5f64.powi(k))).collect()
            } else {
                (0..=3).map(|k| 2f64.powi(k)).collect()
            };
            radii.extend((1..=metric.dyadic_top() + 1).map(|k| 0.5f64.powi(k as i32)));
            for rho in radii {
                gens.push(ConvexBody::ball(&metric, DVector::zeros(dim), rho)?);
            }
            PaletteClass::MetricBounded
        }
        PaletteName::T { alpha } => {
            if !(alpha.is_finite() && alpha > 0.0) {
                return Err(Error::InvalidParameter(format!("T_alpha needs alpha > 0, got {alpha}")));
            }
            for &t in &params.scales {
                let bounds = (0..=top).map(|n| params.box_constant * t * alpha.powi(n as i32)).collect();
                gens.push(ConvexBody::seminorm_box(&metric, 0, bounds)?);
            }
            PaletteClass::Tame { alpha }
        }
    };
    Ok(PaletteFamily {
        name: Some(name),
        class: Some(class),
        generators: gens,
        flags: ClosureFlags::all(),
        geometry: Geometry::new(metric, params.seed)?,
    })
}

fn all_levels_finite(geo: &Geometry, set: &BodySet) -> (bool, Vec<f64>) {
    let zero = DVector::zeros(geo.metric().dim());
    let sups: Vec<f64> = (0..=geo.metric().n_max()).map(|m| geo.shifted_sup(set, &zero, m)).collect();
    (sups.iter().all(|s| s.is_finite()), sups)
}

fn recession_free(geo: &Geometry, set: &BodySet) -> bool {
    set.parts.iter().all(|(b, _)| geo.recession_directions(b).is_empty())
}

/// Class predicate on a derived set, with a short explanation.
pub fn class_holds(geo: &Geometry, class: PaletteClass, set: &BodySet) -> (bool, String) {
    match class {
        PaletteClass::ConvexCompact => {
            if set.is_finite() && (set.hull || set.finite_points().is_some_and(|p| p.len() <= 1) || set.parts.len() <= 1)
            {
                (true, "finite vertex set".into())
            } else {
                (false, "not a polytope".into())
            }
        }
        PaletteClass::Compact => {
            if set.is_finite() {
                return (true, "finite vertex set".into());
            }
            let (finite, _) = all_levels_finite(geo, set);
            let ok = finite && recession_free(geo, set);
            (ok, if ok { "bounded closure".into() } else { "unbounded".into() })
        }
        PaletteClass::Bounded => {
            let (finite, sups) = all_levels_finite(geo, set);
            (finite, format!("seminorm suprema {sups:?}"))
        }
        PaletteClass::Diameter { s } => {
            let d = geo.diameter_bound(set);
            (d <= s, format!("diameter bound {d}"))
        }
        PaletteClass::MetricBounded => {
            let zero = DVector::zeros(geo.metric().dim());
            let r = geo.metric_sup(set, &zero);
            (r.is_finite(), format!("radius bound {r}"))
        }
        PaletteClass::Tame { alpha } => {
            let (finite, sups) = all_levels_finite(geo, set);
            let d = sups.iter().enumerate().map(|(n, s)| s / alpha.powi(n as i32)).fold(0.0, f64::max);
            (finite, format!("tame constant {d}"))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomOptions {
    /// 1: single closure steps on generators; 2: also steps applied to pairwise unions.
    pub depth: usize,
    /// Image seminorms above this count as unbounded.
    pub image_cap: f64,
    pub samples: usize,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        Self { depth: 2, image_cap: 1e12, samples: 64 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomFailure {
    pub generators: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub probe: Option<usize>,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomResult {
    pub axiom: u8,
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failures: Vec<AxiomFailure>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport {
    pub palette: Option<String>,
    pub axioms: Vec<AxiomResult>,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.axioms.iter().all(|a| a.passed)
    }

    pub fn axiom(&self, k: u8) -> Option<&AxiomResult> {
        self.axioms.iter().find(|a| a.axiom == k)
    }
}

struct Tally {
    result: AxiomResult,
}

impl Tally {
    fn new(axiom: u8, name: &str) -> Self {
        Self { result: AxiomResult { axiom, name: name.into(), passed: true, checked: 0, failures: Vec::new() } }
    }

    fn record(&mut self, ok: bool, generators: Vec<usize>, probe: Option<usize>, detail: impl FnOnce() -> String) {
        self.result.checked += 1;
        if !ok {
            self.result.passed = false;
            self.result.failures.push(AxiomFailure { generators, probe, detail: detail() });
        }
    }
}

impl PaletteFamily {
    /// Closure check: with the flag set the class predicate must hold on
    /// the result, otherwise some generator has to cover it.
    fn closed(&self, flag: bool, set: &BodySet) -> Result<(bool, String)> {
        if flag {
            Ok(self.class_holds(set))
        } else {
            let hit = self.absorbs(set, 0)?;
            Ok((hit.is_some(), match hit {
                Some((g, _)) => format!("covered by generator {g}"),
                None => "no covering generator".into(),
            }))
        }
    }

    fn union_set(&self, i: usize, j: usize) -> BodySet {
        let u = BodySet::of(&self.generators[i]).union(&BodySet::of(&self.generators[j]));
        // Convex classes are closed under the hull of unions, not unions.
        if self.class == Some(PaletteClass::ConvexCompact) {
            u.with_hull()
        } else {
            u
        }
    }

    fn adjoin_points(&self) -> Vec<DVector<f64>> {
        let dim = self.metric().dim();
        let mut r = rng::stream_rng(self.geometry.seed(), stream::PALETTE);
        vec![basis(dim, 0, 1.0), basis(dim, dim - 1, -0.5), rng::gaussian_vector(&mut r, dim) * 0.5]
    }

    /// Axioms 1 to 4 on generators and pairs, and the spanning surrogate of
    /// axiom 5.
    pub fn check_axioms(&self, probes: &[GradedOperator], opts: &AxiomOptions) -> Result<AxiomReport> {
        let metric = self.metric();
        for p in probes {
            if p.source().id() != metric.id() {
                return Err(Error::ModelMismatch { left: metric.id().0.clone(), right: p.source().id().0.clone() });
            }
        }
        let gens = &self.generators;

        let mut a1 = Tally::new(1, "bounded images");
        for (pi, probe) in probes.iter().enumerate() {
            for (gi, g) in gens.iter().enumerate() {
                let im = self.geometry.image_sups(probe, g, opts.samples)?;
                let finite = |v: &f64| v.is_finite() && *v <= opts.image_cap;
                let ok = im.unbounded_direction.is_none()
                    && im.sups.iter().zip(&im.sampled).all(|(s, t)| finite(s) || finite(t));
                a1.record(ok, vec![gi], Some(pi), || match &im.unbounded_direction {
                    Some(u) => format!("image unbounded along recession direction {u:?}"),
                    None => format!("image seminorms {:?}", im.sups),
                });
            }
        }

        let mut pairs = Vec::new();
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                pairs.push((i, j));
            }
        }

        let mut a2 = Tally::new(2, "unions");
        for &(i, j) in &pairs {
            let (ok, why) = self.closed(self.flags.union, &self.union_set(i, j))?;
            a2.record(ok, vec![i, j], None, || why);
        }

        let mut a3 = Tally::new(3, "scalings");
        for (i, g) in gens.iter().enumerate() {
            for lambda in [0.5, 2.0] {
                let (ok, why) = self.closed(self.flags.scaling, &BodySet::of(g).scaled(lambda))?;
                a3.record(ok, vec![i], None, || format!("λ = {lambda}: {why}"));
            }
        }
        let mut a4 = Tally::new(4, "hull with a point");
        let points = self.adjoin_points();
        for (i, g) in gens.iter().enumerate() {
            for v in &points {
                let (ok, why) = self.closed(self.flags.hull_with_point, &BodySet::of(g).hull_with_point(v))?;
                a4.record(ok, vec![i], None, || why);
            }
        }
        if opts.depth >= 2 {
            for &(i, j) in &pairs {
                let u = self.union_set(i, j);
                let (ok, why) = self.closed(self.flags.scaling && self.flags.union, &u.scaled(2.0))?;
                a3.record(ok, vec![i, j], None, || format!("scaled union: {why}"));
                let (ok, why) = self.closed(self.flags.hull_with_point && self.flags.union, &u.hull_with_point(&points[0]))?;
                a4.record(ok, vec![i, j], None, || format!("hull of union: {why}"));
            }
        }

        let mut a5 = Tally::new(5, "generators span the space");
        let rank = span_rank(gens, metric.dim());
        a5.record(rank == metric.dim(), (0..gens.len()).collect(), None, || {
            format!("generators span a {rank}-dimensional subspace of {}", metric.dim())
        });

        Ok(AxiomReport {
            palette: self.name.map(|n| n.to_string()),
            axioms: vec![a1.result, a2.result, a3.result, a4.result, a5.result],
        })
    }
}

/// Dimension of the span of all generator points; open bodies span everything.
fn span_rank(gens: &[ConvexBody], dim: usize) -> usize {
    if gens.iter().any(|g| g.is_open()) {
        return dim;
    }
    let pts: Vec<DVector<f64>> = gens.iter().filter_map(|g| g.finite_points()).flatten().collect();
    if pts.is_empty() {
        return 0;
    }
    let m = DMatrix::from_columns(&pts);
    let sv = m.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|s| **s > 1e-10 * top).count()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongLevel {
    pub n: usize,
    /// Generator and number of halvings that land inside `B_{2^{-n}}(0)`.
    pub generator: Option<usize>,
    pub halvings: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongReport {
    pub strong: bool,
    pub levels: Vec<StrongLevel>,
    pub first_failure: Option<usize>,
}

/// Halvings tried per generator when the family is closed under scaling.
pub const MAX_HALVINGS: u32 = 40;

impl PaletteFamily {
    /// For each dyadic ball `B_{2^{-n}}(0)`, `n ≤ dyadic_top`, look for a
    /// generator or a halved generator inside it.
    pub fn is_strong(&self) -> Result<StrongReport> {
        let metric = self.metric();
        let dim = metric.dim();
        let max_k = if self.flags.scaling { MAX_HALVINGS } else { 0 };
        let mut levels = Vec::new();
        let mut first_failure = None;
        for n in 0..=metric.dyadic_top() {
            let ball = ConvexBody::ball(metric, DVector::zeros(dim), 0.5f64.powi(n as i32))?;
            let mut found = None;
            'search: for k in 0..=max_k {
                for (i, g) in self.generators.iter().enumerate() {
                    let set = BodySet::of(g).scaled(0.5f64.powi(k as i32));
                    if self.geometry.covers(&ball, 1.0, &set)?.0 {
                        found = Some((i, k));
                        break 'search;
                    }
                }
            }
            if found.is_none() && first_failure.is_none() {
                first_failure = Some(n);
            }
            levels.push(StrongLevel { n, generator: found.map(|f| f.0), halvings: found.map(|f| f.1) });
        }
        Ok(StrongReport { strong: first_failure.is_none(), levels, first_failure })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::witnesses::{
        build_normed_model, build_sequence_model, build_trig_model, polynomial_weights, product_weights,
        unbounded_functional,
    };
    use nalgebra::dvector;

    fn all_names() -> Vec<PaletteName> {
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

    #[test]
    fn names_round_trip() {
        for n in all_names() {
            assert_eq!(n.to_string().parse::<PaletteName>().unwrap(), n);
        }
        assert_eq!("B_s".parse::<PaletteName>().unwrap(), PaletteName::BS { s: 0.0 });
        assert!("Q".parse::<PaletteName>().is_err());
        assert!("T_-1".parse::<PaletteName>().is_err());
    }

    #[test]
    fn fc_generators_are_coordinate_simplices() {
        let m = build_normed_model("n", 3, true).unwrap();
        let p = builtin_palette(PaletteName::FC, m.metric().clone(), &PaletteParams::default()).unwrap();
        assert_eq!(p.generators.len(), 2 * 4);
        let v = p.generators[1].finite_points().unwrap();
        assert_eq!(v, vec![dvector![0.0, 1.0, 0.0], dvector![0.0, -1.0, 0.0]]);
    }

    #[test]
    fn bs_balls_have_bounded_diameter() {
        let m = build_trig_model("t", 3, 3, 64).unwrap();
        let p = builtin_palette(PaletteName::BS { s: 1.0 }, m.metric().clone(), &PaletteParams::default()).unwrap();
        for g in &p.generators {
            assert!(p.geometry().diameter_bound(&BodySet::of(g)) <= 1.0);
        }
    }

    #[test]
    fn builtins_pass_axioms_on_trig() {
        let m = build_trig_model("t", 2, 3, 64).unwrap();
        let probes = vec![m.derivative(1).unwrap(), m.identity()];
        for name in all_names() {
            let p = builtin_palette(name, m.metric().clone(), &PaletteParams::default()).unwrap();
            let rep = p.check_axioms(&probes, &AxiomOptions::default()).unwrap();
            assert!(rep.all_passed(), "{name}: {rep:#?}");
        }
    }

    #[test]
    fn missing_unions_fail_with_the_pair() {
        let m = build_normed_model("n", 2, true).unwrap();
        let gens = vec![
            ConvexBody::segment(m.metric(), dvector![1.0, 0.0]).unwrap(),
            ConvexBody::segment(m.metric(), dvector![0.0, 1.0]).unwrap(),
        ];
        let flags = ClosureFlags { union: false, scaling: true, hull_with_point: true };
        let p = PaletteFamily::custom(m.metric().clone(), gens, flags, Some(PaletteClass::ConvexCompact), 0).unwrap();
        let rep = p.check_axioms(&[], &AxiomOptions { depth: 1, ..Default::default() }).unwrap();
        let a2 = rep.axiom(2).unwrap();
        assert!(!a2.passed);
        assert_eq!(a2.failures[0].generators, vec![0, 1]);
        assert!(rep.axiom(3).unwrap().passed);
    }

    #[test]
    fn ball_palette_fails_axiom_one_for_unbounded_functional() {
        let m = build_sequence_model("p", 6, product_weights(6, 2)).unwrap();
        let f = unbounded_functional(&m, 0.5, 3, 0).unwrap();
        let scalar = crate::witnesses::build_scalar_model("r", 0).unwrap();
        let probe = GradedOperator::new(
            DMatrix::from_row_slice(1, m.dim(), &f.functional),
            m.metric().clone(),
            scalar.metric().clone(),
        )
        .unwrap();
        let p = builtin_palette(PaletteName::B, m.metric().clone(), &PaletteParams::default()).unwrap();
        let rep = p.check_axioms(&[probe], &AxiomOptions::default()).unwrap();
        let a1 = rep.axiom(1).unwrap();
        assert!(!a1.passed);
        assert!(a1.failures[0].detail.contains("recession"));
    }

    #[test]
    fn strongness() {
        let m = build_trig_model("t", 2, 4, 64).unwrap();
        let bs = builtin_palette(PaletteName::BS { s: 2.0 }, m.metric().clone(), &PaletteParams::default()).unwrap();
        assert!(bs.is_strong().unwrap().strong);
        let fc = builtin_palette(PaletteName::FC, m.metric().clone(), &PaletteParams::default()).unwrap();
        let rep = fc.is_strong().unwrap();
        assert!(rep.strong);
        assert!(rep.levels.last().unwrap().halvings.unwrap() > 0);
    }

    #[test]
    fn wide_bodies_are_not_strong() {
        // Seminorms of e_0 are all 1, so d(t e_0) = W φ(t) with W = 1.875.
        let m = build_sequence_model("q", 2, polynomial_weights(2, 3)).unwrap();
        let seg = ConvexBody::segment(m.metric(), dvector![0.6, 0.0]).unwrap();
        let p = PaletteFamily::custom(m.metric().clone(), vec![seg.clone()], ClosureFlags::default(), None, 0).unwrap();
        let w: f64 = m.metric().config().weights.iter().sum();
        assert!(p.geometry().diameter_bound(&BodySet::of(&seg)) >= 1.0 || w * 1.2 / 2.2 >= 1.0);
        let rep = p.is_strong().unwrap();
        assert!(!rep.strong);
        assert_eq!(rep.first_failure, Some(1));
    }

    #[test]
    fn span_surrogate_detects_flat_families() {
        let m = build_normed_model("n", 3, true).unwrap();
        let gens = vec![ConvexBody::segment(m.metric(), dvector![1.0, 0.0, 0.0]).unwrap()];
        let p = PaletteFamily::custom(m.metric().clone(), gens, ClosureFlags::all(), None, 0).unwrap();
        let rep = p.check_axioms(&[], &AxiomOptions::default()).unwrap();
        assert!(!rep.axiom(5).unwrap().passed);
    }
}
