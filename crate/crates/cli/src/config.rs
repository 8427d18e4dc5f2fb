//! Run configuration: schema, loading and validation.

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tame_core::operators::NormVariant;
use tame_core::palettes::{PaletteName, PaletteParams};
use tame_core::witnesses::JetCondition;

pub const SUPPORTED_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub version: u32,
    /// Default seed for every task without its own.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default)]
    pub models: Vec<ModelSpec>,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Largest accepted relative width of a two-sided bracket.
    pub bracket: f64,
    /// Sampled directions used to recheck certificates.
    pub recheck_samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { bracket: 1e-6, recheck_samples: 64 }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputSpec {
    pub dir: Option<PathBuf>,
    pub format: Format,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub id: String,
    #[serde(flatten)]
    pub kind: ModelKindSpec,
}

fn default_grid() -> usize {
    256
}

fn one() -> usize {
    1
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightFamily {
    /// `(1 + k)^n`
    #[default]
    Polynomial,
    /// Coordinate `k` visible from level `k` on.
    Product,
    /// The same weights at every level.
    LevelBlind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKindSpec {
    Trig {
        modes: usize,
        levels: usize,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    Sequence {
        dim: usize,
        levels: usize,
        #[serde(default)]
        weights: WeightFamily,
        #[serde(default)]
        euclidean: bool,
    },
    Scalar {
        levels: usize,
    },
    ScalarSqrt,
    Normed {
        dim: usize,
        #[serde(default)]
        euclidean: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub id: String,
    #[serde(flatten)]
    pub expr: OperatorExpr,
}

/// The builtin operator algebra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OperatorExpr {
    Derivative {
        model: String,
        #[serde(default = "one")]
        order: usize,
    },
    Identity {
        model: String,
    },
    Zero {
        source: String,
        target: String,
    },
    Diagonal {
        model: String,
        entries: Vec<f64>,
    },
    Matrix {
        source: String,
        target: String,
        rows: Vec<Vec<f64>>,
    },
    /// Multiplication by the trigonometric polynomial with the given
    /// coefficients; defines the wider target model `target`.
    Multiply {
        model: String,
        coefficients: Vec<f64>,
        target: String,
    },
    Scale {
        of: String,
        factor: f64,
    },
    Sum {
        of: Vec<String>,
    },
    /// Applied left to right: `[a, b]` is `b ∘ a`.
    Compose {
        of: Vec<String>,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    /// The task contract must hold.
    #[default]
    Pass,
    /// The contract is expected to fail (an expected-negative task).
    Fail,
    /// A scan is expected to report a diverging fit.
    Diverging,
}

impl Expect {
    pub fn is_negative(self) -> bool {
        !matches!(self, Expect::Pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub expect: Expect,
    #[serde(flatten)]
    pub kind: TaskKind,
}

fn hamilton() -> NormVariant {
    NormVariant::Hamilton
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskKind {
    Certify {
        operator: String,
        r: usize,
        b: usize,
        #[serde(default = "hamilton")]
        variant: NormVariant,
    },
    /// Derivative constants along a ladder of trigonometric truncations.
    Scan {
        #[serde(default = "one")]
        order: usize,
        r: usize,
        #[serde(default)]
        level: usize,
        ladder: Vec<usize>,
        levels: usize,
        #[serde(default = "default_grid")]
        grid: usize,
    },
    Norm {
        operator: String,
        m: usize,
        n: usize,
        #[serde(default = "hamilton")]
        variant: NormVariant,
    },
    Metric {
        left: String,
        right: String,
        r: usize,
        basis: usize,
    },
    Palette {
        model: String,
        palette: String,
        #[serde(default)]
        params: PaletteParams,
        #[serde(default)]
        probes: Vec<String>,
        #[serde(default)]
        strong: Option<bool>,
    },
    Witness {
        witness: WitnessSpec,
    },
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Certify { .. } => "certify",
            TaskKind::Scan { .. } => "scan",
            TaskKind::Norm { .. } => "norm",
            TaskKind::Metric { .. } => "metric",
            TaskKind::Palette { .. } => "palette",
            TaskKind::Witness { .. } => "witness",
        }
    }
}

fn default_lo() -> f64 {
    -8.0
}

fn default_hi() -> f64 {
    4.0
}

fn default_count() -> usize {
    49
}

fn hundred() -> usize {
    100
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum WitnessSpec {
    StepFull {
        model: String,
        s: f64,
    },
    Strictness {
        model: String,
        coords: Vec<f64>,
        #[serde(default = "default_lo")]
        lo: f64,
        #[serde(default = "default_hi")]
        hi: f64,
        #[serde(default = "default_count")]
        count: usize,
    },
    UnboundedFunctional {
        model: String,
        eps: f64,
        terms: usize,
    },
    Gadget {
        model: String,
        length: usize,
    },
    Jet {
        conditions: Vec<JetCondition>,
        #[serde(default)]
        smallness: bool,
    },
    Extension {
        model: String,
        w: Vec<f64>,
        c: f64,
        /// `(level, scale)` terms of the dominating sublinear functional.
        terms: Vec<(usize, f64)>,
    },
    Modulus {
        operator: String,
        r: usize,
        b: usize,
        n: usize,
        #[serde(default = "hundred")]
        operators: usize,
        #[serde(default = "hundred")]
        vectors: usize,
    },
    Hausdorff {
        operator: String,
    },
    Kset {
        operator: String,
        j: usize,
    },
}

impl WitnessSpec {
    pub fn name(&self) -> &'static str {
        match self {
            WitnessSpec::StepFull { .. } => "step_full",
            WitnessSpec::Strictness { .. } => "strictness",
            WitnessSpec::UnboundedFunctional { .. } => "unbounded_functional",
            WitnessSpec::Gadget { .. } => "gadget",
            WitnessSpec::Jet { .. } => "jet",
            WitnessSpec::Extension { .. } => "extension",
            WitnessSpec::Modulus { .. } => "modulus",
            WitnessSpec::Hausdorff { .. } => "hausdorff",
            WitnessSpec::Kset { .. } => "kset",
        }
    }

    fn model_refs(&self) -> Vec<&str> {
        match self {
            WitnessSpec::StepFull { model, .. }
            | WitnessSpec::Strictness { model, .. }
            | WitnessSpec::UnboundedFunctional { model, .. }
            | WitnessSpec::Gadget { model, .. }
            | WitnessSpec::Extension { model, .. } => vec![model],
            _ => Vec::new(),
        }
    }

    fn operator_refs(&self) -> Vec<&str> {
        match self {
            WitnessSpec::Modulus { operator, .. } | WitnessSpec::Hausdorff { operator } | WitnessSpec::Kset { operator, .. } => {
                vec![operator]
            }
            _ => Vec::new(),
        }
    }
}

/// All problems found in a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigErrors> {
    load_config_with(path, None)
}

/// As [`load_config`], with `seed` replacing the top-level seed before validation.
pub fn load_config_with(path: &Path, seed: Option<u64>) -> Result<RunConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigErrors(vec![format!("{}: {e}", path.display())]))?;
    parse_config_with(&text, seed)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigErrors> {
    parse_config_with(text, None)
}

pub fn parse_config_with(text: &str, seed: Option<u64>) -> Result<RunConfig, ConfigErrors> {
    let raw: toml::Value = toml::from_str(text).map_err(|e| ConfigErrors(vec![format!("syntax: {e}")]))?;
    match raw.get("version").and_then(|v| v.as_integer()) {
        Some(v) if v == SUPPORTED_VERSION as i64 => {}
        Some(v) => return Err(ConfigErrors(vec![format!("unsupported config version {v} (expected {SUPPORTED_VERSION})")])),
        None => return Err(ConfigErrors(vec!["missing integer `version`".into()])),
    }
    let mut cfg: RunConfig = raw.try_into().map_err(|e: toml::de::Error| ConfigErrors(vec![format!("schema: {e}")]))?;
    if seed.is_some() {
        cfg.seed = seed;
    }
    let errors = validate(&cfg);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(errors))
    }
}

/// Reference, uniqueness, seed and parameter checks, collecting every error.
pub fn validate(cfg: &RunConfig) -> Vec<String> {
    let mut errors = Vec::new();
    let mut models: HashSet<&str> = HashSet::new();
    for m in &cfg.models {
        if !models.insert(&m.id) {
            errors.push(format!("duplicate model id `{}`", m.id));
        }
        match &m.kind {
            ModelKindSpec::Trig { modes, grid, .. } if *modes == 0 || *grid < 2 * modes + 1 => {
                errors.push(format!("model `{}`: trig needs modes ≥ 1 and grid ≥ 2·modes + 1", m.id));
            }
            ModelKindSpec::Sequence { dim: 0, .. } | ModelKindSpec::Normed { dim: 0, .. } => {
                errors.push(format!("model `{}`: dimension must be positive", m.id));
            }
            _ => {}
        }
    }

    let mut operators: HashSet<&str> = HashSet::new();
    for op in &cfg.operators {
        let need_model = |id: &str, errors: &mut Vec<String>| {
            if !models.contains(id) {
                errors.push(format!("operator `{}` references undefined model `{id}`", op.id));
            }
        };
        match &op.expr {
            OperatorExpr::Derivative { model, .. } | OperatorExpr::Identity { model } | OperatorExpr::Diagonal { model, .. } => {
                need_model(model, &mut errors)
            }
            OperatorExpr::Zero { source, target } | OperatorExpr::Matrix { source, target, .. } => {
                need_model(source, &mut errors);
                need_model(target, &mut errors);
            }
            OperatorExpr::Multiply { model, target, .. } => {
                need_model(model, &mut errors);
                if !models.insert(target) {
                    errors.push(format!("operator `{}` redefines model `{target}`", op.id));
                }
            }
            OperatorExpr::Scale { of, factor } => {
                if !operators.contains(of.as_str()) {
                    errors.push(format!("operator `{}` references undefined operator `{of}`", op.id));
                }
                if !factor.is_finite() {
                    errors.push(format!("operator `{}`: factor must be finite", op.id));
                }
            }
            OperatorExpr::Sum { of } | OperatorExpr::Compose { of } => {
                if of.is_empty() {
                    errors.push(format!("operator `{}`: empty operand list", op.id));
                }
                for o in of {
                    if !operators.contains(o.as_str()) {
                        errors.push(format!("operator `{}` references undefined operator `{o}`", op.id));
                    }
                }
            }
        }
        if !operators.insert(&op.id) {
            errors.push(format!("duplicate operator id `{}`", op.id));
        }
    }

    let mut tasks: HashSet<&str> = HashSet::new();
    for t in &cfg.tasks {
        if !tasks.insert(&t.id) {
            errors.push(format!("duplicate task id `{}`", t.id));
        }
        if t.seed.or(cfg.seed).is_none() {
            errors.push(format!("task `{}` has no seed and no top-level seed is set", t.id));
        }
        let mut need_op = |id: &str| {
            if !operators.contains(id) {
                errors.push(format!("task `{}` references undefined operator `{id}`", t.id));
            }
        };
        match &t.kind {
            TaskKind::Certify { operator, .. } | TaskKind::Norm { operator, .. } => need_op(operator),
            TaskKind::Metric { left, right, .. } => {
                need_op(left);
                need_op(right);
            }
            TaskKind::Palette { probes, .. } => {
                for p in probes {
                    need_op(p);
                }
            }
            TaskKind::Witness { witness } => {
                for o in witness.operator_refs() {
                    need_op(o);
                }
            }
            TaskKind::Scan { .. } => {}
        }
        let model_refs: Vec<&str> = match &t.kind {
            TaskKind::Palette { model, .. } => vec![model],
            TaskKind::Witness { witness } => witness.model_refs(),
            _ => Vec::new(),
        };
        for m in model_refs {
            if !models.contains(m) {
                errors.push(format!("task `{}` references undefined model `{m}`", t.id));
            }
        }
        if let TaskKind::Palette { palette, .. } = &t.kind {
            if let Err(e) = palette.parse::<PaletteName>() {
                errors.push(format!("task `{}`: {e}", t.id));
            }
        }
        if let TaskKind::Scan { ladder, .. } = &t.kind {
            if ladder.len() < 3 || ladder.windows(2).any(|w| w[1] <= w[0]) {
                errors.push(format!("task `{}`: ladder must be increasing with at least 3 entries", t.id));
            }
        }
    }
    if !(cfg.tolerances.bracket.is_finite() && cfg.tolerances.bracket >= 0.0) {
        errors.push("tolerances.bracket must be a nonnegative real".into());
    }
    errors
}
