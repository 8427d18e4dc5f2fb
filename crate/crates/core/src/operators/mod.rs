//! Graded operators: norms, tameness certificates, divergence scans, the
//! operator metric, K-set membership and the evaluation modulus.

mod certificate;
mod kset;
mod modulus;
mod norm;
mod probe;
mod scan;
mod trb;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graded_space::{FrechetMetric, GradedVector};
use crate::rng;

pub use certificate::{certify_tame, compose_certified, normalize_basis, CertificateOrigin, RecheckReport, TamenessCertificate};
pub use kset::{hausdorff_witness, kj_membership, HausdorffWitness, KMembership, KSetSpec, Thresholds};
pub use modulus::{eval_modulus, ModulusOptions, ModulusReport};
pub use norm::{dyadic_table, hamilton_ratio, DyadicTable, OpNorm};
pub use probe::{nonlinear_tameness_probe, ProbeForm, ProbeOptions, ProbeResult};
pub use scan::{nontameness_scan, DivergenceEvidence, ScanPoint, Verdict, DIVERGENCE_SLOPE};
pub use trb::trb_metric;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormVariant {
    /// `sup_{‖v‖_m ≤ 1} ‖A v‖_n`.
    Hamilton,
    /// `μ_n(A(c(m)))`.
    Dyadic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    ExactEuclidean,
    ExactWeightedMax,
    Sampled,
}

impl Backend {
    pub fn is_exact(self) -> bool {
        !matches!(self, Backend::Sampled)
    }

    /// The weaker of two backends, used when combining certificates.
    pub fn join(self, other: Backend) -> Backend {
        if self == other {
            self
        } else if self.is_exact() && other.is_exact() {
            Backend::ExactEuclidean
        } else {
            Backend::Sampled
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormOptions {
    pub seed: u64,
    /// Random candidates for the sampled hamilton backend.
    pub samples: usize,
    pub ascent_starts: usize,
    pub ascent_steps: usize,
    /// Random directions (on top of the basis) for the dyadic variant.
    pub directions: usize,
    /// Extra caller-supplied directions, used by both variants.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_directions: Vec<Vec<f64>>,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self { seed: 0, samples: 128, ascent_starts: 4, ascent_steps: 40, directions: 48, extra_directions: Vec::new() }
    }
}

impl NormOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

/// A linear map between two truncated graded spaces, stored as a
/// `target_dim × source_dim` matrix.
#[derive(Clone, Debug)]
pub struct GradedOperator {
    matrix: DMatrix<f64>,
    source: Arc<FrechetMetric>,
    target: Arc<FrechetMetric>,
}

impl GradedOperator {
    pub fn new(matrix: DMatrix<f64>, source: Arc<FrechetMetric>, target: Arc<FrechetMetric>) -> Result<Self> {
        if matrix.ncols() != source.dim() {
            return Err(Error::Dimension { expected: source.dim(), got: matrix.ncols() });
        }
        if matrix.nrows() != target.dim() {
            return Err(Error::Dimension { expected: target.dim(), got: matrix.nrows() });
        }
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("operator entries must be finite".into()));
        }
        Ok(Self { matrix, source, target })
    }

    pub fn identity(space: Arc<FrechetMetric>) -> Self {
        let d = space.dim();
        Self { matrix: DMatrix::identity(d, d), source: space.clone(), target: space }
    }

    pub fn zero(source: Arc<FrechetMetric>, target: Arc<FrechetMetric>) -> Self {
        Self { matrix: DMatrix::zeros(target.dim(), source.dim()), source, target }
    }

    /// Gaussian entries with standard deviation `scale`.
    pub fn random<R: Rng + ?Sized>(source: Arc<FrechetMetric>, target: Arc<FrechetMetric>, scale: f64, rng: &mut R) -> Self {
        let matrix = DMatrix::from_fn(target.dim(), source.dim(), |_, _| scale * rng::gaussian(rng));
        Self { matrix, source, target }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn source(&self) -> &Arc<FrechetMetric> {
        &self.source
    }

    pub fn target(&self) -> &Arc<FrechetMetric> {
        &self.target
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|x| *x == 0.0)
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    pub fn apply_vector(&self, v: &GradedVector) -> Result<GradedVector> {
        self.source.check(v)?;
        Ok(GradedVector { coords: self.apply(&v.coords), model_id: self.target.id().clone() })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { matrix: &self.matrix * s, source: self.source.clone(), target: self.target.clone() }
    }

    fn check_same_models(&self, other: &Self) -> Result<()> {
        if self.source.id() != other.source.id() {
            return Err(Error::ModelMismatch { left: self.source.id().0.clone(), right: other.source.id().0.clone() });
        }
        if self.target.id() != other.target.id() {
            return Err(Error::ModelMismatch { left: self.target.id().0.clone(), right: other.target.id().0.clone() });
        }
        Ok(())
    }

    /// `θ·self + (1 − θ)·other`.
    pub fn affine_combination(&self, other: &Self, theta: f64) -> Result<Self> {
        self.check_same_models(other)?;
        Ok(Self {
            matrix: &self.matrix * theta + &other.matrix * (1.0 - theta),
            source: self.source.clone(),
            target: self.target.clone(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_models(other)?;
        Ok(Self { matrix: &self.matrix - &other.matrix, source: self.source.clone(), target: self.target.clone() })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_models(other)?;
        Ok(Self { matrix: &self.matrix + &other.matrix, source: self.source.clone(), target: self.target.clone() })
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        if self.target.id() != next.source.id() {
            return Err(Error::ModelMismatch { left: self.target.id().0.clone(), right: next.source.id().0.clone() });
        }
        Ok(Self { matrix: &next.matrix * &self.matrix, source: self.source.clone(), target: next.target.clone() })
    }

    /// Hamilton norms for several `(m, n)` pairs, sharing one candidate set.
    pub fn hamilton_norms(&self, pairs: &[(usize, usize)], opts: &NormOptions) -> Result<Vec<OpNorm>> {
        norm::hamilton(self, pairs, opts)
    }

    /// Graded operator norm `‖A‖_{m,n}`.
    pub fn op_norm(&self, m: usize, n: usize, variant: NormVariant, opts: &NormOptions) -> Result<OpNorm> {
        match variant {
            NormVariant::Hamilton => norm::hamilton(self, &[(m, n)], opts).map(|mut v| v.remove(0)),
            NormVariant::Dyadic => norm::dyadic_single(self, m, n, opts),
        }
    }
}
