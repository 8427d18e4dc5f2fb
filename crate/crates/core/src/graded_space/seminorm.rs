use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::trig::TrigBasis;
use crate::error::{Error, Result};

/// One level of a grading tower, before monotonization.
#[derive(Clone, Debug)]
pub enum Seminorm {
    /// `sqrt(vᵀ Q v)` for a positive-semidefinite form `Q`.
    WeightedEuclidean { form: DMatrix<f64> },
    /// `max_k w_k |v_k|` with `w_k ≥ 0`.
    WeightedMax { weights: DVector<f64> },
    /// `sup_{[0,1]} |f^{(order)}|` on a trigonometric model.
    SupDerivative { basis: Arc<TrigBasis>, order: usize },
}

impl Seminorm {
    pub fn dim(&self) -> usize {
        match self {
            Seminorm::WeightedEuclidean { form } => form.nrows(),
            Seminorm::WeightedMax { weights } => weights.len(),
            Seminorm::SupDerivative { basis, .. } => basis.dim(),
        }
    }

    pub fn eval(&self, v: &DVector<f64>) -> f64 {
        match self {
            Seminorm::WeightedEuclidean { form } => (v.dot(&(form * v))).max(0.0).sqrt(),
            Seminorm::WeightedMax { weights } => weights
                .iter()
                .zip(v.iter())
                .fold(0.0f64, |m, (w, x)| m.max(w * x.abs())),
            Seminorm::SupDerivative { basis, order } => {
                let mut c = v.clone();
                for _ in 0..*order {
                    c = basis.differentiate(&c);
                }
                let d = basis.differentiate(&c);
                basis.sup_abs(&c, &d)
            }
        }
    }
}

/// A finite increasing tower `‖·‖_0 ≤ ‖·‖_1 ≤ … ≤ ‖·‖_N`.
///
/// With `monotonized` set, level `n` evaluates as `max_{k≤n}` of the raw
/// levels, which makes the tower increasing by construction.
#[derive(Clone, Debug)]
pub struct SeminormFamily {
    levels: Vec<Seminorm>,
    monotonized: bool,
}

impl SeminormFamily {
    pub fn new(levels: Vec<Seminorm>, monotonized: bool) -> Result<Self> {
        let Some(first) = levels.first() else {
            return Err(Error::InvalidParameter("seminorm tower needs at least one level".into()));
        };
        let dim = first.dim();
        for l in &levels {
            if l.dim() != dim {
                return Err(Error::Dimension { expected: dim, got: l.dim() });
            }
            match l {
                Seminorm::WeightedMax { weights } if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) => {
                    return Err(Error::InvalidParameter("weighted-max weights must be finite and ≥ 0".into()))
                }
                Seminorm::WeightedEuclidean { form } => {
                    if !form.is_square() || (form - form.transpose()).amax() > 1e-12 * form.amax().max(1.0) {
                        return Err(Error::InvalidParameter("Euclidean form must be symmetric".into()));
                    }
                    let eig = SymmetricEigen::new(form.clone());
                    if eig.eigenvalues.min() < -1e-10 * form.amax().max(1.0) {
                        return Err(Error::InvalidParameter("Euclidean form must be PSD".into()));
                    }
                }
                _ => {}
            }
        }
        Ok(Self { levels, monotonized })
    }

    /// The same weighted-max seminorm at every level.
    pub fn level_blind(weights: DVector<f64>, top: usize) -> Result<Self> {
        Self::new(vec![Seminorm::WeightedMax { weights }; top + 1], true)
    }

    pub fn dim(&self) -> usize {
        self.levels[0].dim()
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn monotonized(&self) -> bool {
        self.monotonized
    }

    pub fn raw_levels(&self) -> &[Seminorm] {
        &self.levels
    }

    pub fn eval(&self, v: &DVector<f64>, n: usize) -> f64 {
        if self.monotonized {
            self.levels[..=n].iter().fold(0.0f64, |m, l| m.max(l.eval(v)))
        } else {
            self.levels[n].eval(v)
        }
    }

    /// All levels `‖v‖_0..=‖v‖_N` in one pass.
    pub fn profile(&self, v: &DVector<f64>) -> Vec<f64> {
        if let Some(basis) = self.trig_basis_if_pure_sup() {
            // Successive derivatives are shared between levels.
            let mut out = Vec::with_capacity(self.levels.len());
            let mut c = v.clone();
            let mut d = basis.differentiate(&c);
            let mut running = 0.0f64;
            for (k, lvl) in self.levels.iter().enumerate() {
                let raw = match lvl {
                    Seminorm::SupDerivative { order, .. } if *order == k => basis.sup_abs(&c, &d),
                    other => other.eval(v),
                };
                running = if self.monotonized { running.max(raw) } else { raw };
                out.push(running);
                c = d;
                d = basis.differentiate(&c);
            }
            return out;
        }
        let mut running = 0.0f64;
        self.levels
            .iter()
            .map(|l| {
                let raw = l.eval(v);
                running = if self.monotonized { running.max(raw) } else { raw };
                running
            })
            .collect()
    }

    fn trig_basis_if_pure_sup(&self) -> Option<&Arc<TrigBasis>> {
        match &self.levels[0] {
            Seminorm::SupDerivative { basis, .. } => Some(basis),
            _ => None,
        }
    }

    /// Effective weights when level `n` reduces to a single weighted-max
    /// seminorm.
    pub fn effective_weighted_max(&self, n: usize) -> Option<DVector<f64>> {
        let range = if self.monotonized { 0..=n } else { n..=n };
        let mut acc: Option<DVector<f64>> = None;
        for l in &self.levels[range] {
            let Seminorm::WeightedMax { weights } = l else { return None };
            acc = Some(match acc {
                None => weights.clone(),
                Some(a) => a.zip_map(weights, f64::max),
            });
        }
        acc
    }

    /// Effective form when level `n` reduces to a single Euclidean form,
    /// i.e. the raw forms up to `n` are Loewner-ordered under monotonization.
    pub fn effective_euclidean(&self, n: usize) -> Option<DMatrix<f64>> {
        let form_at = |k: usize| match &self.levels[k] {
            Seminorm::WeightedEuclidean { form } => Some(form.clone()),
            _ => None,
        };
        let top = form_at(n)?;
        if self.monotonized {
            for k in 0..n {
                let lower = form_at(k)?;
                let diff = &top - &lower;
                let eig = SymmetricEigen::new(diff);
                if eig.eigenvalues.min() < -1e-10 * top.amax().max(1.0) {
                    return None;
                }
            }
        }
        Some(top)
    }

    /// Linear functionals `ℓ` with `max |ℓ(v)| ≤ ‖v‖_n` whose maximum
    /// reproduces the level on grid samples (sup-derivative levels) or exactly
    /// (weighted-max levels). `None` for Euclidean levels.
    pub fn dual_atoms(&self, n: usize) -> Option<Vec<DVector<f64>>> {
        let range = if self.monotonized { 0..=n } else { n..=n };
        let mut atoms = Vec::new();
        for l in &self.levels[range] {
            match l {
                Seminorm::WeightedMax { weights } => {
                    for (k, w) in weights.iter().enumerate() {
                        if *w > 0.0 {
                            let mut a = DVector::zeros(weights.len());
                            a[k] = *w;
                            atoms.push(a);
                        }
                    }
                }
                Seminorm::SupDerivative { basis, order } => {
                    let dm = basis.differentiation_matrix();
                    let mut power = DMatrix::identity(basis.dim(), basis.dim());
                    for _ in 0..*order {
                        power = &dm * power;
                    }
                    for &t in basis.grid() {
                        let e = basis.evaluation_functional(t);
                        atoms.push(power.transpose() * e);
                    }
                }
                Seminorm::WeightedEuclidean { .. } => return None,
            }
        }
        Some(atoms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dvector;

    #[test]
    fn monotonization_takes_running_max() {
        let fam = SeminormFamily::new(
            vec![
                Seminorm::WeightedMax { weights: dvector![2.0, 0.0] },
                Seminorm::WeightedMax { weights: dvector![1.0, 1.0] },
            ],
            true,
        )
        .unwrap();
        let v = dvector![1.0, 1.5];
        assert_eq!(fam.profile(&v), vec![2.0, 2.0]);
        assert_eq!(fam.effective_weighted_max(1).unwrap(), dvector![2.0, 1.0]);
    }

    #[test]
    fn loewner_ordered_forms_stay_euclidean() {
        let fam = SeminormFamily::new(
            vec![
                Seminorm::WeightedEuclidean { form: DMatrix::from_diagonal(&dvector![1.0, 1.0]) },
                Seminorm::WeightedEuclidean { form: DMatrix::from_diagonal(&dvector![1.0, 4.0]) },
                Seminorm::WeightedEuclidean { form: DMatrix::from_diagonal(&dvector![9.0, 0.5]) },
            ],
            true,
        )
        .unwrap();
        assert!(fam.effective_euclidean(1).is_some());
        assert!(fam.effective_euclidean(2).is_none());
    }

    #[test]
    fn rejects_indefinite_form() {
        let form = DMatrix::from_diagonal(&dvector![1.0, -1.0]);
        assert!(SeminormFamily::new(vec![Seminorm::WeightedEuclidean { form }], false).is_err());
    }
}
