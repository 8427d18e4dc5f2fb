//! Concrete model spaces and the explicit counterexample gadgets.

mod extension;
mod jet;
mod models;
mod step_full;
mod unbounded;

pub use extension::{dominated_extension, Extension, ExtensionOptions, ExtensionRoute, Sublinear};
pub use jet::{prescribed_jet, JetCondition, JetFunction, JetOptions, JetTerm};
pub use models::{
    build_euclidean_sequence_model, build_normed_model, build_scalar_model, build_scalar_sqrt_model,
    build_sequence_model, build_trig_model, level_blind_weights, multiplication_operator, polynomial_weights,
    product_weights, ModelKind, ModelSpace, NORMED_DYADIC_TOP,
};
pub use step_full::{sin_n_ratio, step_full_witness, BracketLevel, StepFullReport};
pub use unbounded::{eval_discontinuity_gadget, unbounded_functional, DiscontinuityGadget, GadgetRung, LadderRung, UnboundedFunctional};
