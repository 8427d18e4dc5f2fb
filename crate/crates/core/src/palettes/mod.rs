//! Palette families of bodies, their axioms and strongness, and the oracles
//! of the associated topologies on spaces of linear maps.
//!
//! Everything is evaluated at truncation: closure under the palette
//! operations is checked pairwise, and density of the union of a palette is
//! replaced by the union of its generators spanning the coordinate space.

mod body;
mod family;
mod oracles;

pub use body::{hull_tol, BodyKind, BodySet, ConvexBody, Geometry, ImageSups, HULL_TOL, RAY_CAP};
pub use family::{
    builtin_palette, class_holds, AxiomFailure, AxiomOptions, AxiomReport, AxiomResult, ClosureFlags, PaletteClass,
    PaletteFamily, PaletteName, PaletteParams, StrongLevel, StrongReport, MAX_HALVINGS,
};
pub use oracles::{
    aa_box, absorption_index, is_tame_set, maps_into, polytope_contains, AbsorptionReport, BoxReport, MapsInto,
    MapsIntoMethod, MapsIntoOptions, TameKind, TameReport, MAX_DOUBLINGS,
};
