//! Boxes, φ-types, equality types, shatter functions, VC-type dimensions,
//! trace families and equality-indiscernible extraction.

mod boxes;
mod eqtype;
mod indiscernible;
mod setsystem;
mod trace;
mod vcstar;

pub use boxes::{canonical_boxes, phi_type_of, realized_types, shatters_box, BoxJson, ParamBox, PhiType};
pub use eqtype::{equality_types, EqualityType, Slot};
pub use indiscernible::{
    equality_type_over_empty, extract_indiscernible, extraction_report, indiscernible_size_bound,
    is_equality_indiscernible, Extraction, ExtractionPath,
};
pub use setsystem::{
    composition_max, compositions, find_shattered_box, point_tuple, product_shatter_function, shatter_function,
    vc_dimension, vc_ell_dimension, SetBox, SetSystem,
};
pub use trace::{trace_family, TraceFamily};
pub use vcstar::{arrangement, vc_ell_at_least, vc_star_at_least, Realization, VcStarWitness};
