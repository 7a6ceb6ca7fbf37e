//! Shape inference and refinement type templates.

pub mod simple;
pub mod templates;

pub use simple::{infer_simple_types, SimpleType, SimpleTypeError, SimpleTypeMap};
pub use templates::{
    generate_templates, wf_link_constraints, OwnId, Owner, OwnershipLink, PointId, PointKind, PredId, PredicateSymbol,
    ProgramPoint, Step, TemplateEnv, TypeTemplate, RESULT,
};
