pub mod chc;
pub mod emit;
pub mod generate;
pub mod primitives;

pub use chc::{context_param, Atom, ChcSystem, Head, HornClause, NU};
pub use emit::emit_smtlib2_horn;
pub use generate::generate_chc;
