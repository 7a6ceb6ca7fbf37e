//! Fractional-ownership refinement type inference for a small imperative
//! language with mutable references, plus a reference interpreter.

pub mod backends;
pub mod frontend;
pub mod ownership;
pub mod pipeline;
pub mod refinement;
pub mod semantics;
pub mod smtlib;
pub mod typing;
