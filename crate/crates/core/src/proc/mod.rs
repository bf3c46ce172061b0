//! The timed process language: terms, typing, and object-level dynamics.

mod dynamics;
mod term;
mod typing;

pub use dynamics::{closed_obj, TimedLang};
pub use term::{Subst, Sym, Term};
pub use typing::{
    check_derivation, typecheck, validate_derivation, CheckError, Ctx, Derivation, Judgment, Rule, TypeError,
};
