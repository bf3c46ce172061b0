//! Bounded checking of the logical relation, closing environments, and
//! witnesses for well-typed terms.

mod canon;
mod compl;
mod ftlr;
mod relation;
mod run;

pub use canon::{canon_obj, canon_provider, parse_canon, Canon, CanonLang};
pub use compl::{apply_compl, ct_interleave_compl, related, split_compl, subst_of, ComplConfig};
pub use ftlr::{
    adequacy, backwards_closure, canonical_compl, close_judgment, closure_tests, default_valuation, forwards_closure,
    ftlr_witness, semantic_retype_test, Closed, FtlrError, Witness,
};
pub use relation::{split_at, CheckBudget, Checker, Mode, Verdict};
pub use run::{can_close, ct_run, schedule, simulate, Run, RunError, MAX_STEPS};
