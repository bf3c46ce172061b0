//! Timed multiparty-free session types over a nameless transition system:
//! trajectories, computable trajectories, a timed process language with a
//! checker, and a logical relation tying the two together.

pub mod beacon;
pub mod cli;
pub mod lts;
pub mod multiset;
pub mod proc;
pub mod semantics;
pub mod syntax;
pub mod time;
pub mod trajectory;
pub mod types;
