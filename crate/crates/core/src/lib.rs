//! Satisfiability solver, model checker and certificate toolchain for
//! coalgebraic fixpoint logics.
//!
//! The solver decides guarded formulas of the modal mu-calculus over five
//! built-in model classes (Kripke frames, multigraphs, Markov chains, game
//! frames, monotone neighbourhood frames) by reduction to a parity game, and
//! emits independently checkable certificates: finite coalgebra models for
//! satisfiable inputs and closed tableaux for unsatisfiable ones.

pub mod bits;
pub mod cert;
pub mod closure;
pub mod extract;
pub mod formula;
pub mod gen;
pub mod logic;
pub mod lp;
pub mod model_json;
pub mod onestep;
pub mod parse;
pub mod pgame;
pub mod semantics;
pub mod sequent;
pub mod session;
pub mod tabgame;
pub mod trace;

pub use closure::{Closure, FormulaId, PriorityMap};
pub use formula::{check_clean, check_clean_guarded, check_guarded, rename_apart, FixKind, Formula, FormulaKind};
pub use logic::{AgentSet, Logic, Modality, Rational};
pub use parse::{parse, ParseError};
pub use sequent::Sequent;
