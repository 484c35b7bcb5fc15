//! Symbolic variational calculus on finite-order jet spaces.
//!
//! The crate computes Euler–Lagrange source forms, Helmholtz obstructions,
//! vertical differentials of the Euler–Lagrange morphism with their formal
//! adjoints and iterated quotient variations of Lagrangians of any order in
//! any number of independent and dependent variables. The [`numeric`] module
//! checks the symbolic results against finite-difference variations of the
//! action integral along closed-form sections.

pub mod expr;
pub mod jetcalc;
pub mod multiindex;
pub mod numeric;
pub mod textio;
pub mod variational;

pub use expr::{Coord, ElemFn, Expr, JetContext, JetVar};
pub use jetcalc::VerticalField;
pub use multiindex::MultiIndex;
pub use variational::{BilinearForm, Lagrangian, SourceForm};
