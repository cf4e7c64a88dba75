//! Metastable convergence bounds.
//!
//! Continuous functionals over `ℕ → ℕ` are described by a small expression
//! language ([`functional`]). The [`engine`] turns such a functional into an
//! explicit bound by recursing along the tree of sequences that do not yet
//! determine its value. [`measure`] decides the hypotheses and conclusions of
//! the bound exactly on finite probability spaces, [`derived`] builds the
//! Egorov, dominated-convergence and `L^p` variants on top of the engine, and
//! [`modes`] classifies the convergence modes on the built-in counterexample
//! families. [`campaign`] drives seeded verification runs over all of it.

pub mod campaign;
pub mod derived;
pub mod engine;
pub mod functional;
pub mod measure;
pub mod modes;
pub mod num;

pub use engine::{compute_bound, n_sigma, BoundTrace, Budget, WeightSchedule};
pub use functional::{Expr, Functional};
pub use measure::{FiniteProbSpace, FuncSeq, PointSet, SetSeq};
pub use num::{Nat, Rational};
