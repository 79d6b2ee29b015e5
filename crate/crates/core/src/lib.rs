//! Certification of ergodicity for one-dimensional Lévy-type processes.
//!
//! The crate decides whether a process with generator
//!
//! ```text
//! L f(x) = a(x) f'(x) + ∫ ( f(x+u) - f(x) - f'(x) u 1{|u|<=1} ) ν(x, du)
//! ```
//!
//! (symmetric jump kernel `ν`, inward drift `a`) admits a Foster-Lyapunov
//! drift condition `L V <= C - f(V)`, and turns a successful certificate
//! into an explicit convergence-rate function for the total-variation
//! distance to the invariant law.
//!
//! Pipeline, bottom to top:
//!
//! * [`quad`]: adaptive Gauss-Kronrod quadrature with singular and
//!   oscillatory tail handling; everything numeric sits on top of it.
//! * [`series`]: generalized binomial series used by the closed-form case
//!   constants and the stable tail corrections.
//! * [`kernel`]: jump-kernel families, their tail/moment functionals and
//!   the empirical tail-index sandwich constants.
//! * [`generator`]: smoothed norm-like Lyapunov functions and numerical
//!   application of the generator to test functions.
//! * [`certificates`]: the drift-condition checks themselves, their case
//!   constants, and the rate corollaries they license.
//! * [`rates`]: the rate calculus `f -> F -> F^{-1} -> ψ` in closed form
//!   and via numeric fallback.
//! * [`simulator`]: the frozen-coefficient approximating Markov chain with
//!   small-jump Gaussian substitution.
//! * [`diagnostics`]: empirical total-variation curves and their
//!   comparison against certified rates.
//!
//! The crate is `no_std` (with `alloc`); all I/O lives in companion
//! crates.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod certificates;
pub mod diagnostics;
pub mod generator;
pub mod grid;
pub mod kernel;
pub mod quad;
pub mod rates;
pub mod series;
pub mod simulator;
pub mod stats;
