//! Deterministic numerical building blocks: adaptive quadrature and
//! bracketed monotone root finding.

pub mod quadrature;
pub mod root;

pub use quadrature::{integrate, integrate_fallible, Integral, QuadratureConfig};
pub use root::{expand_bracket, solve_increasing, RootOptions};
