//! Numerical toolkit for restriction norms of GL(n+1) Maass forms: Langlands
//! parameters, the piecewise-linear exponent, gamma weights, the interlacing
//! polytope, the bounded-sum integrals, and the zeta second moment.

pub mod calibration;
pub mod check;
pub mod exponent;
pub mod gamma_weight;
pub mod golden;
pub mod integrals;
pub mod numeric;
pub mod params;
pub mod polytope;
pub mod quadrature;
pub mod second_moment;
pub mod special;
pub mod verify;
pub mod zeta;
