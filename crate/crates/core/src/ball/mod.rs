//! Certified real and complex interval arithmetic on top of `num-bigint`.

mod complex;
mod float;
mod funcs;
mod mag;
mod real;

pub use complex::{ComplexBall, ComplexBox};
pub use float::Float;
pub use funcs::{exp, exp_2pi_i, sin_cos, Consts};
pub use mag::Mag;
pub use real::Ball;
