//! Continued-fraction machinery for sqrt(N): period detection, convergents,
//! the attached quadratic-form sequences, sum-of-two-squares and midpoint
//! factor extraction, the reduced-form infrastructure with distances, and
//! Dirichlet evaluation of the class-number/regulator product — assembled
//! into an integer factoring pipeline.

pub mod analytic;
pub mod arith;
pub mod cf;
pub mod factor;
pub mod forms;
pub mod real;
pub mod infra;
pub mod repr;
pub mod verify;
