//! Euler's collinear three-body solutions, the Lagrange points of two
//! primaries, and the equilibria of a massless fourth body added to an Euler
//! solution.

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod el_points;
pub mod euler_family;
pub mod lagrange;
pub mod numerics;
pub mod verify;

pub use el_points::{find_el_points, ElClass, ElPoint, ElSet};
pub use euler_family::{build_solution, eval_f, eval_f_inverse, eval_p, EulerSolution};
pub use lagrange::{lagrange_points, LagrangeSet};
