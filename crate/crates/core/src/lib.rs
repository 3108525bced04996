// Negated float comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod numerics;
pub mod model;
pub mod riemann;
pub mod twophase;
pub mod fronts;
pub mod entropy;
pub mod conservation;
pub mod gvp;
pub mod scenario;
