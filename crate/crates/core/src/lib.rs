// `!(x > 0.0)` style checks reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod async_parareal;
pub mod engine;
pub mod experiment;
pub mod linalg;
pub mod model;
pub mod sync;
