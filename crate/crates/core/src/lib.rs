#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod kernel;
pub mod laplace;
pub mod mc;
pub mod par;
pub mod potentials;
pub mod quad;
pub mod report;
pub mod special;
pub mod subordination;
pub mod trajectory;

pub use density::{Clock, DensityMethod, GEvaluator};
pub use error::{Error, Result};
pub use kernel::{make_triple, BernsteinTriple, KernelSpec, TimeChange};
pub use par::Exec;
