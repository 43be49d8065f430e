//! Combinatorial core: permutation classes avoiding vincular patterns, their
//! generating trees, the walk encodings, coalescent-walk processes and the
//! Monte Carlo estimators built on top of them.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod coalescent;
pub mod error;
pub mod gentree;
pub mod limit_sim;
pub mod perm;
pub mod permuton;
pub mod seed;
pub mod walks;

mod float;

pub use error::Error;
pub use perm::{Family, Permutation};

pub type Result<T> = core::result::Result<T, Error>;
