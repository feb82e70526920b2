//! Exact verification and synthesis of point games for quantum weak coin flipping.
//!
//! The game layer (`points`, `games`, `ladders`) is exact over the rationals.
//! The protocol layer (`compiler`, `ddb`, `seesaw`) works in double precision
//! with explicit slacks.

pub mod error;
pub mod exactmath;
pub mod compiler;
pub mod games;
pub mod ddb;
pub mod ladders;

pub use error::{Error, Result};
pub mod points;
pub mod seesaw;
