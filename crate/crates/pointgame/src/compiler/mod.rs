//! Compilation of strictified point games into protocols with dual certificates.

mod cheat;
mod compile;
mod extract;
mod flags;
mod protocol;
mod realize;
mod sparse;

pub use cheat::{cheat_seesaw, Cheater};
pub use compile::{compile_tdpg, CompileOptions, Compiled, LineSummary, MAX_COMPILE_FRAMES, MAX_STATE_DIM};
pub use extract::{frame_distance, prob_extract, prob_extract_2d, ubp_to_tdpg, RecoveredGame, State, RECOVER_MAX_DEN};
pub use flags::projections_to_unitary;
pub use protocol::{honest_run, verify_ubp, ConstraintCheck, HonestRun, Protocol, Tolerances, Ubp, UbpHeader, UbpReport, UBP_SCHEMA};
pub use realize::{realize_transition, Branch, Realization, NUMERIC_ITERS, NUMERIC_RESTARTS, PSD_TOL, STATE_TOL};
pub use sparse::SparseMat;
