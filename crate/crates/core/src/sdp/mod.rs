//! Semi-definite programming: a dense interior-point solver, a complex LMI
//! builder, and the Fisher-information and fidelity programs built on them.

pub mod lmi;
pub mod programs;
pub mod seesaw;
pub mod solver;

pub use programs::{
    geo_fidelity_channel_sdp, rld_channel_sdp, rld_state_sdp, root_fidelity_channel_sdp, sld_state_sdp, SdpValue,
};
pub use seesaw::{sld_channel_seesaw, SeesawResult};
pub use solver::{solve, SdpProblem, SdpSolution, SdpStatus, SolverOptions};
