//! Eavesdropper guessing probability and entropic key rates for qubit QKD
//! protocols over Bell-diagonal states.
//!
//! Alice and Bob share a Bell-diagonal state whose spectrum is constrained by
//! the error rates they observe along `t` measuring directions. Eve holds a
//! purification of that state in a `2t`-dimensional space. This crate
//! computes:
//!
//! * Bob's guessing probability `P_B` and Eve's maximal guessing probability
//!   `P_E*` (optimized over her measurement basis and the unconstrained part
//!   of the spectrum);
//! * the entropic key rate `R = max{I_AB - H(p) - max chi_AE, 0}`;
//! * the critical error rates at which `P_B = P_E*` and `R = 0`.

pub mod analysis;
pub mod error;
pub mod guessing;
pub mod keyrate;
pub mod linalg;
pub mod protocol;
pub mod sampling;
pub mod states;

pub use error::{Error, Result};
pub use guessing::{
    build_purification, closed_form_pe_bb84, closed_form_pe_sixstate, guessing_probability, maximize_guessing,
    optimal_v_bb84, optimal_v_sixstate, EveBasis, GuessResult, OptimizerOptions, Purification,
};
pub use keyrate::{secure_key_rate, EntropyReport};
pub use protocol::{standard_bb84, standard_sixstate, ProtocolClass, ProtocolConfig, SpectrumFamily};
pub use states::{BellSpectrum, Direction, Sign};
