//! Critical error rates, the four-state direction scan and Monte Carlo
//! scatter data, with their CSV encodings.

mod critical;
mod format;
mod scatter;
mod table;

pub use critical::{
    critical_eps_entropy, critical_eps_guessing, CriticalOptions, EntropyCrossing, GuessingCrossing,
};
pub use format::format_significant;
pub use scatter::{scatter, scatter_bound, write_scatter_csv, ScatterPoint, SCATTER_HEADER};
pub use table::{table1_scan, write_table_csv, CriticalReport, TABLE_HEADER};

pub use crate::sampling::{haar_unitary, random_spectrum, stream_rng};
