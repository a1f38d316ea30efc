//! Output records and file handling behind the `eveguess` binary.

pub mod output;
