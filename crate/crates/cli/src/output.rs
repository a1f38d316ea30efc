use std::io::{self, Write};
use std::path::Path;

use eveguess::analysis::{EntropyCrossing, GuessingCrossing};
use eveguess::{Error, GuessResult};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use tempfile::NamedTempFile;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Failure {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] Error),

    #[error("i/o: {0}")]
    Io(#[from] io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Core(Error::InfeasibleRates(_) | Error::NoCrossing(_) | Error::Domain(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PestarRecord {
    pub p_e_star: f64,
    pub converged: bool,
    pub starts_used: usize,
    pub seed: u64,
    pub best_lambda3: Option<f64>,
    pub lambda0: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
}

impl PestarRecord {
    pub fn new(r: &GuessResult, seed: u64) -> Self {
        let [lambda0, lambda1, lambda2, lambda3] = r.spectrum.lambda();
        Self {
            p_e_star: r.p_e_star,
            converged: r.converged,
            starts_used: r.starts_used,
            seed,
            best_lambda3: r.best_lambda3,
            lambda0,
            lambda1,
            lambda2,
            lambda3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalRecord {
    pub eps_cr: f64,
    pub pe_star: f64,
    pub guessing_residual: f64,
    pub closed_form: bool,
    pub eps_tilde_cr: f64,
    pub entropy_residual: f64,
    pub delta_eps: f64,
}

impl CriticalRecord {
    pub fn new(g: &GuessingCrossing, e: &EntropyCrossing) -> Self {
        Self {
            eps_cr: g.eps,
            pe_star: g.pe_star,
            guessing_residual: g.residual,
            closed_form: g.closed_form,
            eps_tilde_cr: e.eps,
            entropy_residual: e.residual,
            delta_eps: g.eps - e.eps,
        }
    }
}

/// One table row with the values exactly as printed in the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub phi1: f64,
    pub eps_cr_pct: f64,
    pub eps_tilde_cr_pct: f64,
    pub delta_eps_pct: f64,
    pub pe_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOutput {
    pub seed: u64,
    pub starts: u64,
    pub rows: Vec<TableRow>,
}

impl TableOutput {
    pub fn from_csv(csv: &[u8], seed: u64, starts: u64) -> Result<Self, Failure> {
        Ok(Self { seed, starts, rows: read_csv(csv)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub p_b: f64,
    pub p_e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterOutput {
    pub seed: u64,
    pub points: Vec<ScatterRow>,
}

impl ScatterOutput {
    pub fn from_csv(csv: &[u8], seed: u64) -> Result<Self, Failure> {
        Ok(Self { seed, points: read_csv(csv)? })
    }
}

/// Parses CSV bytes with a header row into records.
pub fn read_csv<T: DeserializeOwned>(bytes: &[u8]) -> Result<Vec<T>, Failure> {
    Ok(csv::Reader::from_reader(bytes).deserialize().collect::<Result<_, _>>()?)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// A single record as a header plus one CSV row, or as a JSON object.
pub fn emit_record<T: Serialize>(record: &T, out: &str, json: bool) -> Result<(), Failure> {
    let bytes = if json {
        to_json(record)?
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(record)?;
        w.into_inner().map_err(|e| e.into_error())?
    };
    write_atomic(out, &bytes)
}

/// Writes to standard output for `-`; otherwise to a temporary file in the
/// target directory that is renamed into place, so a failed run never
/// leaves a partial file.
pub fn write_atomic(out: &str, bytes: &[u8]) -> Result<(), Failure> {
    if out == "-" {
        let mut stdout = io::stdout().lock();
        stdout.write_all(bytes)?;
        stdout.flush()?;
        return Ok(());
    }
    let path = Path::new(out);
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
