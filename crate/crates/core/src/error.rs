use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate network: {0}")]
    Degenerate(String),

    #[error("magnitude is zero; dB value would be -infinity")]
    ZeroMagnitude,

    #[error("DC analysis of a netlist with inductors is not supported")]
    UnsupportedDc,

    #[error("control voltage {vc} V outside [{lo}, {hi}] V")]
    ControlOutOfRange { vc: f64, lo: f64, hi: f64 },

    #[error("target {target_db} dB is unreachable: {reason}")]
    Unreachable { target_db: f64, reason: String },

    #[error("continuous unit cannot reach {target_db} dB at {freq_hz} Hz within its control range")]
    FetRange { target_db: f64, freq_hz: f64 },

    #[error("calibration table has no entry covering {target_db} dB")]
    MissingCalibration { target_db: f64 },

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("touchstone: {0}")]
    Touchstone(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn config(line: usize, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            msg: msg.into(),
        }
    }
}
