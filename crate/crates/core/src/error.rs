use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({x}, {y}) is outside world")]
    OutsideWorld { x: f64, y: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("map parse error at line {line}: {msg}")]
    MapParse { line: usize, msg: String },
    #[error("no navigable source")]
    NoNavigableSource,
    #[error("no navigable cell")]
    NoNavigableCell,
    #[error("coincident source/receiver")]
    CoincidentSourceReceiver,
    #[error("empty impulse response")]
    EmptyImpulseResponse,
    #[error("position ({x}, {y}) is on an occupied cell")]
    OccupiedPosition { x: f64, y: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no signal")]
    NoSignal,
    #[error("calibration requires white-noise source")]
    NonFlatCalibrationSpectrum,
    #[error("invalid prior: {0}")]
    InvalidPrior(String),
    #[error("invalid episode {id}: {msg}")]
    InvalidEpisode { id: String, msg: String },
    #[error("constraints unsatisfiable after {0} rejections")]
    Unsatisfiable(usize),
    #[error("unknown strategy `{name}` (valid: {valid})")]
    UnknownStrategy { name: String, valid: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
