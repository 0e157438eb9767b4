use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too small: axis {axis} has {points} points, need at least {required}")]
    GridTooSmall { axis: usize, points: usize, required: usize },
    #[error("shape mismatch: expected {expected} samples, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("non-finite field samples")]
    NonFinite,
    #[error("invalid time stencil: {0}")]
    TimeStencil(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CavityError {
    #[error("invalid cavity parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("cavity needs at least one mode")]
    NoModes,
    #[error("expected {expected} per-mode values, found {found}")]
    ModeCount { expected: usize, found: usize },
    #[error("grid must be z-only and span [0, {length}], got extents {extents:?}")]
    GridExtent { length: f64, extents: [f64; 3] },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("truncation n_max must be at least 1, got {0}")]
    Truncation(usize),
    #[error("invalid oscillator parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("mode index {index} out of range for {count} modes")]
    ModeIndex { index: usize, count: usize },
    #[error("tensor-product dimension {dimension} exceeds cap {cap}")]
    DimensionCap { dimension: usize, cap: usize },
    #[error("position z = {z} outside [0, {length}]")]
    Position { z: f64, length: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("chain needs at least 3 atoms, got {0}")]
    TooFewAtoms(usize),
    #[error("invalid chain parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("force-constant matrix must be square and symmetric: {0}")]
    ForceConstants(String),
    #[error("eigensolver could not resolve plane-wave labels: {0}")]
    Eigensolver(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KineticsError {
    #[error("broadening width must be positive, got {0}")]
    Width(f64),
    #[error("occupation must be nonnegative, got {0}")]
    Occupation(f64),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("tuple space {tuples} exceeds cap {cap}")]
    TupleCap { tuples: u128, cap: u128 },
    #[error("exact arithmetic: {0}")]
    Exact(String),
    #[error("invalid phonon dispersion: {0}")]
    Dispersion(String),
    #[error(transparent)]
    Band(#[from] PairingError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PairingError {
    #[error("pole: |(Δε)² - (ħω)²| below guard for ε_k = {eps_k}, ε_k+q = {eps_kq}, ħω = {hbar_omega}")]
    Pole { eps_k: f64, eps_kq: f64, hbar_omega: f64 },
    #[error("k = {0} is not on the tabulated band grid")]
    OffGrid(f64),
    #[error("invalid band model: {0}")]
    BandSpec(String),
    #[error("significance ratio must lie in (0, 1), got {0}")]
    Ratio(f64),
    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("malformed snapshot: {0}")]
    Format(String),
    #[error(transparent)]
    Field(#[from] FieldError),
}
