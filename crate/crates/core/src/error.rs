use thiserror::Error;

/// Errors raised by measure construction and the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("atom {index} at point {point} has negative weight {weight}")]
    NegativeWeight { index: usize, point: i64, weight: f64 },
    #[error("total mass {total} deviates from 1 by more than 1e-9")]
    MassNotOne { total: f64 },
    #[error("point {point} outside 0..{order} for cyclic group")]
    PointOutOfRange { point: i64, order: u64 },
    #[error("measure has no atoms")]
    EmptySupport,
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("operands live on different groups")]
    GroupMismatch,
    #[error("support point overflow during convolution")]
    Overflow,
    #[error("derivative order {0} exceeds 12")]
    OrderTooHigh(u32),
    #[error("bad grid size: {0}")]
    BadGridSize(String),
    #[error("zero order undetermined at {location}: derivatives up to 12 vanish")]
    OrderUndetermined { location: f64 },
    #[error("characteristic function has zeros")]
    HasZeros,
    #[error("phase refinement exceeded 2^20 grid points")]
    NoConvergence,
    #[error("measure is not admissible")]
    NotAdmissible,
    #[error("unsupported group for this operation: {0}")]
    UnsupportedGroup(String),
    #[error("t = {t} is not in the divisibility set")]
    NotAMember { t: f64 },
    #[error(
        "inconclusive verdict at t = {t}: min coefficient {min_coefficient:e} on grid {grid_used}"
    )]
    Inconclusive {
        t: f64,
        min_coefficient: f64,
        grid_used: usize,
    },
    #[error("characteristic function has no zeros")]
    NoZeros,
    #[error("operation requires a cyclic group")]
    WrongGroup,
    #[error("search space too large: {0}")]
    SearchTooLarge(String),
    #[error("character {index} has vanishing Fourier value")]
    ZeroCharacterValue { index: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable tag, used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NegativeWeight { .. } => "NegativeWeight",
            Error::MassNotOne { .. } => "MassNotOne",
            Error::PointOutOfRange { .. } => "PointOutOfRange",
            Error::EmptySupport => "EmptySupport",
            Error::InvalidGroup(_) => "InvalidGroup",
            Error::GroupMismatch => "GroupMismatch",
            Error::Overflow => "Overflow",
            Error::OrderTooHigh(_) => "OrderTooHigh",
            Error::BadGridSize(_) => "BadGridSize",
            Error::OrderUndetermined { .. } => "OrderUndetermined",
            Error::HasZeros => "HasZeros",
            Error::NoConvergence => "NoConvergence",
            Error::NotAdmissible => "NotAdmissible",
            Error::UnsupportedGroup(_) => "UnsupportedGroup",
            Error::NotAMember { .. } => "NotAMember",
            Error::Inconclusive { .. } => "Inconclusive",
            Error::NoZeros => "NoZeros",
            Error::WrongGroup => "WrongGroup",
            Error::SearchTooLarge(_) => "SearchTooLarge",
            Error::ZeroCharacterValue { .. } => "ZeroCharacterValue",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
