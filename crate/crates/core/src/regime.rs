use std::fmt;

use crate::error::{Error, Result};

/// State of the two-state Markov chain driving the process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Zero,
    One,
}

impl Regime {
    pub const BOTH: [Regime; 2] = [Regime::Zero, Regime::One];

    #[inline]
    pub fn index(self) -> usize {
        match self {
            Regime::Zero => 0,
            Regime::One => 1,
        }
    }

    #[inline]
    pub fn flip(self) -> Regime {
        match self {
            Regime::Zero => Regime::One,
            Regime::One => Regime::Zero,
        }
    }

    /// `(-1)^i`
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Regime::Zero => 1.0,
            Regime::One => -1.0,
        }
    }
}

impl TryFrom<usize> for Regime {
    type Error = Error;

    fn try_from(value: usize) -> Result<Self> {
        match value {
            0 => Ok(Regime::Zero),
            1 => Ok(Regime::One),
            other => Err(Error::InvalidArgument(format!(
                "regime must be 0 or 1, got {other}"
            ))),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.index())
    }
}
