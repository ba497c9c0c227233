use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::NpbError;

/// Named problem size. Larger classes grow roughly fourfold in volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ProblemClass {
    S,
    W,
    A,
    B,
    C,
}

impl ProblemClass {
    pub const ALL: [ProblemClass; 5] = [
        ProblemClass::S,
        ProblemClass::W,
        ProblemClass::A,
        ProblemClass::B,
        ProblemClass::C,
    ];

    pub fn tag(self) -> char {
        match self {
            ProblemClass::S => 'S',
            ProblemClass::W => 'W',
            ProblemClass::A => 'A',
            ProblemClass::B => 'B',
            ProblemClass::C => 'C',
        }
    }
}

impl fmt::Display for ProblemClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag())
    }
}

impl FromStr for ProblemClass {
    type Err = NpbError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "S" => Ok(ProblemClass::S),
            "W" => Ok(ProblemClass::W),
            "A" => Ok(ProblemClass::A),
            "B" => Ok(ProblemClass::B),
            "C" => Ok(ProblemClass::C),
            other => Err(NpbError::UnknownClass(other.to_string())),
        }
    }
}
