use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    pub fn index(self) -> usize {
        match self {
            Phase::A => 0,
            Phase::B => 1,
            Phase::C => 2,
        }
    }

    pub fn label(self) -> char {
        match self {
            Phase::A => 'a',
            Phase::B => 'b',
            Phase::C => 'c',
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" => Ok(Phase::A),
            "b" => Ok(Phase::B),
            "c" => Ok(Phase::C),
            other => Err(Error::Document(format!("unknown phase `{other}`"))),
        }
    }
}

/// A (bus, phase) pair, written `bus.phase` in documents (e.g. `4.a`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePhase {
    pub bus: String,
    pub phase: Phase,
}

impl NodePhase {
    pub fn new(bus: impl Into<String>, phase: Phase) -> Self {
        Self {
            bus: bus.into(),
            phase,
        }
    }
}

impl fmt::Display for NodePhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.bus, self.phase)
    }
}

impl FromStr for NodePhase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (bus, phase) = s
            .rsplit_once('.')
            .ok_or_else(|| Error::Document(format!("expected `bus.phase`, got `{s}`")))?;
        if bus.is_empty() {
            return Err(Error::Document(format!("empty bus id in `{s}`")));
        }
        Ok(NodePhase::new(bus, phase.parse()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_phase_round_trip() {
        let np: NodePhase = "feeder.4.b".parse().unwrap();
        assert_eq!(np.bus, "feeder.4");
        assert_eq!(np.phase, Phase::B);
        assert_eq!(np.to_string(), "feeder.4.b");
    }

    #[test]
    fn rejects_bad_labels() {
        assert!("4".parse::<NodePhase>().is_err());
        assert!(".a".parse::<NodePhase>().is_err());
        assert!("4.d".parse::<NodePhase>().is_err());
    }
}
