use std::fmt;
use std::str::FromStr;

/// The five medium access techniques covered by the models and the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AccessTechnique {
    PureAloha,
    SlottedAloha,
    CsmaCa,
    Tdma,
    Fdma,
}

impl AccessTechnique {
    /// All techniques, in the canonical output order.
    pub const ALL: [AccessTechnique; 5] = [
        AccessTechnique::PureAloha,
        AccessTechnique::SlottedAloha,
        AccessTechnique::CsmaCa,
        AccessTechnique::Tdma,
        AccessTechnique::Fdma,
    ];

    /// Kebab-case name used in configuration files and CSV output.
    pub fn name(self) -> &'static str {
        match self {
            AccessTechnique::PureAloha => "pure-aloha",
            AccessTechnique::SlottedAloha => "slotted-aloha",
            AccessTechnique::CsmaCa => "csma-ca",
            AccessTechnique::Tdma => "tdma",
            AccessTechnique::Fdma => "fdma",
        }
    }

    /// Contention techniques whose throughput is a bounded fraction of channel time.
    pub fn is_contention(self) -> bool {
        matches!(
            self,
            AccessTechnique::PureAloha | AccessTechnique::SlottedAloha | AccessTechnique::CsmaCa
        )
    }
}

impl fmt::Display for AccessTechnique {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self {
            AccessTechnique::PureAloha => "PureAloha",
            AccessTechnique::SlottedAloha => "SlottedAloha",
            AccessTechnique::CsmaCa => "CsmaCa",
            AccessTechnique::Tdma => "Tdma",
            AccessTechnique::Fdma => "Fdma",
        };
        f.write_str(label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown access technique `{0}`")]
pub struct UnknownTechnique(pub String);

impl FromStr for AccessTechnique {
    type Err = UnknownTechnique;

    /// Accepts the kebab-case name, the display name, or common spellings
    /// (`aloha`, `s-aloha`, `csma`), case-insensitively.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key: String = s
            .trim()
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | '/' | ' '))
            .flat_map(char::to_lowercase)
            .collect();
        match key.as_str() {
            "purealoha" | "aloha" => Ok(AccessTechnique::PureAloha),
            "slottedaloha" | "saloha" => Ok(AccessTechnique::SlottedAloha),
            "csmaca" | "csma" => Ok(AccessTechnique::CsmaCa),
            "tdma" => Ok(AccessTechnique::Tdma),
            "fdma" => Ok(AccessTechnique::Fdma),
            _ => Err(UnknownTechnique(s.to_string())),
        }
    }
}
