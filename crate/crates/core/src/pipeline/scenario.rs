use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Sample;

/// Which sensing inputs a predictor may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Neither RIS nor camera: the direct-link rate only.
    None,
    /// Camera image only.
    #[serde(rename = "camera")]
    CameraOnly,
    /// RIS-assisted rate only.
    #[serde(rename = "ris")]
    RisOnly,
    /// Camera then RIS rate, via the cascade.
    Both,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::None, Scenario::CameraOnly, Scenario::RisOnly, Scenario::Both];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::None => "none",
            Scenario::CameraOnly => "camera",
            Scenario::RisOnly => "ris",
            Scenario::Both => "both",
        }
    }

    /// Tag stored in model files.
    pub fn tag(self) -> u8 {
        match self {
            Scenario::None => 0,
            Scenario::CameraOnly => 1,
            Scenario::RisOnly => 2,
            Scenario::Both => 3,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Self::ALL.get(usize::from(tag)).copied()
    }

    pub fn uses_image(self) -> bool {
        matches!(self, Scenario::CameraOnly | Scenario::Both)
    }

    pub fn uses_rate(self) -> bool {
        !matches!(self, Scenario::CameraOnly)
    }

    /// The unstandardized rate feature this scenario sees (0 when it has none).
    pub fn raw_rate(self, s: &Sample) -> f64 {
        match self {
            Scenario::None => s.direct_rate,
            Scenario::CameraOnly => 0.0,
            Scenario::RisOnly | Scenario::Both => s.ris_rate,
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(Scenario::None),
            "camera" | "camera-only" | "cameraonly" => Ok(Scenario::CameraOnly),
            "ris" | "ris-only" | "risonly" => Ok(Scenario::RisOnly),
            "both" => Ok(Scenario::Both),
            _ => Err(Error::InvalidParameter(format!(
                "unknown scenario {s:?}; expected none, camera, ris or both"
            ))),
        }
    }
}
