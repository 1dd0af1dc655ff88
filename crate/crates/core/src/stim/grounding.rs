use serde::{Deserialize, Serialize};

use super::StimError;

/// Where the return-path electrode sits on the hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundingPlacement {
    Back,
    Ring,
    Palm,
    Dorsal,
}

impl GroundingPlacement {
    pub const ALL: [GroundingPlacement; 4] = [
        GroundingPlacement::Back,
        GroundingPlacement::Ring,
        GroundingPlacement::Palm,
        GroundingPlacement::Dorsal,
    ];

    /// Grounding electrodes needed for a five-finger hand.
    pub fn electrodes_per_hand(self) -> usize {
        match self {
            GroundingPlacement::Back | GroundingPlacement::Palm => 1,
            GroundingPlacement::Ring | GroundingPlacement::Dorsal => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundingConfig {
    pub placement: GroundingPlacement,
    pub electrodes_per_hand: usize,
}

impl GroundingConfig {
    pub fn new(placement: GroundingPlacement) -> Self {
        Self {
            placement,
            electrodes_per_hand: placement.electrodes_per_hand(),
        }
    }

    pub fn validate(&self) -> Result<(), StimError> {
        let expected = self.placement.electrodes_per_hand();
        if self.electrodes_per_hand != expected {
            return Err(StimError::Grounding(format!(
                "{:?} grounding uses {expected} electrode(s) per hand, not {}",
                self.placement, self.electrodes_per_hand
            )));
        }
        Ok(())
    }
}

impl Default for GroundingConfig {
    fn default() -> Self {
        Self::new(GroundingPlacement::Back)
    }
}

/// Trade-offs of a grounding placement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundingInfo {
    pub placement: GroundingPlacement,
    pub electrodes_per_hand: usize,
    /// One electrode serves all five fingers.
    pub shared: bool,
    pub advantage: &'static str,
    pub disadvantage: &'static str,
}

pub fn grounding_info(config: &GroundingConfig) -> GroundingInfo {
    let placement = config.placement;
    let (advantage, disadvantage) = match placement {
        GroundingPlacement::Back => (
            "5 fingers share one grounding electrode.",
            "Stimulation happens on both the inner finger and palm.",
        ),
        GroundingPlacement::Ring => ("Requires small current.", "5 grounding electrodes."),
        GroundingPlacement::Palm => (
            "5 fingers share one grounding electrode.",
            "Inconvenient for hand manipulation.",
        ),
        GroundingPlacement::Dorsal => (
            "Stimulation is focused on the fingers being stimulated.",
            "5 grounding electrodes.",
        ),
    };
    GroundingInfo {
        placement,
        electrodes_per_hand: placement.electrodes_per_hand(),
        shared: placement.electrodes_per_hand() == 1,
        advantage,
        disadvantage,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_back() {
        assert_eq!(GroundingConfig::default().placement, GroundingPlacement::Back);
    }

    #[test]
    fn table() {
        let back = grounding_info(&GroundingConfig::new(GroundingPlacement::Back));
        assert_eq!(back.electrodes_per_hand, 1);
        assert!(back.shared);
        assert!(back.disadvantage.contains("inner finger and palm"));
        let ring = grounding_info(&GroundingConfig::new(GroundingPlacement::Ring));
        assert_eq!(ring.electrodes_per_hand, 5);
        assert_eq!(ring.advantage, "Requires small current.");
        let dorsal = grounding_info(&GroundingConfig::new(GroundingPlacement::Dorsal));
        assert_eq!(dorsal.electrodes_per_hand, 5);
        assert!(dorsal.advantage.contains("focused on the fingers being stimulated"));
    }

    #[test]
    fn inconsistent_count_rejected() {
        let bad = GroundingConfig {
            placement: GroundingPlacement::Palm,
            electrodes_per_hand: 5,
        };
        assert!(bad.validate().is_err());
        GroundingConfig::new(GroundingPlacement::Ring).validate().unwrap();
    }
}
