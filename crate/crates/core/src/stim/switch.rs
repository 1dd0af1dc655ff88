use serde::{Deserialize, Serialize};

use super::GroundingConfig;
use crate::grid::Grid;
use crate::tactile::ContactPatch;

/// Half-open pixel rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PixelRect {
    pub x0: usize,
    pub y0: usize,
    pub x1: usize,
    pub y1: usize,
}

impl PixelRect {
    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 + self.x1) as f64 / 2.0 - 0.5,
            (self.y0 + self.y1) as f64 / 2.0 - 0.5,
        )
    }
}

/// Film electrode footprints in sensor pixels, indexed by electrode id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectrodeLayout {
    pub regions: Vec<PixelRect>,
}

impl ElectrodeLayout {
    /// `cols x rows` grid tiling a `width x height` sensor, ids row-major.
    pub fn grid(cols: usize, rows: usize, width: usize, height: usize) -> Self {
        let mut regions = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                regions.push(PixelRect {
                    x0: c * width / cols,
                    x1: (c + 1) * width / cols,
                    y0: r * height / rows,
                    y1: (r + 1) * height / rows,
                });
            }
        }
        Self { regions }
    }

    /// Default 4x4 grid.
    pub fn default_for(width: usize, height: usize) -> Self {
        Self::grid(4, 4, width, height)
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn electrode_at(&self, x: usize, y: usize) -> Option<u16> {
        self.regions.iter().position(|r| r.contains(x, y)).map(|i| i as u16)
    }

    pub fn overlapping(&self, mask: &Grid<bool>) -> Vec<u16> {
        self.regions
            .iter()
            .enumerate()
            .filter(|(_, r)| {
                (r.y0..r.y1.min(mask.height())).any(|y| (r.x0..r.x1.min(mask.width())).any(|x| *mask.get(x, y)))
            })
            .map(|(i, _)| i as u16)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchState {
    Open,
    Stim,
    Ground,
}

impl SwitchState {
    fn bits(self) -> u8 {
        match self {
            SwitchState::Open => 0,
            SwitchState::Stim => 1,
            SwitchState::Ground => 2,
        }
    }

    fn from_bits(b: u8) -> Option<Self> {
        match b {
            0 => Some(SwitchState::Open),
            1 => Some(SwitchState::Stim),
            2 => Some(SwitchState::Ground),
            _ => None,
        }
    }
}

/// Routing for every electrode. Film electrodes only ever carry `Open` or
/// `Stim`; the hand-worn return electrodes only `Open` or `Ground`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchArray {
    pub film: Vec<SwitchState>,
    pub grounds: Vec<SwitchState>,
    pub grounding: GroundingConfig,
    /// Finger on the sensor, 0 = thumb. Selects the return electrode for
    /// per-finger placements.
    pub finger: usize,
}

impl SwitchArray {
    pub fn new(film_electrodes: usize, grounding: GroundingConfig) -> Self {
        Self {
            film: vec![SwitchState::Open; film_electrodes],
            grounds: vec![SwitchState::Open; grounding.electrodes_per_hand],
            grounding,
            finger: 1,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.film
            .iter()
            .chain(self.grounds.iter())
            .all(|&s| s == SwitchState::Open)
    }

    pub fn stim_electrodes(&self) -> Vec<u16> {
        self.film
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == SwitchState::Stim)
            .map(|(i, _)| i as u16)
            .collect()
    }

    pub fn any_stim(&self) -> bool {
        self.film.contains(&SwitchState::Stim)
    }

    pub fn all_open(&self) -> Self {
        let mut out = self.clone();
        out.film.fill(SwitchState::Open);
        out.grounds.fill(SwitchState::Open);
        out
    }

    /// Checks the routing invariants; returns a description of the first violation.
    pub fn check(&self) -> Result<(), String> {
        if self.film.contains(&SwitchState::Ground) {
            return Err("film electrode in Ground role".into());
        }
        if self.grounds.contains(&SwitchState::Stim) {
            return Err("return electrode in Stim role".into());
        }
        let grounded = self.grounds.iter().filter(|&&s| s == SwitchState::Ground).count();
        if grounded > 1 {
            return Err(format!("{grounded} return electrodes engaged"));
        }
        if self.any_stim() != (grounded == 1) {
            return Err("stimulation without exactly one return path".into());
        }
        Ok(())
    }

    /// Two bits per electrode (film first, then returns), little-endian within each byte.
    pub fn pack(&self) -> Vec<u8> {
        let states: Vec<SwitchState> = self.film.iter().chain(self.grounds.iter()).copied().collect();
        let mut out = vec![0u8; states.len().div_ceil(4)];
        for (i, s) in states.iter().enumerate() {
            out[i / 4] |= s.bits() << ((i % 4) * 2);
        }
        out
    }

    pub fn unpack(bytes: &[u8], count: usize) -> Option<Vec<SwitchState>> {
        if bytes.len() < count.div_ceil(4) {
            return None;
        }
        (0..count)
            .map(|i| SwitchState::from_bits((bytes[i / 4] >> ((i % 4) * 2)) & 0b11))
            .collect()
    }
}

/// Routes stimulation to the film electrodes under the contact. Without
/// overlap the whole array is left open.
pub fn set_electrodes(array: &SwitchArray, patch: Option<&ContactPatch>, layout: &ElectrodeLayout) -> SwitchArray {
    let mut out = array.all_open();
    let Some(patch) = patch else {
        return out;
    };
    let hits = layout.overlapping(&patch.mask);
    let hits: Vec<u16> = hits.into_iter().filter(|&i| (i as usize) < out.film.len()).collect();
    if hits.is_empty() {
        return out;
    }
    for i in hits {
        out.film[i as usize] = SwitchState::Stim;
    }
    let ground = if out.grounds.len() == 1 {
        0
    } else {
        out.finger.min(out.grounds.len() - 1)
    };
    if let Some(g) = out.grounds.get_mut(ground) {
        *g = SwitchState::Ground;
    }
    out
}
