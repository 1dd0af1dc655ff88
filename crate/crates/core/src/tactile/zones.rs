use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ContactPatch, TactileError};
use crate::grid::Grid;

/// Finger subregions that can touch the electrode film.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FingerZone {
    Fingertip,
    Left,
    Bottom,
    Ventral,
    /// Also reported under the name "tight".
    #[serde(alias = "tight")]
    Right,
}

impl FingerZone {
    pub const ALL: [FingerZone; 5] = [
        FingerZone::Fingertip,
        FingerZone::Left,
        FingerZone::Bottom,
        FingerZone::Ventral,
        FingerZone::Right,
    ];

    pub fn code(self) -> char {
        match self {
            FingerZone::Fingertip => 'F',
            FingerZone::Left => 'L',
            FingerZone::Bottom => 'B',
            FingerZone::Ventral => 'V',
            FingerZone::Right => 'R',
        }
    }

    pub fn from_code(c: char) -> Option<Self> {
        Self::ALL.into_iter().find(|z| z.code() == c)
    }

    pub fn index(self) -> u8 {
        self as u8
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.get(i as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            FingerZone::Fingertip => "fingertip",
            FingerZone::Left => "left",
            FingerZone::Bottom => "bottom",
            FingerZone::Ventral => "ventral",
            FingerZone::Right => "right",
        }
    }
}

impl fmt::Display for FingerZone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FingerZone {
    type Err = TactileError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fingertip" => Ok(FingerZone::Fingertip),
            "left" => Ok(FingerZone::Left),
            "bottom" => Ok(FingerZone::Bottom),
            "ventral" => Ok(FingerZone::Ventral),
            "right" | "tight" => Ok(FingerZone::Right),
            other => Err(TactileError::ZoneMap(format!("unknown zone {other:?}"))),
        }
    }
}

/// Per-pixel zone labels. `None` marks pixels outside the active sensing area;
/// every active pixel carries exactly one zone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneMap {
    labels: Grid<Option<FingerZone>>,
}

impl ZoneMap {
    pub fn new(labels: Grid<Option<FingerZone>>) -> Result<Self, TactileError> {
        let map = Self { labels };
        for z in FingerZone::ALL {
            if map.area(z) == 0 {
                return Err(TactileError::ZoneMap(format!("zone {z} has no pixels")));
            }
        }
        Ok(map)
    }

    /// Fingertip disc at top-centre, left/right flanks, a bottom band and the
    /// ventral region filling the centre. Covers the whole frame.
    pub fn default_layout(width: usize, height: usize) -> Self {
        let labels = Grid::from_fn(width, height, |x, y| {
            let u = (x as f64 + 0.5) / width as f64;
            let v = (y as f64 + 0.5) / height as f64;
            let zone = if (u - 0.5).powi(2) + (v - 0.22).powi(2) <= 0.2f64.powi(2) {
                FingerZone::Fingertip
            } else if v >= 0.8 {
                FingerZone::Bottom
            } else if u < 0.25 {
                FingerZone::Left
            } else if u >= 0.75 {
                FingerZone::Right
            } else {
                FingerZone::Ventral
            };
            Some(zone)
        });
        Self { labels }
    }

    pub fn dims(&self) -> (usize, usize) {
        self.labels.dims()
    }

    pub fn labels(&self) -> &Grid<Option<FingerZone>> {
        &self.labels
    }

    pub fn area(&self, zone: FingerZone) -> usize {
        self.labels.iter().filter(|&&z| z == Some(zone)).count()
    }

    pub fn active_area(&self) -> usize {
        self.labels.iter().filter(|z| z.is_some()).count()
    }

    pub fn classify_point(&self, x: f64, y: f64) -> Result<FingerZone, TactileError> {
        let (px, py) = (x.floor(), y.floor());
        if !px.is_finite() || !self.labels.contains(px as i64, py as i64) {
            return Err(TactileError::OutsideActiveArea { x, y });
        }
        self.labels
            .get(px as usize, py as usize)
            .ok_or(TactileError::OutsideActiveArea { x, y })
    }

    /// Zone label at the patch centroid.
    pub fn classify(&self, patch: &ContactPatch) -> Result<FingerZone, TactileError> {
        self.classify_point(patch.centroid.0, patch.centroid.1)
    }

    /// Pixel of `zone` nearest to the zone's centroid, used as "the centre of the zone".
    pub fn zone_center(&self, zone: FingerZone) -> Option<(usize, usize)> {
        let pts: Vec<(usize, usize)> = self
            .labels
            .indexed()
            .filter(|(_, _, &z)| z == Some(zone))
            .map(|(x, y, _)| (x, y))
            .collect();
        if pts.is_empty() {
            return None;
        }
        let n = pts.len() as f64;
        let cx = pts.iter().map(|p| p.0 as f64).sum::<f64>() / n;
        let cy = pts.iter().map(|p| p.1 as f64).sum::<f64>() / n;
        pts.into_iter().min_by(|a, b| {
            let da = (a.0 as f64 - cx).powi(2) + (a.1 as f64 - cy).powi(2);
            let db = (b.0 as f64 - cx).powi(2) + (b.1 as f64 - cy).powi(2);
            da.total_cmp(&db)
        })
    }

    /// Text fixture: a `width height` line followed by one row of zone codes
    /// (`F L B V R`, `.` for inactive) per pixel row.
    pub fn to_text(&self) -> String {
        let (w, h) = self.dims();
        let mut s = format!("{w} {h}\n");
        for y in 0..h {
            for x in 0..w {
                s.push(self.labels.get(x, y).map_or('.', |z| z.code()));
            }
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, TactileError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| TactileError::ZoneMap("empty zone map".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse())
            .collect::<Result<_, _>>()
            .map_err(|e| TactileError::ZoneMap(format!("bad header: {e}")))?;
        let [w, h] = dims[..] else {
            return Err(TactileError::ZoneMap("header must be `width height`".into()));
        };
        let mut cells = Vec::with_capacity(w * h);
        for (row, line) in lines.enumerate() {
            let line = line.trim();
            if line.chars().count() != w {
                return Err(TactileError::ZoneMap(format!(
                    "row {row} has {} cells, expected {w}",
                    line.chars().count()
                )));
            }
            for c in line.chars() {
                cells.push(match c {
                    '.' => None,
                    c => Some(
                        FingerZone::from_code(c)
                            .ok_or_else(|| TactileError::ZoneMap(format!("unknown zone code {c:?} in row {row}")))?,
                    ),
                });
            }
        }
        let labels = Grid::from_vec(w, h, cells).ok_or_else(|| TactileError::ZoneMap(format!("expected {h} rows")))?;
        Self::new(labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from;
    use rand::Rng;

    #[test]
    fn default_layout_is_total_partition_with_five_zones() {
        let m = ZoneMap::default_layout(64, 64);
        assert_eq!(m.active_area(), 64 * 64);
        let total: usize = FingerZone::ALL.iter().map(|&z| m.area(z)).sum();
        assert_eq!(total, 64 * 64);
        for z in FingerZone::ALL {
            assert!(m.area(z) > 0, "{z}");
            let (x, y) = m.zone_center(z).unwrap();
            assert_eq!(m.classify_point(x as f64 + 0.5, y as f64 + 0.5).unwrap(), z);
        }
    }

    #[test]
    fn fingertip_centre_is_fingertip() {
        let m = ZoneMap::default_layout(64, 64);
        assert_eq!(m.classify_point(32.0, 14.0).unwrap(), FingerZone::Fingertip);
    }

    #[test]
    fn boundary_pixel_uses_stored_label() {
        let m = ZoneMap::default_layout(64, 64);
        // Column 15 is the last Left column, column 16 the first Ventral one.
        assert_eq!(m.classify_point(15.0, 40.0).unwrap(), FingerZone::Left);
        assert_eq!(m.classify_point(16.0, 40.0).unwrap(), FingerZone::Ventral);
        assert_eq!(*m.labels().get(15, 40), Some(FingerZone::Left));
    }

    #[test]
    fn outside_is_error() {
        let m = ZoneMap::default_layout(64, 64);
        assert!(m.classify_point(-0.5, 3.0).is_err());
        assert!(m.classify_point(64.0, 3.0).is_err());
        assert!(m.classify_point(f64::NAN, 3.0).is_err());
    }

    #[test]
    fn monte_carlo_frequencies_match_areas() {
        let m = ZoneMap::default_layout(64, 64);
        let mut rng = rng_from(5);
        let mut counts = [0usize; 5];
        for _ in 0..1000 {
            let (x, y) = (rng.random_range(0.0..64.0), rng.random_range(0.0..64.0));
            counts[m.classify_point(x, y).unwrap() as usize] += 1;
        }
        for z in FingerZone::ALL {
            let freq = counts[z as usize] as f64 / 1000.0;
            let area = m.area(z) as f64 / m.active_area() as f64;
            assert!((freq - area).abs() < 0.05, "{z}: {freq} vs {area}");
        }
    }

    #[test]
    fn text_round_trip_and_tight_alias() {
        let m = ZoneMap::default_layout(20, 24);
        assert_eq!(ZoneMap::parse(&m.to_text()).unwrap(), m);
        assert_eq!("tight".parse::<FingerZone>().unwrap(), FingerZone::Right);
        let z: FingerZone = serde_json::from_str("\"tight\"").unwrap();
        assert_eq!(z, FingerZone::Right);
    }

    #[test]
    fn shipped_fixture_matches_default() {
        let text = include_str!("../../fixtures/zone_map_64x64.txt");
        assert_eq!(ZoneMap::parse(text).unwrap(), ZoneMap::default_layout(64, 64));
    }
}
