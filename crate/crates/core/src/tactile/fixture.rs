//! Frame fixture files: a 16-byte little-endian header (`VETF`, u16 width,
//! u16 height, u32 seq, u32 reserved) followed by one luminance byte per
//! pixel, plus a `.meta` text sidecar carrying the timestamp and source.

use std::fs;
use std::path::{Path, PathBuf};

use super::{TactileError, TactileFrame};
use crate::grid::Grid;

pub const FRAME_MAGIC: &[u8; 4] = b"VETF";
pub const FRAME_HEADER_LEN: usize = 16;

/// Sidecar metadata stored next to a frame fixture.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameMeta {
    pub timestamp_us: u64,
    pub source: String,
}

pub fn encode_frame(frame: &TactileFrame) -> Vec<u8> {
    let (w, h) = frame.dims();
    let mut out = Vec::with_capacity(FRAME_HEADER_LEN + w * h);
    out.extend_from_slice(FRAME_MAGIC);
    out.extend_from_slice(&(w as u16).to_le_bytes());
    out.extend_from_slice(&(h as u16).to_le_bytes());
    out.extend_from_slice(&frame.seq.to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    out.extend(
        frame
            .intensity()
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    out
}

/// Decodes fixture bytes; luminance is rescaled to `[0, 1]`.
pub fn decode_frame(bytes: &[u8], timestamp_us: u64) -> Result<TactileFrame, TactileError> {
    if bytes.len() < FRAME_HEADER_LEN {
        return Err(TactileError::Fixture(format!(
            "need {FRAME_HEADER_LEN} header bytes, got {}",
            bytes.len()
        )));
    }
    if &bytes[0..4] != FRAME_MAGIC {
        return Err(TactileError::Fixture("bad magic".into()));
    }
    let w = u16::from_le_bytes([bytes[4], bytes[5]]) as usize;
    let h = u16::from_le_bytes([bytes[6], bytes[7]]) as usize;
    let seq = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    let body = &bytes[FRAME_HEADER_LEN..];
    if body.len() != w * h {
        return Err(TactileError::Fixture(format!(
            "{w}x{h} frame needs {} pixel bytes, got {}",
            w * h,
            body.len()
        )));
    }
    let grid = Grid::from_vec(w, h, body.iter().map(|&b| b as f64 / 255.0).collect()).expect("length checked");
    TactileFrame::new(grid, seq, timestamp_us)
}

fn meta_path(path: &Path) -> PathBuf {
    path.with_extension("meta")
}

pub fn write_fixture(path: &Path, frame: &TactileFrame, source: &str) -> std::io::Result<()> {
    fs::write(path, encode_frame(frame))?;
    fs::write(
        meta_path(path),
        format!("timestamp_us={}\nsource={}\n", frame.timestamp_us, source),
    )
}

pub fn read_fixture(path: &Path) -> Result<(TactileFrame, FrameMeta), TactileError> {
    let io = |e: std::io::Error| TactileError::Fixture(format!("{}: {e}", path.display()));
    let bytes = fs::read(path).map_err(io)?;
    let text = fs::read_to_string(meta_path(path)).map_err(io)?;
    let mut meta = FrameMeta {
        timestamp_us: 0,
        source: String::new(),
    };
    for line in text.lines() {
        match line.split_once('=') {
            Some(("timestamp_us", v)) => {
                meta.timestamp_us = v
                    .trim()
                    .parse()
                    .map_err(|e| TactileError::Fixture(format!("timestamp_us: {e}")))?
            }
            Some(("source", v)) => meta.source = v.trim().to_string(),
            _ => {}
        }
    }
    let frame = decode_frame(&bytes, meta.timestamp_us)?;
    Ok((frame, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn frame() -> TactileFrame {
        let g = Grid::from_fn(20, 17, |x, y| ((x * 13 + y * 7) % 256) as f64 / 255.0);
        TactileFrame::new(g, 42, 1234).unwrap()
    }

    #[test]
    fn header_layout() {
        let bytes = encode_frame(&frame());
        assert_eq!(&bytes[..4], b"VETF");
        assert_eq!(&bytes[4..6], &20u16.to_le_bytes());
        assert_eq!(&bytes[6..8], &17u16.to_le_bytes());
        assert_eq!(&bytes[8..12], &42u32.to_le_bytes());
        assert_eq!(&bytes[12..16], &[0, 0, 0, 0]);
        assert_eq!(bytes.len(), 16 + 20 * 17);
    }

    #[test]
    fn quantised_values_round_trip() {
        let f = frame();
        let back = decode_frame(&encode_frame(&f), f.timestamp_us).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn fixture_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f0.vetf");
        write_fixture(&p, &frame(), "unit-test").unwrap();
        let (f, meta) = read_fixture(&p).unwrap();
        assert_eq!(f, frame());
        assert_eq!(meta.source, "unit-test");
        assert_eq!(meta.timestamp_us, 1234);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(decode_frame(b"VET", 0).is_err());
        let mut b = encode_frame(&frame());
        b[0] = b'X';
        assert!(decode_frame(&b, 0).is_err());
        let mut b = encode_frame(&frame());
        b.pop();
        assert!(decode_frame(&b, 0).is_err());
    }
}
