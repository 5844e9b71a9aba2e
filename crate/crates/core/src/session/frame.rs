//! Binary volume frames.
//!
//! Layout, little-endian: `revision: u64`, `n_points: u32`, `encoding: u8`, then
//! either `n_points` u16 view counts (encoding 0, saturating) or a bitmask of
//! `ceil(n_points / 8)` bytes, bit `e` at byte `e / 8`, position `e % 8`, set
//! when point `e` is unseen (encoding 1).

use crate::error::{Error, Result};
use crate::session::TransferMode;
use crate::visibility::{BitVec, VisCounts};

pub const FRAME_HEADER_LEN: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FrameEncoding {
    Counts = 0,
    Uncovered = 1,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FramePayload {
    Counts(Vec<u16>),
    Uncovered(BitVec),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VolumeFrame {
    pub revision: u64,
    pub payload: FramePayload,
}

impl VolumeFrame {
    pub fn from_counts(revision: u64, counts: &VisCounts, mode: TransferMode) -> Self {
        let c = counts.as_slice();
        let payload = match mode {
            TransferMode::UncoveredOnly => {
                let mut mask = BitVec::zeros(c.len());
                for (e, &n) in c.iter().enumerate() {
                    if n == 0 {
                        mask.set(e);
                    }
                }
                FramePayload::Uncovered(mask)
            }
            TransferMode::Quality | TransferMode::Custom => {
                FramePayload::Counts(c.iter().map(|&n| n.min(u16::MAX as u32) as u16).collect())
            }
        };
        VolumeFrame { revision, payload }
    }

    pub fn n_points(&self) -> usize {
        match &self.payload {
            FramePayload::Counts(c) => c.len(),
            FramePayload::Uncovered(m) => m.len(),
        }
    }

    pub fn encoding(&self) -> FrameEncoding {
        match self.payload {
            FramePayload::Counts(_) => FrameEncoding::Counts,
            FramePayload::Uncovered(_) => FrameEncoding::Uncovered,
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let n = self.n_points();
        let mut out = Vec::with_capacity(FRAME_HEADER_LEN + 2 * n);
        out.extend_from_slice(&self.revision.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
        out.push(self.encoding() as u8);
        match &self.payload {
            FramePayload::Counts(c) => {
                for x in c {
                    out.extend_from_slice(&x.to_le_bytes());
                }
            }
            FramePayload::Uncovered(mask) => {
                let bytes = n.div_ceil(8);
                for (i, w) in mask.words().iter().enumerate() {
                    let b = w.to_le_bytes();
                    let take = (bytes - i * 8).min(8);
                    out.extend_from_slice(&b[..take]);
                }
            }
        }
        out
    }
}

pub fn decode_frame(bytes: &[u8]) -> Result<VolumeFrame> {
    let bad = |m: String| Error::Protocol(format!("volume frame: {m}"));
    if bytes.len() < FRAME_HEADER_LEN {
        return Err(bad(format!("{} bytes is shorter than the header", bytes.len())));
    }
    let revision = u64::from_le_bytes(bytes[0..8].try_into().unwrap());
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[FRAME_HEADER_LEN..];
    let payload = match bytes[12] {
        0 => {
            if body.len() != 2 * n {
                return Err(bad(format!("expected {} count bytes, got {}", 2 * n, body.len())));
            }
            FramePayload::Counts(body.chunks_exact(2).map(|c| u16::from_le_bytes([c[0], c[1]])).collect())
        }
        1 => {
            if body.len() != n.div_ceil(8) {
                return Err(bad(format!("expected {} mask bytes, got {}", n.div_ceil(8), body.len())));
            }
            let mut mask = BitVec::zeros(n);
            for e in 0..n {
                if body[e / 8] >> (e % 8) & 1 == 1 {
                    mask.set(e);
                }
            }
            FramePayload::Uncovered(mask)
        }
        other => return Err(bad(format!("unknown encoding {other}"))),
    };
    Ok(VolumeFrame { revision, payload })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn header_layout() {
        let counts = VisCounts(vec![0, 3, 70_000]);
        let f = VolumeFrame::from_counts(0x0102, &counts, TransferMode::Quality);
        let b = f.encode();
        assert_eq!(&b[..13], &[2, 1, 0, 0, 0, 0, 0, 0, 3, 0, 0, 0, 0]);
        assert_eq!(&b[13..], &[0, 0, 3, 0, 0xff, 0xff]);
        let m = VolumeFrame::from_counts(7, &counts, TransferMode::UncoveredOnly).encode();
        assert_eq!(m[12], 1);
        assert_eq!(&m[13..], &[0b0000_0001]);
    }

    #[test]
    fn malformed_frames() {
        assert!(decode_frame(&[0; 5]).is_err());
        let mut b = VolumeFrame::from_counts(1, &VisCounts(vec![1, 2]), TransferMode::Quality).encode();
        b.pop();
        assert!(decode_frame(&b).is_err());
        b.push(0);
        b[12] = 9;
        assert!(decode_frame(&b).is_err());
    }

    proptest! {
        #[test]
        fn roundtrip(counts in proptest::collection::vec(0u32..5, 0..200), rev in any::<u64>(), uncovered in any::<bool>()) {
            let mode = if uncovered { TransferMode::UncoveredOnly } else { TransferMode::Quality };
            let f = VolumeFrame::from_counts(rev, &VisCounts(counts), mode);
            prop_assert_eq!(decode_frame(&f.encode()).unwrap(), f);
        }
    }
}
