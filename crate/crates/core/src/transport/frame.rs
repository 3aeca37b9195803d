//! Bit-exact chunk frame codec.
//!
//! Layout, big-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 0..4 | magic `0x43544642` |
//! | 4 | version `1` |
//! | 5 | scheme (0 FB, 1 DPFB, 2 CTFB) |
//! | 6 | k |
//! | 7 | beta or gamma, 0 for FB |
//! | 8..12 | segment index, 1-based |
//! | 12..16 | chunk offset within the segment |
//! | 16..18 | chunk length |
//! | 18..26 | slot |
//! | 26 | channel |
//! | 27 | reserved, 0 |
//! | 28.. | payload |
//! | last 4 | CRC-32/ISO-HDLC of everything before it |

use thiserror::Error;

use crate::model::Family;

pub const MAGIC: u32 = 0x4354_4642;
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 28;
pub const CRC_LEN: usize = 4;
/// Bytes a frame adds around its payload.
pub const FRAME_OVERHEAD: usize = HEADER_LEN + CRC_LEN;
pub const MAX_PAYLOAD: usize = u16::MAX as usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame truncated: need {needed} bytes, got {got}")]
    Truncated { needed: usize, got: usize },

    #[error("frame is {got} bytes but its header declares {expected}")]
    TrailingBytes { expected: usize, got: usize },

    #[error("CRC mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },

    #[error("bad magic {0:#010x}")]
    BadMagic(u32),

    #[error("unsupported frame version {0}")]
    VersionMismatch(u8),

    #[error("unknown scheme code {0}")]
    UnknownScheme(u8),

    #[error("reserved byte is {0}, expected 0")]
    ReservedNonZero(u8),

    #[error("payload of {0} bytes does not fit a 16-bit length")]
    PayloadTooLong(usize),
}

/// One chunk of one segment, as broadcast on one channel in one slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChunkFrame {
    pub family: Family,
    pub k: u8,
    pub aux: u8,
    pub segment_index: u32,
    pub chunk_offset: u32,
    pub slot: u64,
    pub channel: u8,
    pub payload: Vec<u8>,
}

impl ChunkFrame {
    pub fn chunk_len(&self) -> usize {
        self.payload.len()
    }

    pub fn encoded_len(&self) -> usize {
        FRAME_OVERHEAD + self.payload.len()
    }
}

pub fn crc32(bytes: &[u8]) -> u32 {
    crc32fast::hash(bytes)
}

pub fn encode_frame(frame: &ChunkFrame) -> Result<Vec<u8>, FrameError> {
    let len = frame.payload.len();
    if len > MAX_PAYLOAD {
        return Err(FrameError::PayloadTooLong(len));
    }
    let mut out = Vec::with_capacity(FRAME_OVERHEAD + len);
    out.extend_from_slice(&MAGIC.to_be_bytes());
    out.push(VERSION);
    out.push(frame.family.wire_code());
    out.push(frame.k);
    out.push(frame.aux);
    out.extend_from_slice(&frame.segment_index.to_be_bytes());
    out.extend_from_slice(&frame.chunk_offset.to_be_bytes());
    out.extend_from_slice(&(len as u16).to_be_bytes());
    out.extend_from_slice(&frame.slot.to_be_bytes());
    out.push(frame.channel);
    out.push(0);
    out.extend_from_slice(&frame.payload);
    let crc = crc32(&out);
    out.extend_from_slice(&crc.to_be_bytes());
    Ok(out)
}

fn be_u32(b: &[u8]) -> u32 {
    u32::from_be_bytes(b.try_into().expect("4 bytes"))
}

/// Decodes exactly one frame occupying all of `bytes`.
///
/// The length and CRC are checked before any header field is interpreted, so
/// a corrupted magic or version byte reports a CRC mismatch; `BadMagic` and
/// `VersionMismatch` mean an intact frame from a different protocol.
pub fn decode_frame(bytes: &[u8]) -> Result<ChunkFrame, FrameError> {
    let got = bytes.len();
    if got < FRAME_OVERHEAD {
        return Err(FrameError::Truncated {
            needed: FRAME_OVERHEAD,
            got,
        });
    }
    let chunk_len = u16::from_be_bytes([bytes[16], bytes[17]]) as usize;
    let expected = FRAME_OVERHEAD + chunk_len;
    if got < expected {
        return Err(FrameError::Truncated {
            needed: expected,
            got,
        });
    }
    if got > expected {
        return Err(FrameError::TrailingBytes { expected, got });
    }

    let body = &bytes[..expected - CRC_LEN];
    let stored = be_u32(&bytes[expected - CRC_LEN..]);
    let computed = crc32(body);
    if stored != computed {
        return Err(FrameError::CrcMismatch { stored, computed });
    }

    let magic = be_u32(&bytes[0..4]);
    if magic != MAGIC {
        return Err(FrameError::BadMagic(magic));
    }
    if bytes[4] != VERSION {
        return Err(FrameError::VersionMismatch(bytes[4]));
    }
    let family = Family::from_wire_code(bytes[5]).ok_or(FrameError::UnknownScheme(bytes[5]))?;
    if bytes[27] != 0 {
        return Err(FrameError::ReservedNonZero(bytes[27]));
    }

    Ok(ChunkFrame {
        family,
        k: bytes[6],
        aux: bytes[7],
        segment_index: be_u32(&bytes[8..12]),
        chunk_offset: be_u32(&bytes[12..16]),
        slot: u64::from_be_bytes(bytes[18..26].try_into().expect("8 bytes")),
        channel: bytes[26],
        payload: bytes[HEADER_LEN..HEADER_LEN + chunk_len].to_vec(),
    })
}
