//! Framed datagram broadcast of a segment schedule.
//!
//! A [`Server`] cuts the source video into the segments of a [`SegmentMap`]
//! and emits, for every slot and channel, the chunks of the segment scheduled
//! there. [`serve`] runs one emitter per channel into any [`FrameSink`]; the
//! in-process [`loopback`] and the [`udp`] backend carry identical bytes. An
//! [`Assembler`] rebuilds the segments from frames arriving in any
//! cross-channel interleaving.
//!
//! [`SegmentMap`]: crate::scheduler::SegmentMap

mod assembler;
mod frame;
mod server;
pub mod udp;

use std::io;
use std::ops::Range;

use thiserror::Error;

use crate::model::VideoSpec;

pub use assembler::{Assembler, AssemblyStats};
pub use frame::{
    crc32, decode_frame, encode_frame, ChunkFrame, FrameError, CRC_LEN, FRAME_OVERHEAD, HEADER_LEN,
    MAGIC, MAX_PAYLOAD, VERSION,
};
pub use server::{loopback, serve, FrameSink, Pacing, Server};

pub const DEFAULT_CHUNK_SIZE: u16 = 1024;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error(transparent)]
    Model(#[from] crate::Error),

    #[error(transparent)]
    Frame(#[from] FrameError),

    #[error("i/o: {0}")]
    Io(#[from] io::Error),

    #[error("video incomplete, {missing} segment(s) missing")]
    Incomplete { missing: u64 },

    #[error("timed out: {0}")]
    Timeout(String),

    #[error("protocol: {0}")]
    Protocol(String),
}

/// Byte ranges of the segments of a source of `total_bytes`.
///
/// Segment `j` of `n` covers `[floor((j-1)L/n), floor(jL/n))`, so sizes differ
/// by at most one byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SegmentLayout {
    total_bytes: u64,
    segments: u64,
}

impl SegmentLayout {
    pub fn new(total_bytes: u64, segments: u64) -> crate::Result<Self> {
        if segments == 0 || segments > u32::MAX as u64 {
            return Err(crate::Error::OutOfRange(format!(
                "{segments} segments do not fit a frame index"
            )));
        }
        if total_bytes < segments {
            return Err(crate::Error::InvalidVideo("fewer bytes than segments"));
        }
        Ok(Self {
            total_bytes,
            segments,
        })
    }

    pub fn for_video(video: &VideoSpec, segments: u64) -> crate::Result<Self> {
        Self::new(video_bytes(video)?, segments)
    }

    pub fn total_bytes(&self) -> u64 {
        self.total_bytes
    }

    pub fn segments(&self) -> u64 {
        self.segments
    }

    fn boundary(&self, j: u64) -> u64 {
        (j as u128 * self.total_bytes as u128 / self.segments as u128) as u64
    }

    pub fn range(&self, segment: u64) -> Range<u64> {
        assert!(
            (1..=self.segments).contains(&segment),
            "segment {segment} out of range"
        );
        self.boundary(segment - 1)..self.boundary(segment)
    }

    pub fn segment_len(&self, segment: u64) -> u64 {
        let r = self.range(segment);
        r.end - r.start
    }
}

/// Size of the video file in bytes.
pub fn video_bytes(video: &VideoSpec) -> crate::Result<u64> {
    if !video.size_bits().is_multiple_of(8) {
        return Err(crate::Error::InvalidVideo(
            "size is not a whole number of bytes",
        ));
    }
    Ok(video.size_bits() / 8)
}
