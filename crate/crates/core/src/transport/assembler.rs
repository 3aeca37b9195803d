use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{decode_frame, ChunkFrame, SegmentLayout, TransportError};
use crate::error::Error;
use crate::model::SchemeConfig;
use crate::scheduler::{preload_range, IndexRange};

/// Counters kept while assembling.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct AssemblyStats {
    pub frames_accepted: u64,
    /// Payload bytes of preloaded segments seen on the wire.
    pub redundant_bytes: u64,
    pub redundant_frames: u64,
    /// Distinct preloaded segments seen on the wire.
    pub redundant_segments: u64,
    /// Frames adding nothing to a segment already held or partly held.
    pub duplicate_frames: u64,
    pub duplicate_bytes: u64,
    /// Frames dropped because they failed to decode.
    pub corrupt_frames: u64,
    /// Well-formed frames that do not belong to this video or scheme.
    pub rejected_frames: u64,
}

#[derive(Debug, Clone)]
struct Partial {
    data: Vec<u8>,
    /// Disjoint, sorted, non-adjacent covered byte intervals.
    covered: Vec<(u64, u64)>,
}

impl Partial {
    fn new(len: u64) -> Self {
        Self {
            data: vec![0; len as usize],
            covered: Vec::new(),
        }
    }

    fn is_full(&self) -> bool {
        self.covered == [(0, self.data.len() as u64)]
    }

    fn covers(&self, lo: u64, hi: u64) -> bool {
        self.covered.iter().any(|&(a, b)| a <= lo && hi <= b)
    }

    /// Writes a chunk; false if its bytes were all held already.
    fn insert(&mut self, offset: u64, payload: &[u8]) -> bool {
        let (lo, hi) = (offset, offset + payload.len() as u64);
        if self.covers(lo, hi) {
            return false;
        }
        self.data[lo as usize..hi as usize].copy_from_slice(payload);
        let (mut lo, mut hi) = (lo, hi);
        self.covered.retain(|&(a, b)| {
            if b < lo || hi < a {
                true
            } else {
                lo = lo.min(a);
                hi = hi.max(b);
                false
            }
        });
        let at = self.covered.partition_point(|&(a, _)| a < lo);
        self.covered.insert(at, (lo, hi));
        true
    }
}

/// Rebuilds a video from chunk frames. Correct under any interleaving of the
/// channels; each segment is reconstructed once.
#[derive(Debug, Clone)]
pub struct Assembler {
    config: SchemeConfig,
    layout: SegmentLayout,
    preloaded: IndexRange,
    preload: Vec<u8>,
    partial: BTreeMap<u64, Partial>,
    complete: BTreeMap<u64, Vec<u8>>,
    completed_in: Vec<(u64, u64)>,
    redundant_seen: BTreeSet<u64>,
    stats: AssemblyStats,
}

impl Assembler {
    /// `preload` holds the bytes of the preloaded segments: the tail of the
    /// video for DPFB, the head for CTFB, nothing for FB.
    pub fn new(
        config: SchemeConfig,
        layout: SegmentLayout,
        preload: &[u8],
    ) -> Result<Self, TransportError> {
        let config = config.validate()?;
        if layout.segments() != config.segment_count() {
            return Err(TransportError::Protocol(format!(
                "layout has {} segments, {config} needs {}",
                layout.segments(),
                config.segment_count()
            )));
        }
        let preloaded = preload_range(config)?;
        let expected = if preloaded.is_empty() {
            0
        } else {
            layout.range(preloaded.hi).end - layout.range(preloaded.lo).start
        };
        if preload.len() as u64 != expected {
            return Err(Error::SourceSize {
                expected,
                actual: preload.len() as u64,
            }
            .into());
        }
        Ok(Self {
            config,
            layout,
            preloaded,
            preload: preload.to_vec(),
            partial: BTreeMap::new(),
            complete: BTreeMap::new(),
            completed_in: Vec::new(),
            redundant_seen: BTreeSet::new(),
            stats: AssemblyStats::default(),
        })
    }

    /// Decodes and accepts one datagram. Undecodable bytes are counted and
    /// dropped. Returns the segment this frame completed, if any.
    pub fn accept_bytes(&mut self, bytes: &[u8]) -> Option<u64> {
        match decode_frame(bytes) {
            Ok(frame) => self.accept(&frame),
            Err(_) => {
                self.stats.corrupt_frames += 1;
                None
            }
        }
    }

    pub fn accept(&mut self, frame: &ChunkFrame) -> Option<u64> {
        let segment = frame.segment_index as u64;
        let len = frame.payload.len() as u64;
        let ours = frame.family == self.config.family()
            && frame.k as u32 == self.config.k()
            && frame.aux as u32 == self.config.aux()
            && (1..=self.layout.segments()).contains(&segment)
            && frame.chunk_offset as u64 + len <= self.layout.segment_len(segment);
        if !ours {
            self.stats.rejected_frames += 1;
            return None;
        }
        self.stats.frames_accepted += 1;

        if self.preloaded.contains(segment) {
            self.stats.redundant_frames += 1;
            self.stats.redundant_bytes += len;
            if self.redundant_seen.insert(segment) {
                self.stats.redundant_segments += 1;
            }
            return None;
        }
        if self.complete.contains_key(&segment) {
            self.stats.duplicate_frames += 1;
            self.stats.duplicate_bytes += len;
            return None;
        }

        let seg_len = self.layout.segment_len(segment);
        let partial = self
            .partial
            .entry(segment)
            .or_insert_with(|| Partial::new(seg_len));
        if !partial.insert(frame.chunk_offset as u64, &frame.payload) {
            self.stats.duplicate_frames += 1;
            self.stats.duplicate_bytes += len;
            return None;
        }
        if partial.is_full() {
            let done = self.partial.remove(&segment).expect("present");
            self.complete.insert(segment, done.data);
            self.completed_in.push((frame.slot, segment));
            return Some(segment);
        }
        None
    }

    pub fn stats(&self) -> &AssemblyStats {
        &self.stats
    }

    pub fn config(&self) -> SchemeConfig {
        self.config
    }

    pub fn layout(&self) -> SegmentLayout {
        self.layout
    }

    /// `(slot, segment)` for each segment, in completion order.
    pub fn completion_log(&self) -> &[(u64, u64)] {
        &self.completed_in
    }

    pub fn missing(&self) -> Vec<u64> {
        (1..=self.layout.segments())
            .filter(|s| !self.preloaded.contains(*s) && !self.complete.contains_key(s))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.complete.len() as u64 + self.preloaded.len() == self.layout.segments()
    }

    /// The reconstructed video, preload included.
    pub fn into_video(self) -> Result<Vec<u8>, TransportError> {
        let missing = self.missing().len() as u64;
        if missing > 0 {
            return Err(TransportError::Incomplete { missing });
        }
        let mut out = Vec::with_capacity(self.layout.total_bytes() as usize);
        let mut preload_written = false;
        for segment in 1..=self.layout.segments() {
            if self.preloaded.contains(segment) {
                if !preload_written {
                    out.extend_from_slice(&self.preload);
                    preload_written = true;
                }
            } else {
                out.extend_from_slice(&self.complete[&segment]);
            }
        }
        Ok(out)
    }
}
