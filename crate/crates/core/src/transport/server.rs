use std::io;
use std::ops::RangeInclusive;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use super::{encode_frame, ChunkFrame, SegmentLayout, TransportError};
use crate::error::Error;
use crate::model::VideoSpec;
use crate::report::to_f64;
use crate::scheduler::SegmentMap;

/// Emission timing. Channel bandwidth equals the playback rate, so in real
/// time a segment's chunks are spread evenly over its slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pacing {
    RealTime,
    /// Real time sped up by the factor.
    Scaled(f64),
    Unpaced,
}

impl Pacing {
    fn speedup(&self) -> Option<f64> {
        match *self {
            Pacing::RealTime => Some(1.0),
            Pacing::Scaled(f) => Some(f),
            Pacing::Unpaced => None,
        }
    }
}

/// Cuts a source into the segments of a map and frames them.
#[derive(Debug, Clone)]
pub struct Server<'a> {
    map: &'a SegmentMap,
    layout: SegmentLayout,
    source: &'a [u8],
    chunk_size: u16,
}

impl<'a> Server<'a> {
    pub fn new(
        map: &'a SegmentMap,
        video: &VideoSpec,
        source: &'a [u8],
        chunk_size: u16,
    ) -> Result<Self, TransportError> {
        let layout = SegmentLayout::for_video(video, map.segment_count)?;
        if source.len() as u64 != layout.total_bytes() {
            return Err(Error::SourceSize {
                expected: layout.total_bytes(),
                actual: source.len() as u64,
            }
            .into());
        }
        if chunk_size == 0 {
            return Err(Error::OutOfRange("chunk size must be positive".into()).into());
        }
        if map.channel_count() > u8::MAX as usize + 1 {
            return Err(
                Error::OutOfRange("more channels than the frame can address".into()).into(),
            );
        }
        Ok(Self {
            map,
            layout,
            source,
            chunk_size,
        })
    }

    pub fn map(&self) -> &SegmentMap {
        self.map
    }

    pub fn layout(&self) -> SegmentLayout {
        self.layout
    }

    pub fn chunk_size(&self) -> u16 {
        self.chunk_size
    }

    /// Chunks of the segment on `channel` in `slot`, in ascending offset order.
    pub fn frames(&self, channel: usize, slot: u64) -> Result<Vec<ChunkFrame>, TransportError> {
        let segment = self.map.segment_at(channel, slot)?;
        let range = self.layout.range(segment);
        let bytes = &self.source[range.start as usize..range.end as usize];
        let config = self.map.config;
        Ok(bytes
            .chunks(self.chunk_size as usize)
            .enumerate()
            .map(|(i, chunk)| ChunkFrame {
                family: config.family(),
                k: config.k() as u8,
                aux: config.aux() as u8,
                segment_index: segment as u32,
                chunk_offset: (i * self.chunk_size as usize) as u32,
                slot,
                channel: channel as u8,
                payload: chunk.to_vec(),
            })
            .collect())
    }

    /// Every frame of one channel over `slots`, in (slot, offset) order.
    pub fn channel_frames(
        &self,
        channel: usize,
        slots: RangeInclusive<u64>,
    ) -> Result<Vec<ChunkFrame>, TransportError> {
        let mut out = Vec::new();
        for slot in slots {
            out.extend(self.frames(channel, slot)?);
        }
        Ok(out)
    }
}

/// Destination of one channel's encoded frames.
pub trait FrameSink: Send {
    fn send_frame(&mut self, bytes: &[u8]) -> io::Result<()>;
}

impl FrameSink for mpsc::Sender<Vec<u8>> {
    fn send_frame(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.send(bytes.to_vec())
            .map_err(|_| io::Error::new(io::ErrorKind::BrokenPipe, "receiver dropped"))
    }
}

impl FrameSink for Vec<Vec<u8>> {
    fn send_frame(&mut self, bytes: &[u8]) -> io::Result<()> {
        self.push(bytes.to_vec());
        Ok(())
    }
}

/// Broadcasts `slots` with one emitter thread per channel, `sinks[i]` carrying
/// channel `i`. Returns the number of frames sent per channel.
pub fn serve<S: FrameSink>(
    server: &Server<'_>,
    pacing: Pacing,
    slots: RangeInclusive<u64>,
    sinks: Vec<S>,
) -> Result<Vec<u64>, TransportError> {
    if sinks.len() != server.map.channel_count() {
        return Err(TransportError::Protocol(format!(
            "{} sinks for {} channels",
            sinks.len(),
            server.map.channel_count()
        )));
    }
    if *slots.start() == 0 {
        return Err(Error::ZeroSlot.into());
    }
    let slot_s = to_f64(server.map.segment_duration);
    let start = Instant::now();
    let first = *slots.start();

    thread::scope(|scope| {
        let handles: Vec<_> = sinks
            .into_iter()
            .enumerate()
            .map(|(channel, mut sink)| {
                let slots = slots.clone();
                scope.spawn(move || -> Result<u64, TransportError> {
                    let mut sent = 0;
                    for slot in slots {
                        let frames = server.frames(channel, slot)?;
                        let m = frames.len() as f64;
                        for (i, frame) in frames.iter().enumerate() {
                            if let Some(speedup) = pacing.speedup() {
                                let due = ((slot - first) as f64 + i as f64 / m) * slot_s / speedup;
                                let target = start + Duration::from_secs_f64(due);
                                let now = Instant::now();
                                if target > now {
                                    thread::sleep(target - now);
                                }
                            }
                            sink.send_frame(&encode_frame(frame)?)?;
                            sent += 1;
                        }
                    }
                    Ok(sent)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("emitter thread panicked"))
            .collect()
    })
}

/// Runs [`serve`] into one in-process queue and returns the frames in the
/// order the emitters delivered them.
pub fn loopback(
    server: &Server<'_>,
    pacing: Pacing,
    slots: RangeInclusive<u64>,
) -> Result<Vec<Vec<u8>>, TransportError> {
    let (tx, rx) = mpsc::channel();
    let sinks = vec![tx; server.map.channel_count()];
    serve(server, pacing, slots, sinks)?;
    Ok(rx.try_iter().collect())
}
