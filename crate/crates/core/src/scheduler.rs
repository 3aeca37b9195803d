//! Segment maps, periodic channel schedules and segment correspondences.
//!
//! Every channel cycles through one contiguous group of segment indices in
//! ascending order, one segment per slot, with the cycle anchored so that slot 1
//! carries the head of the group.

use std::fmt;
use std::io::{self, Write};

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{pow2, rat, Family, Rational, SchemeConfig, VideoSpec, MAX_K};

/// Inclusive range of 1-based segment indices. Empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IndexRange {
    pub lo: u64,
    pub hi: u64,
}

impl IndexRange {
    pub const EMPTY: IndexRange = IndexRange { lo: 1, hi: 0 };

    pub fn new(lo: u64, hi: u64) -> Self {
        Self { lo, hi }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn len(&self) -> u64 {
        if self.is_empty() {
            0
        } else {
            self.hi - self.lo + 1
        }
    }

    pub fn contains(&self, index: u64) -> bool {
        self.lo <= index && index <= self.hi
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }

    pub fn intersects(&self, other: &IndexRange) -> bool {
        !self.is_empty() && !other.is_empty() && self.lo <= other.hi && other.lo <= self.hi
    }
}

impl fmt::Display for IndexRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("[]")
        } else {
            write!(f, "[{},{}]", self.lo, self.hi)
        }
    }
}

/// How a scheme splits a video into segments and spreads them over channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentMap {
    pub config: SchemeConfig,
    pub segment_count: u64,
    pub segment_duration: Rational,
    pub preloaded: IndexRange,
    pub channel_groups: Vec<IndexRange>,
    pub never_broadcast: IndexRange,
    /// Segments put on air although every client already holds them.
    pub redundant_broadcast: IndexRange,
}

/// Segments every client stores before viewing. Independent of the video.
pub fn preload_range(config: SchemeConfig) -> Result<IndexRange> {
    let config = config.validate()?;
    let k = config.k();
    Ok(match config {
        SchemeConfig::Fb { .. } => IndexRange::EMPTY,
        // the last 1/2^beta of the video
        SchemeConfig::Dpfb { beta, .. } => IndexRange::new(
            ((pow2(beta) - 1) * pow2(k - beta) + 1) as u64,
            config.segment_count(),
        ),
        SchemeConfig::Ctfb { gamma, .. } => IndexRange::new(1, pow2(k - gamma) as u64),
    })
}

pub fn build_segment_map(video: &VideoSpec, config: SchemeConfig) -> Result<SegmentMap> {
    let config = config.validate()?;
    let k = config.k();
    let n = config.segment_count();
    let segment_duration = config.segment_duration(video.duration());

    let fast_groups = |channels: u32| -> Vec<IndexRange> {
        (0..channels)
            .map(|i| IndexRange::new(pow2(i) as u64, (pow2(i + 1) - 1) as u64))
            .collect()
    };

    let map = match config {
        SchemeConfig::Fb { k } => SegmentMap {
            config,
            segment_count: n,
            segment_duration,
            preloaded: IndexRange::EMPTY,
            channel_groups: fast_groups(k),
            never_broadcast: IndexRange::EMPTY,
            redundant_broadcast: IndexRange::EMPTY,
        },
        SchemeConfig::Dpfb { .. } => {
            // Only the final preloaded segment falls outside every channel group.
            let preloaded = preload_range(config)?;
            SegmentMap {
                config,
                segment_count: n,
                segment_duration,
                preloaded,
                channel_groups: fast_groups(k),
                never_broadcast: IndexRange::new(n, n),
                redundant_broadcast: IndexRange::new(preloaded.lo, n - 1),
            }
        }
        SchemeConfig::Ctfb { gamma, .. } => {
            let prefix = preload_range(config)?;
            let groups = (0..gamma)
                .map(|i| {
                    IndexRange::new(
                        (pow2(k - gamma + i) + 1) as u64,
                        pow2(k - gamma + i + 1) as u64,
                    )
                })
                .collect();
            SegmentMap {
                config,
                segment_count: n,
                segment_duration,
                preloaded: prefix,
                channel_groups: groups,
                never_broadcast: prefix,
                redundant_broadcast: IndexRange::EMPTY,
            }
        }
    };
    Ok(map)
}

impl SegmentMap {
    pub fn channel_count(&self) -> usize {
        self.channel_groups.len()
    }

    /// Slots needed for channel `channel` to cycle once through its group.
    pub fn period(&self, channel: usize) -> Result<u64> {
        self.group(channel).map(|g| g.len())
    }

    /// Slots after which the whole schedule repeats.
    pub fn full_period(&self) -> u64 {
        // Group sizes are powers of two, so the largest is also the LCM.
        self.channel_groups
            .iter()
            .map(|g| g.len())
            .max()
            .unwrap_or(1)
    }

    pub fn group(&self, channel: usize) -> Result<IndexRange> {
        self.channel_groups
            .get(channel)
            .copied()
            .ok_or(Error::ChannelOutOfRange {
                channel,
                channels: self.channel_count(),
            })
    }

    pub fn segment_at(&self, channel: usize, slot: u64) -> Result<u64> {
        if slot == 0 {
            return Err(Error::ZeroSlot);
        }
        let group = self.group(channel)?;
        Ok(group.lo + (slot - 1) % group.len())
    }

    /// Channel carrying `segment`, if any.
    pub fn channel_of(&self, segment: u64) -> Option<usize> {
        self.channel_groups.iter().position(|g| g.contains(segment))
    }

    pub fn is_preloaded(&self, segment: u64) -> bool {
        self.preloaded.contains(segment)
    }

    /// Content interval `[start, end)` of a segment, in video-seconds.
    pub fn segment_bounds(&self, segment: u64) -> (Rational, Rational) {
        let start = rat(segment as i128 - 1) * self.segment_duration;
        (start, start + self.segment_duration)
    }

    pub fn preload_duration(&self) -> Rational {
        rat(self.preloaded.len() as i128) * self.segment_duration
    }

    /// All `(slot, channel, segment)` rows for the given slots.
    pub fn schedule_rows(&self, first_slot: u64, last_slot: u64) -> Result<Vec<ScheduleRow>> {
        if first_slot == 0 {
            return Err(Error::ZeroSlot);
        }
        let mut rows = Vec::new();
        for slot in first_slot..=last_slot {
            for channel in 0..self.channel_count() {
                rows.push(ScheduleRow {
                    slot,
                    channel,
                    segment: self.segment_at(channel, slot)?,
                });
            }
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub slot: u64,
    pub channel: usize,
    pub segment: u64,
}

pub fn write_schedule_csv<W: Write>(rows: &[ScheduleRow], mut out: W) -> io::Result<()> {
    writeln!(out, "slot,channel,segment_index")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.slot, r.channel, r.segment)?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Refine,
    Coarsen,
    Identity,
}

/// Exact containment between two power-of-two grids over the same video.
///
/// Going one level finer, old segment `i` becomes new segments `2i - 1` and
/// `2i`; larger gaps compose that rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentCorrespondence {
    pub old_k: u32,
    pub new_k: u32,
}

impl SegmentCorrespondence {
    pub fn between(old_k: u32, new_k: u32) -> Result<Self> {
        for k in [old_k, new_k] {
            if k == 0 || k > MAX_K {
                return Err(Error::OutOfRange(format!("k = {k} outside 1..=30")));
            }
        }
        Ok(Self { old_k, new_k })
    }

    pub fn direction(&self) -> Direction {
        match self.new_k.cmp(&self.old_k) {
            std::cmp::Ordering::Greater => Direction::Refine,
            std::cmp::Ordering::Less => Direction::Coarsen,
            std::cmp::Ordering::Equal => Direction::Identity,
        }
    }

    pub fn levels(&self) -> u32 {
        self.old_k.abs_diff(self.new_k)
    }

    pub fn inverse(&self) -> Self {
        Self {
            old_k: self.new_k,
            new_k: self.old_k,
        }
    }

    /// New-grid segments covering the content of old segment `old`.
    /// When coarsening this is the single enclosing segment.
    pub fn map_old(&self, old: u64) -> IndexRange {
        let f = 1u64 << self.levels();
        match self.direction() {
            Direction::Refine => IndexRange::new((old - 1) * f + 1, old * f),
            Direction::Coarsen => {
                let j = old.div_ceil(f);
                IndexRange::new(j, j)
            }
            Direction::Identity => IndexRange::new(old, old),
        }
    }

    /// Old-grid segments covering the content of new segment `new`.
    pub fn map_new(&self, new: u64) -> IndexRange {
        self.inverse().map_old(new)
    }
}

/// Correspondence between two configurations of the same preloading scheme.
pub fn correspondence(old: &SchemeConfig, new: &SchemeConfig) -> Result<SegmentCorrespondence> {
    if old.family() == Family::Fb || new.family() == Family::Fb {
        return Err(Error::NoCorrespondence(format!(
            "{old} and {new}: fast-broadcasting grids of 2^k - 1 segments do not nest"
        )));
    }
    if old.family() != new.family() || old.aux() != new.aux() {
        return Err(Error::NoCorrespondence(format!(
            "{old} and {new}: only k may change"
        )));
    }
    SegmentCorrespondence::between(old.k(), new.k())
}

/// Playback misalignment caused by switching an FB video between channel counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FbTransitionReport {
    pub k_old: u32,
    pub k_new: u32,
    pub playback_pos_s: Rational,
    /// Distance back to the nearest new-grid boundary at or before the position.
    pub replay_s: Rational,
    /// Distance forward to the nearest new-grid boundary at or after the position.
    pub forward_gap_s: Rational,
}

impl FbTransitionReport {
    pub fn on_new_grid(&self) -> bool {
        self.replay_s.is_zero()
    }
}

pub fn fb_transition_report(
    video: &VideoSpec,
    k_old: u32,
    k_new: u32,
    playback_pos_s: Rational,
) -> Result<FbTransitionReport> {
    SchemeConfig::Fb { k: k_old }.validate()?;
    let new = SchemeConfig::Fb { k: k_new }.validate()?;
    let d = video.duration();
    if playback_pos_s < Rational::zero() || playback_pos_s > d {
        return Err(Error::OutOfRange(format!(
            "playback position {playback_pos_s} outside [0, {d}]"
        )));
    }
    let delta = new.segment_duration(d);
    let cells = playback_pos_s / delta;
    let replay_s = playback_pos_s - delta * cells.floor();
    let forward_gap_s = delta * cells.ceil() - playback_pos_s;
    Ok(FbTransitionReport {
        k_old,
        k_new,
        playback_pos_s,
        replay_s,
        forward_gap_s,
    })
}
