//! Domain types shared by every other module.
//!
//! Durations and storage sizes are exact rationals of seconds. One second of
//! video is one second of storage at the playback rate, so a buffer measured
//! in video-seconds converts to bits by multiplying with the playback rate.
//! Megabytes follow the decimal convention (1 MB = 10^6 bytes).

use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact rational used for every time and size quantity.
pub type Rational = Ratio<i128>;

/// Largest supported segmentation exponent; keeps `2^k` inside machine integers.
pub const MAX_K: u32 = 30;

pub const BITS_PER_MEGABYTE: i128 = 8_000_000;

pub fn rat(n: i128) -> Rational {
    Rational::from_integer(n)
}

pub fn pow2(e: u32) -> i128 {
    1i128 << e
}

/// A video described by its size and playback rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VideoSpec {
    size_bits: u64,
    playback_rate_bps: u64,
}

impl VideoSpec {
    pub fn new(size_bits: u64, playback_rate_bps: u64) -> Result<Self> {
        if size_bits == 0 {
            return Err(Error::InvalidVideo("size_bits must be positive"));
        }
        if playback_rate_bps == 0 {
            return Err(Error::InvalidVideo("playback_rate_bps must be positive"));
        }
        Ok(Self {
            size_bits,
            playback_rate_bps,
        })
    }

    /// Decimal megabytes and kilobits per second, e.g. `(10, 10)` is a
    /// 10 MB video played at 10 kbps.
    pub fn from_mb_kbps(megabytes: u64, kbps: u64) -> Result<Self> {
        let bits = megabytes
            .checked_mul(BITS_PER_MEGABYTE as u64)
            .ok_or(Error::InvalidVideo("size overflows 64-bit bit count"))?;
        let bps = kbps
            .checked_mul(1000)
            .ok_or(Error::InvalidVideo("rate overflows 64-bit bps"))?;
        Self::new(bits, bps)
    }

    pub fn size_bits(&self) -> u64 {
        self.size_bits
    }

    pub fn playback_rate_bps(&self) -> u64 {
        self.playback_rate_bps
    }

    /// Playback duration `D` in seconds.
    pub fn duration(&self) -> Rational {
        Rational::new(self.size_bits as i128, self.playback_rate_bps as i128)
    }

    pub fn bits_for(&self, seconds: Rational) -> Rational {
        seconds * rat(self.playback_rate_bps as i128)
    }

    pub fn megabytes_for(&self, seconds: Rational) -> Rational {
        self.bits_for(seconds) / rat(BITS_PER_MEGABYTE)
    }
}

/// Duration of a video in seconds. Validates the raw fields first.
pub fn video_duration(size_bits: u64, playback_rate_bps: u64) -> Result<Rational> {
    VideoSpec::new(size_bits, playback_rate_bps).map(|v| v.duration())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Fb,
    Dpfb,
    Ctfb,
}

impl Family {
    pub fn wire_code(self) -> u8 {
        match self {
            Family::Fb => 0,
            Family::Dpfb => 1,
            Family::Ctfb => 2,
        }
    }

    pub fn from_wire_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Family::Fb),
            1 => Some(Family::Dpfb),
            2 => Some(Family::Ctfb),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Fb => "FB",
            Family::Dpfb => "DPFB",
            Family::Ctfb => "CTFB",
        })
    }
}

/// Broadcast scheme and its parameters.
///
/// `k` always fixes the segmentation: `2^k - 1` segments for FB and `2^k` for
/// the two preloading schemes. DPFB uses `k` channels and preloads the last
/// `1/2^beta` of the video; CTFB uses `gamma` channels and preloads the first
/// `1/2^gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum SchemeConfig {
    Fb { k: u32 },
    Dpfb { beta: u32, k: u32 },
    Ctfb { gamma: u32, k: u32 },
}

impl SchemeConfig {
    pub fn validate(self) -> Result<Self> {
        let fail = |reason| {
            Err(Error::InvalidConfig {
                config: self.to_string(),
                reason,
            })
        };
        let k = self.k();
        if k == 0 {
            return fail("k must be at least 1");
        }
        if k > MAX_K {
            return fail("k must not exceed 30");
        }
        match self {
            SchemeConfig::Fb { .. } => {}
            SchemeConfig::Dpfb { beta, k } => {
                if beta == 0 {
                    return fail("beta must be at least 1");
                }
                if k < beta {
                    return fail("k must be at least beta");
                }
            }
            SchemeConfig::Ctfb { gamma, k } => {
                if gamma == 0 {
                    return fail("gamma must be at least 1");
                }
                if k < gamma {
                    return fail("k must be at least gamma");
                }
            }
        }
        Ok(self)
    }

    pub fn family(&self) -> Family {
        match self {
            SchemeConfig::Fb { .. } => Family::Fb,
            SchemeConfig::Dpfb { .. } => Family::Dpfb,
            SchemeConfig::Ctfb { .. } => Family::Ctfb,
        }
    }

    pub fn k(&self) -> u32 {
        match *self {
            SchemeConfig::Fb { k }
            | SchemeConfig::Dpfb { k, .. }
            | SchemeConfig::Ctfb { k, .. } => k,
        }
    }

    /// `beta` for DPFB, `gamma` for CTFB, 0 for FB.
    pub fn aux(&self) -> u32 {
        match *self {
            SchemeConfig::Fb { .. } => 0,
            SchemeConfig::Dpfb { beta, .. } => beta,
            SchemeConfig::Ctfb { gamma, .. } => gamma,
        }
    }

    pub fn with_k(&self, k: u32) -> Self {
        match *self {
            SchemeConfig::Fb { .. } => SchemeConfig::Fb { k },
            SchemeConfig::Dpfb { beta, .. } => SchemeConfig::Dpfb { beta, k },
            SchemeConfig::Ctfb { gamma, .. } => SchemeConfig::Ctfb { gamma, k },
        }
    }

    /// Rebuilds a config from its wire representation.
    pub fn from_parts(family: Family, k: u32, aux: u32) -> Result<Self> {
        let config = match family {
            Family::Fb => SchemeConfig::Fb { k },
            Family::Dpfb => SchemeConfig::Dpfb { beta: aux, k },
            Family::Ctfb => SchemeConfig::Ctfb { gamma: aux, k },
        };
        config.validate()
    }

    pub fn segment_count(&self) -> u64 {
        match self {
            SchemeConfig::Fb { k } => (pow2(*k) - 1) as u64,
            _ => pow2(self.k()) as u64,
        }
    }

    pub fn channel_count(&self) -> usize {
        match *self {
            SchemeConfig::Fb { k } | SchemeConfig::Dpfb { k, .. } => k as usize,
            SchemeConfig::Ctfb { gamma, .. } => gamma as usize,
        }
    }

    /// Segment duration for a video of length `duration`.
    pub fn segment_duration(&self, duration: Rational) -> Rational {
        duration / rat(self.segment_count() as i128)
    }
}

impl fmt::Display for SchemeConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeConfig::Fb { k } => write!(f, "FB{{k={k}}}"),
            SchemeConfig::Dpfb { beta, k } => write!(f, "DPFB{{beta={beta},k={k}}}"),
            SchemeConfig::Ctfb { gamma, k } => write!(f, "CTFB{{gamma={gamma},k={k}}}"),
        }
    }
}

/// Position on a slotted timeline. Slot `n` starts at `(n - 1) * slot_duration`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotClock {
    slot_index: u64,
    slot_duration: Rational,
    phase: Rational,
}

impl SlotClock {
    pub fn new(slot_index: u64, slot_duration: Rational, phase: Rational) -> Result<Self> {
        if slot_index == 0 {
            return Err(Error::ZeroSlot);
        }
        if slot_duration <= Rational::zero() {
            return Err(Error::OutOfRange(format!(
                "slot duration {slot_duration} must be positive"
            )));
        }
        if phase < Rational::zero() || phase >= slot_duration {
            return Err(Error::OutOfRange(format!(
                "phase {phase} outside [0, {slot_duration})"
            )));
        }
        Ok(Self {
            slot_index,
            slot_duration,
            phase,
        })
    }

    pub fn slot_index(&self) -> u64 {
        self.slot_index
    }

    pub fn slot_duration(&self) -> Rational {
        self.slot_duration
    }

    pub fn phase(&self) -> Rational {
        self.phase
    }

    pub fn boundary(&self) -> Rational {
        rat(self.slot_index as i128 - 1) * self.slot_duration
    }

    pub fn instant(&self) -> Rational {
        self.boundary() + self.phase
    }

    /// The first slot boundary at or after this instant.
    pub fn next_boundary(&self) -> Rational {
        if self.phase.is_zero() {
            self.boundary()
        } else {
            self.boundary() + self.slot_duration
        }
    }
}

/// `ceil(log2 n)` for `n >= 1`, with `ceil(log2 1) = 0`.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n >= 1, "ceil_log2 is undefined for 0");
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
