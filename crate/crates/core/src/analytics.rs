//! Closed-form metrics of the three schemes, evaluated literally.
//!
//! Storage is expressed in video-seconds. The buffer bracket shared by the FB,
//! DPFB and CTFB maximum-buffer formulas is summed term by term (batched over
//! runs of equal `ceil(log2 i)`) rather than replaced by its closed form, so
//! the closed form stays a checkable property.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ceil_log2, pow2, rat, Family, Rational, SchemeConfig, VideoSpec, MAX_K};
use crate::report::rational_json;

pub fn segment_duration(video: &VideoSpec, config: SchemeConfig) -> Result<Rational> {
    Ok(config.validate()?.segment_duration(video.duration()))
}

/// Longest start-up delay: one slot for FB and DPFB, none for CTFB.
pub fn initial_wait_worst(video: &VideoSpec, config: SchemeConfig) -> Result<Rational> {
    let config = config.validate()?;
    Ok(match config.family() {
        Family::Ctfb => rat(0),
        Family::Fb | Family::Dpfb => config.segment_duration(video.duration()),
    })
}

/// Segments a fast-broadcasting client picks up during instant `n` with `k`
/// channels. Zero once every channel has delivered its whole group.
pub fn downloads_at_instant(k: u32, n: u64) -> u64 {
    assert!(n >= 1, "instants are 1-based");
    (k as u64).saturating_sub(ceil_log2(n) as u64)
}

/// Segments downloaded during instants `1..=n`.
pub fn cumulative_downloads(k: u32, n: u64) -> u64 {
    assert!(n >= 1, "instants are 1-based");
    let mut total = k as u64;
    // instants 2^(c-1)+1 ..= 2^c all have ceil(log2 i) = c
    let mut c = 1u32;
    loop {
        let lo = (1u64 << (c - 1)) + 1;
        if lo > n {
            break;
        }
        let hi = (1u64 << c).min(n);
        total += (hi - lo + 1) * (k as u64).saturating_sub(c as u64);
        c += 1;
    }
    total
}

/// Buffered segments at instant `n`: downloads so far minus the `n - 1`
/// already displayed.
fn fb_buffer_segments(k: u32, n: u64) -> u64 {
    cumulative_downloads(k, n) - (n - 1)
}

/// FB storage at instant `n`, in video-seconds.
pub fn fb_buffer_profile(video: &VideoSpec, k: u32, n: u64) -> Result<Rational> {
    let config = SchemeConfig::Fb { k }.validate()?;
    let last = config.segment_count();
    if n == 0 || n > last {
        return Err(Error::OutOfRange(format!("instant {n} outside 1..={last}")));
    }
    Ok(rat(fb_buffer_segments(k, n) as i128) * config.segment_duration(video.duration()))
}

/// Segment count inside the maximum-buffer formulas, evaluated at
/// `n = 2^(k-2)`. For `k = 1` the sum range is empty and the value is the
/// single segment held at `n = 1`.
pub fn buffer_bracket(k: u32) -> u64 {
    assert!((1..=MAX_K).contains(&k), "k outside 1..=30");
    if k == 1 {
        return fb_buffer_segments(1, 1);
    }
    fb_buffer_segments(k, 1u64 << (k - 2))
}

pub fn max_buffer_formula(video: &VideoSpec, config: SchemeConfig) -> Result<Rational> {
    let config = config.validate()?;
    let d = video.duration();
    let bracket = rat(buffer_bracket(config.k()) as i128) * config.segment_duration(d);
    Ok(match config {
        SchemeConfig::Fb { .. } => bracket,
        SchemeConfig::Dpfb { beta, .. } => d / rat(pow2(beta)) + bracket,
        SchemeConfig::Ctfb { gamma, .. } => d / rat(pow2(gamma)) + bracket,
    })
}

/// Distinct segment indices that ever go on air.
pub fn transmitted_distinct_count(config: SchemeConfig) -> Result<u64> {
    let config = config.validate()?;
    let k = config.k();
    Ok(match config {
        SchemeConfig::Fb { .. } | SchemeConfig::Dpfb { .. } => (pow2(k) - 1) as u64,
        SchemeConfig::Ctfb { gamma, .. } => (pow2(k) - pow2(k - gamma)) as u64,
    })
}

/// Distinct segments broadcast although every client preloaded them.
pub fn redundant_count(config: SchemeConfig) -> Result<u64> {
    let config = config.validate()?;
    Ok(match config {
        SchemeConfig::Dpfb { beta, k } => (pow2(k - beta) - 1) as u64,
        SchemeConfig::Fb { .. } | SchemeConfig::Ctfb { .. } => 0,
    })
}

pub fn preload_size(video: &VideoSpec, config: SchemeConfig) -> Result<Rational> {
    let config = config.validate()?;
    let d = video.duration();
    Ok(match config {
        SchemeConfig::Fb { .. } => rat(0),
        SchemeConfig::Dpfb { beta, .. } => d / rat(pow2(beta)),
        SchemeConfig::Ctfb { gamma, .. } => d / rat(pow2(gamma)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ChannelRequirement {
    pub channels: u32,
    pub k: u32,
}

/// Channels needed so that segments are no longer than `target` seconds.
///
/// FB and DPFB buy shorter segments with more channels. CTFB always runs on
/// `gamma` channels and only changes `k`, which is never below `gamma`.
pub fn channels_required(
    video: &VideoSpec,
    family: Family,
    gamma: u32,
    target: Rational,
) -> Result<ChannelRequirement> {
    let d = video.duration();
    if target <= rat(0) || target > d {
        return Err(Error::OutOfRange(format!(
            "target segment size {target} outside (0, {d}]"
        )));
    }
    let smallest_k = |segments: &dyn Fn(u32) -> i128| -> Result<u32> {
        (1..=MAX_K)
            .find(|&k| d <= target * rat(segments(k)))
            .ok_or_else(|| Error::OutOfRange(format!("target {target} needs k > 30")))
    };
    Ok(match family {
        Family::Fb => {
            let k = smallest_k(&|k| pow2(k) - 1)?;
            ChannelRequirement { channels: k, k }
        }
        Family::Dpfb => {
            let k = smallest_k(&pow2)?;
            ChannelRequirement { channels: k, k }
        }
        Family::Ctfb => {
            SchemeConfig::Ctfb { gamma, k: gamma }.validate()?;
            let k = smallest_k(&pow2)?.max(gamma);
            ChannelRequirement { channels: gamma, k }
        }
    })
}

/// Every closed-form quantity for one configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SchemeMetrics {
    pub config: SchemeConfig,
    #[serde(with = "rational_json")]
    pub segment_duration_s: Rational,
    #[serde(with = "rational_json")]
    pub initial_wait_worst_s: Rational,
    #[serde(with = "rational_json")]
    pub max_buffer_formula_s: Rational,
    pub transmitted_distinct_count: u64,
    pub redundant_count: u64,
    #[serde(with = "rational_json")]
    pub preload_s: Rational,
    pub channel_count: usize,
}

impl SchemeMetrics {
    pub fn compute(video: &VideoSpec, config: SchemeConfig) -> Result<Self> {
        let config = config.validate()?;
        Ok(Self {
            config,
            segment_duration_s: segment_duration(video, config)?,
            initial_wait_worst_s: initial_wait_worst(video, config)?,
            max_buffer_formula_s: max_buffer_formula(video, config)?,
            transmitted_distinct_count: transmitted_distinct_count(config)?,
            redundant_count: redundant_count(config)?,
            preload_s: preload_size(video, config)?,
            channel_count: config.channel_count(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::build_segment_map;

    fn video() -> VideoSpec {
        VideoSpec::from_mb_kbps(10, 10).unwrap()
    }

    fn d() -> Rational {
        rat(8000)
    }

    fn r(n: i128, m: i128) -> Rational {
        Rational::new(n, m)
    }

    // Direct transcription of the per-instant sum, one term at a time.
    fn cumulative_naive(k: u32, n: u64) -> u64 {
        let mut total = k as u64;
        for i in 2..=n {
            let log = (i as f64).log2().ceil() as u64;
            total += (k as u64).saturating_sub(log);
        }
        total
    }

    #[test]
    fn segment_duration_examples() {
        let v = video();
        assert_eq!(
            segment_duration(&v, SchemeConfig::Fb { k: 3 }).unwrap(),
            r(8000, 7)
        );
        assert_eq!(
            segment_duration(&v, SchemeConfig::Fb { k: 2 }).unwrap(),
            r(8000, 3)
        );
        assert_eq!(
            segment_duration(&v, SchemeConfig::Ctfb { gamma: 2, k: 4 }).unwrap(),
            rat(500)
        );
        assert_eq!(
            segment_duration(&v, SchemeConfig::Fb { k: 1 }).unwrap(),
            d()
        );
    }

    #[test]
    fn initial_wait_examples() {
        let v = video();
        assert_eq!(
            initial_wait_worst(&v, SchemeConfig::Ctfb { gamma: 2, k: 5 }).unwrap(),
            rat(0)
        );
        assert_eq!(
            initial_wait_worst(&v, SchemeConfig::Fb { k: 2 }).unwrap(),
            r(8000, 3)
        );
        assert_eq!(
            initial_wait_worst(&v, SchemeConfig::Dpfb { beta: 2, k: 4 }).unwrap(),
            rat(500)
        );
    }

    #[test]
    fn per_instant_downloads() {
        assert_eq!(downloads_at_instant(3, 1), 3);
        assert_eq!(downloads_at_instant(3, 3), 1);
        assert_eq!(downloads_at_instant(3, 5), 0);
        assert_eq!(downloads_at_instant(3, 1000), 0);
    }

    #[test]
    fn cumulative_examples() {
        assert_eq!(cumulative_downloads(3, 4), 7);
        assert_eq!(cumulative_downloads(3, 1), 3);
        assert_eq!(cumulative_downloads(4, 2), 7);
    }

    #[test]
    fn batched_sum_matches_term_by_term_sum() {
        for k in 1..=12 {
            for n in 1..=(1u64 << k) + 5 {
                assert_eq!(
                    cumulative_downloads(k, n),
                    cumulative_naive(k, n),
                    "k={k} n={n}"
                );
            }
        }
    }

    #[test]
    fn full_video_downloaded_exactly_once() {
        for k in 1..=12u32 {
            let total: u64 = (1..=1u64 << (k - 1))
                .map(|n| downloads_at_instant(k, n))
                .sum();
            assert_eq!(total as i128, pow2(k) - 1);
        }
    }

    #[test]
    fn fb_profile_examples() {
        let v = video();
        let delta3 = r(8000, 7);
        assert_eq!(fb_buffer_profile(&v, 3, 2).unwrap(), delta3 * rat(4));
        assert_eq!(fb_buffer_profile(&v, 3, 5).unwrap(), delta3 * rat(3));
        assert_eq!(fb_buffer_profile(&v, 2, 1).unwrap(), r(8000, 3) * rat(2));
        assert!(fb_buffer_profile(&v, 3, 0).is_err());
        assert!(fb_buffer_profile(&v, 3, 8).is_err());
    }

    #[test]
    fn fb_profile_peak_plateau() {
        let v = video();
        for k in 3..=12u32 {
            let n_max = (1u64 << k) - 1;
            let profile: Vec<Rational> = (1..=n_max)
                .map(|n| fb_buffer_profile(&v, k, n).unwrap())
                .collect();
            let peak = *profile.iter().max().unwrap();
            let first = profile.iter().position(|p| *p == peak).unwrap() as u64 + 1;
            let last = profile.iter().rposition(|p| *p == peak).unwrap() as u64 + 1;
            assert_eq!(first, 1 << (k - 2), "k={k}");
            assert_eq!(last, 1 << (k - 1), "k={k}");
            assert_eq!(
                peak,
                max_buffer_formula(&v, SchemeConfig::Fb { k }).unwrap()
            );
        }
    }

    #[test]
    fn bracket_closed_form() {
        assert_eq!(buffer_bracket(1), 1);
        for k in 2..=MAX_K {
            assert_eq!(buffer_bracket(k) as i128, pow2(k - 1), "k={k}");
        }
    }

    #[test]
    fn max_buffer_examples() {
        let v = video();
        assert_eq!(
            max_buffer_formula(&v, SchemeConfig::Fb { k: 3 }).unwrap(),
            d() * r(4, 7)
        );
        assert_eq!(
            max_buffer_formula(&v, SchemeConfig::Fb { k: 4 }).unwrap(),
            d() * r(8, 15)
        );
        assert_eq!(
            max_buffer_formula(&v, SchemeConfig::Dpfb { beta: 2, k: 3 }).unwrap(),
            rat(6000)
        );
        assert_eq!(
            max_buffer_formula(&v, SchemeConfig::Fb { k: 1 }).unwrap(),
            d()
        );
    }

    #[test]
    fn fb_max_buffer_strictly_decreasing() {
        let v = video();
        let values: Vec<Rational> = (2..=12)
            .map(|k| max_buffer_formula(&v, SchemeConfig::Fb { k }).unwrap())
            .collect();
        for (k, w) in (2..).zip(values.windows(2)) {
            assert!(w[1] < w[0], "k={k}");
        }
        for k in 2..=12u32 {
            assert_eq!(values[k as usize - 2], d() * r(pow2(k - 1), pow2(k) - 1));
        }
    }

    #[test]
    fn preloading_formulas_agree_and_ignore_k() {
        let v = video();
        for b in 1..=4u32 {
            for k in b..=12 {
                let dp = max_buffer_formula(&v, SchemeConfig::Dpfb { beta: b, k }).unwrap();
                let ct = max_buffer_formula(&v, SchemeConfig::Ctfb { gamma: b, k }).unwrap();
                assert_eq!(dp, ct);
                assert_eq!(dp, d() * (r(1, 2) + r(1, pow2(b))));
                assert!(dp <= d());
            }
        }
    }

    #[test]
    fn transmitted_and_redundant_counts() {
        assert_eq!(
            transmitted_distinct_count(SchemeConfig::Fb { k: 4 }).unwrap(),
            15
        );
        assert_eq!(
            transmitted_distinct_count(SchemeConfig::Ctfb { gamma: 2, k: 4 }).unwrap(),
            12
        );
        for k in 1..=10 {
            assert_eq!(
                transmitted_distinct_count(SchemeConfig::Ctfb { gamma: k, k }).unwrap() as i128,
                pow2(k) - 1
            );
        }
        assert_eq!(
            redundant_count(SchemeConfig::Dpfb { beta: 2, k: 3 }).unwrap(),
            1
        );
        assert_eq!(
            redundant_count(SchemeConfig::Dpfb { beta: 2, k: 6 }).unwrap(),
            15
        );
        assert_eq!(
            redundant_count(SchemeConfig::Ctfb { gamma: 2, k: 6 }).unwrap(),
            0
        );
        assert_eq!(redundant_count(SchemeConfig::Fb { k: 6 }).unwrap(), 0);
    }

    #[test]
    fn counts_agree_with_segment_maps() {
        let v = video();
        for g in 1..=4u32 {
            for k in g..=12 {
                let config = SchemeConfig::Ctfb { gamma: g, k };
                let map = build_segment_map(&v, config).unwrap();
                let on_air: u64 = map.channel_groups.iter().map(|g| g.len()).sum();
                assert_eq!(transmitted_distinct_count(config).unwrap(), on_air);
                assert_eq!(on_air + map.preloaded.len(), 1 << k);
                assert_eq!(redundant_count(config).unwrap(), 0);
                let dp = SchemeConfig::Dpfb { beta: g, k };
                let map = build_segment_map(&v, dp).unwrap();
                assert_eq!(redundant_count(dp).unwrap(), map.redundant_broadcast.len());
            }
        }
    }

    #[test]
    fn channel_requirement_examples() {
        let v = video();
        let t = rat(500);
        assert_eq!(
            channels_required(&v, Family::Fb, 2, t).unwrap(),
            ChannelRequirement { channels: 5, k: 5 }
        );
        assert_eq!(
            channels_required(&v, Family::Dpfb, 2, t).unwrap(),
            ChannelRequirement { channels: 4, k: 4 }
        );
        assert_eq!(
            channels_required(&v, Family::Ctfb, 2, t).unwrap(),
            ChannelRequirement { channels: 2, k: 4 }
        );
        let whole = d();
        assert_eq!(
            channels_required(&v, Family::Fb, 2, whole)
                .unwrap()
                .channels,
            1
        );
        assert_eq!(
            channels_required(&v, Family::Dpfb, 2, whole)
                .unwrap()
                .channels,
            1
        );
        assert_eq!(
            channels_required(&v, Family::Ctfb, 2, whole).unwrap(),
            ChannelRequirement { channels: 2, k: 2 }
        );
        assert!(channels_required(&v, Family::Fb, 2, rat(0)).is_err());
        assert!(channels_required(&v, Family::Fb, 2, rat(-5)).is_err());
    }

    #[test]
    fn preload_examples() {
        let v = video();
        assert_eq!(
            preload_size(&v, SchemeConfig::Ctfb { gamma: 2, k: 5 }).unwrap(),
            rat(2000)
        );
        assert_eq!(
            preload_size(&v, SchemeConfig::Dpfb { beta: 2, k: 5 }).unwrap(),
            rat(2000)
        );
        assert_eq!(preload_size(&v, SchemeConfig::Fb { k: 5 }).unwrap(), rat(0));
        for k in 2..=8 {
            let c = SchemeConfig::Ctfb { gamma: 2, k };
            let map = build_segment_map(&v, c).unwrap();
            assert_eq!(map.preload_duration(), preload_size(&v, c).unwrap());
        }
    }

    #[test]
    fn metrics_bundle() {
        let m = SchemeMetrics::compute(&video(), SchemeConfig::Ctfb { gamma: 2, k: 4 }).unwrap();
        assert_eq!(m.segment_duration_s, rat(500));
        assert_eq!(m.initial_wait_worst_s, rat(0));
        assert_eq!(m.max_buffer_formula_s, rat(6000));
        assert_eq!(m.transmitted_distinct_count, 12);
        assert_eq!(m.channel_count, 2);
        let json = serde_json::to_value(&m).unwrap();
        assert_eq!(json["segment_duration_s"]["exact"], "500");
    }
}
