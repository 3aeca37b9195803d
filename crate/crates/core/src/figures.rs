//! Comparison datasets: waiting time, channel requirement, redundant
//! transmission and buffer requirement across FB, DPFB and CTFB.

use std::io::{self, Write};
use std::ops::RangeInclusive;

use crate::analytics::{
    channels_required, initial_wait_worst, max_buffer_formula, redundant_count,
};
use crate::error::{Error, Result};
use crate::model::{pow2, rat, Family, Rational, SchemeConfig, VideoSpec};
use crate::report::format_sig;
use crate::simulator::{simulate, SimScenario};

pub const SIGNIFICANT_DIGITS: u32 = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FigureDataset {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    /// Exact values, one inner vector per row, sorted by the first column.
    pub rows: Vec<Vec<Rational>>,
    /// Emitted as `#` comment lines above the header.
    pub notes: Vec<String>,
}

impl FigureDataset {
    /// `fig6_wait` is written to `fig6.csv`.
    pub fn file_name(&self) -> String {
        let stem = self.name.split('_').next().unwrap_or(self.name);
        format!("{stem}.csv")
    }

    pub fn column(&self, name: &str) -> Option<Vec<Rational>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "# dataset: {}", self.name)?;
        for note in &self.notes {
            writeln!(out, "# {note}")?;
        }
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| format_sig(*v, SIGNIFICANT_DIGITS))
                .collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }
}

fn setup_note(video: &VideoSpec) -> String {
    format!(
        "video: {} bits at {} bit/s, duration {} s",
        video.size_bits(),
        video.playback_rate_bps(),
        format_sig(video.duration(), SIGNIFICANT_DIGITS)
    )
}

fn check_range(k_range: &RangeInclusive<u32>, min_k: u32, what: &str) -> Result<()> {
    if k_range.is_empty() || *k_range.start() < min_k || *k_range.end() > 12 {
        return Err(Error::OutOfRange(format!(
            "{what}: k range {}..={} must lie within {min_k}..=12",
            k_range.start(),
            k_range.end()
        )));
    }
    Ok(())
}

/// Worst start-up delay per scheme. The DPFB column is one slot of its
/// `2^k`-segment grid, which does not depend on beta, so rows with `k < beta`
/// are still defined.
pub fn figure_wait(
    video: &VideoSpec,
    k_range: RangeInclusive<u32>,
    beta: u32,
    gamma: u32,
) -> Result<FigureDataset> {
    check_range(&k_range, 1, "figure_wait")?;
    SchemeConfig::Dpfb { beta, k: beta }.validate()?;
    SchemeConfig::Ctfb { gamma, k: gamma }.validate()?;
    let d = video.duration();
    let mut rows = Vec::new();
    for k in k_range {
        let fb = initial_wait_worst(video, SchemeConfig::Fb { k })?;
        let dpfb = d / rat(pow2(k));
        let ctfb = initial_wait_worst(
            video,
            SchemeConfig::Ctfb {
                gamma,
                k: k.max(gamma),
            },
        )?;
        rows.push(vec![rat(k as i128), fb, dpfb, ctfb]);
    }
    Ok(FigureDataset {
        name: "fig6_wait",
        columns: vec!["k", "wait_fb_s", "wait_dpfb_s", "wait_ctfb_s"],
        rows,
        notes: vec![setup_note(video), format!("beta = {beta}, gamma = {gamma}")],
    })
}

/// Channels needed to bring segments down to each target size.
pub fn figure_channels(
    video: &VideoSpec,
    target_sizes: &[Rational],
    gamma: u32,
) -> Result<FigureDataset> {
    let mut targets = target_sizes.to_vec();
    targets.sort();
    targets.dedup();
    let mut rows = Vec::new();
    for target in targets {
        let ch = |family| {
            channels_required(video, family, gamma, target).map(|r| rat(r.channels as i128))
        };
        rows.push(vec![
            target,
            ch(Family::Fb)?,
            ch(Family::Dpfb)?,
            ch(Family::Ctfb)?,
        ]);
    }
    Ok(FigureDataset {
        name: "fig7_channels",
        columns: vec!["segment_size_s", "ch_fb", "ch_dpfb", "ch_ctfb"],
        rows,
        notes: vec![setup_note(video), format!("gamma = {gamma}")],
    })
}

/// Targets `D / 2^j` for `j = 0..=k_max`, smallest first.
pub fn halving_targets(video: &VideoSpec, k_max: u32) -> Vec<Rational> {
    let mut out: Vec<Rational> = (0..=k_max)
        .map(|j| video.duration() / rat(pow2(j)))
        .collect();
    out.reverse();
    out
}

/// Distinct segments broadcast although every client preloaded them.
pub fn figure_redundant(
    video: &VideoSpec,
    k_range: RangeInclusive<u32>,
    beta: u32,
    gamma: u32,
) -> Result<FigureDataset> {
    check_range(&k_range, beta.max(gamma), "figure_redundant")?;
    let mut rows = Vec::new();
    for k in k_range {
        let count = |c| redundant_count(c).map(|n| rat(n as i128));
        rows.push(vec![
            rat(k as i128),
            count(SchemeConfig::Fb { k })?,
            count(SchemeConfig::Dpfb { beta, k })?,
            count(SchemeConfig::Ctfb { gamma, k })?,
        ]);
    }
    Ok(FigureDataset {
        name: "fig8_redundant",
        columns: vec!["k", "red_fb", "red_dpfb", "red_ctfb"],
        rows,
        notes: vec![setup_note(video), format!("beta = {beta}, gamma = {gamma}")],
    })
}

/// Closed-form buffer sizes next to the peaks measured by phase-0 simulation.
pub fn figure_buffer(
    video: &VideoSpec,
    k_range: RangeInclusive<u32>,
    beta: u32,
    gamma: u32,
) -> Result<FigureDataset> {
    check_range(&k_range, beta.max(gamma).max(2), "figure_buffer")?;
    let mb = |seconds| video.megabytes_for(seconds);
    let simulated = |config| -> Result<Rational> {
        Ok(mb(simulate(&SimScenario::new(*video, config))?
            .summary
            .max_resident_s))
    };
    let mut rows = Vec::new();
    for k in k_range {
        let dpfb = SchemeConfig::Dpfb { beta, k };
        let ctfb = SchemeConfig::Ctfb { gamma, k };
        rows.push(vec![
            rat(k as i128),
            mb(max_buffer_formula(video, SchemeConfig::Fb { k })?),
            mb(max_buffer_formula(video, dpfb)?),
            mb(max_buffer_formula(video, ctfb)?),
            simulated(dpfb)?,
            simulated(ctfb)?,
        ]);
    }
    Ok(FigureDataset {
        name: "fig9_buffer",
        columns: vec![
            "k",
            "buf_fb_MB",
            "buf_dpfb_formula_MB",
            "buf_ctfb_formula_MB",
            "buf_dpfb_sim_MB",
            "buf_ctfb_sim_MB",
        ],
        rows,
        notes: vec![
            setup_note(video),
            format!("beta = {beta}, gamma = {gamma}; megabytes are 10^6 bytes"),
            "discrepancy: the CTFB formula gives D/2^gamma + D/2 for every k, \
             but the simulated CTFB client peaks at D/2 + D/2^k, \
             which matches only at k = gamma and falls towards D/2 as k grows; \
             DPFB formula and simulation agree"
                .to_string(),
        ],
    })
}

/// The four datasets for `k` up to `k_max`.
pub fn standard_figures(
    video: &VideoSpec,
    k_max: u32,
    beta: u32,
    gamma: u32,
) -> Result<Vec<FigureDataset>> {
    Ok(vec![
        figure_wait(video, 1..=k_max, beta, gamma)?,
        figure_channels(video, &halving_targets(video, k_max), gamma)?,
        figure_redundant(video, beta.max(gamma)..=k_max, beta, gamma)?,
        figure_buffer(video, beta.max(gamma).max(2)..=k_max, beta, gamma)?,
    ])
}
