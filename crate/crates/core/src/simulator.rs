//! Slot-accurate simulation of the broadcast channels and one client.
//!
//! Time and video content are both measured in seconds; a channel delivers
//! video at exactly the playback rate, so one segment fills one slot.
//!
//! Client rules:
//!
//! * Every slot the client stores each broadcast segment it neither holds nor
//!   has already played. Broadcasts that began before the client arrived are
//!   ignored. Preloaded segments are held from the start.
//! * FB and DPFB clients start playback at the first slot boundary at or after
//!   arrival; CTFB clients start immediately from the preload.
//! * A segment may start playing if it is fully held, or if its broadcast
//!   starts at the same instant as its playback (the delivery head then runs
//!   in lockstep with the playback head). With `receive_while_play` any
//!   broadcast that started at or before the playback instant is enough.
//! * A segment is resident from the slot it is stored in through the slot its
//!   playback completes, inclusive. Under this convention the per-slot
//!   resident count of an FB client equals the cumulative downloads minus the
//!   segments already displayed.
//! * A stalled client resumes at the first slot boundary at which it holds the
//!   missing segment.
//!
//! Transitions happen at slot boundaries. DPFB and CTFB transitions remap the
//! held segments through the grid correspondence; a coarse segment counts as
//! held only if none of its halves is missing. FB grids do not nest, so an FB
//! client drops its segments and resumes from a boundary of the new grid:
//! going to more channels it rewinds and replays, going to fewer it skips
//! forward.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::{self, Write};

use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{rat, Family, Rational, SchemeConfig, SlotClock, VideoSpec};
use crate::report::{format_sig, rational_json};
use crate::scheduler::{
    build_segment_map, correspondence, fb_transition_report, Direction, SegmentMap,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Transition {
    /// Slot index, in the grid active when the transition fires, whose start
    /// is the transition instant.
    pub at_slot_boundary: u64,
    pub new_config: SchemeConfig,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimScenario {
    pub video: VideoSpec,
    pub initial: SchemeConfig,
    /// Broadcast slot (1-based, initial grid) in which the client arrives.
    pub arrival_slot: u64,
    /// Offset of the arrival after the start of `arrival_slot`, in seconds.
    pub arrival_phase: Rational,
    pub transitions: Vec<Transition>,
    pub receive_while_play: bool,
}

impl SimScenario {
    pub fn new(video: VideoSpec, initial: SchemeConfig) -> Self {
        Self {
            video,
            initial,
            arrival_slot: 1,
            arrival_phase: Rational::zero(),
            transitions: Vec::new(),
            receive_while_play: false,
        }
    }

    pub fn with_phase(mut self, phase: Rational) -> Self {
        self.arrival_phase = phase;
        self
    }

    pub fn arriving_in_slot(mut self, slot: u64) -> Self {
        self.arrival_slot = slot;
        self
    }

    pub fn with_transition(mut self, at_slot_boundary: u64, new_config: SchemeConfig) -> Self {
        self.transitions.push(Transition {
            at_slot_boundary,
            new_config,
        });
        self
    }

    pub fn receive_while_play(mut self, on: bool) -> Self {
        self.receive_while_play = on;
        self
    }

    pub fn initial_segment_duration(&self) -> Rational {
        self.initial.segment_duration(self.video.duration())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SlotRecord {
    /// Client-relative slot, 1 for the slot of arrival.
    pub slot: u64,
    /// Slot index on the broadcast grid active during this slot.
    pub broadcast_slot: u64,
    pub k: u32,
    #[serde(with = "rational_json")]
    pub wall_time_s: Rational,
    pub downloads: Vec<u64>,
    pub duplicates_skipped: Vec<u64>,
    pub resident_count: u64,
    #[serde(with = "rational_json")]
    pub resident_s: Rational,
    #[serde(with = "rational_json")]
    pub resident_bits: Rational,
    pub playback_segment: Option<u64>,
    pub starved: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    Transition {
        slot: u64,
        #[serde(with = "rational_json")]
        wall_time_s: Rational,
        from: SchemeConfig,
        to: SchemeConfig,
    },
    Starvation {
        slot: u64,
        segment: u64,
        #[serde(with = "rational_json")]
        wall_time_s: Rational,
        #[serde(with = "rational_json")]
        stall_s: Rational,
    },
    Replay {
        slot: u64,
        #[serde(with = "rational_json")]
        seconds: Rational,
    },
    ForwardGap {
        slot: u64,
        #[serde(with = "rational_json")]
        seconds: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSummary {
    pub max_resident_count: u64,
    #[serde(with = "rational_json")]
    pub max_resident_s: Rational,
    #[serde(with = "rational_json")]
    pub max_resident_bits: Rational,
    pub total_downloaded_segments: u64,
    /// Preloaded segments that were stored again.
    pub redundant_received_segments: u64,
    /// Distinct preloaded segments seen on air while the client listened.
    pub redundant_scheduled_segments: u64,
    /// Stored segments overlapping content that was held when a transition
    /// fired and carried over to the new grid.
    pub redownloaded_segments: u64,
    /// Held segments dropped at a transition: coarse halves whose partner was
    /// missing, or everything an FB client held.
    pub dropped_on_transition: u64,
    /// Stored segments overlapping content dropped at a transition.
    pub refetched_dropped_segments: u64,
    #[serde(with = "rational_json")]
    pub total_stall_s: Rational,
    pub playback_complete: bool,
    #[serde(with = "rational_json")]
    pub playback_end_s: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClientTrace {
    pub scenario_initial: SchemeConfig,
    #[serde(with = "rational_json")]
    pub initial_wait_s: Rational,
    pub records: Vec<SlotRecord>,
    pub events: Vec<TraceEvent>,
    pub summary: TraceSummary,
}

impl ClientTrace {
    pub fn resident_counts(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.resident_count).collect()
    }

    pub fn starvation_events(&self) -> impl Iterator<Item = &TraceEvent> {
        self.events
            .iter()
            .filter(|e| matches!(e, TraceEvent::Starvation { .. }))
    }

    /// Segments stored, in order, with the client slot they were stored in.
    pub fn download_log(&self) -> Vec<(u64, u64)> {
        self.records
            .iter()
            .flat_map(|r| r.downloads.iter().map(move |&s| (r.slot, s)))
            .collect()
    }
}

/// How a new schedule is phased after a transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Anchor {
    /// Keep the global numbering: slot `t` of the new grid starts at `(t - 1) * delta`.
    Global,
    /// The new schedule starts its cycles at the transition instant.
    Restart,
}

fn anchor_after_transition(family: Family) -> Anchor {
    match family {
        // CTFB keeps its channels and only subdivides what they carry.
        Family::Ctfb => Anchor::Global,
        // A changed channel set starts its cycles afresh.
        Family::Fb | Family::Dpfb => Anchor::Restart,
    }
}

struct Epoch {
    map: SegmentMap,
    start_time: Rational,
    first_slot: u64,
}

impl Epoch {
    fn delta(&self) -> Rational {
        self.map.segment_duration
    }

    fn slot_start(&self, slot: u64) -> Rational {
        self.start_time + rat((slot - self.first_slot) as i128) * self.delta()
    }
}

#[derive(Debug, Clone, Copy)]
struct Holding {
    /// Start of the broadcast it was taken from; `None` once fully resident
    /// by construction (preload, remap).
    captured_at: Option<Rational>,
    length: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Playback {
    Waiting { start: Rational },
    Playing,
    Stalled { since: Rational, event: usize },
    Complete,
}

struct Client {
    held: BTreeMap<u64, Holding>,
    pos: Rational,
    clock: Rational,
    state: Playback,
    checked: bool,
    receive_while_play: bool,
    carried: Vec<(Rational, Rational)>,
    dropped: Vec<(Rational, Rational)>,
    finished_at: Option<Rational>,
}

impl Client {
    fn segment_at_pos(&self, delta: Rational) -> u64 {
        (self.pos / delta).floor().to_integer() as u64 + 1
    }

    fn available(&self, segment: u64) -> bool {
        match self.held.get(&segment) {
            None => false,
            Some(h) => match h.captured_at {
                None => true,
                Some(b) => self.receive_while_play || b == self.clock || b + h.length <= self.clock,
            },
        }
    }
}

const HORIZON_FACTOR: u64 = 64;

pub fn simulate(scenario: &SimScenario) -> Result<ClientTrace> {
    let video = scenario.video;
    let d = video.duration();
    let initial = scenario.initial.validate()?;
    let first_map = build_segment_map(&video, initial)?;
    let arrival = SlotClock::new(
        scenario.arrival_slot,
        first_map.segment_duration,
        scenario.arrival_phase,
    )?;
    let arrival_time = arrival.instant();

    let mut horizon = first_map.segment_count;
    for t in &scenario.transitions {
        let c = t.new_config.validate()?;
        if c.family() != initial.family() || c.aux() != initial.aux() {
            return Err(Error::InvalidScenario(format!(
                "transition from {initial} to {c} changes more than k"
            )));
        }
        horizon = horizon.max(c.segment_count());
    }
    let max_slots = HORIZON_FACTOR * horizon * (scenario.transitions.len() as u64 + 1) + 64;

    let mut epoch = Epoch {
        map: first_map,
        start_time: Rational::zero(),
        first_slot: 1,
    };
    let playback_start = match initial.family() {
        Family::Ctfb => arrival_time,
        Family::Fb | Family::Dpfb => arrival.next_boundary(),
    };
    let initial_wait_s = playback_start - arrival_time;

    let mut client = Client {
        held: BTreeMap::new(),
        pos: Rational::zero(),
        clock: arrival_time,
        state: Playback::Waiting {
            start: playback_start,
        },
        checked: false,
        receive_while_play: scenario.receive_while_play,
        carried: Vec::new(),
        dropped: Vec::new(),
        finished_at: None,
    };
    for s in epoch.map.preloaded.iter() {
        client.held.insert(
            s,
            Holding {
                captured_at: None,
                length: epoch.delta(),
            },
        );
    }

    let mut pending: VecDeque<Transition> = scenario.transitions.iter().copied().collect();
    let mut records = Vec::new();
    let mut events = Vec::new();
    let mut scheduled_redundant = BTreeSet::new();
    let mut total_downloads = 0u64;
    let mut redundant_received = 0u64;
    let mut redownloaded = 0u64;
    let mut refetched = 0u64;
    let mut dropped_on_transition = 0u64;
    let mut total_stall = Rational::zero();
    let mut slot = scenario.arrival_slot;
    let mut client_slot = 0u64;
    // transitions must fire strictly after this slot boundary
    let mut floor = scenario.arrival_slot;

    while client.state != Playback::Complete {
        if client_slot >= max_slots {
            return Err(Error::HorizonExceeded(max_slots));
        }
        client_slot += 1;

        if let Some(tr) = pending.front().copied() {
            if tr.at_slot_boundary <= floor {
                return Err(Error::InvalidScenario(format!(
                    "transition at slot boundary {} is not after slot {}",
                    tr.at_slot_boundary, floor
                )));
            }
            if tr.at_slot_boundary == slot {
                pending.pop_front();
                let tau = epoch.slot_start(slot);
                let from = epoch.map.config;
                let to = tr.new_config.validate()?;
                let new_map = build_segment_map(&video, to)?;
                let new_delta = new_map.segment_duration;
                events.push(TraceEvent::Transition {
                    slot: client_slot,
                    wall_time_s: tau,
                    from,
                    to,
                });
                let first_slot = match anchor_after_transition(to.family()) {
                    Anchor::Global => {
                        let cells = tau / new_delta;
                        if !cells.is_integer() {
                            return Err(Error::MisalignedTransition {
                                slot: tr.at_slot_boundary,
                            });
                        }
                        cells.to_integer() as u64 + 1
                    }
                    Anchor::Restart => 1,
                };
                if to.family() != Family::Fb && !(tau / new_delta).is_integer() {
                    return Err(Error::MisalignedTransition {
                        slot: tr.at_slot_boundary,
                    });
                }
                dropped_on_transition += match to.family() {
                    Family::Fb => apply_fb_transition(
                        &video,
                        &mut client,
                        from,
                        to,
                        new_delta,
                        client_slot,
                        &mut events,
                    )?,
                    Family::Dpfb | Family::Ctfb => remap_held(&mut client, &epoch.map, &new_map)?,
                };
                // a stalled client keeps waiting; the missing segment is
                // looked up again on the new grid
                client.checked = false;
                if client.pos >= d {
                    client.state = Playback::Complete;
                    client.finished_at = Some(tau);
                }
                epoch = Epoch {
                    map: new_map,
                    start_time: tau,
                    first_slot,
                };
                slot = first_slot;
                floor = slot;
            }
        }
        if client.state == Playback::Complete {
            break;
        }

        let slot_start = epoch.slot_start(slot);
        let delta = epoch.delta();
        let slot_end = slot_start + delta;

        // release everything already played
        client
            .held
            .retain(|&s, _| rat(s as i128) * delta > client.pos);

        let mut downloads = Vec::new();
        let mut duplicates = Vec::new();
        if slot_start >= arrival_time {
            for ch in 0..epoch.map.channel_count() {
                let seg = epoch.map.segment_at(ch, slot)?;
                let (lo, hi) = epoch.map.segment_bounds(seg);
                if epoch.map.is_preloaded(seg) {
                    scheduled_redundant.insert((epoch.map.config.k(), seg));
                    if !client.held.contains_key(&seg) && hi > client.pos {
                        redundant_received += 1;
                    } else {
                        duplicates.push(seg);
                        continue;
                    }
                }
                if client.held.contains_key(&seg) || hi <= client.pos {
                    duplicates.push(seg);
                    continue;
                }
                let from = lo.max(client.pos);
                let overlaps =
                    |spans: &[(Rational, Rational)]| spans.iter().any(|&(a, b)| a < hi && from < b);
                if overlaps(&client.carried) {
                    redownloaded += 1;
                } else if overlaps(&client.dropped) {
                    refetched += 1;
                }
                client.held.insert(
                    seg,
                    Holding {
                        captured_at: Some(slot_start),
                        length: delta,
                    },
                );
                downloads.push(seg);
                total_downloads += 1;
            }
        }

        if let Playback::Stalled { since, event } = client.state {
            let missing = client.segment_at_pos(delta);
            if client.held.contains_key(&missing) {
                let stall = slot_start - since;
                total_stall += stall;
                if let TraceEvent::Starvation { stall_s, .. } = &mut events[event] {
                    *stall_s = stall;
                }
                client.state = Playback::Playing;
                client.checked = true;
                client.clock = slot_start;
            }
        }

        let resident_count = client.held.len() as u64;
        let resident_s = rat(resident_count as i128) * delta;

        let mut starved = matches!(client.state, Playback::Stalled { .. });
        let mut playback_segment = None;
        if client.clock < slot_start {
            client.clock = slot_start;
        }
        while client.clock < slot_end {
            match client.state {
                Playback::Complete | Playback::Stalled { .. } => break,
                Playback::Waiting { start } => {
                    if start >= slot_end {
                        break;
                    }
                    client.clock = client.clock.max(start);
                    client.state = Playback::Playing;
                    client.checked = false;
                }
                Playback::Playing => {
                    let seg = client.segment_at_pos(delta);
                    if !client.checked {
                        if !client.available(seg) {
                            events.push(TraceEvent::Starvation {
                                slot: client_slot,
                                segment: seg,
                                wall_time_s: client.clock,
                                stall_s: Rational::zero(),
                            });
                            client.state = Playback::Stalled {
                                since: client.clock,
                                event: events.len() - 1,
                            };
                            starved = true;
                            break;
                        }
                        client.checked = true;
                    }
                    playback_segment.get_or_insert(seg);
                    let seg_end = rat(seg as i128) * delta;
                    let run = (seg_end - client.pos).min(slot_end - client.clock);
                    client.pos += run;
                    client.clock += run;
                    if client.pos == seg_end {
                        client.checked = false;
                        if client.pos >= d {
                            client.state = Playback::Complete;
                            client.finished_at = Some(client.clock);
                        }
                    }
                }
            }
        }
        client.clock = client.clock.max(slot_end);

        records.push(SlotRecord {
            slot: client_slot,
            broadcast_slot: slot,
            k: epoch.map.config.k(),
            wall_time_s: slot_start,
            downloads,
            duplicates_skipped: duplicates,
            resident_count,
            resident_s,
            resident_bits: video.bits_for(resident_s),
            playback_segment,
            starved,
        });
        slot += 1;
    }

    let max_record = records
        .iter()
        .max_by(|a, b| a.resident_s.cmp(&b.resident_s));
    let max_resident_s = max_record
        .map(|r| r.resident_s)
        .unwrap_or_else(Rational::zero);
    let summary = TraceSummary {
        max_resident_count: records.iter().map(|r| r.resident_count).max().unwrap_or(0),
        max_resident_s,
        max_resident_bits: video.bits_for(max_resident_s),
        total_downloaded_segments: total_downloads,
        redundant_received_segments: redundant_received,
        redundant_scheduled_segments: scheduled_redundant.len() as u64,
        redownloaded_segments: redownloaded,
        dropped_on_transition,
        refetched_dropped_segments: refetched,
        total_stall_s: total_stall,
        playback_complete: client.state == Playback::Complete,
        playback_end_s: client.finished_at.unwrap_or(client.clock),
    };
    Ok(ClientTrace {
        scenario_initial: initial,
        initial_wait_s,
        records,
        events,
        summary,
    })
}

fn apply_fb_transition(
    video: &VideoSpec,
    client: &mut Client,
    from: SchemeConfig,
    to: SchemeConfig,
    new_delta: Rational,
    client_slot: u64,
    events: &mut Vec<TraceEvent>,
) -> Result<u64> {
    let report = fb_transition_report(video, from.k(), to.k(), client.pos)?;
    let dropped = client.held.len() as u64;
    for (&s, h) in &client.held {
        let start = rat(s as i128 - 1) * h.length;
        client
            .dropped
            .push((start.max(client.pos), start + h.length));
    }
    client.held.clear();
    if !report.on_new_grid() {
        if to.k() > from.k() {
            client.pos -= report.replay_s;
            events.push(TraceEvent::Replay {
                slot: client_slot,
                seconds: report.replay_s,
            });
        } else {
            client.pos += report.forward_gap_s;
            events.push(TraceEvent::ForwardGap {
                slot: client_slot,
                seconds: report.forward_gap_s,
            });
        }
    }
    debug_assert!((client.pos / new_delta).is_integer());
    Ok(dropped)
}

/// Carries held segments over to the new grid. Returns how many held
/// segments were dropped because their coarse partner was missing.
fn remap_held(client: &mut Client, old: &SegmentMap, new: &SegmentMap) -> Result<u64> {
    let corr = correspondence(&old.config, &new.config)?;
    let new_delta = new.segment_duration;
    let old_delta = old.segment_duration;
    let pos = client.pos;
    let old_held = std::mem::take(&mut client.held);
    for &s in old_held.keys() {
        let start = rat(s as i128 - 1) * old_delta;
        client.carried.push((start.max(pos), start + old_delta));
    }
    let resident = Holding {
        captured_at: None,
        length: new_delta,
    };
    let mut dropped = 0;
    match corr.direction() {
        Direction::Identity => {
            client.held = old_held;
        }
        Direction::Refine => {
            for &s in old_held.keys() {
                for fine in corr.map_old(s).iter() {
                    if rat(fine as i128) * new_delta > pos {
                        client.held.insert(fine, resident);
                    }
                }
            }
        }
        Direction::Coarsen => {
            let played = |s: u64| rat(s as i128) * old_delta <= pos;
            let mut candidates: BTreeSet<u64> = BTreeSet::new();
            for &s in old_held.keys() {
                candidates.insert(corr.map_old(s).lo);
            }
            for coarse in candidates {
                let halves = corr.map_new(coarse);
                if halves
                    .iter()
                    .all(|h| old_held.contains_key(&h) || played(h))
                {
                    client.held.insert(coarse, resident);
                } else {
                    for h in halves.iter().filter(|h| old_held.contains_key(h)) {
                        dropped += 1;
                        let span = (rat(h as i128 - 1) * old_delta, rat(h as i128) * old_delta);
                        client.carried.retain(|c| *c != (span.0.max(pos), span.1));
                        client.dropped.push(span);
                    }
                }
            }
        }
    }
    Ok(dropped)
}

/// Aggregate of one scenario replayed at several arrival phases.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseSweep {
    #[serde(with = "rational_json")]
    pub worst_wait_s: Rational,
    #[serde(with = "rational_json")]
    pub average_wait_s: Rational,
    #[serde(with = "rational_json")]
    pub max_resident_s: Rational,
    pub starvation_free: bool,
    pub per_phase: Vec<PhaseOutcome>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhaseOutcome {
    #[serde(with = "rational_json")]
    pub phase_s: Rational,
    #[serde(with = "rational_json")]
    pub initial_wait_s: Rational,
    #[serde(with = "rational_json")]
    pub max_resident_s: Rational,
    pub starved: bool,
}

pub fn sweep_arrival_phases(scenario: &SimScenario, phases: &[Rational]) -> Result<PhaseSweep> {
    if phases.is_empty() {
        return Err(Error::InvalidScenario("no phases to sweep".into()));
    }
    let mut per_phase = Vec::with_capacity(phases.len());
    for &phase in phases {
        let trace = simulate(&scenario.clone().with_phase(phase))?;
        per_phase.push(PhaseOutcome {
            phase_s: phase,
            initial_wait_s: trace.initial_wait_s,
            max_resident_s: trace.summary.max_resident_s,
            starved: !verify_no_starvation(&trace).ok,
        });
    }
    let worst_wait_s = per_phase.iter().map(|p| p.initial_wait_s).max().unwrap();
    let total: Rational = per_phase.iter().map(|p| p.initial_wait_s).sum();
    Ok(PhaseSweep {
        worst_wait_s,
        average_wait_s: total / rat(per_phase.len() as i128),
        max_resident_s: per_phase.iter().map(|p| p.max_resident_s).max().unwrap(),
        starvation_free: per_phase.iter().all(|p| !p.starved),
        per_phase,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StarvationCheck {
    pub ok: bool,
    pub first_starved_slot: Option<u64>,
}

pub fn verify_no_starvation(trace: &ClientTrace) -> StarvationCheck {
    let first = trace.starvation_events().find_map(|e| match e {
        TraceEvent::Starvation { slot, .. } => Some(*slot),
        _ => None,
    });
    StarvationCheck {
        ok: first.is_none(),
        first_starved_slot: first,
    }
}

/// Per-slot CSV: `slot,wall_time_s,downloads,resident_count,resident_bits,playback_segment,starved`.
/// Download lists are separated by `;`.
pub fn write_trace_csv<W: Write>(trace: &ClientTrace, mut out: W) -> io::Result<()> {
    writeln!(
        out,
        "slot,wall_time_s,downloads,resident_count,resident_bits,playback_segment,starved"
    )?;
    for r in &trace.records {
        let downloads: Vec<String> = r.downloads.iter().map(u64::to_string).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.slot,
            format_sig(r.wall_time_s, 12),
            downloads.join(";"),
            r.resident_count,
            format_sig(r.resident_bits, 12),
            r.playback_segment
                .map(|s| s.to_string())
                .unwrap_or_default(),
            r.starved
        )?;
    }
    Ok(())
}

/// JSON object with the initial wait, events and summary.
pub fn trace_summary_json(trace: &ClientTrace) -> serde_json::Value {
    serde_json::json!({
        "initial": trace.scenario_initial,
        "initial_wait_s": serde_json::to_value(RationalOut(trace.initial_wait_s)).unwrap(),
        "slots": trace.records.len(),
        "events": trace.events,
        "summary": trace.summary,
    })
}

struct RationalOut(Rational);

impl Serialize for RationalOut {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational_json::serialize(&self.0, s)
    }
}
