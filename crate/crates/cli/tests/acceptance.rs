//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so that every line reaches the terminal.
//! A criterion listed in `KNOWN_UNATTAINABLE` is still evaluated and still
//! reported as FAIL, but does not fail the run; if it ever passes, the run
//! fails so the list gets updated.

use std::collections::BTreeSet;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};

use nvod_core::analytics::{
    buffer_bracket, downloads_at_instant, max_buffer_formula, segment_duration,
};
use nvod_core::model::{pow2, rat};
use nvod_core::report::format_sig;
use nvod_core::scheduler::{build_segment_map, correspondence, fb_transition_report};
use nvod_core::simulator::{simulate, sweep_arrival_phases, verify_no_starvation, SimScenario};
use nvod_core::transport::{
    crc32, decode_frame, encode_frame, loopback, Assembler, ChunkFrame, Pacing, SegmentLayout,
    Server,
};
use nvod_core::{Family, Rational, SchemeConfig, VideoSpec};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

/// Criteria that cannot hold as written, with the reason.
const KNOWN_UNATTAINABLE: &[(u32, &str)] = &[(
    7,
    "the fixed frame fields are 28 header bytes plus a 4-byte CRC, \
     so a frame is 32 + chunk_len bytes and cannot be 29 + chunk_len",
)];

fn video() -> VideoSpec {
    VideoSpec::from_mb_kbps(10, 10).unwrap()
}

fn d() -> Rational {
    video().duration()
}

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// `ceil(log2 n)` by repeated doubling.
fn ceil_log2_slow(n: u64) -> u32 {
    let mut c = 0;
    while (1u64 << c) < n {
        c += 1;
    }
    c
}

/// Fast-broadcasting storage at instant `n`, in segments, summed term by term.
fn fb_buffer_oracle(k: u32, n: u64) -> i128 {
    let downloaded: i128 = (1..=n)
        .map(|i| (k as i128 - ceil_log2_slow(i) as i128).max(0))
        .sum();
    downloaded - (n as i128 - 1)
}

fn criterion_1() -> Outcome {
    let v = video();
    ensure!(
        segment_duration(&v, SchemeConfig::Fb { k: 2 }).unwrap() == d() / rat(3),
        "FB k=2 segment is not D/3"
    );
    ensure!(
        segment_duration(&v, SchemeConfig::Fb { k: 3 }).unwrap() == d() / rat(7),
        "FB k=3 segment is not D/7"
    );
    for k in 2..=12u32 {
        let n = pow2(k) - 1;
        ensure!(
            segment_duration(&v, SchemeConfig::Fb { k }).unwrap() == d() / rat(n),
            "FB k={k} segment duration"
        );
        let total: u64 = (1..=1u64 << (k - 1))
            .map(|i| downloads_at_instant(k, i))
            .sum();
        ensure!(
            total as i128 == n,
            "k={k}: downloads sum to {total}, not {n}"
        );
        ensure!(
            buffer_bracket(k) as i128 == pow2(k - 1),
            "k={k}: bracket {} != 2^(k-1)",
            buffer_bracket(k)
        );
        let expected = rat(pow2(k - 1)) * d() / rat(n);
        ensure!(
            max_buffer_formula(&v, SchemeConfig::Fb { k }).unwrap() == expected,
            "k={k}: FB max buffer"
        );
    }
    ensure!(
        max_buffer_formula(&v, SchemeConfig::Fb { k: 3 }).unwrap() == rat(4) * d() / rat(7),
        "FB k=3 max buffer is not 4D/7"
    );
    Ok("k in 2..=12 exact".into())
}

fn criterion_2() -> Outcome {
    for k in 2..=8u32 {
        let config = SchemeConfig::Fb { k };
        let delta = d() / rat(pow2(k) - 1);
        let trace = simulate(&SimScenario::new(video(), config)).unwrap();
        ensure!(
            trace.records.len() as i128 == pow2(k) - 1,
            "k={k}: trace length"
        );
        for rec in &trace.records {
            let expected = rat(fb_buffer_oracle(k, rec.slot)) * delta;
            ensure!(
                rec.resident_s == expected,
                "k={k} slot {}: resident {} != {}",
                rec.slot,
                rec.resident_s,
                expected
            );
        }
        let peak = rat(pow2(k - 1)) * delta;
        ensure!(trace.summary.max_resident_s == peak, "k={k}: peak");
        if k >= 3 {
            let at_peak: Vec<u64> = trace
                .records
                .iter()
                .filter(|r| r.resident_s == peak)
                .map(|r| r.slot)
                .collect();
            let plateau: Vec<u64> = ((1u64 << (k - 2))..=(1u64 << (k - 1))).collect();
            ensure!(at_peak == plateau, "k={k}: peak at {at_peak:?}");
        }
    }
    Ok("k in 2..=8, slot-by-slot and peak plateau".into())
}

fn criterion_3() -> Outcome {
    for k in 2..=8u32 {
        let trace = simulate(&SimScenario::new(
            video(),
            SchemeConfig::Dpfb { beta: 2, k },
        ))
        .unwrap();
        let expected = d() / rat(4) + d() / rat(2);
        ensure!(
            trace.summary.max_resident_s == expected,
            "k={k}: peak {} != {}",
            trace.summary.max_resident_s,
            expected
        );
    }
    let k3 = simulate(&SimScenario::new(
        video(),
        SchemeConfig::Dpfb { beta: 2, k: 3 },
    ))
    .unwrap();
    ensure!(
        k3.summary.max_resident_s == rat(6000),
        "k=3 peak not 6000 s"
    );
    ensure!(
        video().megabytes_for(k3.summary.max_resident_s) == Rational::new(15, 2),
        "k=3 peak not 7.5 MB"
    );
    Ok("beta=2, k in 2..=8; k=3 peak 6000 s = 7.5 MB".into())
}

fn criterion_4() -> Outcome {
    let v = video();
    for gamma in 2..=3u32 {
        for k in gamma..=8 {
            let config = SchemeConfig::Ctfb { gamma, k };
            let delta = d() / rat(pow2(k));
            let aligned = simulate(&SimScenario::new(v, config)).unwrap();
            ensure!(aligned.initial_wait_s == rat(0), "{config}: phase-0 wait");
            ensure!(
                verify_no_starvation(&aligned).ok,
                "{config}: phase-0 starvation"
            );
            let phases: Vec<Rational> = (0..4).map(|i| delta * Rational::new(i, 4)).collect();
            let sweep = sweep_arrival_phases(
                &SimScenario::new(v, config).receive_while_play(true),
                &phases,
            )
            .unwrap();
            ensure!(
                sweep.worst_wait_s == rat(0),
                "{config}: wait {}",
                sweep.worst_wait_s
            );
            ensure!(sweep.starvation_free, "{config}: starvation in phase sweep");
        }
    }
    for k in 2..=8u32 {
        for config in [SchemeConfig::Fb { k }, SchemeConfig::Dpfb { beta: 2, k }] {
            let delta = config.segment_duration(d());
            let scenario = SimScenario::new(v, config).receive_while_play(true);
            let phases: Vec<Rational> = (0..4).map(|i| delta * Rational::new(i, 4)).collect();
            let sweep = sweep_arrival_phases(&scenario, &phases).unwrap();
            ensure!(
                sweep.worst_wait_s == delta - delta / rat(4),
                "{config}: worst wait {}",
                sweep.worst_wait_s
            );
            let mut last = rat(0);
            for j in 1..=20u32 {
                let eps = delta / rat(pow2(j));
                let w = sweep_arrival_phases(&scenario, &[eps])
                    .unwrap()
                    .worst_wait_s;
                ensure!(
                    w == delta - eps && w > last && w < delta,
                    "{config}: sup sequence"
                );
                last = w;
            }
        }
    }
    Ok("CTFB wait 0 without starvation; FB/DPFB worst wait = delta - min positive phase, sup = delta".into())
}

fn criterion_5() -> Outcome {
    let v = video();
    let mut runs = 0;
    for aux in 2..=3u32 {
        for k1 in aux..=7 {
            for k2 in aux..=7 {
                if k1 == k2 {
                    continue;
                }
                for c1 in [
                    SchemeConfig::Dpfb { beta: aux, k: k1 },
                    SchemeConfig::Ctfb { gamma: aux, k: k1 },
                ] {
                    let c2 = c1.with_k(k2);
                    let corr = correspondence(&c1, &c2).unwrap();
                    // new segments mapped from `old` cover exactly its content
                    // when refining and the smallest enclosing one when coarsening
                    let (d1, d2) = (d() / rat(pow2(k1)), d() / rat(pow2(k2)));
                    for old in 1..=c1.segment_count() {
                        let span = corr.map_old(old);
                        let (lo, hi) = (rat(span.lo as i128 - 1) * d2, rat(span.hi as i128) * d2);
                        let (olo, ohi) = (rat(old as i128 - 1) * d1, rat(old as i128) * d1);
                        let tight = if k2 > k1 {
                            lo == olo && hi == ohi
                        } else {
                            span.lo == span.hi && lo <= olo && ohi <= hi
                        };
                        ensure!(tight, "{c1} -> {c2}: mapping of segment {old}");
                        for new in span.iter() {
                            ensure!(
                                corr.map_new(new).contains(old),
                                "{c1} -> {c2}: inverse of {old}"
                            );
                        }
                    }
                    let period = 1u64 << (k1 - 1);
                    let step = if k2 < k1 { 1u64 << (k1 - k2) } else { 1 };
                    for t in (2..=period + 1).filter(|t| (t - 1) % step == 0) {
                        let trace =
                            simulate(&SimScenario::new(v, c1).with_transition(t, c2)).unwrap();
                        ensure!(
                            verify_no_starvation(&trace).ok,
                            "{c1} -> {c2} at {t}: starvation"
                        );
                        ensure!(
                            trace.summary.redownloaded_segments == 0,
                            "{c1} -> {c2} at {t}: re-downloads"
                        );
                        ensure!(
                            trace.summary.playback_complete,
                            "{c1} -> {c2} at {t}: incomplete"
                        );
                        runs += 1;
                    }
                }
            }
        }
    }
    let rep = fb_transition_report(&v, 2, 3, d() / rat(3)).unwrap();
    ensure!(
        rep.replay_s == d() / rat(21),
        "FB 2->3 replay {}",
        rep.replay_s
    );
    Ok(format!(
        "{runs} aligned transitions clean; FB 2->3 at D/3 replays D/21"
    ))
}

struct Wire {
    video: VideoSpec,
    source: Vec<u8>,
}

impl Wire {
    fn new(config: SchemeConfig) -> Self {
        let bytes = config.segment_count() * 256;
        let video = VideoSpec::new(bytes * 8, 10_000).unwrap();
        let source = (0..bytes).map(|i| (i * 31 % 251) as u8).collect();
        Self { video, source }
    }

    /// Loopback run over `periods` full periods; returns segment indices seen
    /// and the assembler.
    fn run(&self, config: SchemeConfig, periods: u64) -> (BTreeSet<u64>, Assembler) {
        let map = build_segment_map(&self.video, config).unwrap();
        let server = Server::new(&map, &self.video, &self.source, 100).unwrap();
        let layout = SegmentLayout::for_video(&self.video, map.segment_count).unwrap();
        let preload = if map.preloaded.is_empty() {
            &[][..]
        } else {
            let (a, b) = (
                layout.range(map.preloaded.lo).start,
                layout.range(map.preloaded.hi).end,
            );
            &self.source[a as usize..b as usize]
        };
        let mut asm = Assembler::new(config, layout, preload).unwrap();
        let mut seen = BTreeSet::new();
        for bytes in loopback(&server, Pacing::Unpaced, 1..=periods * map.full_period()).unwrap() {
            seen.insert(decode_frame(&bytes).unwrap().segment_index as u64);
            asm.accept_bytes(&bytes);
        }
        (seen, asm)
    }
}

fn criterion_6() -> Outcome {
    let mut dpfb = Vec::new();
    for k in 2..=6u32 {
        let config = SchemeConfig::Dpfb { beta: 2, k };
        let (_, asm) = Wire::new(config).run(config, 1);
        let stats = asm.stats();
        ensure!(
            stats.redundant_bytes == stats.redundant_segments * 256,
            "{config}: redundant bytes {}",
            stats.redundant_bytes
        );
        dpfb.push(stats.redundant_segments);
    }
    ensure!(dpfb == [0, 1, 3, 7, 15], "DPFB redundant counts {dpfb:?}");
    for k in 2..=6u32 {
        for config in [SchemeConfig::Fb { k }, SchemeConfig::Ctfb { gamma: 2, k }] {
            let (seen, asm) = Wire::new(config).run(config, 2);
            ensure!(
                asm.stats().redundant_segments == 0,
                "{config}: redundant segments"
            );
            ensure!(
                asm.stats().redundant_bytes == 0,
                "{config}: redundant bytes"
            );
            if let SchemeConfig::Ctfb { gamma, k } = config {
                let prefix = 1u64 << (k - gamma);
                ensure!(
                    seen.iter().all(|&s| s > prefix),
                    "{config}: preloaded segment on the wire"
                );
            }
        }
    }
    Ok(format!(
        "DPFB {dpfb:?}; FB and CTFB 0; CTFB preload never on air over 2 periods"
    ))
}

/// Table-driven CRC-32/ISO-HDLC.
fn table_crc(bytes: &[u8]) -> u32 {
    let mut table = [0u32; 256];
    for (i, slot) in table.iter_mut().enumerate() {
        let mut c = i as u32;
        for _ in 0..8 {
            c = if c & 1 == 1 {
                0xEDB8_8320 ^ (c >> 1)
            } else {
                c >> 1
            };
        }
        *slot = c;
    }
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc = table[((crc ^ b as u32) & 0xFF) as usize] ^ (crc >> 8);
    }
    !crc
}

fn random_frame(rng: &mut StdRng) -> ChunkFrame {
    let len = rng.gen_range(0..=1024);
    ChunkFrame {
        family: Family::from_wire_code(rng.gen_range(0..3)).unwrap(),
        k: rng.gen(),
        aux: rng.gen(),
        segment_index: rng.gen(),
        chunk_offset: rng.gen(),
        slot: rng.gen(),
        channel: rng.gen(),
        payload: (0..len).map(|_| rng.gen()).collect(),
    }
}

fn criterion_7() -> Outcome {
    ensure!(
        table_crc(b"123456789") == 0xCBF4_3926,
        "reference CRC check value"
    );
    ensure!(crc32(b"123456789") == 0xCBF4_3926, "CRC check value");
    let mut rng = StdRng::seed_from_u64(2024);
    let mut lengths_ok = true;
    let mut overhead = BTreeSet::new();
    for i in 0..1000 {
        let frame = random_frame(&mut rng);
        let bytes = encode_frame(&frame).unwrap();
        ensure!(
            decode_frame(&bytes).as_ref() == Ok(&frame),
            "round trip of frame {i}"
        );
        overhead.insert(bytes.len() - frame.payload.len());
        lengths_ok &= bytes.len() == 29 + frame.payload.len();
        if i < 50 {
            for bit in 0..bytes.len() * 8 {
                let mut bad = bytes.clone();
                bad[bit / 8] ^= 1 << (bit % 8);
                ensure!(
                    decode_frame(&bad).is_err(),
                    "frame {i}: flip of bit {bit} undetected"
                );
            }
        }
    }
    let detail = "1000 round trips, CRC 0xCBF43926, every single-bit flip detected";
    if !lengths_ok {
        return Err(format!(
            "{detail}; frame length is {overhead:?} + chunk_len, expected 29 + chunk_len"
        ));
    }
    Ok(detail.into())
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut notes = Vec::new();
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for line in text.lines() {
        if let Some(note) = line.strip_prefix('#') {
            notes.push(note.trim().to_string());
        } else if header.is_empty() {
            header = line.split(',').map(str::to_string).collect();
        } else {
            rows.push(line.split(',').map(str::to_string).collect());
        }
    }
    (notes, header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<String> {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].clone()).collect()
}

fn numbers(cells: &[String]) -> Vec<f64> {
    cells.iter().map(|c| c.parse().unwrap()).collect()
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] > w[1])
}

fn criterion_8() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let dir = tmp.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_nvod"))
            .args(["figures", "--out"])
            .arg(&dir)
            .args([
                "--size-mb",
                "10",
                "--rate-kbps",
                "10",
                "--beta",
                "2",
                "--gamma",
                "2",
                "--k-max",
                "8",
            ])
            .output()
            .unwrap();
        ensure!(
            status.status.success(),
            "figures exited with {}",
            status.status
        );
        let files: Vec<Vec<u8>> = (6..=9)
            .map(|i| fs::read(dir.join(format!("fig{i}.csv"))).unwrap())
            .collect();
        outputs.push(files);
    }
    ensure!(outputs[0] == outputs[1], "figures differ between runs");

    let dir = tmp.path().join("a");
    let (_, h, r) = read_csv(&dir.join("fig6.csv"));
    ensure!(
        column(&h, &r, "wait_ctfb_s").iter().all(|c| c == "0"),
        "fig6 CTFB column not zero"
    );
    ensure!(
        strictly_decreasing(&numbers(&column(&h, &r, "wait_fb_s"))),
        "fig6 FB not decreasing"
    );
    ensure!(
        strictly_decreasing(&numbers(&column(&h, &r, "wait_dpfb_s"))),
        "fig6 DPFB not decreasing"
    );

    let (_, h, r) = read_csv(&dir.join("fig7.csv"));
    ensure!(
        column(&h, &r, "ch_ctfb").iter().all(|c| c == "2"),
        "fig7 CTFB column not 2"
    );

    let (_, h, r) = read_csv(&dir.join("fig8.csv"));
    for (k, red) in column(&h, &r, "k").iter().zip(column(&h, &r, "red_dpfb")) {
        let k: u32 = k.parse().unwrap();
        ensure!(
            red == ((1u64 << (k - 2)) - 1).to_string(),
            "fig8 k={k}: {red}"
        );
    }

    let (notes, h, r) = read_csv(&dir.join("fig9.csv"));
    ensure!(
        column(&h, &r, "buf_dpfb_formula_MB")
            .iter()
            .all(|c| c == "7.5"),
        "fig9 DPFB formula"
    );
    ensure!(
        column(&h, &r, "buf_ctfb_formula_MB")
            .iter()
            .all(|c| c == "7.5"),
        "fig9 CTFB formula"
    );
    let sim = column(&h, &r, "buf_ctfb_sim_MB");
    for (k, cell) in column(&h, &r, "k").iter().zip(&sim) {
        let k: u32 = k.parse().unwrap();
        let exact = Rational::new(pow2(k - 1) + 1, pow2(k)) * rat(10);
        ensure!(*cell == format_sig(exact, 6), "fig9 k={k}: CTFB sim {cell}");
    }
    ensure!(
        strictly_decreasing(&numbers(&sim)),
        "fig9 CTFB sim not decreasing"
    );
    ensure!(
        notes.iter().any(|n| n.contains("discrepancy")),
        "fig9 header does not note the discrepancy"
    );
    Ok("fig6-fig9 deterministic, all column properties hold".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "closed-form fidelity", criterion_1),
        (2, "FB simulator matches the buffer profile", criterion_2),
        (3, "DPFB simulator peak matches the formula", criterion_3),
        (4, "CTFB zero wait", criterion_4),
        (5, "transition correctness", criterion_5),
        (6, "redundancy accounting on the wire", criterion_6),
        (7, "wire format", criterion_7),
        (8, "figure regeneration", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = false;
    for (id, name, check) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let known = KNOWN_UNATTAINABLE.iter().find(|(k, _)| *k == id);
        match (&outcome, known) {
            (Ok(detail), None) => println!("[PASS] {id} {name}: {detail}"),
            (Ok(detail), Some(_)) => {
                println!("[PASS] {id} {name}: {detail} (listed as unattainable; update the list)");
                failed = true;
            }
            (Err(detail), Some((_, why))) => {
                println!("[FAIL] {id} {name}: {detail} (known: {why})");
            }
            (Err(detail), None) => {
                println!("[FAIL] {id} {name}: {detail}");
                failed = true;
            }
        }
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
