use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Duration;

use nvod_core::analytics::SchemeMetrics;
use nvod_core::figures::standard_figures;
use nvod_core::report::format_sig;
use nvod_core::scheduler::{build_segment_map, write_schedule_csv};
use nvod_core::simulator::{
    simulate as run_simulation, trace_summary_json, verify_no_starvation, write_trace_csv,
    SimScenario,
};
use nvod_core::transport::{self, udp, Pacing, Server};
use nvod_core::{Rational, SchemeConfig, VideoSpec};

use crate::error::{CliError, CliResult};
use crate::{AnalyzeArgs, FiguresArgs, ScheduleArgs, ServeArgs, SimulateArgs, WatchArgs};

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

/// Writes one line to standard output; a closed pipe surfaces as an error.
fn emit(text: impl std::fmt::Display) -> CliResult<()> {
    writeln!(io::stdout().lock(), "{text}")?;
    Ok(())
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).map_err(CliError::file(path))?,
    ))
}

/// `"3/8"`, `"0.375"` or `"0"` as an exact rational.
pub fn parse_fraction(text: &str) -> CliResult<Rational> {
    let bad = || invalid(format!("not a fraction: {text:?}"));
    let text = text.trim();
    if let Some((n, d)) = text.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    if (int.is_empty() && frac.is_empty())
        || frac.len() > 30
        || !frac.chars().all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let int: i128 = if int.is_empty() {
        0
    } else {
        int.parse().map_err(|_| bad())?
    };
    let scale = 10i128.pow(frac.len() as u32);
    let frac: i128 = if frac.is_empty() {
        0
    } else {
        frac.parse().map_err(|_| bad())?
    };
    if text.starts_with('-') {
        return Err(bad());
    }
    Ok(Rational::new(int * scale + frac, scale))
}

fn parse_transition(text: &str, initial: SchemeConfig) -> CliResult<(u64, SchemeConfig)> {
    let bad = || invalid(format!("transition {text:?} is not SLOT:K"));
    let (slot, k) = text.split_once(':').ok_or_else(bad)?;
    let slot: u64 = slot.trim().parse().map_err(|_| bad())?;
    let k: u32 = k.trim().parse().map_err(|_| bad())?;
    Ok((slot, initial.with_k(k).validate()?))
}

fn parse_pace(words: &[String]) -> CliResult<Pacing> {
    match words {
        [mode] if mode == "real" => Ok(Pacing::RealTime),
        [mode] if mode == "none" => Ok(Pacing::Unpaced),
        [mode, f] if mode == "scale" => match f.parse::<f64>() {
            Ok(f) if f.is_finite() && f > 0.0 => Ok(Pacing::Scaled(f)),
            _ => Err(invalid(format!(
                "scale factor {f:?} must be a positive number"
            ))),
        },
        _ => Err(invalid(format!(
            "--pace takes real, none or scale F; got {:?}",
            words.join(" ")
        ))),
    }
}

pub fn schedule(a: ScheduleArgs) -> CliResult<()> {
    let config = a.scheme.config()?;
    let map = build_segment_map(&a.video.video()?, config)?;
    let slots = a.slots.unwrap_or_else(|| map.full_period());
    let rows = map.schedule_rows(1, slots)?;
    match &a.csv {
        Some(path) => {
            let mut out = create(path)?;
            write_schedule_csv(&rows, &mut out).map_err(CliError::file(path))?;
            out.flush().map_err(CliError::file(path))?;
        }
        None => write_schedule_csv(&rows, io::stdout().lock())?,
    }
    Ok(())
}

pub fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let video = a.video.video()?;
    let m = SchemeMetrics::compute(&video, a.scheme.config()?)?;
    if a.json {
        return emit(serde_json::to_string_pretty(&m).expect("metrics serialize"));
    }
    let s = |v| format_sig(v, 6);
    let mb = video.megabytes_for(m.max_buffer_formula_s);
    let lines = [
        format!("config                 {}", m.config),
        format!("video duration         {} s", s(video.duration())),
        format!("channels               {}", m.channel_count),
        format!("segment duration       {} s", s(m.segment_duration_s)),
        format!("worst initial wait     {} s", s(m.initial_wait_worst_s)),
        format!(
            "max buffer (formula)   {} s = {} MB",
            s(m.max_buffer_formula_s),
            s(mb)
        ),
        format!("preload                {} s", s(m.preload_s)),
        format!("distinct on air        {}", m.transmitted_distinct_count),
        format!("redundant segments     {}", m.redundant_count),
    ];
    emit(lines.join("\n"))?;
    Ok(())
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let video = a.video.video()?;
    let initial = a.scheme.config()?;
    let phase = parse_fraction(&a.phase)?;
    if phase < Rational::from_integer(0) || phase >= Rational::from_integer(1) {
        return Err(invalid(format!("phase {} must lie in [0, 1)", a.phase)));
    }
    let mut scenario = SimScenario::new(video, initial)
        .arriving_in_slot(a.arrival_slot)
        .receive_while_play(a.receive_while_play);
    let phase_s = phase * scenario.initial_segment_duration();
    scenario = scenario.with_phase(phase_s);
    for t in &a.transitions {
        let (slot, config) = parse_transition(t, initial)?;
        scenario = scenario.with_transition(slot, config);
    }

    let trace = run_simulation(&scenario)?;
    let summary = trace_summary_json(&trace);
    if let Some(path) = &a.trace {
        let mut out = create(path)?;
        write_trace_csv(&trace, &mut out).map_err(CliError::file(path))?;
        out.flush().map_err(CliError::file(path))?;
        let json_path = path.with_extension("json");
        let text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        fs::write(&json_path, text + "\n").map_err(CliError::file(&json_path))?;
    }
    emit(serde_json::to_string_pretty(&summary).expect("summary serializes"))?;

    let check = verify_no_starvation(&trace);
    if !check.ok {
        let slot = check.first_starved_slot.unwrap_or_default();
        if a.fail_on_starve {
            return Err(CliError::Starvation(format!("first stall in slot {slot}")));
        }
        eprintln!("nvod: warning: playback starved, first stall in slot {slot}");
    }
    Ok(())
}

pub fn figures(a: FiguresArgs) -> CliResult<()> {
    let video = a.video.video()?;
    let sets = standard_figures(&video, a.k_max, a.beta, a.gamma)?;
    fs::create_dir_all(&a.out).map_err(CliError::file(&a.out))?;
    for set in sets {
        let path = a.out.join(set.file_name());
        let mut out = create(&path)?;
        set.write_csv(&mut out).map_err(CliError::file(&path))?;
        out.flush().map_err(CliError::file(&path))?;
        emit(path.display())?;
    }
    Ok(())
}

pub fn serve(a: ServeArgs) -> CliResult<()> {
    let config = a.scheme.config()?;
    let pacing = parse_pace(&a.pace)?;
    let source = fs::read(&a.input).map_err(CliError::file(&a.input))?;
    let video = VideoSpec::new(source.len() as u64 * 8, a.rate_kbps.saturating_mul(1000))?;
    let map = build_segment_map(&video, config)?;
    let server = Server::new(&map, &video, &source, a.chunk_size)?;

    if let Some(path) = &a.write_preload {
        let preload = preload_bytes(&server, &source);
        fs::write(path, preload).map_err(CliError::file(path))?;
    }

    let mut sinks = udp::bind_channels(&server, a.bind, a.base_port)?;
    eprintln!(
        "nvod: {config} on {}:{}..{}, waiting for a watcher",
        a.bind,
        a.base_port,
        a.base_port as usize + map.channel_count() - 1
    );
    udp::wait_for_listeners(&mut sinks, Duration::from_secs(a.wait_secs))?;
    let slots = a.slots.unwrap_or(2 * map.full_period());
    let sent = transport::serve(&server, pacing, 1..=slots, sinks)?;
    emit(serde_json::json!({
            "config": config.to_string(),
            "slots": slots,
            "frames_per_channel": sent,
    }))
}

fn preload_bytes<'a>(server: &Server<'_>, source: &'a [u8]) -> &'a [u8] {
    let p = server.map().preloaded;
    if p.is_empty() {
        return &[];
    }
    let layout = server.layout();
    &source[layout.range(p.lo).start as usize..layout.range(p.hi).end as usize]
}

pub fn watch(a: WatchArgs) -> CliResult<()> {
    let preload = match &a.preload {
        Some(path) => fs::read(path).map_err(CliError::file(path))?,
        None => Vec::new(),
    };
    let outcome = udp::watch(
        a.connect,
        a.base_port,
        &preload,
        Duration::from_secs(a.timeout_secs),
    )?;
    fs::write(&a.out, &outcome.video).map_err(CliError::file(&a.out))?;
    emit(serde_json::json!({
            "config": outcome.info.config.to_string(),
            "bytes": outcome.video.len(),
            "stats": outcome.stats,
    }))
}
