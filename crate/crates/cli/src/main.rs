//! `nvod`: schedules, metrics, simulation, figure datasets and a socket demo
//! for the FB, DPFB and CTFB broadcast schemes.

mod commands;
mod config;
mod error;

use std::net::IpAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nvod_core::{Family, SchemeConfig, VideoSpec};

use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "nvod",
    version,
    about = "Fast-broadcasting near video-on-demand toolkit"
)]
#[command(
    after_help = "Any subcommand also accepts --config FILE with key=value lines \
                        mirroring its flags; flags on the command line win.\n\
                        Exit codes: 0 ok, 1 invalid input, 2 I/O failure, \
                        3 starvation (simulate --fail-on-starve)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print or export the channel schedule table.
    #[command(args_override_self = true)]
    Schedule(ScheduleArgs),
    /// Print the closed-form metrics of one configuration.
    #[command(args_override_self = true)]
    Analyze(AnalyzeArgs),
    /// Replay one client slot by slot.
    #[command(args_override_self = true)]
    Simulate(SimulateArgs),
    /// Write the four comparison datasets as CSV.
    #[command(args_override_self = true)]
    Figures(FiguresArgs),
    /// Broadcast a video file over UDP, one port per channel.
    #[command(args_override_self = true)]
    Serve(ServeArgs),
    /// Receive a broadcast over UDP and write the reassembled video.
    #[command(args_override_self = true)]
    Watch(WatchArgs),
}

const SUBCOMMANDS: &[&str] = &[
    "schedule", "analyze", "simulate", "figures", "serve", "watch",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeName {
    Fb,
    Dpfb,
    Ctfb,
}

#[derive(Debug, Args)]
struct SchemeArgs {
    #[arg(long, value_enum)]
    scheme: SchemeName,
    /// Segmentation parameter: FB uses 2^k - 1 segments, DPFB and CTFB 2^k.
    #[arg(short = 'k', long = "k")]
    k: u32,
    /// DPFB preloads the last 1/2^beta of the video.
    #[arg(long, default_value_t = 2)]
    beta: u32,
    /// CTFB preloads the first 1/2^gamma of the video and uses gamma channels.
    #[arg(long, default_value_t = 2)]
    gamma: u32,
}

impl SchemeArgs {
    fn config(&self) -> CliResult<SchemeConfig> {
        let (family, aux) = match self.scheme {
            SchemeName::Fb => (Family::Fb, 0),
            SchemeName::Dpfb => (Family::Dpfb, self.beta),
            SchemeName::Ctfb => (Family::Ctfb, self.gamma),
        };
        Ok(SchemeConfig::from_parts(family, self.k, aux)?)
    }
}

#[derive(Debug, Args)]
struct VideoArgs {
    /// Video size in megabytes of 10^6 bytes.
    #[arg(long, default_value_t = 10)]
    size_mb: u64,
    /// Playback rate in kilobits per second.
    #[arg(long, default_value_t = 10)]
    rate_kbps: u64,
}

impl VideoArgs {
    fn video(&self) -> CliResult<VideoSpec> {
        Ok(VideoSpec::from_mb_kbps(self.size_mb, self.rate_kbps)?)
    }
}

#[derive(Debug, Args)]
struct ScheduleArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    video: VideoArgs,
    /// Slots to list, starting at slot 1. Defaults to one full period.
    #[arg(long)]
    slots: Option<u64>,
    /// Write the table here instead of standard output.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    video: VideoArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    video: VideoArgs,
    /// Arrival offset into the slot as a fraction of a slot, e.g. 0.25 or 1/4.
    #[arg(long, default_value = "0")]
    phase: String,
    /// Global slot the client arrives in.
    #[arg(long, default_value_t = 1)]
    arrival_slot: u64,
    /// Change k at a slot boundary, written SLOT:K. Repeatable.
    #[arg(long = "transition", value_name = "SLOT:K")]
    transitions: Vec<String>,
    /// Let a segment play while its broadcast is still arriving.
    #[arg(long)]
    receive_while_play: bool,
    /// Trace CSV path; the JSON summary goes next to it with a .json extension.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Exit with status 3 if playback ever starves.
    #[arg(long)]
    fail_on_starve: bool,
}

#[derive(Debug, Args)]
struct FiguresArgs {
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    video: VideoArgs,
    #[arg(long, default_value_t = 2)]
    beta: u32,
    #[arg(long, default_value_t = 2)]
    gamma: u32,
    #[arg(long, default_value_t = 8)]
    k_max: u32,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Video file to broadcast.
    #[arg(long)]
    input: PathBuf,
    /// Playback rate in kilobits per second; sets the slot length.
    #[arg(long, default_value_t = 10)]
    rate_kbps: u64,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long, default_value_t = 7400)]
    base_port: u16,
    /// `real`, `none`, or `scale F` to run F times faster than real time.
    #[arg(long, num_args = 1..=2, value_names = ["MODE", "F"], default_values = ["real"])]
    pace: Vec<String>,
    #[arg(long, default_value_t = nvod_core::transport::DEFAULT_CHUNK_SIZE)]
    chunk_size: u16,
    /// Slots to broadcast. Defaults to two full periods.
    #[arg(long)]
    slots: Option<u64>,
    /// Seconds to wait for a watcher on every channel.
    #[arg(long, default_value_t = 300)]
    wait_secs: u64,
    /// Also write the preload a watcher needs to this file.
    #[arg(long)]
    write_preload: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WatchArgs {
    #[arg(long)]
    connect: IpAddr,
    #[arg(long, default_value_t = 7400)]
    base_port: u16,
    #[arg(long)]
    out: PathBuf,
    /// Preloaded part of the video, required for DPFB and CTFB.
    #[arg(long)]
    preload: Option<PathBuf>,
    #[arg(long, default_value_t = 600)]
    timeout_secs: u64,
}

fn run(argv: Vec<String>) -> CliResult<()> {
    let argv = config::expand(argv, SUBCOMMANDS)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return Ok(());
        }
        Err(e) => return Err(CliError::Validation(e.render().to_string())),
    };
    match cli.command {
        Command::Schedule(a) => commands::schedule(a),
        Command::Analyze(a) => commands::analyze(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Figures(a) => commands::figures(a),
        Command::Serve(a) => commands::serve(a),
        Command::Watch(a) => commands::watch(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        // the reader went away, e.g. `nvod schedule ... | head`
        Err(CliError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nvod: {}", e.to_string().trim_end());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
