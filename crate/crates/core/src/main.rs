use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use v2i_advisory::advisory::AdvisoryParams;
use v2i_advisory::codec::{
    decode, decode_auto, encode, encode_rsu_string, format_hex, parse_hex, FrameFormat,
    SpatSnapshot,
};
use v2i_advisory::geo::{load_zone_config, ConfigError, ZoneConfig};
use v2i_advisory::serve::{config_digest, LiveOptions, LiveServer};
use v2i_advisory::sim::{
    compute_metrics, read_jsonl, write_jsonl, LinkConfig, Scenario, Simulation,
};

#[derive(Parser)]
#[command(
    name = "v2i-advisory",
    version,
    about = "SPaT codec tools, zone validation and advisory simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum DecodeFormat {
    Auto,
    M60,
    Tw900,
}

#[derive(Clone, Copy, ValueEnum)]
enum EncodeFormat {
    M60,
    Tw900,
    Rsu,
}

#[derive(clap::Args)]
struct LinkArgs {
    /// Packet drop probability.
    #[arg(long, default_value_t = 0.0)]
    drop: f64,
    /// Latency range in ticks, `min:max`.
    #[arg(long, default_value = "0:0", value_parser = parse_latency)]
    latency: (u32, u32),
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Advisory parameters as JSON; defaults apply to missing keys.
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Decode a raw frame given as hex octets and print the snapshot as JSON.
    Decode {
        #[arg(long, value_enum, default_value = "auto")]
        format: DecodeFormat,
        /// File with hex octets, or `-` for stdin.
        #[arg(long)]
        hex: String,
    },
    /// Encode a snapshot JSON document as hex octets or an RSU line.
    Encode {
        #[arg(long, value_enum)]
        format: EncodeFormat,
        /// Snapshot JSON file, or `-` for stdin.
        #[arg(long)]
        snapshot: String,
    },
    /// Check a zone configuration and list every problem.
    ValidateConfig { config: PathBuf },
    /// Run a scenario headless, write the event log and print the metrics.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        link: LinkArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute the metrics of a saved event log.
    Metrics { events: PathBuf },
    /// Run a scenario in real time and serve the live protocol over WebSocket.
    Serve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
        #[command(flatten)]
        link: LinkArgs,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value_t = 100)]
        tick_ms: u64,
    },
}

enum Failure {
    /// Bad input: exit 2.
    Domain(String),
    /// Our own fault: exit 1.
    Internal(String),
}

type CmdResult = Result<(), Failure>;

fn domain(e: impl std::fmt::Display) -> Failure {
    Failure::Domain(e.to_string())
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure::Internal(e.to_string())
}

fn parse_latency(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once(':').ok_or("expected min:max")?;
    let a = a.parse().map_err(|e| format!("min: {e}"))?;
    let b = b.parse().map_err(|e| format!("max: {e}"))?;
    Ok((a, b))
}

fn read_input(source: &str) -> Result<String, Failure> {
    if source == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| domain(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        read_file(Path::new(source))
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn load_config(path: &Path) -> Result<(ZoneConfig, String), Failure> {
    let text = read_file(path)?;
    let cfg = load_zone_config(&text).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    Ok((cfg, text))
}

fn load_scenario(path: &Path) -> Result<Scenario, Failure> {
    let text = read_file(path)?;
    serde_json::from_str(&text).map_err(|e| domain(format!("{}: {e}", path.display())))
}

fn link_setup(args: &LinkArgs) -> Result<(LinkConfig, AdvisoryParams), Failure> {
    let link = LinkConfig {
        drop_prob: args.drop,
        latency_min_ticks: args.latency.0,
        latency_max_ticks: args.latency.1,
        seed: args.seed,
    };
    let params = match &args.params {
        Some(path) => serde_json::from_str(&read_file(path)?)
            .map_err(|e| domain(format!("{}: {e}", path.display())))?,
        None => AdvisoryParams::default(),
    };
    Ok((link, params))
}

fn print_json(value: &impl serde::Serialize) -> CmdResult {
    let text = serde_json::to_string(value).map_err(internal)?;
    writeln!(io::stdout().lock(), "{text}").map_err(internal)
}

fn cmd_decode(format: DecodeFormat, source: &str) -> CmdResult {
    let bytes = parse_hex(&read_input(source)?).map_err(domain)?;
    let snapshot = match format {
        DecodeFormat::Auto => decode_auto(&bytes),
        DecodeFormat::M60 => decode(FrameFormat::M60, &bytes),
        DecodeFormat::Tw900 => decode(FrameFormat::Tw900, &bytes),
    }
    .map_err(domain)?;
    print_json(&snapshot)
}

fn cmd_encode(format: EncodeFormat, source: &str) -> CmdResult {
    let snapshot: SpatSnapshot = serde_json::from_str(&read_input(source)?).map_err(domain)?;
    let text = match format {
        EncodeFormat::M60 => format_hex(&encode(FrameFormat::M60, &snapshot).map_err(domain)?),
        EncodeFormat::Tw900 => format_hex(&encode(FrameFormat::Tw900, &snapshot).map_err(domain)?),
        EncodeFormat::Rsu => encode_rsu_string(&snapshot),
    };
    writeln!(io::stdout().lock(), "{text}").map_err(internal)
}

fn cmd_validate(path: &Path) -> CmdResult {
    let text = read_file(path)?;
    match load_zone_config(&text) {
        Ok(cfg) => {
            println!(
                "ok: intersection {}, {} zones",
                cfg.intersection_id,
                cfg.zones.len()
            );
            Ok(())
        }
        Err(ConfigError::Validation(errors)) => {
            for e in &errors {
                println!("{e}");
            }
            Err(domain(format!("{} validation error(s)", errors.len())))
        }
        Err(e) => {
            println!("{e}");
            Err(domain(e))
        }
    }
}

fn cmd_run(config: &Path, scenario: &Path, link: &LinkArgs, out: &Path) -> CmdResult {
    let (cfg, _) = load_config(config)?;
    let scenario = load_scenario(scenario)?;
    let (link, params) = link_setup(link)?;
    let mut sim = Simulation::new(Arc::new(cfg), scenario, link, params).map_err(domain)?;
    let mut events = Vec::new();
    while !sim.is_finished() {
        events.extend(sim.step().events);
    }
    let file = fs::File::create(out).map_err(|e| domain(format!("{}: {e}", out.display())))?;
    write_jsonl(io::BufWriter::new(file), &events)
        .map_err(|e| domain(format!("{}: {e}", out.display())))?;
    print_json(&compute_metrics(&events).map_err(internal)?)
}

fn cmd_metrics(path: &Path) -> CmdResult {
    let file = fs::File::open(path).map_err(|e| domain(format!("{}: {e}", path.display())))?;
    let events = read_jsonl(BufReader::new(file))
        .map_err(|(line, e)| domain(format!("{}:{line}: {e}", path.display())))?;
    print_json(&compute_metrics(&events).map_err(domain)?)
}

fn cmd_serve(
    config: &Path,
    scenario: &Path,
    link: &LinkArgs,
    host: &str,
    port: u16,
    tick_ms: u64,
) -> CmdResult {
    let (cfg, text) = load_config(config)?;
    let scenario = load_scenario(scenario)?;
    let (link, params) = link_setup(link)?;
    if tick_ms == 0 {
        return Err(domain("tick-ms must be positive"));
    }
    let sim = Simulation::new(Arc::new(cfg), scenario, link, params).map_err(domain)?;
    let listener =
        TcpListener::bind((host, port)).map_err(|e| domain(format!("bind {host}:{port}: {e}")))?;
    let opts = LiveOptions {
        tick: Duration::from_millis(tick_ms),
        config_digest: config_digest(text.as_bytes()),
    };
    let server = LiveServer::start(listener, sim, opts).map_err(domain)?;
    eprintln!("serving on ws://{}", server.local_addr());
    server.wait();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Cmd::Decode { format, hex } => cmd_decode(*format, hex),
        Cmd::Encode { format, snapshot } => cmd_encode(*format, snapshot),
        Cmd::ValidateConfig { config } => cmd_validate(config),
        Cmd::Run {
            config,
            scenario,
            link,
            out,
        } => cmd_run(config, scenario, link, out),
        Cmd::Metrics { events } => cmd_metrics(events),
        Cmd::Serve {
            config,
            scenario,
            link,
            host,
            port,
            tick_ms,
        } => cmd_serve(config, scenario, link, host, *port, *tick_ms),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
