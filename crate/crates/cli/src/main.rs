//! Command-line driver: generates sessions, replays them through the
//! alignment solvers with metrics, and serves/subscribes pose streams.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use avtr_core::config::{load_config, Config};
use avtr_core::error::Error;
use avtr_core::metrics::{record_to_csv, summarize, MetricsRecord, FRAMES_CSV_HEADER,
    SUMMARY_CSV_HEADER};
use avtr_core::replay::{replay_session, RenderOptions, ReplayOptions};
use avtr_core::session::{format_frame, format_header, pose_catalog, read_session_file,
    therapy_trajectory, write_session_file, Session};
use avtr_core::solver::SolverKind;
use avtr_relay::{subscribe, RelayConfig, RelayServer};

const EXIT_INPUT: u8 = 2;
const EXIT_DIVERGED: u8 = 3;

#[derive(Parser)]
#[command(name = "avtr", version, about = "Arm alignment solvers, session replay, and pose streaming")]
struct Cli {
    /// key = value configuration file applied before flag overrides.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the 12-pose static catalog as a session file.
    Poses {
        /// Output session file.
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Generate and write the emulated therapy session.
    Therapy {
        /// Session length in seconds.
        #[arg(long, default_value_t = 20.0)]
        duration: f64,
        /// Frame rate in Hz.
        #[arg(long, default_value_t = 100.0)]
        rate: f64,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Replay a session through the selected solver(s) and emit metrics.
    Run(RunArgs),
    /// Stream a session file to subscribers.
    Serve {
        /// Source session file.
        #[arg(long)]
        session: PathBuf,
        /// Streaming rate override in Hz (default: the file's rate).
        #[arg(long)]
        rate: Option<f64>,
        /// Bind address (port 0 picks a free port).
        #[arg(long, default_value = "127.0.0.1:7355")]
        bind: String,
        /// Grace period before the first frame, giving subscribers time to
        /// join the replay from its beginning.
        #[arg(long, default_value_t = 200)]
        start_delay_ms: u64,
    },
    /// Connect to a relay and print received frames in the session format.
    Subscribe {
        #[arg(long)]
        addr: String,
        /// Low-pass filter coefficient applied to the base pose.
        #[arg(long)]
        filter_beta: Option<f64>,
        /// Stop after this many frames (default: until end of stream).
        #[arg(long)]
        max_frames: Option<u64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Solver to run: onia, jacobian, fabrik, or all.
    #[arg(long, default_value = "all")]
    solver: String,
    /// Replay the 12-pose static catalog.
    #[arg(long, conflicts_with_all = ["therapy", "session"])]
    catalog: bool,
    /// Replay a generated therapy session.
    #[arg(long, conflicts_with = "session")]
    therapy: bool,
    /// Replay a recorded session file.
    #[arg(long)]
    session: Option<PathBuf>,
    /// Therapy duration (with --therapy).
    #[arg(long, default_value_t = 20.0)]
    duration: f64,
    /// Therapy rate (with --therapy).
    #[arg(long, default_value_t = 100.0)]
    rate: f64,
    /// Per-frame metrics CSV path.
    #[arg(long, default_value = "metrics.csv")]
    frames_csv: PathBuf,
    /// Aggregate summary CSV path.
    #[arg(long, default_value = "summary.csv")]
    summary_csv: PathBuf,
    /// Render the overlay ratio (off by default: ray casting dominates the
    /// runtime on long sessions).
    #[arg(long)]
    overlay: bool,
    /// With --overlay, render every n-th frame.
    #[arg(long, default_value_t = 1)]
    render_every: usize,
    /// Overlay image width and height in pixels.
    #[arg(long)]
    render_size: Option<usize>,
    #[command(flatten)]
    solver_overrides: SolverOverrides,
}

#[derive(Args)]
struct SolverOverrides {
    /// Reactive forearm twist fraction.
    #[arg(long)]
    alpha_e: Option<f64>,
    /// DLS damping constant.
    #[arg(long)]
    lambda: Option<f64>,
    /// DLS elbow objective weight.
    #[arg(long)]
    elbow_weight: Option<f64>,
    /// DLS per-frame iteration budget.
    #[arg(long)]
    max_iters: Option<u32>,
    /// DLS wrist convergence tolerance (m).
    #[arg(long)]
    tol: Option<f64>,
    /// FABRIK wrist tolerance (m).
    #[arg(long)]
    eps_wrist: Option<f64>,
    /// FABRIK elbow tolerance search bound (m).
    #[arg(long)]
    eps_max: Option<f64>,
    /// FABRIK search resolution (m).
    #[arg(long)]
    delta_eps: Option<f64>,
    /// FABRIK initial pass iterations.
    #[arg(long)]
    n_init: Option<u32>,
    /// FABRIK iterations per search probe.
    #[arg(long)]
    n_refine: Option<u32>,
}

impl SolverOverrides {
    fn apply(&self, cfg: &mut Config) {
        let s = &mut cfg.solver;
        if let Some(v) = self.alpha_e {
            s.onia.alpha_elbow = v;
        }
        if let Some(v) = self.lambda {
            s.jacobian.lambda = v;
        }
        if let Some(v) = self.elbow_weight {
            s.jacobian.elbow_weight = v;
        }
        if let Some(v) = self.max_iters {
            s.jacobian.max_iters = v;
        }
        if let Some(v) = self.tol {
            s.jacobian.tol = v;
        }
        if let Some(v) = self.eps_wrist {
            s.fabrik.eps_wrist = v;
        }
        if let Some(v) = self.eps_max {
            s.fabrik.eps_max = v;
        }
        if let Some(v) = self.delta_eps {
            s.fabrik.delta_eps = v;
        }
        if let Some(v) = self.n_init {
            s.fabrik.n_init = v;
        }
        if let Some(v) = self.n_refine {
            s.fabrik.n_refine = v;
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => match load_config(path) {
            Ok(c) => c,
            Err(e) => return input_error(&format!("config {}: {e}", path.display())),
        },
        None => Config::default(),
    };
    match run(cli.command, config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(msg)) => input_error(&msg),
        Err(CliError::Diverged(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DIVERGED)
        }
    }
}

fn input_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INPUT)
}

enum CliError {
    Input(String),
    Diverged(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SolverDiverged(_) => CliError::Diverged(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn run(cmd: Command, config: Config) -> Result<(), CliError> {
    match cmd {
        Command::Poses { out } => {
            let session = pose_catalog();
            write_session_file(&out, &session)
                .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
            println!("wrote {} poses to {}", session.frames.len(), out.display());
            Ok(())
        }
        Command::Therapy { duration, rate, out } => {
            let session = therapy_trajectory(duration, rate)?;
            write_session_file(&out, &session)
                .map_err(|e| CliError::Input(format!("{}: {e}", out.display())))?;
            println!("wrote {} frames to {}", session.frames.len(), out.display());
            Ok(())
        }
        Command::Run(args) => cmd_run(args, config),
        Command::Serve { session, rate, bind, start_delay_ms } => {
            let source = load_session(&session)?;
            let config = RelayConfig {
                bind,
                rate_hz: rate,
                start_delay: std::time::Duration::from_millis(start_delay_ms),
            };
            let server = RelayServer::start(config, source)?;
            println!("listening on {}", server.local_addr());
            std::io::stdout().flush().ok();
            server.wait();
            Ok(())
        }
        Command::Subscribe { addr, filter_beta, max_frames } => {
            let stream = subscribe(addr.as_str(), filter_beta)
                .map_err(|e| CliError::Input(format!("{addr}: {e}")))?;
            println!("{}", format_header(stream.rate_hz()));
            let mut seen = 0u64;
            for frame in stream {
                match frame {
                    Ok(f) => println!("{}", format_frame(&f)),
                    Err(e) => eprintln!("warning: {e}"),
                }
                seen += 1;
                if max_frames.is_some_and(|m| seen >= m) {
                    break;
                }
            }
            Ok(())
        }
    }
}

fn load_session(path: &Path) -> Result<Session, CliError> {
    read_session_file(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn cmd_run(args: RunArgs, mut config: Config) -> Result<(), CliError> {
    args.solver_overrides.apply(&mut config);
    if let Some(px) = args.render_size {
        config.render.width = px;
        config.render.height = px;
    }

    let session = if args.catalog {
        pose_catalog()
    } else if args.therapy {
        therapy_trajectory(args.duration, args.rate)?
    } else if let Some(path) = &args.session {
        load_session(path)?
    } else {
        return Err(CliError::Input(
            "choose an input: --catalog, --therapy, or --session <file>".into(),
        ));
    };

    let kinds: Vec<SolverKind> = match args.solver.as_str() {
        "all" => vec![SolverKind::Onia, SolverKind::Jacobian, SolverKind::Fabrik],
        name => vec![name.parse().map_err(CliError::Input)?],
    };

    let opts = ReplayOptions {
        model: config.model,
        constraints: config.constraints,
        solver: config.solver,
        render: args.overlay.then_some(RenderOptions {
            params: config.render,
            every: args.render_every.max(1),
        }),
    };

    let mut records: Vec<MetricsRecord> = Vec::new();
    for kind in kinds {
        records.extend(replay_session(&session, kind, &opts)?);
    }

    write_csv(&args.frames_csv, FRAMES_CSV_HEADER, records.iter().map(record_to_csv))?;
    let summary = summarize(&records);
    write_csv(&args.summary_csv, SUMMARY_CSV_HEADER, summary.iter().cloned())?;
    for line in &summary {
        println!("{line}");
    }
    Ok(())
}

fn write_csv(
    path: &Path,
    header: &str,
    rows: impl Iterator<Item = String>,
) -> Result<(), CliError> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}
