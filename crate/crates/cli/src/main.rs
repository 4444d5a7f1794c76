use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wsoe_cli::{execute, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "wsoe", version, about = "Run, explore and check QoS-aware service orchestrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the requests once and print each request's outcome.
    Run(Common),
    /// Enumerate every maximal trace and check all conformance layers.
    Explore {
        #[command(flatten)]
        common: Common,
        /// Keep every interleaving rather than one per commutation class.
        #[arg(long)]
        all_interleavings: bool,
    },
    /// Replay a trace file and check it.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        trace: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    workflow: PathBuf,
    #[arg(long)]
    registry: PathBuf,
    #[arg(long)]
    requests: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    max_transitions: usize,
    #[arg(long, default_value_t = 100_000)]
    max_traces: usize,
}

impl Common {
    fn into_config(self, mode: Mode) -> RunConfig {
        let mut c = RunConfig::new(self.workflow, self.registry, self.requests);
        c.mode = mode;
        c.seed = self.seed;
        c.trace_out = self.trace_out;
        c.max_transitions = self.max_transitions;
        c.max_traces = self.max_traces;
        c
    }
}

fn main() -> ExitCode {
    let config = match Cli::parse().command {
        Command::Run(common) => common.into_config(Mode::Run),
        Command::Explore { common, all_interleavings } => {
            let mut c = common.into_config(Mode::Explore);
            c.all_interleavings = all_interleavings;
            c
        }
        Command::Check { common, trace } => {
            let mut c = common.into_config(Mode::Check);
            c.trace_in = Some(trace);
            c
        }
    };
    let code = execute(&config, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
