//! Command implementations behind the `wsoe` binary. Each command reads its
//! inputs, writes human-readable lines and JSON violation records to `out`,
//! diagnostics to `err`, and returns the process exit code.

pub mod formats;

use std::io::Write;
use std::path::PathBuf;

use wsoe_core::{
    aggregate_qos, check_pyramid, Engine, EngineError, ExploreLimits, InstanceState, PyramidReport, Registry, Trace,
    Verdict, Violation, WorkflowDef, WsoRequest,
};

pub use formats::{read_requests, read_trace_records, rebuild_trace, trace_to_jsonl, write_trace, TraceRecord};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_ENGINE: i32 = 2;
pub const EXIT_BOUND: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Run,
    Explore,
    Check,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub workflow: PathBuf,
    pub registry: PathBuf,
    pub requests: PathBuf,
    pub seed: u64,
    pub mode: Mode,
    /// Where `run` writes its trace.
    pub trace_out: Option<PathBuf>,
    /// The trace `check` reads.
    pub trace_in: Option<PathBuf>,
    pub max_transitions: usize,
    pub max_traces: usize,
    /// Enumerate every interleaving instead of one per commutation class.
    pub all_interleavings: bool,
}

impl RunConfig {
    pub fn new(workflow: impl Into<PathBuf>, registry: impl Into<PathBuf>, requests: impl Into<PathBuf>) -> Self {
        let limits = ExploreLimits::default();
        Self {
            workflow: workflow.into(),
            registry: registry.into(),
            requests: requests.into(),
            seed: 0,
            mode: Mode::Run,
            trace_out: None,
            trace_in: None,
            max_transitions: limits.max_transitions,
            max_traces: limits.max_traces,
            all_interleavings: false,
        }
    }

    fn limits(&self) -> ExploreLimits {
        ExploreLimits {
            max_transitions: self.max_transitions,
            max_traces: self.max_traces,
            commute_independent: !self.all_interleavings,
        }
    }
}

/// Dispatches on `config.mode`.
pub fn execute(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match config.mode {
        Mode::Run => cmd_run(config, out, err),
        Mode::Explore => cmd_explore(config, out, err),
        Mode::Check => cmd_check(config, out, err),
    }
}

struct Loaded {
    engine: Engine,
    requests: Vec<WsoRequest>,
}

fn load(config: &RunConfig) -> Result<Loaded, (i32, String)> {
    let input = |e: &dyn std::fmt::Display| (EXIT_INPUT, e.to_string());
    if config.max_transitions == 0 || config.max_traces == 0 {
        return Err((EXIT_INPUT, "exploration bounds must be positive".into()));
    }
    let workflow = WorkflowDef::load(&config.workflow).map_err(|e| input(&e))?;
    let registry = Registry::load(&config.registry).map_err(|e| input(&e))?;
    let requests = read_requests(&config.requests).map_err(|e| input(&e))?;
    let engine = Engine::new(workflow, registry).map_err(|e| input(&e))?;
    // Requests for another orchestration or with unusable ids are input
    // errors, not engine failures.
    engine.initial_configuration(&requests).map_err(|e| input(&e))?;
    Ok(Loaded { engine, requests })
}

macro_rules! try_load {
    ($config:expr, $err:expr) => {
        match load($config) {
            Ok(l) => l,
            Err((code, msg)) => {
                let _ = writeln!($err, "error: {msg}");
                return code;
            }
        }
    };
}

fn engine_failure(e: &EngineError, err: &mut dyn Write) -> i32 {
    let _ = writeln!(err, "error: {e}");
    match e {
        EngineError::StateSpaceLimit(_) => EXIT_BOUND,
        _ => EXIT_ENGINE,
    }
}

/// One line per request: its terminal state and aggregate bound QoS.
pub fn summarize(trace: &Trace, requests: &[WsoRequest]) -> Vec<String> {
    let last = trace.last();
    requests
        .iter()
        .map(|r| {
            let c = r.client_id();
            match last.and_then(|cfg| cfg.get_wsoi(c)) {
                None => format!("{c}: not started"),
                Some(inst) if inst.state == InstanceState::Denied => format!("{c}: Denied"),
                Some(inst) => {
                    let agg = aggregate_qos(inst.get_wses().iter().filter_map(|b| b.advertised_qos));
                    let rel = if agg.fits_within(&r.qos()) { "<=" } else { "exceeds" };
                    format!("{c}: {:?}, qos={agg} {rel} {}", inst.state, r.qos())
                }
            }
        })
        .collect()
}

pub fn cmd_run(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Loaded { engine, requests } = try_load!(config, err);
    let trace = match engine.run(&requests, config.seed) {
        Ok(t) => t,
        Err(e) => return engine_failure(&e, err),
    };
    if let Some(path) = &config.trace_out {
        if let Err(e) = write_trace(path, &trace) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_INPUT;
        }
    }
    for line in summarize(&trace, &requests) {
        let _ = writeln!(out, "{line}");
    }
    EXIT_OK
}

fn layer_line(report: &PyramidReport) -> String {
    report
        .layers()
        .iter()
        .map(|(l, v)| format!("{}: {}", format!("{l:?}").to_lowercase(), if v.passed() { "pass" } else { "fail" }))
        .collect::<Vec<_>>()
        .join("; ")
}

fn report_violations(violations: &[Violation], out: &mut dyn Write) -> i32 {
    let _ = out.write_all(formats::violations_to_jsonl(violations).as_bytes());
    if violations.is_empty() {
        EXIT_OK
    } else {
        EXIT_VIOLATION
    }
}

pub fn cmd_explore(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Loaded { engine, requests } = try_load!(config, err);
    let traces = match engine.explore(&requests, &config.limits()) {
        Ok(t) => t,
        Err(e) => return engine_failure(&e, err),
    };
    let report = check_pyramid(&engine, &traces);
    let _ = writeln!(out, "traces: {}; {}", traces.len(), layer_line(&report));
    report_violations(report.verdict().violations(), out)
}

pub fn cmd_check(config: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let Some(path) = &config.trace_in else {
        let _ = writeln!(err, "error: check needs a trace file");
        return EXIT_INPUT;
    };
    let Loaded { engine, requests } = try_load!(config, err);
    let records = match read_trace_records(path) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_INPUT;
        }
    };
    let initial = engine.initial_configuration(&requests).expect("validated on load");
    let (trace, mut violations) = rebuild_trace(initial, &records);
    let report = check_pyramid(&engine, std::slice::from_ref(&trace));
    let mut verdict = report.verdict().violations().to_vec();
    violations.append(&mut verdict);
    let rebuilt = Verdict::from_violations(violations);
    let _ = writeln!(
        out,
        "transitions: {}/{}; {}",
        trace.len(),
        records.len(),
        if rebuilt.passed() { "conformant".to_owned() } else { layer_line(&report) }
    );
    report_violations(rebuilt.violations(), out)
}
