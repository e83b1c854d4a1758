//! Command-line experiment runner.
//!
//! Every subcommand produces a table with a fixed column order, written as
//! CSV (header row, `\n` terminators) or as a JSON object `{meta, rows}`.
//! Exit codes: 0 success or accept, 2 protocol reject, 1 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Number, Value};

use crate::channels::{DepolarizingChannel, NoiseLocation};
use crate::entanglement;
use crate::protocol::{self, AliceMode, AliceRound, ProtocolConfig, Scenario, Transcript};
use crate::qmat::StateVector;
use crate::security::{self, CheatStrategy, DEFAULT_STEER_GRID};
use crate::states::{self, Bb84Basis, Bb84Symbol, Bit, DensityMatrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_REJECT: i32 = 2;

#[derive(Debug, Parser, Serialize)]
#[command(name = "ebcommit", version, about = "Bit commitment through a depolarizing channel")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
pub enum Command {
    /// One commit/open/verify session.
    Run(RunArgs),
    /// Monte Carlo statistics over a grid of q values.
    Sweep(SweepArgs),
    /// Locate the entanglement-breaking threshold of the depolarizing channel.
    Threshold(ThresholdArgs),
    /// Bob's cheating probability against a pair of commitment states.
    Hiding(HidingArgs),
    /// Alice's steering attack value.
    Binding(BindingArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Write the table here instead of standard output.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AliceChoice {
    Honest,
    Epr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseChoice {
    Bob,
    Channel,
}

impl From<NoiseChoice> for NoiseLocation {
    fn from(n: NoiseChoice) -> Self {
        match n {
            NoiseChoice::Bob => NoiseLocation::BobApparatus,
            NoiseChoice::Channel => NoiseLocation::TransmissionChannel,
        }
    }
}

/// A pure qubit state given as Bloch angles `theta,phi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bloch {
    pub theta: f64,
    pub phi: f64,
}

impl Bloch {
    fn state(self) -> StateVector {
        StateVector::from_bloch(self.theta, self.phi)
    }
}

fn parse_bloch(s: &str) -> std::result::Result<Bloch, String> {
    let (t, p) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `theta,phi`, got `{s}`"))?;
    let theta: f64 = t.trim().parse().map_err(|e| format!("bad theta `{t}`: {e}"))?;
    let phi: f64 = p.trim().parse().map_err(|e| format!("bad phi `{p}`: {e}"))?;
    if !theta.is_finite() || !phi.is_finite() {
        return Err(format!("angles must be finite, got `{s}`"));
    }
    Ok(Bloch { theta, phi })
}

fn parse_bit(s: &str) -> std::result::Result<u8, String> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        _ => Err(format!("bit must be 0 or 1, got `{s}`")),
    }
}

/// Binding target: `0` and `1` name the first encoding of that bit
/// (|0⟩ and |+⟩); anything else is read as Bloch angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Target {
    Bit(u8),
    Bloch(Bloch),
}

impl Target {
    fn density(self) -> DensityMatrix {
        match self {
            Target::Bit(b) => {
                let symbol = Bb84Symbol {
                    bit: Bit::new(b).expect("parsed bit"),
                    variant: Bit::ZERO,
                };
                DensityMatrix::pure(&states::bb84_state(symbol))
            }
            Target::Bloch(b) => DensityMatrix::pure(&b.state()),
        }
    }
}

fn parse_target(s: &str) -> std::result::Result<Target, String> {
    match parse_bit(s) {
        Ok(b) => Ok(Target::Bit(b)),
        Err(_) => parse_bloch(s).map(Target::Bloch),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ScenarioArgs {
    #[arg(long, value_parser = parse_bit, default_value = "0")]
    pub bit: u8,
    #[arg(long, value_enum, default_value_t = AliceChoice::Honest)]
    pub alice: AliceChoice,
    /// Bit a cheating Alice steers towards at opening; defaults to the
    /// complement of --bit.
    #[arg(long, value_parser = parse_bit)]
    pub target_bit: Option<u8>,
    /// Custom entangling amplitude a0 for --alice epr (default: Bell pair).
    #[arg(long, value_parser = parse_bloch, requires = "a1")]
    pub a0: Option<Bloch>,
    #[arg(long, value_parser = parse_bloch, requires = "a0")]
    pub a1: Option<Bloch>,
    #[arg(long, value_enum, default_value_t = NoiseChoice::Bob)]
    pub noise_location: NoiseChoice,
    #[arg(long, default_value_t = protocol::DEFAULT_ACCEPT_SIGMA)]
    pub accept_sigma: f64,
}

impl ScenarioArgs {
    fn scenario(&self) -> crate::Result<Scenario> {
        let bit = Bit::new(self.bit)?;
        let alice = match self.alice {
            AliceChoice::Honest => AliceMode::Honest,
            AliceChoice::Epr => AliceMode::Epr {
                strategy: strategy_from(self.a0, self.a1, DEFAULT_STEER_GRID)?,
                target_bit: match self.target_bit {
                    Some(t) => Bit::new(t)?,
                    None => bit.flip(),
                },
            },
        };
        Ok(Scenario { alice, bit })
    }

    fn config(&self, q: f64, rounds: usize, seed: u64) -> crate::Result<ProtocolConfig> {
        let config = ProtocolConfig {
            q,
            rounds,
            noise_location: self.noise_location.into(),
            accept_sigma: self.accept_sigma,
            seed,
        };
        config.validate()?;
        Ok(config)
    }
}

fn strategy_from(a0: Option<Bloch>, a1: Option<Bloch>, grid: usize) -> crate::Result<CheatStrategy> {
    match (a0, a1) {
        (Some(a0), Some(a1)) => CheatStrategy::new(a0.state(), a1.state(), (grid, grid)),
        _ => CheatStrategy::bell().with_grid(grid, grid),
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RunArgs {
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    /// Also write the per-round transcript to this path, in --format.
    #[arg(long)]
    pub dump_transcript: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 0.0)]
    pub q_min: f64,
    #[arg(long, default_value_t = 1.0)]
    pub q_max: f64,
    #[arg(long, default_value_t = 11)]
    pub q_steps: usize,
    #[arg(long, default_value_t = 1000)]
    pub rounds: usize,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// Master seed; every row reuses it, trial i runs with seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub scenario: ScenarioArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long, default_value_t = 0.0)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.0)]
    pub hi: f64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StateSet {
    Bb84,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HidingArgs {
    /// Named pair of commitment states (Bob's view of a BB84 commitment to 0 and to 1).
    #[arg(long, value_enum, conflicts_with_all = ["sigma0", "sigma1"])]
    pub states: Option<StateSet>,
    #[arg(long, value_parser = parse_bloch, requires = "sigma1")]
    pub sigma0: Option<Bloch>,
    #[arg(long, value_parser = parse_bloch, requires = "sigma0")]
    pub sigma1: Option<Bloch>,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyChoice {
    Bell,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BindingArgs {
    #[arg(long, value_enum, conflicts_with_all = ["a0", "a1"])]
    pub strategy: Option<StrategyChoice>,
    #[arg(long, value_parser = parse_bloch, requires = "a1")]
    pub a0: Option<Bloch>,
    #[arg(long, value_parser = parse_bloch, requires = "a0")]
    pub a1: Option<Bloch>,
    #[arg(long, conflicts_with = "q_grid")]
    pub q: Option<f64>,
    /// Comma-separated q values; emits one row per value.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub q_grid: Option<Vec<f64>>,
    /// `0`, `1` (the first encoding of that bit) or `theta,phi`.
    #[arg(long, value_parser = parse_target, default_value = "0")]
    pub target: Target,
    /// Steering grid resolution per axis.
    #[arg(long, default_value_t = DEFAULT_STEER_GRID)]
    pub grid: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub out: OutputArgs,
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    /// Fixed number of decimals.
    Fixed(f64, usize),
    Int(u64),
    Bool(bool),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => format_g12(*x),
            Cell::Fixed(x, d) => format!("{x:.d$}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        let number = |s: String| {
            s.parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or(Value::Null, Value::Number)
        };
        match self {
            Cell::Num(x) => number(format_g12(*x)),
            Cell::Fixed(x, d) => number(format!("{x:.d$}")),
            Cell::Int(n) => json!(n),
            Cell::Bool(b) => json!(b),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("write to memory");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("write to memory");
        }
        w.into_inner().expect("flush to memory")
    }

    pub fn to_json(&self, meta: Value) -> Vec<u8> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        let mut out = serde_json::to_vec_pretty(&json!({ "meta": meta, "rows": rows })).expect("serializable");
        out.push(b'\n');
        out
    }

    pub fn render(&self, format: Format, meta: Value) -> Vec<u8> {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(meta),
        }
    }
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros removed,
/// exponent form outside [1e-4, 1e12).
pub fn format_g12(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa.to_string()), exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// What a subcommand produced.
pub struct Outcome {
    pub table: Table,
    pub exit_code: i32,
    pub seed: Option<u64>,
    /// Extra file outputs (path, table).
    pub extra: Vec<(PathBuf, Table)>,
}

impl Outcome {
    fn ok(table: Table, seed: Option<u64>) -> Self {
        Self {
            table,
            exit_code: EXIT_OK,
            seed,
            extra: Vec::new(),
        }
    }
}

pub fn cmd_run(args: &RunArgs) -> crate::Result<Outcome> {
    let config = args.scenario.config(args.q, args.rounds, args.seed)?;
    let scenario = args.scenario.scenario()?;
    let (transcript, report) = protocol::run_session(&config, &scenario.alice, scenario.bit)?;
    let mut table = Table::new(&[
        "q",
        "rounds",
        "bit",
        "alice",
        "seed",
        "sifted_count",
        "match_count",
        "match_fraction",
        "expected_fraction",
        "threshold",
        "accepted",
        "no_sifted_rounds",
    ]);
    table.push(vec![
        Cell::Num(config.q),
        Cell::Int(config.rounds as u64),
        Cell::Int(scenario.bit.value() as u64),
        Cell::Text(alice_name(args.scenario.alice).into()),
        Cell::Int(config.seed),
        Cell::Int(report.sifted_count as u64),
        Cell::Int(report.match_count as u64),
        Cell::Num(report.match_fraction),
        Cell::Num(report.expected_fraction),
        Cell::Num(report.threshold),
        Cell::Bool(report.accepted),
        Cell::Bool(report.no_sifted_rounds),
    ]);
    let mut outcome = Outcome::ok(table, Some(config.seed));
    if !report.accepted {
        outcome.exit_code = EXIT_REJECT;
    }
    if let Some(path) = &args.dump_transcript {
        outcome.extra.push((path.clone(), transcript_table(&transcript)));
    }
    Ok(outcome)
}

fn alice_name(a: AliceChoice) -> &'static str {
    match a {
        AliceChoice::Honest => "honest",
        AliceChoice::Epr => "epr",
    }
}

/// One row per round.
pub fn transcript_table(t: &Transcript) -> Table {
    let mut table = Table::new(&[
        "round",
        "alice_variant",
        "alice_outcome",
        "bob_basis",
        "bob_outcome",
        "announced_variant",
        "sifted",
        "matched",
    ]);
    let bit = |b: Bit| Cell::Int(b.value() as u64);
    for (i, r) in t.records.iter().enumerate() {
        let (variant, outcome) = match &r.alice {
            AliceRound::Honest { symbol } => (bit(symbol.variant), Cell::Empty),
            AliceRound::Cheat { steering, .. } => (
                Cell::Empty,
                steering.as_ref().map_or(Cell::Empty, |s| bit(s.alice_outcome)),
            ),
        };
        table.push(vec![
            Cell::Int(i as u64),
            variant,
            outcome,
            Cell::Text(
                match r.bob_basis {
                    Bb84Basis::Rectilinear => "rectilinear",
                    Bb84Basis::Diagonal => "diagonal",
                }
                .into(),
            ),
            bit(r.bob_outcome),
            r.announced_variant.map_or(Cell::Empty, bit),
            Cell::Bool(r.sifted),
            r.matched.map_or(Cell::Empty, Cell::Bool),
        ]);
    }
    table
}

/// `steps` evenly spaced points from `lo` to `hi` inclusive.
pub fn q_grid(lo: f64, hi: f64, steps: usize) -> crate::Result<Vec<f64>> {
    if steps == 0 || !(lo <= hi) {
        return Err(crate::Error::OutOfRange {
            name: "q grid",
            value: steps as f64,
            range: "q_steps ≥ 1 and q_min ≤ q_max",
        });
    }
    if steps == 1 {
        return Ok(vec![lo]);
    }
    let n = (steps - 1) as f64;
    Ok((0..steps)
        .map(|k| if k == steps - 1 { hi } else { lo + (hi - lo) * k as f64 / n })
        .collect())
}

pub fn cmd_sweep(args: &SweepArgs) -> crate::Result<Outcome> {
    let scenario = args.scenario.scenario()?;
    let grid = q_grid(args.q_min, args.q_max, args.q_steps)?;
    let configs = grid
        .iter()
        .map(|&q| args.scenario.config(q, args.rounds, args.seed))
        .collect::<crate::Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "q",
        "match_fraction_mean",
        "match_fraction_std",
        "acceptance_rate",
        "separable_fraction",
        "mean_concurrence_post_channel",
    ]);
    for config in &configs {
        let s = protocol::monte_carlo(config, &scenario, args.trials)?;
        table.push(vec![
            Cell::Num(config.q),
            Cell::Num(s.match_fraction_mean),
            Cell::Num(s.match_fraction_std),
            Cell::Num(s.acceptance_rate),
            Cell::Num(s.separable_fraction),
            Cell::Num(s.mean_concurrence_post_channel),
        ]);
    }
    Ok(Outcome::ok(table, Some(args.seed)))
}

pub fn cmd_threshold(args: &ThresholdArgs) -> crate::Result<Outcome> {
    let q_star = entanglement::eb_threshold(DepolarizingChannel::new, args.lo, args.hi, args.tol)?;
    let mut table = Table::new(&["q_star", "lo", "hi", "tol"]);
    table.push(vec![
        Cell::Fixed(q_star, 9),
        Cell::Num(args.lo),
        Cell::Num(args.hi),
        Cell::Num(args.tol),
    ]);
    Ok(Outcome::ok(table, None))
}

pub fn cmd_hiding(args: &HidingArgs) -> crate::Result<Outcome> {
    let (s0, s1, label) = match (args.sigma0, args.sigma1) {
        (Some(a), Some(b)) => (
            DensityMatrix::pure(&a.state()),
            DensityMatrix::pure(&b.state()),
            "explicit",
        ),
        _ => (
            security::bb84_commitment_state(Bit::ZERO),
            security::bb84_commitment_state(Bit::ONE),
            "bb84",
        ),
    };
    let channel = DepolarizingChannel::new(args.q)?;
    let report = security::bob_cheat_probability(&s0, &s1, &channel)?;
    let mut table = Table::new(&["states", "q", "delta_raw", "delta_channel", "p_bcheat"]);
    table.push(vec![
        Cell::Text(label.into()),
        Cell::Num(args.q),
        Cell::Num(report.delta_raw),
        Cell::Num(report.delta_channel),
        Cell::Num(report.p_bcheat),
    ]);
    Ok(Outcome::ok(table, None))
}

pub fn cmd_binding(args: &BindingArgs) -> crate::Result<Outcome> {
    let strategy = strategy_from(args.a0, args.a1, args.grid)?;
    let target = args.target.density();
    let qs = match (&args.q_grid, args.q) {
        (Some(grid), _) => grid.clone(),
        (None, Some(q)) => vec![q],
        (None, None) => vec![1.0],
    };
    let mut table = Table::new(&[
        "q",
        "best_theta",
        "best_phi",
        "best_fidelity_sq",
        "max_no_signalling_residual",
        "objective_spread",
    ]);
    for q in qs {
        let report = security::alice_binding_attack(&strategy, &DepolarizingChannel::new(q)?, &target)?;
        table.push(vec![
            Cell::Num(q),
            Cell::Num(report.best_basis.theta()),
            Cell::Num(report.best_basis.phi()),
            Cell::Num(report.best_fidelity_sq),
            Cell::Num(report.max_no_signalling_residual()),
            Cell::Num(report.objective_spread()),
        ]);
    }
    Ok(Outcome::ok(table, None))
}

fn meta(command: &Command, seed: Option<u64>) -> Value {
    let (name, flags) = match command {
        Command::Run(a) => ("run", serde_json::to_value(a)),
        Command::Sweep(a) => ("sweep", serde_json::to_value(a)),
        Command::Threshold(a) => ("threshold", serde_json::to_value(a)),
        Command::Hiding(a) => ("hiding", serde_json::to_value(a)),
        Command::Binding(a) => ("binding", serde_json::to_value(a)),
    };
    json!({
        "command": name,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": seed,
        "flags": flags.expect("flags serialize"),
    })
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Run(a) => &a.out,
        Command::Sweep(a) => &a.out,
        Command::Threshold(a) => &a.out,
        Command::Hiding(a) => &a.out,
        Command::Binding(a) => &a.out,
    }
}

pub fn execute(command: &Command) -> crate::Result<Outcome> {
    match command {
        Command::Run(a) => cmd_run(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Threshold(a) => cmd_threshold(a),
        Command::Hiding(a) => cmd_hiding(a),
        Command::Binding(a) => cmd_binding(a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let outcome = match execute(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let out = output_args(&cli.command);
    let meta = meta(&cli.command, outcome.seed);
    for (path, table) in &outcome.extra {
        if let Err(e) = std::fs::write(path, table.render(out.format, meta.clone())) {
            let _ = writeln!(stderr, "error: cannot write {}: {e}", path.display());
            return EXIT_USAGE;
        }
    }
    let bytes = outcome.table.render(out.format, meta);
    let written = match &out.output {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => stdout.write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    outcome.exit_code
}
