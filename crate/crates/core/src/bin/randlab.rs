use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use randlab::bits::{from_index, BitString, LexIndex};
use randlab::chaos::{self, MicroState};
use randlab::complexity::{ComplexityKind, Estimator};
use randlab::compress::{best_compressor_bound, compressor_bound, CompressorId};
use randlab::config::RunConfig;
use randlab::machine::Machine;
use randlab::measure::{Bernoulli, RecursiveMeasure, Uniform};
use randlab::mltests::{self, FiniteTest};
use randlab::omega::{halting_set_from_omega, Dovetailer};
use randlab::predictor::{self, ModelClass};
use randlab::report::Report;
use randlab::selection::{self, Rule};
use randlab::sources::{self, BitFormat, BitSource, SourceKind};
use randlab::tourney::{self, Tournament};
use randlab::{Error, Result};

#[derive(Parser)]
#[command(name = "randlab", version, about = "Desk-scale algorithmic randomness laboratory")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// key = value config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Omit the timestamp so identical runs give identical reports.
    #[arg(long, global = true)]
    deterministic: bool,
    /// Write the JSON-lines report here instead of stdout.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    #[arg(long, global = true)]
    max_len: Option<usize>,
    #[arg(long, global = true)]
    steps: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    seeds: Option<u64>,
    #[arg(long, global = true)]
    c: Option<f64>,
    #[arg(long, global = true)]
    c1: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a bit (or digit) sequence.
    Gen(GenArgs),
    /// Run the finite Martin-Löf test battery.
    Test(TestArgs),
    /// Upper bounds on C or K.
    Complexity(ComplexityArgs),
    /// Dovetailed lower approximations of the halting probability.
    Omega(OmegaArgs),
    /// Place selection and frequency stability.
    Select(SelectArgs),
    /// Transitive subtournaments and their compression.
    Tourney(TourneyArgs),
    /// Doubling-map orbits and predictors.
    Chaos(ChaosArgs),
    /// Mixture prediction error traces.
    Predict(PredictArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, conflicts_with_all = ["prng", "source"])]
    champernowne: bool,
    #[arg(long, default_value_t = 2)]
    base: u32,
    #[arg(long, conflicts_with = "source")]
    prng: bool,
    /// champernowne | prng[:SEED] | const:BIT | periodic:BITS | file:PATH
    #[arg(long)]
    source: Option<String>,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Ascii)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Ascii,
    Packed,
}

impl From<Format> for BitFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Ascii => BitFormat::Ascii,
            Format::Packed => BitFormat::Packed,
        }
    }
}

#[derive(Args)]
struct Input {
    /// Bitstring file (ASCII or packed).
    #[arg(long = "in", conflicts_with = "bits")]
    input: Option<PathBuf>,
    /// Literal bitstring.
    #[arg(long)]
    bits: Option<String>,
}

impl Input {
    fn load(&self, cfg: &RunConfig) -> Result<BitString> {
        if let Some(b) = &self.bits {
            return sources::parse_ascii(b);
        }
        match self.input.as_ref().or(cfg.input.as_ref()) {
            Some(p) => sources::read_bits_file(p),
            None => Err(Error::Precondition("give --in FILE or --bits STRING".into())),
        }
    }
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: Input,
    /// `default` or a comma list of leading_zeros, frequency, odd_positions, universal_lower.
    #[arg(long)]
    battery: Option<String>,
    /// Also run the even-positions sequential test to this horizon.
    #[arg(long)]
    sequential: Option<usize>,
}

#[derive(Args)]
struct ComplexityArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    given: Option<String>,
    /// Condition on the length of the input.
    #[arg(long, conflicts_with = "given")]
    given_length: bool,
    #[arg(long, value_enum, default_value_t = Kind::C)]
    kind: Kind,
    /// Report n − C(x_{1:n} | n) for every prefix.
    #[arg(long)]
    profile: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    C,
    K,
}

#[derive(Args)]
struct OmegaArgs {
    #[arg(long, default_value_t = 10_000)]
    phases: u64,
    /// Also decide halting for all programs of at most this many bits.
    #[arg(long)]
    halting_set: Option<usize>,
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long, default_value = "all")]
    rule: String,
    #[arg(long, default_value = "champernowne")]
    source: String,
    #[arg(long, default_value_t = 100_000)]
    limit: u64,
    /// Kolmogorov-Loveland scan of positions N, N−1, …, 1 instead of the rule.
    #[arg(long)]
    reverse: Option<u64>,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0.05)]
    eps: f64,
    /// Print only the number of selected indices, not the list.
    #[arg(long)]
    summary: bool,
}

#[derive(Args)]
struct TourneyArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Analyse this E(T) instead of sampling.
    #[arg(long)]
    encoding: Option<String>,
}

#[derive(Args)]
struct ChaosArgs {
    #[arg(long, default_value = "prng")]
    source: String,
    #[arg(long, default_value_t = 100_000)]
    horizon: usize,
    /// Write the observable orbit to this file.
    #[arg(long)]
    orbit_out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    /// Model generating the data: uniform or bernoulli (p = 3/4).
    #[arg(long, default_value = "bernoulli")]
    truth: String,
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    /// Exact mixture probability of a 0 after this prefix.
    #[arg(long)]
    prefix: Option<String>,
}

fn parse_source(spec: &str, seed: u64) -> Result<BitSource> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let bad = || Error::Precondition(format!("bad source `{spec}`"));
    Ok(match name {
        "champernowne" => BitSource::champernowne(),
        "prng" => BitSource::prng(if arg.is_empty() { seed } else { arg.parse().map_err(|_| bad())? }),
        "const" => BitSource::new(SourceKind::Constant(match arg {
            "0" => false,
            "1" => true,
            _ => return Err(bad()),
        })),
        "periodic" => {
            let p = sources::parse_ascii(arg)?;
            if p.is_empty() {
                return Err(bad());
            }
            BitSource::new(SourceKind::Periodic(p))
        }
        "file" => BitSource::finite(sources::read_bits_file(arg.as_ref())?),
        _ => return Err(bad()),
    })
}

fn config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.deterministic |= common.deterministic;
    if let Some(v) = common.max_len {
        cfg.max_len = v;
    }
    if let Some(v) = common.steps {
        cfg.steps = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.seeds {
        cfg.seeds = v;
    }
    if let Some(v) = common.c {
        cfg.c = v;
    }
    if let Some(v) = common.c1 {
        cfg.c1 = v;
    }
    if common.report.is_some() {
        cfg.output = common.report.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn report(cfg: &RunConfig, command: &str) -> Result<Report<Box<dyn Write>>> {
    let out: Box<dyn Write> = match &cfg.output {
        Some(p) => Box::new(io::BufWriter::new(std::fs::File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout())),
    };
    Report::start(out, command, cfg)
}

fn estimator(cfg: &RunConfig) -> Estimator {
    Estimator::new(cfg.steps, cfg.max_len)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = config(&cli.common)?;
    match cli.command {
        Command::Gen(a) => gen(&cfg, a),
        Command::Test(a) => test(&cfg, a),
        Command::Complexity(a) => complexity(&cfg, a),
        Command::Omega(a) => omega(&cfg, a),
        Command::Select(a) => select(&cfg, a),
        Command::Tourney(a) => tourney(&cfg, a),
        Command::Chaos(a) => chaos(&cfg, a),
        Command::Predict(a) => predict(&cfg, a),
    }
}

fn gen(cfg: &RunConfig, a: GenArgs) -> Result<()> {
    if a.base < 2 || a.base > 36 {
        return Err(Error::Precondition(format!("base {} outside 2..=36", a.base)));
    }
    if a.champernowne && a.base != 2 {
        if a.out.is_some() {
            return Err(Error::Precondition("only base-2 sequences can be written as bit files".into()));
        }
        println!("{}", sources::digits_to_string(&sources::champernowne(a.base, a.count)));
        return Ok(());
    }
    let spec = match (&a.source, a.champernowne, a.prng) {
        (Some(s), _, _) => s.clone(),
        (None, _, true) => "prng".into(),
        _ => "champernowne".into(),
    };
    let bits = parse_source(&spec, cfg.seed)?.take(a.count);
    match a.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => {
            sources::write_bits_file(path, &bits, a.format.into())?;
            #[derive(Serialize)]
            struct Artifact<'a> {
                path: String,
                source: &'a str,
                len: usize,
            }
            let mut r = report(&RunConfig { output: None, ..cfg.clone() }, "gen")?;
            r.emit("artifact", &Artifact { path: path.display().to_string(), source: &spec, len: bits.len() })?;
            r.finish()?;
        }
        None => println!("{bits}"),
    }
    Ok(())
}

fn test(cfg: &RunConfig, a: TestArgs) -> Result<()> {
    let x = a.input.load(cfg)?;
    let battery_name = a.battery.unwrap_or_else(|| cfg.battery.clone());
    let est = estimator(cfg);
    let battery: Vec<Box<dyn FiniteTest>> = if battery_name == "default" {
        mltests::default_battery(est)
    } else {
        battery_name
            .split(',')
            .map(|name| -> Result<Box<dyn FiniteTest>> {
                Ok(match name.trim() {
                    "leading_zeros" => Box::new(mltests::LeadingZeros),
                    "frequency" => Box::new(mltests::Frequency),
                    "odd_positions" => Box::new(mltests::OddPositions),
                    "universal_lower" => Box::new(mltests::UniversalLower::new(est.clone())),
                    other => return Err(Error::Precondition(format!("unknown test `{other}`"))),
                })
            })
            .collect::<Result<_>>()?
    };
    let mut r = report(cfg, "test")?;
    for t in &battery {
        r.emit("test", &mltests::record(t.as_ref(), &x))?;
    }
    if let Some(h) = a.sequential {
        let out = mltests::run_sequential(&mltests::EvenOnes, &mut BitSource::finite(x.clone()), h);
        #[derive(Serialize)]
        struct Seq {
            name: &'static str,
            horizon: usize,
            sup: u64,
            climbing: bool,
        }
        r.emit("sequential", &Seq { name: "even_ones", horizon: out.horizon, sup: out.sup, climbing: out.climbing })?;
    }
    r.finish()?;
    Ok(())
}

fn complexity(cfg: &RunConfig, a: ComplexityArgs) -> Result<()> {
    let x = a.input.load(cfg)?;
    let est = estimator(cfg);
    let mut r = report(cfg, "complexity")?;
    if a.profile {
        #[derive(Serialize)]
        struct Point {
            n: usize,
            deficiency_lower: i64,
        }
        for (n, d) in est.oscillation_profile(&x) {
            r.emit("profile", &Point { n, deficiency_lower: d })?;
        }
        r.finish()?;
        return Ok(());
    }
    let cond = match (&a.given, a.given_length) {
        (Some(g), _) => sources::parse_ascii(g)?,
        (None, true) => from_index(LexIndex(x.len() as u64)),
        (None, false) => BitString::new(),
    };
    let kind = match a.kind {
        Kind::C => ComplexityKind::C,
        Kind::K => ComplexityKind::K,
    };
    let e = est.upper(kind, &x, &cond);
    est.verify(&e, &x).map_err(|err| Error::Invariant(format!("witness failed verification: {err}")))?;
    r.emit("estimate", &e)?;
    for codec in [CompressorId::Raw, CompressorId::RunLength] {
        r.emit("compressor", &compressor_bound(&x, codec))?;
    }
    r.emit("best_compressor", &best_compressor_bound(&x))?;
    r.finish()?;
    Ok(())
}

fn omega(cfg: &RunConfig, a: OmegaArgs) -> Result<()> {
    let machine = Machine::new();
    let d = Dovetailer::new(&machine, cfg.max_len, cfg.steps)?;
    let mut r = report(cfg, "omega")?;
    let trace = d.trace(a.phases);
    if trace.windows(2).any(|w| w[1].halted < w[0].halted) {
        return Err(Error::Invariant("trace is not monotone".into()));
    }
    for p in &trace {
        r.emit("trace", p)?;
    }
    let approx = d.approximation(a.phases);
    #[derive(Serialize)]
    struct Final {
        phase: u64,
        numerator_hex: String,
        exponent: u32,
        value: f64,
        halted: usize,
        final_phase: u64,
        restricted_numerator_hex: String,
        restricted_exponent: u32,
    }
    let full = d.restricted_omega();
    r.emit(
        "final",
        &Final {
            phase: a.phases,
            numerator_hex: approx.value.numerator_hex(),
            exponent: approx.value.exponent(),
            value: approx.value.to_f64(),
            halted: approx.contributing.len(),
            final_phase: d.final_phase(),
            restricted_numerator_hex: full.numerator_hex(),
            restricted_exponent: full.exponent(),
        },
    )?;
    if let Some(n) = a.halting_set {
        let set = halting_set_from_omega(&machine, &approx, n)?;
        #[derive(Serialize)]
        struct Halting {
            n: usize,
            programs: Vec<String>,
        }
        r.emit("halting_set", &Halting { n, programs: set.iter().map(|p| p.to_string()).collect() })?;
    }
    r.finish()?;
    Ok(())
}

fn select(cfg: &RunConfig, a: SelectArgs) -> Result<()> {
    let src = parse_source(&a.source, cfg.seed)?;
    #[derive(Serialize)]
    struct Out {
        rule: String,
        selected: usize,
        truncated: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        indices: Option<Vec<u64>>,
    }
    let (out, bits) = match a.reverse {
        Some(n) => {
            let rule = selection::Reverse(n);
            let s = selection::select_kl(&rule, &src, a.limit as usize)?;
            let idx = s.selected_indices();
            (Out { rule: format!("reverse({n})"), selected: idx.len(), truncated: false, indices: Some(idx) }, s.bits)
        }
        None => {
            let rule = Rule::parse(&a.rule)?;
            let s = selection::select_mwc(&rule, &src, a.limit);
            (
                Out { rule: rule.to_string(), selected: s.indices.len(), truncated: s.truncated, indices: Some(s.indices) },
                s.bits,
            )
        }
    };
    let out = if a.summary { Out { indices: None, ..out } } else { out };
    let profile = selection::frequency_profile(&bits, bits.len() as u64);
    let mut r = report(cfg, "select")?;
    r.emit("selection", &out)?;
    r.emit("stability", &selection::stability_report(&profile, a.p, a.eps))?;
    r.finish()?;
    Ok(())
}

fn tourney(cfg: &RunConfig, a: TourneyArgs) -> Result<()> {
    let mut r = report(cfg, "tourney")?;
    match a.encoding {
        Some(e) => {
            let t = Tournament::decode(&sources::parse_ascii(&e)?, a.n)?;
            let w = tourney::largest_transitive(&t)?;
            let compressed = tourney::compress_with_witness(&t, &w)?;
            if tourney::reconstruct(&compressed, a.n, w.len())? != t {
                return Err(Error::Invariant("reconstruction differs from input".into()));
            }
            #[derive(Serialize)]
            struct Analysis {
                n: usize,
                v: usize,
                order: Vec<usize>,
                compressed: String,
                length_delta: i64,
            }
            r.emit(
                "analysis",
                &Analysis {
                    n: a.n,
                    v: w.len(),
                    length_delta: tourney::length_delta(a.n, w.len()),
                    order: w.order,
                    compressed: compressed.to_string(),
                },
            )?;
        }
        None => r.emit("sample", &tourney::sample_and_check(a.n, a.trials, cfg.seed)?)?,
    }
    r.finish()?;
    Ok(())
}

fn chaos(cfg: &RunConfig, a: ChaosArgs) -> Result<()> {
    let state = MicroState::new(parse_source(&a.source, cfg.seed)?);
    if let Some(p) = &a.orbit_out {
        sources::write_bits_file(p, &chaos::orbit_observables(&state, a.horizon), cfg.format)?;
    }
    let mut r = report(cfg, "chaos")?;
    for mut p in chaos::predictor_library() {
        r.emit("evaluation", &chaos::evaluate_predictor(p.as_mut(), &state, a.horizon))?;
    }
    r.finish()?;
    Ok(())
}

fn predict(cfg: &RunConfig, a: PredictArgs) -> Result<()> {
    let models: Vec<Arc<dyn RecursiveMeasure>> = vec![Arc::new(Uniform), Arc::new(Bernoulli::new(3, 2))];
    let class = ModelClass::uniform(models)?;
    let truth = match a.truth.as_str() {
        "uniform" => 0,
        "bernoulli" => 1,
        other => return Err(Error::Precondition(format!("unknown model `{other}`"))),
    };
    let mut r = report(cfg, "predict")?;
    if let Some(x) = a.prefix {
        let p = predictor::mixture_next(&class, &sources::parse_ascii(&x)?)?;
        #[derive(Serialize)]
        struct Next {
            prefix: String,
            p_zero: String,
        }
        r.emit("mixture_next", &Next { prefix: x, p_zero: p.to_string() })?;
    }
    #[derive(Serialize)]
    struct Summary {
        seed: u64,
        horizon: usize,
        cumulative_error: f64,
        reference: f64,
    }
    let traces = predictor::error_traces(&class, truth, cfg.seed..cfg.seed + cfg.seeds, a.horizon)?;
    for t in &traces {
        r.emit("trace", &Summary { seed: t.seed, horizon: a.horizon, cumulative_error: t.total(), reference: t.reference })?;
    }
    #[derive(Serialize)]
    struct Mean {
        seeds: usize,
        mean_cumulative_error: f64,
        reference: f64,
    }
    let mean = traces.iter().map(|t| t.total()).sum::<f64>() / traces.len() as f64;
    r.emit("summary", &Mean { seeds: traces.len(), mean_cumulative_error: mean, reference: traces[0].reference })?;
    r.finish()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("randlab: {e}");
            match e {
                Error::Invariant(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
