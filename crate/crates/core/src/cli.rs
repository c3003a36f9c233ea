//! Command-line front end.
//!
//! Every subcommand takes its parameters from flags, falling back to an
//! optional TOML scenario file (`--config`), then to built-in defaults.
//! Tables go to `--out` or stdout as CSV with a header row; floats in
//! tables use 17 significant digits.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::amenability::{amenability_gap, cesaro_trajectory, mean_residual, NormOptions};
use crate::error::{Error, Result};
use crate::fusion::{FreeUnitary, FusionSystem, IntegerSpin, QParam, TemperleyLieb, Word};
use crate::hamana::{
    choi_effros_product, family_cesaro, minimal_idempotent, FamilyDoc, MatrixDoc, ResultDoc,
};
use crate::walk::{
    convolve_power, estimate_bound, random_estimate_instance, sample_paths,
    stationarity_gap_with, verify_estimate, walk_kernel, AtomicMeasure, BoundaryApproximant,
    Cylinder, LumpOptions, PowerOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;

const DEFAULT_Q: f64 = 0.5;
const DEFAULT_MU: &str = "a:0.5,b:0.5";
/// Largest free-word truncation length accepted on the command line.
const MAX_WORD_TRUNC: usize = 20;

#[derive(Parser, Debug)]
#[command(name = "qwalk", version, about = "Random walks on fusion rings")]
struct Cli {
    /// TOML scenario file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for path sampling (0: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    group: Group,
}

#[derive(Subcommand, Debug)]
enum Group {
    /// Fusion rules and quantum dimensions.
    #[command(subcommand)]
    Fusion(FusionCmd),
    /// Convolution powers, sample paths and stationarity.
    #[command(subcommand)]
    Walk(WalkCmd),
    /// The boundary estimate.
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Fusion-matrix norms and invariant-mean residuals.
    #[command(subcommand)]
    Amen(AmenCmd),
    /// Minimal idempotents and Choi–Effros products.
    #[command(subcommand)]
    Hamana(HamanaCmd),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Model {
    Auf,
    Tl,
    Spin,
}

impl Model {
    fn name(self) -> &'static str {
        match self {
            Model::Auf => "auf",
            Model::Tl => "tl",
            Model::Spin => "spin",
        }
    }
}

#[derive(Subcommand, Debug)]
enum FusionCmd {
    /// Quantum dimension of a label.
    Qdim(FusionArgs),
    /// Irreducible summands of x ⊗ y with multiplicities.
    Decompose(FusionArgs),
}

#[derive(Args, Debug)]
struct FusionArgs {
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    word: Option<String>,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
}

#[derive(Subcommand, Debug)]
enum WalkCmd {
    /// Exact convolution power μ^{*n}.
    Power(PowerArgs),
    /// Seeded sample paths.
    Sample(SampleArgs),
    /// Stationarity gaps of λ * μ^{*n} against μ^{*n}.
    Stationary(StationaryArgs),
}

#[derive(Args, Debug)]
struct PowerArgs {
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    prune: Option<f64>,
    #[arg(long)]
    max_support: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    paths: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tail: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StationaryArgs {
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    /// Comma-separated starting words.
    #[arg(long)]
    starts: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    suffixes_maxlen: Option<usize>,
    /// Letters kept at the front of lumped words.
    #[arg(long)]
    head: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum BoundsCmd {
    /// Evaluate 1 − q^{2(k+1)}/(1 − q²).
    Estimate(EstimateArgs),
    /// Check the estimate on random admissible instances.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    maxlen: Option<usize>,
    #[arg(long = "N")]
    big_n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum AmenCmd {
    /// ‖Γ_U‖ on a truncation against d_q(U).
    GammaNorm(GammaArgs),
    /// Invariant-mean residuals of Cesàro averages.
    Mean(MeanArgs),
}

#[derive(Args, Debug)]
struct GammaArgs {
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "U")]
    u: Option<String>,
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MeanArgs {
    #[arg(long, value_enum)]
    model: Option<Model>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    window: Option<usize>,
    #[arg(long)]
    trunc: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum HamanaCmd {
    /// Minimal idempotent of the family by descent.
    Minimal(HamanaArgs),
    /// Cesàro idempotent of the generator average.
    Cesaro(HamanaArgs),
    /// Choi–Effros product of the operands `a`, `b` in the input document.
    Choieffros(HamanaArgs),
}

#[derive(Args, Debug)]
struct HamanaArgs {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Values a scenario file may set. Keys match the long flag names with
/// dashes replaced by underscores.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Scenario {
    model: Option<Model>,
    q: Option<f64>,
    mu: Option<String>,
    n: Option<usize>,
    prune: Option<f64>,
    max_support: Option<usize>,
    paths: Option<u64>,
    steps: Option<usize>,
    seed: Option<u64>,
    tail: Option<usize>,
    threads: Option<usize>,
    starts: Option<String>,
    suffixes_maxlen: Option<usize>,
    head: Option<usize>,
    k: Option<usize>,
    trials: Option<u64>,
    maxlen: Option<usize>,
    #[serde(rename = "N")]
    big_n: Option<usize>,
    #[serde(rename = "U")]
    u: Option<String>,
    word: Option<String>,
    x: Option<String>,
    y: Option<String>,
    trunc: Option<usize>,
    tol: Option<f64>,
    max_iter: Option<usize>,
    window: Option<usize>,
    budget: Option<usize>,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
}

impl Scenario {
    fn load(path: &Path) -> Result<Self> {
        let text = read_file(path)?;
        toml::from_str(&text).map_err(|e| {
            let msg = e.message().to_string();
            Error::Config(format!("{}: {msg}", path.display()))
        })
    }
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))
}

/// Flag, then scenario value, then default.
fn pick<T: Clone>(flag: &Option<T>, file: &Option<T>, default: T) -> T {
    flag.clone().or_else(|| file.clone()).unwrap_or(default)
}

fn need<T: Clone>(flag: &Option<T>, file: &Option<T>, name: &str) -> Result<T> {
    flag.clone()
        .or_else(|| file.clone())
        .ok_or_else(|| Error::Config(format!("missing required --{name}")))
}

fn qparam(flag: Option<f64>, sc: &Scenario) -> Result<QParam> {
    QParam::new(pick(&flag, &sc.q, DEFAULT_Q))
}

fn fmt_f(v: f64) -> String {
    format!("{v:.16e}")
}

/// Outcome of a subcommand: text for stdout or `--out`, and whether a
/// numerical check failed.
struct Output {
    text: String,
    out: Option<PathBuf>,
    flagged: Option<String>,
}

impl Output {
    fn table(text: String, out: Option<PathBuf>) -> Self {
        Output {
            text,
            out,
            flagged: None,
        }
    }

    fn stdout(text: String) -> Self {
        Self::table(text, None)
    }
}

/// Run the harness on `args` (including the program name). Returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand)
            {
                let _ = write!(stdout, "{}", e.render());
                return if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand {
                    EXIT_INVALID
                } else {
                    EXIT_OK
                };
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("invalid arguments");
            let _ = writeln!(stderr, "{line}");
            return EXIT_INVALID;
        }
    };
    match dispatch(&cli) {
        Ok(output) => {
            let written = match &output.out {
                Some(path) => std::fs::write(path, &output.text).map_err(Error::from),
                None => stdout.write_all(output.text.as_bytes()).map_err(Error::from),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_INVALID;
            }
            match output.flagged {
                Some(msg) => {
                    let _ = writeln!(stderr, "warning: {msg}");
                    EXIT_NUMERICAL
                }
                None => EXIT_OK,
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::SupportOverflow { .. } => EXIT_NUMERICAL,
                _ => EXIT_INVALID,
            }
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Output> {
    let sc = match &cli.config {
        Some(p) => Scenario::load(p)?,
        None => Scenario::default(),
    };
    let threads = pick(&cli.threads, &sc.threads, 0);
    match &cli.group {
        Group::Fusion(FusionCmd::Qdim(a)) => fusion_qdim(a, &sc),
        Group::Fusion(FusionCmd::Decompose(a)) => fusion_decompose(a, &sc),
        Group::Walk(WalkCmd::Power(a)) => walk_power(a, &sc),
        Group::Walk(WalkCmd::Sample(a)) => walk_sample(a, &sc, threads),
        Group::Walk(WalkCmd::Stationary(a)) => walk_stationary(a, &sc),
        Group::Bounds(BoundsCmd::Estimate(a)) => {
            let q = qparam(a.q, &sc)?;
            let k = need(&a.k, &sc.k, "k")?;
            Ok(Output::stdout(format!("{}\n", estimate_bound(q, k))))
        }
        Group::Bounds(BoundsCmd::Verify(a)) => bounds_verify(a, &sc),
        Group::Amen(AmenCmd::GammaNorm(a)) => amen_gamma(a, &sc),
        Group::Amen(AmenCmd::Mean(a)) => amen_mean(a, &sc),
        Group::Hamana(cmd) => hamana(cmd, &sc),
    }
}

fn fusion_qdim(a: &FusionArgs, sc: &Scenario) -> Result<Output> {
    let q = qparam(a.q, sc)?;
    let label = need(&a.word, &sc.word, "word")?;
    let d = match pick(&a.model, &sc.model, Model::Auf) {
        Model::Auf => qdim_of(&FreeUnitary::new(q), &label)?,
        Model::Tl => qdim_of(&TemperleyLieb::new(q), &label)?,
        Model::Spin => qdim_of(&IntegerSpin::new(q), &label)?,
    };
    Ok(Output::stdout(format!("{d}\n")))
}

fn qdim_of<S: FusionSystem>(sys: &S, label: &str) -> Result<f64> {
    Ok(sys.qdim(&sys.parse_label(label)?))
}

fn fusion_decompose(a: &FusionArgs, sc: &Scenario) -> Result<Output> {
    let q = qparam(a.q, sc)?;
    let x = need(&a.x, &sc.x, "x")?;
    let y = need(&a.y, &sc.y, "y")?;
    let text = match pick(&a.model, &sc.model, Model::Auf) {
        Model::Auf => decompose_lines(&FreeUnitary::new(q), &x, &y)?,
        Model::Tl => decompose_lines(&TemperleyLieb::new(q), &x, &y)?,
        Model::Spin => decompose_lines(&IntegerSpin::new(q), &x, &y)?,
    };
    Ok(Output::stdout(text))
}

fn decompose_lines<S: FusionSystem>(sys: &S, x: &str, y: &str) -> Result<String> {
    let (x, y) = (sys.parse_label(x)?, sys.parse_label(y)?);
    let mut s = String::new();
    for (l, m) in sys.decompose(&x, &y) {
        let _ = writeln!(s, "{l} {m}");
    }
    Ok(s)
}

fn word_measure(flag: &Option<String>, sc: &Scenario) -> Result<AtomicMeasure<Word>> {
    AtomicMeasure::parse_spec(&pick(flag, &sc.mu, DEFAULT_MU.to_string()))
}

fn walk_power(a: &PowerArgs, sc: &Scenario) -> Result<Output> {
    let q = qparam(a.q, sc)?;
    let mu = word_measure(&a.mu, sc)?;
    let n = need(&a.n, &sc.n, "n")?;
    let prune = pick(&a.prune, &sc.prune, 0.0);
    if !(prune >= 0.0) {
        return Err(Error::Config(format!("prune epsilon must be nonnegative, got {prune}")));
    }
    let opts = PowerOptions {
        prune_eps: prune,
        max_support: pick(&a.max_support, &sc.max_support, PowerOptions::default().max_support),
    };
    let power = convolve_power(&mu, n, opts, q)?;
    let mut s = String::from("word,mass\n");
    for (w, v) in power.iter() {
        let _ = writeln!(s, "{w},{}", fmt_f(v));
    }
    let _ = writeln!(s, "# pruned_mass={}", fmt_f(power.pruned_mass()));
    Ok(Output::table(s, a.out.clone().or_else(|| sc.out.clone())))
}

fn walk_sample(a: &SampleArgs, sc: &Scenario, threads: usize) -> Result<Output> {
    let q = qparam(a.q, sc)?;
    let mu = word_measure(&a.mu, sc)?;
    let paths = pick(&a.paths, &sc.paths, 1000);
    let steps = pick(&a.steps, &sc.steps, 100);
    let seed = pick(&a.seed, &sc.seed, 0);
    let tail = pick(&a.tail, &sc.tail, 3);
    let (summaries, stats) = sample_paths(&mu, paths, steps, seed, q, tail, threads)?;
    let mut s = String::from("path_index,final_word,stabilize_step\n");
    for p in &summaries {
        let step = p.stabilize_step.map_or("none".to_string(), |m| m.to_string());
        let _ = writeln!(s, "{},{},{step}", p.path_index, p.final_word);
    }
    let _ = writeln!(
        s,
        "# paths={} settled={} stabilized={} settled_fraction={}",
        stats.paths,
        stats.settled,
        stats.stabilized,
        fmt_f(stats.settled_fraction())
    );
    Ok(Output::table(s, a.out.clone().or_else(|| sc.out.clone())))
}

fn walk_stationary(a: &StationaryArgs, sc: &Scenario) -> Result<Output> {
    let q = qparam(a.q, sc)?;
    let mu = word_measure(&a.mu, sc)?;
    let n = need(&a.n, &sc.n, "n")?;
    let starts: Vec<Word> = pick(&a.starts, &sc.starts, "e".to_string())
        .split(',')
        .map(|w| w.trim().parse())
        .collect::<Result<_>>()?;
    let maxlen = pick(&a.suffixes_maxlen, &sc.suffixes_maxlen, 2);
    let head = pick(&a.head, &sc.head, LumpOptions::default().head);
    if head == 0 || head + maxlen > 64 {
        return Err(Error::Config(format!(
            "lumped head must be at least 1 with head + suffixes-maxlen at most 64, got {head} and {maxlen}"
        )));
    }
    let opts = LumpOptions {
        head,
        tail: maxlen,
        prune_eps: 0.0,
    };
    let approx = BoundaryApproximant::new(&mu, n, q, opts);
    let suffixes = Cylinder::all_up_to(maxlen);
    let mut s = String::from("start,n,gap,pruned_mass\n");
    for x in &starts {
        let g = stationarity_gap_with(&approx, &AtomicMeasure::dirac(x.clone()), &suffixes);
        let _ = writeln!(s, "{x},{n},{},{}", fmt_f(g.gap), fmt_f(g.pruned_mass));
    }
    Ok(Output::table(s, a.out.clone().or_else(|| sc.out.clone())))
}

fn bounds_verify(a: &VerifyArgs, sc: &Scenario) -> Result<Output> {
    let q = qparam(a.q, sc)?;
    let trials = pick(&a.trials, &sc.trials, 1000);
    let maxlen = pick(&a.maxlen, &sc.maxlen, 5);
    let big_n = pick(&a.big_n, &sc.big_n, 1);
    let seed = pick(&a.seed, &sc.seed, 0);
    let mut s = String::from("trial,measured,bound,ok\n");
    let mut failures = 0u64;
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(t);
        let (lambda, y, x_tail) = random_estimate_instance(&mut rng, maxlen, big_n);
        let c = verify_estimate(&lambda, &y, &x_tail, big_n, q)?;
        failures += u64::from(!c.ok);
        let _ = writeln!(s, "{t},{},{},{}", fmt_f(c.measured), fmt_f(c.bound), c.ok);
    }
    let mut out = Output::table(s, a.out.clone().or_else(|| sc.out.clone()));
    if failures > 0 {
        out.flagged = Some(format!("{failures} of {trials} instances violate the bound"));
    }
    Ok(out)
}

fn truncation_words(len: usize) -> Result<Vec<Word>> {
    if len > MAX_WORD_TRUNC {
        return Err(Error::Config(format!(
            "free-word truncation {len} exceeds the limit {MAX_WORD_TRUNC}"
        )));
    }
    Ok(Word::all_up_to(len).collect())
}

fn amen_gamma(a: &GammaArgs, sc: &Scenario) -> Result<Output> {
    let q = qparam(a.q, sc)?;
    let model = pick(&a.model, &sc.model, Model::Tl);
    let u = need(&a.u, &sc.u, "U")?;
    let trunc = need(&a.trunc, &sc.trunc, "trunc")?;
    let opts = NormOptions {
        tol: pick(&a.tol, &sc.tol, NormOptions::default().tol),
        max_iter: pick(&a.max_iter, &sc.max_iter, NormOptions::default().max_iter),
    };
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(Error::Config("tolerance and iteration budget must be positive".into()));
    }
    let row = |label: String, size: usize, norm: f64, res: f64, qdim: f64, gap: f64| {
        format!(
            "{},{},{label},{size},{},{},{},{}\n",
            model.name(),
            fmt_f(q.value()),
            fmt_f(norm),
            fmt_f(res),
            fmt_f(qdim),
            fmt_f(gap)
        )
    };
    let (line, converged) = match model {
        Model::Auf => {
            let sys = FreeUnitary::new(q);
            let r = amenability_gap(&sys, &sys.parse_label(&u)?, &truncation_words(trunc)?, opts, 0.0)?;
            (row(r.label.to_string(), r.truncation_size, r.norm, r.norm_residual, r.qdim, r.gap), r.norm_converged)
        }
        Model::Tl => {
            let sys = TemperleyLieb::new(q);
            let labels: Vec<u32> = (0..=trunc as u32).collect();
            let r = amenability_gap(&sys, &sys.parse_label(&u)?, &labels, opts, 0.0)?;
            (row(r.label.to_string(), r.truncation_size, r.norm, r.norm_residual, r.qdim, r.gap), r.norm_converged)
        }
        Model::Spin => {
            let sys = IntegerSpin::new(q);
            let labels: Vec<u32> = (0..=trunc as u32).step_by(2).collect();
            let r = amenability_gap(&sys, &sys.parse_label(&u)?, &labels, opts, 0.0)?;
            (row(r.label.to_string(), r.truncation_size, r.norm, r.norm_residual, r.qdim, r.gap), r.norm_converged)
        }
    };
    let text = format!("model,q,U,truncation_size,norm,norm_residual,qdim,gap\n{line}");
    let mut out = Output::table(text, a.out.clone().or_else(|| sc.out.clone()));
    if !converged {
        out.flagged = Some("power iteration did not converge; best estimate written".into());
    }
    Ok(out)
}

fn amen_mean(a: &MeanArgs, sc: &Scenario) -> Result<Output> {
    let q = qparam(a.q, sc)?;
    let model = pick(&a.model, &sc.model, Model::Tl);
    let window = need(&a.window, &sc.window, "window")?;
    let text = match model {
        Model::Auf => {
            let trunc = pick(&a.trunc, &sc.trunc, window.min(MAX_WORD_TRUNC));
            mean_table(&FreeUnitary::new(q), model, a, sc, window, &truncation_words(trunc)?, DEFAULT_MU)?
        }
        Model::Tl => {
            let trunc = pick(&a.trunc, &sc.trunc, window + 1);
            let labels: Vec<u32> = (0..=trunc as u32).collect();
            mean_table(&TemperleyLieb::new(q), model, a, sc, window, &labels, "1:1")?
        }
        Model::Spin => {
            let trunc = pick(&a.trunc, &sc.trunc, 2 * window + 2);
            let labels: Vec<u32> = (0..=trunc as u32).step_by(2).collect();
            mean_table(&IntegerSpin::new(q), model, a, sc, window, &labels, "2:1")?
        }
    };
    Ok(Output::table(text, a.out.clone().or_else(|| sc.out.clone())))
}

/// One row per window `1..=window`: the Cesàro average of `δ_e P_μ^k`
/// tested against each generator kernel `P_s`, `s ∈ supp μ`.
fn mean_table<S: FusionSystem>(
    sys: &S,
    model: Model,
    a: &MeanArgs,
    sc: &Scenario,
    window: usize,
    labels: &[S::Label],
    default_mu: &str,
) -> Result<String> {
    let spec = pick(&a.mu, &sc.mu, default_mu.to_string());
    let mu = AtomicMeasure::parse_spec_with(&spec, |s| sys.parse_label(s))?;
    let kernel = walk_kernel(sys, &mu, labels)?;
    let gens = mu
        .labels()
        .map(|s| walk_kernel(sys, &AtomicMeasure::dirac(s.clone()), labels))
        .collect::<Result<Vec<_>>>()?;
    let unit = kernel
        .index_of(&sys.unit())
        .ok_or_else(|| Error::InvalidLabel("the unit is not in the truncation".into()))?;
    let mut start = vec![0.0; labels.len()];
    start[unit] = 1.0;
    let mut s = String::from("model,q,window");
    for g in mu.labels() {
        let _ = write!(s, ",residual_{g}");
    }
    s.push_str(",leak\n");
    for (i, c) in cesaro_trajectory(&start, &kernel, window)?.iter().enumerate() {
        let r = mean_residual(&c.m, &gens)?;
        let _ = write!(s, "{},{},{}", model.name(), fmt_f(sys.q().value()), i + 1);
        for v in &r.residuals {
            let _ = write!(s, ",{}", fmt_f(*v));
        }
        let _ = writeln!(s, ",{}", fmt_f(c.leak));
    }
    Ok(s)
}

fn hamana(cmd: &HamanaCmd, sc: &Scenario) -> Result<Output> {
    let a = match cmd {
        HamanaCmd::Minimal(a) | HamanaCmd::Cesaro(a) | HamanaCmd::Choieffros(a) => a,
    };
    let input = need(&a.input, &sc.input, "input")?;
    let tol = pick(&a.tol, &sc.tol, 1e-10);
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let budget = pick(&a.budget, &sc.budget, 100);
    let doc = FamilyDoc::parse(&read_file(&input)?)?;
    let fam = doc.family()?;
    let result = match cmd {
        HamanaCmd::Cesaro(_) => family_cesaro(&fam, tol),
        _ => minimal_idempotent(&fam, tol, budget),
    };
    let mut out = ResultDoc::from(&result);
    let mut flagged = (!result.certified).then(|| {
        format!(
            "idempotent not certified (idempotency {:e}, minimality {:e})",
            result.idempotency_residual, result.minimality_residual
        )
    });
    if let HamanaCmd::Choieffros(_) = cmd {
        let n = fam.matrix_side().ok_or_else(|| {
            Error::Config("choieffros needs a ucp family on a matrix algebra".into())
        })?;
        let operand = |m: &Option<MatrixDoc>, name: &str| {
            m.as_ref()
                .ok_or_else(|| Error::Config(format!("input document has no operand {name:?}")))?
                .to_matrix(n, n)
        };
        let (x, y) = (operand(&doc.a, "a")?, operand(&doc.b, "b")?);
        let p = choi_effros_product(&result.matrix, &x, &y)?;
        out.product = Some(MatrixDoc::from_matrix(&p));
    }
    if !result.converged && flagged.is_none() {
        flagged = Some("procedure did not converge".into());
    }
    let mut text = serde_json::to_string_pretty(&out)?;
    text.push('\n');
    Ok(Output {
        text,
        out: a.out.clone().or_else(|| sc.out.clone()),
        flagged,
    })
}
