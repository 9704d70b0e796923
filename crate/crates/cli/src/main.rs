//! `bugforge` — inject, classify, generate, test, and replicate.
//!
//! Exit codes: 0 success, 1 domain error (one-line diagnostic on stderr),
//! 2 usage error. Machine output (JSONL, CSV) goes to declared output
//! paths or stdout; notes like the effective seed go to stderr.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use bugforge_core::classifier::{
    align_label_rows, classify_pair, label_corpus, label_rows, read_label_file,
    write_label_file, FrequencyTable, Label,
};
use bugforge_core::code_model::{Language, SourceUnit};
use bugforge_core::experiment::{
    compare_distributions, run_study, run_study_with, write_report, write_run, ComparePolicy,
    RunOutcome, StatsReport, StudyConfig,
};
use bugforge_core::injector::{generate_corpus, inject, Corpus};
use bugforge_core::llm_gateway::{Backend, HttpBackend, HttpConfig};
use bugforge_core::stats::cohen_kappa;
use bugforge_core::taxonomy::{
    builtin_distribution, builtin_taxonomy, load_distribution, BugCode, BugDistribution, Study,
    SubThresholdPolicy,
};
use bugforge_core::DEFAULT_SEED;

/// A bad flag combination detected after clap parsing; maps to exit 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(UsageError(msg.into()))
}

#[derive(Parser)]
#[command(
    name = "bugforge",
    version,
    about = "Synthetic novice-bug generation, classification, and distribution statistics",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect a study's bug catalog.
    #[command(subcommand)]
    Taxonomy(TaxonomyCmd),
    /// Inject one bug into a source file.
    Inject(InjectArgs),
    /// Label a mutated file against its original, or a whole corpus.
    Classify(ClassifyArgs),
    /// Generate a rule-based corpus matching a target distribution.
    Generate(GenerateArgs),
    /// Distribution tests and agreement statistics.
    #[command(subcommand)]
    Stats(StatsCmd),
    /// Run a full study (generate, label, test, report).
    Replicate(ReplicateArgs),
    /// Tabulate and test an existing corpus, writing report files.
    Report(ReportArgs),
}

#[derive(Subcommand)]
enum TaxonomyCmd {
    /// Print code, class, and description for every catalog entry.
    List {
        #[arg(long, value_parser = parse_study, default_value = "study1")]
        study: Study,
    },
}

#[derive(Args)]
struct InjectArgs {
    /// Source file (.java or .c) to mutate.
    #[arg(long)]
    file: PathBuf,
    /// Bug code to inject (e.g. A, C, HighBounds).
    #[arg(long, value_parser = parse_bug)]
    bug: BugCode,
    /// Seed for site selection (default printed with the record).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the injection record JSON here instead of stderr.
    #[arg(long)]
    record: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Original source file (pair mode; requires --mutated).
    #[arg(long)]
    original: Option<PathBuf>,
    /// Mutated source file (pair mode).
    #[arg(long)]
    mutated: Option<PathBuf>,
    /// Corpus JSONL to label (corpus mode; requires --out).
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Label file (item_id,label,combination) written in corpus mode.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = parse_study, default_value = "study1")]
    study: Study,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_study, default_value = "study1")]
    study: Study,
    /// Number of corpus items.
    #[arg(long)]
    n: usize,
    /// Master seed (each item derives its own; printed to stderr).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Target distribution CSV (code,percent); defaults to the built-in
    /// reference column for the study.
    #[arg(long)]
    distribution: Option<PathBuf>,
    /// How `<bound` entries in the distribution are read.
    #[arg(long, value_parser = parse_subthreshold, default_value = "half")]
    policy: SubThresholdPolicy,
    /// Output JSONL path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StatsCmd {
    /// Chi-square goodness of fit of observed counts against an expected
    /// distribution.
    Gof(GofArgs),
    /// Cohen's kappa between two label files.
    Kappa(KappaArgs),
}

#[derive(Args)]
struct GofArgs {
    /// Observed counts CSV (code,count).
    #[arg(long)]
    observed: PathBuf,
    /// Expected distribution CSV (code,percent).
    #[arg(long)]
    expected: PathBuf,
    /// by-class, strict, drop-zero, or ood-bucket[=floor].
    #[arg(long, value_parser = parse_policy, default_value = "drop-zero")]
    binning: ComparePolicy,
    #[arg(long, value_parser = parse_subthreshold, default_value = "half")]
    policy: SubThresholdPolicy,
}

#[derive(Args)]
struct KappaArgs {
    /// First coder's label file (item_id,label,combination).
    #[arg(long)]
    a: PathBuf,
    /// Second coder's label file.
    #[arg(long)]
    b: PathBuf,
}

#[derive(Args)]
struct ReplicateArgs {
    /// study1 (compiler-error taxonomy) or study2 (off-by-one loops).
    #[arg(value_parser = parse_study)]
    study: Study,
    /// `mock` (deterministic, built in) or `http` (chat-completion API).
    #[arg(long, default_value = "mock")]
    backend: String,
    /// Master seed; fully determines mock-mode output.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Trials per (strategy, unit); default 5.
    #[arg(long)]
    trials: Option<usize>,
    /// Requests per (strategy, trial, unit); default 5.
    #[arg(long)]
    bugs_per_example: Option<usize>,
    /// by-class, strict, drop-zero, or ood-bucket[=floor]; default
    /// by-class for study1, drop-zero for study2.
    #[arg(long, value_parser = parse_policy)]
    binning: Option<ComparePolicy>,
    /// Significance level; default 0.05 for study1, 0.01 for study2.
    #[arg(long)]
    alpha: Option<f64>,
    /// Run directory (default: runs/<study>-seed<seed>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Chat-completion endpoint for --backend http.
    #[arg(long)]
    base_url: Option<String>,
    /// Model name for --backend http.
    #[arg(long)]
    model: Option<String>,
    /// Sampling temperature for --backend http.
    #[arg(long)]
    temperature: Option<f64>,
    /// Cap on parallel backend requests.
    #[arg(long)]
    max_inflight: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    /// Corpus JSONL to label and test.
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_parser = parse_study)]
    study: Study,
    /// Directory for frequencies.csv and report.md.
    #[arg(long)]
    out: PathBuf,
    /// by-class, strict, drop-zero, or ood-bucket[=floor]; default
    /// by-class for study1, drop-zero for study2.
    #[arg(long, value_parser = parse_policy)]
    binning: Option<ComparePolicy>,
    /// Significance level; default 0.05 for study1, 0.01 for study2.
    #[arg(long)]
    alpha: Option<f64>,
    /// Expected distribution CSV (code,percent); defaults to the study's
    /// built-in reference column.
    #[arg(long)]
    expected: Option<PathBuf>,
    #[arg(long, value_parser = parse_subthreshold, default_value = "half")]
    policy: SubThresholdPolicy,
}

fn parse_study(s: &str) -> Result<Study, String> {
    match s {
        "study1" => Ok(Study::Study1),
        "study2" => Ok(Study::Study2),
        other => Err(format!("unknown study `{other}` (expected study1 or study2)")),
    }
}

fn parse_bug(s: &str) -> Result<BugCode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_policy(s: &str) -> Result<ComparePolicy, String> {
    s.parse()
}

fn parse_subthreshold(s: &str) -> Result<SubThresholdPolicy, String> {
    match s {
        "half" => Ok(SubThresholdPolicy::Half),
        "zero" => Ok(SubThresholdPolicy::Zero),
        "bound" => Ok(SubThresholdPolicy::Bound),
        other => Err(format!("unknown policy `{other}` (expected half, zero, or bound)")),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = dispatch(cli) {
        eprintln!("error: {err:#}");
        let code = if err.is::<UsageError>() { 2 } else { 1 };
        std::process::exit(code);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Taxonomy(TaxonomyCmd::List { study }) => taxonomy_list(study),
        Command::Inject(args) => run_inject(args),
        Command::Classify(args) => run_classify(args),
        Command::Generate(args) => run_generate(args),
        Command::Stats(StatsCmd::Gof(args)) => run_gof(args),
        Command::Stats(StatsCmd::Kappa(args)) => run_kappa(args),
        Command::Replicate(args) => run_replicate(args),
        Command::Report(args) => run_report(args),
    }
}

fn taxonomy_list(study: Study) -> Result<()> {
    for spec in &builtin_taxonomy(study).specs {
        println!("{:<11} {:<9} {}", spec.code.name(), spec.class, spec.description);
    }
    Ok(())
}

fn load_unit(path: &Path) -> Result<SourceUnit> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let id = path.to_string_lossy().into_owned();
    let language = Language::from_path(&id);
    SourceUnit::parse(id, language, text).map_err(Into::into)
}

fn run_inject(args: InjectArgs) -> Result<()> {
    let unit = load_unit(&args.file)?;
    let mutated = inject(&unit, args.bug, args.seed)?;
    print!("{}", mutated.unit.text);
    let record = serde_json::to_string(&mutated.record)?;
    match args.record {
        Some(path) => fs::write(&path, record + "\n")
            .with_context(|| format!("writing {}", path.display()))?,
        None => eprintln!("{record}"),
    }
    Ok(())
}

fn run_classify(args: ClassifyArgs) -> Result<()> {
    match (&args.original, &args.mutated, &args.corpus) {
        (Some(original), Some(mutated), None) => {
            let verdict = classify_pair(&load_unit(original)?, &load_unit(mutated)?);
            println!("{}", verdict.label());
            Ok(())
        }
        (None, None, Some(corpus)) => {
            let out = args
                .out
                .as_deref()
                .ok_or_else(|| usage("corpus mode needs --out for the label file"))?;
            let text = fs::read_to_string(corpus)
                .with_context(|| format!("reading {}", corpus.display()))?;
            let corpus = Corpus::from_jsonl(&text)?;
            let rows = label_rows(&corpus, args.study);
            write_label_file(out, &rows)?;
            eprintln!("labeled {} items", rows.len());
            Ok(())
        }
        _ => Err(usage(
            "pass either --original and --mutated (pair mode) or --corpus and --out (corpus mode)",
        )),
    }
}

fn load_expected(
    path: Option<&Path>,
    study: Study,
    policy: SubThresholdPolicy,
) -> Result<BugDistribution> {
    match path {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            load_distribution(&text, policy).map_err(Into::into)
        }
        None => Ok(builtin_distribution(study, policy)),
    }
}

fn run_generate(args: GenerateArgs) -> Result<()> {
    let units = bugforge_core::builtins::builtin_units(args.study);
    let dist = load_expected(args.distribution.as_deref(), args.study, args.policy)?;
    let corpus = generate_corpus(&units, &dist, args.n, args.seed)?;
    eprintln!("seed: {}", args.seed);
    let jsonl = corpus.to_jsonl();
    match args.out {
        Some(path) => fs::write(&path, jsonl)
            .with_context(|| format!("writing {}", path.display()))?,
        None => std::io::stdout().write_all(jsonl.as_bytes())?,
    }
    Ok(())
}

fn read_observed(path: &Path) -> Result<BTreeMap<BugCode, u64>> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut counts = BTreeMap::new();
    for (number, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.eq_ignore_ascii_case("code,count") {
            continue;
        }
        let (code, count) = line
            .split_once(',')
            .with_context(|| format!("{}: line {} is not code,count", path.display(), number + 1))?;
        let code: BugCode = code.trim().parse()?;
        let count: u64 = count
            .trim()
            .parse()
            .with_context(|| format!("{}: bad count on line {}", path.display(), number + 1))?;
        *counts.entry(code).or_insert(0) += count;
    }
    Ok(counts)
}

fn run_gof(args: GofArgs) -> Result<()> {
    let observed = read_observed(&args.observed)?;
    let expected = load_expected(Some(&args.expected), Study::Study1, args.policy)?;
    // One-strategy table so every binning policy, including by-class,
    // runs through the same comparison path.
    let study = if expected.support().iter().any(|c| BugCode::OFF_BY_ONE.contains(c)) {
        Study::Study2
    } else {
        Study::Study1
    };
    let mut table = FrequencyTable::new(study);
    let key = "observed".to_string();
    let labels: BTreeMap<Label, u64> =
        observed.iter().map(|(&code, &count)| (Label::single(code), count)).collect();
    let total: u64 = labels.values().sum();
    table.counts.insert(key.clone(), labels);
    table.totals.insert(key, total);
    let report = compare_distributions(&table, &expected, args.binning, 0.05);
    let stats = &report.strategies[0];
    match (&stats.gof, &stats.gof_error) {
        (Some(gof), _) => {
            for warning in &gof.warnings {
                eprintln!("warning: {warning}");
            }
            println!("chi2={} df={} p={}", gof.chi2, gof.df, gof.p);
            Ok(())
        }
        (None, Some(error)) => bail!("{error}"),
        (None, None) => unreachable!("a run test has a result or an error"),
    }
}

fn run_kappa(args: KappaArgs) -> Result<()> {
    let a = read_label_file(&args.a)?;
    let b = read_label_file(&args.b)?;
    let (left, right) = align_label_rows(&a, &b);
    let result = cohen_kappa(&left, &right)?;
    println!(
        "kappa={} po={} pe={} n={}",
        result.kappa,
        result.observed_agreement,
        result.expected_agreement,
        left.len()
    );
    Ok(())
}

fn print_summary(report: &StatsReport) {
    println!(
        "binning: {} | alpha {} | Bonferroni m {}",
        report.binning, report.alpha, report.bonferroni_m
    );
    for stats in &report.strategies {
        match (&stats.gof, &stats.gof_error) {
            (Some(gof), _) => {
                let verdict = match stats.significant {
                    Some(true) => "significant",
                    _ => "not significant",
                };
                println!(
                    "{}: n {} | chi2 {:.3} df {} p {:.3e} adjusted {:.3e} -> {} | refusals {:.1}% ood {:.1}%",
                    stats.strategy,
                    stats.n,
                    gof.chi2,
                    gof.df,
                    gof.p,
                    stats.adjusted_p.unwrap_or(f64::NAN),
                    verdict,
                    stats.refusal_rate,
                    stats.ood_rate,
                );
            }
            (None, Some(error)) => println!("{}: no test ({error})", stats.strategy),
            (None, None) => {}
        }
    }
}

/// Runs `f` inside a bounded rayon pool when a cap is given.
fn with_inflight_cap<T>(cap: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T>
where
    T: Send,
{
    match cap {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

fn run_replicate(args: ReplicateArgs) -> Result<()> {
    let mut config = StudyConfig::defaults(args.study);
    config.master_seed = args.seed;
    if let Some(trials) = args.trials {
        config.trials = trials;
    }
    if let Some(bugs) = args.bugs_per_example {
        config.bugs_per_example = bugs;
    }
    if let Some(binning) = args.binning {
        config.binning = binning;
    }
    if let Some(alpha) = args.alpha {
        config.alpha = alpha;
    }
    let outcome: RunOutcome = match args.backend.as_str() {
        "mock" => with_inflight_cap(args.max_inflight, || run_study(&config))??,
        "http" => {
            let mut http = HttpConfig::default();
            if let Some(base_url) = args.base_url {
                http.base_url = base_url;
            }
            if let Some(model) = args.model {
                http.model = model;
            }
            if let Some(temperature) = args.temperature {
                http.temperature = temperature;
            }
            let backend = HttpBackend::new(http)?;
            config.backend = backend.id().to_string();
            with_inflight_cap(args.max_inflight, || run_study_with(&config, &backend))??
        }
        other => bail!("unknown backend `{other}` (expected mock or http)"),
    };
    let dir = args
        .out
        .unwrap_or_else(|| PathBuf::from(format!("runs/{}-seed{}", args.study, args.seed)));
    write_run(&dir, &config, &outcome)?;
    println!("study: {}", args.study);
    println!("backend: {}", config.backend);
    println!("seed: {}", config.master_seed);
    println!("items: {} (failures: {})", outcome.corpus.len(), outcome.failures.len());
    print_summary(&outcome.report);
    println!("wrote: {}", dir.display());
    Ok(())
}

fn run_report(args: ReportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.corpus)
        .with_context(|| format!("reading {}", args.corpus.display()))?;
    let corpus = Corpus::from_jsonl(&text)?;
    let table = label_corpus(&corpus, args.study);
    let expected = load_expected(args.expected.as_deref(), args.study, args.policy)?;
    let binning = args.binning.unwrap_or(match args.study {
        Study::Study1 => ComparePolicy::ByClass,
        Study::Study2 => ComparePolicy::PerCode(bugforge_core::stats::Binning::DropZero),
    });
    let alpha = args.alpha.unwrap_or(match args.study {
        Study::Study1 => 0.05,
        Study::Study2 => 0.01,
    });
    let report = compare_distributions(&table, &expected, binning, alpha);
    write_report(&table, &report, &args.out)?;
    println!("items: {}", corpus.len());
    print_summary(&report);
    println!("wrote: {}", args.out.display());
    Ok(())
}
