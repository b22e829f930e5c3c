use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pasakit::classifier::TrainParams;
use pasakit::corpus::{
    corpus_stats, load_corpus, load_corpus_with, write_corpus, CaseFrameTable, CaseFrames, Corpus,
    LoadOptions, Role,
};
use pasakit::depnoise;
use pasakit::evaluation::{compare, score, EvalReport};
use pasakit::features::FeatureConfig;
use pasakit::pipeline::{
    predict_corpus, read_heads, read_predictions, train_all, write_heads, write_predictions,
    CellReport, DepMode, DepSource, ModelSet, PredictOptions, ProvidedHeads, TrainConfig,
};
use pasakit::synthgen::{generate, SynthSpec};
use pasakit::Scalar;

#[derive(Parser)]
#[command(name = "pasakit", version, about = "Pointwise predicate-argument structure analysis")]
struct Cli {
    /// Worker threads (default: available cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one classifier per role and scope.
    Train(TrainArgs),
    /// Predict arguments for every annotated predicate.
    Predict(PredictArgs),
    /// Score predictions against gold annotations.
    Eval(EvalArgs),
    /// Replace a proportion of dependency edges at random.
    Perturb(PerturbArgs),
    /// Generate a synthetic corpus.
    Synth(SynthArgs),
    /// Print corpus statistics.
    Stats(StatsArgs),
    /// F differences between two TAB reports.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "pwfeat+lang")]
    features: String,
    /// none, oracle, or provided:FILE
    #[arg(long)]
    dep: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1.0)]
    positive_weight: f64,
    /// Keep probability for negative pairs.
    #[arg(long)]
    neg_subsample: Option<f64>,
    /// Keep probability for inter-sentence negative pairs.
    #[arg(long)]
    neg_subsample_inter: Option<f64>,
    #[arg(long, default_value_t = 1)]
    min_count: usize,
    #[arg(long, default_value = "ga,wo,ni")]
    roles: String,
    /// Comma-separated candidate POS allow-list.
    #[arg(long)]
    candidate_pos: Option<String>,
    /// gold, none, or a case-frame table file
    #[arg(long, default_value = "gold")]
    case_frames: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
    /// Exit with status 3 if any cell is degenerate.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    models: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    #[arg(long)]
    dep: Option<String>,
    #[arg(long)]
    intra_only: bool,
    #[arg(long, default_value = "gold")]
    case_frames: String,
    #[arg(long, value_enum, default_value = "f64")]
    precision: Precision,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Text report; the TAB report goes to `--tsv` or `<out>.tsv`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    tsv: Option<PathBuf>,
}

#[derive(Args)]
struct PerturbArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Replace exactly floor(rate * edges) edges.
    #[arg(long)]
    exact_count: bool,
    /// Write a heads sidecar file instead of a corpus.
    #[arg(long)]
    sidecar: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    corpus: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
    Degenerate(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Degenerate(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Degenerate(m) => m,
        }
    }
}

fn data<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Data(e.to_string())
}

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn read_corpus(path: &Path, allow_cycles: bool) -> Result<Corpus, Failure> {
    let options = LoadOptions {
        allow_cyclic_heads: allow_cycles,
    };
    load_corpus_with(open(path)?, options).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn dep_source(arg: Option<&str>) -> Result<Option<DepSource>, Failure> {
    match arg {
        None => Ok(None),
        Some("none") => Ok(Some(DepSource::None)),
        Some("oracle") => Ok(Some(DepSource::Oracle)),
        Some(s) => match s.strip_prefix("provided:") {
            Some(file) if !file.is_empty() => {
                let heads = read_heads(open(Path::new(file))?).map_err(data)?;
                Ok(Some(DepSource::Provided(heads)))
            }
            _ => Err(Failure::Usage(format!("--dep must be none, oracle or provided:FILE, got `{s}`"))),
        },
    }
}

/// Checks that a dependency source is given exactly when `dep` features are on.
fn consistent_deps(use_dep: bool, source: Option<DepSource>, fallback: DepSource) -> Result<DepSource, Failure> {
    match (use_dep, source) {
        (false, None | Some(DepSource::None)) => Ok(DepSource::None),
        (false, Some(_)) => Err(Failure::Usage(
            "dep source given but dep features disabled".into(),
        )),
        (true, Some(DepSource::None)) => Err(Failure::Usage(
            "dep features enabled but dep source is none".into(),
        )),
        (true, Some(s)) => Ok(s),
        (true, None) => Ok(fallback),
    }
}

fn case_frames(arg: &str) -> Result<CaseFrames, Failure> {
    match arg {
        "gold" => Ok(CaseFrames::Gold),
        "none" => Ok(CaseFrames::Disabled),
        file => Ok(CaseFrames::Table(CaseFrameTable::read(open(Path::new(file))?).map_err(data)?)),
    }
}

fn train_typed<F: Scalar>(corpus: &Corpus, config: &TrainConfig, deps: &DepSource, out: &Path) -> Result<Vec<CellReport>, Failure> {
    let (set, reports) = train_all::<F>(corpus, config, deps).map_err(data)?;
    set.save(out).map_err(data)?;
    Ok(reports)
}

fn train(args: TrainArgs) -> Result<(), Failure> {
    let mut features = FeatureConfig::with_groups(&args.features).map_err(|e| Failure::Usage(e.to_string()))?;
    let deps = consistent_deps(features.use_dep, dep_source(args.dep.as_deref())?, DepSource::Oracle)?;
    if let CaseFrames::Disabled = case_frames(&args.case_frames)? {
        features.use_case_frame = false;
    }
    let config = TrainConfig {
        features,
        roles: args.roles.split(',').map(Role::new).collect(),
        params: TrainParams {
            c: args.c,
            tol: args.tol,
            max_iter: args.max_iter,
            positive_weight: args.positive_weight,
            seed: args.seed,
        },
        neg_subsample: args.neg_subsample,
        neg_subsample_inter: args.neg_subsample_inter,
        seed: args.seed,
        min_count: args.min_count,
        candidate_pos: args.candidate_pos.map(|s| s.split(',').map(str::to_string).collect()),
        case_frames: case_frames(&args.case_frames)?,
    };
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let corpus = read_corpus(&args.corpus, false)?;
    let reports = match args.precision {
        Precision::F32 => train_typed::<f32>(&corpus, &config, &deps, &args.out)?,
        Precision::F64 => train_typed::<f64>(&corpus, &config, &deps, &args.out)?,
    };
    let mut degenerate = Vec::new();
    for r in &reports {
        let warnings: Vec<String> = r.warnings.iter().map(|w| w.to_string()).collect();
        eprintln!(
            "{}.{}: {} examples ({} positive), {} features, {} iterations{}",
            r.role,
            r.scope,
            r.examples,
            r.positives,
            r.features,
            r.iterations,
            if warnings.is_empty() { String::new() } else { format!("; {}", warnings.join("; ")) }
        );
        if r.is_degenerate() {
            degenerate.push(format!("{}.{}", r.role, r.scope));
        }
    }
    if args.strict && !degenerate.is_empty() {
        return Err(Failure::Degenerate(format!("degenerate training cells: {}", degenerate.join(", "))));
    }
    Ok(())
}

fn predict_typed<F: Scalar>(args: &PredictArgs, corpus: &Corpus) -> Result<Vec<pasakit::Prediction>, Failure> {
    let set = ModelSet::<F>::load(&args.models).map_err(data)?;
    let source = dep_source(args.dep.as_deref())?;
    if set.features.use_dep && source.is_none() && set.dep_mode == DepMode::Provided {
        return Err(Failure::Usage(
            "models were trained with provided heads; pass --dep oracle or --dep provided:FILE".into(),
        ));
    }
    let deps = consistent_deps(set.features.use_dep, source, DepSource::Oracle)?;
    let options = PredictOptions {
        threshold: args.threshold,
        intra_only: args.intra_only,
        case_frames: case_frames(&args.case_frames)?,
    };
    predict_corpus(&set, corpus, &deps, &options).map_err(data)
}

fn predict(args: PredictArgs) -> Result<(), Failure> {
    if !(0.0..1.0).contains(&args.threshold) {
        return Err(Failure::Usage("--threshold must be in [0, 1)".into()));
    }
    let corpus = read_corpus(&args.corpus, true)?;
    let preds = match args.precision {
        Precision::F32 => predict_typed::<f32>(&args, &corpus)?,
        Precision::F64 => predict_typed::<f64>(&args, &corpus)?,
    };
    let mut w = create(&args.out)?;
    write_predictions(&preds, &mut w).map_err(data)?;
    w.flush().map_err(data)
}

fn eval(args: EvalArgs) -> Result<(), Failure> {
    let gold = read_corpus(&args.gold, true)?;
    let preds = read_predictions(open(&args.pred)?).map_err(data)?;
    let report = score(&preds, &gold).map_err(data)?;
    let text = report.to_string();
    std::fs::write(&args.out, &text).map_err(data)?;
    let tsv = args.tsv.unwrap_or_else(|| {
        let mut p = args.out.clone().into_os_string();
        p.push(".tsv");
        p.into()
    });
    let mut w = create(&tsv)?;
    report.write_tsv(&mut w).map_err(data)?;
    w.flush().map_err(data)?;
    print!("{text}");
    Ok(())
}

fn perturb(args: PerturbArgs) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&args.rate) {
        return Err(Failure::Usage("--rate must be in [0, 1]".into()));
    }
    let corpus = read_corpus(&args.corpus, true)?;
    let result = if args.exact_count {
        depnoise::perturb_exact(&corpus, args.rate, args.seed)
    } else {
        depnoise::perturb(&corpus, args.rate, args.seed)
    }
    .map_err(data)?;
    let mut w = create(&args.out)?;
    if args.sidecar {
        write_heads(&ProvidedHeads::from_corpus(&result.corpus), &mut w).map_err(data)?;
    } else {
        write_corpus(&result.corpus, &mut w).map_err(data)?;
    }
    w.flush().map_err(data)?;
    eprintln!("changed {} of {} eligible edges", result.changed, result.eligible);
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), Failure> {
    let spec = SynthSpec::read(open(&args.spec)?).map_err(data)?;
    let s = generate(&spec).map_err(data)?;
    let mut w = create(&args.out)?;
    write_corpus(&s.corpus, &mut w).map_err(data)?;
    w.flush().map_err(data)?;
    let total: usize = s.tally.values().sum();
    eprintln!("{} documents, {total} gold instances", s.corpus.documents.len());
    Ok(())
}

fn stats(args: StatsArgs) -> Result<(), Failure> {
    let corpus = load_corpus(open(&args.corpus)?).map_err(data)?;
    print!("{}", corpus_stats(&corpus));
    Ok(())
}

fn compare_reports(args: CompareArgs) -> Result<(), Failure> {
    let a = EvalReport::read_tsv(open(&args.a)?).map_err(data)?;
    let b = EvalReport::read_tsv(open(&args.b)?).map_err(data)?;
    print!("{}", compare(&a, &b).map_err(data)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Eval(a) => eval(a),
        Command::Perturb(a) => perturb(a),
        Command::Synth(a) => synth(a),
        Command::Stats(a) => stats(a),
        Command::Compare(a) => compare_reports(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
