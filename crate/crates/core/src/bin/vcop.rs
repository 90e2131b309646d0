use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use vcop::dynamics::{DynamicsConfig, LaunchRule, LaunchThresholds, SnapshotConfig};
use vcop::fixtures;
use vcop::ingest::{parse_archive, ArchiveFormat, ParsedArchive};
use vcop::language::Lexicon;
use vcop::mlm::{fit_lmm, seasonal_column, seasonal_covariates, Criterion, ModelFit, ModelSpec};
use vcop::panel::{read_panel_csv, write_panel_csv, CorrelationReport, PanelRow, TABLE_VARIABLES};
use vcop::pipeline::{build_panel, compute_metrics, dump_graphs, read_metrics, with_jobs, write_atomic, write_metrics};
use vcop::report::{render_report, RegressionTable, RunMetadata};
use vcop::synth::{generate_archive, reference_scale_spec, SynthSpec};

#[derive(Parser)]
#[command(name = "vcop", version, about = "Community network, language and growth-model pipeline")]
struct Cli {
    /// Worker threads (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate an archive and print counts and diagnostics.
    Ingest(InputArgs),
    /// Per-window dynamics, language and network metric CSVs.
    Metrics(MetricsArgs),
    /// Join metric CSVs into panel.csv with the maturity factor.
    Panel(PanelArgs),
    /// Fit random-intercept growth models.
    Fit(FitArgs),
    /// Correlation table, regression table and run metadata.
    Report(ReportArgs),
    /// Generate a synthetic archive.
    Synth(SynthArgs),
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    /// jsonl or csv; inferred from the extension when omitted.
    #[arg(long)]
    format: Option<String>,
}

#[derive(Args)]
struct MetricsArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    snapshot_days: u32,
    #[arg(long, default_value_t = 7)]
    trail_days: u32,
    #[arg(long, default_value_t = 3)]
    launch_age: u32,
    #[arg(long, default_value_t = 50)]
    launch_size: usize,
    #[arg(long, default_value = "or")]
    launch_rule: LaunchRule,
    #[arg(long, requires = "lexicon_neg")]
    lexicon_pos: Option<PathBuf>,
    #[arg(long, requires = "lexicon_pos")]
    lexicon_neg: Option<PathBuf>,
    /// Also write one edge-list CSV per community-month.
    #[arg(long)]
    dump_graphs: Option<PathBuf>,
}

#[derive(Args)]
struct PanelArgs {
    /// Directory holding the metric CSVs.
    #[arg(long)]
    metrics: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long)]
    panel: PathBuf,
    /// Comma-separated standard model names or NAME=cov1+cov2.
    #[arg(long, default_value = "null,maturity,language,interaction,full")]
    models: String,
    /// Calendar months (1-12) added as dummies to every model with covariates.
    #[arg(long, value_delimiter = ',')]
    seasonal: Vec<u32>,
    #[arg(long, default_value = "ml")]
    criterion: Criterion,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, required_unless_present = "published_fixture")]
    panel: Option<PathBuf>,
    #[arg(long, default_value = "null,maturity,language,interaction,full")]
    models: String,
    #[arg(long, value_delimiter = ',')]
    seasonal: Vec<u32>,
    #[arg(long, default_value = "ml")]
    criterion: Criterion,
    /// Render the built-in published values instead of a panel.
    #[arg(long, conflicts_with = "panel")]
    published_fixture: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, required_unless_present = "reference_scale")]
    spec: Option<PathBuf>,
    /// 16 communities, 754 community-months.
    #[arg(long, conflicts_with = "spec")]
    reference_scale: bool,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    match with_jobs(jobs, || run(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Ingest(a) => ingest(a),
        Command::Metrics(a) => metrics(a),
        Command::Panel(a) => panel(a),
        Command::Fit(a) => fit(a),
        Command::Report(a) => report(a),
        Command::Synth(a) => synth(a),
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn load(args: &InputArgs) -> Result<(ParsedArchive, Vec<u8>)> {
    let format = match &args.format {
        Some(f) => f.parse::<ArchiveFormat>()?,
        None => args
            .input
            .extension()
            .and_then(|e| e.to_str())
            .ok_or_else(|| anyhow!("cannot infer format of {}; pass --format", args.input.display()))?
            .parse::<ArchiveFormat>()?,
    };
    let bytes = read(&args.input)?;
    let parsed = parse_archive(bytes.as_slice(), format)
        .with_context(|| format!("ingesting {}", args.input.display()))?;
    Ok((parsed, bytes))
}

fn ingest(args: InputArgs) -> Result<()> {
    let (parsed, _) = load(&args)?;
    let a = &parsed.archive;
    let (first, last) = a.span();
    println!("records read: {}", parsed.records_read);
    println!("posts kept: {}", a.len());
    println!("communities: {}", a.communities().len());
    println!("span: {} .. {}", first.to_rfc3339(), last.to_rfc3339());
    println!("diagnostics: {}", parsed.diagnostics.len());
    for d in &parsed.diagnostics {
        println!("  {d}");
    }
    Ok(())
}

fn metrics(args: MetricsArgs) -> Result<()> {
    let (parsed, _) = load(&args.input)?;
    for d in &parsed.diagnostics {
        eprintln!("warning: {d}");
    }
    let config = DynamicsConfig {
        snapshots: SnapshotConfig::new(args.snapshot_days, args.trail_days)?,
        launch: LaunchThresholds {
            max_age: args.launch_age,
            min_size: args.launch_size,
            rule: args.launch_rule,
        },
    };
    let lexicon = match (&args.lexicon_pos, &args.lexicon_neg) {
        (Some(p), Some(n)) => Lexicon::from_files(p, n)?,
        _ => Lexicon::builtin(),
    };
    let m = compute_metrics(&parsed.archive, &config, &lexicon)?;
    for path in write_metrics(&m, &args.out)? {
        println!("wrote {}", path.display());
    }
    if let Some(dir) = &args.dump_graphs {
        let n = dump_graphs(&parsed.archive, dir)?;
        println!("wrote {n} graph files to {}", dir.display());
    }
    Ok(())
}

fn panel(args: PanelArgs) -> Result<()> {
    let m = read_metrics(&args.metrics)?;
    let build = build_panel(&m)?;
    match &build.maturity {
        Ok(f) => println!(
            "maturity loadings (age, size, launch_phase): {:.3}, {:.3}, {:.3}; variance explained {:.1}%",
            f.loadings[0],
            f.loadings[1],
            f.loadings[2],
            100.0 * f.variance_explained
        ),
        Err(e) => eprintln!("warning: maturity factor not computed: {e}"),
    }
    let mut buf = Vec::new();
    write_panel_csv(&build.rows, &mut buf)?;
    let path = args.out.join("panel.csv");
    write_atomic(&path, &buf)?;
    println!("wrote {} ({} rows)", path.display(), build.rows.len());
    Ok(())
}

fn parse_models(list: &str, seasonal: &[u32]) -> Result<Vec<ModelSpec>> {
    if let Some(m) = seasonal.iter().find(|m| !(1..=12).contains(*m)) {
        bail!("--seasonal: month {m} outside 1-12");
    }
    let extra: Vec<String> = seasonal.iter().map(|&m| seasonal_column(m).to_string()).collect();
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            let spec = ModelSpec::parse(s).map_err(|e| anyhow!("--models: {e}"))?;
            Ok(if spec.covariates.is_empty() {
                spec
            } else {
                spec.with_covariates(&extra)
            })
        })
        .collect()
}

fn fit_models(args: &ModelArgs, rows: &[PanelRow]) -> Result<Vec<ModelFit>> {
    let specs = parse_models(&args.models, &args.seasonal)?;
    let rows = seasonal_covariates(rows, &args.seasonal);
    specs
        .iter()
        .map(|s| fit_lmm(&rows, s, args.criterion).with_context(|| format!("fitting model `{}`", s.name)))
        .collect()
}

fn load_panel(path: &Path) -> Result<(Vec<PanelRow>, Vec<u8>)> {
    let bytes = read(path)?;
    let rows = read_panel_csv(bytes.as_slice()).with_context(|| format!("reading {}", path.display()))?;
    Ok((rows, bytes))
}

fn fit(args: FitArgs) -> Result<()> {
    let (rows, _) = load_panel(&args.model.panel)?;
    let fits = fit_models(&args.model, &rows)?;
    for f in &fits {
        let path = args.out.join(format!("fit_{}.json", f.model));
        let mut json = serde_json::to_vec_pretty(f)?;
        json.push(b'\n');
        write_atomic(&path, &json)?;
        println!("wrote {}", path.display());
    }
    let table = RegressionTable::from_fits(&fits).render();
    let path = args.out.join("fits.txt");
    write_atomic(&path, table.as_bytes())?;
    print!("{table}");
    Ok(())
}

fn report(args: ReportArgs) -> Result<()> {
    let mut meta = RunMetadata::new("report")
        .flag("criterion", format!("{:?}", args.criterion).to_uppercase())
        .flag("models", &args.models)
        .flag(
            "seasonal",
            args.seasonal.iter().map(u32::to_string).collect::<Vec<_>>().join(","),
        );
    let text = if args.published_fixture {
        meta = meta.flag("published_fixture", true);
        render_report(&fixtures::correlations(), Some(&fixtures::regression()), &meta)
    } else {
        let path = args.panel.as_deref().expect("clap enforces --panel");
        let (rows, bytes) = load_panel(path)?;
        meta = meta.input(&path.display().to_string(), &bytes);
        let correlations = CorrelationReport::compute(&rows, &TABLE_VARIABLES)?;
        let model_args = ModelArgs {
            panel: path.to_path_buf(),
            models: args.models.clone(),
            seasonal: args.seasonal.clone(),
            criterion: args.criterion,
        };
        let fits = fit_models(&model_args, &rows)?;
        render_report(&correlations, Some(&RegressionTable::from_fits(&fits)), &meta)
    };
    if let Some(dir) = &args.out {
        write_atomic(&dir.join("report.txt"), text.as_bytes())?;
    }
    print!("{text}");
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let spec: SynthSpec = match &args.spec {
        Some(path) => serde_json::from_slice(&read(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => reference_scale_spec(args.seed),
    };
    let archive = generate_archive(&spec)?;
    let mut buf = Vec::new();
    archive.write_jsonl(&mut buf)?;
    write_atomic(&args.out, &buf)?;
    println!(
        "wrote {} ({} posts, {} communities)",
        args.out.display(),
        archive.len(),
        archive.communities().len()
    );
    Ok(())
}
