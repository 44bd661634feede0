//! The `renewcast` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use renewcast_core::ingest::{project_determinants, DeterminantPanel, Overrides, SplitPlan};
use renewcast_core::scenario::{fit_forecast, run_baseline, FitPlan, ForecastModel, TrainSettings};
use renewcast_core::scoring::{
    builtin_scorecard, compute_factor, published_factor, validate_scorecard, FactorKind, PolicyScorecard, Region,
    ScoringError,
};
use renewcast_core::{TargetKind, YearMonth};

use crate::api::{serve, SessionCatalog};
use crate::document::{evaluate, load_document, materialize, ReportDocument, ScenarioDocument};
use crate::error::{Error, Result};
use crate::io;
use crate::model_file::{load_model, model_id, save_model};
use crate::report::{emit, gap_text, Format};

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Parser)]
#[command(
    name = "renewcast",
    version,
    about = "Renewable-energy transition forecasting and policy scenarios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a determinant panel and check it against its schema.
    Validate(ValidateArgs),
    /// Train a baseline forecast model and save it.
    Train(TrainArgs),
    /// Forecast annual baseline values from a model and projected determinants.
    Predict(PredictArgs),
    /// Compute a policy intensity factor from a scorecard.
    Score(ScoreArgs),
    /// Compose baseline, policy and optimal scenarios from a spec file.
    Scenario(ScenarioArgs),
    /// Solve for the intensity that meets a target at the horizon.
    Gap(GapArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct PanelArgs {
    /// Monthly determinant panel (CSV with a leading `month` column).
    #[arg(long)]
    pub panel: PathBuf,
    /// Determinant schema (JSON).
    #[arg(long)]
    pub schema: PathBuf,
    /// Region name; defaults to the panel file stem.
    #[arg(long)]
    pub region: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub panel: PanelArgs,
}

fn parse_target(s: &str) -> std::result::Result<TargetKind, String> {
    TargetKind::from_code(&s.to_ascii_uppercase()).ok_or_else(|| format!("unknown target {s:?} (RNWXYEAR or RNCAP)"))
}

fn parse_month(s: &str) -> std::result::Result<YearMonth, String> {
    s.parse().map_err(|_| format!("expected YYYY-MM, got {s:?}"))
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub panel: PanelArgs,
    /// Target column(s) to learn; repeat for a joint model.
    #[arg(long = "target", required = true, value_parser = parse_target)]
    pub targets: Vec<TargetKind>,
    /// Random split: fraction of labeled rows used for training.
    #[arg(long, default_value_t = 0.95, conflicts_with = "holdout_years")]
    pub train_fraction: f64,
    /// Chronological split: hold out the last N calendar years instead.
    #[arg(long)]
    pub holdout_years: Option<u32>,
    /// Seed for weight initialization, shuffling and the random split.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Training epochs.
    #[arg(long, default_value_t = renewcast_core::ann::DEFAULT_EPOCHS)]
    pub epochs: usize,
    /// Mini-batch size.
    #[arg(long, default_value_t = renewcast_core::ann::DEFAULT_BATCH_SIZE)]
    pub batch_size: usize,
    /// RMSprop learning rate.
    #[arg(long, default_value_t = renewcast_core::ann::DEFAULT_LEARNING_RATE)]
    pub learning_rate: f64,
    /// Hidden layer widths, comma separated; default halves from the input size.
    #[arg(long, value_delimiter = ',')]
    pub hidden: Option<Vec<usize>>,
    /// Minimum absolute correlation for a determinant to be kept.
    #[arg(long, default_value_t = renewcast_core::ingest::DEFAULT_SCREEN_THRESHOLD)]
    pub screen_threshold: f64,
    /// Keep every determinant.
    #[arg(long)]
    pub no_screen: bool,
    /// Stop after this many epochs without holdout improvement.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Train on standardized labels.
    #[arg(long)]
    pub standardize_labels: bool,
    /// Where to write the model file.
    #[arg(long)]
    pub model_out: PathBuf,
    /// Optional JSON dump of the training trace.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Trained model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Historical panel the determinants are projected from.
    #[arg(long)]
    pub panel: PathBuf,
    /// Last month to project (YYYY-MM).
    #[arg(long, value_parser = parse_month)]
    pub horizon: YearMonth,
    /// Official future series for `official_series` determinants (CSV).
    #[arg(long)]
    pub overrides: Option<PathBuf>,
    /// Target to report; defaults to the model's first output.
    #[arg(long, value_parser = parse_target)]
    pub target: Option<TargetKind>,
    /// Also write the projected determinants as a panel CSV.
    #[arg(long)]
    pub future_out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = SeriesFormat::Table)]
    pub format: SeriesFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SeriesFormat {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Scorecard file (JSON).
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    pub card: Option<PathBuf>,
    /// Built-in card: REGION KIND, e.g. `singapore ceiling`.
    #[arg(long, num_args = 2, value_names = ["REGION", "KIND"])]
    pub builtin: Option<Vec<String>>,
    /// Print per-index contributions and the validation result.
    #[arg(long)]
    pub report: bool,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Directory of model files referenced by id.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Also analyze the gap to this target value at the horizon.
    #[arg(long)]
    pub gap: Option<f64>,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    /// Scenario spec (JSON).
    #[arg(long)]
    pub spec: PathBuf,
    /// Directory of model files referenced by id.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Target value at the horizon in the target's units.
    #[arg(long)]
    pub target: f64,
    /// Output format.
    #[arg(long, value_enum, default_value_t = GapFormat::Table)]
    pub format: GapFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GapFormat {
    Table,
    Json,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Directory of model files; ids are file stems.
    #[arg(long)]
    pub models: Option<PathBuf>,
    /// Directory of scenario specs offered by id.
    #[arg(long)]
    pub specs: Option<PathBuf>,
    /// Address to listen on.
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Static files (the explorer bundle) served under `/`.
    #[arg(long = "static")]
    pub static_dir: Option<PathBuf>,
}

/// Parses the process arguments and runs; exit status 0 on success, 1 on a
/// validation or domain error, 2 on a usage error.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    match run(cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::from(1)
        }
    }
}

fn report_error(e: &Error) {
    match e {
        Error::Scoring(ScoringError::Invalid(violations)) => {
            eprintln!("error: invalid scorecard");
            for v in violations {
                eprintln!("  - {v}");
            }
        }
        other => eprintln!("error: {other}"),
    }
}

fn out_err(e: std::io::Error) -> Error {
    Error::io(Path::new("<stdout>"), e)
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Validate(a) => cmd_validate(&a, out),
        Command::Train(a) => cmd_train(&a, out),
        Command::Predict(a) => cmd_predict(&a, out),
        Command::Score(a) => cmd_score(&a, out),
        Command::Scenario(a) => cmd_scenario(&a, out),
        Command::Gap(a) => cmd_gap(&a, out),
        Command::Serve(a) => cmd_serve(a),
    }
}

fn load(panel: &PanelArgs) -> Result<(DeterminantPanel, renewcast_core::ingest::PanelSchema)> {
    let schema = io::load_schema(&panel.schema)?;
    let data = io::load_panel(&panel.panel, &schema, panel.region.as_deref())?;
    Ok((data, schema))
}

pub fn cmd_validate(a: &ValidateArgs, out: &mut dyn Write) -> Result<()> {
    let (panel, schema) = load(&a.panel)?;
    let months = panel.months();
    let targets: Vec<String> = panel
        .targets()
        .iter()
        .map(|(t, v)| format!("{t} ({} annual values)", v.len()))
        .collect();
    writeln!(
        out,
        "ok: {} {}..{} ({} months), {} determinants in {} columns",
        panel.region(),
        months[0],
        months[months.len() - 1],
        months.len(),
        schema.determinants.len(),
        panel.columns().len()
    )
    .map_err(out_err)?;
    let targets = if targets.is_empty() {
        "none".to_string()
    } else {
        targets.join(", ")
    };
    writeln!(out, "targets: {targets}").map_err(out_err)
}

fn pct(v: Option<f64>) -> String {
    v.map_or_else(|| "undefined".to_string(), |v| format!("{v:.3}%"))
}

pub fn cmd_train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    eprintln!("seed: {}", a.seed);
    let (panel, schema) = load(&a.panel)?;
    let plan = FitPlan {
        targets: a.targets.clone(),
        split: match a.holdout_years {
            Some(years) => SplitPlan::LastYears { years },
            None => SplitPlan::RandomFraction {
                fraction: a.train_fraction,
                seed: a.seed,
            },
        },
        screen_threshold: (!a.no_screen).then_some(a.screen_threshold),
        settings: TrainSettings {
            hidden_sizes: a.hidden.clone(),
            learning_rate: a.learning_rate,
            epochs: a.epochs,
            batch_size: a.batch_size,
            seed: a.seed,
            standardize_labels: a.standardize_labels,
            early_stopping_patience: a.patience,
            ..TrainSettings::default()
        },
    };
    let fit = fit_forecast(&panel, &schema, &plan)?;
    save_model(&fit.model, &a.model_out)?;
    if let Some(path) = &a.trace_out {
        let mut text = serde_json::to_string_pretty(&fit.trace).expect("trace serializes");
        text.push('\n');
        io::write_file(path, &text)?;
    }
    let w = |out: &mut dyn Write, s: String| writeln!(out, "{s}").map_err(out_err);
    let cfg = &fit.model.network.config;
    w(out, format!("model: {}", a.model_out.display()))?;
    w(
        out,
        format!(
            "targets: {}",
            a.targets.iter().map(|t| t.code()).collect::<Vec<_>>().join(", ")
        ),
    )?;
    w(out, format!("features: {}", fit.model.feature_ids.join(", ")))?;
    for (target, screen) in &fit.screens {
        for d in screen.dropped() {
            let r = d
                .correlation
                .map_or_else(|| "undefined".to_string(), |r| format!("{r:.4}"));
            w(out, format!("dropped for {target}: {} (r = {r})", d.determinant))?;
        }
    }
    w(
        out,
        format!(
            "network: {}",
            cfg.widths().iter().map(|n| n.to_string()).collect::<Vec<_>>().join("-")
        ),
    )?;
    w(
        out,
        format!(
            "rows: train {}, holdout {}",
            fit.train_months.len(),
            fit.holdout_months.len()
        ),
    )?;
    w(
        out,
        format!(
            "epochs run: {}{}",
            fit.trace.epoch_losses.len(),
            if fit.trace.stopped_early {
                " (stopped early)"
            } else {
                ""
            }
        ),
    )?;
    if let Some(loss) = fit.trace.epoch_losses.last() {
        w(out, format!("final loss: {loss:.6e}"))?;
    }
    w(out, format!("train MAPE: {}", pct(fit.trace.train_mape)))?;
    w(out, format!("holdout MAPE: {}", pct(fit.trace.holdout_mape)))
}

pub fn cmd_predict(a: &PredictArgs, out: &mut dyn Write) -> Result<()> {
    let model = load_model(&a.model)?;
    let history = io::load_panel(&a.panel, &model.schema, Some(&model.region))?;
    let overrides = match &a.overrides {
        Some(p) => io::load_overrides(p)?,
        None => Overrides::new(),
    };
    let future = project_determinants(&history, &model.schema, a.horizon, &overrides)
        .map_err(|e| Error::ingest(io::origin(&a.panel), e))?;
    if let Some(path) = &a.future_out {
        let mut buf = Vec::new();
        io::write_panel(&future, &model.schema, &mut buf)?;
        io::write_file(path, &String::from_utf8(buf).expect("utf-8 csv"))?;
    }
    let target = a.target.unwrap_or(model.targets[0]);
    let series = run_baseline(&model, &future, target)?;
    match a.format {
        SeriesFormat::Csv => io::write_series(&series, out),
        SeriesFormat::Json => {
            let text = serde_json::to_string_pretty(&serde_json::json!({
                "schema_version": crate::document::SCHEMA_VERSION,
                "region": model.region,
                "target": target,
                "series": series,
            }))
            .expect("series serializes");
            writeln!(out, "{text}").map_err(out_err)
        }
        SeriesFormat::Table => {
            writeln!(out, "{} baseline {} ({})", model.region, target, target.unit()).map_err(out_err)?;
            for p in series.points() {
                writeln!(out, "{}  {:>14.3}", p.year, p.value).map_err(out_err)?;
            }
            Ok(())
        }
    }
}

fn builtin_card(args: &[String]) -> Result<(Region, FactorKind, PolicyScorecard)> {
    let region: Region = args[0].parse()?;
    let kind: FactorKind = args[1]
        .parse()
        .map_err(|e: renewcast_core::scoring::UnknownFactorKind| Error::Document(e.to_string()))?;
    Ok((region, kind, builtin_scorecard(region, kind)))
}

pub fn cmd_score(a: &ScoreArgs, out: &mut dyn Write) -> Result<()> {
    let (card, builtin) = match (&a.card, &a.builtin) {
        (Some(path), _) => (io::load_scorecard(path)?, None),
        (None, Some(args)) => {
            let (r, k, card) = builtin_card(args)?;
            (card, Some((r, k)))
        }
        (None, None) => unreachable!("clap requires one of --card or --builtin"),
    };
    if a.report {
        let violations = validate_scorecard(&card);
        writeln!(out, "{} {} scorecard", card.region, card.factor).map_err(out_err)?;
        writeln!(
            out,
            "{:<30} {:<16} {:>6} {:>7} {:>8}",
            "index", "kind", "weight", "score", "contrib"
        )
        .map_err(out_err)?;
        for idx in &card.indices {
            let score = card.entries.get(&idx.id).copied();
            let contrib = score.map_or_else(|| "-".into(), |s| format!("{:.4}", idx.weight * s / 100.0));
            let score = score.map_or_else(|| "-".into(), |s| format!("{s}"));
            let kind = serde_json::to_value(idx.kind).expect("kind serializes");
            writeln!(
                out,
                "{:<30} {:<16} {:>6.2} {:>7} {:>8}",
                idx.id,
                kind.as_str().unwrap_or(""),
                idx.weight,
                score,
                contrib
            )
            .map_err(out_err)?;
        }
        writeln!(out, "weight sum {:.6}", card.weight_sum()).map_err(out_err)?;
        if violations.is_empty() {
            writeln!(out, "validation: ok").map_err(out_err)?;
        } else {
            writeln!(out, "validation: {} violation(s)", violations.len()).map_err(out_err)?;
            for v in &violations {
                writeln!(out, "  - {v}").map_err(out_err)?;
            }
        }
    }
    let factor = compute_factor(&card)?;
    writeln!(out, "{}", factor.display()).map_err(out_err)?;
    if let Some((r, k)) = builtin {
        let published = published_factor(r, k);
        if (published - factor.value).abs() > 0.0005 {
            eprintln!(
                "note: the published {k} factor for {r} is {published:.3}; the weighted sum of its entries is {:.5}",
                factor.value
            );
        }
    }
    Ok(())
}

/// Loads the models a document refers to: a path next to the spec, or an id in `--models`.
fn cli_models(
    doc: &ScenarioDocument,
    spec_dir: &Path,
    models_dir: Option<&Path>,
) -> Result<BTreeMap<String, ForecastModel>> {
    let mut models = BTreeMap::new();
    if let Some(reference) = &doc.baseline.model {
        let id = model_id(reference);
        let mut candidates = vec![spec_dir.join(reference), spec_dir.join(format!("{reference}.json"))];
        if let Some(dir) = models_dir {
            candidates.push(dir.join(format!("{id}.json")));
        }
        match candidates.iter().find(|p| p.is_file()) {
            Some(path) => {
                models.insert(id, load_model(path)?);
            }
            None => return Err(Error::UnknownModel(id)),
        }
    }
    Ok(models)
}

pub fn scenario_report(spec: &Path, models_dir: Option<&Path>, gap: Option<f64>) -> Result<ReportDocument> {
    let doc = load_document(spec)?;
    let spec_dir = spec.parent().unwrap_or(Path::new("."));
    let doc = materialize(&doc, spec_dir)?;
    let models = cli_models(&doc, spec_dir, models_dir)?;
    evaluate(&doc, &models, gap)
}

pub fn cmd_scenario(a: &ScenarioArgs, out: &mut dyn Write) -> Result<()> {
    let report = scenario_report(&a.spec, a.models.as_deref(), a.gap)?;
    let text = emit(&report, a.format);
    match &a.out {
        Some(path) => io::write_file(path, &text)?,
        None => out.write_all(text.as_bytes()).map_err(out_err)?,
    }
    if let Some(gap) = &report.report.gap {
        if !gap.reachable() {
            eprintln!("warning: target is out of the policy envelope");
        }
    }
    Ok(())
}

pub fn cmd_gap(a: &GapArgs, out: &mut dyn Write) -> Result<()> {
    let report = scenario_report(&a.spec, a.models.as_deref(), Some(a.target))?;
    let gap = report.report.gap.as_ref().expect("gap requested");
    match a.format {
        GapFormat::Table => write!(out, "{}", gap_text(gap, report.report.target.unit())).map_err(out_err),
        GapFormat::Json => {
            let text = serde_json::to_string_pretty(&serde_json::json!({
                "schema_version": report.schema_version,
                "gap": gap,
            }))
            .expect("gap serializes");
            writeln!(out, "{text}").map_err(out_err)
        }
    }
}

fn cmd_serve(a: ServeArgs) -> Result<()> {
    let catalog = SessionCatalog::load(a.models.as_deref(), a.specs.as_deref())?;
    eprintln!(
        "loaded {} model(s), {} spec(s)",
        catalog.models().len(),
        catalog.specs().len()
    );
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io(Path::new("<runtime>"), e))?;
    runtime
        .block_on(serve(catalog, a.addr, a.static_dir))
        .map_err(|e| Error::io(Path::new("<server>"), e))
}
