use std::fs::{self, File, OpenOptions};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use log::{info, warn};
use powerga::baseline::{brute_force_manifold, SWEEP_HEADER};
use powerga::export::{csv_header, write_csv, DictionaryExport, ExportKind};
use powerga::ga::{self, IterationStats};
use powerga::{evaluate, KnnPredictor, Metric, PowerDictionary, SearchSpace, SweepRow};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::{FileConfig, Overrides, RunConfig};
use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize, Deserialize)]
pub struct Telemetry {
    pub command: String,
    pub elapsed_ms: u64,
    pub workers: usize,
    pub oracle_queries: u64,
    pub dictionary_size: usize,
    #[serde(default)]
    pub per_iteration: Vec<IterationStats>,
    pub config: serde_json::Value,
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn write_outputs(
    cfg: &RunConfig,
    stem: &str,
    kind: ExportKind,
    dictionary: &PowerDictionary,
    telemetry: &Telemetry,
) -> CliResult<()> {
    let dir = &cfg.output.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let csv_path = dir.join(format!("{stem}_dictionary.csv"));
    write_csv(dictionary, &cfg.space, create(&csv_path)?).map_err(|e| CliError::in_file(&csv_path, e))?;

    let json_path = dir.join(format!("{stem}_dictionary.json"));
    let ga = (kind == ExportKind::Ga).then_some(&cfg.ga);
    DictionaryExport::new(kind, &cfg.space, &cfg.oracle, ga, cfg.master_seed, dictionary)
        .to_writer(create(&json_path)?)
        .map_err(|e| CliError::in_file(&json_path, e))?;

    let tel_path = dir.join(format!("{stem}_telemetry.json"));
    let mut w = create(&tel_path)?;
    serde_json::to_writer_pretty(&mut w, telemetry)
        .map_err(|e| CliError::in_file(&tel_path, e.into()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(|e| CliError::io(&tel_path, e))?;

    info!("wrote {}, {} and {}", csv_path.display(), json_path.display(), tel_path.display());
    Ok(())
}

fn summary(value: serde_json::Value) {
    println!("{value}");
}

fn config_json(cfg: &RunConfig) -> serde_json::Value {
    serde_json::to_value(cfg).expect("config serializes")
}

pub fn learn(o: &Overrides) -> CliResult<()> {
    let cfg = RunConfig::resolve(o)?;
    info!(
        "learning over {} grid points with N={}, I={}, nsim={}, {} workers",
        cfg.space.grid_size(),
        cfg.ga.population_size,
        cfg.ga.iterations,
        cfg.oracle.nsim,
        cfg.workers
    );
    let report = ga::run(&cfg.space, &cfg.oracle, &cfg.ga, cfg.workers)?;
    let elapsed_ms = report.elapsed.as_millis() as u64;
    for row in &report.per_iteration {
        log::debug!(
            "iteration {}: {} new queries, best {:.4}, mean {:.4}",
            row.iteration,
            row.new_queries,
            row.best_fitness,
            row.mean_fitness
        );
    }
    let telemetry = Telemetry {
        command: "learn".into(),
        elapsed_ms,
        workers: cfg.workers,
        oracle_queries: report.oracle_queries,
        dictionary_size: report.dictionary.len(),
        per_iteration: report.per_iteration.clone(),
        config: config_json(&cfg),
    };
    write_outputs(&cfg, "ga", ExportKind::Ga, &report.dictionary, &telemetry)?;
    info!("{} oracle queries in {elapsed_ms} ms", report.oracle_queries);
    summary(json!({
        "command": "learn",
        "oracle_queries": report.oracle_queries,
        "dictionary_size": report.dictionary.len(),
        "elapsed_ms": elapsed_ms,
    }));
    Ok(())
}

pub fn brute_force(o: &Overrides) -> CliResult<()> {
    let cfg = RunConfig::resolve(o)?;
    let size = cfg.space.grid_size();
    if size > cfg.output.grid_budget {
        return Err(powerga::Error::GridBudget {
            size,
            budget: cfg.output.grid_budget,
        }
        .into());
    }
    info!("evaluating all {size} grid points with nsim={}, {} workers", cfg.oracle.nsim, cfg.workers);
    let start = Instant::now();
    let dictionary = brute_force_manifold(&cfg.space, &cfg.oracle, cfg.master_seed, cfg.output.grid_budget, cfg.workers)?;
    let elapsed_ms = start.elapsed().as_millis() as u64;
    let telemetry = Telemetry {
        command: "brute-force".into(),
        elapsed_ms,
        workers: cfg.workers,
        oracle_queries: dictionary.len() as u64,
        dictionary_size: dictionary.len(),
        per_iteration: Vec::new(),
        config: config_json(&cfg),
    };
    write_outputs(&cfg, "brute", ExportKind::BruteForce, &dictionary, &telemetry)?;
    info!("{} oracle queries in {elapsed_ms} ms", dictionary.len());
    summary(json!({
        "command": "brute-force",
        "oracle_queries": dictionary.len(),
        "elapsed_ms": elapsed_ms,
    }));
    Ok(())
}

pub fn read_export(path: &Path) -> CliResult<DictionaryExport> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    DictionaryExport::from_reader(BufReader::new(file)).map_err(|e| CliError::in_file(path, e))
}

fn load_dictionary(path: &Path) -> CliResult<(DictionaryExport, PowerDictionary)> {
    let export = read_export(path)?;
    let dictionary = export.dictionary().map_err(|e| CliError::in_file(path, e))?;
    Ok((export, dictionary))
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Dictionary JSON export from `learn` or `brute-force`
    #[arg(short, long)]
    pub dictionary: PathBuf,
    /// CSV with header `theta_1,...,theta_p,n`
    #[arg(short, long)]
    pub queries: PathBuf,
    /// Output CSV; standard output when omitted
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// TOML run configuration supplying the `[predictor]` section
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum MetricArg {
    Normalized,
    Raw,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Normalized => Metric::NormalizedEuclidean,
            MetricArg::Raw => Metric::RawEuclidean,
        }
    }
}

pub fn predict(a: &PredictArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let k = a.k.unwrap_or(file.predictor.k);
    let metric = a.metric.map_or(file.predictor.metric, Metric::from);
    let (export, dictionary) = load_dictionary(&a.dictionary)?;
    if k == 0 || k > dictionary.len() {
        return Err(CliError::invalid(
            "predictor.k",
            format!("must lie in 1..={} (dictionary size), got {k}", dictionary.len()),
        ));
    }
    let predictor = KnnPredictor::new(&dictionary, &export.space, metric)?;

    let input = File::open(&a.queries).map_err(|e| CliError::io(&a.queries, e))?;
    let out: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    let rows = predict_csv(&predictor, &export.space, k, BufReader::new(input), out)
        .map_err(|e| CliError::in_file(&a.queries, e))?;
    info!("predicted {rows} queries with k={k}");
    Ok(())
}

/// Copies every query row and appends its prediction; returns the row count.
pub fn predict_csv<R: io::Read, W: Write>(
    predictor: &KnnPredictor,
    space: &SearchSpace,
    k: usize,
    input: R,
    output: W,
) -> powerga::Result<usize> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let mut writer = csv::Writer::from_writer(output);
    let expected: Vec<String> = csv_header(space).into_iter().take(space.dims()).collect();
    let header: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if !header.is_empty() && header != expected {
        return Err(powerga::Error::Format {
            line: 1,
            detail: format!("expected header {:?}, got {:?}", expected.join(","), header.join(",")),
        });
    }
    let mut out_header = expected;
    out_header.push("predicted_power".into());
    writer.write_record(&out_header)?;

    let mut rows = 0;
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let point = parse_row(&record, line)?;
        let power = predictor.predict(&point, k).map_err(|e| powerga::Error::Format {
            line,
            detail: e.to_string(),
        })?;
        let mut fields: Vec<String> = record.iter().map(str::to_string).collect();
        fields.push(format!("{power:.6}"));
        writer.write_record(&fields)?;
        rows += 1;
    }
    writer.flush()?;
    Ok(rows)
}

fn parse_row(record: &csv::StringRecord, line: usize) -> powerga::Result<Vec<f64>> {
    record
        .iter()
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| powerga::Error::Format {
                    line,
                    detail: format!("`{f}` is not a finite number"),
                })
        })
        .collect()
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// GA dictionary JSON export
    #[arg(long)]
    pub ga: PathBuf,
    /// Brute-force dictionary JSON export covering the whole grid
    #[arg(long)]
    pub brute: PathBuf,
    /// Report JSON; standard output when omitted
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// TOML run configuration supplying the `[predictor]` section
    #[arg(short, long)]
    pub config: Option<PathBuf>,
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Append one `N,I,...` row to this CSV, creating it with a header
    #[arg(long)]
    pub sweep_csv: Option<PathBuf>,
    /// GA telemetry JSON supplying the run time for the sweep row
    #[arg(long)]
    pub telemetry: Option<PathBuf>,
}

pub fn evaluate_cmd(a: &EvaluateArgs) -> CliResult<()> {
    let file = FileConfig::load(a.config.as_deref())?;
    let k = a.k.unwrap_or(file.predictor.k);
    let (ga_export, ga_dict) = load_dictionary(&a.ga)?;
    let (brute_export, brute_dict) = load_dictionary(&a.brute)?;
    if ga_export.space != brute_export.space {
        return Err(powerga::Error::Structure(format!(
            "{} and {} describe different search spaces",
            a.ga.display(),
            a.brute.display()
        ))
        .into());
    }
    if ga_export.oracle != brute_export.oracle || ga_export.master_seed != brute_export.master_seed {
        warn!("the exports used different oracle settings or seeds; shared points need not agree");
    }
    let report = evaluate(&ga_dict, &brute_dict, &brute_export.space, k)?;
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    match &a.output {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| CliError::io(p, e))?,
        None => println!("{text}"),
    }
    info!(
        "rmse_full_grid {:.6}, rmse_seen_only {:.6}, query_ratio {:.4}",
        report.rmse_full_grid, report.rmse_seen_only, report.query_ratio
    );

    if let Some(sweep) = &a.sweep_csv {
        let ga_cfg = ga_export.ga.as_ref().ok_or_else(|| {
            CliError::invalid("ga", format!("{} carries no GA settings; a sweep row needs N and I", a.ga.display()))
        })?;
        let elapsed_ms = match &a.telemetry {
            Some(p) => {
                let f = File::open(p).map_err(|e| CliError::io(p, e))?;
                let t: Telemetry = serde_json::from_reader(BufReader::new(f))
                    .map_err(|e| CliError::in_file(p, e.into()))?;
                t.elapsed_ms
            }
            None => 0,
        };
        let row = SweepRow {
            population_size: ga_cfg.population_size,
            iterations: ga_cfg.iterations,
            oracle_queries: ga_export.oracle_queries,
            query_ratio: report.query_ratio,
            rmse_seen: report.rmse_seen_only,
            rmse_full: report.rmse_full_grid,
            elapsed_ms,
        };
        append_sweep_row(sweep, &row)?;
    }
    Ok(())
}

fn append_sweep_row(path: &Path, row: &SweepRow) -> CliResult<()> {
    let fresh = fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut f = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| CliError::io(path, e))?;
    let mut text = String::new();
    if fresh {
        text.push_str(SWEEP_HEADER);
        text.push('\n');
    }
    text.push_str(&row.to_csv_line());
    text.push('\n');
    f.write_all(text.as_bytes()).map_err(|e| CliError::io(path, e))
}
