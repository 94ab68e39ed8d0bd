//! Command-line front end. Exit codes: 0 success, 1 invalid input, 2
//! runtime failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dataset::{
    canonical_name, parse_tu_dataset, pool_sizes, published_pooling, stratified_folds, DatasetBundle,
};
use crate::error::{Error, Result};
use crate::graph::{adjacency, normalize_adjacency, FeatureSpec, DEFAULT_DEGREE_CAP};
use crate::linalg::DenseMatrix;
use crate::model::{gradcheck_model, nmf_seed, toy_graph, toy_suite, ConvKind, ModelConfig, TOY_CLASSES};
use crate::report::fixed;
use crate::train::{cross_validate, prepare_dataset, train_fold};
use crate::layers::coarsen;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "nmfpool", version, about = "Graph classification with NMF pooling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dataset statistics and derived pool sizes.
    Stats(DataArgs),
    /// Train and evaluate a single fold, reporting learning curves.
    Train {
        #[command(flatten)]
        model: ModelArgs,
        /// Which fold of the stratified plan to hold out for testing.
        #[arg(long, default_value_t = 0)]
        fold: usize,
    },
    /// Stratified k-fold cross-validation.
    Cv(ModelArgs),
    /// Dump the pooling hierarchy of selected graphs as text matrices.
    Coarsen {
        #[command(flatten)]
        data: DataArgs,
        /// Comma-separated 0-based graph indices.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        graphs: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        pools: Option<Vec<usize>>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        renormalize_pooled: bool,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Finite-difference gradient check on built-in toy models.
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        step: f64,
        /// Double the analytic gradient; the check must then fail.
        #[arg(long)]
        corrupt: bool,
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory holding TU datasets (either ROOT/NAME/ or ROOT itself).
    #[arg(long, env = "NMFPOOL_DATA")]
    pub dataset_dir: PathBuf,
    #[arg(long)]
    pub dataset: String,
    /// Node fraction for the pool-size rule; defaults to the published one.
    #[arg(long)]
    pub pool_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureChoice {
    Auto,
    Onehot,
    Degree,
    Constant,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of graph convolutions; defaults to pools + 1.
    #[arg(long)]
    pub layers: Option<usize>,
    /// Pool sizes, e.g. `8,4`; `auto` uses the dataset's published sizes.
    #[arg(long)]
    pub pools: Option<String>,
    /// Number of pooling layers when pool sizes come from `--pool-fraction`.
    #[arg(long)]
    pub pool_depth: Option<usize>,
    #[arg(long, default_value_t = 64)]
    pub hidden: usize,
    #[arg(long, default_value = "gcn")]
    pub conv: ConvKind,
    #[arg(long, value_enum, default_value_t = FeatureChoice::Auto)]
    pub features: FeatureChoice,
    #[arg(long, default_value_t = 3)]
    pub folds: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, default_value_t = 200)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.1)]
    pub lr: f64,
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    #[arg(long, default_value_t = 0.1)]
    pub val_fraction: f64,
    /// Re-apply symmetric normalization to pooled adjacencies.
    #[arg(long)]
    pub renormalize_pooled: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn load(data: &DataArgs) -> Result<DatasetBundle> {
    let bundle = parse_tu_dataset(&data.dataset_dir, &canonical_name(&data.dataset))?;
    for w in &bundle.warnings {
        log::warn!("{w}");
    }
    Ok(bundle)
}

fn parse_pool_list(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Error::PoolSize(format!("cannot parse pool size {t:?}")))
        })
        .collect()
}

/// Pool sizes from `--pools`, `--pool-fraction` or the published table.
/// Derived sizes keep the first `--pool-depth` levels (default 1).
fn resolve_pools(args: &ModelArgs, bundle: &DatasetBundle) -> Result<Vec<usize>> {
    let depth = args.pool_depth.unwrap_or(1);
    if args.pools.is_some() && args.data.pool_fraction.is_some() {
        return Err(Error::Config(vec![
            "--pools and --pool-fraction are mutually exclusive".into(),
        ]));
    }
    let published = || -> Result<Vec<usize>> {
        let p = published_pooling(&bundle.name).ok_or_else(|| {
            Error::PoolSize(format!(
                "no published pool sizes for {}; pass --pools or --pool-fraction",
                bundle.name
            ))
        })?;
        if !(1..=2).contains(&depth) {
            return Err(Error::PoolSize(format!("depth {depth} must be 1 or 2")));
        }
        Ok(p.ks[..depth].to_vec())
    };
    match (args.pools.as_deref(), args.data.pool_fraction) {
        (Some("auto"), _) => published(),
        (Some(list), _) => parse_pool_list(list),
        (None, Some(p)) => pool_sizes(bundle.stats.avg_nodes, p, depth),
        (None, None) if args.pool_depth.is_some() => published(),
        (None, None) => Ok(Vec::new()),
    }
}

fn feature_spec(choice: FeatureChoice, bundle: &DatasetBundle) -> FeatureSpec {
    match choice {
        FeatureChoice::Auto => bundle.default_feature_spec(),
        FeatureChoice::Onehot => FeatureSpec::onehot(bundle.label_vocabulary.iter().copied()),
        FeatureChoice::Degree => FeatureSpec::degree(DEFAULT_DEGREE_CAP),
        FeatureChoice::Constant => FeatureSpec::constant(),
    }
}

pub fn model_config(args: &ModelArgs, bundle: &DatasetBundle) -> Result<ModelConfig> {
    let pools = resolve_pools(args, bundle)?;
    let spec = feature_spec(args.features, bundle);
    let base = if pools.is_empty() {
        ModelConfig::plain(args.layers.unwrap_or(2), args.hidden, spec)
    } else {
        let mut c = ModelConfig::pooled(pools, args.hidden, spec);
        if let Some(l) = args.layers {
            c.conv_layers = l;
        }
        c
    };
    let cfg = ModelConfig {
        conv_kind: args.conv,
        seed: args.seed,
        max_epochs: args.max_epochs,
        batch_size: args.batch,
        lr0: args.lr,
        patience: args.patience,
        val_fraction: args.val_fraction,
        renormalize_pooled: args.renormalize_pooled,
        ..base
    };
    cfg.validate()?;
    if args.jobs == 0 {
        return Err(Error::Config(vec!["--jobs must be at least 1".into()]));
    }
    Ok(cfg)
}

fn emit(value: &Value, out_path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
    match out_path {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(path, text)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn stats(data: &DataArgs) -> Result<Value> {
    let bundle = load(data)?;
    let published = published_pooling(&bundle.name);
    let fraction = data.pool_fraction.or(published.map(|p| p.fraction));
    let derived = match fraction {
        Some(p) => json!(pool_sizes(bundle.stats.avg_nodes, p, 2)?),
        None => Value::Null,
    };
    Ok(json!({
        "dataset": bundle.name,
        "graphs": bundle.len(),
        "classes": bundle.num_classes,
        "avg_nodes": fixed(bundle.stats.avg_nodes),
        "avg_edges": fixed(bundle.stats.avg_edges),
        "node_labels": bundle.label_vocabulary.len(),
        "pool_fraction": fraction.map(fixed),
        "derived_pool_sizes": derived,
        "published_pool_sizes": published.map(|p| p.ks.to_vec()),
        "warnings": bundle.warnings,
    }))
}

fn write_matrix(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut text = String::with_capacity(m.rows() * m.cols() * 10);
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|v| format!("{v:.6}")).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

fn coarsen_cmd(data: &DataArgs, ids: &[usize], pools: Option<&[usize]>, seed: u64, renormalize: bool, out: &Path) -> Result<Value> {
    let bundle = load(data)?;
    let ks = match pools {
        Some(ks) => ks.to_vec(),
        None => match (data.pool_fraction, published_pooling(&bundle.name)) {
            (Some(p), _) => pool_sizes(bundle.stats.avg_nodes, p, 2)?,
            (None, Some(pubd)) => pubd.ks.to_vec(),
            (None, None) => {
                return Err(Error::PoolSize("pass --pools or --pool-fraction".into()));
            }
        },
    };
    let mut summary = Vec::new();
    for &id in ids {
        let g = bundle.graphs.get(id).ok_or_else(|| {
            Error::Config(vec![format!("graph {id} out of range for {} graphs", bundle.len())])
        })?;
        let mut current = normalize_adjacency(&adjacency(g));
        let mut levels = Vec::new();
        for (level, &k) in ks.iter().enumerate() {
            let dir = out.join(format!("graph_{id}")).join(format!("level_{level}"));
            fs::create_dir_all(&dir)?;
            let cfg = crate::nmf::NmfConfig::new(k, nmf_seed(seed, id, level));
            let trace = coarsen(&current, k, &cfg)?;
            let next = if renormalize {
                normalize_adjacency(&trace.a_out)
            } else {
                trace.a_out.clone()
            };
            write_matrix(&dir.join("input_adjacency.txt"), &trace.a_in)?;
            write_matrix(&dir.join("assignment.txt"), &trace.s)?;
            write_matrix(&dir.join("adjacency.txt"), &next)?;
            levels.push(json!({
                "level": level,
                "nodes_in": trace.a_in.rows(),
                "k_requested": trace.k_requested,
                "k_effective": trace.k_effective,
                "nmf_objective": fixed(trace.nmf.final_objective),
                "nmf_iterations": trace.nmf.iterations_run,
            }));
            current = next;
        }
        summary.push(json!({ "graph": id, "levels": levels }));
    }
    Ok(json!({ "dataset": bundle.name, "pools": ks, "graphs": summary }))
}

fn gradcheck_cmd(seed: u64, step: f64, corrupt: bool, tolerance: f64) -> Result<(Value, bool)> {
    let mut cases = Vec::new();
    let mut worst = 0.0f64;
    for (name, cfg) in toy_suite(seed) {
        let report = gradcheck_model(&cfg, TOY_CLASSES, &toy_graph(1), step, corrupt)?;
        worst = worst.max(report.max_rel_error);
        cases.push(json!({
            "model": name,
            "parameters": report.parameters_checked,
            "max_rel_error": serde_json::to_value(&report).expect("serializes")["max_rel_error"],
        }));
    }
    let pass = worst < tolerance;
    let worst_text = format!("{worst:.6e}");
    Ok((
        json!({
            "cases": cases,
            "max_rel_error": serde_json::Value::Number(worst_text.parse().expect("number")),
            "pass": pass,
        }),
        pass,
    ))
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Stats(data) => emit(&stats(&data)?, None, out)?,
        Command::Train { model, fold } => {
            let bundle = load(&model.data)?;
            let cfg = model_config(&model, &bundle)?;
            let plan = stratified_folds(&bundle.labels(), model.folds, cfg.seed, cfg.val_fraction)?;
            let prepared = prepare_dataset(&bundle, &cfg)?;
            let report = train_fold(&bundle, &prepared, &plan, fold, &cfg)?;
            let value = json!({
                "dataset": bundle.name,
                "model": cfg.label(),
                "config": cfg,
                "fold": report,
                "artifact_version": crate::report::ARTIFACT_VERSION,
            });
            emit(&value, model.out.as_deref(), out)?;
        }
        Command::Cv(model) => {
            let bundle = load(&model.data)?;
            let cfg = model_config(&model, &bundle)?;
            let report = cross_validate(&bundle, &cfg, model.folds, model.jobs)?;
            let value = serde_json::to_value(&report).expect("report serializes");
            emit(&value, model.out.as_deref(), out)?;
        }
        Command::Coarsen { data, graphs, pools, seed, renormalize_pooled, out: dir } => {
            let value = coarsen_cmd(&data, &graphs, pools.as_deref(), seed, renormalize_pooled, &dir)?;
            emit(&value, None, out)?;
        }
        Command::Gradcheck { seed, step, corrupt, tolerance } => {
            let (value, pass) = gradcheck_cmd(seed, step, corrupt, tolerance)?;
            emit(&value, None, out)?;
            if !pass {
                return Ok(EXIT_RUNTIME);
            }
        }
    }
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command,
/// writing JSON to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = write!(err, "{}", e.render());
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_INVALID,
            };
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                EXIT_INVALID
            } else {
                EXIT_RUNTIME
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("nmfpool").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_invalid_input() {
        assert_eq!(run_args(&["cv", "--bogus"]).0, EXIT_INVALID);
        assert_eq!(run_args(&["frobnicate"]).0, EXIT_INVALID);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn bad_conv_is_invalid_input() {
        let (code, _, err) = run_args(&["cv", "--dataset-dir", "/nonexistent", "--dataset", "X", "--conv", "gat"]);
        assert_eq!(code, EXIT_INVALID, "{err}");
    }

    #[test]
    fn missing_dataset_is_runtime_failure() {
        let (code, _, err) = run_args(&["stats", "--dataset-dir", "/nonexistent", "--dataset", "X"]);
        assert_eq!(code, EXIT_RUNTIME, "{err}");
    }

    #[test]
    fn gradcheck_passes_and_detects_corruption() {
        let (code, out, _) = run_args(&["gradcheck"]);
        assert_eq!(code, EXIT_OK, "{out}");
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pass"], Value::Bool(true));
        let (code, out, _) = run_args(&["gradcheck", "--corrupt"]);
        assert_eq!(code, EXIT_RUNTIME);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["pass"], Value::Bool(false));
    }

    #[test]
    fn pool_list_parsing() {
        assert_eq!(parse_pool_list("8,4").unwrap(), [8, 4]);
        assert!(parse_pool_list("8,x").is_err());
    }
}
