//! `corrscreen` command-line entry point.
//!
//! Exit codes: 0 on success, 1 on a domain error, 2 on a usage error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use corrscreen::correlation::inter_correlation_matrix;
use corrscreen::dataset::{self, load_dataset, load_network, load_truth, save_network};
use corrscreen::discovery::{
    discovery_curve, mc_max_discovery_replicates, mc_mean_max_discoveries, uniform_grid, DiscoveryCurve,
    DiscoverySource, Statistic, DEFAULT_GRID_POINTS,
};
use corrscreen::evaluation::{
    confusion, curves_csv, fig5_csv, group_samples, median, run_fig5, run_table1, table1_csv, tpr_fpr,
    BenchmarkMethod, BenchmarkRow, Table1Setup, ThresholdSample,
};
use corrscreen::inference::{infer_network, DEFAULT_EXCEEDANCE_LEVEL};
use corrscreen::io::atomic_write;
use corrscreen::render::{box_plot, line_chart};
use corrscreen::synthesis::generate_dataset;
use corrscreen::thresholds::{thresholds_for_pair, ThresholdMethod};
use corrscreen::{Error, InferenceConfig, Pipeline, SimulationConfig, ToeplitzDecay};

#[derive(Parser, Debug)]
#[command(name = "corrscreen", version, about = "Correlation screening for networks between groups of signals")]
struct Cli {
    /// Worker threads (defaults to all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Format of tabular outputs.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a dataset and its ground truth from a simulation config.
    Simulate(SimulateArgs),
    /// Infer a binary network from a dataset.
    Infer(InferArgs),
    /// Per-pair thresholds of a dataset.
    Threshold(ThresholdArgs),
    /// Compare a predicted network with ground truth.
    Eval(EvalArgs),
    /// TPR/FPR benchmark on the ten-region synthetic setup.
    #[command(name = "bench-table1")]
    BenchTable1(Table1Args),
    /// Threshold comparison on two-region null data.
    #[command(name = "bench-fig5")]
    BenchFig5(Fig5Args),
    /// Discovery curves of a region pair.
    Curves(CurvesArgs),
}

#[derive(Args, Debug)]
struct MethodArgs {
    /// quantile | fwer | poli | hero
    #[arg(long, default_value = "quantile")]
    method: String,
    /// Level for quantile and fwer.
    #[arg(long)]
    alpha: Option<f64>,
    /// Surrogate replicates pooled into each null sample.
    #[arg(long, default_value_t = 1)]
    surrogate_reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl MethodArgs {
    fn method(&self) -> corrscreen::Result<ThresholdMethod> {
        // quantile without an explicit level means the null maximum
        let alpha = match (self.method.as_str(), self.alpha) {
            ("quantile", None) => Some(0.0),
            (_, a) => a,
        };
        ThresholdMethod::parse(&self.method, alpha)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory for data.csv and truth.json.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the Toeplitz decay profile in the config.
    #[arg(long, value_parser = parse_decay)]
    decay: Option<ToeplitzDecay>,
}

#[derive(Args, Debug)]
struct InferArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "cs")]
    pipeline: String,
    #[command(flatten)]
    method: MethodArgs,
    /// Exceedance level of the edge rule.
    #[arg(long, default_value_t = DEFAULT_EXCEEDANCE_LEVEL)]
    level: f64,
    #[arg(long)]
    out: PathBuf,
    /// Drop zero-variance voxels instead of failing.
    #[arg(long)]
    drop_constant: bool,
    /// Directory receiving one `i,j,r` correlation CSV per region pair.
    #[arg(long)]
    dump_correlations: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    #[arg(long)]
    drop_constant: bool,
    /// Writes to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    pred: PathBuf,
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Table1Args {
    #[arg(long, default_value_t = 100)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.6, 0.7, 0.8, 0.9])]
    rho_min: Vec<f64>,
    /// Comma-separated `pipeline+method` labels, e.g. cs+quantile(0),ca+poli.
    #[arg(long, value_delimiter = ',', value_parser = parse_bench_method)]
    methods: Vec<BenchmarkMethod>,
    #[arg(long, default_value_t = 150)]
    p: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    surrogate_reps: usize,
    #[arg(long, value_parser = parse_decay, default_value = "linear")]
    decay: ToeplitzDecay,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Fig5Args {
    #[arg(long, default_value_t = 50)]
    reps: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5, 0.7, 0.9])]
    intra: Vec<f64>,
    /// Comma-separated methods, e.g. poli,hero,quantile(0).
    #[arg(long, value_delimiter = ',', value_parser = parse_method)]
    methods: Vec<ThresholdMethod>,
    #[arg(long, default_value_t = 150)]
    p: usize,
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Box plot of the thresholds.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    /// Dataset to read the pair from.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    input: Option<PathBuf>,
    /// Monte Carlo mean of N_ab / p_a over draws from this simulation config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Region ids of the pair (defaults to the first two regions).
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pair: Option<Vec<String>>,
    /// Comma-separated statistics: N_ab, N_e_ab, nu_hat, nu_e_hat.
    #[arg(long, value_delimiter = ',', value_parser = parse_statistic)]
    statistics: Vec<Statistic>,
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    grid_points: usize,
    /// Replicates for the Monte Carlo mode.
    #[arg(long, default_value_t = 100)]
    mc_reps: usize,
    /// Also emit every Monte Carlo replicate.
    #[arg(long)]
    per_replicate: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    drop_constant: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    svg: Option<PathBuf>,
}

fn parse_decay(s: &str) -> Result<ToeplitzDecay, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_bench_method(s: &str) -> Result<BenchmarkMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_method(s: &str) -> Result<ThresholdMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_statistic(s: &str) -> Result<Statistic, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage(_) => 2,
                _ => 1,
            })
        }
    }
}

/// Logs the seed and a hash of everything that determines the output.
fn log_provenance(seed: u64, format: Format, command: &Command, extra: &[u8]) {
    let mut h = Sha256::new();
    h.update(format!("{format:?}|{command:?}").as_bytes());
    h.update(extra);
    info!("seed={seed} config_sha256={}", hex::encode(h.finalize()));
}

fn read_text(path: &Path) -> corrscreen::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn emit(out: Option<&Path>, text: &str) -> corrscreen::Result<()> {
    match out {
        Some(p) => atomic_write(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

fn run(cli: &Cli) -> corrscreen::Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Infer(a) => infer(cli, a),
        Command::Threshold(a) => threshold(cli, a),
        Command::Eval(a) => eval(cli, a),
        Command::BenchTable1(a) => bench_table1(cli, a),
        Command::BenchFig5(a) => bench_fig5(cli, a),
        Command::Curves(a) => curves(cli, a),
    }
}

fn load(path: &Path, drop_constant: bool) -> corrscreen::Result<corrscreen::Dataset> {
    let (ds, report) = load_dataset(path, drop_constant)?;
    if report.dropped > 0 {
        let names: Vec<String> = report
            .dropped_voxels
            .iter()
            .map(|(r, v)| format!("{r}/{v}"))
            .collect();
        warn!("dropped {} constant voxels: {}", report.dropped, names.join(", "));
    }
    Ok(ds)
}

fn simulate(cli: &Cli, a: &SimulateArgs) -> corrscreen::Result<()> {
    let text = read_text(&a.config)?;
    let mut cfg = SimulationConfig::from_json(&text)?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(d) = a.decay {
        cfg.decay = d;
    }
    log_provenance(cfg.seed, cli.format, &cli.command, cfg.to_json().as_bytes());
    let (ds, truth) = generate_dataset(&cfg)?;
    std::fs::create_dir_all(&a.out)?;
    dataset::save_dataset(&ds, &a.out.join("data.csv"))?;
    dataset::save_truth(&truth, &a.out.join("truth.json"))?;
    info!("wrote {} regions, n={} to {}", ds.regions.len(), ds.n(), a.out.display());
    Ok(())
}

fn infer(cli: &Cli, a: &InferArgs) -> corrscreen::Result<()> {
    let cfg = InferenceConfig {
        method: a.method.method()?,
        exceedance_level: a.level,
        surrogate_reps: a.method.surrogate_reps,
        seed: a.method.seed,
        pipeline: a.pipeline.parse::<Pipeline>()?,
    };
    cfg.validate()?;
    let input = read_text(&a.input)?;
    log_provenance(cfg.seed, cli.format, &cli.command, input.as_bytes());
    let ds = load(&a.input, a.drop_constant)?;
    let net = infer_network(&ds, &cfg)?;
    save_network(&net, &a.out)?;
    info!("{} of {} edges detected", net.detected_count(), net.edges.len());
    if let Some(dir) = &a.dump_correlations {
        std::fs::create_dir_all(dir)?;
        for (i, j) in ds.pairs() {
            let (ra, rb) = (&ds.regions[i], &ds.regions[j]);
            let m = inter_correlation_matrix(ra, rb)?;
            let mut s = String::from("i,j,r\n");
            for ((vi, vj), r) in m.indexed_iter() {
                writeln!(s, "{vi},{vj},{r:?}").unwrap();
            }
            atomic_write(&dir.join(format!("{}__{}.csv", ra.region_id, rb.region_id)), s.as_bytes())?;
        }
    }
    Ok(())
}

fn threshold(cli: &Cli, a: &ThresholdArgs) -> corrscreen::Result<()> {
    let method = a.method.method()?;
    let input = read_text(&a.input)?;
    log_provenance(a.method.seed, cli.format, &cli.command, input.as_bytes());
    let ds = load(&a.input, a.drop_constant)?;
    let rows = {
        use rayon::prelude::*;
        ds.pairs()
            .par_iter()
            .map(|&(i, j)| {
                let (ra, rb) = (&ds.regions[i], &ds.regions[j]);
                thresholds_for_pair(ra, rb, method, a.method.surrogate_reps, a.method.seed)
                    .map(|t| (ra.region_id.clone(), rb.region_id.clone(), t))
            })
            .collect::<corrscreen::Result<Vec<_>>>()?
    };
    let text = match cli.format {
        Format::Csv => {
            let mut s = String::from("a,b,method,threshold\n");
            for (x, y, t) in &rows {
                writeln!(s, "{x},{y},{method},{t:?}").unwrap();
            }
            s
        }
        Format::Json => json_text(&Value::Array(
            rows.iter()
                .map(|(x, y, t)| json!({"a": x, "b": y, "method": method.to_string(), "threshold": t}))
                .collect(),
        )),
    };
    emit(a.out.as_deref(), &text)
}

fn fmt_rate(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_else(|| "NA".into())
}

fn eval(cli: &Cli, a: &EvalArgs) -> corrscreen::Result<()> {
    let pred = load_network(&a.pred)?;
    let truth = load_truth(&a.truth)?;
    let c = confusion(&pred, &truth)?;
    let (tpr, fpr) = tpr_fpr(&c);
    let text = match cli.format {
        Format::Csv => format!(
            "tpr={},fpr={},tp={},fp={},tn={},fn={}\n",
            fmt_rate(tpr),
            fmt_rate(fpr),
            c.tp,
            c.fp,
            c.tn,
            c.fn_
        ),
        Format::Json => json_text(&json!({
            "tpr": tpr, "fpr": fpr, "tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn_,
        })),
    };
    emit(a.out.as_deref(), &text)
}

fn rows_json(rows: &[BenchmarkRow]) -> String {
    json_text(&Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "method": r.method, "rho_min": r.rho_min,
                    "fpr_mean": r.fpr_mean, "fpr_sd": r.fpr_sd,
                    "tpr_mean": r.tpr_mean, "tpr_sd": r.tpr_sd,
                    "reps": r.reps,
                })
            })
            .collect(),
    ))
}

fn bench_table1(cli: &Cli, a: &Table1Args) -> corrscreen::Result<()> {
    log_provenance(a.seed, cli.format, &cli.command, &[]);
    let methods = if a.methods.is_empty() {
        BenchmarkMethod::table1_defaults()
    } else {
        a.methods.clone()
    };
    let setup = Table1Setup {
        p: a.p,
        n: a.n,
        decay: a.decay,
        surrogate_reps: a.surrogate_reps,
        ..Table1Setup::default()
    };
    let rows = run_table1(a.reps, &a.rho_min, &methods, &setup, a.seed)?;
    let text = match cli.format {
        Format::Csv => table1_csv(&rows),
        Format::Json => rows_json(&rows),
    };
    atomic_write(&a.out, text.as_bytes())
}

fn samples_json(samples: &[ThresholdSample]) -> String {
    json_text(&Value::Array(
        samples
            .iter()
            .map(|s| json!({"method": s.method, "intra": s.intra, "replicate": s.replicate, "threshold": s.threshold}))
            .collect(),
    ))
}

fn bench_fig5(cli: &Cli, a: &Fig5Args) -> corrscreen::Result<()> {
    log_provenance(a.seed, cli.format, &cli.command, &[]);
    let methods = if a.methods.is_empty() {
        vec![ThresholdMethod::Poli, ThresholdMethod::Hero, ThresholdMethod::Quantile { alpha: 0.0 }]
    } else {
        a.methods.clone()
    };
    let samples = run_fig5(a.reps, &a.intra, &methods, a.p, a.n, a.seed)?;
    let text = match cli.format {
        Format::Csv => fig5_csv(&samples),
        Format::Json => samples_json(&samples),
    };
    atomic_write(&a.out, text.as_bytes())?;
    let groups = group_samples(&samples);
    for &intra in &a.intra {
        let medians: Vec<String> = methods
            .iter()
            .map(|m| {
                let g = &groups[&(m.to_string(), intra.to_bits())];
                format!("{m}={:.4}", median(g).unwrap_or(f64::NAN))
            })
            .collect();
        info!("intra={intra} median {}", medians.join(" "));
    }
    if let Some(svg) = &a.svg {
        let mut boxes = Vec::new();
        for &intra in &a.intra {
            for m in &methods {
                boxes.push((format!("{m} @{intra}"), groups[&(m.to_string(), intra.to_bits())].clone()));
            }
        }
        atomic_write(svg, box_plot("Thresholds on null data", "threshold", &boxes).as_bytes())?;
    }
    Ok(())
}

fn curves_json(curves: &[(Option<usize>, DiscoveryCurve)]) -> String {
    json_text(&Value::Array(
        curves
            .iter()
            .map(|(rep, c)| {
                json!({"statistic": c.statistic.tag(), "replicate": rep, "rho": c.grid, "value": c.values})
            })
            .collect(),
    ))
}

fn curves(cli: &Cli, a: &CurvesArgs) -> corrscreen::Result<()> {
    let grid = uniform_grid(a.grid_points);
    let mut curves: Vec<(Option<usize>, DiscoveryCurve)> = Vec::new();
    if let Some(cfg_path) = &a.config {
        let text = read_text(cfg_path)?;
        let mut cfg = SimulationConfig::from_json(&text)?;
        if let Some(pair) = &a.pair {
            let pick = |id: &str| {
                cfg.region_index(id)
                    .ok_or_else(|| Error::usage(format!("unknown region `{id}`")))
            };
            let (i, j) = (pick(&pair[0])?, pick(&pair[1])?);
            let (ri, rj) = (cfg.regions[i].clone(), cfg.regions[j].clone());
            cfg.regions = vec![ri, rj];
            let keep: Vec<String> = cfg.regions.iter().map(|r| r.id.clone()).collect();
            cfg.inter.retain(|e| keep.contains(&e.a) && keep.contains(&e.b));
        }
        log_provenance(a.seed, cli.format, &cli.command, cfg.to_json().as_bytes());
        if !a.statistics.is_empty() && a.statistics != [Statistic::MaxCount] {
            return Err(Error::usage("the Monte Carlo mode only produces N_ab"));
        }
        let mean = mc_mean_max_discoveries(&cfg, &grid, a.mc_reps, a.seed)?;
        curves.push((
            None,
            DiscoveryCurve {
                grid: grid.clone(),
                values: mean,
                statistic: Statistic::MaxCount,
            },
        ));
        if a.per_replicate {
            for (r, values) in mc_max_discovery_replicates(&cfg, &grid, a.mc_reps, a.seed)?
                .into_iter()
                .enumerate()
            {
                curves.push((
                    Some(r),
                    DiscoveryCurve {
                        grid: grid.clone(),
                        values,
                        statistic: Statistic::MaxCount,
                    },
                ));
            }
        }
    } else {
        let input = a.input.as_ref().expect("clap enforces input or config");
        let text = read_text(input)?;
        log_provenance(a.seed, cli.format, &cli.command, text.as_bytes());
        let ds = load(input, a.drop_constant)?;
        let (ra, rb) = match &a.pair {
            Some(p) => (
                ds.region(&p[0]).ok_or_else(|| Error::usage(format!("unknown region `{}`", p[0])))?,
                ds.region(&p[1]).ok_or_else(|| Error::usage(format!("unknown region `{}`", p[1])))?,
            ),
            None if ds.regions.len() >= 2 => (&ds.regions[0], &ds.regions[1]),
            None => return Err(Error::usage("curves need two regions")),
        };
        let m = inter_correlation_matrix(ra, rb)?;
        let stats = if a.statistics.is_empty() {
            Statistic::ALL.to_vec()
        } else {
            a.statistics.clone()
        };
        for s in stats {
            curves.push((None, discovery_curve(DiscoverySource::Matrix(m.view()), s, &grid)?));
        }
    }
    let text = match cli.format {
        Format::Csv => curves_csv(&curves),
        Format::Json => curves_json(&curves),
    };
    atomic_write(&a.out, text.as_bytes())?;
    if let Some(svg) = &a.svg {
        let series: Vec<(String, Vec<(f64, f64)>)> = curves
            .iter()
            .filter(|(rep, _)| rep.is_none())
            .map(|(_, c)| {
                (
                    c.statistic.tag().to_string(),
                    c.grid.iter().copied().zip(c.values.iter().copied()).collect(),
                )
            })
            .collect();
        atomic_write(svg, line_chart("Discovery curves", "threshold", "value", &series).as_bytes())?;
    }
    Ok(())
}
