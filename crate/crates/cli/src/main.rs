//! `pcqa`: geometry quality metrics for point clouds.

mod failure;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use pcqa::cloud::coordinate_peak;
use pcqa::degrade::{gaussian_jitter, octree_quantize};
use pcqa::evaluation::{
    format_significant, read_manifest, run_benchmark, write_outputs, BenchmarkSettings,
    RegressionForm,
};
use pcqa::ply::{read_ply, write_ply, PlyFormat};
use pcqa::{
    evaluate_clouds, infer_bit_depth, ErrorKind, Execution, MetricOptions, MetricResult,
    MetricVariant, PeakSpec, PointCloud, Pooling, PreparedCloud, Resolution,
};
use serde_json::json;

use failure::Failure;

#[derive(Parser)]
#[command(name = "pcqa", version, about = "Point cloud geometry quality metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a degraded cloud against its reference.
    Compare(CompareArgs),
    /// Print the resolution estimate of a cloud.
    Resolution(ResolutionArgs),
    /// Write a synthetically degraded copy of a cloud.
    Degrade(DegradeArgs),
    /// Score a manifest of stimuli and correlate with subjective scores.
    Benchmark(BenchmarkArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ErrorArg {
    Po2po,
    Po2pl,
}

impl From<ErrorArg> for ErrorKind {
    fn from(e: ErrorArg) -> Self {
        match e {
            ErrorArg::Po2po => ErrorKind::Po2Po,
            ErrorArg::Po2pl => ErrorKind::Po2Pl,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum PeakArg {
    Precision,
    Ld,
    Mnn,
    Ann,
    Annk,
    Apdk,
    /// APD_k without the outer square root.
    ApdkMs,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Mnn,
    Ann,
    Annk,
    Apdk,
    ApdkMs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolingArg {
    PaperMax,
    MpegMin,
}

impl From<PoolingArg> for Pooling {
    fn from(p: PoolingArg) -> Self {
        match p {
            PoolingArg::PaperMax => Pooling::PaperMax,
            PoolingArg::MpegMin => Pooling::MpegMin,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FormatArg {
    Human,
    Jsonl,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlyFormatArg {
    Binary,
    Ascii,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormArg {
    Cubic,
    Quartic,
}

/// Settings shared by the scoring commands.
#[derive(Args)]
struct MetricFlags {
    /// Neighborhood size of the k-based estimators.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Neighborhood size for normal estimation when a file has no normals.
    #[arg(long, default_value_t = pcqa::DEFAULT_NORMAL_K)]
    normal_k: usize,
    /// Coordinate bit depth; inferred from the reference when omitted.
    #[arg(long)]
    bitdepth: Option<u32>,
    #[arg(long, value_enum, default_value = "paper-max")]
    pooling: PoolingArg,
}

impl MetricFlags {
    fn options(&self) -> Result<MetricOptions, Failure> {
        if self.normal_k < 3 {
            return Err(Failure::usage("--normal-k must be at least 3"));
        }
        if self.k == 0 {
            return Err(Failure::usage("--k must be at least 1"));
        }
        if let Some(b) = self.bitdepth {
            if !(1..=52).contains(&b) {
                return Err(Failure::usage(format!("--bitdepth {b} outside 1..=52")));
            }
        }
        Ok(MetricOptions {
            normal_k: self.normal_k,
            bit_depth: self.bitdepth,
            pooling: self.pooling.into(),
            execution: Execution::default(),
        })
    }
}

#[derive(Args)]
struct CompareArgs {
    /// Reference (original) cloud.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Degraded cloud.
    #[arg(long = "deg")]
    degraded: PathBuf,
    #[arg(long, value_enum, default_value = "po2pl")]
    error: ErrorArg,
    /// Peak; without `--peak` the density-adaptive APD_k metric is used.
    #[arg(long, value_enum)]
    peak: Option<PeakArg>,
    /// Density-adaptive scaling of a resolution peak.
    #[arg(long)]
    ra: bool,
    #[command(flatten)]
    metric: MetricFlags,
    #[arg(long, value_enum, default_value = "human")]
    format: FormatArg,
}

#[derive(Args)]
struct ResolutionArgs {
    /// Cloud to measure.
    #[arg(long = "ref")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "apdk")]
    estimator: EstimatorArg,
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = pcqa::DEFAULT_NORMAL_K)]
    normal_k: usize,
    #[arg(long, value_enum, default_value = "human")]
    format: FormatArg,
}

#[derive(Args)]
#[command(group(ArgGroup::new("kind").required(true).args(["gaussian", "octree_drop"])))]
struct DegradeArgs {
    /// Source cloud.
    #[arg(long = "ref")]
    input: PathBuf,
    /// Gaussian jitter with this standard deviation (coordinate units).
    #[arg(long)]
    gaussian: Option<f64>,
    /// Octree quantization dropping this many low bits.
    #[arg(long)]
    octree_drop: Option<u32>,
    /// Bit depth for quantization; inferred when omitted.
    #[arg(long)]
    bitdepth: Option<u32>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "binary")]
    ply_format: PlyFormatArg,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// CSV with header `stimulus_id,group,reference,degraded,mos`.
    #[arg(long)]
    manifest: PathBuf,
    /// Metrics as `error:peak[:k][:ra]` (e.g. `po2pl:apdk:10:ra`), or `all`.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    metric: Vec<String>,
    #[command(flatten)]
    metric_flags: MetricFlags,
    #[arg(long, value_enum, default_value = "cubic")]
    form: FormArg,
    /// Output directory for correlation.csv, scores.csv and report.json.
    #[arg(long)]
    out: PathBuf,
}

fn resolution_of(kind: EstimatorArg, k: usize) -> Resolution {
    match kind {
        EstimatorArg::Mnn => Resolution::Mnn,
        EstimatorArg::Ann => Resolution::Ann,
        EstimatorArg::Annk => Resolution::AnnK(k),
        EstimatorArg::Apdk => Resolution::ApdK(k),
        EstimatorArg::ApdkMs => Resolution::ApdKMeanSquare(k),
    }
}

fn peak_spec(peak: PeakArg, ra: bool, k: usize) -> Result<PeakSpec, Failure> {
    let estimator = match peak {
        PeakArg::Precision | PeakArg::Ld if ra => {
            return Err(Failure::usage(
                "--ra needs a resolution peak (mnn, ann, annk, apdk, apdk-ms)",
            ))
        }
        PeakArg::Precision => return Ok(PeakSpec::PRECISION),
        PeakArg::Ld => return Ok(PeakSpec::LARGEST_DIAGONAL),
        PeakArg::Mnn => EstimatorArg::Mnn,
        PeakArg::Ann => EstimatorArg::Ann,
        PeakArg::Annk => EstimatorArg::Annk,
        PeakArg::Apdk => EstimatorArg::Apdk,
        PeakArg::ApdkMs => EstimatorArg::ApdkMs,
    };
    let r = resolution_of(estimator, k);
    Ok(if ra {
        PeakSpec::resolution_adaptive(r)
    } else {
        PeakSpec::intrinsic(r)
    })
}

/// Parses one `--metric` token; peak names may carry an `i-`/`ra-` prefix as
/// printed in reports.
fn parse_metric(token: &str, default_k: usize) -> Result<Vec<MetricVariant>, Failure> {
    let bad = |why: &str| Failure::usage(format!("--metric {token:?}: {why}"));
    if token == "all" {
        return Ok(MetricVariant::standard_set(default_k));
    }
    let mut parts = token.split(':');
    let error = match parts.next() {
        Some("po2po") => ErrorArg::Po2po,
        Some("po2pl") => ErrorArg::Po2pl,
        _ => return Err(bad("expected error kind po2po or po2pl")),
    };
    let mut peak_name = parts.next().ok_or_else(|| bad("missing peak"))?;
    let mut ra = false;
    if let Some(rest) = peak_name.strip_prefix("ra-") {
        peak_name = rest;
        ra = true;
    } else if let Some(rest) = peak_name.strip_prefix("i-") {
        peak_name = rest;
    }
    let peak = PeakArg::from_str(peak_name, false).map_err(|_| bad("unknown peak"))?;
    let mut k = default_k;
    for part in parts {
        match part {
            "ra" => ra = true,
            n => k = n.parse().map_err(|_| bad("expected k or `ra`"))?,
        }
    }
    let variant = MetricVariant::new(error.into(), peak_spec(peak, ra, k)?);
    variant.peak.validate()?;
    Ok(vec![variant])
}

fn load(path: &Path) -> Result<PointCloud, Failure> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    read_ply(BufReader::new(file)).map_err(|e| Failure::ply(path, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Failure::io(path, e))
}

fn db(v: Option<f64>) -> String {
    v.map_or_else(|| "inf".to_string(), |v| format!("{v:.6} dB"))
}

fn print_result(result: &MetricResult, format: FormatArg) -> Result<(), Failure> {
    if format == FormatArg::Jsonl {
        let line = serde_json::to_string(result)
            .map_err(|e| Failure::new(failure::Category::Compute, e.to_string()))?;
        println!("{line}");
        return Ok(());
    }
    let variant = MetricVariant::new(result.error_kind, result.peak);
    println!("metric      {}", variant.label());
    if let Some(k) = result.peak.k() {
        println!("k           {k}");
    }
    if let Some(b) = result.bit_depth {
        println!("bit_depth   {b}");
    }
    if let Some(r) = result.resolution {
        println!("resolution  {r:.9}");
    }
    println!("peak        {}", result.peak_value);
    println!("mse_ab      {}", result.mse_ab);
    println!("mse_ba      {}", result.mse_ba);
    println!("psnr_ab     {}", db(result.psnr_ab));
    println!("psnr_ba     {}", db(result.psnr_ba));
    let pooling = match result.pooling {
        Pooling::PaperMax => "paper-max",
        Pooling::MpegMin => "mpeg-min",
    };
    println!("psnr        {} ({pooling})", db(result.psnr_pooled));
    if result.infinite_quality {
        println!("infinite quality: identical geometry in at least one direction");
    }
    Ok(())
}

fn compare(args: CompareArgs) -> Result<(), Failure> {
    let options = args.metric.options()?;
    let peak = match args.peak {
        Some(p) => peak_spec(p, args.ra, args.metric.k)?,
        None => PeakSpec::resolution_adaptive(Resolution::ApdK(args.metric.k)),
    };
    let variant = MetricVariant::new(args.error.into(), peak);
    variant.peak.validate()?;

    let reference = load(&args.reference)?;
    let degraded = load(&args.degraded)?;
    if peak.needs_bit_depth() && options.bit_depth.is_none() && reference.bit_depth().is_none() {
        infer_bit_depth(&reference).map_err(|e| {
            Failure::usage(format!("--peak {} needs --bitdepth: {e}", peak.label()))
        })?;
    }
    let result = evaluate_clouds(&reference, &degraded, &variant, &options)?;
    print_result(&result, args.format)
}

fn resolution(args: ResolutionArgs) -> Result<(), Failure> {
    if args.normal_k < 3 {
        return Err(Failure::usage("--normal-k must be at least 3"));
    }
    let estimator = resolution_of(args.estimator, args.k);
    if estimator.k() == Some(0) {
        return Err(Failure::usage("--k must be at least 1"));
    }
    let cloud = load(&args.input)?;
    let points = cloud.len();
    let prepared = PreparedCloud::new(cloud, args.normal_k, Execution::default())?;
    let value = prepared.resolution(estimator)?;
    let normals = if estimator.needs_normals() {
        Some(prepared.normals()?.1)
    } else {
        None
    };
    match args.format {
        FormatArg::Jsonl => println!(
            "{}",
            json!({
                "estimator": estimator.label(),
                "k": estimator.k(),
                "value": value,
                "points": points,
                "normals": normals,
            })
        ),
        FormatArg::Human => {
            let mut provenance = format!("{} points", points);
            if let Some(k) = estimator.k() {
                provenance = format!("k={k}, {provenance}");
            }
            match normals {
                Some(pcqa::NormalSource::File) => provenance += ", normals from file",
                Some(pcqa::NormalSource::Estimated { k, degenerate }) => {
                    provenance +=
                        &format!(", normals estimated with k={k} ({degenerate} degenerate)")
                }
                None => {}
            }
            println!("{} {value:.9} ({provenance})", estimator.label());
        }
    }
    Ok(())
}

fn degrade(args: DegradeArgs) -> Result<(), Failure> {
    if let Some(sigma) = args.gaussian {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Failure::usage(format!(
                "--gaussian must be positive, got {sigma}"
            )));
        }
    }
    if args.octree_drop == Some(0) {
        return Err(Failure::usage("--octree-drop must be at least 1"));
    }
    if let Some(b) = args.bitdepth {
        if !(1..=52).contains(&b) {
            return Err(Failure::usage(format!("--bitdepth {b} outside 1..=52")));
        }
    }
    let source = load(&args.input)?;
    let out = match (args.gaussian, args.octree_drop) {
        (Some(sigma), _) => gaussian_jitter(&source, sigma, args.seed)?,
        (_, Some(bits)) => {
            let b = match args.bitdepth.or(source.bit_depth()) {
                Some(b) => b,
                None => infer_bit_depth(&source)
                    .map_err(|e| Failure::usage(format!("--octree-drop needs --bitdepth: {e}")))?,
            };
            if bits >= b {
                return Err(Failure::usage(format!(
                    "--octree-drop {bits} must be below the bit depth {b}"
                )));
            }
            if source
                .points()
                .iter()
                .flatten()
                .any(|&v| v > coordinate_peak(b))
            {
                return Err(Failure::usage(format!("coordinates exceed bit depth {b}")));
            }
            octree_quantize(&source, bits, b)?
        }
        (None, None) => unreachable!("clap requires one degradation kind"),
    };
    let format = match args.ply_format {
        PlyFormatArg::Binary => PlyFormat::BinaryLittleEndian,
        PlyFormatArg::Ascii => PlyFormat::Ascii,
    };
    let mut w = create(&args.out)?;
    write_ply(&out, format, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Failure::io(&args.out, e))?;
    println!("wrote {} points to {}", out.len(), args.out.display());
    Ok(())
}

fn benchmark(args: BenchmarkArgs) -> Result<(), Failure> {
    let options = args.metric_flags.options()?;
    let mut variants = Vec::new();
    for token in &args.metric {
        for v in parse_metric(token.trim(), args.metric_flags.k)? {
            if !variants.contains(&v) {
                variants.push(v);
            }
        }
    }
    if variants.is_empty() {
        return Err(Failure::usage("no metrics requested"));
    }
    let settings = BenchmarkSettings {
        options,
        form: match args.form {
            FormArg::Cubic => RegressionForm::Cubic,
            FormArg::Quartic => RegressionForm::Quartic,
        },
    };
    let manifest = read_manifest(&args.manifest)?;
    let outcome = run_benchmark(&manifest, &variants, &settings)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Failure::io(&args.out, e))?;
    write_outputs(&outcome, &args.out)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{:<8} {:<22} {:>4} {:>9} {:>9}",
        "group", "metric", "n", "plcc", "srocc"
    );
    for r in &outcome.reports {
        println!(
            "{:<8} {:<22} {:>4} {:>9} {:>9}",
            r.group,
            r.variant.label(),
            r.n,
            format_significant(r.plcc, 6),
            format_significant(r.srocc, 6)
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Compare(a) => compare(a),
        Command::Resolution(a) => resolution(a),
        Command::Degrade(a) => degrade(a),
        Command::Benchmark(a) => benchmark(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.category.exit_code() as u8)
        }
    }
}
