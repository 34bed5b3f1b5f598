mod io;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pulab_core::lab::{
    bobkov_nazarov_experiment, increasing_covariance_test, lemma1_gap, log_concavity_report,
    negative_correlation_test, projection_volume_sequence, ratio_limit_scan,
    slice_profile_properties, taylor_coefficient_check, ConcaveProfile, LabOptions, MonotoneFn,
    ProjectionVolumeSequence, DEFAULT_Z,
};
use pulab_core::sampler::{hit_and_run, rejection_sample, ChainConfig};
use pulab_core::volume::{exact_volume, mc_volume, quadrature_volume_low_dim, slice_profile};
use pulab_core::{BodySpec, Error, ExperimentReport, Point, Verdict};
use serde::Deserialize;

use crate::io::{load_json, load_spec, write_with_manifest, CliError, CliResult, RunManifest};

#[derive(Parser)]
#[command(
    name = "pulab",
    version,
    about = "Projection volumes and correlation experiments for symmetric convex bodies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Volume of the body in a spec file.
    Volume(VolumeArgs),
    /// Volumes of all coordinate projections and their log-concavity check.
    Sequence(SequenceArgs),
    /// Both sides of the one-dimensional inequality for a concave profile.
    Lemma1(Lemma1Args),
    /// Run a named experiment.
    Experiment(Box<ExperimentArgs>),
    /// Dump sampled points as CSV.
    Sample(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum VolumeMethod {
    Exact,
    Mc,
    Quad,
}

#[derive(Args)]
struct VolumeArgs {
    spec: PathBuf,
    #[arg(long, value_enum)]
    method: VolumeMethod,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Required for `--method mc`.
    #[arg(long)]
    seed: Option<u64>,
    /// Cells per axis for `--method quad`.
    #[arg(long, default_value_t = 200)]
    grid: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(required_unless_present = "replay", conflicts_with = "replay")]
    spec: Option<PathBuf>,
    /// Re-check a previously written sequence (or a hand-edited one).
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    /// Required when some projection has no closed-form volume.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_Z)]
    z: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Affine,
    Power,
    Pwl,
}

#[derive(Args)]
struct Lemma1Args {
    #[arg(long, value_enum)]
    profile: ProfileArg,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// `x:f(x)` pairs, e.g. `0:1,0.5:0.8,2:0`.
    #[arg(long, value_delimiter = ',', value_parser = parse_knot)]
    knots: Option<Vec<(f64, f64)>>,
    #[arg(long, default_value_t = 1.0)]
    length: f64,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1 << 12)]
    grid: usize,
}

const EXPERIMENTS: [&str; 6] = [
    "neg-corr",
    "taylor",
    "bn-density",
    "covariance",
    "ratio-scan",
    "slice-profile",
];

#[derive(Args)]
struct ExperimentArgs {
    /// One of neg-corr, taylor, bn-density, covariance, ratio-scan, slice-profile.
    name: String,
    spec: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 200_000)]
    samples: u64,
    #[arg(long, default_value_t = DEFAULT_Z)]
    z: f64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Hit-and-run burn-in (default 1000·dim).
    #[arg(long)]
    burn_in: Option<u64>,
    /// Hit-and-run thinning (default dim).
    #[arg(long)]
    thinning: Option<u64>,
    /// neg-corr: one threshold per coordinate.
    #[arg(long, value_delimiter = ',')]
    thresholds: Option<Vec<f64>>,
    /// taylor (default 0.05,0.1), bn-density (default 0,0.1,…,2): threshold values t.
    #[arg(long, value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// bn-density: dimension.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// covariance: coordinate blocks (0-based).
    #[arg(long, value_delimiter = ',')]
    block_a: Option<Vec<usize>>,
    #[arg(long, value_delimiter = ',')]
    block_b: Option<Vec<usize>>,
    /// covariance: max, min, sum-clipped:<c> or constant:<v>.
    #[arg(long, value_parser = parse_monotone, default_value = "max")]
    f: MonotoneFn,
    #[arg(long, value_parser = parse_monotone, default_value = "max")]
    g: MonotoneFn,
    /// ratio-scan: dimension range of the family generated by the body file.
    #[arg(long, default_value_t = 1)]
    n_min: usize,
    #[arg(long, default_value_t = 6)]
    n_max: usize,
    /// slice-profile: grid size and the `n` the body is `K_{n-1}` of.
    #[arg(long, default_value_t = 21)]
    grid_points: usize,
    #[arg(long)]
    n_label: Option<usize>,
    /// slice-profile: also write the profile as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SamplerArg {
    Rejection,
    HitAndRun,
}

#[derive(Args)]
struct SampleArgs {
    spec: PathBuf,
    #[arg(long, value_enum, default_value = "hit-and-run")]
    sampler: SamplerArg,
    #[arg(long)]
    count: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 100_000_000)]
    max_attempts: u64,
    #[arg(long)]
    burn_in: Option<u64>,
    #[arg(long)]
    thinning: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_knot(s: &str) -> Result<(f64, f64), String> {
    let (x, v) = s
        .split_once(':')
        .ok_or_else(|| format!("expected x:f(x), got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(x)?, num(v)?))
}

fn parse_monotone(s: &str) -> Result<MonotoneFn, String> {
    let (kind, arg) = match s.split_once(':') {
        Some((k, a)) => (
            k,
            Some(a.parse::<f64>().map_err(|e| format!("`{a}`: {e}"))?),
        ),
        None => (s, None),
    };
    match (kind, arg) {
        ("max", None) => Ok(MonotoneFn::Max),
        ("min", None) => Ok(MonotoneFn::Min),
        ("sum-clipped", Some(clip)) => Ok(MonotoneFn::SumClipped { clip }),
        ("constant", Some(value)) => Ok(MonotoneFn::Constant { value }),
        _ => Err(format!(
            "expected max, min, sum-clipped:<c> or constant:<v>, got `{s}`"
        )),
    }
}

fn print_json(json: &str) {
    println!("{json}");
}

/// Prints the report, writes it (with manifest) when asked, and maps the
/// verdict to the exit code.
fn finish_report(
    report: &ExperimentReport,
    out: Option<&Path>,
    manifest: RunManifest,
) -> CliResult<i32> {
    let json = report.to_json();
    eprintln!("{}", report.render_table());
    if let Some(out) = out {
        write_with_manifest(out, &(json.clone() + "\n"), &manifest)?;
    }
    print_json(&json);
    Ok(report.verdict.exit_code())
}

fn require_seed(seed: Option<u64>, what: &str) -> CliResult<u64> {
    seed.ok_or_else(|| CliError::usage(format!("--seed is required for {what}")))
}

fn cmd_volume(args: VolumeArgs) -> CliResult<i32> {
    let spec = load_spec(&args.spec)?;
    let (estimate, seeds) = match args.method {
        VolumeMethod::Exact => {
            let e = exact_volume(&spec.body).ok_or_else(|| {
                Error::Unsupported(format!(
                    "no closed-form volume for the {:?} family",
                    spec.body.family()
                ))
            })?;
            (e, vec![])
        }
        VolumeMethod::Mc => {
            let seed = require_seed(args.seed, "--method mc")?;
            (mc_volume(&spec.body, args.samples, seed)?, vec![seed])
        }
        VolumeMethod::Quad => (quadrature_volume_low_dim(&spec.body, args.grid)?, vec![]),
    };
    let json = estimate.to_json();
    eprintln!(
        "volume = {} (std_error {}, {:?}, {} evaluations)",
        estimate.value, estimate.std_error, estimate.method, estimate.evaluations
    );
    if let Some(out) = &args.out {
        write_with_manifest(
            out,
            &(json.clone() + "\n"),
            &RunManifest::new(Some(spec.sha256), seeds),
        )?;
    }
    print_json(&json);
    Ok(0)
}

/// A replay file is either a bare sequence or the document `sequence` writes.
#[derive(Deserialize)]
#[serde(untagged)]
enum ReplayDoc {
    Written { sequence: ProjectionVolumeSequence },
    Bare(ProjectionVolumeSequence),
}

fn cmd_sequence(args: SequenceArgs) -> CliResult<i32> {
    let (seq, sha, seeds) = match (&args.spec, &args.replay) {
        (_, Some(path)) => {
            let (doc, sha): (ReplayDoc, String) = load_json(path)?;
            let seq = match doc {
                ReplayDoc::Written { sequence } | ReplayDoc::Bare(sequence) => sequence,
            };
            (seq, sha, vec![])
        }
        (Some(path), None) => {
            let spec = load_spec(path)?;
            let needs_mc = (1..=spec.body.dim())
                .map(|i| spec.body.project(i))
                .collect::<Result<Vec<_>, _>>()?
                .iter()
                .any(|p| exact_volume(p).is_none());
            let seed = if needs_mc {
                require_seed(args.seed, "bodies without closed-form volumes")?
            } else {
                args.seed.unwrap_or(0)
            };
            let seq = projection_volume_sequence(&spec.body, args.samples, seed)?;
            (seq, spec.sha256, if needs_mc { vec![seed] } else { vec![] })
        }
        (None, None) => {
            return Err(CliError::usage(
                "either a spec file or --replay is required",
            ))
        }
    };
    let report = log_concavity_report(&seq, args.z)?;
    eprintln!("{}", report.render_table());
    let doc = serde_json::json!({ "sequence": seq, "report": report });
    let json = serde_json::to_string_pretty(&doc).expect("sequence serialisation cannot fail");
    if let Some(out) = &args.out {
        write_with_manifest(
            out,
            &(json.clone() + "\n"),
            &RunManifest::new(Some(sha), seeds),
        )?;
    }
    print_json(&json);
    Ok(report.verdict.exit_code())
}

fn cmd_lemma1(args: Lemma1Args) -> CliResult<i32> {
    let profile = match args.profile {
        ProfileArg::Affine => {
            let alpha = args
                .alpha
                .ok_or_else(|| CliError::usage("--alpha is required for affine"))?;
            ConcaveProfile::affine(alpha, args.length)?
        }
        ProfileArg::Power => {
            let beta = args
                .beta
                .ok_or_else(|| CliError::usage("--beta is required for power"))?;
            ConcaveProfile::power(beta, args.length)?
        }
        ProfileArg::Pwl => {
            let knots = args
                .knots
                .ok_or_else(|| CliError::usage("--knots is required for pwl"))?;
            ConcaveProfile::piecewise_linear(knots)?
        }
    };
    let gap = lemma1_gap(&profile, args.n, args.grid)?;
    let holds = gap.gap >= -gap.bracket;
    eprintln!(
        "lhs = {:e}  rhs = {:e}  gap = {:e}  bracket = {:e}  -> {}",
        gap.lhs,
        gap.rhs,
        gap.gap,
        gap.bracket,
        if holds { "holds" } else { "VIOLATED" }
    );
    let doc = serde_json::json!({ "profile": profile, "n": args.n, "grid": args.grid, "gap": gap });
    print_json(&serde_json::to_string_pretty(&doc).expect("gap serialisation cannot fail"));
    Ok(if holds { 0 } else { Verdict::Fail.exit_code() })
}

fn chain_config(
    body: &BodySpec,
    seed: u64,
    burn_in: Option<u64>,
    thinning: Option<u64>,
) -> ChainConfig {
    let mut c = ChainConfig::default_for(body.dim(), seed);
    if let Some(b) = burn_in {
        c.burn_in = b;
    }
    if let Some(t) = thinning {
        c.thinning = t;
    }
    c
}

fn cmd_experiment(args: ExperimentArgs) -> CliResult<i32> {
    if !EXPERIMENTS.contains(&args.name.as_str()) {
        return Err(CliError::usage(format!(
            "unknown experiment `{}`; valid names: {}",
            args.name,
            EXPERIMENTS.join(", ")
        )));
    }
    let opts = LabOptions {
        z: args.z,
        ..LabOptions::default()
    };
    let spec = match (&args.spec, args.name.as_str()) {
        (_, "bn-density") => None,
        (Some(path), _) => Some(load_spec(path)?),
        (None, name) => {
            return Err(CliError::usage(format!(
                "experiment `{name}` needs a spec file"
            )))
        }
    };
    let sha = spec.as_ref().map(|s| s.sha256.clone());
    let body = spec.map(|s| s.body);
    let config = body
        .as_ref()
        .map(|b| chain_config(b, args.seed, args.burn_in, args.thinning));
    let report = match args.name.as_str() {
        "neg-corr" => {
            let body = body.as_ref().expect("spec loaded");
            let thresholds = args
                .thresholds
                .ok_or_else(|| CliError::usage("--thresholds is required for neg-corr"))?;
            negative_correlation_test(body, &thresholds, args.samples, config.unwrap(), &opts)?
        }
        "taylor" => {
            let body = body.as_ref().expect("spec loaded");
            let t = args.t.unwrap_or_else(|| vec![0.05, 0.1]);
            taylor_coefficient_check(body, &t, args.samples, config.unwrap(), &opts)?
        }
        "bn-density" => {
            let t = args
                .t
                .unwrap_or_else(|| (0..=20).map(|k| k as f64 / 10.0).collect());
            bobkov_nazarov_experiment(args.n, &t, args.samples, args.seed, &opts)?
        }
        "covariance" => {
            let body = body.as_ref().expect("spec loaded");
            let a = args.block_a.unwrap_or_else(|| vec![0]);
            let b = args.block_b.unwrap_or_else(|| vec![1]);
            increasing_covariance_test(
                body,
                &a,
                &b,
                &args.f,
                &args.g,
                args.samples,
                config.unwrap(),
                &opts,
            )?
        }
        "ratio-scan" => {
            let template = body.as_ref().expect("spec loaded");
            ratio_limit_scan(
                |n| template.with_dim(n),
                args.n_min,
                args.n_max,
                args.samples,
                args.seed,
                args.z,
            )?
        }
        "slice-profile" => {
            let body = body.as_ref().expect("spec loaded");
            let n_label = args.n_label.unwrap_or(body.dim() + 1);
            let profile = slice_profile(body, n_label, args.grid_points, args.samples, args.seed)?;
            if let Some(csv) = &args.csv {
                write_with_manifest(
                    csv,
                    &profile.to_csv(),
                    &RunManifest::new(sha.clone(), vec![args.seed]),
                )?;
            }
            let mut report = slice_profile_properties(&profile, args.z)?;
            report.seed = Some(args.seed);
            report.inputs["body"] = serde_json::to_value(body).unwrap_or_default();
            report.inputs["samples_per_point"] = args.samples.into();
            report
        }
        _ => unreachable!("name checked above"),
    };
    finish_report(
        &report,
        args.out.as_deref(),
        RunManifest::new(sha, vec![args.seed]),
    )
}

fn points_csv(points: &[Point]) -> String {
    let Some(first) = points.first() else {
        return String::new();
    };
    let header: Vec<String> = (1..=first.dim()).map(|i| format!("x{i}")).collect();
    let mut out = header.join(",") + "\n";
    for p in points {
        let row: Vec<String> = p.coords().iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn cmd_sample(args: SampleArgs) -> CliResult<i32> {
    let spec = load_spec(&args.spec)?;
    let points = match args.sampler {
        SamplerArg::Rejection => {
            rejection_sample(&spec.body, args.count, args.seed, args.max_attempts)?
        }
        SamplerArg::HitAndRun => {
            let config = chain_config(&spec.body, args.seed, args.burn_in, args.thinning);
            hit_and_run(&spec.body, args.count, config)?
        }
    };
    let csv = points_csv(&points);
    match &args.out {
        Some(out) => {
            write_with_manifest(
                out,
                &csv,
                &RunManifest::new(Some(spec.sha256), vec![args.seed]),
            )?;
            eprintln!("wrote {} points to {}", points.len(), out.display());
        }
        None => print!("{csv}"),
    }
    Ok(0)
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Volume(a) => cmd_volume(a),
        Command::Sequence(a) => cmd_sequence(a),
        Command::Lemma1(a) => cmd_lemma1(a),
        Command::Experiment(a) => cmd_experiment(*a),
        Command::Sample(a) => cmd_sample(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors exit 1; exit 2 is reserved for unsupported requests
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
