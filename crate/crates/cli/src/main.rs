//! `hpm`: fit source models, generate models for unseen conditions, run the
//! beta-density benchmark and inspect model files.
//!
//! Exit codes: 0 success, 2 I/O or argument error, 3 numerical failure,
//! 4 precondition violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hpm_core::benchmark::{self, ScenarioSpec};
use hpm_core::numeric::Matrix;
use hpm_core::persistence::{ModelFile, Payload};
use hpm_core::pipeline::{self, Method};
use hpm_core::{
    ComponentSelection, Condition, Error, Regressor, RegressorFamily, ShapeConfig, SourceTask, UnderdeterminedPolicy,
};

#[derive(Parser)]
#[command(name = "hpm", version, about = "Zero-shot regression by hyper-process modelling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a source regressor to a two-column CSV (x, y).
    Fit(FitArgs),
    /// Generate a model for an unseen condition from source model files.
    Generate(GenerateArgs),
    /// Run the HM and HPM beta-density sweeps and write the result tables.
    Benchmark(BenchmarkArgs),
    /// Print a summary of a model file.
    Inspect {
        file: PathBuf,
        /// Print the raw JSON document instead of the summary.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    #[value(alias = "polynomial")]
    Poly,
    Exponential,
    Gaussian,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Polynomial degree (poly only).
    #[arg(long)]
    degree: Option<usize>,
    /// CSV with x in the first column and y in the second; a header row is allowed.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Task condition, comma separated (needed later by `generate`).
    #[arg(long, value_parser = finite, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    condition: Option<Vec<f64>>,
    /// Task identifier stored with the model.
    #[arg(long)]
    id: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Hpm,
    Hpm2,
    Hm,
}

#[derive(Args)]
struct GenerateArgs {
    /// Source regressor files (at least two), each with a stored condition.
    #[arg(long = "source", required = true, num_args = 1..)]
    sources: Vec<PathBuf>,
    /// Target condition, comma separated.
    #[arg(long, value_parser = finite, value_delimiter = ',', num_args = 1.., allow_negative_numbers = true)]
    condition: Vec<f64>,
    #[arg(long, value_enum, default_value = "hpm")]
    method: MethodArg,
    /// Retained modes of the shape model.
    #[arg(long, conflicts_with = "variance")]
    components: Option<usize>,
    /// Retain the fewest modes reaching this share of variance.
    #[arg(long, default_value_t = 0.95)]
    variance: f64,
    #[arg(long, default_value_t = 3)]
    hyper_degree: usize,
    #[arg(long, default_value_t = 100)]
    landmarks: usize,
    /// Input range lower bound; for hpm2 one value per source or one shared value.
    #[arg(long, value_parser = finite, value_delimiter = ',', allow_negative_numbers = true, default_value = "0.01")]
    min: Vec<f64>,
    /// Input range upper bound; same layout as --min.
    #[arg(long, value_parser = finite, value_delimiter = ',', allow_negative_numbers = true, default_value = "0.99")]
    max: Vec<f64>,
    /// Family fitted to the generated shape.
    #[arg(long, value_enum, default_value = "poly")]
    family: FamilyArg,
    /// Degree of the generated polynomial.
    #[arg(long, default_value_t = 7)]
    degree: usize,
    /// Fit a minimum-norm hyper-model when there are fewer sources than features.
    #[arg(long)]
    allow_underdetermined: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum OnlyArg {
    Hm,
    Hpm,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Directory receiving hm_table.csv, hpm_table.csv and curves.jsonl.
    #[arg(long, env = "HPM_OUTPUT_DIR", default_value = "benchmark-output")]
    out_dir: PathBuf,
    /// Run a single method.
    #[arg(long, value_enum)]
    only: Option<OnlyArg>,
}

struct Failure {
    code: u8,
    message: String,
}

type CliResult<T> = Result<T, Failure>;

fn fail(code: u8, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Numerical(_) => 3,
            Error::HeterogeneousFamilies { .. } | Error::DimensionMismatch { .. } | Error::Underdetermined { .. } => 4,
            Error::InvalidArgument(_) | Error::UnsupportedVersion(_) | Error::Io(_) | Error::Json(_) => 2,
        };
        fail(code, e.to_string())
    }
}

fn finite(s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("{s:?} is not a finite number"))
}

fn family(arg: FamilyArg, degree: Option<usize>) -> CliResult<RegressorFamily> {
    match (arg, degree) {
        (FamilyArg::Poly, Some(degree)) => Ok(RegressorFamily::Polynomial { degree }),
        (FamilyArg::Poly, None) => Err(fail(2, "--degree is required for the poly family")),
        (_, Some(_)) => Err(fail(2, "--degree only applies to the poly family")),
        (FamilyArg::Exponential, None) => Ok(RegressorFamily::Exponential),
        (FamilyArg::Gaussian, None) => Ok(RegressorFamily::Gaussian),
    }
}

fn check_output_path(path: &Path) -> CliResult<()> {
    let parent = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    if parent.is_dir() {
        Ok(())
    } else {
        Err(fail(2, format!("output directory {} does not exist", parent.display())))
    }
}

fn read_xy(path: &Path) -> CliResult<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| fail(2, format!("cannot read {}: {e}", path.display())))?;
    let (mut x, mut y) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
        if record.len() < 2 {
            return Err(fail(2, format!("{}: line {} has fewer than two columns", path.display(), i + 1)));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if i == 0 => continue,
            _ => {
                return Err(fail(2, format!("{}: line {} is not numeric", path.display(), i + 1)));
            }
        }
    }
    if x.is_empty() {
        return Err(fail(2, format!("{} contains no data rows", path.display())));
    }
    Ok((x, y))
}

fn cmd_fit(args: FitArgs) -> CliResult<()> {
    let family = family(args.family, args.degree)?;
    check_output_path(&args.out)?;
    let (x, y) = read_xy(&args.data)?;
    let regressor = Regressor::fit(family, &x, &y).map_err(|e| match e {
        Error::InvalidArgument(_) => Failure::from(e),
        other => fail(3, format!("fit failed: {other}")),
    })?;
    if !regressor.converged {
        eprintln!("warning: the {family} fit did not converge");
    }
    println!("train_mse = {:e}", regressor.train_mse);

    let converged = regressor.converged;
    let mut file = ModelFile::new(Payload::Regressor(regressor));
    file.metadata.task_id = args.id;
    file.metadata.condition = args.condition.map(Condition::new);
    file.metadata.provenance.insert("converged".into(), converged.into());
    file.metadata
        .provenance
        .insert("data".into(), args.data.display().to_string().into());
    file.write(&args.out)?;
    Ok(())
}

fn load_source(path: &Path) -> CliResult<SourceTask> {
    let file = ModelFile::read(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))?;
    let Payload::Regressor(regressor) = file.payload else {
        return Err(fail(2, format!("{} holds a {} model, not a regressor", path.display(), file.payload.kind())));
    };
    let condition = file
        .metadata
        .condition
        .ok_or_else(|| fail(2, format!("{} has no stored condition (fit with --condition)", path.display())))?;
    let id = file.metadata.task_id.unwrap_or_else(|| path.display().to_string());
    Ok(SourceTask::new(id, regressor, condition))
}

fn ranges(values: &[f64], n: usize, flag: &str) -> CliResult<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; n]),
        m if m == n => Ok(values.to_vec()),
        m => Err(fail(2, format!("{flag} takes 1 or {n} values, got {m}"))),
    }
}

fn cmd_generate(args: GenerateArgs) -> CliResult<()> {
    if args.sources.len() < 2 {
        return Err(fail(2, "at least two --source files are required"));
    }
    let selection = match args.components {
        Some(0) => return Err(fail(2, "--components must be at least 1")),
        Some(p) => ComponentSelection::Count(p),
        None if args.variance > 0.0 && args.variance <= 1.0 => ComponentSelection::VarianceFraction(args.variance),
        None => return Err(fail(2, "--variance must lie in (0, 1]")),
    };
    let policy = if args.allow_underdetermined {
        UnderdeterminedPolicy::MinimumNorm
    } else {
        UnderdeterminedPolicy::Reject
    };
    let config = ShapeConfig {
        landmarks: args.landmarks,
        selection,
        hyper_degree: args.hyper_degree,
        policy,
        new_model_family: family(args.family, (matches!(args.family, FamilyArg::Poly)).then_some(args.degree))?,
    };
    check_output_path(&args.out)?;
    let tasks = args
        .sources
        .iter()
        .map(|p| load_source(p))
        .collect::<CliResult<Vec<_>>>()?;
    let target = Condition::new(args.condition);

    let generated = match args.method {
        MethodArg::Hpm => {
            if args.min.len() != 1 || args.max.len() != 1 {
                return Err(fail(2, "hpm takes a single --min and --max"));
            }
            pipeline::hpm(&tasks, &target, &args.min, &args.max, config)?
        }
        MethodArg::Hpm2 => {
            let n = tasks.len();
            let min = Matrix::from_row_major(n, 1, ranges(&args.min, n, "--min")?)?;
            let max = Matrix::from_row_major(n, 1, ranges(&args.max, n, "--max")?)?;
            pipeline::hpm2(&tasks, &target, &min, &max, config)?
        }
        MethodArg::Hm => pipeline::hm_baseline(&tasks, &target, args.hyper_degree, policy)?,
    };

    let p = &generated.provenance;
    println!("method = {}", p.method);
    println!("hyper_r2_mean = {}", p.hyper_r2_mean);
    if p.method != Method::Hm {
        let flags: Vec<&str> = p
            .plausibility_flags
            .iter()
            .map(|&f| if f { "outside" } else { "ok" })
            .collect();
        println!("components = {}", p.components_or_degree);
        println!("plausibility (|b| <= 3 sqrt(lambda)) = [{}]", flags.join(", "));
        if p.non_monotone_inputs {
            eprintln!("warning: generated inputs are not strictly increasing");
        }
    }
    let mut file = ModelFile::new(Payload::Generated((&generated).into()));
    file.metadata.condition = Some(target);
    file.write(&args.out)?;
    Ok(())
}

fn write_file(dir: &Path, name: &str, write: impl FnOnce(&mut Vec<u8>) -> hpm_core::Result<()>) -> CliResult<()> {
    let mut buf = Vec::new();
    write(&mut buf)?;
    let path = dir.join(name);
    fs::write(&path, buf).map_err(|e| fail(2, format!("cannot write {}: {e}", path.display())))
}

fn cmd_benchmark(args: BenchmarkArgs) -> CliResult<()> {
    let spec = ScenarioSpec::default();
    spec.validate()?;
    fs::create_dir_all(&args.out_dir)
        .map_err(|e| fail(2, format!("cannot create {}: {e}", args.out_dir.display())))?;
    let probe = args.out_dir.join(".hpm-write-test");
    fs::write(&probe, b"")
        .and_then(|_| fs::remove_file(&probe))
        .map_err(|e| fail(2, format!("{} is not writable: {e}", args.out_dir.display())))?;

    let hm = (args.only != Some(OnlyArg::Hpm))
        .then(|| benchmark::hm_report(&spec))
        .transpose()?;
    let hpm = (args.only != Some(OnlyArg::Hm))
        .then(|| benchmark::hpm_report(&spec))
        .transpose()?;

    let mut curves = Vec::new();
    for (report, name) in [(&hm, "hm_table.csv"), (&hpm, "hpm_table.csv")] {
        if let Some(r) = report {
            write_file(&args.out_dir, name, |b| benchmark::write_table_csv(&r.rows, b))?;
            curves.extend(r.curves.iter().cloned());
            println!("{name}: {} rows", r.rows.len());
        }
    }
    write_file(&args.out_dir, "curves.jsonl", |b| benchmark::write_curves_jsonl(&curves, b))?;

    if let (Some(hm), Some(hpm)) = (&hm, &hpm) {
        let bad = benchmark::dominance_violations(&hm.rows, &hpm.rows, 1.05);
        println!("dominance (HPM <= 1.05 x HM): {} of {} settings violate", bad.len(), hpm.rows.len());
        for (m, h) in bad {
            println!(
                "  ({}, {}): HM {:.4}, HPM {:.4}",
                m.param1, m.param2, m.mean_mse, h.mean_mse
            );
        }
    }
    Ok(())
}

fn fmt_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:.6e}")).collect();
    format!("[{}]", items.join(", "))
}

fn cmd_inspect(path: &Path, json: bool) -> CliResult<()> {
    let file = ModelFile::read(path).map_err(|e| match e {
        Error::Io(_) => fail(2, format!("cannot read {}: {e}", path.display())),
        other => Failure::from(other),
    })?;
    if json {
        print!("{}", file.to_json()?);
        return Ok(());
    }
    let m = &file.metadata;
    println!("kind:           {}", file.kind());
    println!("format version: {}", file.format_version);
    println!("created at:     {}", m.created_at);
    println!("tool version:   {}", m.tool_version);
    if let Some(id) = &m.task_id {
        println!("task id:        {id}");
    }
    if let Some(c) = &m.condition {
        println!("condition:      {}", fmt_list(c.as_slice()));
    }
    match &file.payload {
        Payload::Regressor(r) => {
            println!("family:         {}", r.family);
            println!("coefficients:   {}", fmt_list(&r.coefficients));
            println!("train mse:      {:e}", r.train_mse);
            println!("converged:      {}", r.converged);
        }
        Payload::Deformable(d) => {
            println!("landmarks:      {}", d.landmark_dim);
            println!("components:     {}", d.components);
            println!("eigenvalues:    {}", fmt_list(&d.eigenvalues));
            println!("total variance: {}", d.total_variance);
        }
        Payload::Hypermodel(h) => {
            println!("degree:         {}", h.degree);
            println!("condition dim:  {}", h.condition_dim);
            println!("outputs:        {}", h.per_output.len());
            println!("r2 per output:  {}", fmt_list(&h.r2_per_output));
            println!("r2 mean:        {}", h.r2_mean);
        }
        Payload::Generated(g) => {
            let p = &g.provenance;
            println!("method:         {}", p.method);
            println!("sources:        {}", p.task_ids.len());
            println!("hyper degree:   {}", p.hyper_degree);
            println!("hyper r2 mean:  {}", p.hyper_r2_mean);
            println!("target:         {}", fmt_list(g.condition.as_slice()));
            println!("family:         {}", g.regressor.family);
            println!("coefficients:   {}", fmt_list(&g.regressor.coefficients));
            println!("parameters:     {}", fmt_list(&p.generated_params));
            if !p.plausibility_flags.is_empty() {
                println!("implausible:    {:?}", p.plausibility_flags);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Inspect { file, json } => cmd_inspect(&file, json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
