//! `dface` command-line front end.
//!
//! [`run`] is the whole program: it parses arguments, executes one
//! subcommand and returns the process exit code (0 success, 2 usage or
//! configuration error, 3 data error). Machine-readable output goes to
//! `stdout`; diagnostics go to `stderr` prefixed with a stable error code.

pub mod config;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dface_core::action_units::{activations_to_csv, classify_with_order};
use dface_core::augmentation::{
    act_on_image, augment_dataset, filter_bank, manifest_csv, parse_d4, sha256_hex, write_orbit,
    AugmentOptions, Kernel, ManifestEntry, DATASET_MANIFEST,
};
use dface_core::dihedral::{cayley_table, verify_group_axioms, GroupElement};
use dface_core::face_model::{
    load_sequence, parse_frame, serialize_frame, FaceFrame, FrameSequence,
};
use dface_core::imaging::{preprocess, read_image, write_image, RasterImage};
use dface_core::symmetry::{
    asymmetry_report, estimate_midline, format_score, reconstruct_occluded, MidlineAxis,
};
use dface_core::{Error, Point2};

use config::{Config, ReportFormat, CONFIG_ENV};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    InFile { path: String, source: Error },
}

impl CliError {
    pub fn code(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "E-USAGE",
            CliError::Config(_) => "E-CONFIG",
            CliError::Core(e) | CliError::InFile { source: e, .. } => e.code(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => EXIT_USAGE,
            CliError::Core(_) | CliError::InFile { .. } => EXIT_DATA,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "dface",
    version,
    about = "Dihedral-group facial symmetry toolkit"
)]
struct Cli {
    /// INI configuration file (falls back to $DFACE_CONFIG).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the Cayley table of D_n as CSV.
    Cayley { n: i64 },
    /// Check the group axioms of D_n.
    Verify { n: i64 },
    /// Apply one D4 element to a PGM/PPM image.
    Transform {
        element: String,
        image: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Write all eight D4 images of a square image.
    Orbit { image: PathBuf, out_dir: PathBuf },
    /// Write the eight D4 variants of a square convolution kernel.
    Kernels { kernel: PathBuf, out_dir: PathBuf },
    /// Grayscale, smooth, Canny, crop to the edge rectangle, pad to square.
    Preprocess {
        image: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fit the facial midline of one frame.
    Midline { frame: PathBuf },
    /// Asymmetry scores of a frame file or sequence directory.
    Asymmetry(AsymmetryArgs),
    /// Fill occluded points by reflection across the midline.
    Reconstruct {
        frame: PathBuf,
        /// `auto` or the raster x coordinate of a vertical axis.
        #[arg(long, default_value = "auto")]
        axis: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Detect active action units between a neutral and an expressive frame.
    Aus { neutral: PathBuf, expr: PathBuf },
    /// Rank the six basic emotions for an expressive frame.
    Classify { neutral: PathBuf, expr: PathBuf },
    /// Augment every image (and key-point file) of a directory.
    Augment(AugmentArgs),
    /// Write per-frame asymmetry, classification and overlay files.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct AsymmetryArgs {
    #[arg(long, conflicts_with = "movement")]
    structural: bool,
    #[arg(long)]
    movement: bool,
    path: PathBuf,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    input: PathBuf,
    output: PathBuf,
    /// Comma-separated D4 elements (default: all eight).
    #[arg(long)]
    elements: Option<String>,
    /// Fixed key-point center `x,y` in raster coordinates.
    #[arg(long)]
    center: Option<String>,
    #[arg(long)]
    require_square: bool,
}

#[derive(Debug, Args)]
struct ReportArgs {
    seq_dir: PathBuf,
    out_dir: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(ReportFormatArg))]
    report_format: Option<ReportFormatArg>,
    /// Index of the neutral reference frame.
    #[arg(long, default_value_t = 0)]
    neutral: usize,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ReportFormatArg {
    Csv,
    Svg,
    Both,
}

impl From<ReportFormatArg> for ReportFormat {
    fn from(f: ReportFormatArg) -> Self {
        match f {
            ReportFormatArg::Csv => ReportFormat::Csv,
            ReportFormatArg::Svg => ReportFormat::Svg,
            ReportFormatArg::Both => ReportFormat::Both,
        }
    }
}

/// Runs the CLI with `$DFACE_CONFIG` as the configuration fallback.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_config = std::env::var_os(CONFIG_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from);
    run_with_env(args, env_config, stdout, stderr)
}

/// [`run`] with an explicit fallback configuration path.
pub fn run_with_env<I, T>(
    args: I,
    env_config: Option<PathBuf>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let result = cli
        .config
        .or(env_config)
        .map_or_else(|| Ok(Config::default()), |p| Config::from_file(&p))
        .and_then(|config| execute(cli.command, &config, stdout));
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error[{}]: {e}", e.code());
            e.exit_code()
        }
    }
}

fn in_file<T>(path: &Path, r: Result<T, Error>) -> CliResult<T> {
    r.map_err(|source| CliError::InFile {
        path: path.display().to_string(),
        source,
    })
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    Ok(fs::read(path).map_err(|e| Error::io(path, e))?)
}

fn read_text(path: &Path) -> CliResult<String> {
    Ok(fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    Ok(fs::write(path, bytes).map_err(|e| Error::io(path, e))?)
}

fn emit(out: &mut dyn Write, bytes: &[u8]) -> CliResult<()> {
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::Core(Error::io(Path::new("<stdout>"), e)))
}

fn load_image(path: &Path) -> CliResult<RasterImage> {
    in_file(path, read_image(&read_bytes(path)?))
}

fn load_frame(path: &Path) -> CliResult<FaceFrame> {
    in_file(path, parse_frame(&read_text(path)?))
}

fn group_order(n: i64) -> CliResult<u32> {
    u32::try_from(n)
        .ok()
        .filter(|&n| n >= 1)
        .ok_or(CliError::Core(Error::InvalidOrder(n)))
}

fn stem(path: &Path) -> CliResult<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .ok_or_else(|| CliError::Usage(format!("cannot derive a name from {}", path.display())))
}

fn parse_elements(list: &str) -> CliResult<Vec<GroupElement>> {
    list.split(',')
        .map(|name| parse_d4(name.trim()).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn parse_point(text: &str) -> CliResult<Point2> {
    let coords: Vec<f64> = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("expected x,y but got {text:?}")))?;
    match coords.as_slice() {
        [x, y] if x.is_finite() && y.is_finite() => Ok(Point2::from_raster(*x, *y)),
        _ => Err(CliError::Usage(format!("expected x,y but got {text:?}"))),
    }
}

fn raster_pair(p: Point2) -> String {
    let (x, y) = p.to_raster();
    format!("{},{}", format_score(x), format_score(y))
}

fn midline_csv(axis: &MidlineAxis) -> String {
    let d = axis.direction();
    format!(
        "point_x,point_y,dir_x,dir_y,residual,degenerate\n{},{},{},{}\n",
        raster_pair(axis.point()),
        raster_pair(d),
        format_score(axis.fit_residual()),
        axis.is_degenerate()
    )
}

fn execute(command: Command, config: &Config, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Cayley { n } => emit(out, cayley_table(group_order(n)?)?.to_csv().as_bytes()),
        Command::Verify { n } => {
            let report = verify_group_axioms(group_order(n)?)?;
            emit(out, report.to_csv().as_bytes())?;
            if report.passed() {
                Ok(())
            } else {
                Err(CliError::Core(Error::InvalidParameter(format!(
                    "D{n} failed {} axiom checks",
                    report.violations.len()
                ))))
            }
        }
        Command::Transform {
            element,
            image,
            output,
        } => {
            let g = parse_d4(&element).map_err(|e| CliError::Usage(e.to_string()))?;
            let bytes = write_image(&act_on_image(g, &load_image(&image)?)?);
            match output {
                Some(path) => write_bytes(&path, &bytes),
                None => emit(out, &bytes),
            }
        }
        Command::Orbit { image, out_dir } => {
            let source = stem(&image)?;
            let manifest = write_orbit(&load_image(&image)?, &source, &out_dir)?;
            write_bytes(
                &out_dir.join(DATASET_MANIFEST),
                manifest.to_csv().as_bytes(),
            )?;
            emit(
                out,
                format!(
                    "source,distinct_count\n{source},{}\n",
                    manifest.distinct_count
                )
                .as_bytes(),
            )
        }
        Command::Kernels { kernel, out_dir } => {
            let source = stem(&kernel)?;
            let k = in_file(&kernel, Kernel::parse(&read_text(&kernel)?))?;
            fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            let mut entries = Vec::new();
            for (g, t) in filter_bank(&k)? {
                let body = t.to_csv();
                let name = format!("{source}__{g}.csv");
                write_bytes(&out_dir.join(&name), body.as_bytes())?;
                entries.push(ManifestEntry {
                    source: source.clone(),
                    element: g.to_string(),
                    path: name,
                    sha256: sha256_hex(body.as_bytes()),
                });
            }
            let manifest = manifest_csv(&entries);
            write_bytes(&out_dir.join(DATASET_MANIFEST), manifest.as_bytes())?;
            emit(out, manifest.as_bytes())
        }
        Command::Preprocess { image, output } => {
            let result = in_file(&image, preprocess(&load_image(&image)?, &config.canny))?;
            if let Some(path) = output {
                write_bytes(&path, &write_image(&result.image))?;
            }
            emit(
                out,
                format!(
                    "x0,y0,x1,y1,offset_x,offset_y,side\n{},{},{},{}\n",
                    result.rect.to_csv(),
                    result.offset_x,
                    result.offset_y,
                    result.image.width()
                )
                .as_bytes(),
            )
        }
        Command::Midline { frame } => {
            let axis = in_file(&frame, estimate_midline(&load_frame(&frame)?))?;
            emit(out, midline_csv(&axis).as_bytes())
        }
        Command::Asymmetry(args) => {
            let seq = if args.path.is_dir() {
                in_file(&args.path, load_sequence(&args.path))?
            } else {
                FrameSequence::new(vec![load_frame(&args.path)?], None)?
            };
            if args.movement && seq.len() < 2 {
                return Err(CliError::Core(Error::InsufficientFrames(seq.len())));
            }
            let csv = in_file(&args.path, asymmetry_report(&seq))?.to_csv();
            let keep = |line: &str| {
                (!args.structural || line.starts_with("structural,"))
                    && (!args.movement || line.starts_with("movement,"))
            };
            let mut lines = csv.lines();
            let mut text = format!("{}\n", lines.next().unwrap_or_default());
            for line in lines.filter(|l| keep(l)) {
                text.push_str(line);
                text.push('\n');
            }
            emit(out, text.as_bytes())
        }
        Command::Reconstruct {
            frame,
            axis,
            output,
        } => {
            let f = load_frame(&frame)?;
            let axis = if axis == "auto" {
                in_file(&frame, estimate_midline(&f))?
            } else {
                let x: f64 = axis
                    .parse()
                    .ok()
                    .filter(|x: &f64| x.is_finite())
                    .ok_or_else(|| {
                        CliError::Usage(format!("--axis expects auto or a number, got {axis:?}"))
                    })?;
                MidlineAxis::vertical(x)
            };
            let text = serialize_frame(&in_file(&frame, reconstruct_occluded(&f, &axis))?);
            match output {
                Some(path) => write_bytes(&path, text.as_bytes()),
                None => emit(out, text.as_bytes()),
            }
        }
        Command::Aus { neutral, expr } => {
            let (n, e) = (load_frame(&neutral)?, load_frame(&expr)?);
            let axis = in_file(&neutral, estimate_midline(&n))?;
            let acts = config.detector().detect(&n, &e, &axis)?;
            emit(out, activations_to_csv(&acts).as_bytes())
        }
        Command::Classify { neutral, expr } => {
            let (n, e) = (load_frame(&neutral)?, load_frame(&expr)?);
            let axis = in_file(&neutral, estimate_midline(&n))?;
            let acts = config.detector().detect(&n, &e, &axis)?;
            emit(
                out,
                classify_with_order(&acts, &config.tie_order)
                    .to_lines()
                    .as_bytes(),
            )
        }
        Command::Augment(args) => {
            let mut options = AugmentOptions {
                require_square: args.require_square,
                ..AugmentOptions::default()
            };
            if let Some(list) = &args.elements {
                options.elements = parse_elements(list)?;
            }
            if let Some(c) = &args.center {
                options.center = Some(parse_point(c)?);
            }
            let summary = augment_dataset(&args.input, &args.output, &options)?;
            let mut text = format!(
                "processed,{}\nwritten,{}\nerrors,{}\n",
                summary.processed,
                summary.written,
                summary.errors.len()
            );
            for (file, message) in &summary.errors {
                text.push_str(&format!("error,{file},{}\n", message.replace(',', ";")));
            }
            emit(out, text.as_bytes())
        }
        Command::Report(args) => {
            let seq = in_file(&args.seq_dir, load_sequence(&args.seq_dir))?;
            let format = args
                .report_format
                .map_or(config.report_format, ReportFormat::from);
            let built = report::build_report(&seq, args.neutral, config)?;
            let files = built.write(&args.out_dir, format)?;
            let listing: String = files.iter().map(|f| format!("{f}\n")).collect();
            emit(out, listing.as_bytes())
        }
    }
}
