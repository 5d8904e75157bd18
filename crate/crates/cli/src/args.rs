use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use tappy_core::analysis::DEFAULT_THRESHOLD;
use tappy_core::report::ReportFormat;
use tappy_service::DEFAULT_PORT;

#[derive(Debug, Parser)]
#[command(name = "tappy", version, about = "Predict tap success rates of touch targets")]
pub struct Cli {
    /// Device registry file (JSON). Defaults to the built-in iPhone table.
    #[arg(long, global = true, env = "TAPPY_DEVICES", value_name = "FILE")]
    pub devices: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Score every tappable element of a layout document.
    Analyze(AnalyzeArgs),
    /// Predict the success rate of a single element.
    Predict(PredictArgs),
    /// Smallest element size that reaches a success rate.
    SizeFor(SizeForArgs),
    /// List known devices.
    Devices,
    /// Run the local HTTP API.
    Serve(ServeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Text => ReportFormat::Text,
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Layout document (JSON).
    pub file: PathBuf,
    /// Target device id; falls back to the document's default_device.
    #[arg(long)]
    pub device: Option<String>,
    /// Minimum acceptable success rate, as a probability.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    pub threshold: f64,
    /// Only score elements whose name matches this glob.
    #[arg(long, value_name = "GLOB")]
    pub select: Option<String>,
    /// Also score container nodes.
    #[arg(long, conflicts_with = "explicit_only")]
    pub all: bool,
    /// Only score nodes flagged `tappable: true`.
    #[arg(long)]
    pub explicit_only: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Omit the timestamp so output is byte-identical across runs.
    #[arg(long)]
    pub reproducible: bool,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("size").required(true).args(["px", "mm"])))]
pub struct PredictArgs {
    #[arg(long)]
    pub device: Option<String>,
    /// Width and height in logical pixels (needs --device).
    #[arg(long, num_args = 2, value_names = ["W", "H"], allow_negative_numbers = true, requires = "device")]
    pub px: Option<Vec<f64>>,
    /// Width and height in millimetres.
    #[arg(long, num_args = 2, value_names = ["W", "H"], allow_negative_numbers = true)]
    pub mm: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct SizeForArgs {
    /// Target success rate, as a probability.
    #[arg(long, allow_negative_numbers = true)]
    pub rate: f64,
    /// Also report the size in this device's logical pixels.
    #[arg(long)]
    pub device: Option<String>,
    /// Fix the height (mm) and solve for the width only.
    #[arg(long, value_name = "H")]
    pub height_mm: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = DEFAULT_PORT, value_parser = clap::value_parser!(u16).range(1..))]
    pub port: u16,
    /// Allowed CORS origin; repeatable. Defaults to any origin.
    #[arg(long = "cors-origin", value_name = "ORIGIN")]
    pub cors_origins: Vec<String>,
}
