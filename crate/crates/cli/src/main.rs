//! `histoscope`: build meshes from section stacks or synthetic volumes,
//! colour them, and serve a project to viewers.
//!
//! Exit codes: 0 success, 2 usage error, 1 runtime error. Runtime errors are
//! printed as `error: Name: details`.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use histoscope_core::volume::Channel;
use histoscope_core::SyntheticKind;

#[derive(Parser)]
#[command(
    name = "histoscope",
    version,
    about = "Serial-section reconstruction and inspection toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic volume or mesh.
    Synth(SynthArgs),
    /// Filter a volume and extract its isosurface as PLY.
    Mesh(MeshArgs),
    /// Colour a mesh by shape diameter.
    Sdf(SdfArgs),
    /// Colour a mesh by connected component.
    Components(ComponentsArgs),
    /// Serve a project over HTTP.
    Serve(ServeArgs),
    /// Write the current coloured state of a project mesh.
    Export(ExportArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SynthOutput {
    Volume,
    Mesh,
}

#[derive(Args)]
pub struct SynthArgs {
    #[arg(long, default_value = "spheres", value_parser = SyntheticKind::from_str)]
    pub kind: SyntheticKind,
    #[arg(long, default_value_t = 3)]
    pub count: usize,
    #[arg(long, default_value_t = 4.0)]
    pub radius_min: f64,
    #[arg(long, default_value_t = 8.0)]
    pub radius_max: f64,
    /// Voxel counts as NX,NY,NZ.
    #[arg(long, default_value = "64,64,64", value_parser = parse_triple::<usize>)]
    pub dims: [usize; 3],
    /// Voxel spacing in µm as SX,SY,SZ.
    #[arg(long, default_value = "1,1,1", value_parser = parse_triple::<f64>)]
    pub spacing: [f64; 3],
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    /// Surface gap between tubes, minimum clearance between spheres (µm).
    #[arg(long, default_value_t = 2.0)]
    pub gap: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output kind; inferred from the extension when omitted (.ply is a mesh).
    #[arg(long = "as", value_enum)]
    pub output: Option<SynthOutput>,
    #[arg(long, default_value_t = 0.5, value_parser = parse_iso)]
    pub iso: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct MeshArgs {
    /// Cached volume file written by `synth` or `mesh --cache`.
    #[arg(long, conflicts_with = "images", required_unless_present = "images")]
    pub volume: Option<PathBuf>,
    /// Section images in stack order; glob patterns are expanded and sorted.
    #[arg(long, num_args = 1..)]
    pub images: Vec<String>,
    #[arg(long, requires = "images")]
    pub pixel_pitch: Option<f64>,
    #[arg(long, requires = "images")]
    pub thickness: Option<f64>,
    #[arg(long, default_value = "luminance-inverted", value_parser = Channel::from_str)]
    pub channel: Channel,
    /// JSON or TOML file with pipeline parameters; flags override it.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long, value_parser = parse_iso)]
    pub iso: Option<f64>,
    #[arg(long)]
    pub close_radius: Option<usize>,
    #[arg(long)]
    pub blur_sigma: Option<f64>,
    #[arg(long)]
    pub z_factor: Option<usize>,
    /// Weld distance in µm; defaults to 1e-4 of the smallest spacing.
    #[arg(long)]
    pub weld_epsilon: Option<f64>,
    /// Colour the output by connected component.
    #[arg(long)]
    pub color_components: bool,
    /// Also write the filtered volume here.
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SdfArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub rays: usize,
    /// Cone half-angle in degrees.
    #[arg(long, default_value_t = 30.0)]
    pub cone: f64,
    /// Value mapped to red; defaults to the 5th percentile.
    #[arg(long)]
    pub lo: Option<f64>,
    /// Value mapped to green; defaults to the 95th percentile.
    #[arg(long)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ComponentsArgs {
    #[arg(long)]
    pub mesh: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long, default_value = "127.0.0.1:8780")]
    pub bind: String,
    #[arg(long, default_value = "info")]
    pub log_level: String,
}

#[derive(Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub mesh: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_triple<T: FromStr>(s: &str) -> Result<[T; 3], String>
where
    T::Err: std::fmt::Display,
{
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, c] = parts.as_slice() else {
        return Err(format!("expected three comma-separated values, got {s:?}"));
    };
    let p = |x: &str| x.parse::<T>().map_err(|e| format!("{x:?}: {e}"));
    Ok([p(a)?, p(b)?, p(c)?])
}

fn parse_iso(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("iso must be in (0,1), got {v}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(a) => commands::synth(a),
        Command::Mesh(a) => commands::mesh(a),
        Command::Sdf(a) => commands::sdf(a),
        Command::Components(a) => commands::components(a),
        Command::Serve(a) => commands::serve(a),
        Command::Export(a) => commands::export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
