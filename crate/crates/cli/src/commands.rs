use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use histoscope_core::analytics::{percentile, sdf_to_colors, shape_diameter, SdfConfig, RAMP_RED};
use histoscope_core::isosurface::{default_weld_epsilon, marching_cubes, weld, with_normals};
use histoscope_core::mesh::{
    build_adjacency, color_components, connected_components, load_mesh, save_mesh,
};
use histoscope_core::volume::{apply_filter, load_stack, read_hvol, write_hvol, FilterSpec};
use histoscope_core::{synthesize, Mesh, SyntheticSpec, Volume32};
use histoscope_service::{router, ProjectState};
use serde::Deserialize;

use crate::{ComponentsArgs, ExportArgs, MeshArgs, SdfArgs, ServeArgs, SynthArgs, SynthOutput};

type Result<T> = std::result::Result<T, String>;

fn fail<E: Display>(e: E) -> String {
    e.to_string()
}

/// Pipeline parameters that may come from a file; command line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PipelineParams {
    iso: Option<f64>,
    close_radius: Option<usize>,
    blur_sigma: Option<f64>,
    z_factor: Option<usize>,
    weld_epsilon: Option<f64>,
}

fn read_params(path: &Path) -> Result<PipelineParams> {
    let text =
        std::fs::read_to_string(path).map_err(|e| format!("IoFailure: {}: {e}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "toml") {
        toml::from_str(&text).map_err(fail)
    } else {
        serde_json::from_str(&text).map_err(fail)
    };
    parsed.map_err(|e| format!("InvalidParams: {}: {e}", path.display()))
}

fn expand_images(patterns: &[String]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for pat in patterns {
        let mut found: Vec<PathBuf> = glob::glob(pat)
            .map_err(|e| format!("InvalidParams: bad pattern {pat:?}: {e}"))?
            .filter_map(|p| p.ok())
            .collect();
        if found.is_empty() {
            // A literal path that does not exist is reported by the loader.
            found.push(PathBuf::from(pat));
        }
        found.sort();
        out.extend(found);
    }
    Ok(out)
}

/// Marching cubes, weld and normals, shared by `mesh` and `synth`.
fn surface(v: &Volume32, iso: f64, weld_epsilon: Option<f64>) -> Result<Mesh> {
    let soup = marching_cubes(v, iso as f32).map_err(fail)?;
    let eps = weld_epsilon
        .map(|e| e as f32)
        .unwrap_or_else(|| default_weld_epsilon(v.spacing()));
    Ok(with_normals(weld(&soup, eps)))
}

fn report(m: &Mesh) -> usize {
    let labels = connected_components(m, &build_adjacency(m));
    println!(
        "vertices={} faces={} components={}",
        m.vertex_count(),
        m.face_count(),
        labels.count()
    );
    labels.count()
}

pub fn synth(a: SynthArgs) -> Result<()> {
    let spec = SyntheticSpec {
        kind: a.kind,
        count: a.count,
        radii_um: [a.radius_min, a.radius_max],
        dims: a.dims,
        spacing: a.spacing,
        noise_amplitude: a.noise,
        gap_um: a.gap,
        seed: a.seed,
    };
    let v: Volume32 = synthesize(&spec).map_err(fail)?;
    let output = a
        .output
        .unwrap_or(if a.out.extension().is_some_and(|e| e == "ply") {
            SynthOutput::Mesh
        } else {
            SynthOutput::Volume
        });
    match output {
        SynthOutput::Volume => {
            write_hvol(&v, &a.out).map_err(fail)?;
            let [nx, ny, nz] = v.dims();
            println!("volume {nx}x{ny}x{nz} written to {}", a.out.display());
        }
        SynthOutput::Mesh => {
            let m = surface(&v, a.iso, None)?;
            let labels = connected_components(&m, &build_adjacency(&m));
            let m = color_components(&m, &labels, None).map_err(fail)?;
            save_mesh(&m, &a.out).map_err(fail)?;
            report(&m);
        }
    }
    Ok(())
}

pub fn mesh(a: MeshArgs) -> Result<()> {
    let file = match &a.params {
        Some(p) => read_params(p)?,
        None => PipelineParams::default(),
    };
    let iso = a.iso.or(file.iso).unwrap_or(0.5);
    if !(iso > 0.0 && iso < 1.0) {
        return Err(format!("InvalidParams: iso must be in (0,1), got {iso}"));
    }
    let z_factor = a.z_factor.or(file.z_factor).unwrap_or(1);
    let close_radius = a.close_radius.or(file.close_radius).unwrap_or(0);
    let blur_sigma = a.blur_sigma.or(file.blur_sigma).unwrap_or(0.0);
    let weld_epsilon = a.weld_epsilon.or(file.weld_epsilon);

    let mut v: Volume32 = match &a.volume {
        Some(p) => read_hvol(p).map_err(|e| format!("{e} ({})", p.display()))?,
        None => {
            let (Some(pitch), Some(thickness)) = (a.pixel_pitch, a.thickness) else {
                return Err("InvalidParams: --images needs --pixel-pitch and --thickness".into());
            };
            load_stack(&expand_images(&a.images)?, pitch, thickness, a.channel).map_err(fail)?
        }
    };
    v = v.interpolate_z(z_factor).map_err(fail)?;
    if close_radius > 0 {
        v = apply_filter(
            &v,
            FilterSpec::Close {
                radius_vox: close_radius,
            },
        )
        .map_err(fail)?;
    }
    if blur_sigma > 0.0 {
        v = apply_filter(
            &v,
            FilterSpec::Blur {
                sigma_vox: blur_sigma,
            },
        )
        .map_err(fail)?;
    }
    if let Some(cache) = &a.cache {
        write_hvol(&v, cache).map_err(fail)?;
    }
    let mut m = surface(&v, iso, weld_epsilon)?;
    if a.color_components {
        let labels = connected_components(&m, &build_adjacency(&m));
        m = color_components(&m, &labels, None).map_err(fail)?;
    }
    save_mesh(&m, &a.out).map_err(fail)?;
    report(&m);
    Ok(())
}

fn load_with_normals(path: &Path) -> Result<Mesh> {
    let m: Mesh = load_mesh(path).map_err(fail)?;
    Ok(if m.normals.is_some() {
        m
    } else {
        with_normals(m)
    })
}

pub fn sdf(a: SdfArgs) -> Result<()> {
    let mut m = load_with_normals(&a.mesh)?;
    let config = SdfConfig {
        rays: a.rays,
        cone_half_angle_deg: a.cone,
    };
    let field = shape_diameter(&m, config).map_err(fail)?;
    let mut positive: Vec<f64> = field
        .values
        .iter()
        .map(|&v| v as f64)
        .filter(|&v| v > 0.0)
        .collect();
    positive.sort_by(f64::total_cmp);
    if positive.is_empty() {
        eprintln!("warning: no ray hit the mesh interior; all shape diameters are 0 (is the mesh closed?)");
        m.colors = vec![RAMP_RED; m.vertex_count()];
    } else {
        m.colors = sdf_to_colors(&field, a.lo, a.hi).map_err(fail)?;
    }
    save_mesh(&m, &a.out).map_err(fail)?;
    let zero = field.values.len() - positive.len();
    if positive.is_empty() {
        println!("sdf vertices={} zero={zero}", field.values.len());
    } else {
        let q = |p: f64| percentile(&positive, p).unwrap_or(0.0);
        println!(
            "sdf vertices={} zero={zero} p5={:.4} p25={:.4} p50={:.4} p75={:.4} p95={:.4}",
            field.values.len(),
            q(5.0),
            q(25.0),
            q(50.0),
            q(75.0),
            q(95.0)
        );
    }
    Ok(())
}

pub fn components(a: ComponentsArgs) -> Result<()> {
    let m: Mesh = load_mesh(&a.mesh).map_err(fail)?;
    let labels = connected_components(&m, &build_adjacency(&m));
    let coloured = color_components(&m, &labels, None).map_err(fail)?;
    save_mesh(&coloured, &a.out).map_err(fail)?;
    let sizes: Vec<String> = labels.sizes.iter().map(|s| s.to_string()).collect();
    println!("components={} sizes={}", labels.count(), sizes.join(","));
    Ok(())
}

pub fn export(a: ExportArgs) -> Result<()> {
    let state = ProjectState::load(&a.config).map_err(fail)?;
    let digest = state.export_to(&a.mesh, &a.out).map_err(fail)?;
    println!("sha256={digest}");
    Ok(())
}

pub fn serve(a: ServeArgs) -> Result<()> {
    let filter = tracing_subscriber::EnvFilter::try_new(&a.log_level)
        .map_err(|e| format!("InvalidParams: log level {:?}: {e}", a.log_level))?;
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();

    let runtime = tokio::runtime::Runtime::new().map_err(fail)?;
    runtime.block_on(async move {
        let listener = match tokio::net::TcpListener::bind(&a.bind).await {
            Ok(l) => l,
            Err(e) if e.kind() == std::io::ErrorKind::AddrInUse => {
                return Err(format!("PortBusy: {} is already in use", a.bind));
            }
            Err(e) => return Err(format!("IoFailure: cannot bind {}: {e}", a.bind)),
        };
        let config = a.config.clone();
        let state = tokio::task::spawn_blocking(move || ProjectState::load(config))
            .await
            .map_err(fail)?
            .map_err(fail)?;
        let addr = listener.local_addr().map_err(fail)?;
        println!("listening on {addr}");
        std::io::stdout().flush().ok();
        tracing::info!(%addr, project = %state.project.config.name, "serving");
        axum::serve(listener, router(Arc::new(state)))
            .with_graceful_shutdown(async {
                tokio::signal::ctrl_c().await.ok();
            })
            .await
            .map_err(|e| format!("IoFailure: {e}"))
    })
}
