//! `otgi`: every pipeline stage as a subcommand. Artifacts go to the paths
//! given on the command line, logs to stderr. Failures print one JSON line
//! on stderr and exit with 2 (usage), 3 (bad data) or 4 (no convergence).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde_json::json;

use otgi::extract::extract_mesh;
use otgi::image::{build_mipmap, load_image, rasterize, save_image};
use otgi::mesh::{load_mesh, save_obj};
use otgi::metrics::{compare_meshes, DEFAULT_SAMPLES, DEFAULT_SEED};
use otgi::ot::write_log_csv;
use otgi::pipeline::{format_table, level_report, parameterize, ParamOptions, Scheme};
use otgi::{Error, ErrorKind, ParamMap};

#[derive(Parser)]
#[command(name = "otgi", version, about = "Area-preserving geometry images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map a disk or closed genus-0 mesh onto the unit square.
    Param {
        mesh: PathBuf,
        /// UV table to write.
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value = "ot")]
        scheme: Scheme,
        /// Four boundary vertices for (0,0), (1,0), (1,1), (0,1).
        #[arg(long, value_delimiter = ',', num_args = 4)]
        corners: Option<Vec<usize>>,
        /// Gradient tolerance of the transport solve.
        #[arg(long, default_value_t = 1e-6)]
        eps: f64,
        /// Where to write the mesh the map belongs to. Required when the
        /// input is closed and has to be cut open.
        #[arg(long)]
        mesh_out: Option<PathBuf>,
        /// Newton log of the transport solve as CSV.
        #[arg(long)]
        ot_log: Option<PathBuf>,
    },
    /// Sample positions and normals into 16-bit PNGs plus a JSON sidecar.
    Rasterize {
        mesh: PathBuf,
        uv: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1024)]
        res: usize,
    },
    /// Write every pyramid level as `<prefix>_l<level>.png`.
    Mipmap {
        image: PathBuf,
        /// Output prefix; defaults to the input path without `.png`.
        #[arg(short, long)]
        prefix: Option<PathBuf>,
    },
    /// Rebuild a triangle mesh from a geometry image.
    Extract {
        image: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Chamfer and Hausdorff distances between two meshes, as JSON.
    Eval {
        truth: PathBuf,
        candidate: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Also write the JSON here.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Per-level compression and error table for a pyramid, finest first.
    Report {
        truth: PathBuf,
        #[arg(required = true)]
        levels: Vec<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Rows as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn write(path: &Path, bytes: &[u8]) -> otgi::Result<()> {
    fs::write(path, bytes).map_err(|e| Error::Invalid(format!("cannot write {}: {e}", path.display())))
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json values always serialize")
}

fn run(command: Command) -> otgi::Result<()> {
    match command {
        Command::Param {
            mesh,
            out,
            scheme,
            corners,
            eps,
            mesh_out,
            ot_log,
        } => {
            let input = load_mesh(&mesh)?;
            let mut opts = ParamOptions {
                scheme,
                corners: corners.map(|c| [c[0], c[1], c[2], c[3]]),
                ..ParamOptions::default()
            };
            opts.ot.tolerance = eps;
            let p = parameterize(&input, &opts)?;
            let cut = p.mesh.vertex_count() != input.vertex_count();
            match &mesh_out {
                Some(path) => save_obj(&p.mesh, path)?,
                None if cut => {
                    return Err(Error::Invalid(
                        "the input was cut open to a disk; pass --mesh-out to keep the cut mesh".into(),
                    ))
                }
                None => {}
            }
            p.map.save(&out)?;
            if let (Some(path), Some(sol)) = (&ot_log, &p.ot) {
                let mut buf = Vec::new();
                write_log_csv(&sol.log, &mut buf).map_err(|e| Error::Invalid(e.to_string()))?;
                write(path, &buf)?;
            }
            let summary = json!({
                "scheme": scheme.to_string(),
                "vertices": p.mesh.vertex_count(),
                "corners": p.map.corners,
                "ricci_iterations": p.ricci.as_ref().map(|r| r.iterations()),
                "ricci_residual": p.ricci.as_ref().map(|r| r.residual),
                "ot_iterations": p.ot.as_ref().map(|s| s.log.len() - 1),
                "ot_grad_norm": p.ot.as_ref().map(|s| s.grad_norm()),
            });
            println!("{}", pretty(&summary));
        }
        Command::Rasterize { mesh, uv, out, res } => {
            let m = load_mesh(&mesh)?;
            let map = ParamMap::load(&uv)?;
            let source = mesh.file_name().map_or(String::new(), |s| s.to_string_lossy().into_owned());
            let img = rasterize(&m, &map, res, &source)?;
            save_image(&img, &out)?;
            info!("wrote {}x{res} geometry image to {}", res, out.display());
        }
        Command::Mipmap { image, prefix } => {
            let base = load_image(&image)?;
            let prefix = prefix.unwrap_or_else(|| image.with_extension(""));
            for level in build_mipmap(&base) {
                let mut name = prefix.clone().into_os_string();
                name.push(format!("_l{}.png", level.meta.level));
                let path = PathBuf::from(name);
                save_image(&level, &path)?;
                println!("{}", path.display());
            }
        }
        Command::Extract { image, out } => {
            let img = load_image(&image)?;
            let mesh = extract_mesh(&img)?;
            save_obj(&mesh, &out)?;
            info!("{} vertices, {} faces", mesh.vertex_count(), mesh.face_count());
        }
        Command::Eval {
            truth,
            candidate,
            samples,
            seed,
            out,
        } => {
            let a = load_mesh(&truth)?;
            let b = load_mesh(&candidate)?;
            let d = compare_meshes(&a, &b, samples, seed)?;
            let value = json!({
                "chamfer": d.chamfer,
                "hausdorff": d.hausdorff,
                "samples": samples,
                "seed": seed,
            });
            let text = pretty(&value);
            if let Some(path) = out {
                write(&path, format!("{text}\n").as_bytes())?;
            }
            println!("{text}");
        }
        Command::Report {
            truth,
            levels,
            samples,
            seed,
            json,
        } => {
            let t = load_mesh(&truth)?;
            let images = levels.iter().map(load_image).collect::<otgi::Result<Vec<_>>>()?;
            let rows = level_report(&t, &images, samples, seed)?;
            print!("{}", format_table(&rows));
            if let Some(path) = json {
                let text = serde_json::to_string_pretty(&rows).map_err(|e| Error::Invalid(e.to_string()))?;
                write(&path, format!("{text}\n").as_bytes())?;
            }
        }
    }
    Ok(())
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", e.to_string().trim(), 2),
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.kind() {
            ErrorKind::Usage => fail("usage", &e.to_string(), 2),
            ErrorKind::Data => fail("data", &e.to_string(), 3),
            ErrorKind::Convergence => fail("convergence", &e.to_string(), 4),
        },
    }
}
