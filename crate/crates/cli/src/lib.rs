//! Command-line driver for narrowcap.
//!
//! Exit codes: 0 success, 1 usage or I/O error, 2 a verification found a
//! violation, 3 a search or feasibility problem failed.

pub mod render;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use narrowcap::cloud::read_values_csv;
use narrowcap::constructors::{
    collapse_to_point, finite_exact_fit, multi_class_exact_fit, two_class_exact_fit,
};
use narrowcap::cosine::{cosine_fit, CosineFitProblem, DEFAULT_SHIFT_BUDGET};
use narrowcap::experiment::{
    generate_ball_dataset, layer_snapshots, snapshots_to_json, train, BallDatasetConfig,
    TrainConfig,
};
use narrowcap::geometry::SectorSearch;
use narrowcap::tolerance::init_from_env;
use narrowcap::verifier::{max_principle_check, uuac, BoxRegion, MaxPrincipleReport};
use narrowcap::{Error, LabeledDataset, Network, PointCloud};

pub use render::{render_svg, RenderSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_SEARCH_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "narrowcap",
    version,
    about = "Synthesize, train and verify narrow networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a network that collapses K to a point and fixes M.
    Collapse {
        #[arg(long)]
        k: PathBuf,
        #[arg(long)]
        m: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact fit of two sector-separated classes.
    FitTwoClass {
        #[arg(long)]
        k1: PathBuf,
        #[arg(long)]
        k2: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        a1: f64,
        #[arg(long, default_value_t = 0.0)]
        a2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        starts: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact fit of a labelled dataset whose classes are hyperplane-separable.
    FitMulti(FitData),
    /// Exact interpolation of finitely many labelled points.
    FitFinite(FitData),
    /// Width-1 cosine network approximating values on finitely many points.
    FitCos {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        targets: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_SHIFT_BUDGET)]
        budget: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare interior and boundary extrema of a scalar network on a box.
    VerifyMax {
        #[arg(long)]
        net: PathBuf,
        /// `lo,hi` for every axis, or `lo1:hi1,lo2:hi2,...` per axis.
        #[arg(long = "box", default_value = "0,1")]
        region: String,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
    },
    /// Train the ball experiment and write its artifacts.
    Experiment {
        #[arg(long, default_value_t = 6, value_parser = parse_balls)]
        balls: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Render a 2-D dataset, optionally shaded by a network's decisions.
    Render {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        net: Option<PathBuf>,
        #[arg(long)]
        title: Option<String>,
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        #[arg(long, default_value_t = 400)]
        size: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the data after every layer of a network.
    Snapshots {
        #[arg(long)]
        net: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Also render every planar stage as `stage_NN.svg` here.
        #[arg(long)]
        svg_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct FitData {
    /// CSV rows of coordinates followed by the target value.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn parse_balls(s: &str) -> Result<usize, String> {
    match s {
        "6" => Ok(6),
        "8" => Ok(8),
        _ => Err(format!("expected 6 or 8, got `{s}`")),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = init_from_env() {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_search_failure() {
                EXIT_SEARCH_FAILURE
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn write_net(net: &Network, path: &Path) -> narrowcap::Result<()> {
    net.write(path)?;
    println!(
        "network: width {}, depth {}, written to {}",
        net.width(),
        net.depth(),
        path.display()
    );
    Ok(())
}

fn labelled_union(parts: &[(&PointCloud, f64)]) -> narrowcap::Result<LabeledDataset> {
    let mut points = PointCloud::empty(parts[0].0.dim());
    let mut targets = Vec::new();
    for (cloud, value) in parts {
        points = points.union(cloud)?;
        targets.extend(std::iter::repeat_n(*value, cloud.len()));
    }
    LabeledDataset::new(points, targets)
}

fn parse_region(text: &str, dim: usize) -> narrowcap::Result<BoxRegion> {
    let bad = || Error::Precondition(format!("cannot parse box `{text}`"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    let (lower, upper): (Vec<f64>, Vec<f64>) = if text.contains(':') {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        for part in text.split(',') {
            let (a, b) = part.split_once(':').ok_or_else(bad)?;
            lo.push(num(a)?);
            hi.push(num(b)?);
        }
        (lo, hi)
    } else {
        let (a, b) = text.split_once(',').ok_or_else(bad)?;
        (vec![num(a)?; dim], vec![num(b)?; dim])
    };
    BoxRegion::new(DVector::from_vec(lower), DVector::from_vec(upper))
}

fn print_report(name: &str, r: &MaxPrincipleReport) {
    println!(
        "{name}: interior {:.6e}, boundary {:.6e}, tolerance {:.3e}, violated {}",
        r.interior_max, r.boundary_max, r.tolerance, r.violated
    );
    if let Some(w) = &r.witness {
        let coords: Vec<String> = w.iter().map(|v| format!("{v}")).collect();
        println!("{name} witness: {}", coords.join(","));
    }
}

fn execute(command: Command) -> narrowcap::Result<i32> {
    match command {
        Command::Collapse { k, m, eps, out } => {
            let (k, m) = (PointCloud::read(k)?, PointCloud::read(m)?);
            let res = collapse_to_point(&k, &m, eps)?;
            let point: Vec<String> = res.collapsed_point.iter().map(|v| format!("{v}")).collect();
            println!("collapsed point: {}", point.join(","));
            println!("epsilon: {}", res.epsilon);
            write_net(&res.network, &out)?;
        }
        Command::FitTwoClass {
            k1,
            k2,
            a1,
            a2,
            seed,
            starts,
            out,
        } => {
            let (k1, k2) = (PointCloud::read(k1)?, PointCloud::read(k2)?);
            let cert = SectorSearch { starts, seed }.run(&k1, &k2)?;
            let apex: Vec<String> = cert.apex().iter().map(|v| format!("{v}")).collect();
            println!("sector apex: {}", apex.join(","));
            let net = two_class_exact_fit(&k1, &k2, &cert, a1, a2)?;
            let data = labelled_union(&[(&k1, a1), (&k2, a2)])?;
            println!("UUAC {:e}", uuac(&net, &data)?);
            write_net(&net, &out)?;
        }
        Command::FitMulti(FitData { data, out }) => {
            let data = LabeledDataset::read(data)?;
            let components: Vec<(PointCloud, f64)> = data
                .split_by_class()
                .into_iter()
                .map(|(v, c)| (c, v))
                .collect();
            let net = multi_class_exact_fit(&components)?;
            println!("UUAC {:e}", uuac(&net, &data)?);
            write_net(&net, &out)?;
        }
        Command::FitFinite(FitData { data, out }) => {
            let data = LabeledDataset::read(data)?;
            let net = finite_exact_fit(data.points(), data.targets())?;
            println!("UUAC {:e}", uuac(&net, &data)?);
            write_net(&net, &out)?;
        }
        Command::FitCos {
            points,
            targets,
            eps,
            seed,
            budget,
            out,
        } => {
            let points = PointCloud::read(points)?;
            let targets = read_values_csv(&std::fs::read_to_string(targets)?)?;
            let data = LabeledDataset::new(points.clone(), targets.clone())?;
            let problem = CosineFitProblem::new(points, targets, eps)?;
            let res = cosine_fit(&problem, seed, budget)?;
            let net = res.network();
            println!("alpha {}", res.alpha);
            println!("W2 {}", res.w2);
            println!("UUAC {:e}", uuac(&net, &data)?);
            write_net(&net, &out)?;
        }
        Command::VerifyMax { net, region, step } => {
            let net = Network::read(net)?;
            let region = parse_region(&region, net.input_dim())?;
            let report = max_principle_check(&net, &region, step)?;
            print_report("maximum", &report.maximum);
            print_report("minimum", &report.minimum);
            if report.violated() {
                return Ok(EXIT_VIOLATION);
            }
        }
        Command::Experiment {
            balls,
            seed,
            epochs,
            out,
        } => {
            let dataset_config = if balls == 8 {
                BallDatasetConfig::eight_balls(seed)
            } else {
                BallDatasetConfig::six_balls(seed)
            };
            let data = generate_ball_dataset(&dataset_config)?;
            let mut config = TrainConfig::with_seed(seed);
            if let Some(epochs) = epochs {
                config.epochs = epochs;
            }
            let history = train(&config, &data)?;
            std::fs::create_dir_all(&out)?;
            data.write(out.join("dataset.csv"))?;
            std::fs::write(out.join("history.csv"), history.to_csv_string())?;
            history.final_net.write(out.join("network.json"))?;
            let snaps = layer_snapshots(&history.final_net, &data)?;
            std::fs::write(out.join("snapshots.json"), snapshots_to_json(&snaps))?;
            let meta = serde_json::json!({
                "balls": balls,
                "seed": seed,
                "epochs": config.epochs,
                "batch_size": config.batch_size,
                "learning_rate": config.learning_rate,
                "adam_beta1": config.adam_beta1,
                "adam_beta2": config.adam_beta2,
                "adam_eps": config.adam_eps,
                "hidden_widths": config.hidden_widths,
            });
            std::fs::write(out.join("config.json"), format!("{meta:#}\n"))?;
            let last = history.last();
            println!(
                "epoch {}: mse {:.6e}, UUAC {:.6e}",
                last.epoch, last.mse, last.uuac
            );
            println!("artifacts written to {}", out.display());
        }
        Command::Render {
            data,
            net,
            title,
            resolution,
            size,
            out,
        } => {
            let data = LabeledDataset::read(data)?;
            let net = net.map(Network::read).transpose()?;
            let clouds: Vec<(PointCloud, f64)> = data
                .split_by_class()
                .into_iter()
                .map(|(v, c)| (c, v))
                .collect();
            let spec = RenderSpec {
                title,
                grid_resolution: resolution,
                width_px: size,
                height_px: size,
                ..RenderSpec::fitted(&clouds)
            };
            std::fs::write(&out, render_svg(&clouds, &spec, net.as_ref())?)?;
        }
        Command::Snapshots {
            net,
            data,
            out,
            svg_dir,
        } => {
            let net = Network::read(net)?;
            let data = LabeledDataset::read(data)?;
            let snaps = layer_snapshots(&net, &data)?;
            std::fs::write(&out, snapshots_to_json(&snaps))?;
            if let Some(dir) = svg_dir {
                std::fs::create_dir_all(&dir)?;
                for (i, s) in snaps.iter().enumerate().filter(|(_, s)| s.is_planar()) {
                    let clouds: Vec<(PointCloud, f64)> =
                        s.classes.iter().map(|(v, c)| (c.clone(), *v)).collect();
                    let spec = RenderSpec {
                        title: Some(s.label.clone()),
                        ..RenderSpec::fitted(&clouds)
                    };
                    std::fs::write(
                        dir.join(format!("stage_{i:02}.svg")),
                        render_svg(&clouds, &spec, None)?,
                    )?;
                }
            }
            println!("{} snapshots written to {}", snaps.len(), out.display());
        }
    }
    Ok(EXIT_OK)
}
