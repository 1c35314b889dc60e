mod points_io;

use clap::{Parser, Subcommand};
use epsketch::bipartite::{self, BipartiteInstance};
use epsketch::rng::stream_tag;
use epsketch::sketch::{self, theta_shape_bits};
use epsketch::witness;
use epsketch::{classify_regime, encode_set, Error, PointSet, Result, RngStream, SketchFile};
use points_io::{read_points, write_points, PointsFormat};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "epsketch", version, about = "Additive-error distance sketches and related experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a point set into a sketch file
    Encode {
        /// Points file, CSV or binary
        points: PathBuf,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Skip the unit-ball norm check on input points
        #[arg(long)]
        assume_unit_ball: bool,
    },
    /// Query one pair from a sketch file
    Query {
        sketch: PathBuf,
        i: usize,
        j: usize,
    },
    /// Sweep (n, k, eps, seed) cells and emit one CSV row per cell
    Bench {
        /// Comma-separated point counts
        #[arg(long, value_delimiter = ',', required_unless_present = "sweep_file")]
        n: Vec<usize>,
        /// Comma-separated dimensions
        #[arg(long, value_delimiter = ',', required_unless_present = "sweep_file")]
        k: Vec<usize>,
        /// Comma-separated error targets
        #[arg(long, value_delimiter = ',', required_unless_present = "sweep_file")]
        eps: Vec<f64>,
        /// Comma-separated seeds
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seeds: Vec<u64>,
        /// CSV file of explicit cells "n,k,eps" (one per line), replacing
        /// the cross product of --n/--k/--eps
        #[arg(long)]
        sweep_file: Option<PathBuf>,
        /// Output CSV path; stdout when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce bipartite inner products to a lower dimension
    Bipartite {
        points_a: PathBuf,
        points_b: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Multiplier in the target-dimension formula
        #[arg(long, default_value_t = 4.0)]
        c: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_x: Option<PathBuf>,
        #[arg(long)]
        out_y: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = PointsFormat::Csv)]
        format: PointsFormat,
    },
    /// Build a separated net and test a random distinguishing set
    Lowerbound {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        eps: f64,
        /// Net size to build
        #[arg(long)]
        target: usize,
        /// Size of the random distinguishing set; defaults to target^2
        /// (half of the matched point count n = 2 |N|^2)
        #[arg(long)]
        r_count: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::DiagonalQuery(_)
                | Error::IndexOutOfRange { .. }
                | Error::InvalidParameter(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Encode { points, eps, seed, out, assume_unit_ball } => {
            let set = read_points(&points, assume_unit_ball)?;
            if set.len() < 2 {
                return Err(Error::InvalidParameter("need >= 2 points".into()));
            }
            let file = encode_set(&set, eps, seed)?;
            let mut w = BufWriter::new(File::create(&out)?);
            file.write_to(&mut w)?;
            w.flush()?;
            println!(
                "regime={} n={} k={} working_dim={} bits_per_point={:.2}",
                file.regime.name(),
                file.n,
                file.k_original,
                file.working_dim,
                file.bits_per_point()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Query { sketch, i, j } => {
            let file = SketchFile::read_from(&mut BufReader::new(File::open(&sketch)?))?;
            let q = file.decode_pair(i, j)?;
            println!("inner={:.9} dist_sq={:.9}", q.inner, q.dist_sq);
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench { n, k, eps, seeds, sweep_file, out } => {
            let cells = if let Some(path) = sweep_file {
                read_sweep_file(&path)?
            } else {
                let mut cells = Vec::new();
                for &ni in &n {
                    for &ki in &k {
                        for &ei in &eps {
                            cells.push((ni, ki, ei));
                        }
                    }
                }
                cells
            };
            let csv = run_bench(&cells, &seeds);
            match out {
                Some(path) => {
                    let mut w = BufWriter::new(File::create(&path)?);
                    w.write_all(csv.as_bytes())?;
                    w.flush()?;
                }
                None => print!("{csv}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bipartite { points_a, points_b, eps, c, seed, out_x, out_y, format } => {
            let a = read_points(&points_a, false)?;
            let b = read_points(&points_b, false)?;
            let inst = BipartiteInstance::new(a, b, eps, c)?;
            let result = bipartite::reduce(&inst, seed)?;
            println!(
                "t={} achieved_eps={:.6} retries={} c_scale={} max_x_norm={:.4}",
                result.t,
                result.achieved_eps,
                result.retries,
                result.c_scale_used,
                result.x_norms.iter().cloned().fold(0.0, f64::max)
            );
            if let Some(path) = out_x {
                write_points(&path, &result.x, format)?;
            }
            if let Some(path) = out_y {
                write_points(&path, &result.y, format)?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Lowerbound { k, delta, eps, target, r_count, seed } => {
            let net = match witness::build_separated_net(
                k,
                delta,
                target,
                RngStream::new(seed, stream_tag::BALL_SAMPLE),
            ) {
                Ok(net) => net,
                Err(Error::PatienceExhausted { achieved, target }) => {
                    // an experimental outcome, not a usage error
                    println!("net_size={achieved} target={target} status=patience_exhausted");
                    return Ok(ExitCode::SUCCESS);
                }
                Err(e) => return Err(e),
            };
            let r_count = r_count.unwrap_or(target * target);
            let r = witness::draw_r(k, r_count, RngStream::new(seed, stream_tag::BALL_SAMPLE | 1))?;
            let report = witness::verify_distinguishing(&net, &r, eps)?;
            let (wi, wj, wv) = report.worst_pair.unwrap_or((0, 0, 0.0));
            println!(
                "net_size={} r_count={} distinguished={} implied_bits={:.4} worst_pair=({},{},{:.6})",
                net.len(),
                r_count,
                report.distinguished,
                report.implied_bits,
                wi,
                wj,
                wv
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn read_sweep_file(path: &PathBuf) -> Result<Vec<(usize, usize, f64)>> {
    let content = std::fs::read_to_string(path)?;
    let mut cells = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        let bad = || {
            Error::InvalidParameter(format!(
                "{}:{}: expected \"n,k,eps\"",
                path.display(),
                lineno + 1
            ))
        };
        if parts.len() != 3 {
            return Err(bad());
        }
        let n = parts[0].parse().map_err(|_| bad())?;
        let k = parts[1].parse().map_err(|_| bad())?;
        let eps = parts[2].parse().map_err(|_| bad())?;
        cells.push((n, k, eps));
    }
    Ok(cells)
}

pub const BENCH_HEADER: &str = "n,k,eps,regime,bits_per_point,max_abs_error,violating_pairs,seed,wall_ms";

/// One row per (cell, seed). Cell failures become rows with regime=ERROR
/// and NaN metrics; the sweep always continues.
fn run_bench(cells: &[(usize, usize, f64)], seeds: &[u64]) -> String {
    let mut csv = String::from(BENCH_HEADER);
    csv.push('\n');
    for &(n, k, eps) in cells {
        for &seed in seeds {
            let start = Instant::now();
            let row = bench_cell(n, k, eps, seed);
            let wall_ms = start.elapsed().as_millis();
            match row {
                Ok((regime, bits, max_err, violating)) => {
                    csv.push_str(&format!(
                        "{n},{k},{eps},{regime},{bits:.3},{max_err:.6},{violating},{seed},{wall_ms}\n"
                    ));
                }
                Err(e) => {
                    eprintln!("cell n={n} k={k} eps={eps} seed={seed}: {e}");
                    csv.push_str(&format!("{n},{k},{eps},ERROR,NaN,NaN,0,{seed},{wall_ms}\n"));
                }
            }
        }
    }
    csv
}

fn bench_cell(n: usize, k: usize, eps: f64, seed: u64) -> Result<(&'static str, f64, f64, usize)> {
    let params = classify_regime(n, k, eps)?;
    let mut sampler = RngStream::new(seed, stream_tag::BALL_SAMPLE).sampler();
    let set = PointSet::new_unit_ball((0..n).map(|_| sampler.unit_ball_point(k)).collect())?;
    let (_, truth) = epsketch::gram_and_distances(&set);
    let file = encode_set(&set, eps, seed)?;
    let mut max_err = 0.0f64;
    let mut violating = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            let q = file.decode_pair(i, j)?;
            let err = (q.dist_sq - truth[i][j]).abs();
            max_err = max_err.max(err);
            if err > eps {
                violating += 1;
            }
        }
    }
    // keep the theta shape exercised so benches catch regressions there too
    debug_assert!(theta_shape_bits(&params) > 0.0);
    let _ = sketch::sketch_bits_budget(&params);
    Ok((params.regime.name(), file.bits_per_point(), max_err, violating))
}
