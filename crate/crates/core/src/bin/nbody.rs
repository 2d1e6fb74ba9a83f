use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use recordlayout::nbody::{run_benchmark, BenchConfig, Precision, BASELINE_AOS, BASELINE_SOA};
use recordlayout::{Error, LayoutSpec};

/// All-pairs n-body benchmark over a selectable particle layout.
#[derive(Parser, Debug)]
#[command(name = "nbody", version)]
struct Args {
    /// Layout name (e.g. aos-packed, soa-mb, aosoa:8, bytesplit:soa-mb), baseline-aos or baseline-soa.
    #[arg(long, default_value = "aos-packed")]
    layout: String,
    /// Number of particles; must be a multiple of the SIMD width.
    #[arg(long, default_value_t = 16384)]
    n: usize,
    /// Measured steps.
    #[arg(long, default_value_t = 5)]
    steps: usize,
    /// Untimed steps before measuring.
    #[arg(long, default_value_t = 1)]
    warmup: usize,
    /// Particles per batch: 1, 2, 4, 8 or 16.
    #[arg(long, default_value_t = 1)]
    simd_width: usize,
    #[arg(long, default_value = "f32")]
    precision: Precision,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write per-field access counts of one update and one move step.
    #[arg(long)]
    trace_fields: bool,
    /// Write per-blob access heatmaps at this block size in bytes.
    #[arg(long, value_name = "GRAN")]
    heatmap: Option<usize>,
    /// Traverse AoSoA partners with nested block/lane loops.
    #[arg(long)]
    aosoa_nested: bool,
    /// CSV output file; rows are always printed to stdout.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Directory for trace and heatmap reports.
    #[arg(long, default_value = ".")]
    report_dir: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    if args.layout != BASELINE_AOS && args.layout != BASELINE_SOA {
        if let Err(e) = args.layout.parse::<LayoutSpec>() {
            eprintln!("error: invalid --layout: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = BenchConfig {
        layout: args.layout,
        n: args.n,
        steps: args.steps,
        warmup: args.warmup,
        simd_width: args.simd_width,
        precision: args.precision,
        seed: args.seed,
        trace_fields: args.trace_fields,
        heatmap: args.heatmap,
        aosoa_nested: args.aosoa_nested,
        report_dir: Some(args.report_dir),
    };
    let result = match run_benchmark(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            let usage = matches!(
                e,
                Error::Parse(_)
                    | Error::SelectorInvalid(_)
                    | Error::InvalidWidth(_)
                    | Error::InvalidBitCount(_)
                    | Error::InvalidSchema(_)
            );
            return ExitCode::from(if usage { 2 } else { 1 });
        }
    };
    let csv = result.csv();
    print!("{csv}");
    println!("checksum {:?}", result.checksum);
    if let Some((update, moved)) = &result.trace {
        println!("\nfield accesses, update step\n{update}");
        println!("field accesses, move step\n{moved}");
    }
    for p in &result.reports {
        eprintln!("wrote {}", p.display());
    }
    if let Some(path) = args.csv {
        if let Err(e) = fs::write(&path, csv) {
            eprintln!("error: writing {}: {e}", path.display());
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}
