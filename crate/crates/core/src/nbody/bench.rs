use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use crate::extents::ArrayExtents;
use crate::instrument::{FieldAccessCount, FieldAccessReport, Heatmap};
use crate::layout::LayoutSpec;
use crate::simd::Real;
use crate::view::View;
use crate::{Error, Result};

use super::{fill_view, initial_state, kernel, make_simulation, particle_schema, Precision, SimSpec};

pub const CSV_HEADER: &str = "layout,phase,simd_width,seconds_per_step,checksum";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchConfig {
    pub layout: String,
    pub n: usize,
    pub steps: usize,
    /// Untimed steps before measuring; they count towards the final state.
    pub warmup: usize,
    pub simd_width: usize,
    pub precision: Precision,
    pub seed: u64,
    pub trace_fields: bool,
    pub heatmap: Option<usize>,
    pub aosoa_nested: bool,
    pub report_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            layout: "aos-packed".into(),
            n: 16384,
            steps: 5,
            warmup: 1,
            simd_width: 1,
            precision: Precision::F32,
            seed: 42,
            trace_fields: false,
            heatmap: None,
            aosoa_nested: false,
            report_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub layout: String,
    pub phase: &'static str,
    pub simd_width: usize,
    pub seconds_per_step: f64,
    pub checksum: f64,
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{:e},{}", self.layout, self.phase, self.simd_width, self.seconds_per_step, self.checksum)
    }
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub rows: Vec<BenchRow>,
    pub checksum: f64,
    /// Field access tables for one update and one move step, when requested.
    pub trace: Option<(FieldAccessReport, FieldAccessReport)>,
    pub reports: Vec<PathBuf>,
}

impl BenchResult {
    pub fn csv(&self) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            s += &format!("{r}\n");
        }
        s
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}

/// Runs warmup and measured steps, timing update and move separately. Reported
/// times are medians over the measured steps.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchResult> {
    if !cfg.n.is_multiple_of(cfg.simd_width.max(1)) {
        return Err(Error::InvalidWidth(format!("n = {} is not a multiple of width {}", cfg.n, cfg.simd_width)));
    }
    let mut sim = make_simulation(&SimSpec {
        layout: cfg.layout.clone(),
        precision: cfg.precision,
        n: cfg.n,
        simd_width: cfg.simd_width,
        seed: cfg.seed,
        aosoa_nested: cfg.aosoa_nested,
    })?;
    for _ in 0..cfg.warmup {
        sim.step()?;
    }
    let (mut t_update, mut t_move) = (Vec::new(), Vec::new());
    for _ in 0..cfg.steps {
        let t = Instant::now();
        sim.update()?;
        t_update.push(t.elapsed().as_secs_f64());
        let t = Instant::now();
        sim.advance()?;
        t_move.push(t.elapsed().as_secs_f64());
    }
    let checksum = sim.checksum();
    let layout = if cfg.aosoa_nested { format!("{}/nested", cfg.layout) } else { cfg.layout.clone() };
    let row = |phase, times| BenchRow {
        layout: layout.clone(),
        phase,
        simd_width: cfg.simd_width,
        seconds_per_step: median(times),
        checksum,
    };
    let rows = vec![row("update", t_update), row("move", t_move)];

    let mut result = BenchResult { rows, checksum, trace: None, reports: Vec::new() };
    if cfg.trace_fields || cfg.heatmap.is_some() {
        match cfg.precision {
            Precision::F32 => instrumented::<f32>(cfg, &mut result)?,
            Precision::F64 => instrumented::<f64>(cfg, &mut result)?,
        }
    }
    Ok(result)
}

/// Field counts and heatmaps come from separate instrumented runs of one update
/// and one move step from the initial state, so timings stay uninstrumented.
fn instrumented<T: Real>(cfg: &BenchConfig, result: &mut BenchResult) -> Result<()> {
    let spec: LayoutSpec = cfg
        .layout
        .parse()
        .map_err(|_| Error::Parse(format!("instrumentation needs a library layout, got `{}`", cfg.layout)))?;
    let schema = particle_schema(cfg.precision);
    let ext = ArrayExtents::linear(cfg.n);
    let init = initial_state(cfg.n, cfg.seed);
    let dir = cfg.report_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)?;

    if cfg.trace_fields {
        let mut view = View::new(FieldAccessCount::new(spec.build(schema.clone(), ext.clone())?))?;
        fill_view::<_, T>(&mut view, &init);
        let counters = view.mapping().counters();
        counters.reset();
        kernel::update::<_, T>(&mut view, cfg.simd_width)?;
        let update = view.mapping().report();
        counters.reset();
        kernel::advance::<_, T>(&mut view, cfg.simd_width)?;
        let moved = view.mapping().report();
        for (name, report) in [("fields_update.csv", &update), ("fields_move.csv", &moved)] {
            let p = dir.join(name);
            fs::write(&p, report.to_csv())?;
            result.reports.push(p);
        }
        result.trace = Some((update, moved));
    }

    if let Some(g) = cfg.heatmap {
        let mut view = View::new(Heatmap::new(spec.build(schema, ext)?, g)?)?;
        fill_view::<_, T>(&mut view, &init);
        let counters = view.mapping().counters();
        counters.reset();
        kernel::update::<_, T>(&mut view, cfg.simd_width)?;
        kernel::advance::<_, T>(&mut view, cfg.simd_width)?;
        result.reports.extend(counters.write_csvs(&dir)?);
    }
    Ok(())
}
