//! Timing study over generated models of growing size.
//!
//! For each `(nodes, cf)` group a model is generated once and serialized to
//! XML. Each run then times the whole pipeline on that string: parse,
//! resolve, layout and build_scene. The clock stops when the scene graph is
//! complete; nothing is rendered on a GPU. One untimed warm-up run precedes
//! the measured runs of every group. Groups run one after another on the
//! calling thread.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;

use crate::generator::{generate, GenSpec, InvalidSpec};
use crate::layout::layout;
use crate::mapping::{resolve, MappingConfig, MappingKind, MappingTuple, VisualStyle};
use crate::parser::{parse, serialize};
use crate::scene::{build_scene, SceneOptions};

pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_ARGS: usize = 5;

/// `(2, 1), (4, 2), ..., (1024, 512)`.
pub fn default_ladder() -> Vec<(usize, usize)> {
    (1..=10).map(|k| (1usize << k, 1usize << (k - 1))).collect()
}

/// One tuple per generated attribute, up to five: `attr0`, `attr2` and
/// `attr4` are numeric, `attr1` and `attr3` text.
pub fn preset_config(args: usize) -> MappingConfig {
    let tuples = [
        (VisualStyle::ScaleX, MappingKind::relative()),
        (VisualStyle::PositionY, MappingKind::discrete()),
        (VisualStyle::ScaleY, MappingKind::relative()),
        (VisualStyle::PositionZ, MappingKind::discrete()),
        (VisualStyle::ScaleZ, MappingKind::discrete()),
    ];
    MappingConfig::new(
        tuples
            .into_iter()
            .take(args)
            .enumerate()
            .map(|(i, (style, mapping))| MappingTuple::new(style, format!("attr{i}"), mapping))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimes {
    pub parse_ms: f64,
    pub resolve_ms: f64,
    pub layout_ms: f64,
    pub scene_ms: f64,
}

impl StageTimes {
    pub fn total(&self) -> f64 {
        self.parse_ms + self.resolve_ms + self.layout_ms + self.scene_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupResult {
    pub nodes: usize,
    pub cf_elements: usize,
    /// Successful runs, equal to `raw_ms.len()`.
    pub runs: usize,
    pub mean_ms: f64,
    pub cov_pct: f64,
    pub raw_ms: Vec<f64>,
    /// Runs that hit an error; excluded from the statistics.
    pub failed_runs: usize,
    pub stages: StageTimes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub groups: Vec<GroupResult>,
    pub hardware_note: String,
    pub args: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BenchError {
    #[error("at least two runs per group are needed, got {0}")]
    TooFewRuns(usize),
    #[error(transparent)]
    Spec(#[from] InvalidSpec),
}

/// Arithmetic mean and sample coefficient of variation in percent.
pub fn mean_cov(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 || mean == 0.0 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, 100.0 * var.sqrt() / mean)
}

/// Least-squares line `y = a + b x`; returns `(a, b, r2)`.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    let syy: f64 = points.iter().map(|(_, y)| (y - my).powi(2)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let a = my - b * mx;
    let r2 = if sxx > 0.0 && syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (a, b, r2)
}

fn hardware_note() -> String {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let profile = if cfg!(debug_assertions) {
        "debug"
    } else {
        "release"
    };
    format!(
        "{}-{}, {threads} hardware threads, {profile} build, single-threaded runs",
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn run_once(xml: &str, config: &MappingConfig) -> Result<StageTimes, String> {
    let options = SceneOptions::default();
    let t = Instant::now();
    let (model, _) = parse(xml).map_err(|e| e.to_string())?;
    let parse_ms = ms(t);
    let t = Instant::now();
    let res = resolve(&model, config).map_err(|e| e.to_string())?;
    let resolve_ms = ms(t);
    let t = Instant::now();
    let l = layout(&model, &res).map_err(|e| e.to_string())?;
    let layout_ms = ms(t);
    let t = Instant::now();
    let scene = build_scene(&model, &l, config, &options).map_err(|e| e.to_string())?;
    let scene_ms = ms(t);
    std::hint::black_box(scene);
    Ok(StageTimes {
        parse_ms,
        resolve_ms,
        layout_ms,
        scene_ms,
    })
}

/// Times `runs` pipeline runs per size group.
pub fn run_benchmark(
    sizes: &[(usize, usize)],
    runs: usize,
    args: usize,
    seed: u64,
) -> Result<BenchReport, BenchError> {
    if runs < 2 {
        return Err(BenchError::TooFewRuns(runs));
    }
    let config = preset_config(args);
    let mut groups = Vec::with_capacity(sizes.len());
    for (g, &(nodes, cf)) in sizes.iter().enumerate() {
        let spec = GenSpec::new(nodes, cf, args, seed.wrapping_add(g as u64));
        let model = generate(&spec)?;
        let xml = serialize(&model).expect("generated models are block-structured");

        let _ = run_once(&xml, &config);
        let mut raw_ms = Vec::with_capacity(runs);
        let mut stage_sum = StageTimes::default();
        let mut failed_runs = 0;
        for _ in 0..runs {
            match run_once(&xml, &config) {
                Ok(t) => {
                    raw_ms.push(t.total());
                    stage_sum.parse_ms += t.parse_ms;
                    stage_sum.resolve_ms += t.resolve_ms;
                    stage_sum.layout_ms += t.layout_ms;
                    stage_sum.scene_ms += t.scene_ms;
                }
                Err(e) => {
                    log::error!("run failed for {nodes}N/{cf}C: {e}");
                    failed_runs += 1;
                }
            }
        }
        let (mean_ms, cov_pct) = mean_cov(&raw_ms);
        let k = raw_ms.len().max(1) as f64;
        log::info!("{nodes}N/{cf}C: mean {mean_ms:.3} ms, cov {cov_pct:.1}%");
        groups.push(GroupResult {
            nodes,
            cf_elements: cf,
            runs: raw_ms.len(),
            mean_ms,
            cov_pct,
            raw_ms,
            failed_runs,
            stages: StageTimes {
                parse_ms: stage_sum.parse_ms / k,
                resolve_ms: stage_sum.resolve_ms / k,
                layout_ms: stage_sum.layout_ms / k,
                scene_ms: stage_sum.scene_ms / k,
            },
        });
    }
    Ok(BenchReport {
        groups,
        hardware_note: hardware_note(),
        args,
        seed,
    })
}

impl BenchReport {
    /// Fit of mean time against node count over all groups.
    pub fn linear_fit(&self) -> (f64, f64, f64) {
        let points: Vec<(f64, f64)> = self
            .groups
            .iter()
            .filter(|g| g.mean_ms.is_finite())
            .map(|g| (g.nodes as f64, g.mean_ms))
            .collect();
        linear_fit(&points)
    }

    /// Plain-text report: a header, one row per group, the fit and a
    /// per-stage breakdown.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# pm3d pipeline benchmark");
        let _ = writeln!(s, "# hardware: {}", self.hardware_note);
        let _ = writeln!(s, "# arguments: {}, seed: {}", self.args, self.seed);
        let _ = writeln!(s, "nodes\tcf\truns\tmean_ms\tcov_pct\tfailed");
        for g in &self.groups {
            let _ = writeln!(
                s,
                "{}\t{}\t{}\t{:.4}\t{:.2}\t{}",
                g.nodes, g.cf_elements, g.runs, g.mean_ms, g.cov_pct, g.failed_runs
            );
        }
        let (a, b, r2) = self.linear_fit();
        let _ = writeln!(s, "# fit: mean_ms = {a:.6} + {b:.6} * nodes, r2 = {r2:.4}");
        let _ = writeln!(s, "# stages (mean ms)");
        let _ = writeln!(s, "nodes\tparse\tresolve\tlayout\tscene");
        for g in &self.groups {
            let t = &g.stages;
            let _ = writeln!(
                s,
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                g.nodes, t.parse_ms, t.resolve_ms, t.layout_ms, t.scene_ms
            );
        }
        s
    }
}
