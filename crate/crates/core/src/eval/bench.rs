use std::fmt::Write as _;
use std::time::Instant;

use crate::features::extract_features;
use crate::flow::{lucas_kanade, LkParams, SamplePattern};
use crate::imaging::{build_pyramid, GrayImage, Pyramid};
use crate::learn::Model;
use crate::nav::NavDecision;
use crate::sim::{render, step, CameraPose, SimConfig, World};

use super::EvalError;

#[derive(Debug, Clone, PartialEq)]
pub struct StageTiming {
    pub name: &'static str,
    /// Mean wall-clock milliseconds per processed frame pair.
    pub mean_ms: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub stages: Vec<StageTiming>,
    /// Mean end-to-end milliseconds per frame pair.
    pub total_ms: f64,
    pub fps: f64,
    pub pairs: usize,
}

impl BenchReport {
    pub fn stage_sum_ms(&self) -> f64 {
        self.stages.iter().map(|s| s.mean_ms).sum()
    }

    /// `stage,mean_ms,fps` rows, one per stage plus `total`.
    pub fn to_csv(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            out.push_str(c);
            out.push('\n');
        }
        out.push_str("stage,mean_ms,fps\n");
        for s in &self.stages {
            let _ = writeln!(out, "{},{:.4},{:.2}", s.name, s.mean_ms, 1000.0 / s.mean_ms);
        }
        let _ = writeln!(out, "total,{:.4},{:.2}", self.total_ms, self.fps);
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("{:<10} {:>10} {:>10}\n", "stage", "mean_ms", "share");
        for s in &self.stages {
            let _ = writeln!(
                out,
                "{:<10} {:>10.3} {:>9.1}%",
                s.name,
                s.mean_ms,
                100.0 * s.mean_ms / self.total_ms
            );
        }
        let _ = writeln!(out, "{:<10} {:>10.3}   ({:.2} FPS over {} pairs)", "total", self.total_ms, self.fps, self.pairs);
        out
    }
}

struct Stopwatch {
    names: Vec<&'static str>,
    acc: Vec<f64>,
}

impl Stopwatch {
    fn new(names: &[&'static str]) -> Self {
        Self {
            names: names.to_vec(),
            acc: vec![0.0; names.len()],
        }
    }

    fn time<T>(&mut self, stage: usize, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.acc[stage] += t.elapsed().as_secs_f64() * 1e3;
        out
    }

    fn report(self, pairs: usize, wall_ms: f64) -> BenchReport {
        let n = pairs as f64;
        let total_ms = wall_ms / n;
        BenchReport {
            stages: self
                .names
                .iter()
                .zip(&self.acc)
                .map(|(name, ms)| StageTiming {
                    name,
                    mean_ms: ms / n,
                })
                .collect(),
            total_ms,
            fps: 1000.0 / total_ms,
            pairs,
        }
    }
}

/// Times the processing chain (pyramid of the new frame, flow, features,
/// prediction) over consecutive pairs of already-loaded frames, repeated
/// `repetitions` times. Single-threaded; file I/O is not included.
pub fn bench_throughput(
    frames: &[GrayImage],
    pattern: &SamplePattern,
    lk: &LkParams,
    model: &dyn Model,
    repetitions: usize,
) -> Result<BenchReport, EvalError> {
    if frames.len() < 2 {
        return Err(EvalError::TooFewFrames(frames.len()));
    }
    lk.validate()?;
    let mut sw = Stopwatch::new(&["pyramid", "flow", "features", "predict"]);
    let mut pairs = 0;
    let wall = Instant::now();
    for _ in 0..repetitions.max(1) {
        let mut prev: Pyramid = sw.time(0, || build_pyramid(&frames[0], lk.pyramid_levels))?;
        for frame in &frames[1..] {
            let next = sw.time(0, || build_pyramid(frame, lk.pyramid_levels))?;
            let field = sw.time(1, || lucas_kanade(&prev, &next, pattern, lk))?;
            let fv = sw.time(2, || extract_features(&field));
            sw.time(3, || model.predict(fv.values()))?;
            prev = next;
            pairs += 1;
        }
    }
    let wall_ms = wall.elapsed().as_secs_f64() * 1e3;
    Ok(sw.report(pairs, wall_ms))
}

/// Full work cycle with simulator rendering standing in for image capture:
/// render, pyramid, flow, features, predict, then a forward step.
pub fn bench_full_cycle(
    world: &World,
    cfg: &SimConfig,
    pattern: &SamplePattern,
    lk: &LkParams,
    model: &dyn Model,
    cycles: usize,
) -> Result<BenchReport, EvalError> {
    if cycles < 1 {
        return Err(EvalError::TooFewFrames(cycles));
    }
    lk.validate()?;
    let mut sw = Stopwatch::new(&["render", "pyramid", "flow", "features", "predict"]);
    let mut pose = CameraPose::new(0.0, 0.0, 0.0);
    let wall = Instant::now();
    let first = sw.time(0, || render(world, &pose, cfg));
    let mut prev = sw.time(1, || build_pyramid(&first, lk.pyramid_levels))?;
    for _ in 0..cycles {
        pose = step(&pose, NavDecision::Forward, cfg);
        let frame = sw.time(0, || render(world, &pose, cfg));
        let next = sw.time(1, || build_pyramid(&frame, lk.pyramid_levels))?;
        let field = sw.time(2, || lucas_kanade(&prev, &next, pattern, lk))?;
        let fv = sw.time(3, || extract_features(&field));
        sw.time(4, || model.predict(fv.values()))?;
        prev = next;
    }
    let wall_ms = wall.elapsed().as_secs_f64() * 1e3;
    Ok(sw.report(cycles, wall_ms))
}
