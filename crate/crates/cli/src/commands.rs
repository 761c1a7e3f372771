use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use salfuse::batch::map_ordered;
use salfuse::dataset::{discover, load_gray, save_gray, Sample, SampleSet};
use salfuse::fusion::{align_branches, fuse, positive_feedback_fuse, FusionConfig};
use salfuse::imagecore::GrayImage;
use salfuse::metrics::{aggregate_report, evaluate_sample, MetricReport, SampleMetrics};

use crate::config::{Command, RunConfig};
use crate::report::{pr_csv, report_csv, short_decimal, trace_log};
use crate::CliError;

/// Extension of fused maps written by `fuse` and `ablate`.
pub const OUTPUT_EXTENSION: &str = "png";

/// A sample that could not be processed in non-strict mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Failure {
    pub sample_id: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FuseSummary {
    pub processed: usize,
    pub mean_iterations: f64,
    pub non_converged: usize,
    pub failures: Vec<Failure>,
    pub skipped: usize,
}

impl FuseSummary {
    pub fn line(&self) -> String {
        format!(
            "processed {} samples, mean iterations {:.2}, non-converged {}, failed {}, skipped {}",
            self.processed,
            self.mean_iterations,
            self.non_converged,
            self.failures.len(),
            self.skipped
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalSummary {
    pub report: MetricReport,
    pub failures: Vec<Failure>,
    pub unpaired: Vec<String>,
}

impl EvalSummary {
    pub fn line(&self) -> String {
        let d = &self.report.dataset;
        format!(
            "mae_mean {}  max_f {}  sm_mean {}",
            short_decimal(d.mae_mean),
            short_decimal(d.max_f),
            short_decimal(d.sm_mean)
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub images: usize,
    pub total: Duration,
    pub latencies: Vec<Duration>,
    pub iterations: Vec<usize>,
}

impl BenchReport {
    pub fn images_per_second(&self) -> f64 {
        self.images as f64 / self.total.as_secs_f64()
    }

    pub fn mean_latency(&self) -> Duration {
        self.latencies.iter().sum::<Duration>() / self.latencies.len().max(1) as u32
    }

    fn sorted(&self) -> Vec<Duration> {
        let mut v = self.latencies.clone();
        v.sort();
        v
    }

    pub fn median_latency(&self) -> Duration {
        let v = self.sorted();
        match v.len() {
            0 => Duration::ZERO,
            n if n % 2 == 1 => v[n / 2],
            n => (v[n / 2 - 1] + v[n / 2]) / 2,
        }
    }

    /// Nearest-rank 95th percentile.
    pub fn p95_latency(&self) -> Duration {
        let v = self.sorted();
        if v.is_empty() {
            return Duration::ZERO;
        }
        let rank = (0.95 * v.len() as f64).ceil() as usize;
        v[rank.clamp(1, v.len()) - 1]
    }

    pub fn mean_iterations(&self) -> f64 {
        self.iterations.iter().sum::<usize>() as f64 / self.iterations.len().max(1) as f64
    }

    pub fn lines(&self) -> String {
        let ms = |d: Duration| d.as_secs_f64() * 1e3;
        format!(
            "images {}\nimages/second {:.2}\nlatency mean {:.3} ms  median {:.3} ms  p95 {:.3} ms\nmean iterations {:.2}",
            self.images,
            self.images_per_second(),
            ms(self.mean_latency()),
            ms(self.median_latency()),
            ms(self.p95_latency()),
            self.mean_iterations()
        )
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn discover_for(config: &RunConfig, gt: bool) -> Result<SampleSet, CliError> {
    let gt_dir = if gt { config.gt_dir.as_deref() } else { None };
    let set = discover(&config.branch_dirs, gt_dir)?;
    for s in &set.skipped {
        let missing: Vec<String> = s
            .missing_from
            .iter()
            .map(|&i| config.branch_dirs[i].display().to_string())
            .collect();
        eprintln!("skipped {}: missing from {}", s.stem, missing.join(", "));
    }
    if config.strict {
        set.validate()?;
    }
    Ok(set)
}

fn load_branches(sample: &Sample) -> salfuse::Result<Vec<GrayImage>> {
    let maps = sample
        .branch_paths
        .iter()
        .map(load_gray)
        .collect::<salfuse::Result<Vec<_>>>()?;
    align_branches(maps)
}

/// Splits per-sample results into successes and failures; in strict mode the
/// first failure (in sample order) aborts.
fn partition<T>(
    samples: &[Sample],
    results: Vec<Result<T, CliError>>,
    strict: bool,
) -> Result<(Vec<T>, Vec<Failure>), CliError> {
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (sample, result) in samples.iter().zip(results) {
        match result {
            Ok(v) => ok.push(v),
            Err(e) if strict => {
                return Err(CliError::Sample {
                    sample_id: sample.sample_id.clone(),
                    source: Box::new(e),
                })
            }
            Err(e) => {
                eprintln!("failed {}: {e}", sample.sample_id);
                failures.push(Failure {
                    sample_id: sample.sample_id.clone(),
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok((ok, failures))
}

fn run_fusion(config: &RunConfig) -> Result<FuseSummary, CliError> {
    config.check()?;
    let out = config.require_out()?.clone();
    let fusion = config.fusion();
    let set = discover_for(config, false)?;
    let write_trace = config.trace && config.command == Command::Fuse;

    let results = map_ordered(&set.samples, config.parallelism, |sample| {
        let branches = load_branches(sample)?;
        let fused = fuse(&branches, &fusion)?;
        let path = out.join(format!("{}.{OUTPUT_EXTENSION}", sample.sample_id));
        save_gray(&fused.map, &path)?;
        if let (true, Some(trace)) = (write_trace, &fused.trace) {
            let log = out.join("trace").join(format!("{}.log", sample.sample_id));
            write_file(&log, &trace_log(&sample.sample_id, trace))?;
        }
        Ok(fused.trace)
    });
    let (traces, failures) = partition(&set.samples, results, config.strict)?;

    let processed = traces.len();
    let (iterations, non_converged) = traces
        .iter()
        .map(|t| match t {
            Some(t) => (t.iterations, usize::from(!t.converged)),
            None => (0, 0),
        })
        .fold((0, 0), |(i, n), (a, b)| (i + a, n + b));
    Ok(FuseSummary {
        processed,
        mean_iterations: if processed > 0 {
            iterations as f64 / processed as f64
        } else {
            0.0
        },
        non_converged,
        failures,
        skipped: set.skipped.len(),
    })
}

/// Feedback fusion of every sample; writes `<out>/<stem>.png` and, with
/// `trace`, `<out>/trace/<stem>.log`.
pub fn cmd_fuse(config: &RunConfig) -> Result<FuseSummary, CliError> {
    expect_command(config, Command::Fuse)?;
    run_fusion(config)
}

/// Additive fusion of every sample; writes `<out>/<stem>.png`.
pub fn cmd_ablate(config: &RunConfig) -> Result<FuseSummary, CliError> {
    expect_command(config, Command::Ablate)?;
    run_fusion(config)
}

/// Scores one prediction directory against ground truth and writes
/// `report.csv` and `pr.csv` into the output directory.
pub fn cmd_eval(config: &RunConfig) -> Result<EvalSummary, CliError> {
    expect_command(config, Command::Eval)?;
    config.check()?;
    let out = config.require_out()?.clone();
    let set = discover_for(config, true)?;

    let unpaired: Vec<String> = set.unpaired().map(|s| s.sample_id.clone()).collect();
    for id in &unpaired {
        eprintln!("unpaired {id}: no ground truth");
    }
    if config.strict && !unpaired.is_empty() {
        return Err(CliError::Usage(format!(
            "{} predictions have no ground truth",
            unpaired.len()
        )));
    }
    let paired: Vec<Sample> = set
        .samples
        .iter()
        .filter(|s| s.gt_path.is_some())
        .cloned()
        .collect();
    if paired.is_empty() {
        return Err(CliError::Usage(
            "no prediction has a matching ground-truth file".into(),
        ));
    }

    let results = map_ordered(&paired, config.parallelism, |sample| -> Result<SampleMetrics, CliError> {
        let pred = load_gray(&sample.branch_paths[0])?;
        let gt = load_gray(sample.gt_path.as_ref().expect("paired"))?;
        Ok(evaluate_sample(&sample.sample_id, &pred, &gt)?)
    });
    let (metrics, failures) = partition(&paired, results, config.strict)?;
    let report = aggregate_report(&metrics, config.beta_squared)?;

    write_file(&out.join("report.csv"), &report_csv(&report))?;
    write_file(&out.join("pr.csv"), &pr_csv(&report))?;
    Ok(EvalSummary {
        report,
        failures,
        unpaired,
    })
}

/// Loads every sample, then times the feedback fusion alone.
pub fn cmd_bench(config: &RunConfig) -> Result<BenchReport, CliError> {
    expect_command(config, Command::Bench)?;
    config.check()?;
    let set = discover_for(config, false)?;
    let loaded = map_ordered(&set.samples, config.parallelism, |s| {
        load_branches(s).map_err(CliError::from)
    });
    let (inputs, _failures) = partition(&set.samples, loaded, config.strict)?;
    if inputs.is_empty() {
        return Err(CliError::Usage("no sample could be loaded".into()));
    }
    let report = bench_fusion(&inputs, &config.fusion(), config.parallelism)?;

    if let Some(out) = &config.out_dir {
        let mut csv = String::from("sample_id,latency_ms,iterations\n");
        let ids = set.samples.iter().map(|s| &s.sample_id);
        for ((id, d), it) in ids.zip(&report.latencies).zip(&report.iterations) {
            csv.push_str(&format!("{id},{:.6},{it}\n", d.as_secs_f64() * 1e3));
        }
        write_file(&out.join("bench.csv"), &csv)?;
    }
    Ok(report)
}

/// Times `positive_feedback_fuse` over in-memory branch sets.
pub fn bench_fusion(
    inputs: &[Vec<GrayImage>],
    fusion: &FusionConfig,
    jobs: usize,
) -> Result<BenchReport, CliError> {
    let start = Instant::now();
    let timed = map_ordered(inputs, jobs, |branches| {
        let t = Instant::now();
        positive_feedback_fuse(branches, fusion).map(|(_, trace)| (t.elapsed(), trace.iterations))
    });
    let total = start.elapsed();
    let timed = timed.into_iter().collect::<salfuse::Result<Vec<_>>>()?;
    Ok(BenchReport {
        images: timed.len(),
        total,
        latencies: timed.iter().map(|t| t.0).collect(),
        iterations: timed.iter().map(|t| t.1).collect(),
    })
}

fn expect_command(config: &RunConfig, want: Command) -> Result<(), CliError> {
    if config.command == want {
        Ok(())
    } else {
        Err(CliError::Usage(format!(
            "configuration is for {:?}, not {want:?}",
            config.command
        )))
    }
}

/// Outcome of a full command run, for the binary to print.
pub enum Outcome {
    Fused(FuseSummary),
    Evaluated(EvalSummary),
    Benched(BenchReport),
}

pub fn run(config: &RunConfig) -> Result<Outcome, CliError> {
    Ok(match config.command {
        Command::Fuse => Outcome::Fused(cmd_fuse(config)?),
        Command::Ablate => Outcome::Fused(cmd_ablate(config)?),
        Command::Eval => Outcome::Evaluated(cmd_eval(config)?),
        Command::Bench => Outcome::Benched(cmd_bench(config)?),
    })
}

/// Output paths written for a sample by `fuse`/`ablate`.
pub fn fused_path(out: &Path, sample_id: &str) -> PathBuf {
    out.join(format!("{sample_id}.{OUTPUT_EXTENSION}"))
}
