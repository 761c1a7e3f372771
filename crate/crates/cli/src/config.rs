use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use salfuse::batch::default_jobs;
use salfuse::fusion::{FusionConfig, FusionMode};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Fuse,
    Ablate,
    Eval,
    Bench,
}

/// Everything a command needs, already validated by [`RunConfig::check`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub branch_dirs: Vec<PathBuf>,
    pub gt_dir: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub epsilon: f64,
    pub max_iterations: usize,
    pub beta_squared: f64,
    pub parallelism: usize,
    pub strict: bool,
    pub trace: bool,
}

impl RunConfig {
    pub fn new(command: Command, branch_dirs: Vec<PathBuf>) -> Self {
        let fusion = FusionConfig::default();
        Self {
            command,
            branch_dirs,
            gt_dir: None,
            out_dir: None,
            epsilon: fusion.epsilon,
            max_iterations: fusion.max_iterations,
            beta_squared: fusion.beta_squared,
            parallelism: default_jobs(),
            strict: false,
            trace: false,
        }
    }

    pub fn fusion(&self) -> FusionConfig {
        FusionConfig {
            epsilon: self.epsilon,
            max_iterations: self.max_iterations,
            beta_squared: self.beta_squared,
            mode: match self.command {
                Command::Ablate => FusionMode::Additive,
                _ => FusionMode::PositiveFeedback,
            },
        }
    }

    pub fn check(&self) -> Result<(), CliError> {
        self.fusion().validate()?;
        if self.branch_dirs.is_empty() {
            return Err(CliError::Usage("at least one --branch is required".into()));
        }
        if self.parallelism == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        match self.command {
            Command::Eval => {
                if self.branch_dirs.len() != 1 {
                    return Err(CliError::Usage(
                        "eval takes exactly one prediction directory as --branch".into(),
                    ));
                }
                if self.gt_dir.is_none() {
                    return Err(CliError::Usage("eval requires --gt".into()));
                }
                self.require_out()?;
            }
            Command::Fuse | Command::Ablate => {
                self.require_out()?;
            }
            Command::Bench => {}
        }
        Ok(())
    }

    pub(crate) fn require_out(&self) -> Result<&PathBuf, CliError> {
        self.out_dir
            .as_ref()
            .ok_or_else(|| CliError::Usage("--out is required".into()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "salfuse", version, about = "Fuse and evaluate salient object detection maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Fuse branch maps with F-measure feedback weighting.
    Fuse(RunArgs),
    /// Fuse branch maps by plain pixel-wise addition.
    Ablate(RunArgs),
    /// Score one prediction directory against ground truth.
    Eval(RunArgs),
    /// Time the feedback fusion alone on in-memory maps.
    Bench(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Branch (or prediction) directory; repeat in branch order.
    #[arg(long = "branch", value_name = "DIR", required = true)]
    pub branches: Vec<PathBuf>,

    /// Ground-truth directory.
    #[arg(long, value_name = "DIR")]
    pub gt: Option<PathBuf>,

    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, default_value_t = 0.95)]
    pub epsilon: f64,

    #[arg(long = "max-iters", default_value_t = 50)]
    pub max_iters: usize,

    #[arg(long = "beta2", default_value_t = 0.3)]
    pub beta2: f64,

    /// Worker count (default: logical cores).
    #[arg(long)]
    pub jobs: Option<usize>,

    /// Abort on the first per-image failure.
    #[arg(long)]
    pub strict: bool,

    /// Write a per-image iteration log under <out>/trace/.
    #[arg(long)]
    pub trace: bool,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> Self {
        let (command, args) = match cli.command {
            CliCommand::Fuse(a) => (Command::Fuse, a),
            CliCommand::Ablate(a) => (Command::Ablate, a),
            CliCommand::Eval(a) => (Command::Eval, a),
            CliCommand::Bench(a) => (Command::Bench, a),
        };
        RunConfig {
            command,
            branch_dirs: args.branches,
            gt_dir: args.gt,
            out_dir: args.out,
            epsilon: args.epsilon,
            max_iterations: args.max_iters,
            beta_squared: args.beta2,
            parallelism: args.jobs.unwrap_or_else(default_jobs),
            strict: args.strict,
            trace: args.trace && command == Command::Fuse,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> RunConfig {
        Cli::try_parse_from(args).unwrap().into()
    }

    #[test]
    fn parses_repeated_branches_in_order() {
        let cfg = parse(&[
            "salfuse", "fuse", "--branch", "b2", "--branch", "b1", "--out", "o", "--epsilon",
            "0.9", "--max-iters", "7", "--beta2", "1", "--jobs", "3", "--strict", "--trace",
        ]);
        assert_eq!(cfg.command, Command::Fuse);
        assert_eq!(cfg.branch_dirs, vec![PathBuf::from("b2"), PathBuf::from("b1")]);
        assert_eq!((cfg.epsilon, cfg.max_iterations, cfg.beta_squared), (0.9, 7, 1.0));
        assert_eq!(cfg.parallelism, 3);
        assert!(cfg.strict && cfg.trace);
        cfg.check().unwrap();
    }

    #[test]
    fn defaults() {
        let cfg = parse(&["salfuse", "bench", "--branch", "a"]);
        assert_eq!((cfg.epsilon, cfg.max_iterations, cfg.beta_squared), (0.95, 50, 0.3));
        assert_eq!(cfg.parallelism, default_jobs());
        assert!(!cfg.trace);
        cfg.check().unwrap();
    }

    #[test]
    fn check_rejects_bad_configs() {
        assert!(parse(&["salfuse", "eval", "--branch", "p", "--out", "o"]).check().is_err());
        assert!(parse(&["salfuse", "eval", "--branch", "p", "--branch", "q", "--gt", "g", "--out", "o"])
            .check()
            .is_err());
        assert!(parse(&["salfuse", "fuse", "--branch", "p"]).check().is_err());
        assert!(parse(&["salfuse", "fuse", "--branch", "p", "--out", "o", "--epsilon", "1.5"])
            .check()
            .is_err());
        assert!(parse(&["salfuse", "fuse", "--branch", "p", "--out", "o", "--jobs", "0"])
            .check()
            .is_err());
        assert!(Cli::try_parse_from(["salfuse", "fuse", "--out", "o"]).is_err());
    }

    #[test]
    fn ablate_uses_additive_mode() {
        let cfg = parse(&["salfuse", "ablate", "--branch", "p", "--out", "o", "--trace"]);
        assert_eq!(cfg.fusion().mode, FusionMode::Additive);
        assert!(!cfg.trace);
    }
}
