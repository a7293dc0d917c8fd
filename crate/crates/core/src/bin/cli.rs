use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use inpaint_forensics::commands::{
    cmd_detect, cmd_dump, cmd_evaluate, cmd_perturb, cmd_segment, CandidateArg, DumpKind, PerturbOp,
};
use inpaint_forensics::config::RunConfig;
use inpaint_forensics::error::{Error, Result};

/// Wavelet-scattering inpainting forensics toolkit.
#[derive(Parser)]
#[command(name = "inpaint-forensics", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override a single config key (repeatable), e.g. --set slic_count=64.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        cfg.apply_overrides(&self.overrides)?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Refine a candidate forgery mask for one image.
    Detect {
        /// Image under test (PNG or NetPBM).
        #[arg(long)]
        image: PathBuf,
        /// Candidate probability mask file; mutually exclusive with --baseline.
        #[arg(long, conflicts_with = "baseline")]
        candidate: Option<PathBuf>,
        /// Score the candidate with the built-in scattering baseline.
        #[arg(long)]
        baseline: bool,
        /// Output directory for refined.pgm (and explanation.json).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write the per-segment explanation record.
        #[arg(long)]
        explain: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Evaluate over a dataset of original/mask/inpainted triples.
    Evaluate {
        /// Dataset root: <root>/<split>/{originals,masks,inpainted}/.
        #[arg(long)]
        root: PathBuf,
        /// Candidate masks mirrored as <dir>/<split>/<stem>.<ext>.
        #[arg(long, conflicts_with = "baseline")]
        candidates: Option<PathBuf>,
        /// Use the built-in scattering baseline as candidate source.
        #[arg(long)]
        baseline: bool,
        /// Report JSON path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Apply robustness perturbations to an image.
    Perturb {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_enum)]
        op: OpArg,
        /// Resize factor.
        #[arg(long, default_value_t = 0.7)]
        factor: f64,
        /// Box blur radius in pixels.
        #[arg(long, default_value_t = 5)]
        radius: usize,
        /// Output image path (NetPBM).
        #[arg(long)]
        out: PathBuf,
    },
    /// Write diagnostic planes and manifests for one image.
    Dump {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, value_enum)]
        what: WhatArg,
        #[arg(long, default_value = "dump")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Segment an image and write the label map and area table.
    Segment {
        #[arg(long)]
        image: PathBuf,
        #[arg(long, default_value = "segments")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OpArg {
    Resize,
    Blur,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum WhatArg {
    Dtcwt,
    Scatter,
    Segments,
}

fn candidate_arg(file: Option<PathBuf>, baseline: bool) -> Result<CandidateArg> {
    match (file, baseline) {
        (Some(p), false) => Ok(CandidateArg::File(p)),
        (None, true) => Ok(CandidateArg::Baseline),
        (None, false) => Err(Error::arg(
            "choose a candidate source: --candidate <file> or --baseline",
        )),
        (Some(_), true) => unreachable!("clap conflicts_with"),
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Detect {
            image,
            candidate,
            baseline,
            out,
            explain,
            config,
        } => {
            let cfg = config.build()?;
            let cand = candidate_arg(candidate, baseline)?;
            let written = cmd_detect(&image, &cand, &cfg, &out, explain)?;
            for path in written {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Evaluate {
            root,
            candidates,
            baseline,
            out,
            config,
        } => {
            let cfg = config.build()?;
            let cand = match (candidates, baseline) {
                (Some(dir), false) => CandidateArg::Dir(dir),
                (None, true) => CandidateArg::Baseline,
                (None, false) => {
                    return Err(Error::arg(
                        "choose a candidate source: --candidates <dir> or --baseline",
                    ))
                }
                (Some(_), true) => unreachable!("clap conflicts_with"),
            };
            let report = cmd_evaluate(&root, &cand, &cfg)?;
            let body = serde_json::to_vec_pretty(&report).expect("report serializes");
            match out {
                Some(path) => {
                    if let Some(parent) = path.parent() {
                        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
                    }
                    std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
                    println!("{}", path.display());
                }
                None => {
                    use std::io::Write;
                    let mut stdout = std::io::stdout();
                    stdout
                        .write_all(&body)
                        .and_then(|_| stdout.write_all(b"\n"))
                        .map_err(|e| Error::io("<stdout>", e))?;
                }
            }
            Ok(())
        }
        Command::Perturb {
            image,
            op,
            factor,
            radius,
            out,
        } => {
            let op = match op {
                OpArg::Resize => PerturbOp::Resize,
                OpArg::Blur => PerturbOp::Blur,
                OpArg::Both => PerturbOp::Both,
            };
            cmd_perturb(&image, op, factor, radius, &out)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Dump {
            image,
            what,
            out,
            config,
        } => {
            let cfg = config.build()?;
            let what = match what {
                WhatArg::Dtcwt => DumpKind::Dtcwt,
                WhatArg::Scatter => DumpKind::Scatter,
                WhatArg::Segments => DumpKind::Segments,
            };
            cmd_dump(&image, what, &cfg, &out)?;
            println!("{}", out.display());
            Ok(())
        }
        Command::Segment { image, out, config } => {
            let cfg = config.build()?;
            for path in cmd_segment(&image, &cfg, &out)? {
                println!("{}", path.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
