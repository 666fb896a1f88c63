use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tweetscope::animate::Scheme;
use tweetscope::paths::TraversalMode;
use tweetscope::pipeline::{self, PipelineError, RunConfig, Stage, StageReport};

#[derive(Parser)]
#[command(name = "tweetscope", version, about = "Temporal interaction networks from post corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one stage.
    Run {
        /// filter, edges, nodes, code, network, daily, slice, paths,
        /// timeline, overlap or animate
        stage: Stage,
        #[command(flatten)]
        opts: Opts,
    },
    /// Run every stage in order.
    All {
        #[command(flatten)]
        opts: Opts,
    },
    /// Check the config and report every problem found.
    Validate {
        #[command(flatten)]
        opts: Opts,
    },
}

/// Config file plus overrides; flags win over the file.
#[derive(Args)]
struct Opts {
    #[arg(long, short)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    window: Option<u32>,
    #[arg(long)]
    min_degree: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    scheme: Option<Scheme>,
    #[arg(long)]
    mode: Option<TraversalMode>,
    #[arg(long)]
    start_day: Option<i64>,
    /// Path root; repeat for several.
    #[arg(long = "root")]
    roots: Vec<String>,
    #[arg(long)]
    player: Option<PathBuf>,
}

impl Opts {
    fn load(&self) -> Result<RunConfig, PipelineError> {
        let mut cfg = pipeline::load_config(&self.config)?;
        if let Some(p) = &self.out {
            cfg.out_dir = p.clone();
        }
        if let Some(p) = &self.corpus {
            cfg.corpus = p.clone();
        }
        if let Some(w) = self.window {
            cfg.network.window = w;
        }
        if let Some(m) = self.min_degree {
            cfg.network.min_degree = m;
        }
        if let Some(s) = self.seed {
            cfg.animation.seed = s;
        }
        if let Some(s) = self.scheme {
            cfg.animation.scheme = s;
        }
        if let Some(m) = self.mode {
            cfg.paths.mode = m;
        }
        if let Some(d) = self.start_day {
            cfg.paths.start_day = d;
        }
        if !self.roots.is_empty() {
            cfg.paths.roots = self.roots.clone();
        }
        if let Some(p) = &self.player {
            cfg.animation.player_bundle = Some(p.clone());
        }
        Ok(cfg)
    }
}

fn report(stage: Stage, r: &StageReport) {
    println!("{stage}: {}", r.summary);
    for w in &r.warnings {
        eprintln!("warning [{stage}]: {w}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run { stage, opts } => opts
            .load()
            .and_then(|cfg| pipeline::run_stage(*stage, &cfg))
            .map(|r| report(*stage, &r)),
        Command::All { opts } => opts.load().and_then(|cfg| {
            for stage in Stage::ALL {
                let r = pipeline::run_stage(stage, &cfg)?;
                report(stage, &r);
            }
            Ok(())
        }),
        Command::Validate { opts } => opts.load().and_then(|cfg| {
            let problems = cfg.validate();
            if problems.is_empty() {
                println!("config ok");
                Ok(())
            } else {
                Err(PipelineError::Config(problems))
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
