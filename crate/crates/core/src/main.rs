use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use opsim::distance::MetricConfig;
use opsim::mutate::Technique;
use opsim::report::{self, CliError, ReportFormat, RunConfig, CONFIG_ENV};

/// Opcode-histogram similarity for morphed program variants.
#[derive(Parser)]
#[command(name = "opsim", version)]
struct Cli {
    /// Config file of `key = value` lines; defaults to $OPSIM_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Pairwise distance matrix and variant verdicts for a set of listings.
    Compare {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plot: bool,
        /// Write matrix cells at full precision instead of three decimals.
        #[arg(long)]
        full_precision: bool,
        inputs: Vec<PathBuf>,
    },
    /// Generate obfuscated variants of seed listings plus a manifest.
    Mutate {
        #[command(flatten)]
        common: Common,
        /// Technique(s) to apply; repeat or separate with commas.
        #[arg(long, value_delimiter = ',')]
        technique: Vec<Technique>,
        #[arg(long)]
        intensity: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Variants per technique, with seeds seed, seed+1, ...
        #[arg(long)]
        variants: Option<usize>,
        seeds: Vec<PathBuf>,
    },
    /// Score compare verdicts against a mutation manifest.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        verdicts: PathBuf,
        #[arg(long)]
        threshold: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write per-subroutine opcode histograms.
    DumpHistograms {
        #[command(flatten)]
        common: Common,
        inputs: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// manhattan, euclidean or minkowski:<r>
    #[arg(long)]
    metric: Option<MetricConfig>,
    /// Take the r-th root of the Minkowski sum.
    #[arg(long, overrides_with = "no_root")]
    root: bool,
    #[arg(long)]
    no_root: bool,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long)]
    format: Option<ReportFormat>,
}

impl Common {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.metric {
            cfg.metric = m.with_root(cfg.metric.apply_root || m.apply_root);
        }
        if self.root {
            cfg.metric.apply_root = true;
        }
        if self.no_root {
            cfg.metric.apply_root = false;
        }
        if self.threshold.is_some() {
            cfg.threshold = self.threshold;
        }
        if let Some(out) = &self.out {
            cfg.out = out.clone();
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
    }
}

fn base_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    let path = path.cloned().or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    if let Some(path) = path {
        cfg.apply_config_file(&path)?;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = base_config(cli.config.as_ref())?;
    match cli.command {
        Command::Compare {
            common,
            plot,
            full_precision,
            inputs,
        } => {
            common.apply(&mut cfg);
            cfg.plot |= plot;
            cfg.full_precision |= full_precision;
            cfg.inputs = inputs;
            if cfg.metric.default_threshold().is_some() && cfg.threshold.is_none() {
                eprintln!(
                    "note: using the shipped {} threshold; thresholds depend on the mutation engine and may need tuning",
                    cfg.metric
                );
            }
            let outcome = report::cmd_compare(&cfg)?;
            let counts = report::verdict_counts(&outcome.verdicts);
            println!(
                "{} programs, {} pairs: {} variant-pair, {} distinct",
                outcome.matrix.len(),
                outcome.verdicts.len(),
                counts.get("variant-pair").unwrap_or(&0),
                counts.get("distinct").unwrap_or(&0)
            );
            for path in &outcome.written {
                println!("wrote {}", path.display());
            }
        }
        Command::Mutate {
            common,
            technique,
            intensity,
            seed,
            variants,
            seeds,
        } => {
            common.apply(&mut cfg);
            if !technique.is_empty() {
                cfg.techniques = technique;
            }
            cfg.intensity = intensity.unwrap_or(cfg.intensity);
            cfg.seed = seed.unwrap_or(cfg.seed);
            cfg.variants = variants.unwrap_or(cfg.variants);
            cfg.inputs = seeds;
            if cfg.inputs.is_empty() {
                return Err(CliError::Usage("mutate needs at least one seed listing".into()));
            }
            let specs = cfg.mutation_specs()?;
            let manifest = report::cmd_mutate(&cfg, &specs)?;
            println!("wrote {} variants to {}", manifest.len(), cfg.out.display());
        }
        Command::Eval {
            manifest,
            verdicts,
            threshold,
            out,
        } => {
            let out = out.unwrap_or(cfg.out);
            let summary = report::cmd_eval(&manifest, &verdicts, threshold.or(cfg.threshold), &out)?;
            println!(
                "threshold {}: FP {} FN {} (TP {} TN {})",
                summary.threshold,
                summary.false_positives,
                summary.false_negatives,
                summary.true_positives,
                summary.true_negatives
            );
        }
        Command::DumpHistograms { common, inputs } => {
            common.apply(&mut cfg);
            cfg.inputs = inputs;
            let path = report::cmd_dump_histograms(&cfg)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("opsim: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
