use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use mrna_evo::codon_data::{build_cps_table, load_usage_table, CodonUsageTable, DEFAULT_CPS_PSEUDOCOUNT};
use mrna_evo::folding::{format_fold_output, BuiltinFolder, EnergyModel, ExternalFolder, Folder};
use mrna_evo::ga::{normalize_metrics, seed_population, slot_rng, weighted_sum, Problem};
use mrna_evo::io::{self, Backend, RunConfig};
use mrna_evo::metrics::{evaluate_all, MetricConfig, ScoringTables};
use mrna_evo::seq::{translate, validate_cds, GeneticCode, NucleicSequence, ProteinSequence};

const DEFAULT_ENGINE: &str = "RNAfold --noPS";

#[derive(Parser)]
#[command(name = "mrna-evo", version, about = "Codon optimisation of mRNA constructs")]
struct Cli {
    /// Run configuration (key = value file)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Random seed, overriding the configuration
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Folding backend
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendArg>,
    /// External folding command, e.g. "RNAfold --noPS"
    #[arg(long, global = true)]
    engine: Option<String>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Number of shortlisted candidates
    #[arg(long, global = true)]
    top_k: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Builtin,
    External,
}

impl From<BackendArg> for Backend {
    fn from(b: BackendArg) -> Self {
        match b {
            BackendArg::Builtin => Backend::Builtin,
            BackendArg::External => Backend::External,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print every metric, normalized score and fitness for coding sequences
    Score(ScoreArgs),
    /// Run the genetic algorithm and write all artifacts
    Optimize,
    /// Fold one sequence (argument or standard input)
    Fold { sequence: Option<String> },
    /// Write usage-sampled candidate coding sequences as FASTA
    Seed(SeedArgs),
    /// Reference corpus utilities
    #[command(subcommand)]
    Corpus(CorpusCommand),
}

#[derive(Args)]
struct ScoreArgs {
    /// Coding sequence literal
    sequence: Option<String>,
    /// FASTA file of coding sequences
    #[arg(long)]
    fasta: Option<PathBuf>,
    /// Also write the table to this CSV file
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    utr5: Option<String>,
    #[arg(long)]
    utr3: Option<String>,
}

#[derive(Args)]
struct SeedArgs {
    /// Target protein (defaults to the configured target)
    #[arg(long)]
    target: Option<String>,
    #[arg(short, long, default_value_t = 220)]
    n: usize,
    /// Codon usage table (defaults to the configured or bundled table)
    #[arg(long)]
    usage: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CorpusCommand {
    /// Build a codon-pair score table from a FASTA corpus of coding sequences
    BuildCps {
        corpus: PathBuf,
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CPS_PSEUDOCOUNT)]
        pseudocount: f64,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Score(args) => score(cli, args),
        Command::Optimize => optimize(cli).map(|_| ExitCode::SUCCESS),
        Command::Fold { sequence } => fold(cli, sequence.as_deref()).map(|_| ExitCode::SUCCESS),
        Command::Seed(args) => seed(cli, args).map(|_| ExitCode::SUCCESS),
        Command::Corpus(CorpusCommand::BuildCps {
            corpus,
            out,
            pseudocount,
        }) => build_cps(corpus, out, *pseudocount).map(|_| ExitCode::SUCCESS),
    }
}

fn load_config(cli: &Cli) -> Result<Option<RunConfig<f64>>> {
    let Some(path) = &cli.config else { return Ok(None) };
    let mut cfg = RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(s) = cli.seed {
        cfg.ga.rng_seed = s;
    }
    if let Some(b) = cli.backend {
        cfg.backend = b.into();
    }
    if let Some(e) = &cli.engine {
        cfg.external_command = Some(e.clone());
    }
    if cfg.backend == Backend::External && cfg.external_command.is_none() {
        cfg.external_command = Some(DEFAULT_ENGINE.to_string());
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    if let Some(k) = cli.top_k {
        cfg.top_k = k;
    }
    cfg.validate()?;
    Ok(Some(cfg))
}

fn folder_for(cli: &Cli, cfg: Option<&RunConfig<f64>>) -> Result<Arc<dyn Folder>> {
    if let Some(cfg) = cfg {
        return Ok(cfg.build_folder()?);
    }
    Ok(match cli.backend.map(Backend::from).unwrap_or(Backend::Builtin) {
        Backend::Builtin => Arc::new(BuiltinFolder::new(EnergyModel::bundled())),
        Backend::External => Arc::new(ExternalFolder::from_template(
            cli.engine.as_deref().unwrap_or(DEFAULT_ENGINE),
        )?),
    })
}

fn optimize(cli: &Cli) -> Result<()> {
    let Some(cfg) = load_config(cli)? else {
        bail!("optimize needs --config");
    };
    let done = io::optimize(&cfg)?;
    let last = done.report.generations.last().context("no generations were run")?;
    println!(
        "generations: {}{}",
        done.report.generations.len(),
        if done.report.stopped_on_plateau {
            " (plateau)"
        } else {
            ""
        }
    );
    println!("best fitness: {:.6}", last.fitness_max);
    println!("artifacts: {}", cfg.out_dir.display());
    Ok(())
}

fn read_stdin_sequence() -> Result<String> {
    let mut text = String::new();
    std::io::stdin().read_to_string(&mut text)?;
    let seq: String = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('>'))
        .collect();
    if seq.is_empty() {
        bail!("no sequence on standard input");
    }
    Ok(seq)
}

fn fold(cli: &Cli, sequence: Option<&str>) -> Result<()> {
    let cfg = load_config(cli)?;
    let text = match sequence {
        Some(s) => s.to_string(),
        None => read_stdin_sequence()?,
    };
    let seq = NucleicSequence::parse(&text)?;
    let folder = folder_for(cli, cfg.as_ref())?;
    let structure = folder.fold(&seq)?;
    print!("{}", format_fold_output(&seq, &structure));
    Ok(())
}

fn seed(cli: &Cli, args: &SeedArgs) -> Result<()> {
    let cfg = load_config(cli)?;
    let target = match (&args.target, &cfg) {
        (Some(t), _) => ProteinSequence::parse(t)?,
        (None, Some(c)) => c.target.clone(),
        (None, None) => bail!("seed needs --target or a configuration with a target"),
    };
    let usage: CodonUsageTable<f64> = match (&args.usage, &cfg) {
        (Some(p), _) => load_usage_table(p, mrna_evo::codon_data::DEFAULT_USAGE_PSEUDOCOUNT)?,
        (None, Some(c)) => c.load_tables()?.usage,
        (None, None) => CodonUsageTable::bundled_human(),
    };
    let seed = cli.seed.or(cfg.as_ref().map(|c| c.ga.rng_seed)).unwrap_or(0);
    let mut rng = slot_rng(seed, 0, 0);
    let pop = seed_population(&target, &usage, args.n, &mut rng)?;
    let headers: Vec<String> = (1..=pop.len()).map(|k| format!("seed{k:04}")).collect();
    let seqs: Vec<String> = pop.iter().map(|i| i.cds().dna_string()).collect();
    let text = io::format_fasta(headers.iter().map(String::as_str).zip(seqs.iter().map(String::as_str)));
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn build_cps(corpus: &Path, out: &Path, pseudocount: f64) -> Result<()> {
    let records = io::read_fasta(corpus)?;
    let seqs = records
        .iter()
        .map(|(h, s)| NucleicSequence::parse(s).with_context(|| format!("record {h:?}")))
        .collect::<Result<Vec<_>>>()?;
    let table = build_cps_table::<f64>(&seqs, pseudocount)?;
    io::write_file(out, &table.to_tsv())?;
    eprintln!("{} codon pairs counted", table.pair_count_total());
    Ok(())
}

fn score(cli: &Cli, args: &ScoreArgs) -> Result<ExitCode> {
    let cfg = load_config(cli)?;
    let mut records: Vec<(String, String)> = Vec::new();
    if let Some(s) = &args.sequence {
        records.push(("input".into(), s.clone()));
    }
    if let Some(p) = &args.fasta {
        records.extend(io::read_fasta(p)?);
    }
    if records.is_empty() {
        bail!("score needs a sequence or --fasta");
    }
    let code = GeneticCode::standard();
    let tables: ScoringTables<f64> = match &cfg {
        Some(c) => c.load_tables()?,
        None => ScoringTables::bundled_human(),
    };
    let parse_opt = |s: &Option<String>| s.as_deref().map(NucleicSequence::parse).transpose();
    let utr5 = parse_opt(&args.utr5)?.or_else(|| cfg.as_ref().and_then(|c| c.utr5.clone()));
    let utr3 = parse_opt(&args.utr3)?.or_else(|| cfg.as_ref().and_then(|c| c.utr3.clone()));
    let (weights, bands) = match &cfg {
        Some(c) => (c.weights, c.ga.bands),
        None => Default::default(),
    };

    let mut valid = Vec::new();
    let mut failed = false;
    for (id, text) in &records {
        let cds = match NucleicSequence::parse(text) {
            Ok(s) => s.to_dna(),
            Err(e) => {
                eprintln!("{id}: {e}");
                failed = true;
                continue;
            }
        };
        let target = match &cfg {
            Some(c) => c.target.clone(),
            None => match translate(&cds, code) {
                Ok(t) => t.protein,
                Err(e) => {
                    eprintln!("{id}: {e}");
                    failed = true;
                    continue;
                }
            },
        };
        let report = validate_cds(&cds, &target, code);
        if !report.is_valid() {
            eprintln!("{id}: {report}");
            failed = true;
            continue;
        }
        valid.push((id.clone(), cds, target));
    }

    let reference = match (cfg.as_ref().and_then(|c| c.reference_fasta.as_ref()), valid.first()) {
        (Some(p), _) => {
            let (_, s) = io::read_fasta(p)?.into_iter().next().context("empty reference FASTA")?;
            NucleicSequence::parse(&s)?.to_dna()
        }
        (None, Some((_, cds, _))) => cds.clone(),
        (None, None) => return Ok(ExitCode::FAILURE),
    };
    let mut metric_config = MetricConfig::new(reference);
    if let Some(c) = &cfg {
        metric_config.upa_weight = c.upa_weight;
        metric_config.window_radius = c.window_radius;
    }
    let folder = folder_for(cli, cfg.as_ref())?;
    let tables = Arc::new(tables);

    let mut table = io::score_header();
    table.push('\n');
    for (id, cds, target) in valid {
        let problem = Problem {
            target,
            utr5: utr5.clone(),
            utr3: utr3.clone(),
            tables: tables.clone(),
            folder: folder.clone(),
            metric_config: metric_config.clone(),
            weights,
        };
        let construct = problem.construct(&cds)?;
        let m = match evaluate_all(&construct, &tables, folder.as_ref(), &metric_config) {
            Ok(m) => m,
            Err(e) => {
                eprintln!("{id}: {e}");
                failed = true;
                continue;
            }
        };
        let scores = normalize_metrics(&m, &bands);
        let f = weighted_sum(&scores, &weights);
        table.push_str(&io::score_row(&id, &m, &scores, f));
        table.push('\n');
    }
    print!("{table}");
    if let Some(p) = &args.csv {
        io::write_file(p, &table)?;
    }
    Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS })
}
