//! FASTA handling, run configuration, the optimisation driver and its
//! artifacts (generations.csv, report.json, topk.fasta, .dbn files,
//! radar.csv).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codon_data::{
    load_cps_table, load_tai_table, load_usage_table, CodonPairTable, CodonUsageTable, TaiWeightTable,
    DEFAULT_USAGE_PSEUDOCOUNT,
};
use crate::error::{Error, Result};
use crate::folding::{format_fold_output, BuiltinFolder, EnergyModel, ExternalFolder, Folder};
use crate::ga::{
    fit_to_size, import_population, initial_population, normalize_metrics, run_observed, DroppedRecord, FitnessWeights,
    GaConfig, GenerationStats, Individual, NormalizedScores, Problem, RunOutcome, OBJECTIVE_NAMES,
};
use crate::metrics::{evaluate_detailed, MetricConfig, MetricVector, ScoringTables, DEFAULT_WINDOW_RADIUS};
use crate::num::{lit, to_f64, Scalar};
use crate::seq::{NucleicSequence, ProteinSequence};

/// Parses FASTA text into `(header, sequence)` pairs. Sequence lines are
/// joined with whitespace removed; characters are checked by the caller's
/// sequence parser.
pub fn parse_fasta(text: &str, source: &str) -> Result<Vec<(String, String)>> {
    let mut records: Vec<(String, String, usize)> = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            records.push((header.trim().to_string(), String::new(), k + 1));
        } else {
            let Some(last) = records.last_mut() else {
                return Err(Error::parse(source, k + 1, "sequence before the first '>' header"));
            };
            last.1.extend(line.chars().filter(|c| !c.is_whitespace()));
        }
    }
    records
        .into_iter()
        .map(|(header, seq, line)| {
            if seq.is_empty() {
                Err(Error::parse(source, line, format!("empty record {header:?}")))
            } else {
                Ok((header, seq))
            }
        })
        .collect()
}

pub fn read_fasta(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_fasta(&text, &path.display().to_string())
}

/// FASTA text with sequence lines wrapped at 60 characters.
pub fn format_fasta<'a>(records: impl IntoIterator<Item = (&'a str, &'a str)>) -> String {
    let mut out = String::new();
    for (header, seq) in records {
        let _ = writeln!(out, ">{header}");
        for chunk in seq.as_bytes().chunks(60) {
            out.push_str(std::str::from_utf8(chunk).expect("ASCII sequence"));
            out.push('\n');
        }
    }
    out
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Builtin,
    External,
}

impl FromStr for Backend {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "builtin" => Ok(Backend::Builtin),
            "external" => Ok(Backend::External),
            other => Err(Error::Config(format!(
                "unknown backend {other:?} (builtin or external)"
            ))),
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Backend::Builtin => "builtin",
            Backend::External => "external",
        })
    }
}

pub const DEFAULT_TOP_K: usize = 10;

/// Settings of one optimisation run.
///
/// The text form is one `key = value` per line with `#` comments. Paths
/// are relative to the file's directory. Keys:
///
/// | key | meaning |
/// |---|---|
/// | `target` / `target_fasta` | protein literal or FASTA file (first record); exactly one |
/// | `utr5`, `utr3` | flanking sequences |
/// | `pop_init`, `pop_cap`, `growth_step`, `mutation_rate`, `crossover_rate`, `tournament_size`, `elitism`, `plateau_eps`, `plateau_window`, `max_generations`, `per_codon_rate`, `seed`, `parallel` | GA settings |
/// | `weight.<objective>` | fitness weights; all ten or none |
/// | `gc_lo`, `gc_hi`, `gc_falloff`, `mfe_lo`, `mfe_hi`, `mfe_falloff`, `motif_lo`, `motif_hi`, `motif_falloff`, `utr_lo`, `utr_hi`, `utr_falloff`, `immune_max`, `cpb_scale` | normalisation |
/// | `upa_weight`, `window_radius` | metric settings |
/// | `usage_table`, `usage_pseudocount`, `tai_table`, `cps_table`, `energy_model` | reference tables |
/// | `backend`, `external_command`, `max_builtin_length` | folding |
/// | `initial_fasta`, `reference_fasta` | starting population and embedding reference |
/// | `out_dir`, `top_k` | output |
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig<T> {
    pub target: ProteinSequence,
    pub utr5: Option<NucleicSequence>,
    pub utr3: Option<NucleicSequence>,
    pub ga: GaConfig<T>,
    pub weights: FitnessWeights<T>,
    pub upa_weight: T,
    pub window_radius: usize,
    pub usage_table: Option<PathBuf>,
    pub usage_pseudocount: f64,
    pub tai_table: Option<PathBuf>,
    pub cps_table: Option<PathBuf>,
    pub energy_model: Option<PathBuf>,
    pub backend: Backend,
    pub external_command: Option<String>,
    pub max_builtin_length: Option<usize>,
    pub initial_fasta: Option<PathBuf>,
    pub reference_fasta: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub top_k: usize,
}

impl<T: Scalar> RunConfig<T> {
    pub fn new(target: ProteinSequence) -> Self {
        RunConfig {
            target,
            utr5: None,
            utr3: None,
            ga: GaConfig::default(),
            weights: FitnessWeights::default(),
            upa_weight: T::one(),
            window_radius: DEFAULT_WINDOW_RADIUS,
            usage_table: None,
            usage_pseudocount: DEFAULT_USAGE_PSEUDOCOUNT,
            tai_table: None,
            cps_table: None,
            energy_model: None,
            backend: Backend::Builtin,
            external_command: None,
            max_builtin_length: Some(crate::folding::DEFAULT_MAX_BUILTIN_LENGTH),
            initial_fasta: None,
            reference_fasta: None,
            out_dir: PathBuf::from("out"),
            top_k: DEFAULT_TOP_K,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, &path.display().to_string())
    }

    pub fn parse(text: &str, base_dir: &Path, source: &str) -> Result<Self> {
        let mut entries: BTreeMap<String, (String, usize)> = BTreeMap::new();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(source, k + 1, "expected key = value"))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), (value.trim().to_string(), k + 1)).is_some() {
                return Err(Error::parse(source, k + 1, format!("duplicate key {key:?}")));
            }
        }
        let mut take = |key: &str| entries.remove(key);
        let perr = |line: usize, msg: String| Error::parse(source, line, msg);
        fn num<V: FromStr>(key: &str, (v, line): (String, usize), source: &str) -> Result<V> {
            v.parse()
                .map_err(|_| Error::parse(source, line, format!("{key}: cannot parse {v:?}")))
        }
        let path_of = |v: String| -> PathBuf { base_dir.join(v) };

        let target = match (take("target"), take("target_fasta")) {
            (Some((lit_target, line)), None) => {
                ProteinSequence::parse(&lit_target).map_err(|e| perr(line, format!("target: {e}")))?
            }
            (None, Some((p, line))) => {
                let path = path_of(p);
                let records = read_fasta(&path)?;
                let (_, seq) = records
                    .into_iter()
                    .next()
                    .ok_or_else(|| perr(line, "empty target FASTA".into()))?;
                ProteinSequence::parse(&seq).map_err(|e| perr(line, format!("target_fasta: {e}")))?
            }
            (Some(_), Some((_, line))) => {
                return Err(perr(line, "give either target or target_fasta, not both".into()))
            }
            (None, None) => return Err(Error::parse(source, 0, "missing target or target_fasta")),
        };
        let mut cfg = RunConfig::<T>::new(target);
        let nucleic = |key: &str, (v, line): (String, usize)| -> Result<NucleicSequence> {
            NucleicSequence::parse(&v).map_err(|e| perr(line, format!("{key}: {e}")))
        };
        if let Some(v) = take("utr5") {
            cfg.utr5 = Some(nucleic("utr5", v)?);
        }
        if let Some(v) = take("utr3") {
            cfg.utr3 = Some(nucleic("utr3", v)?);
        }

        macro_rules! set_usize {
            ($($key:literal => $field:expr),* $(,)?) => {$(
                if let Some(v) = take($key) { $field = num::<usize>($key, v, source)?; }
            )*};
        }
        macro_rules! set_scalar {
            ($($key:literal => $field:expr),* $(,)?) => {$(
                if let Some(v) = take($key) { $field = lit(num::<f64>($key, v, source)?); }
            )*};
        }
        set_usize! {
            "pop_init" => cfg.ga.pop_init,
            "pop_cap" => cfg.ga.pop_cap,
            "growth_step" => cfg.ga.growth_step,
            "tournament_size" => cfg.ga.tournament_size,
            "elitism" => cfg.ga.elitism,
            "plateau_window" => cfg.ga.plateau_window,
            "max_generations" => cfg.ga.max_generations,
            "window_radius" => cfg.window_radius,
            "top_k" => cfg.top_k,
        }
        set_scalar! {
            "mutation_rate" => cfg.ga.mutation_rate,
            "crossover_rate" => cfg.ga.crossover_rate,
            "plateau_eps" => cfg.ga.plateau_eps,
            "per_codon_rate" => cfg.ga.per_codon_rate,
            "upa_weight" => cfg.upa_weight,
            "gc_lo" => cfg.ga.bands.gc.lo,
            "gc_hi" => cfg.ga.bands.gc.hi,
            "gc_falloff" => cfg.ga.bands.gc.half_width,
            "mfe_lo" => cfg.ga.bands.mfe.lo,
            "mfe_hi" => cfg.ga.bands.mfe.hi,
            "mfe_falloff" => cfg.ga.bands.mfe.half_width,
            "motif_lo" => cfg.ga.bands.motif.lo,
            "motif_hi" => cfg.ga.bands.motif.hi,
            "motif_falloff" => cfg.ga.bands.motif.half_width,
            "utr_lo" => cfg.ga.bands.utr.lo,
            "utr_hi" => cfg.ga.bands.utr.hi,
            "utr_falloff" => cfg.ga.bands.utr.half_width,
            "immune_max" => cfg.ga.bands.immune_max,
            "cpb_scale" => cfg.ga.bands.cpb_scale,
        }
        if let Some(v) = take("seed") {
            cfg.ga.rng_seed = num("seed", v, source)?;
        }
        if let Some(v) = take("parallel") {
            cfg.ga.parallel = num("parallel", v, source)?;
        }
        if let Some(v) = take("usage_pseudocount") {
            cfg.usage_pseudocount = num("usage_pseudocount", v, source)?;
        }
        let weight_keys: Vec<String> = OBJECTIVE_NAMES.iter().map(|n| format!("weight.{n}")).collect();
        let given: Vec<(usize, (String, usize))> = weight_keys
            .iter()
            .enumerate()
            .filter_map(|(k, key)| take(key).map(|v| (k, v)))
            .collect();
        if !given.is_empty() {
            if given.len() != OBJECTIVE_NAMES.len() {
                let missing: Vec<&str> = weight_keys
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| !given.iter().any(|(g, _)| g == k))
                    .map(|(_, key)| key.as_str())
                    .collect();
                return Err(Error::parse(
                    source,
                    given[0].1 .1,
                    format!("missing weights: {}", missing.join(", ")),
                ));
            }
            let mut values = [T::zero(); 10];
            for (k, v) in given {
                values[k] = lit(num::<f64>(&weight_keys[k], v, source)?);
            }
            cfg.weights = FitnessWeights::from_values(values)?;
        }
        for (key, field) in [
            ("usage_table", &mut cfg.usage_table),
            ("tai_table", &mut cfg.tai_table),
            ("cps_table", &mut cfg.cps_table),
            ("energy_model", &mut cfg.energy_model),
            ("initial_fasta", &mut cfg.initial_fasta),
            ("reference_fasta", &mut cfg.reference_fasta),
        ] {
            if let Some((v, line)) = take(key) {
                let p = path_of(v);
                if !p.exists() {
                    return Err(perr(line, format!("{key}: {} does not exist", p.display())));
                }
                *field = Some(p);
            }
        }
        if let Some((v, _)) = take("out_dir") {
            cfg.out_dir = path_of(v);
        }
        if let Some((v, line)) = take("backend") {
            cfg.backend = v.parse().map_err(|e: Error| perr(line, e.to_string()))?;
        }
        if let Some((v, _)) = take("external_command") {
            cfg.external_command = Some(v);
        }
        if let Some((v, line)) = take("max_builtin_length") {
            cfg.max_builtin_length = match v.as_str() {
                "none" => None,
                _ => Some(num("max_builtin_length", (v, line), source)?),
            };
        }
        if let Some((key, (_, line))) = entries.into_iter().next() {
            return Err(Error::parse(source, line, format!("unknown key {key:?}")));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.ga.validate()?;
        self.weights.validate()?;
        if self.window_radius == 0 {
            return Err(Error::Config("window_radius must be positive".into()));
        }
        if self.backend == Backend::External && self.external_command.is_none() {
            return Err(Error::Config("backend = external needs external_command".into()));
        }
        Ok(())
    }

    /// Key/value echo of the configuration; parses back to an equal config
    /// when paths are absolute.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("target", self.target.to_string());
        if let Some(u) = &self.utr5 {
            put("utr5", u.to_string());
        }
        if let Some(u) = &self.utr3 {
            put("utr3", u.to_string());
        }
        let g = &self.ga;
        put("pop_init", g.pop_init.to_string());
        put("pop_cap", g.pop_cap.to_string());
        put("growth_step", g.growth_step.to_string());
        put("mutation_rate", g.mutation_rate.to_string());
        put("crossover_rate", g.crossover_rate.to_string());
        put("tournament_size", g.tournament_size.to_string());
        put("elitism", g.elitism.to_string());
        put("plateau_eps", g.plateau_eps.to_string());
        put("plateau_window", g.plateau_window.to_string());
        put("max_generations", g.max_generations.to_string());
        put("per_codon_rate", g.per_codon_rate.to_string());
        put("seed", g.rng_seed.to_string());
        put("parallel", g.parallel.to_string());
        for (name, w) in OBJECTIVE_NAMES.iter().zip(self.weights.values()) {
            put(&format!("weight.{name}"), w.to_string());
        }
        let b = &g.bands;
        for (prefix, band) in [("gc", b.gc), ("mfe", b.mfe), ("motif", b.motif), ("utr", b.utr)] {
            put(&format!("{prefix}_lo"), band.lo.to_string());
            put(&format!("{prefix}_hi"), band.hi.to_string());
            put(&format!("{prefix}_falloff"), band.half_width.to_string());
        }
        put("immune_max", b.immune_max.to_string());
        put("cpb_scale", b.cpb_scale.to_string());
        put("upa_weight", self.upa_weight.to_string());
        put("window_radius", self.window_radius.to_string());
        put("usage_pseudocount", self.usage_pseudocount.to_string());
        for (key, p) in [
            ("usage_table", &self.usage_table),
            ("tai_table", &self.tai_table),
            ("cps_table", &self.cps_table),
            ("energy_model", &self.energy_model),
            ("initial_fasta", &self.initial_fasta),
            ("reference_fasta", &self.reference_fasta),
        ] {
            if let Some(p) = p {
                put(key, p.display().to_string());
            }
        }
        put("backend", self.backend.to_string());
        if let Some(c) = &self.external_command {
            put("external_command", c.clone());
        }
        put(
            "max_builtin_length",
            self.max_builtin_length.map_or("none".to_string(), |n| n.to_string()),
        );
        put("out_dir", self.out_dir.display().to_string());
        put("top_k", self.top_k.to_string());
        m
    }

    pub fn to_text(&self) -> String {
        self.to_map().into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn load_tables(&self) -> Result<ScoringTables<T>> {
        let usage = match &self.usage_table {
            Some(p) => load_usage_table(p, self.usage_pseudocount)?,
            None => CodonUsageTable::bundled_human(),
        };
        let tai = match &self.tai_table {
            Some(p) => load_tai_table(p)?,
            None => TaiWeightTable::bundled_human(),
        };
        let cps = match &self.cps_table {
            Some(p) => load_cps_table(p)?,
            None => CodonPairTable::neutral(),
        };
        Ok(ScoringTables::new(usage, tai, cps))
    }

    pub fn build_folder(&self) -> Result<Arc<dyn Folder>> {
        Ok(match self.backend {
            Backend::Builtin => {
                let model = match &self.energy_model {
                    Some(p) => EnergyModel::load(p)?,
                    None => EnergyModel::bundled(),
                };
                Arc::new(BuiltinFolder::new(model).with_max_length(self.max_builtin_length))
            }
            Backend::External => {
                let cmd = self
                    .external_command
                    .as_deref()
                    .ok_or_else(|| Error::Config("backend = external needs external_command".into()))?;
                Arc::new(ExternalFolder::from_template(cmd)?)
            }
        })
    }
}

/// A problem ready to optimise, with its starting population.
pub struct Prepared<T> {
    pub problem: Problem<T>,
    pub initial: Vec<Individual<T>>,
    pub dropped: Vec<DroppedRecord>,
}

/// Loads tables, the folder, the initial population and the embedding
/// reference (first record of `reference_fasta`, else the first initial
/// candidate).
pub fn prepare<T: Scalar>(cfg: &RunConfig<T>) -> Result<Prepared<T>> {
    cfg.validate()?;
    let tables = Arc::new(cfg.load_tables()?);
    let folder = cfg.build_folder()?;
    let placeholder = MetricConfig::new(NucleicSequence::parse("ATG")?);
    let mut problem = Problem {
        target: cfg.target.clone(),
        utr5: cfg.utr5.clone(),
        utr3: cfg.utr3.clone(),
        tables,
        folder,
        metric_config: placeholder,
        weights: cfg.weights,
    };
    let (initial, dropped) = match &cfg.initial_fasta {
        Some(p) => {
            let (pop, dropped) = import_population(p, &cfg.target)?;
            (fit_to_size(pop, &problem, &cfg.ga)?, dropped)
        }
        None => (initial_population(&problem, &cfg.ga)?, Vec::new()),
    };
    let reference = match &cfg.reference_fasta {
        Some(p) => {
            let (_, seq) = read_fasta(p)?
                .into_iter()
                .next()
                .expect("parse_fasta rejects empty files");
            NucleicSequence::parse(&seq)?.to_dna()
        }
        None => initial[0].cds().clone(),
    };
    let mut mc = MetricConfig::new(reference);
    mc.upa_weight = cfg.upa_weight;
    mc.window_radius = cfg.window_radius;
    problem.metric_config = mc;
    Ok(Prepared {
        problem,
        initial,
        dropped,
    })
}

pub const GENERATIONS_FILE: &str = "generations.csv";
pub const REPORT_FILE: &str = "report.json";
pub const TOPK_FILE: &str = "topk.fasta";
pub const RADAR_FILE: &str = "radar.csv";

fn generations_header() -> String {
    let mut cols = vec![
        "generation".to_string(),
        "pop_size".into(),
        "fitness_mean".into(),
        "fitness_max".into(),
        "fitness_min".into(),
    ];
    cols.extend(MetricVector::<f64>::FIELD_NAMES.iter().map(|n| format!("mean_{n}")));
    cols.join(",")
}

/// One row per generation, fixed columns, six decimals.
pub fn format_generations_csv<T: Scalar>(rows: &[GenerationStats<T>]) -> String {
    let mut out = generations_header();
    out.push('\n');
    for r in rows {
        let _ = write!(
            out,
            "{},{},{:.6},{:.6},{:.6}",
            r.generation,
            r.pop_size,
            to_f64(r.fitness_mean),
            to_f64(r.fitness_max),
            to_f64(r.fitness_min)
        );
        for v in r.metric_means {
            let _ = write!(out, ",{:.6}", to_f64(v));
        }
        out.push('\n');
    }
    out
}

pub fn parse_generations_csv(text: &str, source: &str) -> Result<Vec<GenerationStats<f64>>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == generations_header() => {}
        _ => return Err(Error::parse(source, 1, "unexpected generations header")),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 16 {
            return Err(Error::parse(
                source,
                k + 1,
                format!("expected 16 columns, found {}", cells.len()),
            ));
        }
        let bad = || Error::parse(source, k + 1, "malformed number");
        let int = |s: &str| s.parse::<usize>().map_err(|_| bad());
        let real = |s: &str| s.parse::<f64>().map_err(|_| bad());
        let mut means = [0.0; 11];
        for (m, c) in means.iter_mut().zip(&cells[5..]) {
            *m = real(c)?;
        }
        rows.push(GenerationStats {
            generation: int(cells[0])?,
            pop_size: int(cells[1])?,
            fitness_mean: real(cells[2])?,
            fitness_max: real(cells[3])?,
            fitness_min: real(cells[4])?,
            metric_means: means,
        });
    }
    Ok(rows)
}

/// One shortlisted candidate with everything needed to recheck its fitness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ReportEntry<T> {
    pub rank: usize,
    pub id: String,
    pub cds: String,
    pub fitness: T,
    pub metrics: MetricVector<T>,
    pub normalized: NormalizedScores<T>,
    pub global_structure: String,
    pub global_energy: f64,
    pub window_start: usize,
    pub window_end: usize,
    pub window_structure: String,
    pub window_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct RunReport<T> {
    pub config: BTreeMap<String, String>,
    pub weights: FitnessWeights<T>,
    pub initial: GenerationStats<T>,
    pub generations: Vec<GenerationStats<T>>,
    pub stopped_on_plateau: bool,
    pub dropped_records: Vec<(String, String)>,
    pub top_k: Vec<ReportEntry<T>>,
}

impl<T: Scalar> RunReport<T> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn candidate_id(rank: usize) -> String {
    format!("cand{rank:02}")
}

/// Re-evaluates the shortlist with structures for the report.
pub fn report_entries<T: Scalar>(
    problem: &Problem<T>,
    bands: &crate::ga::NormalizationBands<T>,
    top: &[Individual<T>],
) -> Result<Vec<ReportEntry<T>>> {
    top.iter()
        .enumerate()
        .map(|(k, ind)| {
            let construct = problem.construct(ind.cds())?;
            let ev = evaluate_detailed(
                &construct,
                &problem.tables,
                problem.folder.as_ref(),
                &problem.metric_config,
            )?;
            let normalized = normalize_metrics(&ev.metrics, bands);
            let fitness = crate::ga::weighted_sum(&normalized, &problem.weights);
            Ok(ReportEntry {
                rank: k + 1,
                id: candidate_id(k + 1),
                cds: ind.cds().dna_string(),
                fitness,
                metrics: ev.metrics,
                normalized,
                global_structure: ev.global.dot_bracket().to_string(),
                global_energy: ev.global.energy().unwrap_or(0.0),
                window_start: ev.window.window.start,
                window_end: ev.window.window.end,
                window_structure: ev.window.structure.dot_bracket().to_string(),
                window_energy: ev.window.structure.energy().unwrap_or(0.0),
            })
        })
        .collect()
}

pub fn format_topk_fasta<T: Scalar>(entries: &[ReportEntry<T>]) -> String {
    let headers: Vec<String> = entries
        .iter()
        .map(|e| format!("{} rank={} fitness={:.6}", e.id, e.rank, to_f64(e.fitness)))
        .collect();
    format_fasta(
        headers
            .iter()
            .map(String::as_str)
            .zip(entries.iter().map(|e| e.cds.as_str())),
    )
}

pub fn radar_header() -> String {
    format!("id,{},fitness", OBJECTIVE_NAMES.join(","))
}

/// Normalized objective axes per shortlisted candidate.
pub fn format_radar_csv<T: Scalar>(entries: &[ReportEntry<T>]) -> String {
    let mut out = radar_header();
    out.push('\n');
    for e in entries {
        out.push_str(&e.id);
        for v in e.normalized.0 {
            let _ = write!(out, ",{:.6}", to_f64(v));
        }
        let _ = writeln!(out, ",{:.6}", to_f64(e.fitness));
    }
    out
}

/// Column names of the `score` table: id, raw metrics, normalized scores
/// (`n_` prefix) and fitness.
pub fn score_header() -> String {
    let mut cols = vec!["id".to_string()];
    cols.extend(MetricVector::<f64>::FIELD_NAMES.iter().map(|s| s.to_string()));
    cols.extend(OBJECTIVE_NAMES.iter().map(|n| format!("n_{n}")));
    cols.push("fitness".into());
    cols.join(",")
}

pub fn score_row<T: Scalar>(id: &str, m: &MetricVector<T>, scores: &NormalizedScores<T>, fitness: T) -> String {
    let mut out = id.to_string();
    for (name, v) in MetricVector::<T>::FIELD_NAMES.iter().zip(m.values()) {
        if *name == "motif_total" {
            let _ = write!(out, ",{}", m.motif_total);
        } else {
            let _ = write!(out, ",{:.6}", to_f64(v));
        }
    }
    for v in scores.0 {
        let _ = write!(out, ",{:.6}", to_f64(v));
    }
    let _ = write!(out, ",{:.6}", to_f64(fitness));
    out
}

/// Files written by [`write_artifacts`].
#[derive(Debug, Clone)]
pub struct ArtifactPaths {
    pub generations: PathBuf,
    pub report: PathBuf,
    pub topk: PathBuf,
    pub radar: PathBuf,
    pub structures: Vec<PathBuf>,
}

pub fn write_artifacts<T: Scalar>(
    out_dir: &Path,
    report: &RunReport<T>,
    problem: &Problem<T>,
) -> Result<ArtifactPaths> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let paths = ArtifactPaths {
        generations: out_dir.join(GENERATIONS_FILE),
        report: out_dir.join(REPORT_FILE),
        topk: out_dir.join(TOPK_FILE),
        radar: out_dir.join(RADAR_FILE),
        structures: Vec::new(),
    };
    write_file(&paths.generations, &format_generations_csv(&report.generations))?;
    write_file(&paths.report, &report.to_json()?)?;
    write_file(&paths.topk, &format_topk_fasta(&report.top_k))?;
    write_file(&paths.radar, &format_radar_csv(&report.top_k))?;
    let mut structures = Vec::new();
    for e in &report.top_k {
        let construct = problem.construct(&NucleicSequence::parse(&e.cds)?)?;
        let transcript = construct.transcript();
        let global = crate::folding::parse_dot_bracket(&e.global_structure)?.with_energy(e.global_energy);
        let window_seq = transcript.slice(e.window_start, e.window_end)?;
        let window = crate::folding::parse_dot_bracket(&e.window_structure)?.with_energy(e.window_energy);
        for (suffix, seq, s) in [("", transcript, &global), ("_window", &window_seq, &window)] {
            let p = out_dir.join(format!("{}{suffix}.dbn", e.id));
            write_file(&p, &format_fold_output(seq, s))?;
            structures.push(p);
        }
    }
    Ok(ArtifactPaths { structures, ..paths })
}

/// Outcome of [`optimize`].
pub struct Optimized<T> {
    pub outcome: RunOutcome<T>,
    pub report: RunReport<T>,
    pub paths: ArtifactPaths,
}

/// Runs the GA for `cfg` and writes every artifact to `cfg.out_dir`.
/// `observe` sees each evaluated population, generation 0 first.
pub fn optimize_observed<T: Scalar>(
    cfg: &RunConfig<T>,
    observe: &mut dyn FnMut(usize, &[Individual<T>]),
) -> Result<Optimized<T>> {
    let prepared = prepare(cfg)?;
    let outcome = run_observed(&prepared.problem, &cfg.ga, prepared.initial, observe)?;
    let top = outcome.top_k(cfg.top_k);
    let entries = report_entries(&prepared.problem, &cfg.ga.bands, &top)?;
    let report = RunReport {
        config: cfg.to_map(),
        weights: cfg.weights,
        initial: outcome.initial.clone(),
        generations: outcome.stats.clone(),
        stopped_on_plateau: outcome.stopped_on_plateau,
        dropped_records: prepared.dropped.into_iter().map(|d| (d.header, d.reason)).collect(),
        top_k: entries,
    };
    let paths = write_artifacts(&cfg.out_dir, &report, &prepared.problem)?;
    Ok(Optimized { outcome, report, paths })
}

pub fn optimize<T: Scalar>(cfg: &RunConfig<T>) -> Result<Optimized<T>> {
    optimize_observed(cfg, &mut |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fasta_examples() {
        assert_eq!(
            parse_fasta(">a\nATG\nGCT\n", "t").unwrap(),
            vec![("a".to_string(), "ATGGCT".to_string())]
        );
        let err = parse_fasta(">a\n>b\nATG", "t").unwrap_err();
        assert!(err.to_string().contains("\"a\""), "{err}");
        let two = parse_fasta(">x desc\nAC\n\n>y\nGT\n", "t").unwrap();
        assert_eq!(two.iter().map(|r| r.0.as_str()).collect::<Vec<_>>(), ["x desc", "y"]);
        assert!(parse_fasta("ATG\n", "t").is_err());
        assert!(parse_fasta(">only\n", "t").is_err());
    }

    #[test]
    fn fasta_round_trip() {
        let long = "ACGT".repeat(40);
        let text = format_fasta([("a", long.as_str()), ("b", "ATG")]);
        assert!(text.lines().all(|l| l.len() <= 60));
        let back = parse_fasta(&text, "t").unwrap();
        assert_eq!(back, vec![("a".into(), long), ("b".into(), "ATG".into())]);
    }

    #[test]
    fn config_parsing() {
        let dir = tempfile::tempdir().unwrap();
        let text = "# demo\ntarget = MKV\nutr5 = GGGAAA\npop_init = 10\npop_cap = 40\nseed = 7\nmfe_lo = -400\nout_dir = results\n";
        let cfg = RunConfig::<f64>::parse(text, dir.path(), "demo").unwrap();
        assert_eq!(cfg.target.to_string(), "MKV");
        assert_eq!(cfg.ga.pop_init, 10);
        assert_eq!(cfg.ga.rng_seed, 7);
        assert_eq!(cfg.ga.bands.mfe.lo, -400.0);
        assert_eq!(cfg.out_dir, dir.path().join("results"));

        let unknown = RunConfig::<f64>::parse("target = M\nwieght.cai = 0.2\n", dir.path(), "demo");
        assert!(unknown.unwrap_err().to_string().contains("wieght.cai"));
        assert!(RunConfig::<f64>::parse("target = M\nweight.cai = 0.5\n", dir.path(), "d").is_err());
        assert!(RunConfig::<f64>::parse("pop_init = 3\n", dir.path(), "d").is_err());
        assert!(RunConfig::<f64>::parse("target = M\nusage_table = nope.tsv\n", dir.path(), "d").is_err());
        assert!(RunConfig::<f64>::parse("target = M\nbackend = external\n", dir.path(), "d").is_err());
        assert!(RunConfig::<f64>::parse("target = M\ntarget = M\n", dir.path(), "d").is_err());
    }

    #[test]
    fn config_text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::<f64>::new(ProteinSequence::parse("MKVLA").unwrap());
        cfg.utr3 = Some(NucleicSequence::parse("UUUAAA").unwrap());
        cfg.ga.mutation_rate = 0.3;
        cfg.external_command = Some("RNAfold --noPS".into());
        cfg.out_dir = dir.path().join("o");
        let back = RunConfig::<f64>::parse(&cfg.to_text(), dir.path(), "echo").unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn generations_csv_round_trip() {
        let row = GenerationStats {
            generation: 3,
            pop_size: 100,
            fitness_mean: 0.5,
            fitness_max: 0.75,
            fitness_min: 0.125,
            metric_means: [0.5, 0.25, -0.125, 0.625, 30.0, 0.8, -120.5, -10.25, 0.5, 40.5, 0.875],
        };
        let text = format_generations_csv(std::slice::from_ref(&row));
        assert_eq!(text.lines().count(), 2);
        assert_eq!(parse_generations_csv(&text, "g").unwrap(), vec![row]);
        assert!(parse_generations_csv("bad\n", "g").is_err());
    }

    #[test]
    fn score_schema() {
        let header = score_header();
        let cols: Vec<&str> = header.split(',').collect();
        assert_eq!(cols.len(), 1 + 11 + 10 + 1);
        assert_eq!(cols.last(), Some(&"fitness"));
    }
}
