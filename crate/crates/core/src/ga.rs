//! Genetic algorithm over synonymous coding sequences: seeding, weighted
//! fitness, tournament selection, codon-boundary crossover, synonymous
//! mutation and the generation loop with plateau stopping.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codon_data::CodonUsageTable;
use crate::error::{Error, Result};
use crate::folding::Folder;
use crate::metrics::{evaluate_all, MetricConfig, MetricVector, ScoringTables};
use crate::num::{from_usize, lit, to_f64, Scalar};
use crate::seq::{validate_cds, Codon, Construct, GeneticCode, NucleicSequence, ProteinSequence};

/// Weights of the normalized objectives; they must sum to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FitnessWeights<T> {
    pub cai: T,
    pub tai: T,
    pub cpb: T,
    pub mfe_global: T,
    pub unpaired30: T,
    pub gc: T,
    pub immune: T,
    pub utr_balance: T,
    pub motif: T,
    pub embed: T,
}

pub const OBJECTIVE_NAMES: [&str; 10] = [
    "cai",
    "tai",
    "cpb",
    "mfe_global",
    "unpaired30",
    "gc",
    "immune",
    "utr_balance",
    "motif",
    "embed",
];

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

impl<T: Scalar> Default for FitnessWeights<T> {
    fn default() -> Self {
        FitnessWeights {
            cai: lit(0.20),
            tai: lit(0.15),
            cpb: lit(0.10),
            mfe_global: lit(0.15),
            unpaired30: lit(0.10),
            gc: lit(0.10),
            immune: lit(0.10),
            utr_balance: lit(0.03),
            motif: lit(0.02),
            embed: lit(0.05),
        }
    }
}

impl<T: Scalar> FitnessWeights<T> {
    /// Values in [`OBJECTIVE_NAMES`] order.
    pub fn values(&self) -> [T; 10] {
        [
            self.cai,
            self.tai,
            self.cpb,
            self.mfe_global,
            self.unpaired30,
            self.gc,
            self.immune,
            self.utr_balance,
            self.motif,
            self.embed,
        ]
    }

    pub fn from_values(v: [T; 10]) -> Result<Self> {
        let w = FitnessWeights {
            cai: v[0],
            tai: v[1],
            cpb: v[2],
            mfe_global: v[3],
            unpaired30: v[4],
            gc: v[5],
            immune: v[6],
            utr_balance: v[7],
            motif: v[8],
            embed: v[9],
        };
        w.validate()?;
        Ok(w)
    }

    /// Sets one weight by objective name without validating the sum.
    pub fn set(&mut self, name: &str, value: T) -> Result<()> {
        let slot = match name {
            "cai" => &mut self.cai,
            "tai" => &mut self.tai,
            "cpb" => &mut self.cpb,
            "mfe_global" => &mut self.mfe_global,
            "unpaired30" => &mut self.unpaired30,
            "gc" => &mut self.gc,
            "immune" => &mut self.immune,
            "utr_balance" => &mut self.utr_balance,
            "motif" => &mut self.motif,
            "embed" => &mut self.embed,
            _ => return Err(Error::Config(format!("unknown weight {name:?}"))),
        };
        *slot = value;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        for (name, w) in OBJECTIVE_NAMES.iter().zip(self.values()) {
            if !w.is_finite() || w < T::zero() {
                return Err(Error::Config(format!(
                    "weight {name} = {w} must be a finite value >= 0"
                )));
            }
        }
        let sum: f64 = self.values().iter().map(|&w| to_f64(w)).sum();
        // single precision cannot represent the defaults to within 1e-9
        let tolerance = WEIGHT_SUM_TOLERANCE.max(16.0 * to_f64(T::epsilon()));
        if (sum - 1.0).abs() > tolerance {
            return Err(Error::WeightSum(sum));
        }
        Ok(())
    }
}

/// Plateau `[lo, hi]` scoring 1 with linear falloff to 0 over `half_width`
/// on either side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct Band<T> {
    pub lo: T,
    pub hi: T,
    pub half_width: T,
}

impl<T: Scalar> Band<T> {
    pub fn new(lo: f64, hi: f64, half_width: f64) -> Self {
        Band {
            lo: lit(lo),
            hi: lit(hi),
            half_width: lit(half_width),
        }
    }

    pub fn score(&self, x: T) -> T {
        let d = if x < self.lo {
            self.lo - x
        } else if x > self.hi {
            x - self.hi
        } else {
            return T::one();
        };
        (T::one() - d / self.half_width).max(T::zero())
    }

    fn validate(&self, name: &str) -> Result<()> {
        if self.lo.is_nan()
            || self.hi.is_nan()
            || self.lo > self.hi
            || self.half_width.is_nan()
            || self.half_width <= T::zero()
        {
            return Err(Error::Config(format!(
                "{name} band needs lo <= hi and a positive half width"
            )));
        }
        Ok(())
    }
}

/// Mapping of raw metrics onto `[0, 1]` scores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NormalizationBands<T> {
    pub gc: Band<T>,
    /// kcal/mol
    pub mfe: Band<T>,
    pub motif: Band<T>,
    pub utr: Band<T>,
    pub immune_max: T,
    pub cpb_scale: T,
}

impl<T: Scalar> Default for NormalizationBands<T> {
    fn default() -> Self {
        NormalizationBands {
            gc: Band::new(0.55, 0.70, 0.15),
            mfe: Band::new(-360.0, -330.0, 100.0),
            motif: Band::new(90.0, 110.0, 50.0),
            utr: Band::new(0.6, 0.7, 0.3),
            immune_max: lit(100.0),
            cpb_scale: lit(1.0),
        }
    }
}

impl<T: Scalar> NormalizationBands<T> {
    pub fn validate(&self) -> Result<()> {
        self.gc.validate("gc")?;
        self.mfe.validate("mfe")?;
        self.motif.validate("motif")?;
        self.utr.validate("utr")?;
        if self.immune_max.is_nan()
            || self.cpb_scale.is_nan()
            || self.immune_max <= T::zero()
            || self.cpb_scale <= T::zero()
        {
            return Err(Error::Config("immune_max and cpb_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Per-objective scores in `[0, 1]`, in [`OBJECTIVE_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NormalizedScores<T>(pub [T; 10]);

pub fn normalize_metrics<T: Scalar>(m: &MetricVector<T>, bands: &NormalizationBands<T>) -> NormalizedScores<T> {
    let immune = T::one() - (m.immune_raw / bands.immune_max).min(T::one());
    let cpb = T::one() / (T::one() + (-m.cpb_raw / bands.cpb_scale).exp());
    NormalizedScores([
        m.cai,
        m.tai,
        cpb,
        bands.mfe.score(m.mfe_global),
        m.unpaired30,
        bands.gc.score(m.gc),
        immune.max(T::zero()),
        bands.utr.score(m.utr_balance),
        bands.motif.score(from_usize(m.motif_total)),
        m.embed_sim,
    ])
}

/// Weighted sum of normalized scores.
pub fn weighted_sum<T: Scalar>(scores: &NormalizedScores<T>, w: &FitnessWeights<T>) -> T {
    let total: T = scores.0.iter().zip(w.values()).map(|(&s, w)| s * w).sum();
    total.max(T::zero()).min(T::one())
}

pub fn fitness<T: Scalar>(m: &MetricVector<T>, w: &FitnessWeights<T>, bands: &NormalizationBands<T>) -> Result<T> {
    w.validate()?;
    Ok(weighted_sum(&normalize_metrics(m, bands), w))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GaConfig<T> {
    pub pop_init: usize,
    pub pop_cap: usize,
    pub growth_step: usize,
    /// Probability that an offspring receives a mutation pass.
    pub mutation_rate: T,
    pub crossover_rate: T,
    pub tournament_size: usize,
    pub elitism: usize,
    pub plateau_eps: T,
    pub plateau_window: usize,
    pub max_generations: usize,
    /// Per-codon substitution probability inside a mutation pass.
    pub per_codon_rate: T,
    pub rng_seed: u64,
    /// Evaluate offspring on the rayon pool.
    pub parallel: bool,
    pub bands: NormalizationBands<T>,
}

impl<T: Scalar> Default for GaConfig<T> {
    fn default() -> Self {
        GaConfig {
            pop_init: 220,
            pop_cap: 1000,
            growth_step: 20,
            mutation_rate: lit(0.2),
            crossover_rate: lit(0.8),
            tournament_size: 3,
            elitism: 2,
            plateau_eps: lit(1e-4),
            plateau_window: 5,
            max_generations: 60,
            per_codon_rate: lit(0.01),
            rng_seed: 0,
            parallel: true,
            bands: NormalizationBands::default(),
        }
    }
}

impl<T: Scalar> GaConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.pop_init == 0 {
            return fail("pop_init must be at least 1");
        }
        if self.pop_init > self.pop_cap {
            return fail("pop_init must not exceed pop_cap");
        }
        if self.tournament_size == 0 {
            return fail("tournament_size must be at least 1");
        }
        if self.elitism > self.pop_init {
            return fail("elitism must not exceed pop_init");
        }
        if self.plateau_window == 0 {
            return fail("plateau_window must be at least 1");
        }
        for (name, r) in [
            ("mutation_rate", self.mutation_rate),
            ("crossover_rate", self.crossover_rate),
            ("per_codon_rate", self.per_codon_rate),
        ] {
            if !(r >= T::zero() && r <= T::one()) {
                return fail(&format!("{name} must lie in [0, 1]"));
            }
        }
        if self.plateau_eps.is_nan() || self.plateau_eps < T::zero() {
            return fail("plateau_eps must be >= 0");
        }
        self.bands.validate()
    }
}

/// Independent random stream for one slot of one generation.
pub fn slot_rng(seed: u64, generation: u64, slot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((generation << 32) | (slot & 0xffff_ffff));
    rng
}

#[derive(Debug, Clone, PartialEq)]
pub struct Individual<T> {
    cds: NucleicSequence,
    evaluation: Option<(MetricVector<T>, T)>,
}

impl<T: Scalar> Individual<T> {
    pub fn new(cds: NucleicSequence) -> Self {
        Individual { cds, evaluation: None }
    }

    pub fn evaluated(cds: NucleicSequence, metrics: MetricVector<T>, fitness: T) -> Self {
        Individual {
            cds,
            evaluation: Some((metrics, fitness)),
        }
    }

    pub fn cds(&self) -> &NucleicSequence {
        &self.cds
    }

    pub fn metrics(&self) -> Option<&MetricVector<T>> {
        self.evaluation.as_ref().map(|(m, _)| m)
    }

    pub fn fitness(&self) -> Option<T> {
        self.evaluation.as_ref().map(|&(_, f)| f)
    }

    fn fitness_or_min(&self) -> T {
        self.fitness().unwrap_or_else(T::neg_infinity)
    }
}

/// Usage-weighted synonym samplers for every residue and for stop codons.
#[derive(Debug, Clone)]
pub struct CodonSampler {
    families: HashMap<u8, (Vec<Codon>, WeightedIndex<f64>)>,
    stops: (Vec<Codon>, WeightedIndex<f64>),
}

impl CodonSampler {
    pub fn new<T: Scalar>(usage: &CodonUsageTable<T>) -> Result<Self> {
        let code = GeneticCode::standard();
        let build = |codons: Vec<Codon>| -> Result<(Vec<Codon>, WeightedIndex<f64>)> {
            let weights: Vec<f64> = codons.iter().map(|&c| to_f64(usage.freq(c))).collect();
            let dist = WeightedIndex::new(&weights)
                .map_err(|e| Error::Config(format!("usage weights for {codons:?}: {e}")))?;
            Ok((codons, dist))
        };
        let mut families = HashMap::new();
        for aa in code.residues() {
            families.insert(aa, build(code.family(aa).to_vec())?);
        }
        let stops = build(code.stop_codons().collect())?;
        Ok(CodonSampler { families, stops })
    }

    pub fn sample_residue<R: Rng + ?Sized>(&self, residue: u8, rng: &mut R) -> Codon {
        let (codons, dist) = &self.families[&residue];
        codons[dist.sample(rng)]
    }

    pub fn sample_stop<R: Rng + ?Sized>(&self, rng: &mut R) -> Codon {
        self.stops.0[self.stops.1.sample(rng)]
    }
}

fn check_target(target: &ProteinSequence) -> Result<()> {
    if target.residues().first() != Some(&b'M') {
        return Err(Error::InvalidTarget("must start with M".into()));
    }
    Ok(())
}

/// One usage-sampled CDS for `target`.
pub fn sample_cds<R: Rng + ?Sized>(target: &ProteinSequence, sampler: &CodonSampler, rng: &mut R) -> NucleicSequence {
    let mut codons: Vec<Codon> = target
        .residues()
        .iter()
        .map(|&aa| sampler.sample_residue(aa, rng))
        .collect();
    codons.push(sampler.sample_stop(rng));
    NucleicSequence::from_codons(&codons).expect("codons form a sequence")
}

/// `n` unevaluated individuals with usage-weighted codons.
pub fn seed_population<T: Scalar, R: Rng + ?Sized>(
    target: &ProteinSequence,
    usage: &CodonUsageTable<T>,
    n: usize,
    rng: &mut R,
) -> Result<Vec<Individual<T>>> {
    check_target(target)?;
    let sampler = CodonSampler::new(usage)?;
    Ok((0..n)
        .map(|_| Individual::new(sample_cds(target, &sampler, rng)))
        .collect())
}

/// A FASTA record that failed validation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroppedRecord {
    pub header: String,
    pub reason: String,
}

/// Reads candidate CDS records, keeping those that encode `target`.
pub fn import_population<T: Scalar>(
    path: &Path,
    target: &ProteinSequence,
) -> Result<(Vec<Individual<T>>, Vec<DroppedRecord>)> {
    let code = GeneticCode::standard();
    let records = crate::io::read_fasta(path)?;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (header, text) in records {
        let reason = match NucleicSequence::parse(&text) {
            Err(e) => Some(e.to_string()),
            Ok(seq) => {
                let seq = seq.to_dna();
                let report = validate_cds(&seq, target, code);
                if report.is_valid() {
                    kept.push(Individual::new(seq));
                    None
                } else {
                    Some(report.to_string())
                }
            }
        };
        if let Some(reason) = reason {
            log::warn!("dropping record {header:?}: {reason}");
            dropped.push(DroppedRecord { header, reason });
        }
    }
    if kept.is_empty() {
        return Err(Error::NoValidRecords(path.to_path_buf()));
    }
    Ok((kept, dropped))
}

/// Winner among sampled population indices: highest fitness, lowest index on ties.
pub fn tournament_winner<T: Scalar>(pop: &[Individual<T>], sampled: &[usize]) -> usize {
    let mut best = sampled[0];
    for &i in &sampled[1..] {
        let (fi, fb) = (pop[i].fitness_or_min(), pop[best].fitness_or_min());
        if fi > fb || (fi == fb && i < best) {
            best = i;
        }
    }
    best
}

/// Index of the winner of a size-`k` tournament drawn with replacement.
pub fn tournament_select<T: Scalar, R: Rng + ?Sized>(pop: &[Individual<T>], k: usize, rng: &mut R) -> Result<usize> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    if k == 0 {
        return Err(Error::Config("tournament_size must be at least 1".into()));
    }
    let sampled: Vec<usize> = (0..k).map(|_| rng.gen_range(0..pop.len())).collect();
    Ok(tournament_winner(pop, &sampled))
}

/// Children exchanging codon suffixes after codon `cut`.
pub fn crossover_at(
    a: &NucleicSequence,
    b: &NucleicSequence,
    cut: usize,
) -> Result<(NucleicSequence, NucleicSequence)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            structure: a.len(),
            sequence: b.len(),
        });
    }
    let at = (cut * 3).min(a.len());
    let join = |x: &[u8], y: &[u8]| {
        let mut v = x.to_vec();
        v.extend_from_slice(y);
        NucleicSequence::from_dna_bytes(v, a.kind()).expect("parents are valid")
    };
    let (ab, bb) = (a.as_bytes(), b.as_bytes());
    Ok((join(&ab[..at], &bb[at..]), join(&bb[..at], &ab[at..])))
}

/// Single-point codon-boundary crossover applied with `rate`, otherwise copies.
pub fn crossover<T: Scalar, R: Rng + ?Sized>(
    a: &NucleicSequence,
    b: &NucleicSequence,
    rate: T,
    rng: &mut R,
) -> Result<(NucleicSequence, NucleicSequence)> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            structure: a.len(),
            sequence: b.len(),
        });
    }
    let codons = a.codon_count();
    if codons < 2 || rng.gen::<f64>() >= to_f64(rate) {
        return Ok((a.clone(), b.clone()));
    }
    let cut = rng.gen_range(1..codons);
    crossover_at(a, b, cut)
}

/// Synonymous mutation: with `mutation_rate` a pass replaces each interior
/// codon with probability `per_codon_rate` by a usage-sampled synonym.
pub fn mutate<T: Scalar, R: Rng + ?Sized>(
    cds: &NucleicSequence,
    sampler: &CodonSampler,
    mutation_rate: T,
    per_codon_rate: T,
    rng: &mut R,
) -> NucleicSequence {
    if rng.gen::<f64>() >= to_f64(mutation_rate) {
        return cds.clone();
    }
    let code = GeneticCode::standard();
    let mut codons: Vec<Codon> = cds.codons().collect();
    let last = codons.len().saturating_sub(1);
    let p = to_f64(per_codon_rate);
    for (i, c) in codons.iter_mut().enumerate() {
        if i == 0 || i == last {
            continue;
        }
        if rng.gen::<f64>() < p {
            if let crate::seq::AminoAcid::Residue(aa) = code.amino_acid(*c) {
                *c = sampler.sample_residue(aa, rng);
            }
        }
    }
    NucleicSequence::from_codons(&codons).expect("codons form a sequence")
}

/// Everything needed to score a candidate CDS.
#[derive(Clone)]
pub struct Problem<T> {
    pub target: ProteinSequence,
    pub utr5: Option<NucleicSequence>,
    pub utr3: Option<NucleicSequence>,
    pub tables: Arc<ScoringTables<T>>,
    pub folder: Arc<dyn Folder>,
    pub metric_config: MetricConfig<T>,
    pub weights: FitnessWeights<T>,
}

impl<T: Scalar> Problem<T> {
    pub fn construct(&self, cds: &NucleicSequence) -> Result<Construct> {
        Construct::new(self.utr5.clone(), cds.clone(), self.utr3.clone())
    }
}

type Scored<T> = (MetricVector<T>, T);

/// Evaluates candidates, memoising results by CDS.
pub struct Evaluator<'a, T> {
    problem: &'a Problem<T>,
    bands: NormalizationBands<T>,
    cache: Mutex<HashMap<Vec<u8>, Scored<T>>>,
}

impl<'a, T: Scalar> Evaluator<'a, T> {
    pub fn new(problem: &'a Problem<T>, bands: NormalizationBands<T>) -> Result<Self> {
        problem.weights.validate()?;
        bands.validate()?;
        Ok(Evaluator {
            problem,
            bands,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn evaluate(&self, cds: &NucleicSequence) -> Result<(MetricVector<T>, T)> {
        if let Some(hit) = self.cache.lock().expect("cache lock").get(cds.as_bytes()) {
            return Ok(*hit);
        }
        let construct = self.problem.construct(cds)?;
        let m = evaluate_all(
            &construct,
            &self.problem.tables,
            self.problem.folder.as_ref(),
            &self.problem.metric_config,
        )?;
        let f = weighted_sum(&normalize_metrics(&m, &self.bands), &self.problem.weights);
        self.cache
            .lock()
            .expect("cache lock")
            .insert(cds.as_bytes().to_vec(), (m, f));
        Ok((m, f))
    }

    /// Evaluates every unevaluated individual; the result does not depend on
    /// `parallel`.
    pub fn evaluate_population(&self, pop: &mut [Individual<T>], parallel: bool) -> Result<()> {
        let mut pending: Vec<&NucleicSequence> = Vec::new();
        {
            let cache = self.cache.lock().expect("cache lock");
            let mut seen = std::collections::HashSet::new();
            for ind in pop.iter().filter(|i| i.evaluation.is_none()) {
                let key = ind.cds.as_bytes();
                if !cache.contains_key(key) && seen.insert(key) {
                    pending.push(&ind.cds);
                }
            }
        }
        let results: Vec<Result<(MetricVector<T>, T)>> = if parallel {
            pending.par_iter().map(|c| self.evaluate(c)).collect()
        } else {
            pending.iter().map(|c| self.evaluate(c)).collect()
        };
        for r in results {
            r?;
        }
        let cache = self.cache.lock().expect("cache lock");
        for ind in pop.iter_mut().filter(|i| i.evaluation.is_none()) {
            ind.evaluation = Some(cache[ind.cds.as_bytes()]);
        }
        Ok(())
    }

    pub fn cache_len(&self) -> usize {
        self.cache.lock().expect("cache lock").len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct GenerationStats<T> {
    pub generation: usize,
    pub pop_size: usize,
    pub fitness_mean: T,
    pub fitness_max: T,
    pub fitness_min: T,
    /// Population means in [`MetricVector::FIELD_NAMES`] order.
    pub metric_means: [T; 11],
}

impl<T: Scalar> GenerationStats<T> {
    pub fn of(generation: usize, pop: &[Individual<T>]) -> Result<Self> {
        if pop.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        let n: T = from_usize(pop.len());
        let mut sums = [T::zero(); 11];
        let (mut fsum, mut fmax, mut fmin) = (T::zero(), T::neg_infinity(), T::infinity());
        for ind in pop {
            let (m, f) = ind
                .evaluation
                .as_ref()
                .ok_or_else(|| Error::Metric("statistics over an unevaluated individual".into()))?;
            for (s, v) in sums.iter_mut().zip(m.values()) {
                *s = *s + v;
            }
            fsum = fsum + *f;
            fmax = fmax.max(*f);
            fmin = fmin.min(*f);
        }
        Ok(GenerationStats {
            generation,
            pop_size: pop.len(),
            fitness_mean: fsum / n,
            fitness_max: fmax,
            fitness_min: fmin,
            metric_means: sums.map(|s| s / n),
        })
    }

    pub fn metric_mean(&self, name: &str) -> Option<T> {
        MetricVector::<T>::FIELD_NAMES
            .iter()
            .position(|&f| f == name)
            .map(|k| self.metric_means[k])
    }
}

/// Stable sort by fitness, best first.
fn sort_by_fitness<T: Scalar>(pop: &mut [Individual<T>]) {
    pop.sort_by(|a, b| {
        b.fitness_or_min()
            .partial_cmp(&a.fitness_or_min())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// One generation: elites are carried over, the rest is bred from
/// tournament winners, evaluated, and the new population is returned best
/// first with its statistics.
pub fn evolve_generation<T: Scalar>(
    pop: &[Individual<T>],
    generation: usize,
    config: &GaConfig<T>,
    sampler: &CodonSampler,
    evaluator: &Evaluator<'_, T>,
) -> Result<(Vec<Individual<T>>, GenerationStats<T>)> {
    if pop.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let mut parents = pop.to_vec();
    sort_by_fitness(&mut parents);
    let next_size = (pop.len() + config.growth_step).min(config.pop_cap);
    let elites = config.elitism.min(parents.len()).min(next_size);
    let mut next: Vec<Individual<T>> = parents[..elites].to_vec();
    let mut slot = 0u64;
    while next.len() < next_size {
        let mut rng = slot_rng(config.rng_seed, generation as u64, slot);
        slot += 1;
        let a = tournament_select(&parents, config.tournament_size, &mut rng)?;
        let b = tournament_select(&parents, config.tournament_size, &mut rng)?;
        let (c1, c2) = crossover(&parents[a].cds, &parents[b].cds, config.crossover_rate, &mut rng)?;
        for child in [c1, c2] {
            if next.len() < next_size {
                let child = mutate(&child, sampler, config.mutation_rate, config.per_codon_rate, &mut rng);
                next.push(Individual::new(child));
            }
        }
    }
    evaluator.evaluate_population(&mut next, config.parallel)?;
    sort_by_fitness(&mut next);
    let stats = GenerationStats::of(generation, &next)?;
    Ok((next, stats))
}

#[derive(Debug, Clone)]
pub struct RunOutcome<T> {
    /// Statistics of the evaluated initial population (generation 0).
    pub initial: GenerationStats<T>,
    /// One row per executed generation, starting at 1.
    pub stats: Vec<GenerationStats<T>>,
    /// Final population, best first.
    pub population: Vec<Individual<T>>,
    pub stopped_on_plateau: bool,
}

impl<T: Scalar> RunOutcome<T> {
    /// Best `k` distinct sequences of the final population.
    pub fn top_k(&self, k: usize) -> Vec<Individual<T>> {
        let mut seen = std::collections::HashSet::new();
        self.population
            .iter()
            .filter(|i| seen.insert(i.cds.as_bytes().to_vec()))
            .take(k)
            .cloned()
            .collect()
    }
}

/// Usage-seeded initial population drawn from the generation-0 stream.
pub fn initial_population<T: Scalar>(problem: &Problem<T>, config: &GaConfig<T>) -> Result<Vec<Individual<T>>> {
    let mut rng = slot_rng(config.rng_seed, 0, 0);
    seed_population(&problem.target, &problem.tables.usage, config.pop_init, &mut rng)
}

/// Brings an imported population to exactly `pop_init` individuals,
/// truncating or topping up with seeded candidates.
pub fn fit_to_size<T: Scalar>(
    mut pop: Vec<Individual<T>>,
    problem: &Problem<T>,
    config: &GaConfig<T>,
) -> Result<Vec<Individual<T>>> {
    if pop.len() > config.pop_init {
        log::info!("using the first {} of {} imported records", config.pop_init, pop.len());
        pop.truncate(config.pop_init);
    } else if pop.len() < config.pop_init {
        let fill = initial_population(problem, config)?;
        let missing = config.pop_init - pop.len();
        log::info!("topping up imported population with {missing} seeded candidates");
        pop.extend(fill.into_iter().take(missing));
    }
    Ok(pop)
}

/// Runs the generation loop from `initial` until the best fitness gains less
/// than `plateau_eps` over `plateau_window` generations or
/// `max_generations` is reached. `observe` sees every evaluated population,
/// starting with generation 0.
pub fn run_observed<T: Scalar>(
    problem: &Problem<T>,
    config: &GaConfig<T>,
    initial: Vec<Individual<T>>,
    observe: &mut dyn FnMut(usize, &[Individual<T>]),
) -> Result<RunOutcome<T>> {
    config.validate()?;
    check_target(&problem.target)?;
    if initial.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let code = GeneticCode::standard();
    for ind in &initial {
        let report = validate_cds(&ind.cds, &problem.target, code);
        if !report.is_valid() {
            return Err(Error::InvalidCds(report.to_string()));
        }
    }
    let sampler = CodonSampler::new(&problem.tables.usage)?;
    let evaluator = Evaluator::new(problem, config.bands)?;
    let mut pop = initial;
    evaluator.evaluate_population(&mut pop, config.parallel)?;
    sort_by_fitness(&mut pop);
    observe(0, &pop);
    let initial_stats = GenerationStats::of(0, &pop)?;
    let mut best = vec![initial_stats.fitness_max];
    let mut stats = Vec::new();
    let mut stopped_on_plateau = false;
    for g in 1..=config.max_generations {
        let (next, row) = evolve_generation(&pop, g, config, &sampler, &evaluator)?;
        pop = next;
        observe(g, &pop);
        log::debug!(
            "generation {g}: size {} best {:.6} mean {:.6}",
            row.pop_size,
            to_f64(row.fitness_max),
            to_f64(row.fitness_mean)
        );
        best.push(row.fitness_max);
        stats.push(row);
        if g >= config.plateau_window && best[g] - best[g - config.plateau_window] < config.plateau_eps {
            stopped_on_plateau = g < config.max_generations;
            break;
        }
    }
    Ok(RunOutcome {
        initial: initial_stats,
        stats,
        population: pop,
        stopped_on_plateau,
    })
}

pub fn run<T: Scalar>(problem: &Problem<T>, config: &GaConfig<T>) -> Result<RunOutcome<T>> {
    let initial = initial_population(problem, config)?;
    run_observed(problem, config, initial, &mut |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seq::translate;

    fn nt(s: &str) -> NucleicSequence {
        NucleicSequence::parse(s).unwrap()
    }

    fn protein(s: &str) -> ProteinSequence {
        ProteinSequence::parse(s).unwrap()
    }

    fn metrics_with(f: impl FnOnce(&mut MetricVector<f64>)) -> MetricVector<f64> {
        let mut m = MetricVector {
            cai: 0.5,
            tai: 0.5,
            cpb_raw: 0.0,
            gc: 0.6,
            immune_raw: 0.0,
            unpaired30: 0.5,
            mfe_global: -345.0,
            mfe_local: -10.0,
            utr_balance: 0.65,
            motif_total: 100,
            embed_sim: 0.5,
        };
        f(&mut m);
        m
    }

    #[test]
    fn default_weights_sum_to_one() {
        FitnessWeights::<f64>::default().validate().unwrap();
        FitnessWeights::<f32>::default().validate().unwrap();
        let mut w = FitnessWeights::<f64>::default();
        w.set("cai", 0.3).unwrap();
        assert!(matches!(w.validate(), Err(Error::WeightSum(_))));
        assert!(w.set("bogus", 0.1).is_err());
    }

    #[test]
    fn band_examples() {
        let b = NormalizationBands::<f64>::default();
        assert_eq!(b.mfe.score(-345.0), 1.0);
        assert!((b.mfe.score(-260.0) - 0.3).abs() < 1e-12);
        assert_eq!(b.mfe.score(-500.0), 0.0);
        assert!((b.mfe.score(-356.2) - 1.0).abs() < 1e-12);
        let m = metrics_with(|m| m.immune_raw = 27.3);
        let s = normalize_metrics(&m, &b);
        assert!((s.0[6] - 0.727).abs() < 1e-12);
        let s = normalize_metrics(&metrics_with(|m| m.immune_raw = 250.0), &b);
        assert_eq!(s.0[6], 0.0);
        assert_eq!(normalize_metrics(&metrics_with(|_| {}), &b).0[2], 0.5);
    }

    #[test]
    fn fitness_examples() {
        let b = NormalizationBands::<f64>::default();
        let perfect = metrics_with(|m| {
            m.cai = 1.0;
            m.tai = 1.0;
            m.cpb_raw = 1e6;
            m.unpaired30 = 1.0;
            m.embed_sim = 1.0;
        });
        let w = FitnessWeights::default();
        assert!((fitness(&perfect, &w, &b).unwrap() - 1.0).abs() < 1e-12);
        let worst = MetricVector {
            cai: 0.0,
            tai: 0.0,
            cpb_raw: -1e6,
            gc: 0.0,
            immune_raw: 1000.0,
            unpaired30: 0.0,
            mfe_global: 0.0,
            mfe_local: 0.0,
            utr_balance: 0.0,
            motif_total: 0,
            embed_sim: 0.0,
        };
        assert_eq!(fitness(&worst, &w, &b).unwrap(), 0.0);

        let mut v = [0.0f64; 10];
        v[0] = 0.6;
        v[1] = 0.4;
        let two = FitnessWeights::from_values(v).unwrap();
        let mut s = [0.0f64; 10];
        s[0] = 1.0;
        s[1] = 0.5;
        assert!((weighted_sum(&NormalizedScores(s), &two) - 0.8).abs() < 1e-12);

        let mut bad = w;
        bad.gc = 0.5;
        assert!(fitness(&perfect, &bad, &b).is_err());
    }

    #[test]
    fn seeding_single_codon_targets() {
        let usage = CodonUsageTable::<f64>::bundled_human();
        let mut rng = slot_rng(1, 0, 0);
        let code = GeneticCode::standard();
        for ind in seed_population(&protein("MW"), &usage, 50, &mut rng).unwrap() {
            let s = ind.cds().dna_string();
            assert_eq!(&s[..6], "ATGTGG");
            assert!(code.is_stop(Codon::parse(&s[6..]).unwrap()));
        }
        assert!(seed_population(&protein("AW"), &usage, 1, &mut rng).is_err());
    }

    #[test]
    fn seeding_follows_usage() {
        let text: String = Codon::all().map(|c| format!("{c}\t10\n")).collect();
        let usage = CodonUsageTable::<f64>::parse(&text, "uniform", 0.0).unwrap();
        let mut rng = slot_rng(7, 0, 0);
        let pop = seed_population(&protein("MA"), &usage, 10_000, &mut rng).unwrap();
        let mut counts: HashMap<String, usize> = HashMap::new();
        for ind in &pop {
            *counts.entry(ind.cds().dna_string()[3..6].to_string()).or_default() += 1;
        }
        assert_eq!(counts.len(), 4);
        for (codon, n) in counts {
            let f = n as f64 / 1e4;
            assert!((f - 0.25).abs() <= 0.02, "{codon}: {f}");
        }
    }

    #[test]
    fn tournament_examples() {
        let mk = |f: f64| Individual::evaluated(nt("ATGTAA"), metrics_with(|_| {}), f);
        let pop = vec![mk(0.1), mk(0.9), mk(0.5)];
        assert_eq!(tournament_winner(&pop, &[0, 1, 2]), 1);
        assert_eq!(tournament_winner(&pop, &[2, 0, 2]), 2);
        let flat = vec![mk(0.4), mk(0.4), mk(0.4)];
        assert_eq!(tournament_winner(&flat, &[2, 1, 2]), 1);
        let mut rng = slot_rng(3, 1, 1);
        assert_eq!(tournament_select(&pop[..1], 3, &mut rng).unwrap(), 0);
        assert!(tournament_select::<f64, _>(&[], 3, &mut rng).is_err());
    }

    #[test]
    fn crossover_examples() {
        let a = nt("ATGGCTGCTTAA");
        let b = nt("ATGGCCGCGTAG");
        let (c1, c2) = crossover_at(&a, &b, 2).unwrap();
        assert_eq!(c1.dna_string(), "ATGGCTGCGTAG");
        assert_eq!(c2.dna_string(), "ATGGCCGCTTAA");
        let mut rng = slot_rng(5, 1, 0);
        for _ in 0..100 {
            let (x, y) = crossover(&a, &b, 0.0, &mut rng).unwrap();
            assert_eq!((x, y), (a.clone(), b.clone()));
            let (x, y) = crossover(&a, &a, 1.0, &mut rng).unwrap();
            assert_eq!((x, y), (a.clone(), a.clone()));
        }
        assert!(crossover_at(&a, &nt("ATGTAA"), 1).is_err());
    }

    #[test]
    fn mutation_preserves_translation() {
        let usage = CodonUsageTable::<f64>::bundled_human();
        let sampler = CodonSampler::new(&usage).unwrap();
        let code = GeneticCode::standard();
        let mut rng = slot_rng(11, 2, 0);
        let target = protein("MALWKRSSGTYEEDLLPQ");
        for _ in 0..1000 {
            let x = sample_cds(&target, &sampler, &mut rng);
            let y = mutate(&x, &sampler, 1.0, 0.5, &mut rng);
            assert_eq!(translate(&y, code).unwrap(), translate(&x, code).unwrap());
            assert_eq!(&y.as_bytes()[..3], b"ATG");
            assert_eq!(&y.as_bytes()[y.len() - 3..], &x.as_bytes()[x.len() - 3..]);
        }
        let m = nt("ATGTAA");
        assert_eq!(mutate(&m, &sampler, 1.0, 1.0, &mut rng), m);
        let ala = ["GCT", "GCC", "GCA", "GCG"];
        for _ in 0..100 {
            let y = mutate(&nt("ATGGCTTAA"), &sampler, 1.0, 1.0, &mut rng);
            assert!(ala.contains(&&y.dna_string()[3..6]));
        }
    }

    #[test]
    fn slot_streams_are_independent_and_reproducible() {
        let draw = |g, s| slot_rng(9, g, s).gen::<u64>();
        assert_eq!(draw(1, 2), draw(1, 2));
        assert_ne!(draw(1, 2), draw(1, 3));
        assert_ne!(draw(1, 2), draw(2, 2));
        assert_ne!(slot_rng(8, 1, 2).gen::<u64>(), draw(1, 2));
    }

    fn toy_problem() -> Problem<f64> {
        let tables = Arc::new(ScoringTables::<f64>::bundled_human());
        let target = protein("MASKGEELFTGVVPILVELDGDVNGHKF");
        let mut rng = slot_rng(0, 0, 0);
        let reference = seed_population(&target, &tables.usage, 1, &mut rng).unwrap()[0]
            .cds()
            .clone();
        Problem {
            target,
            utr5: Some(nt("GGGAAATAAGAGAGAAAAGAAGAGTAAGAAGAAATATAAGAGCCACC")),
            utr3: Some(nt("GCTGGAGCCTCGGTGGCCTAGCTTCTTGCCCCTTGGGCC")),
            tables,
            folder: Arc::new(crate::folding::BuiltinFolder::default()),
            metric_config: MetricConfig::new(reference),
            weights: FitnessWeights::default(),
        }
    }

    fn small_config() -> GaConfig<f64> {
        GaConfig {
            pop_init: 12,
            pop_cap: 30,
            growth_step: 6,
            max_generations: 6,
            rng_seed: 17,
            ..GaConfig::default()
        }
    }

    #[test]
    fn small_run_invariants() {
        let problem = toy_problem();
        let config = small_config();
        let code = GeneticCode::standard();
        let mut sizes = Vec::new();
        let out = run_observed(
            &problem,
            &config,
            initial_population(&problem, &config).unwrap(),
            &mut |_, pop| {
                sizes.push(pop.len());
                for ind in pop {
                    assert!(validate_cds(ind.cds(), &problem.target, code).is_valid());
                    let f = ind.fitness().unwrap();
                    assert!((0.0..=1.0).contains(&f));
                }
            },
        )
        .unwrap();
        assert_eq!(sizes[0], 12);
        assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        assert!(sizes.iter().all(|&s| s <= 30));
        assert_eq!(&sizes[..4], &[12, 18, 24, 30]);
        let best: Vec<f64> = out.stats.iter().map(|s| s.fitness_max).collect();
        assert!(out.initial.fitness_max <= best[0]);
        assert!(best.windows(2).all(|w| w[0] <= w[1]));
        let top = out.top_k(5);
        assert!(top.windows(2).all(|w| w[0].fitness() >= w[1].fitness()));
    }

    #[test]
    fn run_is_deterministic_across_parallelism() {
        let problem = toy_problem();
        let mut config = small_config();
        let a = run(&problem, &config).unwrap();
        config.parallel = false;
        let b = run(&problem, &config).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.population, b.population);
    }

    #[test]
    fn single_generation_gives_one_row() {
        let problem = toy_problem();
        let config = GaConfig {
            max_generations: 1,
            ..small_config()
        };
        let out = run(&problem, &config).unwrap();
        assert_eq!(out.stats.len(), 1);
        assert_eq!(out.stats[0].generation, 1);
        assert!(!out.stopped_on_plateau);
    }

    #[test]
    fn config_validation() {
        let ok = GaConfig::<f64>::default();
        ok.validate().unwrap();
        assert!(GaConfig {
            pop_init: 2000,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            tournament_size: 0,
            ..ok.clone()
        }
        .validate()
        .is_err());
        assert!(GaConfig {
            mutation_rate: 1.5,
            ..ok.clone()
        }
        .validate()
        .is_err());
    }
}
