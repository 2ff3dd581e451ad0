//! Raw per-construct metrics: codon usage indices, codon-pair bias, GC and
//! immune-motif content, start-codon accessibility, folding energies, UTR
//! balance, motif complexity and embedding similarity.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codon_data::{AdaptivenessTable, CodonPairTable, CodonUsageTable, TaiWeightTable};
use crate::error::{Error, Result};
use crate::folding::{count_motifs, paired_fraction, window_around_start, Folder, SecondaryStructure, StartWindow};
use crate::num::{from_usize, geometric_mean, lit, Scalar};
use crate::seq::{Codon, Construct, GeneticCode, NucleicSequence};

/// Raw metric values of one construct.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct MetricVector<T> {
    pub cai: T,
    pub tai: T,
    /// Mean codon-pair score.
    pub cpb_raw: T,
    pub gc: T,
    /// CpG count plus weighted UpA count over the transcript.
    pub immune_raw: T,
    /// Unpaired fraction of the start-codon window.
    pub unpaired30: T,
    /// kcal/mol
    pub mfe_global: T,
    /// kcal/mol
    pub mfe_local: T,
    pub utr_balance: T,
    pub motif_total: usize,
    pub embed_sim: T,
}

impl<T: Scalar> MetricVector<T> {
    pub const FIELD_NAMES: [&'static str; 11] = [
        "cai",
        "tai",
        "cpb_raw",
        "gc",
        "immune_raw",
        "unpaired30",
        "mfe_global",
        "mfe_local",
        "utr_balance",
        "motif_total",
        "embed_sim",
    ];

    /// Field values in [`FIELD_NAMES`](Self::FIELD_NAMES) order.
    pub fn values(&self) -> [T; 11] {
        [
            self.cai,
            self.tai,
            self.cpb_raw,
            self.gc,
            self.immune_raw,
            self.unpaired30,
            self.mfe_global,
            self.mfe_local,
            self.utr_balance,
            from_usize(self.motif_total),
            self.embed_sim,
        ]
    }

    /// Checks every field against its declared range.
    pub fn check_ranges(&self) -> Result<()> {
        let unit = [
            ("cai", self.cai),
            ("tai", self.tai),
            ("gc", self.gc),
            ("unpaired30", self.unpaired30),
            ("utr_balance", self.utr_balance),
            ("embed_sim", self.embed_sim),
        ];
        for (name, v) in unit {
            if !(v >= T::zero() && v <= T::one()) {
                return Err(Error::Metric(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if self.immune_raw.is_nan() || self.immune_raw < T::zero() {
            return Err(Error::Metric(format!("immune_raw = {} is negative", self.immune_raw)));
        }
        for (name, v) in [
            ("cpb_raw", self.cpb_raw),
            ("mfe_global", self.mfe_global),
            ("mfe_local", self.mfe_local),
        ] {
            if !v.is_finite() {
                return Err(Error::Metric(format!("{name} is not finite")));
            }
        }
        Ok(())
    }
}

/// Geometric mean of relative adaptiveness, skipping stops and the
/// single-codon families (ATG, TGG).
pub fn cai<T: Scalar>(cds: &NucleicSequence, w: &AdaptivenessTable<T>) -> Result<T> {
    let code = GeneticCode::standard();
    let included = cds.codons().filter(|&c| {
        !code.is_stop(c)
            && match code.amino_acid(c) {
                crate::seq::AminoAcid::Residue(aa) => code.family(aa).len() > 1,
                crate::seq::AminoAcid::Stop => false,
            }
    });
    geometric_mean(included.map(|c| w.weight(c)))
        .ok_or_else(|| Error::Metric("CAI undefined: no codons from multi-codon families".into()))
}

/// Geometric mean of tAI weights over sense codons.
pub fn tai<T: Scalar>(cds: &NucleicSequence, s: &TaiWeightTable<T>) -> Result<T> {
    let code = GeneticCode::standard();
    geometric_mean(cds.codons().filter(|&c| !code.is_stop(c)).map(|c| s.weight(c)))
        .ok_or_else(|| Error::Metric("tAI undefined: no sense codons".into()))
}

/// Mean codon-pair score over adjacent sense-codon pairs.
pub fn codon_pair_bias<T: Scalar>(cds: &NucleicSequence, table: &CodonPairTable<T>) -> Result<T> {
    let code = GeneticCode::standard();
    let sense: Vec<Codon> = cds.codons().filter(|&c| !code.is_stop(c)).collect();
    if sense.len() < 2 {
        return Err(Error::Metric("codon-pair bias needs at least two sense codons".into()));
    }
    let sum: T = sense.windows(2).map(|p| table.score(p[0], p[1])).sum();
    Ok(sum / from_usize(sense.len() - 1))
}

pub fn gc_content<T: Scalar>(seq: &NucleicSequence) -> T {
    let gc = seq.as_bytes().iter().filter(|&&b| b == b'G' || b == b'C').count();
    from_usize::<T>(gc) / from_usize(seq.len())
}

/// Overlapping `CG` and `TA` (UpA) dinucleotide counts.
pub fn dinucleotide_counts(seq: &NucleicSequence) -> (usize, usize) {
    let mut cg = 0;
    let mut ta = 0;
    for w in seq.as_bytes().windows(2) {
        match (w[0], w[1]) {
            (b'C', b'G') => cg += 1,
            (b'T', b'A') => ta += 1,
            _ => {}
        }
    }
    (cg, ta)
}

/// `#CpG + upa_weight * #UpA`.
pub fn immune_score<T: Scalar>(seq: &NucleicSequence, upa_weight: T) -> T {
    let (cg, ta) = dinucleotide_counts(seq);
    from_usize::<T>(cg) + upa_weight * from_usize(ta)
}

/// Unweighted CpG + UpA motif count.
pub fn immune_motif_count(seq: &NucleicSequence) -> usize {
    let (cg, ta) = dinucleotide_counts(seq);
    cg + ta
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowFold<T> {
    pub window: StartWindow,
    pub structure: SecondaryStructure,
    pub unpaired: T,
}

/// Folds the start-codon window on its own and reports its unpaired fraction.
pub fn unpaired30<T: Scalar>(construct: &Construct, folder: &dyn Folder, radius: usize) -> Result<WindowFold<T>> {
    let window = window_around_start(construct, radius);
    let structure = folder.fold(&window.sequence)?;
    let unpaired = unpaired_fraction(&structure)?;
    Ok(WindowFold {
        window,
        structure,
        unpaired,
    })
}

pub fn unpaired_fraction<T: Scalar>(structure: &SecondaryStructure) -> Result<T> {
    Ok(T::one() - paired_fraction::<T>(structure, 0..structure.len())?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtrBalance<T> {
    pub value: T,
    /// Set when the construct has no UTR bases; `value` is then 0.
    pub empty_utrs: bool,
}

/// Paired fraction of the pooled 5' and 3' UTR positions in the global fold.
pub fn utr_balance<T: Scalar>(construct: &Construct, global: &SecondaryStructure) -> Result<UtrBalance<T>> {
    if global.len() != construct.transcript().len() {
        return Err(Error::LengthMismatch {
            structure: global.len(),
            sequence: construct.transcript().len(),
        });
    }
    let utr_positions = (0..construct.cds_start()).chain(construct.cds_end()..global.len());
    let (mut total, mut paired) = (0usize, 0usize);
    for i in utr_positions {
        total += 1;
        paired += usize::from(global.is_paired(i));
    }
    if total == 0 {
        return Ok(UtrBalance {
            value: T::zero(),
            empty_utrs: true,
        });
    }
    Ok(UtrBalance {
        value: from_usize::<T>(paired) / from_usize(total),
        empty_utrs: false,
    })
}

/// Similarity between two coding sequences in `[0, 1]`.
pub trait EmbeddingScorer<T>: Send + Sync {
    fn similarity(&self, candidate: &NucleicSequence, reference: &NucleicSequence) -> Result<T>;
}

/// Cosine similarity of 61-dimensional sense-codon count vectors.
#[derive(Debug, Clone, Copy, Default)]
pub struct CodonFrequencyScorer;

impl CodonFrequencyScorer {
    fn counts(seq: &NucleicSequence) -> [u64; 64] {
        let code = GeneticCode::standard();
        let mut v = [0u64; 64];
        for c in seq.codons().filter(|&c| !code.is_stop(c)) {
            v[c.index()] += 1;
        }
        v
    }
}

impl<T: Scalar> EmbeddingScorer<T> for CodonFrequencyScorer {
    fn similarity(&self, candidate: &NucleicSequence, reference: &NucleicSequence) -> Result<T> {
        let (a, b) = (Self::counts(candidate), Self::counts(reference));
        let dot: u64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let na: u64 = a.iter().map(|x| x * x).sum();
        let nb: u64 = b.iter().map(|x| x * x).sum();
        if na == 0 || nb == 0 {
            return Err(Error::Metric("embedding of a CDS without sense codons".into()));
        }
        if a == b {
            return Ok(T::one());
        }
        let cos = lit::<T>(dot as f64) / (lit::<T>(na as f64).sqrt() * lit::<T>(nb as f64).sqrt());
        Ok(cos.min(T::one()))
    }
}

pub fn embed_similarity<T: Scalar>(
    candidate: &NucleicSequence,
    reference: &NucleicSequence,
    scorer: &dyn EmbeddingScorer<T>,
) -> Result<T> {
    scorer.similarity(candidate, reference)
}

/// Reference tables consumed by the metrics.
#[derive(Debug, Clone)]
pub struct ScoringTables<T> {
    pub usage: CodonUsageTable<T>,
    pub adaptiveness: AdaptivenessTable<T>,
    pub tai: TaiWeightTable<T>,
    pub cps: CodonPairTable<T>,
}

impl<T: Scalar> ScoringTables<T> {
    pub fn new(usage: CodonUsageTable<T>, tai: TaiWeightTable<T>, cps: CodonPairTable<T>) -> Self {
        let adaptiveness = crate::codon_data::adaptiveness_from_usage(&usage);
        ScoringTables {
            usage,
            adaptiveness,
            tai,
            cps,
        }
    }

    /// Bundled human usage and tAI tables with a neutral codon-pair table.
    pub fn bundled_human() -> Self {
        Self::new(
            CodonUsageTable::bundled_human(),
            TaiWeightTable::bundled_human(),
            CodonPairTable::neutral(),
        )
    }
}

pub const DEFAULT_WINDOW_RADIUS: usize = 30;

#[derive(Clone)]
pub struct MetricConfig<T> {
    pub upa_weight: T,
    pub window_radius: usize,
    /// Reference CDS for embedding similarity.
    pub reference: NucleicSequence,
    pub scorer: Arc<dyn EmbeddingScorer<T>>,
}

impl<T: Scalar> MetricConfig<T> {
    pub fn new(reference: NucleicSequence) -> Self {
        MetricConfig {
            upa_weight: T::one(),
            window_radius: DEFAULT_WINDOW_RADIUS,
            reference,
            scorer: Arc::new(CodonFrequencyScorer),
        }
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for MetricConfig<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricConfig")
            .field("upa_weight", &self.upa_weight)
            .field("window_radius", &self.window_radius)
            .field("reference", &self.reference)
            .finish_non_exhaustive()
    }
}

/// Metrics together with the structures they were computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub metrics: MetricVector<T>,
    pub global: SecondaryStructure,
    pub window: WindowFold<T>,
    pub empty_utrs: bool,
}

pub fn evaluate_detailed<T: Scalar>(
    construct: &Construct,
    tables: &ScoringTables<T>,
    folder: &dyn Folder,
    config: &MetricConfig<T>,
) -> Result<Evaluation<T>> {
    let cds = construct.cds();
    let transcript = construct.transcript();
    let global = folder.fold(transcript)?;
    let mfe_global = global
        .energy()
        .ok_or_else(|| Error::Metric("global fold carries no energy".into()))?;
    let window = unpaired30::<T>(construct, folder, config.window_radius)?;
    let mfe_local = window
        .structure
        .energy()
        .ok_or_else(|| Error::Metric("window fold carries no energy".into()))?;
    let balance = utr_balance::<T>(construct, &global)?;
    if balance.empty_utrs {
        log::warn!("construct has no UTR bases; utr_balance set to 0");
    }
    let metrics = MetricVector {
        cai: cai(cds, &tables.adaptiveness)?,
        tai: tai(cds, &tables.tai)?,
        cpb_raw: codon_pair_bias(cds, &tables.cps)?,
        gc: gc_content(transcript),
        immune_raw: immune_score(transcript, config.upa_weight),
        unpaired30: window.unpaired,
        mfe_global: lit(mfe_global),
        mfe_local: lit(mfe_local),
        utr_balance: balance.value,
        motif_total: count_motifs(&global).total(),
        embed_sim: embed_similarity(cds, &config.reference, config.scorer.as_ref())?,
    };
    Ok(Evaluation {
        metrics,
        global,
        window,
        empty_utrs: balance.empty_utrs,
    })
}

pub fn evaluate_all<T: Scalar>(
    construct: &Construct,
    tables: &ScoringTables<T>,
    folder: &dyn Folder,
    config: &MetricConfig<T>,
) -> Result<MetricVector<T>> {
    evaluate_detailed(construct, tables, folder, config).map(|e| e.metrics)
}
