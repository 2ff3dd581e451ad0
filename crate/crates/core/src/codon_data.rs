//! Reference tables: codon usage, relative adaptiveness (CAI weights), tAI
//! weights and codon-pair scores.
//!
//! Table files are plain text, one `CODON<TAB>value` record per line, with
//! `#` comments. Codon-pair files use `CODON1<TAB>CODON2<TAB>value`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::num::{lit, to_f64, Scalar};
use crate::seq::{structural_violations, CdsReport, Codon, GeneticCode, NucleicSequence};

const BUNDLED_USAGE: &str = include_str!("../data/human_codon_usage.tsv");
const BUNDLED_TAI: &str = include_str!("../data/human_tai_weights.tsv");

pub const DEFAULT_USAGE_PSEUDOCOUNT: f64 = 0.5;
pub const DEFAULT_CPS_PSEUDOCOUNT: f64 = 0.5;

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads `CODON<TAB>value` records. Duplicates are rejected.
fn parse_codon_values(text: &str, source: &str) -> Result<[Option<f64>; 64]> {
    let mut values = [None; 64];
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::parse(source, n + 1, "expected CODON<TAB>value"));
        }
        let codon = Codon::parse(fields[0]).map_err(|e| Error::parse(source, n + 1, e.to_string()))?;
        let value: f64 = fields[1]
            .parse()
            .map_err(|_| Error::parse(source, n + 1, format!("bad number {:?}", fields[1])))?;
        if !value.is_finite() {
            return Err(Error::parse(source, n + 1, "non-finite value"));
        }
        if values[codon.index()].replace(value).is_some() {
            return Err(Error::parse(source, n + 1, format!("duplicate codon {codon}")));
        }
    }
    Ok(values)
}

/// Per-family codon usage frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct CodonUsageTable<T> {
    freq: [T; 64],
    provenance: String,
}

impl<T: Scalar> CodonUsageTable<T> {
    /// Normalises raw counts within each synonym family after adding
    /// `pseudocount` to every codon. Stop codons are optional; without all
    /// three they are treated as equally likely.
    pub fn from_counts(counts: &[Option<f64>; 64], pseudocount: f64, provenance: impl Into<String>) -> Result<Self> {
        let code = GeneticCode::standard();
        for codon in code.sense_codons() {
            match counts[codon.index()] {
                None => return Err(Error::MissingCodon(codon.as_string())),
                Some(v) if v < 0.0 => {
                    return Err(Error::InvalidTableValue {
                        codon: codon.as_string(),
                        value: v,
                        reason: "negative frequency",
                    })
                }
                _ => {}
            }
        }
        for codon in code.stop_codons() {
            if let Some(v) = counts[codon.index()] {
                if v < 0.0 {
                    return Err(Error::InvalidTableValue {
                        codon: codon.as_string(),
                        value: v,
                        reason: "negative frequency",
                    });
                }
            }
        }
        let mut freq = [T::zero(); 64];
        let mut normalise = |family: &[Codon], raw: &dyn Fn(Codon) -> f64| -> Result<()> {
            let smoothed: Vec<f64> = family.iter().map(|&c| raw(c) + pseudocount).collect();
            let total: f64 = smoothed.iter().sum();
            for (&c, &v) in family.iter().zip(&smoothed) {
                if v <= 0.0 {
                    return Err(Error::InvalidTableValue {
                        codon: c.as_string(),
                        value: v,
                        reason: "frequency must be positive after smoothing",
                    });
                }
                freq[c.index()] = lit(v / total);
            }
            Ok(())
        };
        for aa in code.residues() {
            normalise(code.family(aa), &|c| counts[c.index()].unwrap_or(0.0))?;
        }
        let stops: Vec<Codon> = code.stop_codons().collect();
        if stops.iter().all(|c| counts[c.index()].is_some()) {
            normalise(&stops, &|c| counts[c.index()].unwrap_or(0.0))?;
        } else {
            normalise(&stops, &|_| 1.0)?;
        }
        Ok(CodonUsageTable {
            freq,
            provenance: provenance.into(),
        })
    }

    pub fn parse(text: &str, source: &str, pseudocount: f64) -> Result<Self> {
        let counts = parse_codon_values(text, source)?;
        let provenance = text
            .lines()
            .find_map(|l| l.trim().strip_prefix("# provenance:"))
            .map(|s| s.trim().to_string())
            .unwrap_or_else(|| source.to_string());
        Self::from_counts(&counts, pseudocount, provenance)
    }

    /// Human codon usage shipped with the crate.
    pub fn bundled_human() -> Self {
        Self::parse(BUNDLED_USAGE, "human_codon_usage.tsv", DEFAULT_USAGE_PSEUDOCOUNT)
            .expect("bundled usage table is valid")
    }

    #[inline]
    pub fn freq(&self, codon: Codon) -> T {
        self.freq[codon.index()]
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }
}

pub fn load_usage_table<T: Scalar>(path: &Path, pseudocount: f64) -> Result<CodonUsageTable<T>> {
    CodonUsageTable::parse(&read_text(path)?, &path.display().to_string(), pseudocount)
}

/// Relative adaptiveness `w_c = f_c / max(f over the family of c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivenessTable<T> {
    w: [T; 64],
}

impl<T: Scalar> AdaptivenessTable<T> {
    /// Builds a table from explicit sense-codon weights; family maxima are
    /// not enforced here, which makes toy tables easy to write in tests.
    pub fn from_weights(w: [T; 64]) -> Self {
        AdaptivenessTable { w }
    }

    #[inline]
    pub fn weight(&self, codon: Codon) -> T {
        self.w[codon.index()]
    }
}

pub fn adaptiveness_from_usage<T: Scalar>(usage: &CodonUsageTable<T>) -> AdaptivenessTable<T> {
    let code = GeneticCode::standard();
    let mut w = [T::zero(); 64];
    for aa in code.residues() {
        let family = code.family(aa);
        let max = family.iter().map(|&c| usage.freq(c)).fold(T::zero(), T::max);
        for &c in family {
            let f = usage.freq(c);
            w[c.index()] = if f == max { T::one() } else { f / max };
        }
    }
    AdaptivenessTable { w }
}

/// tAI weights in `(0, 1]` with global maximum 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TaiWeightTable<T> {
    s: [T; 64],
}

impl<T: Scalar> TaiWeightTable<T> {
    /// Validates positivity and rescales so the largest weight is exactly 1.
    pub fn from_values(values: &[Option<f64>; 64]) -> Result<Self> {
        let code = GeneticCode::standard();
        for codon in code.stop_codons() {
            if values[codon.index()].is_some() {
                return Err(Error::InvalidTableValue {
                    codon: codon.as_string(),
                    value: values[codon.index()].unwrap_or_default(),
                    reason: "stop codons carry no tAI weight",
                });
            }
        }
        let mut max = 0.0f64;
        for codon in code.sense_codons() {
            match values[codon.index()] {
                None => return Err(Error::MissingCodon(codon.as_string())),
                Some(v) if v <= 0.0 => {
                    return Err(Error::InvalidTableValue {
                        codon: codon.as_string(),
                        value: v,
                        reason: "tAI weight must be positive",
                    })
                }
                Some(v) => max = max.max(v),
            }
        }
        let mut s = [T::zero(); 64];
        for codon in code.sense_codons() {
            let v = values[codon.index()].unwrap_or_default();
            s[codon.index()] = if v == max { T::one() } else { lit(v / max) };
        }
        Ok(TaiWeightTable { s })
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        Self::from_values(&parse_codon_values(text, source)?)
    }

    pub fn bundled_human() -> Self {
        Self::parse(BUNDLED_TAI, "human_tai_weights.tsv").expect("bundled tAI table is valid")
    }

    #[inline]
    pub fn weight(&self, codon: Codon) -> T {
        self.s[codon.index()]
    }
}

pub fn load_tai_table<T: Scalar>(path: &Path) -> Result<TaiWeightTable<T>> {
    TaiWeightTable::parse(&read_text(path)?, &path.display().to_string())
}

/// Codon-pair scores (natural-log observed/expected ratios) over all ordered
/// sense-codon pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct CodonPairTable<T> {
    cps: Vec<T>,
    pair_count_total: u64,
}

#[inline]
fn pair_index(a: Codon, b: Codon) -> usize {
    a.index() * 64 + b.index()
}

const PAIR_TOTAL_TAG: &str = "#pair_count_total";

impl<T: Scalar> CodonPairTable<T> {
    /// Table with every score zero: codon pairs carry no preference.
    pub fn neutral() -> Self {
        CodonPairTable {
            cps: vec![T::zero(); 64 * 64],
            pair_count_total: 0,
        }
    }

    #[inline]
    pub fn score(&self, a: Codon, b: Codon) -> T {
        self.cps[pair_index(a, b)]
    }

    pub fn pair_count_total(&self) -> u64 {
        self.pair_count_total
    }

    /// Sets one score; used to build toy tables.
    pub fn set_score(&mut self, a: Codon, b: Codon, value: T) {
        self.cps[pair_index(a, b)] = value;
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let code = GeneticCode::standard();
        let mut seen = vec![false; 64 * 64];
        let mut table = Self::neutral();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if let Some(rest) = line.strip_prefix(PAIR_TOTAL_TAG) {
                table.pair_count_total = rest
                    .trim()
                    .parse()
                    .map_err(|_| Error::parse(source, n + 1, "bad pair count total"))?;
                continue;
            }
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 3 {
                return Err(Error::parse(source, n + 1, "expected CODON1<TAB>CODON2<TAB>value"));
            }
            let parse_codon = |s: &str| -> Result<Codon> {
                let c = Codon::parse(s).map_err(|e| Error::parse(source, n + 1, e.to_string()))?;
                if code.is_stop(c) {
                    return Err(Error::parse(source, n + 1, format!("stop codon {c} in pair table")));
                }
                Ok(c)
            };
            let (a, b) = (parse_codon(fields[0])?, parse_codon(fields[1])?);
            let value: f64 = fields[2]
                .parse()
                .map_err(|_| Error::parse(source, n + 1, format!("bad number {:?}", fields[2])))?;
            if !value.is_finite() {
                return Err(Error::parse(source, n + 1, "non-finite value"));
            }
            let idx = pair_index(a, b);
            if std::mem::replace(&mut seen[idx], true) {
                return Err(Error::parse(source, n + 1, format!("duplicate pair {a} {b}")));
            }
            table.cps[idx] = lit(value);
        }
        for a in code.sense_codons() {
            for b in code.sense_codons() {
                if !seen[pair_index(a, b)] {
                    return Err(Error::MissingCodon(format!("{a}-{b}")));
                }
            }
        }
        Ok(table)
    }

    /// Serialises in the `CODON1<TAB>CODON2<TAB>value` format. Values use
    /// shortest round-trip formatting so a reload is exact.
    pub fn to_tsv(&self) -> String {
        let code = GeneticCode::standard();
        let mut out = String::with_capacity(61 * 61 * 20);
        out.push_str("# codon-pair scores: ln(observed / expected)\n");
        out.push_str(&format!("{PAIR_TOTAL_TAG}\t{}\n", self.pair_count_total));
        for a in code.sense_codons() {
            for b in code.sense_codons() {
                out.push_str(&format!("{a}\t{b}\t{}\n", to_f64(self.score(a, b))));
            }
        }
        out
    }
}

pub fn load_cps_table<T: Scalar>(path: &Path) -> Result<CodonPairTable<T>> {
    CodonPairTable::parse(&read_text(path)?, &path.display().to_string())
}

/// Adjacent sense-codon pair counts of a corpus, indexed `a * 64 + b`.
pub fn count_codon_pairs(corpus: &[NucleicSequence]) -> Result<Vec<u64>> {
    let code = GeneticCode::standard();
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut counts = vec![0u64; 64 * 64];
    for (n, seq) in corpus.iter().enumerate() {
        let violations = structural_violations(seq, code);
        if !violations.is_empty() {
            return Err(Error::InvalidCds(format!(
                "corpus sequence {}: {}",
                n + 1,
                CdsReport { violations }
            )));
        }
        let codons: Vec<Codon> = seq.codons().collect();
        for w in codons.windows(2) {
            if !code.is_stop(w[0]) && !code.is_stop(w[1]) {
                counts[pair_index(w[0], w[1])] += 1;
            }
        }
    }
    Ok(counts)
}

/// Builds codon-pair scores from a corpus of coding sequences.
///
/// With smoothed pair counts `N(AB) = count(AB) + pseudocount`, codon and
/// amino-acid counts are the corresponding marginals of `N`, and
/// `cps(AB) = ln( N(AB) * N(X) * N(Y) / (N(A) * N(B) * N(XY)) )` where `X`
/// and `Y` are the residues encoded by `A` and `B`.
pub fn build_cps_table<T: Scalar>(corpus: &[NucleicSequence], pseudocount: f64) -> Result<CodonPairTable<T>> {
    if pseudocount.is_nan() || pseudocount < 0.0 {
        return Err(Error::Config(format!("pseudocount {pseudocount} must be nonnegative")));
    }
    let counts = count_codon_pairs(corpus)?;
    let code = GeneticCode::standard();
    let sense: Vec<Codon> = code.sense_codons().collect();
    let aa_of = |c: Codon| match code.amino_acid(c) {
        crate::seq::AminoAcid::Residue(r) => (r - b'A') as usize,
        crate::seq::AminoAcid::Stop => unreachable!("sense codon"),
    };

    let smoothed = |a: Codon, b: Codon| counts[pair_index(a, b)] as f64 + pseudocount;
    let mut first = [0.0f64; 64];
    let mut second = [0.0f64; 64];
    let mut aa_first = [0.0f64; 26];
    let mut aa_second = [0.0f64; 26];
    let mut aa_pair = vec![0.0f64; 26 * 26];
    for &a in &sense {
        for &b in &sense {
            let n = smoothed(a, b);
            first[a.index()] += n;
            second[b.index()] += n;
            aa_first[aa_of(a)] += n;
            aa_second[aa_of(b)] += n;
            aa_pair[aa_of(a) * 26 + aa_of(b)] += n;
        }
    }

    let mut table = CodonPairTable::neutral();
    table.pair_count_total = counts.iter().sum();
    for &a in &sense {
        for &b in &sense {
            let (x, y) = (aa_of(a), aa_of(b));
            let observed = smoothed(a, b);
            let expected = first[a.index()] * second[b.index()] / (aa_first[x] * aa_second[y]) * aa_pair[x * 26 + y];
            let score = if observed > 0.0 && expected > 0.0 {
                (observed / expected).ln()
            } else {
                // only reachable with a zero pseudocount
                f64::NEG_INFINITY
            };
            table.cps[pair_index(a, b)] = lit(score);
        }
    }
    Ok(table)
}
