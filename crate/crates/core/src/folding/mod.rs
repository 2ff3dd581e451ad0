//! RNA secondary structure: prediction (built-in and external), dot-bracket
//! handling, loop decomposition and windowed accessibility.

mod energy;
mod external;
mod mfe;
mod nussinov;

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::num::{from_usize, Scalar};
use crate::seq::{Construct, NucleicSequence};

pub use energy::{pair_type, EnergyModel, PairType, DCAL_PER_KCAL};
pub use external::{format_fold_output, parse_energy_line, parse_fold_output, ExternalFolder};
pub use mfe::fold_mfe;
pub use nussinov::fold_nussinov;

pub const DEFAULT_HAIRPIN_MIN: usize = 3;
pub const DEFAULT_MAX_BUILTIN_LENGTH: usize = 2000;

/// A pseudoknot-free secondary structure over a sequence of known length.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondaryStructure {
    dot_bracket: String,
    partner: Vec<Option<usize>>,
    /// Free energy in kcal/mol; absent for pair-maximising folds.
    energy: Option<f64>,
}

impl SecondaryStructure {
    pub(crate) fn from_pairs(len: usize, pairs: &[(usize, usize)], energy: Option<f64>) -> Self {
        let mut partner = vec![None; len];
        let mut db = vec![b'.'; len];
        for &(i, j) in pairs {
            debug_assert!(i < j && j < len);
            partner[i] = Some(j);
            partner[j] = Some(i);
            db[i] = b'(';
            db[j] = b')';
        }
        SecondaryStructure {
            dot_bracket: String::from_utf8(db).expect("ascii"),
            partner,
            energy,
        }
    }

    pub fn unpaired(len: usize, energy: Option<f64>) -> Self {
        Self::from_pairs(len, &[], energy)
    }

    pub fn with_energy(mut self, energy: f64) -> Self {
        self.energy = Some(energy);
        self
    }

    pub fn dot_bracket(&self) -> &str {
        &self.dot_bracket
    }

    pub fn energy(&self) -> Option<f64> {
        self.energy
    }

    pub fn len(&self) -> usize {
        self.partner.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partner.is_empty()
    }

    #[inline]
    pub fn partner(&self, i: usize) -> Option<usize> {
        self.partner[i]
    }

    pub fn is_paired(&self, i: usize) -> bool {
        self.partner[i].is_some()
    }

    /// Base pairs `(i, j)` with `i < j`, ordered by `i`.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.partner
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.filter(|&j| j > i).map(|j| (i, j)))
            .collect()
    }

    pub fn pair_count(&self) -> usize {
        self.partner.iter().filter(|p| p.is_some()).count() / 2
    }

    /// Checks length, pair legality and the minimum hairpin size against a
    /// sequence.
    pub fn check_against(&self, seq: &NucleicSequence, hairpin_min: usize) -> Result<()> {
        if self.len() != seq.len() {
            return Err(Error::LengthMismatch {
                structure: self.len(),
                sequence: seq.len(),
            });
        }
        let bases = seq.as_bytes();
        for (i, j) in self.pairs() {
            if j - i <= hairpin_min || pair_type(bases[i], bases[j]).is_none() {
                return Err(Error::IllegalPair(i, j));
            }
        }
        Ok(())
    }

    /// The structure of the reversed sequence: reversed and with brackets
    /// swapped.
    pub fn mirrored(&self) -> Self {
        let n = self.len();
        let pairs: Vec<(usize, usize)> = self.pairs().into_iter().map(|(i, j)| (n - 1 - j, n - 1 - i)).collect();
        Self::from_pairs(n, &pairs, self.energy)
    }
}

impl fmt::Display for SecondaryStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dot_bracket)
    }
}

/// Parses a dot-bracket string over `(`, `)` and `.`.
pub fn parse_dot_bracket(s: &str) -> Result<SecondaryStructure> {
    let mut stack = Vec::new();
    let mut pairs = Vec::new();
    let mut len = 0;
    for (position, ch) in s.chars().enumerate() {
        match ch {
            '(' => stack.push(position),
            ')' => {
                let i = stack.pop().ok_or(Error::Unbalanced(position))?;
                pairs.push((i, position));
            }
            '.' => {}
            _ => return Err(Error::IllegalStructureChar { ch, position }),
        }
        len = position + 1;
    }
    if let Some(&open) = stack.last() {
        return Err(Error::Unbalanced(open));
    }
    Ok(SecondaryStructure::from_pairs(len, &pairs, None))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct MotifCounts {
    pub hairpin: usize,
    pub bulge: usize,
    pub internal: usize,
    pub multiloop: usize,
    pub stem: usize,
}

impl MotifCounts {
    /// Loops only; stems are not counted.
    pub fn total(&self) -> usize {
        self.hairpin + self.bulge + self.internal + self.multiloop
    }
}

/// Pairs directly enclosed by `(i, j)`.
pub(crate) fn children(structure: &SecondaryStructure, i: usize, j: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut k = i + 1;
    while k < j {
        match structure.partner(k) {
            Some(l) if l > k => {
                out.push((k, l));
                k = l + 1;
            }
            _ => k += 1,
        }
    }
    out
}

/// Loop decomposition of a structure.
pub fn count_motifs(structure: &SecondaryStructure) -> MotifCounts {
    let mut counts = MotifCounts::default();
    for (i, j) in structure.pairs() {
        let outer_stacked = i > 0 && j + 1 < structure.len() && structure.partner(i - 1) == Some(j + 1);
        if !outer_stacked {
            counts.stem += 1;
        }
        let inner = children(structure, i, j);
        match inner.as_slice() {
            [] => counts.hairpin += 1,
            [(p, q)] => {
                let (l1, l2) = (p - i - 1, j - q - 1);
                match (l1, l2) {
                    (0, 0) => {}
                    (0, _) | (_, 0) => counts.bulge += 1,
                    _ => counts.internal += 1,
                }
            }
            _ => counts.multiloop += 1,
        }
    }
    counts
}

/// Fraction of positions in `range` that are paired.
pub fn paired_fraction<T: Scalar>(structure: &SecondaryStructure, range: Range<usize>) -> Result<T> {
    if range.is_empty() {
        return Err(Error::Metric("paired fraction over an empty range".into()));
    }
    if range.end > structure.len() {
        return Err(Error::Metric(format!(
            "range {}..{} exceeds structure length {}",
            range.start,
            range.end,
            structure.len()
        )));
    }
    let width = range.len();
    let paired = range.filter(|&i| structure.is_paired(i)).count();
    Ok(from_usize::<T>(paired) / from_usize(width))
}

/// Window `[start - radius, start + radius)` around the first CDS base,
/// clipped to the transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StartWindow {
    pub start: usize,
    pub end: usize,
    pub sequence: NucleicSequence,
}

impl StartWindow {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// # Panics
/// If `radius` is zero.
pub fn window_around_start(construct: &Construct, radius: usize) -> StartWindow {
    assert!(radius > 0, "window radius must be positive");
    let transcript = construct.transcript();
    let centre = construct.cds_start();
    let start = centre.saturating_sub(radius);
    let end = (centre + radius).min(transcript.len());
    let sequence = transcript.slice(start, end).expect("window is nonempty");
    StartWindow { start, end, sequence }
}

/// Something that folds a sequence into a secondary structure with energy.
pub trait Folder: Send + Sync {
    fn fold(&self, seq: &NucleicSequence) -> Result<SecondaryStructure>;

    fn name(&self) -> &str;
}

/// Minimum-free-energy folding with a built-in energy model.
#[derive(Debug, Clone)]
pub struct BuiltinFolder {
    model: EnergyModel,
    max_length: Option<usize>,
}

impl BuiltinFolder {
    pub fn new(model: EnergyModel) -> Self {
        BuiltinFolder {
            model,
            max_length: Some(DEFAULT_MAX_BUILTIN_LENGTH),
        }
    }

    /// Length limit; `None` lifts it.
    pub fn with_max_length(mut self, max_length: Option<usize>) -> Self {
        self.max_length = max_length;
        self
    }

    pub fn model(&self) -> &EnergyModel {
        &self.model
    }
}

impl Default for BuiltinFolder {
    fn default() -> Self {
        Self::new(EnergyModel::bundled())
    }
}

impl Folder for BuiltinFolder {
    fn fold(&self, seq: &NucleicSequence) -> Result<SecondaryStructure> {
        if let Some(limit) = self.max_length {
            if seq.len() > limit {
                return Err(Error::TooLongForBuiltin {
                    length: seq.len(),
                    limit,
                });
            }
        }
        Ok(fold_mfe(seq, &self.model))
    }

    fn name(&self) -> &str {
        "builtin"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nt(s: &str) -> NucleicSequence {
        NucleicSequence::parse(s).unwrap()
    }

    #[test]
    fn dot_bracket_examples() {
        let s = parse_dot_bracket("((..))").unwrap();
        assert_eq!(s.pairs(), vec![(0, 5), (1, 4)]);
        assert!(matches!(parse_dot_bracket("((.)"), Err(Error::Unbalanced(0))));
        assert!(matches!(parse_dot_bracket("())"), Err(Error::Unbalanced(2))));
        assert!(parse_dot_bracket("...").unwrap().pairs().is_empty());
        assert!(matches!(
            parse_dot_bracket("(.x)"),
            Err(Error::IllegalStructureChar { ch: 'x', position: 2 })
        ));
    }

    #[test]
    fn motif_examples() {
        assert_eq!(count_motifs(&parse_dot_bracket("...").unwrap()).total(), 0);

        let m = count_motifs(&parse_dot_bracket("((((...))))").unwrap());
        assert_eq!((m.hairpin, m.total(), m.stem), (1, 1, 1));

        let m = count_motifs(&parse_dot_bracket("((..((...))..((...))..))").unwrap());
        assert_eq!(m.hairpin, 2);
        assert_eq!(m.multiloop, 1);
        assert_eq!(m.total(), 3);
        assert_eq!(m.stem, 3);

        let m = count_motifs(&parse_dot_bracket("((.((...))))").unwrap());
        assert_eq!((m.bulge, m.internal, m.hairpin), (1, 0, 1));
        let m = count_motifs(&parse_dot_bracket("((.((...)).))").unwrap());
        assert_eq!((m.bulge, m.internal, m.hairpin), (0, 1, 1));
    }

    #[test]
    fn paired_fraction_examples() {
        let s = parse_dot_bracket("(((...)))").unwrap();
        let f: f64 = paired_fraction(&s, 0..9).unwrap();
        assert!((f - 6.0 / 9.0).abs() < 1e-15);
        let dots = parse_dot_bracket(".........").unwrap();
        assert_eq!(paired_fraction::<f64>(&dots, 2..7).unwrap(), 0.0);
        assert!(paired_fraction::<f64>(&s, 3..3).is_err());
        assert!(paired_fraction::<f64>(&s, 0..10).is_err());
        let f32v: f32 = paired_fraction(&s, 0..3).unwrap();
        assert_eq!(f32v, 1.0);
    }

    #[test]
    fn window_examples() {
        let cds = nt("ATGGCTGCCGCTGCCGCTGCCGCTGCCGCTGCCGCTGCCGCTGCCTAA");
        let long = Construct::new(Some(nt(&"A".repeat(100))), cds.clone(), None).unwrap();
        let w = window_around_start(&long, 30);
        assert_eq!((w.start, w.end, w.len()), (70, 130, 60));
        assert_eq!(&w.sequence.as_bytes()[30..33], b"ATG");

        let short = Construct::new(Some(nt(&"A".repeat(10))), cds, None).unwrap();
        let w = window_around_start(&short, 30);
        assert_eq!((w.start, w.len()), (0, 40));
    }

    #[test]
    fn structure_legality_check() {
        let seq = nt("GGGAAAACCC");
        assert!(parse_dot_bracket("(((....)))").unwrap().check_against(&seq, 3).is_ok());
        assert!(matches!(
            parse_dot_bracket("((((..))))").unwrap().check_against(&seq, 3),
            Err(Error::IllegalPair(3, 6))
        ));
        assert!(parse_dot_bracket("(........)")
            .unwrap()
            .check_against(&nt("GAAAAAAAAA"), 3)
            .is_err());
        assert!(parse_dot_bracket("..").unwrap().check_against(&seq, 3).is_err());
    }

    #[test]
    fn builtin_length_limit() {
        let folder = BuiltinFolder::default().with_max_length(Some(10));
        assert!(matches!(
            folder.fold(&nt(&"A".repeat(11))),
            Err(Error::TooLongForBuiltin { length: 11, limit: 10 })
        ));
        assert!(folder.with_max_length(None).fold(&nt(&"A".repeat(11))).is_ok());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn motif_total_invariant_under_mirroring(seq in "[ACGU]{1,80}") {
                let seq = nt(&seq);
                let s = fold_mfe(&seq, &EnergyModel::bundled());
                let m = s.mirrored();
                let reversed: String = seq.rna_string().chars().rev().collect();
                m.check_against(&nt(&reversed), DEFAULT_HAIRPIN_MIN).unwrap();
                prop_assert_eq!(count_motifs(&s).total(), count_motifs(&m).total());
                prop_assert_eq!(count_motifs(&s), count_motifs(&m));
            }

            #[test]
            fn paired_plus_unpaired_is_one(seq in "[ACGU]{1,60}") {
                let s = fold_mfe(&nt(&seq), &EnergyModel::bundled());
                let paired: f64 = paired_fraction(&s, 0..s.len()).unwrap();
                let unpaired = (0..s.len()).filter(|&i| !s.is_paired(i)).count() as f64 / s.len() as f64;
                prop_assert!((paired + unpaired - 1.0).abs() < 1e-12);
            }

            #[test]
            fn dot_bracket_round_trip(seq in "[ACGU]{1,60}") {
                let s = fold_nussinov(&nt(&seq), 3);
                let back = parse_dot_bracket(s.structure.dot_bracket()).unwrap();
                prop_assert_eq!(back.pairs(), s.structure.pairs());
            }
        }
    }
}
