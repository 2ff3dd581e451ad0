//! Nucleic-acid and protein sequences, the standard genetic code and the
//! structural rules a coding sequence has to satisfy.
//!
//! Sequences are stored in DNA form (`T`); the RNA flag only changes how a
//! sequence is rendered.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BASES: [u8; 4] = *b"ACGT";

#[inline]
pub fn base_index(b: u8) -> Option<usize> {
    match b {
        b'A' => Some(0),
        b'C' => Some(1),
        b'G' => Some(2),
        b'T' => Some(3),
        _ => None,
    }
}

/// A codon, stored as its index in `[0, 64)` with base order `A, C, G, T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Codon(u8);

impl Codon {
    pub const COUNT: usize = 64;

    pub fn from_index(index: usize) -> Codon {
        assert!(index < Self::COUNT, "codon index out of range");
        Codon(index as u8)
    }

    /// Builds a codon from three uppercase DNA bases.
    pub fn from_bases(bases: &[u8]) -> Option<Codon> {
        if bases.len() != 3 {
            return None;
        }
        let a = base_index(bases[0])?;
        let b = base_index(bases[1])?;
        let c = base_index(bases[2])?;
        Some(Codon((a * 16 + b * 4 + c) as u8))
    }

    /// Parses a codon string; accepts lowercase and `U`.
    pub fn parse(s: &str) -> Result<Codon> {
        let norm: Vec<u8> = s
            .bytes()
            .map(|b| match b.to_ascii_uppercase() {
                b'U' => b'T',
                x => x,
            })
            .collect();
        Codon::from_bases(&norm).ok_or_else(|| Error::InvalidCodon(s.to_string()))
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn bases(self) -> [u8; 3] {
        let i = self.0 as usize;
        [BASES[i >> 4], BASES[(i >> 2) & 3], BASES[i & 3]]
    }

    pub fn as_string(self) -> String {
        String::from_utf8(self.bases().to_vec()).expect("ascii")
    }

    pub fn all() -> impl Iterator<Item = Codon> {
        (0..Self::COUNT).map(Codon::from_index)
    }
}

impl fmt::Display for Codon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.as_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NucleicKind {
    Dna,
    Rna,
}

/// A nonempty nucleotide sequence over `{A, C, G, T}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NucleicSequence {
    bases: Vec<u8>,
    kind: NucleicKind,
}

impl NucleicSequence {
    /// Parses a DNA or RNA string. Lowercase is normalised; ambiguity codes
    /// and any other characters are rejected. The kind is RNA when the input
    /// contains `U`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut bases = Vec::with_capacity(s.len());
        let (mut saw_t, mut saw_u) = (false, false);
        for (position, ch) in s.chars().enumerate() {
            let b = match ch.to_ascii_uppercase() {
                'A' => b'A',
                'C' => b'C',
                'G' => b'G',
                'T' => {
                    saw_t = true;
                    b'T'
                }
                'U' => {
                    saw_u = true;
                    b'T'
                }
                _ => return Err(Error::InvalidBase { base: ch, position }),
            };
            bases.push(b);
        }
        if saw_t && saw_u {
            return Err(Error::MixedAlphabet);
        }
        let kind = if saw_u { NucleicKind::Rna } else { NucleicKind::Dna };
        Self::from_dna_bytes(bases, kind)
    }

    /// Builds a sequence from uppercase DNA bytes.
    pub fn from_dna_bytes(bases: Vec<u8>, kind: NucleicKind) -> Result<Self> {
        if bases.is_empty() {
            return Err(Error::EmptySequence);
        }
        if let Some(position) = bases.iter().position(|&b| base_index(b).is_none()) {
            return Err(Error::InvalidBase {
                base: bases[position] as char,
                position,
            });
        }
        Ok(NucleicSequence { bases, kind })
    }

    pub fn from_codons(codons: &[Codon]) -> Result<Self> {
        let bases = codons.iter().flat_map(|c| c.bases()).collect();
        Self::from_dna_bytes(bases, NucleicKind::Dna)
    }

    pub fn kind(&self) -> NucleicKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    /// Bases in canonical DNA form.
    pub fn as_bytes(&self) -> &[u8] {
        &self.bases
    }

    /// Codons of the sequence; a trailing partial codon is skipped.
    pub fn codons(&self) -> impl Iterator<Item = Codon> + '_ {
        self.bases
            .chunks_exact(3)
            .map(|c| Codon::from_bases(c).expect("validated bases"))
    }

    pub fn codon_count(&self) -> usize {
        self.bases.len() / 3
    }

    pub fn to_rna(&self) -> Self {
        NucleicSequence {
            bases: self.bases.clone(),
            kind: NucleicKind::Rna,
        }
    }

    pub fn to_dna(&self) -> Self {
        NucleicSequence {
            bases: self.bases.clone(),
            kind: NucleicKind::Dna,
        }
    }

    /// Rendering in RNA alphabet regardless of kind.
    pub fn rna_string(&self) -> String {
        self.bases
            .iter()
            .map(|&b| if b == b'T' { 'U' } else { b as char })
            .collect()
    }

    pub fn dna_string(&self) -> String {
        String::from_utf8(self.bases.clone()).expect("ascii")
    }

    /// Subsequence `[start, end)`, keeping the kind.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        Self::from_dna_bytes(self.bases[start..end].to_vec(), self.kind)
    }
}

impl fmt::Display for NucleicSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            NucleicKind::Dna => f.write_str(&self.dna_string()),
            NucleicKind::Rna => f.write_str(&self.rna_string()),
        }
    }
}

pub fn to_rna(seq: &NucleicSequence) -> NucleicSequence {
    seq.to_rna()
}

pub fn to_dna(seq: &NucleicSequence) -> NucleicSequence {
    seq.to_dna()
}

pub const AMINO_ACIDS: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

/// Protein over the 20 standard residues.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProteinSequence {
    residues: Vec<u8>,
}

impl ProteinSequence {
    /// Parses one-letter residues. A single trailing `*` is dropped; any other
    /// stop symbol is an error.
    pub fn parse(s: &str) -> Result<Self> {
        let trimmed = s.trim();
        let body = trimmed.strip_suffix('*').unwrap_or(trimmed);
        let mut residues = Vec::with_capacity(body.len());
        for (position, ch) in body.chars().enumerate() {
            let up = ch.to_ascii_uppercase();
            if up == '*' {
                return Err(Error::InternalStopResidue(position));
            }
            if !up.is_ascii() || !AMINO_ACIDS.contains(&(up as u8)) {
                return Err(Error::InvalidResidue { residue: ch, position });
            }
            residues.push(up as u8);
        }
        Ok(ProteinSequence { residues })
    }

    pub fn residues(&self) -> &[u8] {
        &self.residues
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

impl fmt::Display for ProteinSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(std::str::from_utf8(&self.residues).expect("ascii"))
    }
}

/// Translation product of a codon table lookup.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AminoAcid {
    Residue(u8),
    Stop,
}

/// The standard genetic code.
#[derive(Debug)]
pub struct GeneticCode {
    table: [AminoAcid; 64],
    families: Vec<Vec<Codon>>,
}

// NCBI table 1 in TCAG order.
const NCBI_STANDARD: &[u8; 64] = b"FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG";

impl GeneticCode {
    pub fn standard() -> &'static GeneticCode {
        static CODE: OnceLock<GeneticCode> = OnceLock::new();
        CODE.get_or_init(|| {
            const TCAG: [u8; 4] = *b"TCAG";
            let mut table = [AminoAcid::Stop; 64];
            for (n, &aa) in NCBI_STANDARD.iter().enumerate() {
                let bases = [TCAG[n >> 4], TCAG[(n >> 2) & 3], TCAG[n & 3]];
                let codon = Codon::from_bases(&bases).expect("valid");
                table[codon.index()] = if aa == b'*' {
                    AminoAcid::Stop
                } else {
                    AminoAcid::Residue(aa)
                };
            }
            let mut families = vec![Vec::new(); 26];
            for codon in Codon::all() {
                if let AminoAcid::Residue(aa) = table[codon.index()] {
                    families[(aa - b'A') as usize].push(codon);
                }
            }
            GeneticCode { table, families }
        })
    }

    #[inline]
    pub fn amino_acid(&self, codon: Codon) -> AminoAcid {
        self.table[codon.index()]
    }

    #[inline]
    pub fn is_stop(&self, codon: Codon) -> bool {
        self.table[codon.index()] == AminoAcid::Stop
    }

    pub fn stop_codons(&self) -> impl Iterator<Item = Codon> + '_ {
        Codon::all().filter(|&c| self.is_stop(c))
    }

    pub fn sense_codons(&self) -> impl Iterator<Item = Codon> + '_ {
        Codon::all().filter(|&c| !self.is_stop(c))
    }

    /// Synonym family of a residue, in codon-index order.
    pub fn family(&self, residue: u8) -> &[Codon] {
        match residue {
            b'A'..=b'Z' => &self.families[(residue - b'A') as usize],
            _ => &[],
        }
    }

    pub fn residues(&self) -> impl Iterator<Item = u8> + '_ {
        AMINO_ACIDS.iter().copied()
    }
}

pub fn synonymous_codons(codon: Codon, code: &GeneticCode) -> Result<Vec<Codon>> {
    match code.amino_acid(codon) {
        AminoAcid::Stop => Err(Error::StopCodon(codon.as_string())),
        AminoAcid::Residue(aa) => Ok(code.family(aa).to_vec()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub protein: ProteinSequence,
    pub stop_seen: bool,
}

/// Translates codon by codon, halting at the first stop.
pub fn translate(cds: &NucleicSequence, code: &GeneticCode) -> Result<Translation> {
    if !cds.len().is_multiple_of(3) {
        return Err(Error::NotCodonAligned(cds.len()));
    }
    Ok(translate_prefix(cds, code))
}

fn translate_prefix(cds: &NucleicSequence, code: &GeneticCode) -> Translation {
    let mut residues = Vec::with_capacity(cds.codon_count());
    let mut stop_seen = false;
    for codon in cds.codons() {
        match code.amino_acid(codon) {
            AminoAcid::Residue(aa) => residues.push(aa),
            AminoAcid::Stop => {
                stop_seen = true;
                break;
            }
        }
    }
    Translation {
        protein: ProteinSequence { residues },
        stop_seen,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CdsViolation {
    LengthNotMultipleOf3,
    MissingStartCodon,
    InternalStop,
    MissingTerminalStop,
    TranslationMismatch,
}

impl fmt::Display for CdsViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CdsViolation::LengthNotMultipleOf3 => "length is not a multiple of 3",
            CdsViolation::MissingStartCodon => "does not start with ATG",
            CdsViolation::InternalStop => "internal stop codon",
            CdsViolation::MissingTerminalStop => "does not end with a stop codon",
            CdsViolation::TranslationMismatch => "translation differs from target protein",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CdsReport {
    pub violations: Vec<CdsViolation>,
}

impl CdsReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, v: CdsViolation) -> bool {
        self.violations.contains(&v)
    }
}

impl fmt::Display for CdsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Checks the four structural CDS rules. Codon-level rules look at complete
/// codons only.
pub fn structural_violations(cds: &NucleicSequence, code: &GeneticCode) -> Vec<CdsViolation> {
    let mut out = Vec::new();
    if !cds.len().is_multiple_of(3) {
        out.push(CdsViolation::LengthNotMultipleOf3);
    }
    let codons: Vec<Codon> = cds.codons().collect();
    if !cds.as_bytes().starts_with(b"ATG") {
        out.push(CdsViolation::MissingStartCodon);
    }
    if codons.len() > 1 && codons[..codons.len() - 1].iter().any(|&c| code.is_stop(c)) {
        out.push(CdsViolation::InternalStop);
    }
    if !cds.len().is_multiple_of(3) || !codons.last().is_some_and(|&c| code.is_stop(c)) {
        out.push(CdsViolation::MissingTerminalStop);
    }
    out
}

/// Full validity report of a CDS against its target protein.
pub fn validate_cds(cds: &NucleicSequence, target: &ProteinSequence, code: &GeneticCode) -> CdsReport {
    let mut violations = structural_violations(cds, code);
    if translate_prefix(cds, code).protein != *target {
        violations.push(CdsViolation::TranslationMismatch);
    }
    CdsReport { violations }
}

/// Full transcript: fixed 5'UTR, evolvable CDS, fixed 3'UTR. Either UTR may
/// be absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Construct {
    utr5: Option<NucleicSequence>,
    cds: NucleicSequence,
    utr3: Option<NucleicSequence>,
    transcript: NucleicSequence,
}

impl Construct {
    pub fn new(utr5: Option<NucleicSequence>, cds: NucleicSequence, utr3: Option<NucleicSequence>) -> Result<Self> {
        let violations = structural_violations(&cds, GeneticCode::standard());
        if !violations.is_empty() {
            let report = CdsReport { violations };
            return Err(Error::InvalidCds(report.to_string()));
        }
        let mut bases = Vec::new();
        for part in [utr5.as_ref(), Some(&cds), utr3.as_ref()].into_iter().flatten() {
            bases.extend_from_slice(part.as_bytes());
        }
        let transcript = NucleicSequence::from_dna_bytes(bases, NucleicKind::Dna)?;
        Ok(Construct {
            utr5,
            cds,
            utr3,
            transcript,
        })
    }

    pub fn utr5(&self) -> Option<&NucleicSequence> {
        self.utr5.as_ref()
    }

    pub fn utr3(&self) -> Option<&NucleicSequence> {
        self.utr3.as_ref()
    }

    pub fn cds(&self) -> &NucleicSequence {
        &self.cds
    }

    pub fn transcript(&self) -> &NucleicSequence {
        &self.transcript
    }

    pub fn utr5_len(&self) -> usize {
        self.utr5.as_ref().map_or(0, NucleicSequence::len)
    }

    pub fn utr3_len(&self) -> usize {
        self.utr3.as_ref().map_or(0, NucleicSequence::len)
    }

    /// Transcript coordinate of the first CDS base.
    pub fn cds_start(&self) -> usize {
        self.utr5_len()
    }

    /// Transcript coordinate one past the last CDS base.
    pub fn cds_end(&self) -> usize {
        self.utr5_len() + self.cds.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nt(s: &str) -> NucleicSequence {
        NucleicSequence::parse(s).unwrap()
    }

    fn prot(s: &str) -> ProteinSequence {
        ProteinSequence::parse(s).unwrap()
    }

    fn code() -> &'static GeneticCode {
        GeneticCode::standard()
    }

    #[test]
    fn genetic_code_shape() {
        let c = code();
        assert_eq!(c.stop_codons().count(), 3);
        assert_eq!(c.sense_codons().count(), 61);
        let stops: Vec<String> = c.stop_codons().map(|c| c.as_string()).collect();
        assert_eq!(stops, ["TAA", "TAG", "TGA"]);
        let total: usize = c.residues().map(|aa| c.family(aa).len()).sum();
        assert_eq!(total, 61);
        let mut seen = [0u8; 64];
        for aa in c.residues() {
            for codon in c.family(aa) {
                seen[codon.index()] += 1;
            }
        }
        for codon in c.sense_codons() {
            assert_eq!(seen[codon.index()], 1, "{codon}");
        }
    }

    #[test]
    fn translate_examples() {
        let t = translate(&nt("ATG"), code()).unwrap();
        assert_eq!(t.protein.to_string(), "M");
        assert!(!t.stop_seen);

        let t = translate(&nt("ATGGCTTAA"), code()).unwrap();
        assert_eq!(t.protein.to_string(), "MA");
        assert!(t.stop_seen);

        let t = translate(&nt("ATGTAAGGG"), code()).unwrap();
        assert_eq!(t.protein.to_string(), "M");
        assert!(t.stop_seen);

        assert!(matches!(translate(&nt("ATGG"), code()), Err(Error::NotCodonAligned(4))));
    }

    #[test]
    fn parse_rejects_ambiguity_and_normalises_case() {
        assert!(matches!(
            NucleicSequence::parse("ATGN"),
            Err(Error::InvalidBase { base: 'N', position: 3 })
        ));
        assert!(NucleicSequence::parse("ATRG").is_err());
        assert!(matches!(NucleicSequence::parse(""), Err(Error::EmptySequence)));
        assert!(matches!(NucleicSequence::parse("AUT"), Err(Error::MixedAlphabet)));
        assert_eq!(nt("atgc").dna_string(), "ATGC");
        assert_eq!(nt("aug").kind(), NucleicKind::Rna);
    }

    #[test]
    fn validate_cds_examples() {
        let r = validate_cds(&nt("ATGGCTTAA"), &prot("MA"), code());
        assert!(r.is_valid(), "{r}");

        let r = validate_cds(&nt("ATGTAAGCTTAA"), &prot("MA"), code());
        assert!(r.contains(CdsViolation::InternalStop));
        assert!(!r.contains(CdsViolation::MissingTerminalStop));

        let r = validate_cds(&nt("GCTATGTAA"), &prot("M"), code());
        assert!(r.contains(CdsViolation::MissingStartCodon));
        assert!(r.contains(CdsViolation::TranslationMismatch));
        assert!(!r.contains(CdsViolation::InternalStop));
        assert!(!r.contains(CdsViolation::MissingTerminalStop));

        let r = validate_cds(&nt("ATGGCTTA"), &prot("MA"), code());
        assert!(r.contains(CdsViolation::LengthNotMultipleOf3));
        assert!(r.contains(CdsViolation::MissingTerminalStop));
    }

    fn brute_rules(bases: &[u8], target: &[u8]) -> [bool; 5] {
        let code = code();
        let codons: Vec<Codon> = bases.chunks_exact(3).map(|c| Codon::from_bases(c).unwrap()).collect();
        let is_stop = |c: &Codon| code.is_stop(*c);
        let len_ok = bases.len().is_multiple_of(3);
        let start_ok = bases.len() >= 3 && &bases[..3] == b"ATG";
        let internal_ok = codons.len() < 2 || !codons[..codons.len() - 1].iter().any(is_stop);
        let terminal_ok = len_ok && codons.last().is_some_and(is_stop);
        let mut residues = Vec::new();
        for c in &codons {
            match code.amino_acid(*c) {
                AminoAcid::Residue(aa) => residues.push(aa),
                AminoAcid::Stop => break,
            }
        }
        [len_ok, start_ok, internal_ok, terminal_ok, residues == target]
    }

    #[test]
    fn validity_iff_all_rules_hold_exhaustive_small() {
        // every sequence over a reduced alphabet of codon-relevant pieces, up to 4 codons
        let pieces: [&[u8]; 6] = [b"ATG", b"GCT", b"TAA", b"TGG", b"A", b"GC"];
        let targets = [prot("M"), prot("MA"), prot("MAW")];
        let mut stack: Vec<Vec<u8>> = vec![Vec::new()];
        let mut checked = 0;
        while let Some(prefix) = stack.pop() {
            if !prefix.is_empty() {
                let seq = NucleicSequence::from_dna_bytes(prefix.clone(), NucleicKind::Dna).unwrap();
                for t in &targets {
                    let report = validate_cds(&seq, t, code());
                    let rules = brute_rules(&prefix, t.residues());
                    assert_eq!(report.is_valid(), rules.iter().all(|&r| r), "{}", seq);
                    checked += 1;
                }
            }
            if prefix.len() < 12 {
                for p in pieces {
                    let mut next = prefix.clone();
                    next.extend_from_slice(p);
                    stack.push(next);
                }
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn synonym_examples() {
        let fam = |s: &str| -> Vec<String> {
            synonymous_codons(Codon::parse(s).unwrap(), code())
                .unwrap()
                .into_iter()
                .map(|c| c.as_string())
                .collect()
        };
        assert_eq!(fam("ATG"), ["ATG"]);
        assert_eq!(fam("TGG"), ["TGG"]);
        let mut ala = fam("GCT");
        ala.sort();
        assert_eq!(ala, ["GCA", "GCC", "GCG", "GCT"]);
        assert!(matches!(
            synonymous_codons(Codon::parse("TAA").unwrap(), code()),
            Err(Error::StopCodon(_))
        ));
    }

    #[test]
    fn rna_rendering() {
        assert_eq!(to_rna(&nt("ATGT")).to_string(), "AUGU");
        assert_eq!(to_dna(&nt("AUG")).to_string(), "ATG");
    }

    #[test]
    fn protein_parse_rules() {
        assert_eq!(prot("mka*").to_string(), "MKA");
        assert!(matches!(
            ProteinSequence::parse("M*K"),
            Err(Error::InternalStopResidue(1))
        ));
        assert!(ProteinSequence::parse("MXB").is_err());
    }

    #[test]
    fn construct_coordinates() {
        let c = Construct::new(Some(nt("GGGAAA")), nt("ATGGCTTAA"), Some(nt("CCC"))).unwrap();
        assert_eq!(c.cds_start(), 6);
        assert_eq!(c.cds_end(), 15);
        assert_eq!(c.transcript().dna_string(), "GGGAAAATGGCTTAACCC");
        assert!(Construct::new(None, nt("ATGTAAGCTTAA"), None).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn sense_codon() -> impl Strategy<Value = Codon> {
            (0usize..64)
                .prop_map(Codon::from_index)
                .prop_filter("sense", |c| !GeneticCode::standard().is_stop(*c))
        }

        proptest! {
            #[test]
            fn synonymous_substitution_preserves_translation(
                body in prop::collection::vec(sense_codon(), 1..40),
                picks in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 0..30),
            ) {
                let code = code();
                let mut codons = vec![Codon::parse("ATG").unwrap()];
                codons.extend(body);
                codons.push(Codon::parse("TGA").unwrap());
                let original = translate(&NucleicSequence::from_codons(&codons).unwrap(), code).unwrap();
                for (pos, choice) in picks {
                    let i = pos.index(codons.len() - 1);
                    if let Ok(fam) = synonymous_codons(codons[i], code) {
                        codons[i] = fam[choice.index(fam.len())];
                    }
                }
                let mutated = translate(&NucleicSequence::from_codons(&codons).unwrap(), code).unwrap();
                prop_assert_eq!(original, mutated);
            }

            #[test]
            fn rna_dna_round_trip(s in "[ACGTacgt]{1,200}") {
                let seq = NucleicSequence::parse(&s).unwrap();
                prop_assert_eq!(to_dna(&to_rna(&seq)), seq.clone());
                let rna = NucleicSequence::parse(&to_rna(&seq).to_string()).unwrap();
                prop_assert_eq!(rna.to_dna(), seq);
            }
        }
    }
}
