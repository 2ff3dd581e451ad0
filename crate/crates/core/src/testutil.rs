//! Fixtures shared by unit, integration and acceptance tests.

use crate::seq::{Codon, GeneticCode, NucleicSequence};

/// A CDS in which every ordered pair of sense codons occurs exactly once as
/// an adjacent pair: `ATG`, an Eulerian circuit over the complete digraph
/// (loops included) on the 61 sense codons, then `TAA`.
pub fn all_pairs_cds() -> NucleicSequence {
    let code = GeneticCode::standard();
    let sense: Vec<Codon> = code.sense_codons().collect();
    let start = sense.iter().position(|c| c.as_string() == "ATG").expect("ATG");
    // Hierholzer; out-edges consumed in index order
    let mut next_edge = vec![0usize; sense.len()];
    let mut stack = vec![start];
    let mut circuit = Vec::with_capacity(sense.len() * sense.len() + 1);
    while let Some(&v) = stack.last() {
        if next_edge[v] < sense.len() {
            let w = next_edge[v];
            next_edge[v] += 1;
            stack.push(w);
        } else {
            circuit.push(v);
            stack.pop();
        }
    }
    circuit.reverse();
    let mut codons: Vec<Codon> = circuit.into_iter().map(|i| sense[i]).collect();
    codons.push(Codon::parse("TAA").expect("stop"));
    NucleicSequence::from_codons(&codons).expect("valid")
}
