use super::{pair_type, SecondaryStructure};
use crate::seq::NucleicSequence;

#[derive(Debug, Clone, PartialEq)]
pub struct NussinovFold {
    pub structure: SecondaryStructure,
    pub pair_count: usize,
}

/// Maximum base-pair folding over AU, GC and GU pairs with `j - i > hairpin_min`.
///
/// Traceback at `(i, j)` pairs `i` with the smallest feasible partner that
/// keeps the optimum, and leaves `i` unpaired only when no pairing does.
pub fn fold_nussinov(seq: &NucleicSequence, hairpin_min: usize) -> NussinovFold {
    let bases = seq.as_bytes();
    let n = bases.len();
    // best[i][j] over the closed interval, with best = 0 for empty intervals
    let idx = |i: usize, j: usize| i * n + j;
    let mut best = vec![0u32; n * n];
    let get = |best: &[u32], i: usize, j: usize| -> u32 {
        if i > j || j >= n {
            0
        } else {
            best[idx(i, j)]
        }
    };
    for i in (0..n).rev() {
        for j in i + 1..n {
            let mut v = get(&best, i + 1, j);
            for k in (i + hairpin_min + 1)..=j {
                if pair_type(bases[i], bases[k]).is_some() {
                    let inside = if k > i + 1 { get(&best, i + 1, k - 1) } else { 0 };
                    let after = if k < j { get(&best, k + 1, j) } else { 0 };
                    v = v.max(inside + 1 + after);
                }
            }
            best[idx(i, j)] = v;
        }
    }

    let mut pairs = Vec::new();
    let mut work = vec![(0usize, n.saturating_sub(1))];
    while let Some((i, j)) = work.pop() {
        if n == 0 || i >= j {
            continue;
        }
        let target = best[idx(i, j)];
        let mut paired = false;
        for k in (i + hairpin_min + 1)..=j {
            if pair_type(bases[i], bases[k]).is_none() {
                continue;
            }
            let inside = if k > i + 1 { get(&best, i + 1, k - 1) } else { 0 };
            let after = if k < j { get(&best, k + 1, j) } else { 0 };
            if inside + 1 + after == target {
                pairs.push((i, k));
                if k > i + 1 {
                    work.push((i + 1, k - 1));
                }
                if k < j {
                    work.push((k + 1, j));
                }
                paired = true;
                break;
            }
        }
        if !paired {
            work.push((i + 1, j));
        }
    }
    pairs.sort_unstable();
    let pair_count = pairs.len();
    NussinovFold {
        structure: SecondaryStructure::from_pairs(n, &pairs, None),
        pair_count,
    }
}
