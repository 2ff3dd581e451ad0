//! Independent oracles used by the integration and acceptance tests.

#![allow(dead_code)]

use mrna_evo::folding::{EnergyModel, PairType};

pub fn can_pair(a: u8, b: u8) -> Option<PairType> {
    let norm = |x: u8| if x == b'U' { b'T' } else { x };
    match (norm(a), norm(b)) {
        (b'A', b'T') => Some(0),
        (b'C', b'G') => Some(1),
        (b'G', b'C') => Some(2),
        (b'T', b'A') => Some(3),
        (b'G', b'T') => Some(4),
        (b'T', b'G') => Some(5),
        _ => None,
    }
}

/// Every pseudoknot-free structure on `bases` whose pairs are legal and span
/// more than `hairpin_min`, as sorted pair lists.
pub fn enumerate_structures(bases: &[u8], hairpin_min: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(bases: &[u8], h: usize, i: usize, j: isize) -> Vec<Vec<(usize, usize)>> {
        if (i as isize) > j {
            return vec![Vec::new()];
        }
        let j = j as usize;
        let mut out = rec(bases, h, i + 1, j as isize);
        for k in (i + h + 1)..=j {
            if can_pair(bases[i], bases[k]).is_none() {
                continue;
            }
            let inside = rec(bases, h, i + 1, k as isize - 1);
            let after = rec(bases, h, k + 1, j as isize);
            for a in &inside {
                for b in &after {
                    let mut s = vec![(i, k)];
                    s.extend_from_slice(a);
                    s.extend_from_slice(b);
                    out.push(s);
                }
            }
        }
        out
    }
    rec(bases, hairpin_min, 0, bases.len() as isize - 1)
        .into_iter()
        .map(|mut s| {
            s.sort_unstable();
            s
        })
        .collect()
}

/// Loop-decomposition energy (0.01 kcal/mol) written against the model's
/// lookup functions only; `None` if an interior loop exceeds the maximum.
pub fn structure_energy(bases: &[u8], pairs: &[(usize, usize)], model: &EnergyModel) -> Option<i32> {
    let n = bases.len();
    let mut partner = vec![usize::MAX; n];
    for &(i, j) in pairs {
        partner[i] = j;
        partner[j] = i;
    }
    let mut total = 0;
    for &(i, j) in pairs {
        let mut inner = Vec::new();
        let mut k = i + 1;
        while k < j {
            if partner[k] != usize::MAX && partner[k] > k {
                inner.push((k, partner[k]));
                k = partner[k] + 1;
            } else {
                k += 1;
            }
        }
        let outer = can_pair(bases[i], bases[j])?;
        total += match inner.len() {
            0 => model.hairpin(j - i - 1),
            1 => {
                let (p, q) = inner[0];
                let (l1, l2) = (p - i - 1, j - q - 1);
                if l1 + l2 > model.max_interior() {
                    return None;
                }
                let ip = can_pair(bases[p], bases[q])?;
                if l1 == 0 && l2 == 0 {
                    model.stack(outer, ip)
                } else if l1 == 0 || l2 == 0 {
                    model.bulge(l1 + l2)
                } else {
                    model.interior(l1, l2)
                }
            }
            m => {
                let covered: usize = inner.iter().map(|(p, q)| q - p + 1).sum();
                let unpaired = (j - i - 1 - covered) as i32;
                model.ml_closing() + model.ml_branch() * (m as i32 + 1) + model.ml_unpaired() * unpaired
            }
        };
    }
    Some(total)
}

/// Minimum energy over all enumerated structures, in 0.01 kcal/mol.
pub fn brute_force_mfe(bases: &[u8], model: &EnergyModel) -> i32 {
    enumerate_structures(bases, model.hairpin_min())
        .iter()
        .filter_map(|s| structure_energy(bases, s, model))
        .min()
        .expect("the open structure always exists")
}

pub fn brute_force_max_pairs(bases: &[u8], hairpin_min: usize) -> usize {
    enumerate_structures(bases, hairpin_min)
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0)
}

/// Deterministic xorshift generator for reproducible random sequences
/// without depending on the crate's own RNG plumbing.
pub struct XorShift(pub u64);

impl XorShift {
    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        self.0 = x;
        x
    }

    pub fn below(&mut self, n: u64) -> u64 {
        self.next_u64() % n
    }

    pub fn rna(&mut self, len: usize) -> String {
        (0..len).map(|_| b"ACGU"[self.below(4) as usize] as char).collect()
    }
}
