//! Zuker-style minimum free energy folding under [`EnergyModel`].

use super::{pair_type, EnergyModel, PairType, SecondaryStructure, DCAL_PER_KCAL};
use crate::seq::NucleicSequence;

/// Sums of two table entries never exceed i32::MAX, so scans use wrapping adds.
const INF: i32 = i32::MAX / 4;
const NO_PAIR: u8 = u8::MAX;
/// Width of the fixed interior-loop block scan.
const BLOCK: usize = 32;

/// Loop energies tabulated for one fold so the inner loops do no lookups.
struct LoopEnergies {
    max_interior: usize,
    hairpin: Vec<i32>,
    bulge: Vec<i32>,
    /// interior[l1 * (max + 1) + l2]
    interior: Vec<i32>,
    /// interior_t[l2 * (max + 1) + l1]
    interior_t: Vec<i32>,
    /// block[l1][k] = interior(l1, BLOCK - k), INF outside the loop limit;
    /// empty when the limit exceeds the block width
    block: Vec<[i32; BLOCK]>,
    stack: [[i32; 6]; 6],
}

impl LoopEnergies {
    fn new(model: &EnergyModel, n: usize) -> Self {
        let max = model.max_interior();
        let mut interior = vec![INF; (max + 1) * (max + 1)];
        for l1 in 1..=max {
            for l2 in 1..=max - l1.min(max) {
                interior[l1 * (max + 1) + l2] = model.interior(l1, l2);
            }
        }
        let mut interior_t = vec![INF; (max + 1) * (max + 1)];
        for l1 in 0..=max {
            for l2 in 0..=max {
                interior_t[l2 * (max + 1) + l1] = interior[l1 * (max + 1) + l2];
            }
        }
        let mut block = Vec::new();
        if max <= BLOCK {
            block = vec![[INF; BLOCK]; max.max(1)];
            for (l1, row) in block.iter_mut().enumerate().skip(1) {
                for (k, e) in row.iter_mut().enumerate() {
                    let l2 = BLOCK - k;
                    if l1 + l2 <= max {
                        *e = interior[l1 * (max + 1) + l2];
                    }
                }
            }
        }
        let mut stack = [[0; 6]; 6];
        for (o, row) in stack.iter_mut().enumerate() {
            for (i, e) in row.iter_mut().enumerate() {
                *e = model.stack(o, i);
            }
        }
        LoopEnergies {
            max_interior: max,
            hairpin: (0..n.max(1)).map(|s| model.hairpin(s)).collect(),
            bulge: (0..=max).map(|s| model.bulge(s)).collect(),
            interior,
            interior_t,
            block,
            stack,
        }
    }

    #[inline]
    fn two_pair(&self, outer: PairType, inner: PairType, l1: usize, l2: usize) -> i32 {
        match (l1, l2) {
            (0, 0) => self.stack[outer][inner],
            (0, k) | (k, 0) => self.bulge[k],
            _ => self.interior[l1 * (self.max_interior + 1) + l2],
        }
    }
}

struct Tables<'a> {
    n: usize,
    /// pair type of (i, j), NO_PAIR when the bases cannot pair
    ptype: Vec<u8>,
    /// ascending partners k > i that can pair with i
    partners: Vec<Vec<usize>>,
    model: &'a EnergyModel,
    loops: LoopEnergies,
    /// closed by a pair (i, j)
    v: Vec<i32>,
    /// v transposed
    v_t: Vec<i32>,
    /// multiloop segment [i, j] holding at least one branch
    wm: Vec<i32>,
    /// wm transposed, for column scans
    wm_t: Vec<i32>,
    /// exterior suffix energies, f[n] = 0
    f: Vec<i32>,
}

impl<'a> Tables<'a> {
    fn new(bases: &[u8], model: &'a EnergyModel) -> Self {
        let n = bases.len();
        let h = model.hairpin_min();
        let mut ptype = vec![NO_PAIR; n * n];
        let mut partners = vec![Vec::new(); n];
        for i in 0..n {
            for j in i + h + 1..n {
                if let Some(t) = pair_type(bases[i], bases[j]) {
                    ptype[i * n + j] = t as u8;
                    partners[i].push(j);
                }
            }
        }
        Tables {
            n,
            ptype,
            partners,
            model,
            loops: LoopEnergies::new(model, n),
            v: vec![INF; n * n],
            v_t: vec![INF; n * n],
            wm: vec![INF; n * n],
            wm_t: vec![INF; n * n],
            f: vec![0; n + 1],
        }
    }

    #[inline(always)]
    fn v(&self, i: usize, j: usize) -> i32 {
        self.v[i * self.n + j]
    }

    #[inline(always)]
    fn pt(&self, i: usize, j: usize) -> Option<PairType> {
        let t = self.ptype[i * self.n + j];
        (t != NO_PAIR).then_some(t as PairType)
    }

    #[inline(always)]
    fn wm(&self, i: usize, j: usize) -> i32 {
        if i >= j {
            INF
        } else {
            self.wm[i * self.n + j]
        }
    }

    fn hairpin_min(&self) -> usize {
        self.model.hairpin_min()
    }

    /// Best interior/bulge/stack closure of (i, j) and the inner pair that
    /// attains it; the first inner pair in scan order wins ties.
    #[inline]
    fn best_interior(&self, i: usize, j: usize, outer: PairType) -> (i32, Option<(usize, usize)>) {
        let n = self.n;
        let h = self.hairpin_min();
        let max = self.loops.max_interior;
        let mut best = INF;
        let mut arg = None;
        if j < i + h + 3 {
            return (best, arg);
        }
        let p_end = (i + 1 + max).min(j - 2 - h);
        for p in i + 1..=p_end {
            let l1 = p - i - 1;
            let q_lo = (p + h + 1).max((j - 1).saturating_sub(max - l1));
            let vrow = &self.v[p * n..p * n + n];
            let prow = &self.ptype[p * n..p * n + n];
            let ks = &self.partners[p];
            let lo = ks.partition_point(|&q| q < q_lo);
            let hi = ks.partition_point(|&q| q < j);
            for &q in ks[lo..hi].iter().rev() {
                let e = vrow[q] + self.loops.two_pair(outer, prow[q] as PairType, l1, j - q - 1);
                if e < best {
                    best = e;
                    arg = Some((p, q));
                }
            }
        }
        (best, arg)
    }

    /// Minimum over stack, bulge and interior closures of (i, j); every scan
    /// runs over contiguous memory.
    #[inline(always)]
    fn interior_min(&self, i: usize, j: usize, outer: PairType, w: usize) -> i32 {
        let n = self.n;
        let h = self.hairpin_min();
        let max = self.loops.max_interior;
        let mut e = INF;
        if let Some(inner) = self.pt(i + 1, j - 1) {
            e = self.v(i + 1, j - 1) + self.loops.stack[outer][inner];
        }
        // bulge on the 3' side: p = i + 1, q < j - 1
        let q_lo = (i + h + 2).max((j - 1).saturating_sub(max));
        if q_lo + 1 < j {
            let row = &self.v[(i + 1) * n + q_lo..(i + 1) * n + j - 1];
            for (k, &x) in row.iter().enumerate() {
                e = e.min(x + self.loops.bulge[j - 1 - (q_lo + k)]);
            }
        }
        // bulge on the 5' side: q = j - 1, p > i + 1
        let p_hi = (i + 1 + max).min(j - h - 2);
        if p_hi > i + 1 {
            let col = &self.v_t[(j - 1) * n + i + 2..=(j - 1) * n + p_hi];
            let b = &self.loops.bulge[1..=p_hi - i - 1];
            e = e.min(col.iter().zip(b).map(|(x, y)| x.wrapping_add(*y)).min().unwrap_or(INF));
        }
        // interior loops: rows p = i + 1 + l1 against a fixed window of q
        // ending at j - 2; pairs outside the loop limit meet INF entries
        if !self.loops.block.is_empty() && j > BLOCK && i + max < n {
            for (l1, erow) in self.loops.block.iter().enumerate().skip(1) {
                let start = (i + 1 + l1) * n + j - 1 - BLOCK;
                let row: &[i32; BLOCK] = self.v[start..start + BLOCK].try_into().unwrap();
                let m = row
                    .iter()
                    .zip(erow)
                    .map(|(x, y)| x.wrapping_add(*y))
                    .min()
                    .unwrap_or(INF);
                e = e.min(m);
            }
            return e;
        }
        // otherwise one column q = j - 1 - l2 at a time
        for l2 in 1..max {
            let Some(q) = (j - 1).checked_sub(l2) else { break };
            if q < i + h + 3 {
                break;
            }
            let p_hi = (i + 1 + max - l2).min(q - h - 1);
            if p_hi < i + 2 {
                continue;
            }
            let col = &self.v_t[q * n + i + 2..=q * n + p_hi];
            let t = &self.loops.interior_t[l2 * w + 1..=l2 * w + p_hi - i - 1];
            e = e.min(col.iter().zip(t).map(|(x, y)| x.wrapping_add(*y)).min().unwrap_or(INF));
        }
        e
    }

    fn fill(&mut self) {
        #[cfg(target_arch = "x86_64")]
        if std::arch::is_x86_feature_detected!("avx2") {
            // SAFETY: the CPU supports AVX2
            unsafe { self.fill_avx2() };
            return;
        }
        self.fill_body();
    }

    #[cfg(target_arch = "x86_64")]
    #[target_feature(enable = "avx2")]
    unsafe fn fill_avx2(&mut self) {
        self.fill_body();
    }

    #[inline(always)]
    fn fill_body(&mut self) {
        let n = self.n;
        let h = self.hairpin_min();
        let model = self.model;
        let (a, b, c) = (model.ml_closing(), model.ml_branch(), model.ml_unpaired());
        let max = self.loops.max_interior;
        let w = max + 1;
        for i in (0..n).rev() {
            for j in i + 1..n {
                if j - i > h {
                    if let Some(outer) = self.pt(i, j) {
                        let mut e = self.loops.hairpin[j - i - 1];
                        if j >= i + h + 3 {
                            e = e.min(self.interior_min(i, j, outer, w));
                        }
                        if j >= i + 2 * h + 5 {
                            let row = &self.wm[(i + 1) * n..(i + 2) * n];
                            let col = &self.wm_t[(j - 1) * n..j * n];
                            let (lo, hi) = (i + h + 2, j - h - 3);
                            let best = row[lo..=hi]
                                .iter()
                                .zip(&col[lo + 1..=hi + 1])
                                .map(|(x, y)| x.wrapping_add(*y))
                                .min()
                                .unwrap_or(INF);
                            if best < INF {
                                e = e.min(best + a + b);
                            }
                        }
                        self.v[i * n + j] = e;
                        self.v_t[j * n + i] = e;
                    }
                }
                // multiloop segment [i, j]: trailing or leading unpaired base,
                // a single branch, or a split into two segments
                let mut e = self.v(i, j).saturating_add(b).min(INF);
                if i + 1 < j {
                    e = e
                        .min(self.wm(i + 1, j).saturating_add(c))
                        .min(self.wm(i, j - 1).saturating_add(c));
                }
                if j >= i + 2 * h + 3 {
                    let (lo, hi) = (i + h + 2, j - h - 1);
                    let left = &self.wm[i * n + lo - 1..i * n + hi];
                    let right = &self.wm_t[j * n + lo..=j * n + hi];
                    let split = left
                        .iter()
                        .zip(right)
                        .map(|(x, y)| x.wrapping_add(*y))
                        .min()
                        .unwrap_or(INF);
                    e = e.min(split);
                }
                self.wm[i * n + j] = e;
                self.wm_t[j * n + i] = e;
            }
        }
        for i in (0..n).rev() {
            let mut e = self.f[i + 1];
            for k in (i + h + 1)..n {
                let vk = self.v(i, k);
                if vk < INF {
                    e = e.min(vk + self.f[k + 1]);
                }
            }
            self.f[i] = e;
        }
    }

    fn traceback(&self) -> Vec<(usize, usize)> {
        enum Item {
            Exterior(usize),
            Closed(usize, usize),
            Multi(usize, usize),
        }
        let n = self.n;
        let h = self.hairpin_min();
        let model = self.model;
        let (a, b, c) = (model.ml_closing(), model.ml_branch(), model.ml_unpaired());
        let mut pairs = Vec::new();
        let mut work = vec![Item::Exterior(0)];
        while let Some(item) = work.pop() {
            match item {
                Item::Exterior(i) => {
                    if i >= n {
                        continue;
                    }
                    let target = self.f[i];
                    let hit = ((i + h + 1)..n).find(|&k| {
                        let vk = self.v(i, k);
                        vk < INF && vk + self.f[k + 1] == target
                    });
                    match hit {
                        Some(k) => {
                            work.push(Item::Exterior(k + 1));
                            work.push(Item::Closed(i, k));
                        }
                        None => work.push(Item::Exterior(i + 1)),
                    }
                }
                Item::Closed(i, j) => {
                    pairs.push((i, j));
                    let target = self.v(i, j);
                    if self.loops.hairpin[j - i - 1] == target {
                        continue;
                    }
                    let outer = self.pt(i, j).expect("paired");
                    if let (e, Some((p, q))) = self.best_interior(i, j, outer) {
                        if e == target {
                            work.push(Item::Closed(p, q));
                            continue;
                        }
                    }
                    let hi = if j >= i + 2 * h + 5 { j - h - 3 } else { 0 };
                    let u = ((i + h + 2)..=hi)
                        .find(|&u| self.wm(i + 1, u) + self.wm(u + 1, j - 1) + a + b == target)
                        .expect("multiloop decomposition reproduces V");
                    work.push(Item::Multi(u + 1, j - 1));
                    work.push(Item::Multi(i + 1, u));
                }
                Item::Multi(i, j) => {
                    let target = self.wm(i, j);
                    let branch = ((i + h + 1)..=j).find_map(|k| {
                        let vk = self.v(i, k);
                        if vk >= INF {
                            return None;
                        }
                        if k == j {
                            return (vk + b == target).then_some((k, false));
                        }
                        if vk + b + c * (j - k) as i32 == target {
                            Some((k, false))
                        } else if vk + b + self.wm(k + 1, j) == target {
                            Some((k, true))
                        } else {
                            None
                        }
                    });
                    match branch {
                        Some((k, more)) => {
                            if more {
                                work.push(Item::Multi(k + 1, j));
                            }
                            work.push(Item::Closed(i, k));
                        }
                        None => work.push(Item::Multi(i + 1, j)),
                    }
                }
            }
        }
        pairs.sort_unstable();
        pairs
    }
}

/// Minimum free energy structure; energy in kcal/mol.
pub fn fold_mfe(seq: &NucleicSequence, model: &EnergyModel) -> SecondaryStructure {
    let mut t = Tables::new(seq.as_bytes(), model);
    t.fill();
    let pairs = t.traceback();
    let energy = t.f[0] as f64 / DCAL_PER_KCAL;
    SecondaryStructure::from_pairs(t.n, &pairs, Some(energy))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nt(s: &str) -> NucleicSequence {
        NucleicSequence::parse(s).unwrap()
    }

    #[test]
    fn unpairable_sequence_is_open() {
        let s = fold_mfe(&nt("AAAAAAAAAA"), &EnergyModel::bundled());
        assert_eq!(s.dot_bracket(), "..........");
        assert_eq!(s.energy(), Some(0.0));
    }

    #[test]
    fn hairpin_is_stable() {
        let model = EnergyModel::bundled();
        let seq = nt("GGGGAAAACCCC");
        let s = fold_mfe(&seq, &model);
        assert!(s.energy().unwrap() < 0.0);
        assert_eq!(s.dot_bracket(), "((((....))))");
        assert_eq!(model.evaluate(seq.as_bytes(), &s), s.energy());
    }

    #[test]
    fn reported_energy_matches_evaluation() {
        let model = EnergyModel::bundled();
        let seq = nt("GGGAAAUCCCAGCGCAAAGCGCUUUGGGAAACCCAUAUAGCGAAAGCUAUGGCCCAAAAGGGC");
        let s = fold_mfe(&seq, &model);
        s.check_against(&seq, model.hairpin_min()).unwrap();
        assert_eq!(model.evaluate(seq.as_bytes(), &s), s.energy());
    }

    #[test]
    fn block_scan_matches_column_scan() {
        let model = EnergyModel::bundled();
        let mut state = 0x9e37_79b9_7f4a_7c15u64;
        for len in [40, 75, 120, 200] {
            let bases: Vec<u8> = (0..len)
                .map(|_| {
                    state ^= state << 13;
                    state ^= state >> 7;
                    state ^= state << 17;
                    b"ACGT"[(state % 4) as usize]
                })
                .collect();
            let mut block = Tables::new(&bases, &model);
            block.fill();
            let mut column = Tables::new(&bases, &model);
            column.loops.block.clear();
            column.fill();
            assert_eq!(block.v, column.v);
            assert_eq!(block.f[0], column.f[0]);
        }
    }

    #[test]
    fn multiloop_structure_found() {
        // two strong hairpins inside a closing helix
        let model = EnergyModel::bundled().with_multiloop(0.0, 0.0, 0.0);
        let seq = nt("GGGGAGGGGAAAACCCCAGGGGAAAACCCCACCCC");
        let s = fold_mfe(&seq, &model);
        assert_eq!(model.evaluate(seq.as_bytes(), &s), s.energy());
        assert_eq!(crate::folding::count_motifs(&s).multiloop, 1, "{}", s);
    }
}
