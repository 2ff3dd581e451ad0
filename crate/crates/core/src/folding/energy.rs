//! Reduced nearest-neighbour energy model: stacking doublets plus size-based
//! loop penalties with an affine multiloop term.
//!
//! Energies are held as integers in units of 0.01 kcal/mol so that different
//! evaluation orders give identical totals.

use std::path::Path;

use super::{children, SecondaryStructure};
use crate::error::{Error, Result};

pub const DCAL_PER_KCAL: f64 = 100.0;

const BUNDLED: &str = include_str!("../../data/energy_model.tsv");

/// Canonical and wobble pairs: AU, CG, GC, UA, GU, UG.
pub type PairType = usize;

const PAIR_NAMES: [&str; 6] = ["AU", "CG", "GC", "UA", "GU", "UG"];

/// Pair type of two DNA-form bases (`T` read as `U`).
#[inline]
pub fn pair_type(a: u8, b: u8) -> Option<PairType> {
    match (a, b) {
        (b'A', b'T') => Some(0),
        (b'C', b'G') => Some(1),
        (b'G', b'C') => Some(2),
        (b'T', b'A') => Some(3),
        (b'G', b'T') => Some(4),
        (b'T', b'G') => Some(5),
        _ => None,
    }
}

fn to_dcal(kcal: f64) -> i32 {
    (kcal * DCAL_PER_KCAL).round() as i32
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyModel {
    stack: [[i32; 6]; 6],
    hairpin: Vec<(usize, i32)>,
    bulge: Vec<(usize, i32)>,
    interior: Vec<(usize, i32)>,
    asymmetry: i32,
    asymmetry_max: i32,
    extrapolation: f64,
    max_interior: usize,
    hairpin_min: usize,
    ml_closing: i32,
    ml_branch: i32,
    ml_unpaired: i32,
}

impl EnergyModel {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED, "energy_model.tsv").expect("bundled energy model is valid")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut stack: [[Option<i32>; 6]; 6] = [[None; 6]; 6];
        let mut hairpin = Vec::new();
        let mut bulge = Vec::new();
        let mut interior = Vec::new();
        let mut scalars: std::collections::HashMap<&str, f64> = Default::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            let err = |m: &str| Error::parse(source, n + 1, m);
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::parse(source, n + 1, format!("bad number {s:?}")))
            };
            match f[0] {
                "stack" if f.len() == 4 => {
                    let pt = |s: &str| PAIR_NAMES.iter().position(|p| *p == s.replace('T', "U"));
                    let (o, i) = match (pt(f[1]), pt(f[2])) {
                        (Some(o), Some(i)) => (o, i),
                        _ => return Err(err("unknown pair type")),
                    };
                    let e = to_dcal(num(f[3])?);
                    if e >= 0 {
                        return Err(err("stacking energies must be negative"));
                    }
                    stack[o][i] = Some(e);
                }
                kind @ ("hairpin" | "bulge" | "interior") if f.len() == 3 => {
                    let size: usize = f[1].parse().map_err(|_| err("bad loop size"))?;
                    let e = to_dcal(num(f[2])?);
                    if e < 0 {
                        return Err(err("loop penalties must be nonnegative"));
                    }
                    let table = match kind {
                        "hairpin" => &mut hairpin,
                        "bulge" => &mut bulge,
                        _ => &mut interior,
                    };
                    table.push((size, e));
                }
                key @ ("asymmetry" | "asymmetry_max" | "extrapolation" | "max_interior" | "hairpin_min"
                | "ml_closing" | "ml_branch" | "ml_unpaired")
                    if f.len() == 2 =>
                {
                    let v = num(f[1])?;
                    if v < 0.0 {
                        return Err(err("loop penalties must be nonnegative"));
                    }
                    scalars.insert(key, v);
                }
                _ => return Err(err("unrecognised record")),
            }
        }
        let mut full = [[0i32; 6]; 6];
        for o in 0..6 {
            for i in 0..6 {
                full[o][i] = stack[o][i].ok_or_else(|| {
                    Error::parse(source, 0, format!("missing stack {} {}", PAIR_NAMES[o], PAIR_NAMES[i]))
                })?;
            }
        }
        for (name, table) in [
            ("hairpin", &mut hairpin),
            ("bulge", &mut bulge),
            ("interior", &mut interior),
        ] {
            if table.is_empty() {
                return Err(Error::parse(source, 0, format!("no {name} loop entries")));
            }
            table.sort_unstable();
            if table.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(Error::parse(source, 0, format!("duplicate {name} loop size")));
            }
        }
        let get = |k: &str| {
            scalars
                .get(k)
                .copied()
                .ok_or_else(|| Error::parse(source, 0, format!("missing {k}")))
        };
        let hairpin_min = get("hairpin_min")? as usize;
        if hairpin_min < 1 {
            return Err(Error::parse(source, 0, "hairpin_min must be at least 1"));
        }
        Ok(EnergyModel {
            stack: full,
            hairpin,
            bulge,
            interior,
            asymmetry: to_dcal(get("asymmetry")?),
            asymmetry_max: to_dcal(get("asymmetry_max")?),
            extrapolation: get("extrapolation")?,
            max_interior: get("max_interior")? as usize,
            hairpin_min,
            ml_closing: to_dcal(get("ml_closing")?),
            ml_branch: to_dcal(get("ml_branch")?),
            ml_unpaired: to_dcal(get("ml_unpaired")?),
        })
    }

    /// Sizes below the table use its first entry; sizes above it are
    /// extrapolated logarithmically from the last.
    fn loop_lookup(&self, table: &[(usize, i32)], size: usize) -> i32 {
        let (first_size, first) = table[0];
        if size <= first_size {
            return first;
        }
        match table.binary_search_by_key(&size, |&(s, _)| s) {
            Ok(k) => table[k].1,
            Err(k) if k < table.len() => {
                // gap inside the table: take the next defined size
                table[k].1
            }
            Err(_) => {
                let (last_size, last) = table[table.len() - 1];
                last + (self.extrapolation * DCAL_PER_KCAL * (size as f64 / last_size as f64).ln()).round() as i32
            }
        }
    }

    pub fn hairpin_min(&self) -> usize {
        self.hairpin_min
    }

    pub fn max_interior(&self) -> usize {
        self.max_interior
    }

    #[inline]
    pub fn stack(&self, outer: PairType, inner: PairType) -> i32 {
        self.stack[outer][inner]
    }

    pub fn hairpin(&self, size: usize) -> i32 {
        self.loop_lookup(&self.hairpin, size)
    }

    pub fn bulge(&self, size: usize) -> i32 {
        self.loop_lookup(&self.bulge, size)
    }

    /// Interior loop with `l1` and `l2` unpaired bases on the two sides, both
    /// nonzero.
    pub fn interior(&self, l1: usize, l2: usize) -> i32 {
        let asym = (self.asymmetry * l1.abs_diff(l2) as i32).min(self.asymmetry_max);
        self.loop_lookup(&self.interior, l1 + l2) + asym
    }

    /// Energy of the two-pair loop closed by `outer` around `inner` with `l1`
    /// and `l2` unpaired bases: a stack, bulge or interior loop.
    #[inline]
    pub fn two_pair_loop(&self, outer: PairType, inner: PairType, l1: usize, l2: usize) -> i32 {
        match (l1, l2) {
            (0, 0) => self.stack(outer, inner),
            (0, n) | (n, 0) => self.bulge(n),
            _ => self.interior(l1, l2),
        }
    }

    pub fn ml_closing(&self) -> i32 {
        self.ml_closing
    }

    pub fn ml_branch(&self) -> i32 {
        self.ml_branch
    }

    pub fn ml_unpaired(&self) -> i32 {
        self.ml_unpaired
    }

    /// Total energy (0.01 kcal/mol) of a structure by loop decomposition, or
    /// `None` when the structure is outside the model (illegal pair, hairpin
    /// below minimum size, or interior loop above the maximum size).
    pub fn evaluate_dcal(&self, bases: &[u8], structure: &SecondaryStructure) -> Option<i32> {
        if structure.len() != bases.len() {
            return None;
        }
        let mut total = 0i32;
        for (i, j) in structure.pairs() {
            let outer = pair_type(bases[i], bases[j])?;
            if j - i <= self.hairpin_min {
                return None;
            }
            let inner = children(structure, i, j);
            total += match inner.as_slice() {
                [] => self.hairpin(j - i - 1),
                &[(p, q)] => {
                    let (l1, l2) = (p - i - 1, j - q - 1);
                    if l1 + l2 > self.max_interior {
                        return None;
                    }
                    self.two_pair_loop(outer, pair_type(bases[p], bases[q])?, l1, l2)
                }
                branches => {
                    let paired: usize = branches.iter().map(|(p, q)| q - p + 1).sum();
                    let unpaired = (j - i - 1 - paired) as i32;
                    self.ml_closing + self.ml_branch * (branches.len() as i32 + 1) + self.ml_unpaired * unpaired
                }
            };
        }
        Some(total)
    }

    /// [`evaluate_dcal`](Self::evaluate_dcal) in kcal/mol.
    pub fn evaluate(&self, bases: &[u8], structure: &SecondaryStructure) -> Option<f64> {
        self.evaluate_dcal(bases, structure).map(|e| e as f64 / DCAL_PER_KCAL)
    }

    /// Copy with different multiloop constants.
    pub fn with_multiloop(mut self, closing: f64, branch: f64, unpaired: f64) -> Self {
        self.ml_closing = to_dcal(closing);
        self.ml_branch = to_dcal(branch);
        self.ml_unpaired = to_dcal(unpaired);
        self
    }
}

#[cfg(test)]
impl EnergyModel {
    fn bundled_text() -> String {
        BUNDLED.to_string()
    }
}
