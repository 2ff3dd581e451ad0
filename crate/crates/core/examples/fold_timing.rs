use mrna_evo::folding::{fold_mfe, EnergyModel};
use mrna_evo::seq::NucleicSequence;
use std::time::{Duration, Instant};

fn main() {
    let mut x: u64 = 0x9e3779b97f4a7c15;
    let n: usize = std::env::args().nth(1).map_or(540, |s| s.parse().unwrap());
    let s: String = (0..n)
        .map(|_| {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            b"ACGU"[(x % 4) as usize] as char
        })
        .collect();
    let seq = NucleicSequence::parse(&s).unwrap();
    let m = EnergyModel::bundled();
    let mut best = Duration::MAX;
    let mut e = None;
    for _ in 0..7 {
        let t = Instant::now();
        e = fold_mfe(&seq, &m).energy();
        best = best.min(t.elapsed());
    }
    println!("{n}: {best:?} {e:?}");
}
