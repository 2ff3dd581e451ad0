use std::time::Instant;

use mrna_evo::io::{optimize_observed, RunConfig};
use mrna_evo::seq::{NucleicSequence, ProteinSequence};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).map_or(1, |s| s.parse().unwrap());
    let len: usize = args.get(2).map_or(150, |s| s.parse().unwrap());
    let generations: usize = args.get(3).map_or(50, |s| s.parse().unwrap());
    let rbd = "RVQPTESIVRFPNITNLCPFGEVFNATRFASVYAWNRKRISNCVADYSVLYNSASFSTFKCYGVSPTKLNDLCFTNVYADSFVIRGDEVRQIAPGQTGKIADYNYKLPDDFTGCVIAWNSNNLDSKVGGNYNYLYRLFRKSNLKPFERDISTEIYQAGSTPCNGVEGFNCYFPLQSYGFQPTNGVGYQPYRVVVLSFELLHAPATVCGPKKSTNLVKNKCVNF";
    let target = format!("M{}", &rbd[..len - 1]);
    let mut cfg = RunConfig::<f64>::new(ProteinSequence::parse(&target).unwrap());
    cfg.utr5 = Some(NucleicSequence::parse("GGGAAAUAAGAGAGAAAAGAAGAGUAAGAAGAAAUAUAAGAGCCACC").unwrap());
    cfg.utr3 = Some(NucleicSequence::parse("GCUGGAGCCUCGGUGGCCAUGCUUCUUGCCCCUUGGGCC").unwrap());
    cfg.ga.pop_init = 60;
    cfg.ga.pop_cap = 200;
    cfg.ga.max_generations = generations;
    cfg.ga.rng_seed = seed;
    cfg.out_dir = std::env::temp_dir().join(format!("desk{seed}"));
    let t = Instant::now();
    let out = optimize_observed(&cfg, &mut |g, pop| {
        eprintln!("gen {g} size {} t={:?}", pop.len(), t.elapsed());
    })
    .unwrap();
    for r in &out.report.generations {
        println!(
            "{:3} {:4} best {:.5} mean {:.5} cai {:.4} gc {:.4} imm {:.2} mfe {:.1} u30 {:.3}",
            r.generation,
            r.pop_size,
            r.fitness_max,
            r.fitness_mean,
            r.metric_means[0],
            r.metric_means[3],
            r.metric_means[4],
            r.metric_means[6],
            r.metric_means[5]
        );
    }
    println!("plateau {} elapsed {:?}", out.report.stopped_on_plateau, t.elapsed());
}
