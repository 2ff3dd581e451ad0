use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use mrna_evo::codon_data::load_cps_table;
use mrna_evo::folding::{parse_fold_output, BuiltinFolder, Folder};
use mrna_evo::io::{parse_fasta, GENERATIONS_FILE, REPORT_FILE, TOPK_FILE};
use mrna_evo::seq::{translate, GeneticCode, NucleicSequence, ProteinSequence};

const BIN: &str = env!("CARGO_BIN_EXE_mrna-evo");
const CDS: &str = "ATGGCTGCCAAGGAGCTGTTCCAGGGCCTGTGGTAA";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(BIN)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn fold_unpairable_sequence() {
    let o = run(&["fold", "AAAAAAAA"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "AAAAAAAA\n........ (0.00)\n");
}

#[test]
fn fold_output_round_trips() {
    let seq = "GGGGAAAACCCCAUGGCUAGCUAGGCUAGC";
    let o = run(&["fold", seq]);
    assert!(o.status.success());
    let text = stdout(&o);
    let parsed = parse_fold_output(&text, seq.len()).unwrap();
    let direct = BuiltinFolder::default()
        .fold(&NucleicSequence::parse(seq).unwrap())
        .unwrap();
    assert_eq!(parsed.dot_bracket(), direct.dot_bracket());
    assert_eq!(parsed.energy(), direct.energy());
}

#[test]
fn fold_reads_fasta_from_stdin() {
    let o = run_stdin(&["fold"], ">x\nGGGGAAAA\nCCCC\n");
    assert!(o.status.success());
    assert_eq!(stdout(&o), stdout(&run(&["fold", "GGGGAAAACCCC"])));
}

#[test]
fn external_backend_through_subprocess() {
    let seq = "GGGGAAAACCCCAUGGCUAGCUAGGCUAGC";
    let engine = format!("{BIN} fold");
    let ext = run(&["fold", seq, "--backend", "external", "--engine", &engine]);
    assert!(ext.status.success(), "{}", String::from_utf8_lossy(&ext.stderr));
    assert_eq!(stdout(&ext), stdout(&run(&["fold", seq])));
}

#[test]
fn external_backend_failure_is_reported() {
    let o = run(&["fold", "GGGAAACCC", "--backend", "external", "--engine", "false"]);
    assert!(!o.status.success());
    assert!(!o.stderr.is_empty());
}

#[test]
fn score_prints_metric_schema() {
    let o = run(&["score", CDS]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let header: Vec<&str> = lines[0].split(',').collect();
    let row: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(header.len(), 1 + 11 + 10 + 1);
    assert_eq!(row.len(), header.len());
    assert_eq!(header[0], "id");
    assert_eq!(*header.last().unwrap(), "fitness");
    for v in &row[1..] {
        let x: f64 = v.parse().unwrap();
        assert!(x.is_finite());
    }
    let fitness: f64 = row.last().unwrap().parse().unwrap();
    assert!((0.0..=1.0).contains(&fitness));
    assert_eq!(text, stdout(&run(&["score", CDS])));
}

#[test]
fn score_rejects_invalid_cds() {
    // internal stop codon
    let o = run(&["score", "ATGTAAGCTTAA"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("input"));

    let o = run(&["score", "ATGGCTGC"]);
    assert!(!o.status.success());
}

#[test]
fn score_fasta_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let fasta = dir.path().join("in.fa");
    fs::write(&fasta, format!(">a\n{CDS}\n>b\nATGAAAAAGTGA\n")).unwrap();
    let csv = dir.path().join("out.csv");
    let o = run(&[
        "score",
        "--fasta",
        fasta.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = fs::read_to_string(&csv).unwrap();
    assert_eq!(written, stdout(&o));
    assert_eq!(written.lines().count(), 3);
}

#[test]
fn seed_writes_translating_population() {
    let target = "MAKELFQGLW";
    let o = run(&["seed", "--target", target, "-n", "220", "--seed", "7"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let records = parse_fasta(&text, "stdout").unwrap();
    assert_eq!(records.len(), 220);
    assert_eq!(records[0].0, "seed0001");
    let protein = ProteinSequence::parse(target).unwrap();
    for (_, s) in &records {
        let t = translate(&NucleicSequence::parse(s).unwrap(), GeneticCode::standard()).unwrap();
        assert_eq!(t.protein, protein);
    }
    assert_eq!(
        text,
        stdout(&run(&["seed", "--target", target, "-n", "220", "--seed", "7"]))
    );
    assert_ne!(
        text,
        stdout(&run(&["seed", "--target", target, "-n", "220", "--seed", "8"]))
    );
}

#[test]
fn corpus_build_cps_table() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.fa");
    fs::write(&corpus, format!(">a\n{CDS}\n>b\nATGAAAAAGCTGCTCTGA\n")).unwrap();
    let out = dir.path().join("cps.tsv");
    let o = run(&["corpus", "build-cps", corpus.to_str().unwrap(), out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let rows = text
        .lines()
        .filter(|l| !l.starts_with('#') && l.split('\t').count() == 3)
        .count();
    assert_eq!(rows, 61 * 61);
    let table = load_cps_table::<f64>(&out).unwrap();
    assert_eq!(table.to_tsv(), text);

    let empty = dir.path().join("empty.fa");
    fs::write(&empty, "").unwrap();
    let o = run(&["corpus", "build-cps", empty.to_str().unwrap(), out.to_str().unwrap()]);
    assert!(!o.status.success());
}

fn write_config(dir: &Path, out: &str) -> std::path::PathBuf {
    let path = dir.join("run.cfg");
    fs::write(
        &path,
        format!(
            "target = MAKELFQGLWRSTAEVK\nutr5 = GGGAAAUAAGAGAGAAAAGAAGAGCCACC\nutr3 = GCUGGAGCCUCGGUGGCC\n\
             pop_init = 12\npop_cap = 20\ngrowth_step = 4\nmax_generations = 1\nseed = 11\nout_dir = {out}\ntop_k = 3\n"
        ),
    )
    .unwrap();
    path
}

#[test]
fn optimize_single_generation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a");
    let o = run(&["--config", cfg.to_str().unwrap(), "optimize"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("a");
    let csv = fs::read_to_string(out.join(GENERATIONS_FILE)).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(out.join(REPORT_FILE).exists());
    let top = parse_fasta(&fs::read_to_string(out.join(TOPK_FILE)).unwrap(), "topk").unwrap();
    assert_eq!(top.len(), 3);

    let o = run(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("b").to_str().unwrap(),
        "optimize",
    ]);
    assert!(o.status.success());
    for f in [GENERATIONS_FILE, TOPK_FILE] {
        assert_eq!(
            fs::read(out.join(f)).unwrap(),
            fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn optimize_requires_config() {
    let o = run(&["optimize"]);
    assert!(!o.status.success());
}

#[test]
fn bad_config_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "target = MAK\npopulation = 3\n").unwrap();
    let o = run(&["--config", cfg.to_str().unwrap(), "optimize"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("population"));
}
