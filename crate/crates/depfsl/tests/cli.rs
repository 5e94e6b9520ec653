//! End-to-end runs of the `depfsl` binary on the checked-in fixtures.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/synthetic")
}

fn fixture(name: &str) -> String {
    fixtures().join(name).to_str().unwrap().to_string()
}

fn depfsl<S: AsRef<std::ffi::OsStr>>(args: &[S]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_depfsl")).args(args).output().expect("run depfsl")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

/// Trains a small model of the given kind into `dir/name`.
fn train(dir: &TempDir, model: &str, name: &str) -> String {
    let out = path(dir, name);
    let corpus = fixture("corpus.conllu");
    let o = depfsl(&[
        "train", "--model", model, "--corpus", &corpus, "--min-count", "1", "--dim", "12", "--epochs", "1",
        "--tau", "1e-3", "--out", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    out
}

#[test]
fn vocab_writes_counts_and_reports_failures() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(&dir, "vocab.txt");
    let o = depfsl(&["vocab", "--corpus", &fixture("corpus.conllu"), "--min-count", "1", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("#total "));
    assert!(text.lines().any(|l| l.starts_with("the\t")));

    let missing = depfsl(&["vocab", "--corpus", &path(&dir, "absent.conllu"), "--out", &out]);
    assert_eq!(code(&missing), 2);
    assert!(stderr(&missing).contains("absent.conllu"));

    let empty = depfsl(&["vocab", "--corpus", &fixture("corpus.conllu"), "--min-count", "1000000000", "--out", &out]);
    assert_eq!(code(&empty), 3, "{}", stderr(&empty));
}

#[test]
fn malformed_corpus_error_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let bad = path(&dir, "bad.conllu");
    fs::write(&bad, "1\tthe\t_\t_\t_\t_\t2\tdet\t_\t_\n2\tcat\t_\t_\t_\t_\n").unwrap();
    let o = depfsl(&["vocab", "--corpus", &bad, "--out", &path(&dir, "v")]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains(":2"), "{}", stderr(&o));
}

#[test]
fn train_logs_defaults_and_writes_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(&dir, "m");
    let o = depfsl(&[
        "train", "--model", "dep-matrix", "--corpus", &fixture("corpus.conllu"), "--min-count", "1", "--dim", "8",
        "--epochs", "1", "--out", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let log = stderr(&o);
    assert!(log.contains("k=15 batch=5 lr=0.025 window=5 tau=0.000001"), "{log}");
    assert!(log.contains("epoch=1/1 tuples="), "{log}");
    assert!(log.contains("mean_loss="), "{log}");
    for f in ["space.bin", "matrices.bin", "model.conf"] {
        assert!(Path::new(&out).join(f).exists(), "{f}");
    }
    let conf = fs::read_to_string(Path::new(&out).join("model.conf")).unwrap();
    assert!(conf.contains("model = dep-matrix"), "{conf}");

    let defaults = depfsl(&[
        "train", "--model", "skipgram", "--corpus", &fixture("corpus.conllu"), "--epochs", "0", "--out", &path(&dir, "d"),
    ]);
    assert_eq!(code(&defaults), 0, "{}", stderr(&defaults));
    assert!(stderr(&defaults).contains("dim=100 k=15 batch=5 lr=0.025"));
    assert!(!Path::new(&path(&dir, "d")).join("matrices.bin").exists());
}

#[test]
fn train_rejects_bad_arguments() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("corpus.conllu");
    let typo = depfsl(&["train", "--model", "dep-matrx", "--corpus", &corpus, "--out", &path(&dir, "x")]);
    assert_eq!(code(&typo), 2);
    assert!(stderr(&typo).contains("dep-matrix"));
    let zero = depfsl(&["train", "--model", "skipgram", "--corpus", &corpus, "--dim", "0", "--out", &path(&dir, "x")]);
    assert_eq!(code(&zero), 2);
}

#[test]
fn train_uses_a_vocabulary_file() {
    let dir = tempfile::tempdir().unwrap();
    let vocab = path(&dir, "vocab.txt");
    assert_eq!(code(&depfsl(&["vocab", "--corpus", &fixture("corpus.conllu"), "--min-count", "50", "--out", &vocab])), 0);
    let out = path(&dir, "m");
    let o = depfsl(&[
        "train", "--model", "skipgram", "--corpus", &fixture("corpus.conllu"), "--vocab", &vocab, "--dim", "4",
        "--epochs", "0", "--out", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let export = depfsl(&["export", "--space", &out]);
    let text = String::from_utf8(export.stdout).unwrap();
    let rows: usize = text.lines().next().unwrap().split(' ').next().unwrap().parse().unwrap();
    let listed = fs::read_to_string(&vocab).unwrap().lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, listed);
    assert_eq!(text.lines().count(), rows + 1);
}

#[test]
fn infer_writes_one_row_and_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(&dir, "dep-matrix", "dm");
    let contexts = fixture("dn/0000.conllu");
    for method in ["additive", "dep-additive", "dm-additive"] {
        let diag = path(&dir, &format!("{method}.diag"));
        let o = depfsl(&["infer", "--space", &model, "--contexts", &contexts, "--method", method, "--diagnostics", &diag]);
        assert_eq!(code(&o), 0, "{method}: {}", stderr(&o));
        let text = String::from_utf8(o.stdout).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "1 12");
        assert!(lines[1].starts_with("___ "));
        assert_eq!(lines[1].split(' ').count(), 13);
        let d = fs::read_to_string(&diag).unwrap();
        assert!(d.lines().last().unwrap().starts_with("used="), "{d}");
    }
}

#[test]
fn infer_failures_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let sg = train(&dir, "skipgram", "sg");
    let contexts = fixture("dn/0000.conllu");
    let dm = depfsl(&["infer", "--space", &sg, "--contexts", &contexts, "--method", "dm-additive"]);
    assert_eq!(code(&dm), 2);
    assert!(stderr(&dm).contains("matrices"));

    let only_stop = path(&dir, "stop.conllu");
    fs::write(&only_stop, "1\tthe\t_\t_\t_\t_\t2\tdet\t_\t_\n2\t___\t_\t_\t_\t_\t0\troot\t_\t_\n\n").unwrap();
    let o = depfsl(&["infer", "--space", &sg, "--contexts", &only_stop]);
    assert_eq!(code(&o), 5, "{}", stderr(&o));

    let no_slot = fixture("corpus.conllu");
    assert_eq!(code(&depfsl(&["infer", "--space", &sg, "--contexts", &no_slot])), 2);
}

#[test]
fn eval_reports_every_protocol() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(&dir, "dep-matrix", "dm");
    let dn = path(&dir, "dn.tsv");
    let o = depfsl(&["eval", "dn", "--space", &model, "--data", &fixture("dn.tsv"), "--method", "dep-additive", "--report", &dn]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = fs::read_to_string(&dn).unwrap();
    assert!(r.starts_with("task\tdn"), "{r}");
    assert!(r.contains("\nMRR\t") && r.contains("\nmedian_rank\t"), "{r}");
    assert!(String::from_utf8(o.stdout).unwrap().contains("MRR"));

    let ch = path(&dir, "chimera.tsv");
    let o = depfsl(&["eval", "chimera", "--space", &model, "--data", &fixture("chimera.tsv"), "--report", &ch]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = fs::read_to_string(&ch).unwrap();
    for key in ["L2\t", "L4\t", "L6\t"] {
        assert!(r.contains(key), "{r}");
    }

    let reports: Vec<String> = (0..2)
        .map(|i| {
            let p = path(&dir, &format!("crw{i}.tsv"));
            let o = depfsl(&[
                "eval", "crw", "--space", &model, "--data", &fixture("crw.tsv"), "--sizes", "1,4", "--selections", "3",
                "--seed", "11", "--report", &p,
            ]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            fs::read_to_string(&p).unwrap()
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
    assert!(reports[0].contains("spearman@1\t") && reports[0].contains("spearman@4\t"));

    let bad = depfsl(&["eval", "crw", "--space", &model, "--data", &fixture("crw.tsv"), "--sizes", "1,x"]);
    assert_eq!(code(&bad), 2);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let conf = path(&dir, "train.conf");
    fs::write(&conf, "# small run\nmodel = skipgram\ndim = 6\nepochs = 0\nmin-count = 1\n").unwrap();
    let out = path(&dir, "m");
    let o = depfsl(&["train", "--config", &conf, "--corpus", &fixture("corpus.conllu"), "--dim", "7", "--out", &out]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("model=skipgram dim=7"), "{}", stderr(&o));

    fs::write(&conf, "dimension = 6\n").unwrap();
    let o = depfsl(&["train", "--config", &conf, "--model", "skipgram", "--corpus", &fixture("corpus.conllu"), "--out", &out]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("dimension"));
}

#[test]
fn neighbors_and_export() {
    let dir = tempfile::tempdir().unwrap();
    let model = train(&dir, "skipgram", "sg");
    let o = depfsl(&["neighbors", "--space", &model, "--word", "the", "--k", "4"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().all(|l| !l.starts_with("the\t")));
    assert_eq!(code(&depfsl(&["neighbors", "--space", &model, "--word", "zzz"])), 2);

    let out = path(&dir, "space.txt");
    assert_eq!(code(&depfsl(&["export", "--space", &model, "--out", &out])), 0);
    let text = fs::read_to_string(&out).unwrap();
    let header: Vec<usize> = text.lines().next().unwrap().split(' ').map(|x| x.parse().unwrap()).collect();
    assert_eq!(header[1], 12);
    assert_eq!(text.lines().count(), header[0] + 1);
}

#[test]
fn help_lists_defaults() {
    let o = depfsl(&["train", "--help"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    for d in ["[default: 100]", "[default: 15]", "[default: 0.025]", "[default: 0.000001]"] {
        assert!(text.contains(d), "{d} missing from:\n{text}");
    }
    assert_eq!(code(&depfsl(&["frobnicate"])), 2);
}

fn tree(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn fixtures_match_the_generator() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(&dir, "synthetic");
    assert_eq!(code(&depfsl(&["synth", "--out", &out, "--sentences", "2000", "--seed", "3"])), 0);
    let (fresh, committed) = (tree(Path::new(&out)), tree(&fixtures()));
    assert_eq!(fresh.len(), committed.len());
    assert!(fresh == committed, "fixtures differ from `depfsl synth --sentences 2000 --seed 3`");
}
