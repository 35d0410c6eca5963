//! The binary's exit codes and file outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tbacert_core::fixtures::{demo, demo_certificate, demo_uniform_certificate, DEMO};
use tbacert_core::formats::{write_certificate, write_renaming, Names, Renaming};
use tempfile::TempDir;

fn tbacert(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tbacert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let ws = Self {
            dir: TempDir::new().unwrap(),
        };
        ws.put("demo.ta", DEMO);
        ws
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn put(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fixture_certificate_is_accepted() {
    let ws = Workspace::new();
    let names = Names::of(&demo());
    ws.put("demo.cert", &write_certificate(&demo_certificate(), &names));
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("demo.cert"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "accepted");
}

#[test]
fn uniform_numbering_is_rejected_with_reason() {
    let ws = Workspace::new();
    let names = Names::of(&demo());
    ws.put(
        "u.cert",
        &write_certificate(&demo_uniform_certificate(), &names),
    );
    for jobs in ["1", "3"] {
        let o = tbacert(&[
            "check",
            "--model",
            &ws.arg("demo.ta"),
            "--certificate",
            &ws.arg("u.cert"),
            "--jobs",
            jobs,
        ]);
        assert_eq!(code(&o), 1);
        assert!(stderr(&o).contains("numbering-violation"), "{}", stderr(&o));
        assert!(stdout(&o).starts_with("rejected"));
    }
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("u.cert"),
        "--fail-fast",
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(stderr(&o).matches("numbering-violation").count(), 1);
}

#[test]
fn inputs_that_cannot_be_read_exit_with_2() {
    let ws = Workspace::new();
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("missing"),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("missing"));

    ws.put(
        "bad.cert",
        "certificate v1\nmode inclusion\nclocks 1 x\nentry q0 0 <=0 <=x INF <=0\n",
    );
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("bad.cert"),
    ]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));

    ws.put("wrong.cert", "certificate v1\nmode inclusion\nclocks 1 y\n");
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("wrong.cert"),
    ]);
    assert_eq!(code(&o), 2);

    assert_eq!(code(&tbacert(&["check", "--unknown-flag"])), 2);
    assert_eq!(code(&tbacert(&["frobnicate"])), 2);
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("wrong.cert"),
        "--jobs",
        "0",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn generate_then_check_accepts() {
    let ws = Workspace::new();
    for algo in ["ndfs", "scc"] {
        for mode in ["inclusion", "alpha-lu"] {
            let o = tbacert(&[
                "generate",
                "--model",
                &ws.arg("demo.ta"),
                "--algo",
                algo,
                "--mode",
                mode,
                "--out-cert",
                &ws.arg("g.cert"),
                "--out-graph",
                &ws.arg("g.graph"),
            ]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            assert_eq!(stdout(&o).trim(), "empty");
            let graph = fs::read_to_string(ws.path("g.graph")).unwrap();
            assert_eq!(graph.lines().filter(|l| l.starts_with("node ")).count(), 5);
            assert_eq!(graph.lines().filter(|l| l.starts_with("edge ")).count(), 4);
            assert_eq!(
                graph.lines().filter(|l| l.starts_with("subsume ")).count(),
                1
            );
            let o = tbacert(&[
                "check",
                "--model",
                &ws.arg("demo.ta"),
                "--certificate",
                &ws.arg("g.cert"),
            ]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));

            let o = tbacert(&[
                "convert",
                "--graph",
                &ws.arg("g.graph"),
                "--out-cert",
                &ws.arg("c.cert"),
            ]);
            assert_eq!(code(&o), 0, "{}", stderr(&o));
            assert_eq!(
                fs::read_to_string(ws.path("c.cert")).unwrap(),
                fs::read_to_string(ws.path("g.cert")).unwrap()
            );
        }
    }
}

#[test]
fn nonempty_model_reports_a_lasso() {
    let ws = Workspace::new();
    ws.put(
        "loop.ta",
        "clock x\nlocation a initial accepting\nedge a -> a reset: x\n",
    );
    for algo in ["ndfs", "scc"] {
        let o = tbacert(&[
            "generate",
            "--model",
            &ws.arg("loop.ta"),
            "--algo",
            algo,
            "--out-cert",
            &ws.arg("x.cert"),
        ]);
        assert_eq!(code(&o), 1);
        assert_eq!(stdout(&o).trim(), "nonempty");
        assert!(stderr(&o).contains("cycle: (a,"));
        assert!(!ws.path("x.cert").exists());
    }
    let o = tbacert(&["oracle", "--model", &ws.arg("loop.ta")]);
    assert_eq!(
        (code(&o), stdout(&o).trim().to_string()),
        (1, "nonempty".into())
    );
}

#[test]
fn oracle_trivial_certificate_checks() {
    let ws = Workspace::new();
    let o = tbacert(&[
        "oracle",
        "--model",
        &ws.arg("demo.ta"),
        "--emit-trivial-cert",
        &ws.arg("t.cert"),
    ]);
    assert_eq!(
        (code(&o), stdout(&o).trim().to_string()),
        (0, "empty".into())
    );
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("t.cert"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let o = tbacert(&["oracle", "--model", &ws.arg("demo.ta"), "--cap", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn renumber_repairs_the_uniform_certificate() {
    let ws = Workspace::new();
    let names = Names::of(&demo());
    ws.put(
        "u.cert",
        &write_certificate(&demo_uniform_certificate(), &names),
    );
    let o = tbacert(&[
        "renumber",
        "--cert",
        &ws.arg("u.cert"),
        "--model",
        &ws.arg("demo.ta"),
        "--out",
        &ws.arg("r.cert"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("r.cert"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn renamed_certificate_needs_its_dictionary() {
    let ws = Workspace::new();
    let ta = demo();
    let names = Names::of(&ta);
    let numeric = Names {
        clocks: vec!["0".into()],
        locations: (0..3).map(|k| k.to_string()).collect(),
    };
    ws.put("n.cert", &write_certificate(&demo_certificate(), &numeric));
    let dict = ws.put("n.ren", &write_renaming(&Renaming::of(&names)));
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("n.cert"),
        "--renaming",
        s(&dict),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("demo.ta"),
        "--certificate",
        &ws.arg("n.cert"),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn synthetic_models_round_trip_through_the_pipeline() {
    let ws = Workspace::new();
    let o = tbacert(&["synth", "ring", "--len", "12", "--out", &ws.arg("ring.ta")]);
    assert_eq!(code(&o), 0);
    let o = tbacert(&[
        "generate",
        "--model",
        &ws.arg("ring.ta"),
        "--algo",
        "scc",
        "--out-cert",
        &ws.arg("ring.cert"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = tbacert(&[
        "check",
        "--model",
        &ws.arg("ring.ta"),
        "--certificate",
        &ws.arg("ring.cert"),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    for index in 0..5 {
        let o = tbacert(&[
            "synth",
            "random",
            "--seed",
            "3",
            "--index",
            &index.to_string(),
            "--out",
            &ws.arg("r.ta"),
        ]);
        assert_eq!(code(&o), 0);
        let oracle = code(&tbacert(&["oracle", "--model", &ws.arg("r.ta")]));
        let generated = code(&tbacert(&[
            "generate",
            "--model",
            &ws.arg("r.ta"),
            "--algo",
            "ndfs",
            "--out-cert",
            &ws.arg("r.cert"),
        ]));
        assert_eq!(oracle, generated);
    }
}
