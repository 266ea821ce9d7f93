use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn teamflat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamflat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("teamflat-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    fs::write(&path, contents).unwrap();
    path
}

#[test]
fn constancy_fails_on_two_rows() {
    let model = scratch("ab.model", "domain: a b\n");
    let team = scratch("two.team", "vars: x\nrow: a\nrow: b\n");
    let o = teamflat(&[
        "eval",
        model.to_str().unwrap(),
        "const(x)",
        "--team",
        team.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("false"));
    assert!(stdout(&o).contains("branches"));
}

#[test]
fn separating_sentence_on_generated_family() {
    let a1 = scratch("a1.model", "");
    let gen = teamflat(&["gen", "A:1", "--out", a1.to_str().unwrap()]);
    assert!(gen.status.success(), "{}", stderr(&gen));
    let sentence = teamflat::experiments::SEPARATING_SENTENCE;
    let o = teamflat(&["eval", a1.to_str().unwrap(), sentence]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("true"));

    let b1 = scratch("b1.model", "");
    teamflat(&["gen", "B:1", "--out", b1.to_str().unwrap()]);
    let o = teamflat(&["eval", b1.to_str().unwrap(), sentence]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn malformed_formula_reports_offset() {
    let model = scratch("one.model", "domain: a\n");
    let o = teamflat(&["eval", model.to_str().unwrap(), "dep(x; y"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("offset"), "{}", stderr(&o));
}

#[test]
fn property_checks() {
    let holds = |args: &[&str]| {
        let o = teamflat(args);
        assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stdout(&o));
    };
    holds(&["check", "flat", "F dep(x; y)"]);
    holds(&["check", "equiv", "F anon(x; y)", "BOT"]);
    holds(&["check", "coherent:2", "dep(x; y)"]);
    holds(&["check", "uc", "inc(x; y)", "--universe-max-domain", "2"]);

    let o = teamflat(&["check", "dc", "inc(x; y)", "--universe-max-domain", "2"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("counterexample"));

    let o = teamflat(&["check", "bogus", "TOP"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn generated_families_have_expected_sizes() {
    let domain_size = |family: &str| {
        let o = teamflat(&["gen", family]);
        assert!(o.status.success());
        let text = stdout(&o);
        let domain = text.lines().find(|l| l.starts_with("domain:")).unwrap();
        domain.split_whitespace().count() - 1
    };
    assert_eq!(domain_size("A:1"), 8);
    assert_eq!(domain_size("cycle:3"), 3);
    assert!(domain_size("B:1") > 0);
    assert_eq!(teamflat(&["gen", "C:1"]).status.code(), Some(2));
}

#[test]
fn flatten_and_simplify() {
    let o = teamflat(&["flatten", "dep(x; y) & exc(x; y)", "--exclusion-flattening", "neq"]);
    assert_eq!(stdout(&o).trim(), "TOP & x != y");
    let o = teamflat(&["simplify-f", "F (anon(x; y) & inc(x; y))"]);
    assert_eq!(stdout(&o).trim(), "BOT & x = y");
}

#[test]
fn automorphisms_of_a_cycle() {
    let c4 = scratch("c4.model", "");
    teamflat(&["gen", "cycle:4", "--out", c4.to_str().unwrap()]);
    let o = teamflat(&["automorphisms", c4.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o).lines().count(), 8);
    assert!(stderr(&o).contains("8 automorphisms"));
}

#[test]
fn experiments_list_and_select() {
    let o = teamflat(&["experiments", "--list"]);
    assert!(o.status.success());
    let ids: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split('\t').next().unwrap().to_string())
        .collect();
    assert!(ids.contains(&"atoms-F".to_string()));
    assert!(ids.contains(&"magma-lemma".to_string()));

    let report = scratch("report.tsv", "");
    let o = teamflat(&["experiments", "--select", "atoms-F", "--report", report.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let body = fs::read_to_string(&report).unwrap();
    assert!(body.starts_with("atoms-F\tPASS\t"), "{body}");

    let o = teamflat(&["experiments", "--select", "no-such-thing"]);
    assert_eq!(o.status.code(), Some(2));
}
