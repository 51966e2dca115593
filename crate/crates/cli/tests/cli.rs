use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use beliefkit::format::{self, Model};
use beliefkit::*;
use tempfile::TempDir;

const WORKED_EXAMPLE: &str = "\
# one variable, 100 documents
var A : AX, BY, CZ, DT
bpa over A
0.05 : A={AX}
0.15 : A={BY}
0.08 : A={CZ}
0.02 : A={DT}
0.24 : A={AX,BY}
0.11 : A={AX,CZ}
0.20 : A={AX,BY,CZ}
0.09 : A={AX,BY,DT}
0.06 : *
";

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beliefkit")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three-node chain with imprecision on the root only.
fn chain_model() -> String {
    let f = Frame::new([("X", vec!["0", "1"]), ("Y", vec!["0", "1"]), ("Z", vec!["0", "1"])]).unwrap();
    let sub = |v: &[&str]| f.sub_frame(v).unwrap();
    let x = Bpa64::from_exprs(&sub(&["X"]), &[("X={0}", 0.5), ("X={1}", 0.35), ("*", 0.15)]).unwrap();
    let y = Bpa64::from_exprs(
        &sub(&["X", "Y"]),
        &[("X={0} & Y={0} | X={1}", 0.85), ("X={0} & Y={1} | X={1}", 0.15)],
    )
    .unwrap()
    .combine(&Bpa64::from_exprs(&sub(&["X", "Y"]), &[("X={1} & Y={1} | X={0}", 0.85), ("X={1} & Y={0} | X={0}", 0.15)]).unwrap())
    .unwrap();
    let z = Bpa64::from_exprs(
        &sub(&["Y", "Z"]),
        &[("Y={0} & Z={0} | Y={1}", 0.9), ("Y={0} & Z={1} | Y={1}", 0.1)],
    )
    .unwrap()
    .combine(&Bpa64::from_exprs(&sub(&["Y", "Z"]), &[("Y={1} & Z={1} | Y={0}", 0.8), ("Y={1} & Z={0} | Y={0}", 0.2)]).unwrap())
    .unwrap();
    let dag = Dag::from_edges(&["X", "Y", "Z"], &[("X", "Y"), ("Y", "Z")]).unwrap();
    format::write_model(&Model::Network(BeliefNetwork::new(&f, dag, vec![x, y, z]).unwrap()))
}

#[test]
fn generate_is_deterministic_and_matches_the_model() {
    let d = TempDir::new().unwrap();
    let m = write(&d, "m.txt", WORKED_EXAMPLE);
    let (a, b) = (d.path().join("a.txt"), d.path().join("b.txt"));
    for out in [&a, &b] {
        let o = bin(&["generate", s(&m), "-n", "20000", "--seed", "17", "-o", s(out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let (pop, stats) = format::parse_population::<f64>(&String::from_utf8(ta).unwrap()).unwrap();
    assert_eq!(stats.unwrap().seed, 17);
    let truth: Bpa64 = format::parse_bpa(WORKED_EXAMPLE).unwrap();
    let emp = pop.empirical_bpa().unwrap();
    for (set, m) in truth.focal() {
        let sd = (m * (1.0 - m) / 20000.0).sqrt();
        assert!((emp.mass(&set).unwrap() - m).abs() <= 4.0 * sd, "{set}");
    }
}

#[test]
fn zero_cases_writes_an_empty_population_and_warns() {
    let d = TempDir::new().unwrap();
    let m = write(&d, "m.txt", WORKED_EXAMPLE);
    let out = d.path().join("p.txt");
    let o = bin(&["generate", s(&m), "-n", "0", "--seed", "1", "-o", s(&out)]);
    assert_eq!(code(&o), 3);
    assert!(stderr(&o).contains("warning"));
    let (pop, stats) = format::parse_population::<f64>(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(pop.is_empty());
    assert_eq!(stats.unwrap().passes, 0);
}

#[test]
fn stochastic_commands_need_a_seed() {
    let d = TempDir::new().unwrap();
    let m = write(&d, "m.txt", WORKED_EXAMPLE);
    let o = bin(&["generate", s(&m), "-n", "10"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("--seed"));
}

#[test]
fn conditioning_reproduces_the_worked_example() {
    let d = TempDir::new().unwrap();
    let m = write(&d, "m.txt", WORKED_EXAMPLE);
    let ev = write(&d, "ev.txt", "var A : AX, BY, CZ, DT\nevidence over A\n1 : A={AX,BY,CZ}\n");
    let o = bin(&["reason-model", s(&m), "--evidence", s(&ev)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (frame, tables) = format::parse_tables::<f64>(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let row = tables[0].rows.iter().find(|r| r.set == frame.parse_set("A={AX,BY}").unwrap()).unwrap();
    assert!((row.bel - 53.0 / 98.0).abs() < 1e-12);
    assert!((row.mass - 33.0 / 98.0).abs() < 1e-12);
}

#[test]
fn exit_codes_separate_conflict_from_bad_input() {
    let d = TempDir::new().unwrap();
    let m = write(&d, "m.txt", WORKED_EXAMPLE);
    let ev = write(&d, "ev.txt", "evidence over A\n1 : A={AX}\nevidence over A\n1 : A={BY}\n");
    assert_eq!(code(&bin(&["reason-model", s(&m), "--evidence", s(&ev)])), 3);

    let bad = write(&d, "bad.txt", "var A : x, y\nbpa over A\n0.5 : A={z}\n0.5 : *\n");
    let o = bin(&["validate", s(&bad)]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    assert_eq!(code(&bin(&["validate", s(&d.path().join("missing.txt"))])), 4);

    let invalid = write(&d, "inv.txt", "var A : x, y\nbpa over A\n-0.6 : A={x}\n0.4 : *\n");
    assert_eq!(code(&bin(&["validate", s(&invalid)])), 2);
    assert_eq!(code(&bin(&["validate", s(&m)])), 0);
}

#[test]
fn network_pipeline_round_trip() {
    let d = TempDir::new().unwrap();
    let model = write(&d, "model.txt", &chain_model());
    let o = bin(&["validate", s(&model)]);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));

    let pop = d.path().join("pop.txt");
    let o = bin(&["generate", s(&model), "-n", "5000", "--seed", "2", "-o", s(&pop)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));

    let sk = d.path().join("skeleton.txt");
    let o = bin(&["learn", s(&pop), "--alpha", "0.05", "-o", s(&sk)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&sk).unwrap();
    let mut edges = format::parse_skeleton_edges(&text).unwrap();
    edges.sort();
    assert_eq!(edges, vec![("X".into(), "Y".into()), ("Y".into(), "Z".into())]);
    assert!(text.contains("# test"));

    let dag = write(&d, "dag.txt", "dag\nedge X -> Y\nedge Y -> Z\n");
    let fitted = d.path().join("fitted.txt");
    let o = bin(&["fit", s(&pop), s(&dag), "-o", s(&fitted)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(&fitted).unwrap();
    let reparsed: Model<f64> = format::parse_model(&text).unwrap();
    assert_eq!(format::write_model(&reparsed), text);

    let ev = write(&d, "ev.txt", "evidence over Z\n0.7 : Z={1}\n0.3 : *\n");
    let (tm, td) = (d.path().join("tm.txt"), d.path().join("td.txt"));
    let o = bin(&["reason-model", s(&fitted), "--evidence", s(&ev), "--target", "X", "--target", "X,Y", "-o", s(&tm)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin(&["reason-data", s(&pop), "--evidence", s(&ev), "--target", "X", "--target", "X,Y", "-o", s(&td)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let o = bin(&["compare", s(&tm), s(&td), "--bound", "0.02"]);
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), stderr(&o));
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 2);
}

#[test]
fn learn_alpha_limits() {
    let d = TempDir::new().unwrap();
    let model = write(&d, "model.txt", &chain_model());
    let pop = d.path().join("pop.txt");
    assert_eq!(code(&bin(&["generate", s(&model), "-n", "3000", "--seed", "5", "-o", s(&pop)])), 0);
    let o = bin(&["learn", s(&pop), "--alpha", "0"]);
    assert_eq!(code(&o), 0);
    assert!(format::parse_skeleton_edges(&String::from_utf8(o.stdout).unwrap()).unwrap().is_empty());
    assert_eq!(code(&bin(&["learn", s(&pop), "--alpha", "1.5"])), 2);
    let empty = write(&d, "empty.txt", "var X : 0, 1\n");
    assert_ne!(code(&bin(&["learn", s(&empty)])), 0);
}

#[test]
fn process_modes() {
    let d = TempDir::new().unwrap();
    let m = write(&d, "m.txt", WORKED_EXAMPLE);
    let pop = d.path().join("pop.txt");
    assert_eq!(code(&bin(&["generate", s(&m), "-n", "500", "--seed", "9", "-o", s(&pop)])), 0);
    let point = write(&d, "b.txt", "var A : AX, BY, CZ, DT\nbpa over A\n1 : A={AX,BY,CZ}\n");
    let o = bin(&["process", s(&pop), s(&point)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (out, _) = format::parse_population::<f64>(&String::from_utf8(o.stdout).unwrap()).unwrap();
    let dt = out.frame().parse_set("A={DT}").unwrap();
    assert!(out.objects().iter().all(|o| !o.effective().intersects(dt.bits())));

    let random = write(&d, "r.txt", "var A : AX, BY, CZ, DT\nbpa over A\n0.3 : A={AX,BY,DT}\n0.7 : *\n");
    assert_eq!(code(&bin(&["process", s(&pop), s(&random)])), 2);
    let a = bin(&["process", s(&pop), s(&random), "--seed", "4"]);
    let b = bin(&["process", s(&pop), s(&random), "--seed", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let e = bin(&["process", s(&pop), s(&random), "--expected"]);
    assert_eq!(code(&e), 0);
    let (exp, _) = format::parse_population::<f64>(&String::from_utf8(e.stdout).unwrap()).unwrap();
    let (orig, _) = format::parse_population::<f64>(&fs::read_to_string(&pop).unwrap()).unwrap();
    let pr: Bpa64 = format::parse_bpa(&fs::read_to_string(&random).unwrap()).unwrap();
    assert!(exp.empirical_bpa().unwrap().approx_eq(&orig.empirical_bpa().unwrap().combine(&pr).unwrap(), &1e-12));
}
