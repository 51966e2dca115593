mod common;

use std::collections::BTreeSet;

use beliefkit::*;
use common::*;

const N: f64 = 10_000.0;

fn frame(k: usize) -> std::sync::Arc<Frame> {
    Frame::new(["X", "Y", "Z", "W"][..k].iter().map(|n| (*n, vec!["0", "1"]))).unwrap()
}

fn root(f: &std::sync::Arc<Frame>, v: &str, p0: f64) -> Bpa64 {
    let sub = f.sub_frame(&[v]).unwrap();
    Bpa64::from_exprs(&sub, &[(&format!("{v}={{0}}"), p0), (&format!("{v}={{1}}"), 0.9 - p0), ("*", 0.1)]).unwrap()
}

const STRONG: [[f64; 3]; 2] = [[0.8, 0.1, 0.1], [0.1, 0.8, 0.1]];

/// Noiseless population from a network: the empirical bpa is the joint.
fn noiseless(f: &std::sync::Arc<Frame>, edges: &[(&str, &str)], factors: Vec<Bpa64>) -> Population64 {
    noiseless_scaled(f, edges, factors, N)
}

fn noiseless_scaled(f: &std::sync::Arc<Frame>, edges: &[(&str, &str)], factors: Vec<Bpa64>, n: f64) -> Population64 {
    let names = f.names();
    let net = BeliefNetwork::new(f, Dag::from_edges(&names, edges).unwrap(), factors).unwrap();
    population_of(&net.joint().unwrap(), n)
}

fn edges(sk: &Skeleton) -> BTreeSet<(String, String)> {
    sk.edges.iter().map(|&(a, b)| (sk.names[a].clone(), sk.names[b].clone())).collect()
}

fn pairs(list: &[(&str, &str)]) -> BTreeSet<(String, String)> {
    list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

#[test]
fn chain_skeleton() {
    let f = frame(3);
    let pop = noiseless(
        &f,
        &[("X", "Y"), ("Y", "Z")],
        vec![root(&f, "X", 0.5), conditional_embedding(&f, "Y", &["X"], &STRONG), conditional_embedding(&f, "Z", &["Y"], &STRONG)],
    );
    let sk = learn_skeleton(&pop, &CiOptions::default(), 2).unwrap();
    assert_eq!(edges(&sk), pairs(&[("X", "Y"), ("Y", "Z")]));
    assert_eq!(sk.sepsets.get(&(0, 2)), Some(&vec![1]));
}

#[test]
fn fork_skeleton() {
    let f = frame(3);
    let pop = noiseless(
        &f,
        &[("Y", "X"), ("Y", "Z")],
        vec![conditional_embedding(&f, "X", &["Y"], &STRONG), root(&f, "Y", 0.4), conditional_embedding(&f, "Z", &["Y"], &STRONG)],
    );
    let sk = learn_skeleton(&pop, &CiOptions::default(), 2).unwrap();
    assert_eq!(edges(&sk), pairs(&[("X", "Y"), ("Y", "Z")]));
}

#[test]
fn collider_skeleton() {
    let f = frame(3);
    let table = [[0.8, 0.1, 0.1], [0.5, 0.4, 0.1], [0.4, 0.5, 0.1], [0.1, 0.8, 0.1]];
    let pop = noiseless(
        &f,
        &[("X", "Z"), ("Y", "Z")],
        vec![root(&f, "X", 0.5), root(&f, "Y", 0.3), conditional_embedding(&f, "Z", &["X", "Y"], &table)],
    );
    let sk = learn_skeleton(&pop, &CiOptions::default(), 2).unwrap();
    assert_eq!(edges(&sk), pairs(&[("X", "Z"), ("Y", "Z")]));
    assert_eq!(sk.sepsets.get(&(0, 1)), Some(&vec![]));
}

#[test]
fn four_variable_diamond() {
    let f = frame(4);
    let table = [[0.8, 0.1, 0.1], [0.5, 0.4, 0.1], [0.4, 0.5, 0.1], [0.1, 0.8, 0.1]];
    // the test given {Y, Z} has ~2900 cells, above what 10^4 cases support
    let pop = noiseless_scaled(
        &f,
        &[("X", "Y"), ("X", "Z"), ("Y", "W"), ("Z", "W")],
        vec![
            root(&f, "X", 0.5),
            conditional_embedding(&f, "Y", &["X"], &STRONG),
            conditional_embedding(&f, "Z", &["X"], &STRONG),
            conditional_embedding(&f, "W", &["Y", "Z"], &table),
        ],
        1e5,
    );
    let sk = learn_skeleton(&pop, &CiOptions::default(), 2).unwrap();
    assert_eq!(edges(&sk), pairs(&[("X", "Y"), ("X", "Z"), ("Y", "W"), ("Z", "W")]));
}

#[test]
fn edgeless_model_gives_empty_skeleton() {
    let f = frame(3);
    let pop = noiseless(&f, &[], vec![root(&f, "X", 0.5), root(&f, "Y", 0.2), root(&f, "Z", 0.7)]);
    let sk = learn_skeleton(&pop, &CiOptions::default(), 1).unwrap();
    assert!(sk.edges.is_empty());
}

#[test]
fn alpha_extremes() {
    let f = frame(3);
    let pop = noiseless(
        &f,
        &[("X", "Y"), ("Y", "Z")],
        vec![root(&f, "X", 0.5), conditional_embedding(&f, "Y", &["X"], &STRONG), conditional_embedding(&f, "Z", &["Y"], &STRONG)],
    );
    let lenient = CiOptions { alpha: 0.0, ..CiOptions::default() };
    assert!(learn_skeleton(&pop, &lenient, 2).unwrap().edges.is_empty());
    let strict = CiOptions { alpha: 1.0, ..CiOptions::default() };
    let sk = learn_skeleton(&pop, &strict, 2).unwrap();
    // independent X, Z given Y has statistic 0, which still passes a zero threshold
    assert!(sk.has_edge("X", "Y") && sk.has_edge("Y", "Z"));
}

#[test]
fn ci_test_statistics() {
    let f = frame(3);
    let pop = noiseless(
        &f,
        &[("X", "Y"), ("Y", "Z")],
        vec![root(&f, "X", 0.5), conditional_embedding(&f, "Y", &["X"], &STRONG), conditional_embedding(&f, "Z", &["Y"], &STRONG)],
    );
    let opts = CiOptions::default();
    let dep = ci_test(&pop, "X", "Y", &[], &opts).unwrap();
    assert!(!dep.independent && dep.statistic > dep.critical);
    assert!(dep.p_value.unwrap() < 1e-6);
    let ind = ci_test(&pop, "X", "Z", &["Y"], &opts).unwrap();
    assert!(ind.independent && ind.statistic < 1e-6);
    assert!((ind.n - N).abs() < 1e-6);
    assert!(matches!(ci_test(&pop, "X", "X", &[], &opts), Err(Error::BadVariableList)));
}

#[test]
fn too_little_data_is_reported() {
    let f = frame(2);
    let mut pop: Population64 = Population::new(&f);
    pop.push_attribute(&f.parse_set("X={0} & Y={0}").unwrap(), 1.0).unwrap();
    pop.push_attribute(&f.parse_set("X={1}").unwrap(), 1.0).unwrap();
    assert!(matches!(
        ci_test(&pop, "X", "Y", &[], &CiOptions::default()),
        Err(Error::InsufficientData { .. })
    ));
    let sk = learn_skeleton(&pop, &CiOptions::default(), 0).unwrap();
    assert!(sk.has_edge("X", "Y"));
    assert!(sk.flagged.contains(&(0, 1)));
}

#[test]
fn fitted_factors_reproduce_noiseless_joint() {
    let f = frame(3);
    let edges = [("X", "Y"), ("Y", "Z")];
    let pop = noiseless(
        &f,
        &edges,
        vec![root(&f, "X", 0.5), conditional_embedding(&f, "Y", &["X"], &STRONG), conditional_embedding(&f, "Z", &["Y"], &STRONG)],
    );
    let net = fit_factors(&pop, &Dag::from_edges(&["X", "Y", "Z"], &edges).unwrap()).unwrap();
    assert!(net.joint().unwrap().approx_eq(&pop.empirical_bpa().unwrap(), &1e-9));
}
