//! Line-oriented text formats.
//!
//! Everything after `#` is a comment; blank lines are ignored. Numbers use
//! a decimal point and no grouping. Sets are cylinder expressions such as
//! `X={a,b} & Y={c} | Z={d}` or `*`.
//!
//! ```text
//! var X : a,b
//! var Y : c,d
//! dag                      # optional: makes the model a belief network
//! edge X -> Y
//! bpa over X
//! 0.3 : X={a}
//! 0.7 : *
//! bpa over X,Y
//! ...
//! ```
//!
//! Evidence files hold `evidence over ...` blocks with the same body.
//! Populations hold one record per line, `<weight> ; <sign> ; attr = <set> ;
//! label = <set>`, after the frame and an optional `provenance` line.
//! Measure tables are `table over ...` blocks of `<set> ; <m> ; <bel> ; <pl>
//! ; <q>` rows.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::bpa::{Bpa, MeasureRow, MeasureTable};
use crate::error::{Error, Result};
use crate::frame::{parse_var_line, ConfigSet, Frame};
use crate::learning::Skeleton;
use crate::netmodel::{BeliefNetwork, Dag, FactoredModel, HypergraphModel};
use crate::population::{LabeledObject, Population, Sign};
use crate::reasoning::EvidenceSpec;
use crate::sampling::SampleStats;
use crate::scalar::Scalar;

/// A model read from a file: a network when it declares a DAG.
#[derive(Debug, Clone)]
pub enum Model<S> {
    Hypergraph(HypergraphModel<S>),
    Network(BeliefNetwork<S>),
}

impl<S: Scalar> FactoredModel<S> for Model<S> {
    fn frame(&self) -> &Arc<Frame> {
        match self {
            Model::Hypergraph(m) => m.frame(),
            Model::Network(n) => n.frame(),
        }
    }
    fn factors(&self) -> &[Bpa<S>] {
        match self {
            Model::Hypergraph(m) => m.factors(),
            Model::Network(n) => n.factors(),
        }
    }
}

struct Line<'a> {
    no: usize,
    text: &'a str,
}

impl Line<'_> {
    fn keyword(&self) -> (&str, &str) {
        let t = self.text;
        match t.find(char::is_whitespace) {
            Some(i) => (&t[..i], t[i..].trim()),
            None => (t, ""),
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.no,
            msg: msg.into(),
        }
    }

    fn wrap(&self, e: Error) -> Error {
        match e {
            Error::Parse { line: 0, msg } => self.err(msg),
            Error::Parse { .. } => e,
            e => self.err(e.to_string()),
        }
    }
}

fn lines(text: &str) -> Vec<Line<'_>> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let t = l.split('#').next().unwrap_or("").trim();
            (!t.is_empty()).then_some(Line { no: i + 1, text: t })
        })
        .collect()
}

const HEADERS: &[&str] = &["var", "dag", "edge", "bpa", "evidence", "table", "provenance", "stats"];

fn is_header(l: &Line) -> bool {
    HEADERS.contains(&l.keyword().0)
}

/// Reads the `var` lines at the top of a file.
fn read_frame(ls: &[Line], pos: &mut usize) -> Result<Arc<Frame>> {
    let mut vars = Vec::new();
    let mut first = None;
    while let Some(l) = ls.get(*pos) {
        let (k, rest) = l.keyword();
        if k != "var" {
            break;
        }
        first.get_or_insert(l.no);
        vars.push(parse_var_line(rest).map_err(|e| l.wrap(e))?);
        *pos += 1;
    }
    if vars.is_empty() {
        let no = ls.get(*pos).map_or(1, |l| l.no);
        return Err(Error::Parse {
            line: no,
            msg: "expected `var <name> : <labels>`".into(),
        });
    }
    Frame::new(vars).map_err(|e| Error::Parse {
        line: first.unwrap_or(1),
        msg: e.to_string(),
    })
}

fn mass_sum_ok<S: Scalar>(masses: &[S]) -> bool {
    let total = masses.iter().fold(S::zero(), |a, m| a + m.abs());
    let tol = S::default_tolerance() * S::from_usize(masses.len() + 1).unwrap_or_else(S::one);
    (total - S::one()).abs() <= tol
}

/// Reads `<kw> over <vars>` followed by `<mass> : <set>` lines.
fn read_bpa_block<S: Scalar>(ls: &[Line], pos: &mut usize, frame: &Arc<Frame>, kw: &str) -> Result<Bpa<S>> {
    let head = &ls[*pos];
    let (k, rest) = head.keyword();
    let names = rest
        .strip_prefix("over")
        .filter(|_| k == kw)
        .ok_or_else(|| head.err(format!("expected `{kw} over <variables>`")))?;
    let names: Vec<&str> = names.split(',').map(str::trim).collect();
    let sub = frame.sub_frame(&names).map_err(|e| head.wrap(e))?;
    *pos += 1;
    let mut entries = Vec::new();
    let mut masses = Vec::new();
    while let Some(l) = ls.get(*pos) {
        if is_header(l) {
            break;
        }
        let (m, set) = l
            .text
            .split_once(':')
            .ok_or_else(|| l.err("expected `<mass> : <set>`"))?;
        let m = S::parse_text(m).ok_or_else(|| l.err(format!("bad mass `{}`", m.trim())))?;
        let set = sub.parse_set(set).map_err(|e| l.wrap(e))?;
        masses.push(m.clone());
        entries.push((set, m));
        *pos += 1;
    }
    if entries.is_empty() {
        return Err(head.err("block has no focal elements"));
    }
    if !mass_sum_ok(&masses) {
        let total: f64 = masses.iter().map(|m| m.abs().to_f64_lossy()).sum();
        return Err(head.err(format!("absolute masses sum to {total}, expected 1")));
    }
    Bpa::from_masses(&sub, entries).map_err(|e| head.wrap(e))
}

fn write_block<S: Scalar>(out: &mut String, kw: &str, m: &Bpa<S>) {
    let _ = writeln!(out, "{kw} over {}", m.frame().names().join(","));
    for (set, v) in m.focal() {
        let _ = writeln!(out, "{v} : {set}");
    }
}

pub fn write_bpa<S: Scalar>(m: &Bpa<S>) -> String {
    let mut out = m.frame().to_string();
    write_block(&mut out, "bpa", m);
    out
}

/// A frame followed by exactly one `bpa` block.
pub fn parse_bpa<S: Scalar>(text: &str) -> Result<Bpa<S>> {
    let ls = lines(text);
    let mut pos = 0;
    let frame = read_frame(&ls, &mut pos)?;
    if pos >= ls.len() {
        return Err(Error::parse(ls.last().map_or(1, |l| l.no), "missing `bpa over` block"));
    }
    let m = read_bpa_block(&ls, &mut pos, &frame, "bpa")?;
    if let Some(l) = ls.get(pos) {
        return Err(l.err("unexpected content after bpa block"));
    }
    m.vacuous_extend(&frame)
}

fn write_dag(out: &mut String, dag: &Dag) {
    out.push_str(&dag.to_string());
}

pub fn write_model<S: Scalar>(model: &Model<S>) -> String {
    let mut out = model.frame().to_string();
    if let Model::Network(n) = model {
        write_dag(&mut out, n.dag());
    }
    for f in model.factors() {
        write_block(&mut out, "bpa", f);
    }
    out
}

fn parse_edge(l: &Line, rest: &str, dag: &mut Dag) -> Result<()> {
    let (a, b) = rest
        .split_once("->")
        .ok_or_else(|| l.err("expected `edge <parent> -> <child>`"))?;
    dag.add_edge(a.trim(), b.trim()).map_err(|e| l.wrap(e))
}

/// Model file. Factors of a network are matched to nodes by scope when that
/// is unambiguous; otherwise they keep file order and validation reports the
/// mismatch.
pub fn parse_model<S: Scalar>(text: &str) -> Result<Model<S>> {
    let ls = lines(text);
    let mut pos = 0;
    let frame = read_frame(&ls, &mut pos)?;
    let mut dag: Option<Dag> = None;
    let mut factors = Vec::new();
    while let Some(l) = ls.get(pos) {
        match l.keyword() {
            ("dag", "") => {
                dag.get_or_insert_with(|| Dag::edgeless(&frame.names()));
                pos += 1;
            }
            ("edge", rest) => {
                let d = dag.get_or_insert_with(|| Dag::edgeless(&frame.names()));
                parse_edge(l, rest, d)?;
                pos += 1;
            }
            ("bpa", _) => factors.push(read_bpa_block(&ls, &mut pos, &frame, "bpa")?),
            _ => return Err(l.err(format!("unexpected `{}`", l.text))),
        }
    }
    let at_end = ls.last().map_or(1, |l| l.no);
    match dag {
        None => HypergraphModel::new(&frame, factors)
            .map(Model::Hypergraph)
            .map_err(|e| Error::parse(at_end, e.to_string())),
        Some(dag) => {
            let factors = match_factors(&dag, factors);
            BeliefNetwork::from_parts(&frame, dag, factors)
                .map(Model::Network)
                .map_err(|e| Error::parse(at_end, e.to_string()))
        }
    }
}

fn match_factors<S: Scalar>(dag: &Dag, factors: Vec<Bpa<S>>) -> Vec<Bpa<S>> {
    let key = |names: Vec<&str>| {
        let mut v: Vec<String> = names.into_iter().map(String::from).collect();
        v.sort();
        v
    };
    let keys: Vec<Vec<String>> = factors.iter().map(|f| key(f.frame().names())).collect();
    let mut order = Vec::with_capacity(dag.len());
    for i in 0..dag.len() {
        let want = key(dag.scope(i));
        let hits: Vec<usize> = (0..keys.len()).filter(|&j| keys[j] == want).collect();
        if hits.len() != 1 || factors.len() != dag.len() {
            return factors;
        }
        order.push(hits[0]);
    }
    let mut slots: Vec<Option<Bpa<S>>> = factors.into_iter().map(Some).collect();
    order.into_iter().map(|j| slots[j].take().expect("distinct scopes")).collect()
}

/// `edge X -> Y` lines (an optional `dag` line is accepted) over the given
/// variables.
pub fn parse_dag<N: AsRef<str>>(text: &str, names: &[N]) -> Result<Dag> {
    let mut dag = Dag::edgeless(names);
    for l in lines(text) {
        match l.keyword() {
            ("dag", "") => {}
            ("edge", rest) => parse_edge(&l, rest, &mut dag)?,
            _ => return Err(l.err(format!("unexpected `{}`", l.text))),
        }
    }
    dag.topological_order()?;
    Ok(dag)
}

pub fn write_evidence<S: Scalar>(ev: &EvidenceSpec<S>) -> String {
    let mut out = String::new();
    for c in ev.constraints() {
        write_block(&mut out, "evidence", c);
    }
    out
}

/// `evidence over ...` blocks, interpreted on `frame`. A leading frame
/// declaration is allowed if it agrees with `frame`.
pub fn parse_evidence<S: Scalar>(text: &str, frame: &Arc<Frame>) -> Result<EvidenceSpec<S>> {
    let ls = lines(text);
    let mut pos = 0;
    if ls.first().is_some_and(|l| l.keyword().0 == "var") {
        let declared = read_frame(&ls, &mut pos)?;
        if !declared.is_sub_frame_of(frame) {
            return Err(Error::parse(ls[0].no, "declared variables do not match the model"));
        }
    }
    let mut ev = EvidenceSpec::new();
    while pos < ls.len() {
        let head = ls[pos].no;
        let c = read_bpa_block(&ls, &mut pos, frame, "evidence")?;
        ev.push(c).map_err(|e| Error::parse(head, format!("evidence: {e}")))?;
    }
    Ok(ev)
}

fn write_stats(out: &mut String, s: &SampleStats) {
    let _ = writeln!(
        out,
        "stats passes={} emitted={} failures={} aborted={} cancelled={} seed={}",
        s.passes, s.emitted, s.failures, s.aborted, s.cancelled, s.seed
    );
}

fn parse_stats(l: &Line, rest: &str) -> Result<SampleStats> {
    let mut s = SampleStats::default();
    for kv in rest.split_whitespace() {
        let (k, v) = kv.split_once('=').ok_or_else(|| l.err(format!("bad stats field `{kv}`")))?;
        let bad = || l.err(format!("bad stats value `{kv}`"));
        match k {
            "passes" => s.passes = v.parse().map_err(|_| bad())?,
            "emitted" => s.emitted = v.parse().map_err(|_| bad())?,
            "failures" => s.failures = v.parse().map_err(|_| bad())?,
            "aborted" => s.aborted = v.parse().map_err(|_| bad())?,
            "cancelled" => s.cancelled = v.parse().map_err(|_| bad())?,
            "seed" => s.seed = v.parse().map_err(|_| bad())?,
            _ => return Err(l.err(format!("unknown stats field `{k}`"))),
        }
    }
    Ok(s)
}

/// Population file, optionally carrying the sampling summary.
pub fn write_population<S: Scalar>(pop: &Population<S>, stats: Option<&SampleStats>) -> String {
    let mut out = pop.frame().to_string();
    if !pop.provenance().is_empty() {
        let _ = writeln!(out, "provenance {}", pop.provenance().replace(['\n', '#'], " "));
    }
    if let Some(s) = stats {
        write_stats(&mut out, s);
    }
    let frame = pop.frame();
    for o in pop.objects() {
        let attr = ConfigSet::from_bits_unchecked(frame.clone(), o.attribute.clone());
        let label = ConfigSet::from_bits_unchecked(frame.clone(), o.label.clone());
        let _ = writeln!(out, "{} ; {} ; attr = {} ; label = {}", o.weight, o.sign, attr, label);
    }
    out
}

pub fn parse_population<S: Scalar>(text: &str) -> Result<(Population<S>, Option<SampleStats>)> {
    let ls = lines(text);
    let mut pos = 0;
    let frame = read_frame(&ls, &mut pos)?;
    let mut pop = Population::new(&frame);
    let mut stats = None;
    for l in &ls[pos..] {
        match l.keyword() {
            ("provenance", rest) => {
                pop = pop.with_provenance(rest);
                continue;
            }
            ("stats", rest) => {
                stats = Some(parse_stats(l, rest)?);
                continue;
            }
            _ => {}
        }
        let fields: Vec<&str> = l.text.split(';').map(str::trim).collect();
        let [w, sign, attr, label] = fields[..] else {
            return Err(l.err("expected `<weight> ; <sign> ; attr = <set> ; label = <set>`"));
        };
        let weight = S::parse_text(w).ok_or_else(|| l.err(format!("bad weight `{w}`")))?;
        let sign = match sign {
            "+" => Sign::Plus,
            "-" => Sign::Minus,
            _ => return Err(l.err(format!("bad sign `{sign}`"))),
        };
        let field = |f: &str, name: &str| -> Result<ConfigSet> {
            let rest = f
                .strip_prefix(name)
                .and_then(|r| r.trim_start().strip_prefix('='))
                .ok_or_else(|| l.err(format!("expected `{name} = <set>`")))?;
            frame.parse_set(rest).map_err(|e| l.wrap(e))
        };
        let attribute = field(attr, "attr")?.into_bits();
        let label = field(label, "label")?.into_bits();
        pop.push(LabeledObject {
            attribute,
            label,
            weight,
            sign,
        })
        .map_err(|e| l.wrap(e))?;
    }
    Ok((pop, stats))
}

/// Measure tables preceded by the frame they refer to.
pub fn write_tables<S: Scalar>(frame: &Frame, tables: &[MeasureTable<S>]) -> String {
    let mut out = frame.to_string();
    for t in tables {
        let _ = writeln!(out, "table over {}", t.frame.names().join(","));
        let _ = writeln!(out, "# set ; m ; bel ; pl ; q");
        for r in &t.rows {
            let q = r.q.as_ref().map_or("-".to_string(), |q| q.to_string());
            let _ = writeln!(out, "{} ; {} ; {} ; {} ; {}", r.set, r.mass, r.bel, r.pl, q);
        }
    }
    out
}

pub fn parse_tables<S: Scalar>(text: &str) -> Result<(Arc<Frame>, Vec<MeasureTable<S>>)> {
    let ls = lines(text);
    let mut pos = 0;
    let frame = read_frame(&ls, &mut pos)?;
    let mut tables = Vec::new();
    while let Some(head) = ls.get(pos) {
        let names = match head.keyword() {
            ("table", rest) => rest.strip_prefix("over").ok_or_else(|| head.err("expected `table over <variables>`"))?,
            _ => return Err(head.err(format!("unexpected `{}`", head.text))),
        };
        let names: Vec<&str> = names.split(',').map(str::trim).collect();
        let sub = frame.sub_frame(&names).map_err(|e| head.wrap(e))?;
        pos += 1;
        let mut rows = Vec::new();
        while let Some(l) = ls.get(pos) {
            if is_header(l) {
                break;
            }
            let f: Vec<&str> = l.text.split(';').map(str::trim).collect();
            let [set, m, bel, pl, q] = f[..] else {
                return Err(l.err("expected `<set> ; <m> ; <bel> ; <pl> ; <q>`"));
            };
            let num = |t: &str| S::parse_text(t).ok_or_else(|| l.err(format!("bad number `{t}`")));
            rows.push(MeasureRow {
                set: sub.parse_set(set).map_err(|e| l.wrap(e))?,
                mass: num(m)?,
                bel: num(bel)?,
                pl: num(pl)?,
                q: if q == "-" { None } else { Some(num(q)?) },
            });
            pos += 1;
        }
        tables.push(MeasureTable { frame: sub, rows });
    }
    Ok((frame, tables))
}

/// Rebuilds the bpa whose focal elements are the rows with nonzero mass.
pub fn table_to_bpa<S: Scalar>(t: &MeasureTable<S>) -> Result<Bpa<S>> {
    Bpa::from_masses(
        &t.frame,
        t.rows.iter().filter(|r| !r.mass.is_zero()).map(|r| (r.set.clone(), r.mass.clone())),
    )
}

/// Skeleton edges followed by the test log as comments.
pub fn write_skeleton(sk: &Skeleton) -> String {
    let mut out = sk.to_string();
    for rec in &sk.log {
        let z: Vec<&str> = rec.z.iter().map(|&i| sk.names[i].as_str()).collect();
        let _ = write!(out, "# test {} {} | {} : ", sk.names[rec.x], sk.names[rec.y], z.join(","));
        let _ = match &rec.outcome {
            Ok(r) => writeln!(
                out,
                "chi2={} df={} p={} {}",
                r.statistic,
                r.df,
                r.p_value.map_or("-".into(), |p| p.to_string()),
                if r.independent { "independent" } else { "dependent" }
            ),
            Err(e) => writeln!(out, "error: {e}"),
        };
    }
    out
}

/// Undirected `edge X -- Y` lines.
pub fn parse_skeleton_edges(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for l in lines(text) {
        let rest = match l.keyword() {
            ("edge", rest) => rest,
            _ => return Err(l.err(format!("unexpected `{}`", l.text))),
        };
        let (a, b) = rest.split_once("--").ok_or_else(|| l.err("expected `edge X -- Y`"))?;
        out.push((a.trim().to_string(), b.trim().to_string()));
    }
    Ok(out)
}
