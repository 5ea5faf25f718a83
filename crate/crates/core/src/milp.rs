//! Mixed-integer model of the ratio decision problem in CPLEX LP format,
//! plus a small reader for the same dialect.
//!
//! Per scenario `k` with constant `Z_k`, the model keeps an accessibility
//! `a_s{k}_v` for every node and an increment `l_s{k}_v_i` for every action
//! on the edge into `v`:
//!
//! ```text
//! max M
//!   Z_k·M − Σ_v r_v·a_s{k}_v ≤ 0
//!   a_s{k}_root = 1
//!   a_s{k}_v − p_{v|0}·a_s{k}_u − Σ_i l_s{k}_v_i = 0        (u parent of v)
//!   l_s{k}_v_i − x_v_i ≤ 0
//!   l_s{k}_v_i − (p_{v|i} − p_{v|0})·a_s{k}_u ≤ 0
//!   Σ_i x_v_i = 1,   Σ c·x ≤ B,   x binary,   a, l ∈ [0, 1],   M ≥ 0
//! ```
//!
//! Increments are nonnegative, so the model assumes repairs never lower a
//! passage probability (`p_{v|i} ≥ p_{v|0}` in each scenario). Nodes and
//! edges are named by their instance labels.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::error::CoreError;
use crate::master::ScenarioSet;
use crate::model::NetworkInstance;

fn x_name(inst: &NetworkInstance, v: usize, i: usize) -> String {
    format!("x_{}_{}", inst.label(v), i)
}

fn a_name(inst: &NetworkInstance, k: usize, v: usize) -> String {
    format!("a_s{}_{}", k, inst.label(v))
}

fn l_name(inst: &NetworkInstance, k: usize, v: usize, i: usize) -> String {
    format!("l_s{}_{}_{}", k, inst.label(v), i)
}

fn push_term(line: &mut String, coef: f64, var: &str, first: &mut bool) {
    if coef == 0.0 {
        return;
    }
    let sign = if coef < 0.0 { '-' } else { '+' };
    if *first && sign == '+' {
        let _ = write!(line, " {} {}", coef, var);
    } else {
        let _ = write!(line, " {} {} {}", sign, coef.abs(), var);
    }
    *first = false;
}

fn row(name: &str, terms: &[(f64, String)], op: &str, rhs: f64) -> String {
    let mut line = format!(" {}:", name);
    let mut first = true;
    for (c, v) in terms {
        push_term(&mut line, *c, v, &mut first);
    }
    if first {
        line.push_str(" 0");
    }
    let _ = write!(line, " {} {}", op, rhs);
    line
}

/// The model as LP text.
pub fn export_milp(instance: &NetworkInstance, scenarios: &ScenarioSet) -> Result<String, CoreError> {
    if scenarios.is_empty() {
        return Err(CoreError::EmptyScenarioSet);
    }
    for (index, s) in scenarios.iter().enumerate() {
        if !(s.value > 0.0) {
            return Err(CoreError::NonPositiveScenario { index, value: s.value });
        }
        s.params.check(instance)?;
    }
    let root = instance.root();
    let order = instance.preorder();
    let edges: Vec<usize> = instance.edges().collect();

    let mut out = String::new();
    out.push_str("Maximize\n obj: M\nSubject To\n");
    for (k, s) in scenarios.iter().enumerate() {
        let mut terms = alloc::vec![(s.value, "M".to_string())];
        for &v in order {
            terms.push((-instance.reward(v), a_name(instance, k, v)));
        }
        out += &row(&format!("ratio_s{}", k), &terms, "<=", 0.0);
        out.push('\n');
        out += &row(&format!("root_s{}", k), &[(1.0, a_name(instance, k, root))], "=", 1.0);
        out.push('\n');
        for &v in &edges {
            let u = instance.parent(v).unwrap();
            let p0 = s.params.prob(v, 0);
            let label = instance.label(v);
            let mut terms = alloc::vec![(1.0, a_name(instance, k, v)), (-p0, a_name(instance, k, u))];
            for i in 0..instance.actions(v).len() {
                terms.push((-1.0, l_name(instance, k, v, i)));
            }
            out += &row(&format!("acc_s{}_{}", k, label), &terms, "=", 0.0);
            out.push('\n');
            for i in 0..instance.actions(v).len() {
                let l = l_name(instance, k, v, i);
                out += &row(
                    &format!("act_s{}_{}_{}", k, label, i),
                    &[(1.0, l.clone()), (-1.0, x_name(instance, v, i))],
                    "<=",
                    0.0,
                );
                out.push('\n');
                let gain = s.params.prob(v, i) - p0;
                out += &row(
                    &format!("cap_s{}_{}_{}", k, label, i),
                    &[(1.0, l), (-gain, a_name(instance, k, u))],
                    "<=",
                    0.0,
                );
                out.push('\n');
            }
        }
    }
    for &v in &edges {
        let terms: Vec<(f64, String)> =
            (0..instance.actions(v).len()).map(|i| (1.0, x_name(instance, v, i))).collect();
        out += &row(&format!("one_{}", instance.label(v)), &terms, "=", 1.0);
        out.push('\n');
    }
    let budget_terms: Vec<(f64, String)> = edges
        .iter()
        .flat_map(|&v| instance.actions(v).iter().enumerate().map(move |(i, a)| (a.cost, v, i)))
        .map(|(c, v, i)| (c, x_name(instance, v, i)))
        .collect();
    out += &row("budget", &budget_terms, "<=", instance.budget());
    out.push('\n');

    out.push_str("Bounds\n 0 <= M\n");
    for k in 0..scenarios.len() {
        for &v in order {
            let _ = writeln!(out, " 0 <= {} <= 1", a_name(instance, k, v));
        }
        for &v in &edges {
            for i in 0..instance.actions(v).len() {
                let _ = writeln!(out, " 0 <= {} <= 1", l_name(instance, k, v, i));
            }
        }
    }
    out.push_str("Binary\n");
    for &v in &edges {
        for i in 0..instance.actions(v).len() {
            let _ = writeln!(out, " {}", x_name(instance, v, i));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOp {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub name: String,
    pub terms: Vec<(f64, String)>,
    pub op: RowOp,
    pub rhs: f64,
}

/// A parsed LP file. Variables without explicit bounds default to `[0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpModel {
    pub sense: Sense,
    pub objective: Vec<(f64, String)>,
    pub rows: Vec<LpRow>,
    pub bounds: BTreeMap<String, (f64, f64)>,
    pub binaries: Vec<String>,
    /// Every variable, in order of first appearance.
    pub variables: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LpParseError {
    pub line: usize,
    pub message: String,
}

impl core::fmt::Display for LpParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binary,
    End,
}

fn parse_terms(text: &str, line: usize) -> Result<Vec<(f64, String)>, LpParseError> {
    let err = |m: &str| LpParseError { line, message: m.to_string() };
    let mut out = Vec::new();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for tok in text.split_whitespace() {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => {
                if let Ok(c) = tok.parse::<f64>() {
                    if coef.is_some() {
                        return Err(err("two coefficients in a row"));
                    }
                    coef = Some(c);
                } else {
                    out.push((sign * coef.unwrap_or(1.0), tok.to_string()));
                    sign = 1.0;
                    coef = None;
                }
            }
        }
    }
    if coef.is_some_and(|c| c != 0.0) {
        return Err(err("constant term in expression"));
    }
    Ok(out)
}

fn split_op(text: &str) -> Option<(&str, RowOp, &str)> {
    for (pat, op) in [("<=", RowOp::Le), (">=", RowOp::Ge), ("=<", RowOp::Le), ("=>", RowOp::Ge), ("=", RowOp::Eq)] {
        if let Some(i) = text.find(pat) {
            return Some((&text[..i], op, &text[i + pat.len()..]));
        }
    }
    None
}

fn parse_number(s: &str, line: usize) -> Result<f64, LpParseError> {
    let s = s.trim();
    match s {
        "inf" | "+inf" | "infinity" | "+infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| LpParseError { line, message: format!("bad number {:?}", s) }),
    }
}

/// Reads the subset of the LP format written by [`export_milp`]: one
/// statement per line, named rows, two-sided or one-sided bounds.
pub fn parse_lp(text: &str) -> Result<LpModel, LpParseError> {
    let mut model = LpModel {
        sense: Sense::Maximize,
        objective: Vec::new(),
        rows: Vec::new(),
        bounds: BTreeMap::new(),
        binaries: Vec::new(),
        variables: Vec::new(),
    };
    let mut seen = BTreeMap::new();
    let mut note = |model: &mut LpModel, v: &str| {
        if !seen.contains_key(v) {
            seen.insert(v.to_string(), ());
            model.variables.push(v.to_string());
        }
    };
    let mut section = Section::None;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('\\').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        match body.to_ascii_lowercase().as_str() {
            "maximize" | "maximise" | "max" => {
                model.sense = Sense::Maximize;
                section = Section::Objective;
                continue;
            }
            "minimize" | "minimise" | "min" => {
                model.sense = Sense::Minimize;
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." | "such that" => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "binary" | "binaries" | "bin" => {
                section = Section::Binary;
                continue;
            }
            "end" => {
                section = Section::End;
                continue;
            }
            _ => {}
        }
        let err = |m: &str| LpParseError { line, message: m.to_string() };
        match section {
            Section::None | Section::End => return Err(err("statement outside a section")),
            Section::Objective => {
                let expr = body.split_once(':').map_or(body, |(_, e)| e);
                for (c, v) in parse_terms(expr, line)? {
                    note(&mut model, &v);
                    model.objective.push((c, v));
                }
            }
            Section::Constraints => {
                let (name, rest) = body.split_once(':').ok_or_else(|| err("unnamed row"))?;
                let (lhs, op, rhs) = split_op(rest).ok_or_else(|| err("row without comparison"))?;
                let terms = parse_terms(lhs, line)?;
                for (_, v) in &terms {
                    note(&mut model, v);
                }
                model.rows.push(LpRow { name: name.trim().to_string(), terms, op, rhs: parse_number(rhs, line)? });
            }
            Section::Bounds => {
                let parts: Vec<&str> = body.split("<=").map(str::trim).collect();
                let (var, lo, hi) = match parts.as_slice() {
                    [lo, var, hi] => (*var, parse_number(lo, line)?, parse_number(hi, line)?),
                    [a, b] => match parse_number(a, line) {
                        Ok(lo) => (*b, lo, f64::INFINITY),
                        Err(_) => (*a, 0.0, parse_number(b, line)?),
                    },
                    _ => {
                        if let Some(var) = body.strip_suffix("free").map(str::trim) {
                            (var, f64::NEG_INFINITY, f64::INFINITY)
                        } else {
                            return Err(err("unsupported bound"));
                        }
                    }
                };
                note(&mut model, var);
                model.bounds.insert(var.to_string(), (lo, hi));
            }
            Section::Binary => {
                for v in body.split_whitespace() {
                    note(&mut model, v);
                    model.binaries.push(v.to_string());
                }
            }
        }
    }
    if section != Section::End {
        return Err(LpParseError { line: text.lines().count(), message: "missing End".to_string() });
    }
    Ok(model)
}

impl LpModel {
    pub fn bound(&self, var: &str) -> (f64, f64) {
        if self.binaries.iter().any(|b| b == var) {
            return (0.0, 1.0);
        }
        self.bounds.get(var).copied().unwrap_or((0.0, f64::INFINITY))
    }

    /// Objective at a point; missing variables count as zero.
    pub fn objective_at(&self, values: &BTreeMap<String, f64>) -> f64 {
        self.objective.iter().map(|(c, v)| c * values.get(v).copied().unwrap_or(0.0)).sum()
    }

    /// Name of the first row, bound or integrality violated by more than
    /// `tol`, if any.
    pub fn violation(&self, values: &BTreeMap<String, f64>, tol: f64) -> Option<String> {
        let get = |v: &str| values.get(v).copied().unwrap_or(0.0);
        for r in &self.rows {
            let lhs: f64 = r.terms.iter().map(|(c, v)| c * get(v)).sum();
            let ok = match r.op {
                RowOp::Le => lhs <= r.rhs + tol,
                RowOp::Ge => lhs >= r.rhs - tol,
                RowOp::Eq => (lhs - r.rhs).abs() <= tol,
            };
            if !ok {
                return Some(r.name.clone());
            }
        }
        for v in &self.variables {
            let (lo, hi) = self.bound(v);
            let x = get(v);
            if x < lo - tol || x > hi + tol {
                return Some(v.clone());
            }
        }
        for b in &self.binaries {
            let x = get(b);
            if x.abs() > tol && (x - 1.0).abs() > tol {
                return Some(b.clone());
            }
        }
        None
    }
}
