//! The rule catalog: axioms of the four theories, retired rules, shortcut
//! definitions and derived identities, all stored as gate templates with named
//! angle parameters so that the rewrite engine can match them.
//!
//! Families indexed by a control count or a width are addressed as `NAME/k`
//! (e.g. `mctrlPaddition/2`, `K*/4`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::angle::{angle_dist, Affine, ParamTable};
use crate::circuit::{Circuit, Gate, GateKind, Theory};
use crate::error::{Error, Result};
use crate::format::parse_gate;
use crate::semantics::{circuit_deviation, eval_cptp_with, max_deviation, EvalOptions, SemanticsKind};
use crate::solvers::{self, EulerAngles, KstarAngles, KstarOldAngles};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Axiom,
    Retired,
    Definition,
    Identity,
}

/// How the parameters of one side follow from the other.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Solver {
    /// Both sides share their parameters.
    Shared,
    /// `Rx·P·Rx = phase·P·Rx·P`.
    Euler,
    /// Same without the global phase (discard theory).
    EulerPhaseless,
    /// `P·Rx·P = phase·Rx·P·Rx`.
    InverseEuler,
    Kstar,
    KstarOld,
}

/// One template gate: a concrete gate whose angle may be an affine expression.
#[derive(Clone, Debug, PartialEq)]
pub struct TGate {
    pub gate: Gate,
    pub expr: Option<Affine>,
}

impl TGate {
    pub fn instantiate(&self, params: &[f64]) -> Gate {
        match &self.expr {
            Some(e) => Gate { kind: self.gate.kind.with_angle(e.eval(params)), ..self.gate.clone() },
            None => self.gate.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Schema {
    pub name: String,
    pub kind: RuleKind,
    /// Language both sides live in; decides the semantics used for checks.
    pub theory: Theory,
    /// Number of interface (input) wires.
    pub n: usize,
    pub params: Vec<String>,
    pub lhs: Vec<TGate>,
    pub rhs: Vec<TGate>,
    pub solver: Solver,
    /// Parameter restricted to a finite set of values (modulo 2π).
    pub condition: Option<(usize, Vec<f64>)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RuleInstance {
    pub rule: String,
    pub params: Vec<(String, f64)>,
    #[serde(skip)]
    pub lhs: Circuit,
    #[serde(skip)]
    pub rhs: Circuit,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub rule: String,
    pub semantics: SemanticsKind,
    pub deviation: f64,
    pub pass: bool,
}

/// Aggregate over several random draws of one rule.
#[derive(Clone, Debug, Serialize)]
pub struct RuleSummary {
    pub rule: String,
    pub kind: RuleKind,
    pub theory: Theory,
    pub trials: usize,
    pub max_deviation: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn parse_side(text: &str, table: &mut ParamTable) -> Vec<TGate> {
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let (gate, expr) = parse_gate(s, table).unwrap_or_else(|e| panic!("template `{s}`: {e}"));
            TGate { gate, expr }
        })
        .collect()
}

impl Schema {
    pub fn new(name: &str, kind: RuleKind, theory: Theory, n: usize, lhs: &str, rhs: &str) -> Schema {
        let mut table = ParamTable::open();
        let lhs = parse_side(lhs, &mut table);
        let rhs = parse_side(rhs, &mut table);
        Schema { name: name.into(), kind, theory, n, params: table.names, lhs, rhs, solver: Solver::Shared, condition: None }
    }

    fn solved(mut self, solver: Solver) -> Schema {
        self.solver = solver;
        self
    }

    fn renamed(mut self, name: &str, kind: RuleKind, theory: Theory) -> Schema {
        self.name = name.into();
        self.kind = kind;
        self.theory = theory;
        self
    }

    pub fn param_index(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p == name)
    }

    /// `(pattern, replacement)` for the given direction.
    pub fn sides(&self, reversed: bool) -> (&[TGate], &[TGate]) {
        if reversed {
            (&self.rhs, &self.lhs)
        } else {
            (&self.lhs, &self.rhs)
        }
    }

    pub fn side_params(side: &[TGate]) -> Vec<usize> {
        let mut v: Vec<usize> = side.iter().filter_map(|t| t.expr.as_ref()).flat_map(|e| e.params()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Parameters a caller chooses when instantiating left to right.
    pub fn free_params(&self) -> Vec<usize> {
        match self.solver {
            Solver::Shared => (0..self.params.len()).collect(),
            _ => Self::side_params(&self.lhs),
        }
    }

    /// Whether either side changes the wire layout.
    pub fn is_structural(&self) -> bool {
        self.lhs.iter().chain(&self.rhs).any(|t| t.gate.kind.is_structural())
    }

    pub fn side_circuit(&self, side: &[TGate], params: &[f64]) -> Circuit {
        Circuit { theory: self.theory, n_in: self.n, gates: side.iter().map(|t| t.instantiate(params)).collect() }
    }

    fn get(&self, bound: &[Option<f64>], name: &str) -> Result<f64> {
        let i = self.param_index(name).expect("solver parameter name");
        bound[i].ok_or_else(|| Error::BadParameters(format!("{}: parameter `{name}` unbound", self.name)))
    }

    fn names(prefix: &str, n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("{prefix}{i}")).collect()
    }

    /// Fill every parameter from those bound on the pattern side, running the
    /// angle solver when one side determines the other.
    pub fn complete(&self, bound: &[Option<f64>], reversed: bool) -> Result<Vec<f64>> {
        let mut out: Vec<Option<f64>> = bound.to_vec();
        out.resize(self.params.len(), None);
        let set = |out: &mut Vec<Option<f64>>, name: &str, v: f64| {
            let i = self.param_index(name).expect("solver parameter name");
            out[i] = Some(v);
        };
        let gets = |names: &[String]| -> Result<Vec<f64>> { names.iter().map(|n| self.get(bound, n)).collect() };
        match (self.solver, reversed) {
            (Solver::Shared, _) => {
                for (i, v) in out.iter_mut().enumerate() {
                    if v.is_none() {
                        match &self.condition {
                            Some((p, allowed)) if *p == i => *v = Some(allowed[0]),
                            _ => {
                                return Err(Error::BadParameters(format!(
                                    "{}: parameter `{}` is not determined by the match; supply params={}=<value>",
                                    self.name, self.params[i], self.params[i]
                                )))
                            }
                        }
                    }
                }
                if let Some((p, allowed)) = &self.condition {
                    let v = out[*p].unwrap();
                    if !allowed.iter().any(|&a| angle_dist(v, a, 2.0 * PI) < 1e-9) {
                        return Err(Error::BadParameters(format!("{}: `{}` = {v} outside its allowed set", self.name, self.params[*p])));
                    }
                }
            }
            (Solver::Euler | Solver::EulerPhaseless, false) => {
                let a = gets(&Self::names("a", 3))?;
                let u = solvers::rx_matrix(a[2]) * solvers::p_matrix(a[1]) * solvers::rx_matrix(a[0]);
                let e = solvers::euler_zxz(&u)?;
                if self.solver == Solver::Euler {
                    set(&mut out, "b0", e.b0);
                }
                set(&mut out, "b1", e.b1);
                set(&mut out, "b2", e.b2);
                set(&mut out, "b3", e.b3);
            }
            (Solver::Euler | Solver::EulerPhaseless, true) => {
                let phaseless = self.solver == Solver::EulerPhaseless;
                let b0 = if phaseless { 0.0 } else { self.get(bound, "b0")? };
                let b = gets(&["b1".into(), "b2".into(), "b3".into()])?;
                let e = EulerAngles { b0, b1: b[0], b2: b[1], b3: b[2] };
                canonical_or_err(&self.name, e.violations())?;
                let a = solvers::rx_p_rx_angles(&solvers::zxz_matrix(&e), phaseless)?;
                for (k, v) in a.iter().enumerate() {
                    set(&mut out, &format!("a{}", k + 1), *v);
                }
            }
            (Solver::InverseEuler, false) => {
                let a = gets(&Self::names("a", 3))?;
                let u = solvers::p_matrix(a[2]) * solvers::rx_matrix(a[1]) * solvers::p_matrix(a[0]);
                let e = solvers::euler_xzx(&u)?;
                for (k, v) in e.as_array().iter().enumerate() {
                    set(&mut out, &format!("b{k}"), *v);
                }
            }
            (Solver::InverseEuler, true) => {
                let b = gets(&["b0".into(), "b1".into(), "b2".into(), "b3".into()])?;
                let e = EulerAngles { b0: b[0], b1: b[1], b2: b[2], b3: b[3] };
                canonical_or_err(&self.name, e.violations())?;
                let a = solvers::p_rx_p_angles(&solvers::xzx_matrix(&e))?;
                for (k, v) in a.iter().enumerate() {
                    set(&mut out, &format!("a{}", k + 1), *v);
                }
            }
            (Solver::Kstar | Solver::KstarOld, false) => {
                let g: [f64; 4] = gets(&Self::names("g", 4))?.try_into().unwrap();
                let d: Vec<f64> = if self.solver == Solver::Kstar {
                    solvers::solve_kstar(g)?.delta.to_vec()
                } else {
                    solvers::solve_kstar_old(g)?.delta.to_vec()
                };
                for (k, v) in d.iter().enumerate() {
                    set(&mut out, &format!("d{}", k + 1), *v);
                }
            }
            (Solver::Kstar, true) => {
                let d = KstarAngles { delta: gets(&Self::names("d", 8))?.try_into().unwrap() };
                canonical_or_err(&self.name, d.violations())?;
                for (k, v) in solvers::kstar_lhs_from_rhs(&d)?.iter().enumerate() {
                    set(&mut out, &format!("g{}", k + 1), *v);
                }
            }
            (Solver::KstarOld, true) => {
                let d = KstarOldAngles { delta: gets(&Self::names("d", 9))?.try_into().unwrap() };
                canonical_or_err(&self.name, d.violations())?;
                let new = solvers::kstar_new_from_old(&d)?;
                for (k, v) in solvers::kstar_lhs_from_rhs(&new)?.iter().enumerate() {
                    set(&mut out, &format!("g{}", k + 1), *v);
                }
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| Error::BadParameters(format!("{}: `{}` unresolved", self.name, self.params[i]))))
            .collect()
    }

    /// Instantiate left to right; `values` follow [`Schema::free_params`].
    pub fn instantiate(&self, values: &[f64]) -> Result<RuleInstance> {
        let free = self.free_params();
        if values.len() != free.len() {
            return Err(Error::BadParameters(format!(
                "{} takes {} parameter(s) ({}), got {}",
                self.name,
                free.len(),
                free.iter().map(|&i| self.params[i].as_str()).collect::<Vec<_>>().join(", "),
                values.len()
            )));
        }
        let mut bound = vec![None; self.params.len()];
        for (&i, &v) in free.iter().zip(values) {
            bound[i] = Some(v);
        }
        let params = self.complete(&bound, false)?;
        Ok(self.build_instance(params))
    }

    /// Instantiate right to left from values for the right-hand side parameters.
    pub fn instantiate_rhs(&self, values: &[(String, f64)]) -> Result<RuleInstance> {
        let mut bound = vec![None; self.params.len()];
        for (name, v) in values {
            let i = self.param_index(name).ok_or_else(|| Error::BadParameters(format!("{}: no parameter `{name}`", self.name)))?;
            bound[i] = Some(*v);
        }
        let params = self.complete(&bound, true)?;
        Ok(self.build_instance(params))
    }

    fn build_instance(&self, params: Vec<f64>) -> RuleInstance {
        RuleInstance {
            rule: self.name.clone(),
            params: self.params.iter().cloned().zip(params.iter().copied()).collect(),
            lhs: self.side_circuit(&self.lhs, &params),
            rhs: self.side_circuit(&self.rhs, &params),
        }
    }

    pub fn random_instance(&self, rng: &mut impl Rng) -> Result<RuleInstance> {
        let values: Vec<f64> = self
            .free_params()
            .iter()
            .map(|&i| match &self.condition {
                Some((p, allowed)) if *p == i => allowed[rng.gen_range(0..allowed.len())],
                _ => crate::random::angle_with_specials(rng),
            })
            .collect();
        self.instantiate(&values)
    }
}

fn canonical_or_err(name: &str, violations: Vec<String>) -> Result<()> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::BadParameters(format!("{name}: right-hand side parameters are not canonical: {}", violations.join("; "))))
    }
}

pub fn soundness_check(inst: &RuleInstance, opts: EvalOptions, tol: f64) -> Result<CheckResult> {
    let (semantics, deviation) = circuit_deviation(&inst.lhs, &inst.rhs, opts)?;
    Ok(CheckResult { rule: inst.rule.clone(), semantics, deviation, pass: deviation < tol })
}

/// Check one schema at `trials` random instantiations.
pub fn check_schema(schema: &Schema, trials: usize, rng: &mut impl Rng, opts: EvalOptions, tol: f64) -> RuleSummary {
    let mut worst = 0.0f64;
    let mut error = None;
    for _ in 0..trials {
        match schema.random_instance(rng).and_then(|inst| soundness_check(&inst, opts, tol)) {
            Ok(r) => worst = worst.max(r.deviation),
            Err(e) => {
                error = Some(e.to_string());
                break;
            }
        }
    }
    RuleSummary {
        rule: schema.name.clone(),
        kind: schema.kind,
        theory: schema.theory,
        trials,
        max_deviation: worst,
        pass: error.is_none() && worst < tol,
        error,
    }
}

pub fn check_all(schemas: &[Schema], trials: usize, seed: u64, opts: EvalOptions, tol: f64) -> Vec<RuleSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    schemas.iter().map(|s| check_schema(s, trials, &mut rng, opts, tol)).collect()
}

// ---------------------------------------------------------------- catalog

use RuleKind::*;
use Theory::*;

/// `CTRL[+w...]` prefix for positive controls on the given wires (empty when none).
fn ctl(wires: impl IntoIterator<Item = usize>) -> String {
    let items: Vec<String> = wires.into_iter().map(|w| format!("+{w}")).collect();
    if items.is_empty() {
        String::new()
    } else {
        format!("CTRL[{}] ", items.join(","))
    }
}

/// `CTRL[...]` with explicit polarities, `+`/`-` prefixed items.
fn ctl_items(items: &[String]) -> String {
    if items.is_empty() {
        String::new()
    } else {
        format!("CTRL[{}] ", items.join(","))
    }
}

fn pos(ws: std::ops::Range<usize>) -> Vec<String> {
    ws.map(|w| format!("+{w}")).collect()
}

fn with(mut v: Vec<String>, extra: &[String]) -> Vec<String> {
    v.extend_from_slice(extra);
    v
}

fn axiom(name: &str, theory: Theory, n: usize, lhs: &str, rhs: &str) -> Schema {
    Schema::new(name, Axiom, theory, n, lhs, rhs)
}

fn ident(name: &str, theory: Theory, n: usize, lhs: &str, rhs: &str) -> Schema {
    Schema::new(name, Identity, theory, n, lhs, rhs)
}

pub fn euler_schema(name: &str, kind: RuleKind, theory: Theory) -> Schema {
    let phase = if theory == QcGround { "" } else { "PHASE(b0);" };
    let solver = if theory == QcGround { Solver::EulerPhaseless } else { Solver::Euler };
    Schema::new(name, kind, theory, 1, "RX(a1) 0; P(a2) 0; RX(a3) 0", &format!("{phase} P(b1) 0; RX(b2) 0; P(b3) 0")).solved(solver)
}

fn kstar_lhs_text(n: usize) -> String {
    let (a, b) = (n - 2, n - 1);
    let x = || pos(0..n - 2);
    let cb = ctl_items(&with(x(), &[format!("+{b}")]));
    let ca = ctl_items(&with(x(), &[format!("+{a}")]));
    format!("{cb}RX(g1) {a}; {ca}P(g2) {b}; {ca}RX(g3) {b}; {cb}RX(g4) {a}")
}

fn kstar_rhs_text(n: usize, old: bool) -> String {
    let (a, b) = (n - 2, n - 1);
    let x = || pos(0..n - 2);
    let c0 = ctl_items(&x());
    let cb = ctl_items(&with(x(), &[format!("+{b}")]));
    let ca = ctl_items(&with(x(), &[format!("+{a}")]));
    let mut s = format!(
        "{c0}P(d2) {b}; {ca}P(d1) {b}; {ca}RX(d3) {b}; {cb}RX(d4) {a}; {ca}P(d5) {b}; {ca}RX(d6) {b}; {ca}P(d7) {b}; {c0}P(d8) {a}"
    );
    if old {
        s.push_str(&format!("; {c0}P(d9) {b}"));
    }
    s
}

pub fn kstar_schema(n: usize) -> Schema {
    Schema::new(&format!("K*/{n}"), Axiom, Qc, n, &kstar_lhs_text(n), &kstar_rhs_text(n, false)).solved(Solver::Kstar)
}

pub fn kstar_old_schema(n: usize) -> Schema {
    Schema::new(&format!("K*old/{n}"), Retired, Qc, n, &kstar_lhs_text(n), &kstar_rhs_text(n, true)).solved(Solver::KstarOld)
}

/// The vanilla axioms `A`–`J`.
fn qc_axioms_a_to_j() -> Vec<Schema> {
    let mut a = axiom("A", Qc, 0, "PHASE(phi)", "");
    a.condition = Some((0, vec![0.0, 2.0 * PI]));
    vec![
        a,
        axiom("B", Qc, 0, "PHASE(p1); PHASE(p2)", "PHASE(p1+p2)"),
        axiom("C", Qc, 1, "H 0; H 0", ""),
        axiom("D", Qc, 1, "P(0) 0", ""),
        axiom("E", Qc, 2, "CX 0 1; CX 1 0; CX 0 1", "SWAP 0 1"),
        axiom("F", Qc, 3, "CX 0 2; CX 1 2", "CX 0 1; CX 1 2; CX 0 1"),
        axiom("G", Qc, 2, "CX 0 1; P(phi) 0; CX 0 1", "P(phi) 0"),
        axiom("H", Qc, 2, "H 1; CX 0 1; H 1", "H 0; CX 1 0; H 0"),
        axiom("I", Qc, 1, "H 0", "P(pi/2) 0; RX(pi/2) 0; P(pi/2) 0"),
        euler_schema("J", Axiom, Qc),
    ]
}

fn iso_axioms(theory: Theory) -> Vec<Schema> {
    vec![axiom("L", theory, 0, "INIT; P(phi) 0", "INIT"), axiom("M", theory, 1, "INIT; CX 1 0", "INIT")]
}

fn k2(theory: Theory) -> Schema {
    kstar_schema(2).renamed("K2", Axiom, theory)
}

/// Axioms of a theory, K* instantiated at `n = 2..=5` where it applies.
pub fn axioms(theory: Theory) -> Vec<Schema> {
    match theory {
        Qc | QcIso => {
            let mut v = qc_axioms_a_to_j();
            v.extend((2..=5).map(kstar_schema));
            if theory == QcIso {
                v.extend(iso_axioms(QcIso));
            }
            v
        }
        QcAncilla => {
            let mut v = qc_axioms_a_to_j();
            v.push(k2(Qc));
            v.extend(iso_axioms(QcIso));
            v.push(axiom("N", QcAncilla, 0, "INIT; FREE 0", ""));
            v
        }
        QcGround => {
            let mut v: Vec<Schema> = qc_axioms_a_to_j()
                .into_iter()
                .filter(|s| !matches!(s.name.as_str(), "A" | "B" | "J"))
                .map(|mut s| {
                    s.theory = QcGround;
                    s
                })
                .collect();
            v.push(euler_schema("J'", Axiom, QcGround));
            v.push(k2(QcGround));
            v.extend(iso_axioms(QcGround));
            v.extend([
                axiom("O", QcGround, 1, "H 0; DISCARD 0", "DISCARD 0"),
                axiom("P", QcGround, 1, "P(phi) 0; DISCARD 0", "DISCARD 0"),
                axiom("Q", QcGround, 0, "INIT; DISCARD 0", ""),
                axiom("R", QcGround, 2, "CX 0 1; DISCARD 1; DISCARD 0", "DISCARD 1; DISCARD 0"),
            ]);
            v
        }
    }
}

/// Rules that used to be axioms and are now derivable.
pub fn retired() -> Vec<Schema> {
    let mut v = vec![
        Schema::new("n", Retired, Qc, 2, "CX 0 1; RX(t) 0; CX 0 1; RX(t2) 1", "RX(t2) 1; CX 1 0; RX(t) 1; CX 1 0"),
        Schema::new(
            "o",
            Retired,
            Qc,
            3,
            "CX 0 2; RX(t) 0; CX 0 2; CX 1 2; RX(t2) 1; CX 1 2",
            "CX 1 2; RX(t2) 1; CX 1 2; CX 0 2; RX(t) 0; CX 0 2",
        ),
    ];
    v.extend((2..=5).map(kstar_old_schema));
    v
}

fn def(name: &str, n: usize, lhs: &str, rhs: &str) -> Schema {
    Schema::new(name, Definition, Qc, n, lhs, rhs)
}

fn mcp_def(k: usize) -> Schema {
    let x = ctl(0..k);
    let xc = ctl(0..=k);
    let (c, t) = (k, k + 1);
    def(&format!("MCPdef/{k}"), k + 2, &format!("{xc}P(p) {t}"), &format!("{x}P(p/2) {c}; H {t}; {xc}RX(p) {t}; H {t}"))
}

fn mcrx_def(k: usize) -> Schema {
    let x = ctl(0..k);
    let xc = ctl(0..=k);
    let (c, t) = (k, k + 1);
    def(&format!("MCRXdef/{k}"), k + 2, &format!("{xc}RX(t) {t}"), &format!("{x}RX(t/2) {t}; CZ {c} {t}; {x}RX(-t/2) {t}; CZ {c} {t}"))
}

/// Shortcut-gate definitions, usable as rewrite rules in both directions.
pub fn definitions() -> Vec<Schema> {
    let mut v = vec![
        def("Xdef", 1, "X 0", "H 0; Z 0; H 0"),
        def("Zdef", 1, "Z 0", "P(pi) 0"),
        def("RXdef", 1, "RX(t) 0", "PHASE(-t/2); H 0; P(t) 0; H 0"),
        def("TOFdef", 3, "CCX 0 1 2", "CTRL[+0,+1] X 2"),
        def("FREDKIN", 3, "CSWAP 0 1 2", "CX 2 1; CCX 0 1 2; CX 2 1"),
    ];
    v.extend((0..=3).map(mcp_def));
    v.extend((0..=3).map(mcrx_def));
    v
}

fn basic_identities() -> Vec<Schema> {
    [
        ("XX", 1, "X 0; X 0", ""),
        ("ZZ", 1, "Z 0; Z 0", ""),
        ("RX0", 1, "RX(0) 0", ""),
        ("Zminuspi", 1, "P(-pi) 0", "Z 0"),
        ("Paddition", 1, "P(p1) 0; P(p2) 0", "P(p1+p2) 0"),
        ("RXaddition", 1, "RX(t1) 0; RX(t2) 0", "RX(t1+t2) 0"),
        ("CNOTCNOT", 2, "CX 0 1; CX 0 1", ""),
        ("CNOTHH", 2, "H 0; H 1; CX 0 1; H 0; H 1", "CX 1 0"),
        ("CNOTSWAP", 2, "CX 0 1", "CX 1 0; SWAP 0 1; CX 1 0"),
        ("PcommutCNOT", 2, "P(p) 0; CX 0 1", "CX 0 1; P(p) 0"),
        ("RXcommutCNOT", 2, "RX(t) 1; CX 0 1", "CX 0 1; RX(t) 1"),
        ("XcommutCNOT", 2, "X 1; CX 0 1", "CX 0 1; X 1"),
        ("CNOTXX", 2, "X 0; CX 0 1", "CX 0 1; X 0; X 1"),
        ("CNOTZZ", 2, "Z 1; CX 0 1", "CX 0 1; Z 0; Z 1"),
        ("CNOTscontrolcommut", 3, "CX 0 1; CX 0 2", "CX 0 2; CX 0 1"),
        ("CNOTstargetcommut", 3, "CX 0 2; CX 1 2", "CX 1 2; CX 0 2"),
        ("3CNOTscontrol", 3, "CX 2 0; CX 2 1", "CX 1 0; CX 2 1; CX 1 0"),
        ("XPX", 1, "X 0; P(p) 0; X 0", "PHASE(p); P(-p) 0"),
        ("ZRXZ", 1, "Z 0; RX(t) 0; Z 0", "RX(-t) 0"),
        ("Pphasegadget", 2, "CX 0 1; P(p) 1; CX 0 1", "CX 1 0; P(p) 0; CX 1 0"),
        ("RXphasegadget", 2, "CX 1 0; RX(t) 1; CX 1 0", "CX 0 1; RX(t) 0; CX 0 1"),
    ]
    .into_iter()
    .map(|(name, n, l, r)| ident(name, Qc, n, l, r))
    .chain(std::iter::once(
        Schema::new("inverseEuler", Identity, Qc, 1, "P(a1) 0; RX(a2) 0; P(a3) 0", "PHASE(b0); RX(b1) 0; P(b2) 0; RX(b3) 0")
            .solved(Solver::InverseEuler),
    ))
    .collect()
}

/// Multi-controlled identities with `k` controls on wires `0..k`.
fn family(base: &str, k: usize) -> Option<Schema> {
    let x = || ctl(0..k);
    let xc = || ctl(0..=k);
    let (c, t) = (k, k + 1);
    let name = format!("{base}/{k}");
    let s = match base {
        "mctrlPaddition" => ident(&name, Qc, k + 1, &format!("{x}P(p1) {c}; {x}P(p2) {c}", x = x()), &format!("{}P(p1+p2) {c}", x())),
        "mctrlRXaddition" => ident(&name, Qc, k + 1, &format!("{x}RX(t1) {c}; {x}RX(t2) {c}", x = x()), &format!("{}RX(t1+t2) {c}", x())),
        "mctrlPop" => ident(&name, Qc, k + 2, &format!("X {t}; {}P(p) {t}; X {t}", xc()), &format!("{}P(p) {c}; {}P(-p) {t}", x(), xc())),
        "mctrlRXop" => ident(&name, Qc, k + 1, &format!("Z {c}; {}RX(t) {c}; Z {c}", x()), &format!("{}RX(-t) {c}", x())),
        "mctrlPlift" => {
            let xt = ctl_items(&with(pos(0..k), &[format!("+{t}")]));
            ident(&name, Qc, k + 2, &format!("{}P(p) {t}", xc()), &format!("{xt}P(p) {c}"))
        }
        "mctrlPSWAP" | "mctrlRXSWAP" if k >= 2 => {
            let g = if base == "mctrlPSWAP" { "P(p)" } else { "RX(t)" };
            ident(&name, Qc, k + 1, &format!("SWAP 0 1; {}{g} {c}; SWAP 0 1", x()), &format!("{}{g} {c}", x()))
        }
        "mctrlzeroidP" => ident(&name, Qc, k + 1, &format!("{}P(0) {c}", x()), ""),
        "mctrlzeroidRX" => ident(&name, Qc, k + 1, &format!("{}RX(0) {c}", x()), ""),
        "mctrlP2piperiodic" => ident(&name, Qc, k + 1, &format!("{}P(p+2*pi) {c}", x()), &format!("{}P(p) {c}", x())),
        "mctrlRX2piP" => ident(&name, Qc, k + 2, &format!("{}RX(t+2*pi) {t}", xc()), &format!("{}P(pi) {c}; {}RX(t) {t}", x(), xc())),
        "mctrlPinducdef" => ident(
            &name,
            Qc,
            k + 2,
            &format!("{}P(p) {t}", xc()),
            &format!("{x}P(p/2) {c}; {x}P(p/2) {t}; CX {c} {t}; {x}P(-p/2) {t}; CX {c} {t}", x = x()),
        ),
        "BULLET" => ident(&name, Qc, k + 2, &format!("{}P(p) {c}; {}P(q) {t}", x(), xc()), &format!("{}P(q) {t}; {}P(p) {c}", xc(), x())),
        "ancillamctrlPneg" | "ancillamctrlRXneg" => {
            let g = if base == "ancillamctrlPneg" { "P(p)" } else { "RX(t)" };
            let xa = ctl_items(&with(pos(0..k), &[format!("+{t}")]));
            ident(&name, QcIso, k + 1, &format!("INIT; {xa}{g} {c}"), "INIT")
        }
        "ancillamctrlPpos" | "ancillamctrlRXpos" => {
            let g = if base == "ancillamctrlPpos" { "P(p)" } else { "RX(t)" };
            let xa = ctl_items(&with(pos(0..k), &[format!("-{t}")]));
            ident(&name, QcIso, k + 1, &format!("INIT; {xa}{g} {c}"), &format!("INIT; {}{g} {c}", x()))
        }
        "Paltdef" | "RXaltdef" if k >= 2 => {
            let g = if base == "Paltdef" { "P(p)" } else { "RX(t)" };
            let a = k + 1;
            let inner = ctl_items(&with(pos(0..k - 2), &[format!("+{a}")]));
            let tof = format!("CCX {} {} {a}", k - 2, k - 1);
            ident(&name, QcAncilla, k + 1, &format!("{}{g} {c}", x()), &format!("INIT; {tof}; {inner}{g} {c}; {tof}; FREE {a}"))
        }
        "K*" if k >= 2 => kstar_schema(k),
        "K*old" if k >= 2 => kstar_old_schema(k),
        "MCPdef" => mcp_def(k),
        "MCRXdef" => mcrx_def(k),
        _ => return None,
    };
    Some(s)
}

/// Default instantiation ranges of the identity families.
const FAMILIES: &[(&str, std::ops::RangeInclusive<usize>)] = &[
    ("mctrlPaddition", 0..=3),
    ("mctrlRXaddition", 0..=3),
    ("mctrlPop", 0..=2),
    ("mctrlRXop", 0..=3),
    ("mctrlPlift", 0..=2),
    ("mctrlPSWAP", 2..=3),
    ("mctrlRXSWAP", 2..=3),
    ("mctrlzeroidP", 0..=3),
    ("mctrlzeroidRX", 0..=3),
    ("mctrlP2piperiodic", 0..=3),
    ("mctrlRX2piP", 0..=2),
    ("mctrlPinducdef", 0..=3),
    ("BULLET", 0..=2),
    ("ancillamctrlPneg", 0..=2),
    ("ancillamctrlRXneg", 0..=2),
    ("ancillamctrlPpos", 0..=2),
    ("ancillamctrlRXpos", 0..=2),
    ("Paltdef", 2..=4),
    ("RXaltdef", 2..=4),
];

fn ancilla_identities() -> Vec<Schema> {
    let mut v = vec![
        ident("TOFTOF", Qc, 3, "CCX 0 1 2; CCX 0 1 2", ""),
        ident("ancillaCNOTpos", QcIso, 1, "INIT; X 1; CX 1 0; X 1", "INIT; X 0"),
        ident("ancillaTOFneg", QcIso, 2, "INIT; CCX 2 0 1", "INIT"),
        ident("ancillaTOFpos", QcIso, 2, "INIT; CTRL[-2,+0] X 1", "INIT; CX 0 1"),
        ident("ctrlPinit", QcIso, 2, "INIT; CTRL[+0] P(p) 1", "INIT; CCX 0 1 2; P(p) 2; CCX 0 1 2"),
        ident("TOFPTOF", Qc, 3, "CCX 0 1 2; P(p) 2; CCX 0 1 2", "P(p) 2; CTRL[+0] P(p) 1; CTRL[+0,+1] P(-2*p) 2"),
        ident("ctrctrlPdefTOF", QcAncilla, 3, "CTRL[+0,+1] P(p) 2", "INIT; CCX 0 1 3; CTRL[+2] P(p) 3; CCX 0 1 3; FREE 3"),
        ident(
            "ctrctrlctrlPdefTOF",
            QcAncilla,
            4,
            "CTRL[+0,+1,+2] P(p) 3",
            "INIT; CCX 0 1 4; CTRL[+4,+2] P(p) 3; CCX 0 1 4; FREE 4",
        ),
        ident("HHTOFHH", Qc, 3, "H 1; H 2; CCX 0 1 2; H 1; H 2", "CCX 0 2 1"),
        ident("HHFredkinHH", Qc, 3, "H 1; H 2; CSWAP 0 1 2; H 1; H 2", "CSWAP 0 1 2"),
        ident("initTOF", QcIso, 2, "INIT; CX 0 2; CCX 0 1 2", "INIT; CTRL[+0,-1] X 2"),
        ident("3tofs2cnots", Qc, 3, "CX 1 2; CCX 0 2 1; CX 1 2", "CCX 0 1 2; CCX 0 2 1; CCX 0 1 2"),
        ident("wbTOF", Qc, 3, "CTRL[-0,+1] X 2", "CX 1 2; CCX 0 1 2"),
        ident("TOFFredkin", Qc, 4, "CSWAP 0 1 2; CCX 0 1 3; CSWAP 0 1 2", "CTRL[+0,+2] X 3"),
        ident("wFredkin", Qc, 3, "CTRL[-0] SWAP 1 2", "SWAP 1 2; CSWAP 0 1 2"),
        ident("wCZ-Z", Qc, 2, "CTRL[-0] Z 1", "Z 1; CZ 0 1"),
        ident("ctrlPphasegadget", Qc, 3, "CX 1 2; CTRL[+0] P(p) 2; CX 1 2", "CX 2 1; CTRL[+0] P(p) 1; CX 2 1"),
        ident("wCCZ-CZ", Qc, 3, "CTRL[-0,+1] Z 2", "CZ 1 2; CTRL[+0,+1] Z 2"),
        ident("wCCRX-CRX", Qc, 3, "CTRL[-0,+1] RX(t) 2", "CTRL[+0,+1] RX(-t) 2; CTRL[+1] RX(t) 2"),
        ident("FredkinwbTOF", Qc, 4, "CSWAP 0 1 2; CTRL[-0,+1] X 3; CSWAP 0 1 2", "CTRL[-0,+1] X 3"),
        ident("PthroughFredkin", Qc, 3, "CSWAP 0 1 2; P(p) 1; CSWAP 0 1 2", "CTRL[-0] P(p) 1; CTRL[+0] P(p) 2"),
        ident(
            "ctrlPthroughFredkin",
            Qc,
            4,
            "CSWAP 0 1 2; CTRL[+3] P(p) 1; CSWAP 0 1 2",
            "CTRL[-0,+3] P(p) 1; CTRL[+0,+3] P(p) 2",
        ),
        ident(
            "ctrlRXthroughFredkin",
            Qc,
            4,
            "CSWAP 0 1 2; CTRL[+3] RX(t) 1; CSWAP 0 1 2",
            "CTRL[-0,+3] RX(t) 1; CTRL[+0,+3] RX(t) 2",
        ),
        kstar_schema(3).renamed("K3", Identity, QcAncilla),
    ];
    if let Some(m) = family("Paltdef", 2) {
        v.push(m.renamed("multi2", Identity, QcAncilla));
    }
    v
}

/// Every derived identity at its default instantiations.
pub fn identities() -> Vec<Schema> {
    let mut v = basic_identities();
    for (base, ks) in FAMILIES {
        for k in ks.clone() {
            v.extend(family(base, k));
        }
    }
    v.extend(ancilla_identities());
    v
}

fn fixed_rules() -> &'static [Schema] {
    static RULES: OnceLock<Vec<Schema>> = OnceLock::new();
    RULES.get_or_init(|| {
        let mut v: Vec<Schema> = vec![];
        for t in Theory::ALL {
            for s in axioms(t) {
                if !v.iter().any(|o| o.name == s.name) {
                    v.push(s);
                }
            }
        }
        v.extend(retired());
        v.extend(definitions());
        v.extend(identities());
        v
    })
}

/// Look a rule up by name (`C`, `J'`, `K*/3`, `mctrlPop/2`, ...).
pub fn rule(name: &str) -> Result<Schema> {
    if let Some(s) = fixed_rules().iter().find(|s| s.name == name) {
        return Ok(s.clone());
    }
    if let Some((base, k)) = name.rsplit_once('/') {
        if let Ok(k) = k.parse::<usize>() {
            if k <= 8 {
                if let Some(s) = family(base, k) {
                    return Ok(s);
                }
            }
        }
    }
    Err(Error::UnknownRule(name.to_string()))
}

/// A rule as it is stated in a given theory (ground copies drop phases).
pub fn rule_in(name: &str, theory: Theory) -> Result<Schema> {
    if let Some(s) = axioms(theory).into_iter().find(|s| s.name == name) {
        return Ok(s);
    }
    rule(name)
}

pub fn all_rules() -> &'static [Schema] {
    fixed_rules()
}

pub fn axiom_suite(theory: Theory, trials: usize, seed: u64, opts: EvalOptions, tol: f64) -> Vec<RuleSummary> {
    check_all(&axioms(theory), trials, seed, opts, tol)
}

pub fn retired_suite(trials: usize, seed: u64, opts: EvalOptions, tol: f64) -> Vec<RuleSummary> {
    check_all(&retired(), trials, seed, opts, tol)
}

/// Every identity (and shortcut definition) whose language embeds in `theory`.
pub fn derived_identity_suite(theory: Theory, trials: usize, seed: u64, opts: EvalOptions, tol: f64) -> Vec<RuleSummary> {
    let schemas: Vec<Schema> =
        definitions().into_iter().chain(identities()).filter(|s| s.theory.embeds_in(theory)).collect();
    check_all(&schemas, trials, seed, opts, tol)
}

/// `U ; discard^m` against `discard^n` as superoperators, for a circuit without
/// frees or discards.
pub fn discard_iso_deviation(u: &Circuit, opts: EvalOptions) -> Result<f64> {
    if u.gates.iter().any(|g| matches!(g.kind, GateKind::Free | GateKind::Discard)) {
        return Err(Error::InvalidInput("discard construction needs a circuit without Free/Discard".into()));
    }
    let mut lhs = crate::semantics::to_ground(u);
    for _ in 0..u.n_out() {
        lhs.push(Gate::discard(0));
    }
    let mut rhs = Circuit::new(QcGround, u.n_in);
    for _ in 0..u.n_in {
        rhs.push(Gate::discard(0));
    }
    max_deviation(&eval_cptp_with(&lhs, opts)?, &eval_cptp_with(&rhs, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::DEFAULT_TOL;

    #[test]
    fn every_template_respects_its_theory() {
        for s in all_rules() {
            for side in [&s.lhs, &s.rhs] {
                let c = s.side_circuit(side, &vec![0.3; s.params.len()]);
                c.validate().unwrap_or_else(|e| panic!("{}: {e}", s.name));
            }
        }
    }

    #[test]
    fn axiom_a_and_c_instances() {
        let a = rule("A").unwrap();
        let inst = a.instantiate(&[2.0 * PI]).unwrap();
        assert_eq!(inst.rhs.gates.len(), 0);
        assert!(a.instantiate(&[1.0]).is_err());
        let c = rule("C").unwrap().instantiate(&[]).unwrap();
        assert!(soundness_check(&c, EvalOptions::default(), 1e-15).unwrap().pass);
    }

    #[test]
    fn e_is_exact_and_i_is_tight() {
        let opts = EvalOptions::default();
        let e = rule("E").unwrap().instantiate(&[]).unwrap();
        assert_eq!(soundness_check(&e, opts, 1e-15).unwrap().deviation, 0.0);
        let i = rule("I").unwrap().instantiate(&[]).unwrap();
        assert!(soundness_check(&i, opts, 1e-12).unwrap().pass);
    }

    #[test]
    fn r_is_sound_as_superoperators() {
        let r = rule_in("R", QcGround).unwrap().instantiate(&[]).unwrap();
        let res = soundness_check(&r, EvalOptions::default(), 1e-10).unwrap();
        assert_eq!(res.semantics, SemanticsKind::Cptp);
        assert!(res.pass);
    }

    #[test]
    fn all_axioms_sound() {
        for t in Theory::ALL {
            for r in axiom_suite(t, 5, 1, EvalOptions::default(), DEFAULT_TOL) {
                assert!(r.pass, "{t}: {r:?}");
            }
        }
    }

    #[test]
    fn identities_and_retired_sound() {
        let opts = EvalOptions::default();
        let mut bad = vec![];
        for r in derived_identity_suite(QcAncilla, 4, 2, opts, DEFAULT_TOL).into_iter().chain(retired_suite(4, 2, opts, DEFAULT_TOL)) {
            if !r.pass {
                bad.push(format!("{} {:?} {:?}", r.rule, r.max_deviation, r.error));
            }
        }
        assert!(bad.is_empty(), "{bad:#?}");
    }

    #[test]
    fn unknown_rule() {
        assert!(matches!(rule("nope"), Err(Error::UnknownRule(_))));
        assert_eq!(rule("K*/4").unwrap().n, 4);
    }

    #[test]
    fn euler_rule_rhs_to_lhs() {
        let j = rule("J").unwrap();
        let inst = j.instantiate(&[0.4, 1.1, -2.0]).unwrap();
        let back = j.instantiate_rhs(&inst.params[3..].to_vec()).unwrap();
        assert!(soundness_check(&back, EvalOptions::default(), 1e-9).unwrap().pass);
    }
}
