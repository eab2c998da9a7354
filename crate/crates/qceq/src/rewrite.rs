//! Matching rule schemas inside circuits, applying them, deformation normal
//! form, and replay of derivation scripts.
//!
//! A match pins the first pattern gate at the anchor and picks the remaining
//! pattern gates, in order, within a bounded span. Gates of the span that are
//! not part of the match are slid out of the way — to the left when they share
//! no wire with anything matched so far, otherwise to the right — as allowed by
//! deformation. Structural gates that are not matched stop the search.

use serde::Serialize;
use std::collections::BTreeSet;

use crate::angle::{angle_dist, parse_angle, wrap};
use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::rules::{self, Schema, TGate};
use crate::semantics::{circuit_deviation, EvalOptions};

/// Extra gates tolerated in a span beyond the pattern length.
pub const DEFAULT_WINDOW: usize = 8;
const ANGLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Match {
    pub rule: String,
    pub reversed: bool,
    /// Index of the first matched gate (insertion point for empty patterns).
    pub anchor: usize,
    /// Circuit gate index of each pattern gate.
    pub gates: Vec<usize>,
    /// Circuit wire of each interface wire of the schema, at the anchor.
    pub wires: Vec<Option<usize>>,
    pub params: Vec<Option<f64>>,
    /// Unmatched gates of the span moved before / after the block.
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    /// Circuit wires of the schema's output wires after the block.
    out_wires: Vec<Option<usize>>,
}

/// Optional constraints on a search, as written in derivation scripts.
#[derive(Clone, Debug, Default)]
pub struct Hints {
    pub wires: Option<Vec<usize>>,
    pub params: Vec<(String, f64)>,
}

/// Wires a gate occupies for commutation purposes; `None` means all of them.
fn effective_wires(g: &Gate, live_before: usize) -> Option<Vec<usize>> {
    match &g.kind {
        GateKind::Init => Some(vec![live_before]),
        GateKind::Free | GateKind::Discard | GateKind::Permute(_) => None,
        _ => Some(g.wires()),
    }
}

fn overlaps(a: &Option<Vec<usize>>, b: &Option<Vec<usize>>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.iter().any(|w| y.contains(w)),
        (Some(x), None) | (None, Some(x)) => !x.is_empty(),
        (None, None) => true,
    }
}

#[derive(Clone)]
struct State {
    /// current schema wire → circuit wire
    smap: Vec<Option<usize>>,
    /// interface wire → circuit wire at the anchor (filled as bound)
    iface: Vec<Option<usize>>,
    /// current schema wire → interface index, if it is one
    origin: Vec<Option<usize>>,
    params: Vec<Option<f64>>,
    deferred: Vec<(usize, f64, f64)>,
    freed: bool,
    gates: Vec<usize>,
    left: Vec<usize>,
    right: Vec<usize>,
    matched_eff: Vec<Option<Vec<usize>>>,
    right_eff: Vec<Option<Vec<usize>>>,
}

impl State {
    fn bind(&mut self, s: usize, w: usize) -> bool {
        match self.smap[s] {
            Some(x) => x == w,
            None => {
                if self.freed || self.smap.contains(&Some(w)) {
                    return false;
                }
                self.smap[s] = Some(w);
                if let Some(i) = self.origin[s] {
                    self.iface[i] = Some(w);
                }
                true
            }
        }
    }
}

struct Ctx<'a> {
    c: &'a Circuit,
    live: Vec<usize>,
    pattern: &'a [TGate],
    schema: &'a Schema,
    limit: usize,
}

fn bind_param(st: &mut State, j: usize, tg: &TGate, value: f64) -> bool {
    let period = tg.gate.kind.period();
    let Some(expr) = &tg.expr else {
        let want = tg.gate.kind.angle().unwrap_or(0.0);
        return angle_dist(value, want, period) < ANGLE_TOL;
    };
    let unbound: Vec<usize> = expr.params().filter(|&p| st.params[p].is_none()).collect();
    let eval = |params: &[Option<f64>]| expr.terms.iter().map(|&(i, c)| c * params[i].unwrap_or(0.0)).sum::<f64>() + expr.constant;
    match unbound.len() {
        0 => angle_dist(eval(&st.params), value, period) < ANGLE_TOL,
        1 => {
            let p = unbound[0];
            let coef = expr.terms.iter().find(|t| t.0 == p).unwrap().1;
            let rest = eval(&st.params);
            st.params[p] = Some(wrap((value - rest) / coef, period / coef.abs()));
            true
        }
        _ => {
            st.deferred.push((j, value, period));
            true
        }
    }
}

/// All ways to bind the wires of one template gate onto a circuit gate.
fn bind_gate(st: &State, tg: &TGate, g: &Gate, live_before: usize) -> Vec<State> {
    let t = &tg.gate;
    if !t.kind.same_shape(&g.kind) || t.targets.len() != g.targets.len() || t.controls.len() != g.controls.len() {
        return vec![];
    }
    let mut base = st.clone();
    match &t.kind {
        GateKind::Init => {
            base.smap.push(Some(live_before));
            base.origin.push(None);
            return vec![base];
        }
        GateKind::Free | GateKind::Discard => {
            let s = t.targets[0];
            if !base.bind(s, g.targets[0]) {
                return vec![];
            }
            let w = g.targets[0];
            base.smap.remove(s);
            base.origin.remove(s);
            for x in base.smap.iter_mut().flatten() {
                if *x > w {
                    *x -= 1;
                }
            }
            base.freed = true;
            return vec![base];
        }
        GateKind::Permute(_) => return vec![],
        _ => {}
    }
    if let Some(v) = g.angle() {
        if !bind_param(&mut base, st.gates.len(), tg, v) {
            return vec![];
        }
    }
    let target_orders: Vec<Vec<usize>> = if t.kind == GateKind::Swap {
        vec![g.targets.clone(), vec![g.targets[1], g.targets[0]]]
    } else {
        vec![g.targets.clone()]
    };
    let mut out = vec![];
    for order in target_orders {
        let mut s = base.clone();
        if t.targets.iter().zip(&order).all(|(&sw, &cw)| s.bind(sw, cw)) {
            bind_controls(s, &t.controls, &g.controls, &mut vec![false; g.controls.len()], &mut out);
        }
    }
    out
}

fn bind_controls(st: State, want: &[crate::circuit::Control], have: &[crate::circuit::Control], used: &mut Vec<bool>, out: &mut Vec<State>) {
    let Some((first, rest)) = want.split_first() else {
        out.push(st);
        return;
    };
    for (i, h) in have.iter().enumerate() {
        if used[i] || h.positive != first.positive {
            continue;
        }
        let mut s = st.clone();
        if s.bind(first.wire, h.wire) {
            used[i] = true;
            bind_controls(s, rest, have, used, out);
            used[i] = false;
        }
    }
}

fn search(ctx: &Ctx, st: State, j: usize, out: &mut Vec<Match>) {
    if j == ctx.pattern.len() {
        if let Some(m) = finish(ctx, st) {
            if !out.iter().any(|o| o.gates == m.gates && o.wires == m.wires) {
                out.push(m);
            }
        }
        return;
    }
    let gates = &ctx.c.gates;
    let last = *st.gates.last().unwrap();
    let mut pending_left: Vec<usize> = vec![];
    let mut pending_right: Vec<(usize, Option<Vec<usize>>)> = vec![];
    for q in last + 1..gates.len().min(ctx.limit) {
        let g = &gates[q];
        let eff = effective_wires(g, ctx.live[q]);
        let crosses_right = st.right_eff.iter().chain(pending_right.iter().map(|(_, e)| e)).any(|r| overlaps(r, &eff));
        if !crosses_right {
            for mut s in bind_gate(&st, &ctx.pattern[j], g, ctx.live[q]) {
                s.left.extend(&pending_left);
                for (u, e) in &pending_right {
                    s.right.push(*u);
                    s.right_eff.push(e.clone());
                }
                s.gates.push(q);
                s.matched_eff.push(eff.clone());
                search(ctx, s, j + 1, out);
            }
        }
        // otherwise the gate stays unmatched and has to slide out of the span
        if g.kind.is_structural() {
            return;
        }
        let blocked_left = st.matched_eff.iter().any(|m| overlaps(m, &eff)) || crosses_right;
        if blocked_left {
            pending_right.push((q, eff));
        } else {
            pending_left.push(q);
        }
    }
}

fn finish(ctx: &Ctx, mut st: State) -> Option<Match> {
    // resolve parameters whose expressions involved several unknowns
    let mut progress = true;
    while progress && !st.deferred.is_empty() {
        progress = false;
        let deferred = std::mem::take(&mut st.deferred);
        for (j, value, _) in deferred {
            let before = st.deferred.len();
            if !bind_param(&mut st, j, &ctx.pattern[j], value) {
                return None;
            }
            if st.deferred.len() == before {
                progress = true;
            }
        }
    }
    st.deferred.clear();
    Some(Match {
        rule: ctx.schema.name.clone(),
        reversed: false,
        anchor: st.gates[0],
        gates: st.gates,
        wires: st.iface,
        params: st.params,
        left: st.left,
        right: st.right,
        out_wires: st.smap,
    })
}

fn initial_state(schema: &Schema, hints: &Hints) -> Result<State> {
    let n = schema.n;
    let mut st = State {
        smap: vec![None; n],
        iface: vec![None; n],
        origin: (0..n).map(Some).collect(),
        params: vec![None; schema.params.len()],
        deferred: vec![],
        freed: false,
        gates: vec![],
        left: vec![],
        right: vec![],
        matched_eff: vec![],
        right_eff: vec![],
    };
    if let Some(ws) = &hints.wires {
        if ws.len() != n {
            return Err(Error::BadParameters(format!("{} has {n} interface wire(s), hint gives {}", schema.name, ws.len())));
        }
        let set: BTreeSet<_> = ws.iter().collect();
        if set.len() != ws.len() {
            return Err(Error::BadParameters("repeated wire in hint".into()));
        }
        for (i, &w) in ws.iter().enumerate() {
            st.smap[i] = Some(w);
            st.iface[i] = Some(w);
        }
    }
    for (name, v) in &hints.params {
        let i = schema.param_index(name).ok_or_else(|| Error::BadParameters(format!("{}: no parameter `{name}`", schema.name)))?;
        st.params[i] = Some(*v);
    }
    Ok(st)
}

/// Matches of a schema side whose first gate sits at `anchor`.
pub fn find_matches_at(c: &Circuit, schema: &Schema, reversed: bool, anchor: usize, hints: &Hints, window: usize) -> Result<Vec<Match>> {
    let (pattern, _) = schema.sides(reversed);
    let st = initial_state(schema, hints)?;
    if pattern.is_empty() {
        // an empty side can be inserted anywhere; only explicit requests make sense
        if hints.wires.is_none() && schema.n > 0 || anchor > c.gates.len() {
            return Ok(vec![]);
        }
        let live = c.live_counts();
        if st.smap.iter().flatten().any(|&w| w >= live[anchor]) {
            return Ok(vec![]);
        }
        return Ok(vec![Match {
            rule: schema.name.clone(),
            reversed,
            anchor,
            gates: vec![],
            wires: st.iface,
            params: st.params,
            left: vec![],
            right: vec![],
            out_wires: st.smap,
        }]);
    }
    if anchor >= c.gates.len() {
        return Ok(vec![]);
    }
    let live = c.live_counts();
    let ctx = Ctx { c, live, pattern, schema, limit: anchor + pattern.len() + window };
    let mut out = vec![];
    let g = &c.gates[anchor];
    let eff = effective_wires(g, ctx.live[anchor]);
    for mut s in bind_gate(&st, &pattern[0], g, ctx.live[anchor]) {
        s.gates.push(anchor);
        s.matched_eff.push(eff.clone());
        search(&ctx, s, 1, &mut out);
    }
    for m in &mut out {
        m.reversed = reversed;
    }
    Ok(out)
}

/// Every match of the schema side in the circuit.
pub fn find_matches(c: &Circuit, schema: &Schema, reversed: bool) -> Vec<Match> {
    (0..c.gates.len())
        .flat_map(|a| find_matches_at(c, schema, reversed, a, &Hints::default(), DEFAULT_WINDOW).unwrap_or_default())
        .collect()
}

/// Replace the matched block by the other side of the rule.
pub fn apply(c: &Circuit, schema: &Schema, m: &Match) -> Result<Circuit> {
    let (pattern, replacement) = schema.sides(m.reversed);
    if m.gates.len() != pattern.len() || m.gates.iter().chain(&m.left).chain(&m.right).any(|&i| i >= c.gates.len()) {
        return Err(Error::StaleMatch("gate indices out of range".into()));
    }
    let params = schema.complete(&m.params, m.reversed)?;
    // the pattern, fully instantiated, must still be what the circuit holds
    for (tg, &i) in pattern.iter().zip(&m.gates) {
        let want = tg.instantiate(&params);
        let have = &c.gates[i];
        if !want.kind.same_shape(&have.kind) {
            return Err(Error::StaleMatch(format!("gate {i} is no longer a {}", want.kind.name())));
        }
        if let (Some(a), Some(b)) = (want.angle(), have.angle()) {
            if angle_dist(a, b, want.kind.period()) > ANGLE_TOL {
                return Err(Error::StaleMatch(format!("gate {i} has angle {b}, the rule needs {a}")));
            }
        }
    }
    let live = c.live_counts();
    let lo = m.gates.first().copied().unwrap_or(m.anchor);
    let hi = m.gates.last().map(|&g| g + 1).unwrap_or(m.anchor);
    // emit the replacement through the interface binding
    let mut smap = m.wires.clone();
    let mut next_wire = live[lo];
    let mut emitted = vec![];
    for tg in replacement {
        let g = tg.instantiate(&params);
        match g.kind {
            GateKind::Init => {
                smap.push(Some(next_wire));
                next_wire += 1;
                emitted.push(g);
                continue;
            }
            GateKind::Free | GateKind::Discard => {
                let s = g.targets[0];
                let w = smap[s].ok_or_else(|| unbound(schema, s))?;
                smap.remove(s);
                for x in smap.iter_mut().flatten() {
                    if *x > w {
                        *x -= 1;
                    }
                }
                next_wire -= 1;
                emitted.push(Gate { targets: vec![w], ..g });
                continue;
            }
            _ => {}
        }
        for w in g.wires() {
            if smap.get(w).copied().flatten().is_none() {
                return Err(unbound(schema, w));
            }
        }
        emitted.push(g.map_wires(|w| smap[w].unwrap()));
    }
    if !m.out_wires.is_empty() || !smap.is_empty() {
        let agree = smap.len() == m.out_wires.len()
            && smap.iter().zip(&m.out_wires).all(|(a, b)| a.is_none() || b.is_none() || a == b);
        if !agree {
            return Err(Error::BadParameters(format!("{}: replacement leaves the wires in a different layout", schema.name)));
        }
    }
    let mut gates: Vec<Gate> = c.gates[..lo].to_vec();
    gates.extend(m.left.iter().map(|&i| c.gates[i].clone()));
    gates.extend(emitted);
    gates.extend(m.right.iter().map(|&i| c.gates[i].clone()));
    gates.extend(c.gates[hi..].iter().cloned());
    let out = Circuit { theory: c.theory, n_in: c.n_in, gates };
    out.validate()?;
    Ok(out)
}

fn unbound(schema: &Schema, w: usize) -> Error {
    Error::BadParameters(format!("{}: schema wire {w} is not bound by the match; supply wires=", schema.name))
}

/// Fill in unbound interface wires with the lowest unused circuit wires.
pub fn complete_wires(c: &Circuit, m: &mut Match) {
    let live = c.live_counts()[m.gates.first().copied().unwrap_or(m.anchor)];
    let used: Vec<usize> = m.wires.iter().flatten().copied().collect();
    let mut free = (0..live).filter(|w| !used.contains(w));
    for w in m.wires.iter_mut().filter(|w| w.is_none()) {
        *w = free.next();
    }
}

/// Canonical ordering under deformation: ASAP time slots, ties broken by the
/// lowest wire; global phases first; controls sorted. `INIT` only occupies the
/// wire it creates; frees, discards and permutations are barriers.
pub fn deformation_normal_form(c: &Circuit) -> Circuit {
    let live = c.live_counts();
    let mut wire_slot: Vec<usize> = vec![];
    let mut barrier = 0usize;
    let mut keyed = vec![];
    for (i, g) in c.gates.iter().enumerate() {
        let mut g = g.clone();
        g.controls.sort();
        let width = live[i].max(live[i + 1]);
        if wire_slot.len() < width {
            wire_slot.resize(width, barrier);
        }
        let slot = match effective_wires(&g, live[i]) {
            _ if matches!(g.kind, GateKind::GlobalPhase(_)) => 0,
            Some(ws) => {
                let s = 1 + ws.iter().map(|&w| wire_slot[w]).max().unwrap_or(barrier).max(barrier);
                for &w in &ws {
                    wire_slot[w] = s;
                }
                s
            }
            _ => {
                let s = 1 + wire_slot.iter().copied().max().unwrap_or(0).max(barrier);
                barrier = s;
                wire_slot.iter_mut().for_each(|x| *x = s);
                s
            }
        };
        let min_wire = match g.kind {
            GateKind::Init => live[i],
            _ if g.kind.is_structural() => 0,
            _ => g.wires().into_iter().min().unwrap_or(0),
        };
        keyed.push(((slot, min_wire), g));
    }
    keyed.sort_by_key(|(k, _)| *k);
    Circuit { theory: c.theory, n_in: c.n_in, gates: keyed.into_iter().map(|(_, g)| g).collect() }
}

/// Structural equality with angles compared modulo their period.
pub fn same_circuit(a: &Circuit, b: &Circuit, tol: f64) -> bool {
    a.n_in == b.n_in
        && a.gates.len() == b.gates.len()
        && a.gates.iter().zip(&b.gates).all(|(x, y)| {
            let mut xc = x.controls.clone();
            let mut yc = y.controls.clone();
            xc.sort();
            yc.sort();
            x.kind.same_shape(&y.kind)
                && x.targets == y.targets
                && xc == yc
                && match (&x.kind, &y.kind) {
                    (GateKind::Permute(p), GateKind::Permute(q)) => p == q,
                    _ => match (x.angle(), y.angle()) {
                        (Some(u), Some(v)) => angle_dist(u, v, x.kind.period()) < tol,
                        _ => true,
                    },
                }
        })
}

// ---------------------------------------------------------------- derivations

#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub rule: String,
    pub reversed: bool,
    pub anchor: usize,
    pub hints: Vec<usize>,
    pub wires: Option<Vec<usize>>,
    pub params: Vec<(String, f64)>,
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct Derivation {
    pub name: String,
    pub start: String,
    pub end: String,
    pub steps: Vec<Step>,
}

pub fn parse_derivation(text: &str) -> Result<Derivation> {
    let perr = |line: usize, msg: String| Error::Parse { line, msg };
    let (mut name, mut start, mut end) = (None, None, None);
    let mut steps = vec![];
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap().trim();
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        match toks.next().unwrap() {
            "derivation" => name = Some(toks.collect::<Vec<_>>().join(" ")),
            "start" => start = toks.next().map(String::from),
            "end" => end = toks.next().map(String::from),
            "step" => {
                let rule = toks.next().ok_or_else(|| perr(line, "step without rule".into()))?.to_string();
                let reversed = match toks.next() {
                    Some("L2R") => false,
                    Some("R2L") => true,
                    other => return Err(perr(line, format!("expected L2R or R2L, got {other:?}"))),
                };
                let mut step = Step { rule, reversed, anchor: 0, hints: vec![], wires: None, params: vec![], line };
                for t in toks {
                    if let Some(a) = t.strip_prefix('@') {
                        step.anchor = a.parse().map_err(|_| perr(line, format!("bad anchor `{t}`")))?;
                    } else if let Some(w) = t.strip_prefix("wires=") {
                        let ws = w
                            .split(',')
                            .map(|x| x.trim().parse::<usize>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| perr(line, format!("bad wires `{w}`")))?;
                        step.wires = Some(ws);
                    } else if let Some(ps) = t.strip_prefix("params=") {
                        for item in ps.split(',') {
                            let (n, v) = item.split_once('=').ok_or_else(|| perr(line, format!("bad param `{item}`")))?;
                            let v = parse_angle(v).map_err(|e| perr(line, e))?;
                            step.params.push((n.to_string(), v));
                        }
                    } else {
                        return Err(perr(line, format!("unexpected `{t}`")));
                    }
                }
                steps.push(step);
            }
            other => return Err(perr(line, format!("unknown directive `{other}`"))),
        }
    }
    Ok(Derivation {
        name: name.ok_or_else(|| perr(0, "missing `derivation` line".into()))?,
        start: start.ok_or_else(|| perr(0, "missing `start` line".into()))?,
        end: end.ok_or_else(|| perr(0, "missing `end` line".into()))?,
        steps,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct StepReport {
    pub index: usize,
    pub rule: String,
    pub direction: &'static str,
    pub anchor: usize,
    pub deviation: Option<f64>,
    pub circuit: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReplayReport {
    pub name: String,
    pub steps: Vec<StepReport>,
    pub max_deviation: f64,
    pub pass: bool,
}

/// Apply one step: search near the anchor, then rewrite.
pub fn apply_step(c: &Circuit, step: &Step) -> Result<(Circuit, usize)> {
    let schema = rules::rule_in(&step.rule, c.theory)?;
    let hints = Hints { wires: step.wires.clone(), params: step.params.clone() };
    let a = step.anchor as isize;
    let mut last_err = None;
    for d in [0isize, -1, 1, -2, 2] {
        let anchor = a + d;
        if anchor < 0 {
            continue;
        }
        let matches = find_matches_at(c, &schema, step.reversed, anchor as usize, &hints, DEFAULT_WINDOW)?;
        for m in matches {
            match apply(c, &schema, &m) {
                Ok(out) => return Ok((out, anchor as usize)),
                Err(e) => last_err = Some(e),
            }
        }
    }
    Err(last_err.unwrap_or_else(|| Error::InvalidInput(format!("no match of {} near @{}", step.rule, step.anchor))))
}

/// Replay a derivation from an explicit start and expected end.
pub fn replay(d: &Derivation, start: &Circuit, end: &Circuit, opts: EvalOptions) -> Result<ReplayReport> {
    let mut c = start.clone();
    let mut reports = vec![];
    let mut worst = 0.0f64;
    for (i, step) in d.steps.iter().enumerate() {
        let fail = |reason: String| Error::StepFailed { index: i + 1, reason: format!("line {}: {reason}", step.line) };
        let (next, anchor) = apply_step(&c, step).map_err(|e| fail(e.to_string()))?;
        let deviation = match circuit_deviation(&c, &next, opts) {
            Ok((_, dev)) => {
                if dev > 1e-9 {
                    return Err(fail(format!("semantics changed by {dev:.3e}")));
                }
                Some(dev)
            }
            Err(Error::DimensionCap { .. }) => None,
            Err(e) => return Err(fail(e.to_string())),
        };
        worst = worst.max(deviation.unwrap_or(0.0));
        reports.push(StepReport {
            index: i + 1,
            rule: step.rule.clone(),
            direction: if step.reversed { "R2L" } else { "L2R" },
            anchor,
            deviation,
            circuit: crate::format::format_circuit(&next),
        });
        c = next;
    }
    let got = deformation_normal_form(&c);
    let want = deformation_normal_form(end);
    if !same_circuit(&got, &want, 1e-9) {
        return Err(Error::StepFailed {
            index: d.steps.len() + 1,
            reason: format!(
                "final circuit differs from the expected end\n--- got\n{}--- expected\n{}",
                crate::format::format_circuit(&got),
                crate::format::format_circuit(&want)
            ),
        });
    }
    Ok(ReplayReport { name: d.name.clone(), steps: reports, max_deviation: worst, pass: true })
}

/// Replay a script from disk, resolving `start`/`end` relative to it.
pub fn replay_file(path: &std::path::Path, opts: EvalOptions) -> Result<ReplayReport> {
    let text = std::fs::read_to_string(path)?;
    let d = parse_derivation(&text)?;
    let dir = path.parent().unwrap_or(std::path::Path::new("."));
    let start = crate::format::parse_any(&std::fs::read_to_string(dir.join(&d.start))?)?;
    let end = crate::format::parse_any(&std::fs::read_to_string(dir.join(&d.end))?)?;
    replay(&d, &start, &end, opts)
}

/// Derivations shipped with the library: `(script, start circuit, end circuit)`.
pub fn shipped_derivations() -> Vec<(&'static str, &'static str, &'static str)> {
    macro_rules! ship {
        ($n:literal) => {
            (
                include_str!(concat!("../derivations/", $n, ".deriv")),
                include_str!(concat!("../derivations/", $n, ".start.qc")),
                include_str!(concat!("../derivations/", $n, ".end.qc")),
            )
        };
    }
    vec![ship!("XX"), ship!("ZZ"), ship!("CNOTCNOT"), ship!("CNOTSWAP"), ship!("RXcommutCNOT"), ship!("ctrlPinit")]
}

pub fn replay_shipped(opts: EvalOptions) -> Vec<(String, Result<ReplayReport>)> {
    shipped_derivations()
        .into_iter()
        .map(|(script, s, e)| {
            let parsed = parse_derivation(script);
            let name = parsed.as_ref().map(|d| d.name.clone()).unwrap_or_else(|_| "?".into());
            let res = parsed.and_then(|d| {
                let start = crate::format::parse_any(s)?;
                let end = crate::format::parse_any(e)?;
                replay(&d, &start, &end, opts)
            });
            (name, res)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_circuit;
    use crate::rules::rule;

    fn qc(text: &str) -> Circuit {
        parse_circuit(text).unwrap()
    }

    #[test]
    fn hh_matches_c_once() {
        let c = qc("qubits 1\nH 0\nH 0\n");
        let m = find_matches(&c, &rule("C").unwrap(), false);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].anchor, 0);
        let out = apply(&c, &rule("C").unwrap(), &m[0]).unwrap();
        assert!(out.gates.is_empty());
    }

    #[test]
    fn phase_gate_blocks_c() {
        let c = qc("qubits 1\nH 0\nP(0.3) 0\nH 0\n");
        assert!(find_matches(&c, &rule("C").unwrap(), false).is_empty());
    }

    #[test]
    fn g_matches_directly() {
        let c = qc("qubits 2\nCX 0 1\nP(0.7) 0\nCX 0 1\n");
        let m = find_matches(&c, &rule("G").unwrap(), false);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].gates, vec![0, 1, 2]);
    }

    #[test]
    fn swap_to_three_cnots() {
        let c = qc("qubits 2\nSWAP 0 1\n");
        let e = rule("E").unwrap();
        let m = find_matches(&c, &e, true);
        assert!(!m.is_empty());
        let out = apply(&c, &e, &m[0]).unwrap();
        assert_eq!(out.gates.len(), 3);
        assert!(circuit_deviation(&c, &out, EvalOptions::default()).unwrap().1 < 1e-12);
    }

    #[test]
    fn commutes_disjoint_gates_out_of_the_way() {
        let c = qc("qubits 2\nH 0\nP(0.2) 1\nH 0\n");
        let m = find_matches(&c, &rule("C").unwrap(), false);
        assert_eq!(m.len(), 1);
        let out = apply(&c, &rule("C").unwrap(), &m[0]).unwrap();
        assert_eq!(out.gates.len(), 1);
    }

    #[test]
    fn init_rules_match_across_unrelated_gates() {
        let c = qc("qubits 1\ntheory qciso\nINIT\nH 0\nP(0.4) 1\n");
        let l = rule("L").unwrap();
        let m = find_matches(&c, &l, false);
        assert_eq!(m.len(), 1);
        let out = apply(&c, &l, &m[0]).unwrap();
        assert_eq!(format_gates(&out), vec!["H 0", "INIT"]);
    }

    fn format_gates(c: &Circuit) -> Vec<String> {
        c.gates.iter().map(crate::format::format_gate).collect()
    }

    #[test]
    fn normal_form_examples() {
        let c = qc("qubits 2\nH 1\nH 0\n");
        assert_eq!(format_gates(&deformation_normal_form(&c)), vec!["H 0", "H 1"]);
        let c = qc("qubits 3\nCX 0 1\nH 2\n");
        assert_eq!(format_gates(&deformation_normal_form(&c)), vec!["CX 0 1", "H 2"]);
    }

    #[test]
    fn single_step_derivation() {
        let d = parse_derivation("derivation HH\nstart a\nend b\nstep C L2R @0\n").unwrap();
        let r = replay(&d, &qc("qubits 1\nH 0\nH 0\n"), &qc("qubits 1\n"), EvalOptions::default()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn shipped_derivations_replay() {
        for (name, res) in replay_shipped(EvalOptions::default()) {
            if let Err(e) = res {
                panic!("{name}: {e}");
            }
        }
    }
}
