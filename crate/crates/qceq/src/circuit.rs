//! Circuit IR shared by every theory.
//!
//! Wires are positional: wire 0 is the most significant bit of a basis index.
//! `Init` appends a new highest-index wire, `Free(k)` / `Discard(k)` remove wire
//! `k` and shift the wires above it down by one, and `Permute` relabels wires.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Theory {
    #[serde(rename = "qc")]
    Qc,
    #[serde(rename = "qciso")]
    QcIso,
    #[serde(rename = "qcancilla")]
    QcAncilla,
    #[serde(rename = "qcground")]
    QcGround,
}

impl Theory {
    pub const ALL: [Theory; 4] = [Theory::Qc, Theory::QcIso, Theory::QcAncilla, Theory::QcGround];

    pub fn name(self) -> &'static str {
        match self {
            Theory::Qc => "qc",
            Theory::QcIso => "qciso",
            Theory::QcAncilla => "qcancilla",
            Theory::QcGround => "qcground",
        }
    }

    pub fn parse(s: &str) -> Option<Theory> {
        match s.to_ascii_lowercase().as_str() {
            "qc" | "vanilla" => Some(Theory::Qc),
            "qciso" | "iso" => Some(Theory::QcIso),
            "qcancilla" | "ancilla" => Some(Theory::QcAncilla),
            "qcground" | "ground" | "discard" => Some(Theory::QcGround),
            _ => None,
        }
    }

    /// Whether every circuit of `self` is also a circuit of `other`.
    pub fn embeds_in(self, other: Theory) -> bool {
        use Theory::*;
        match (self, other) {
            (a, b) if a == b => true,
            (Qc, _) => true,
            (QcIso, QcAncilla | QcGround) => true,
            _ => false,
        }
    }

    fn allows(self, kind: &GateKind) -> bool {
        use GateKind::*;
        match kind {
            Init => self != Theory::Qc,
            Free => self == Theory::QcAncilla,
            Discard => self == Theory::QcGround,
            GlobalPhase(_) => self != Theory::QcGround,
            _ => true,
        }
    }
}

impl fmt::Display for Theory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    GlobalPhase(f64),
    H,
    P(f64),
    CNot,
    Swap,
    Init,
    Free,
    Discard,
    X,
    Z,
    Rx(f64),
    Toffoli,
    Fredkin,
    /// `perm[i]` is the new position of wire `i`.
    Permute(Vec<usize>),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        use GateKind::*;
        match self {
            GlobalPhase(_) => "PHASE",
            H => "H",
            P(_) => "P",
            CNot => "CX",
            Swap => "SWAP",
            Init => "INIT",
            Free => "FREE",
            Discard => "DISCARD",
            X => "X",
            Z => "Z",
            Rx(_) => "RX",
            Toffoli => "CCX",
            Fredkin => "CSWAP",
            Permute(_) => "PERM",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            GateKind::GlobalPhase(a) | GateKind::P(a) | GateKind::Rx(a) => Some(*a),
            _ => None,
        }
    }

    pub fn with_angle(&self, a: f64) -> GateKind {
        match self {
            GateKind::GlobalPhase(_) => GateKind::GlobalPhase(a),
            GateKind::P(_) => GateKind::P(a),
            GateKind::Rx(_) => GateKind::Rx(a),
            k => k.clone(),
        }
    }

    /// Period of the angle: 2π for phases, 4π for `Rx`.
    pub fn period(&self) -> f64 {
        match self {
            GateKind::Rx(_) => 4.0 * PI,
            _ => 2.0 * PI,
        }
    }

    pub fn n_targets(&self) -> usize {
        use GateKind::*;
        match self {
            GlobalPhase(_) | Init | Permute(_) => 0,
            H | P(_) | X | Z | Rx(_) | Free | Discard => 1,
            CNot | Swap => 2,
            Toffoli | Fredkin => 3,
        }
    }

    pub fn controllable(&self) -> bool {
        matches!(self, GateKind::P(_) | GateKind::Rx(_) | GateKind::X | GateKind::Z | GateKind::Swap)
    }

    /// Init / Free / Discard / Permute change the wire layout.
    pub fn is_structural(&self) -> bool {
        matches!(self, GateKind::Init | GateKind::Free | GateKind::Discard | GateKind::Permute(_))
    }

    pub fn same_shape(&self, other: &GateKind) -> bool {
        std::mem::discriminant(self) == std::mem::discriminant(other)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Control {
    pub wire: usize,
    pub positive: bool,
}

impl Control {
    pub fn pos(wire: usize) -> Self {
        Control { wire, positive: true }
    }

    pub fn neg(wire: usize) -> Self {
        Control { wire, positive: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: &[usize]) -> Self {
        Gate { kind, targets: targets.to_vec(), controls: vec![] }
    }

    pub fn phase(a: f64) -> Self {
        Gate::new(GateKind::GlobalPhase(a), &[])
    }
    pub fn h(q: usize) -> Self {
        Gate::new(GateKind::H, &[q])
    }
    pub fn p(q: usize, a: f64) -> Self {
        Gate::new(GateKind::P(a), &[q])
    }
    pub fn rx(q: usize, a: f64) -> Self {
        Gate::new(GateKind::Rx(a), &[q])
    }
    pub fn x(q: usize) -> Self {
        Gate::new(GateKind::X, &[q])
    }
    pub fn z(q: usize) -> Self {
        Gate::new(GateKind::Z, &[q])
    }
    pub fn cnot(c: usize, t: usize) -> Self {
        Gate::new(GateKind::CNot, &[c, t])
    }
    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, &[a.min(b), a.max(b)])
    }
    pub fn toffoli(c1: usize, c2: usize, t: usize) -> Self {
        Gate::new(GateKind::Toffoli, &[c1, c2, t])
    }
    pub fn fredkin(c: usize, a: usize, b: usize) -> Self {
        Gate::new(GateKind::Fredkin, &[c, a, b])
    }
    pub fn init() -> Self {
        Gate::new(GateKind::Init, &[])
    }
    pub fn free(q: usize) -> Self {
        Gate::new(GateKind::Free, &[q])
    }
    pub fn discard(q: usize) -> Self {
        Gate::new(GateKind::Discard, &[q])
    }
    pub fn permute(perm: Vec<usize>) -> Self {
        Gate::new(GateKind::Permute(perm), &[])
    }

    /// Multi-controlled phase with positive controls.
    pub fn mcp(controls: &[usize], t: usize, a: f64) -> Self {
        Gate::p(t, a).ctrl(controls.iter().map(|&w| Control::pos(w)))
    }

    /// Multi-controlled X-rotation with positive controls.
    pub fn mcrx(controls: &[usize], t: usize, a: f64) -> Self {
        Gate::rx(t, a).ctrl(controls.iter().map(|&w| Control::pos(w)))
    }

    pub fn ctrl(mut self, cs: impl IntoIterator<Item = Control>) -> Self {
        self.controls.extend(cs);
        self
    }

    pub fn angle(&self) -> Option<f64> {
        self.kind.angle()
    }

    /// Every wire the gate touches (targets, then controls).
    pub fn wires(&self) -> Vec<usize> {
        let mut w = self.targets.clone();
        w.extend(self.controls.iter().map(|c| c.wire));
        w
    }

    pub fn touches(&self, q: usize) -> bool {
        self.targets.contains(&q) || self.controls.iter().any(|c| c.wire == q)
    }

    /// Two gates commute by deformation when they share no wire and neither
    /// rearranges the wires. Phases commute with everything unitary.
    pub fn disjoint(&self, other: &Gate) -> bool {
        if self.kind.is_structural() || other.kind.is_structural() {
            return false;
        }
        !self.wires().iter().any(|&q| other.touches(q))
    }

    pub fn map_wires(&self, f: impl Fn(usize) -> usize) -> Gate {
        let mut g = self.clone();
        for t in &mut g.targets {
            *t = f(*t);
        }
        for c in &mut g.controls {
            c.wire = f(c.wire);
        }
        if g.kind == GateKind::Swap && g.targets[0] > g.targets[1] {
            g.targets.swap(0, 1);
        }
        g
    }

    pub fn shifted(&self, by: usize) -> Gate {
        match &self.kind {
            GateKind::Permute(p) => {
                let mut full: Vec<usize> = (0..by).collect();
                full.extend(p.iter().map(|&x| x + by));
                Gate::permute(full)
            }
            _ => self.map_wires(|w| w + by),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub theory: Theory,
    pub n_in: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(theory: Theory, n_in: usize) -> Self {
        Circuit { theory, n_in, gates: vec![] }
    }

    pub fn from_gates(theory: Theory, n_in: usize, gates: Vec<Gate>) -> Result<Self> {
        let c = Circuit { theory, n_in, gates };
        c.validate()?;
        Ok(c)
    }

    pub fn with(mut self, g: Gate) -> Self {
        self.gates.push(g);
        self
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn n_out(&self) -> usize {
        self.live_counts().last().copied().unwrap_or(self.n_in)
    }

    /// Live wire count before gate `i`, for `i` in `0..=len`.
    pub fn live_counts(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.gates.len() + 1);
        let mut live = self.n_in as isize;
        out.push(self.n_in);
        for g in &self.gates {
            live += match g.kind {
                GateKind::Init => 1,
                GateKind::Free | GateKind::Discard => -1,
                _ => 0,
            };
            out.push(live.max(0) as usize);
        }
        out
    }

    /// Largest number of simultaneously live wires.
    pub fn width(&self) -> usize {
        self.live_counts().into_iter().max().unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        let mut live = self.n_in;
        for (index, g) in self.gates.iter().enumerate() {
            validate_gate(g, live, self.theory).map_err(|reason| Error::InvalidGate { index, reason })?;
            match g.kind {
                GateKind::Init => live += 1,
                GateKind::Free | GateKind::Discard => live -= 1,
                _ => {}
            }
        }
        Ok(())
    }

    pub fn retheory(mut self, theory: Theory) -> Self {
        self.theory = theory;
        self
    }

    pub fn has_structural(&self) -> bool {
        self.gates.iter().any(|g| matches!(g.kind, GateKind::Init | GateKind::Free | GateKind::Discard))
    }
}

pub(crate) fn validate_gate(g: &Gate, live: usize, theory: Theory) -> std::result::Result<(), String> {
    if !theory.allows(&g.kind) {
        return Err(format!("{} is not a generator of {}", g.kind.name(), theory));
    }
    if g.targets.len() != g.kind.n_targets() {
        return Err(format!("{} expects {} target(s), got {}", g.kind.name(), g.kind.n_targets(), g.targets.len()));
    }
    if !g.controls.is_empty() && !g.kind.controllable() {
        return Err(format!("{} cannot carry controls", g.kind.name()));
    }
    if let GateKind::Permute(p) = &g.kind {
        let mut seen = vec![false; live];
        if p.len() != live {
            return Err(format!("permutation of length {} on {} live wires", p.len(), live));
        }
        for &x in p {
            if x >= live || seen[x] {
                return Err("not a permutation".into());
            }
            seen[x] = true;
        }
    }
    if let Some(a) = g.angle() {
        if !a.is_finite() {
            return Err("non-finite angle".into());
        }
    }
    let ws = g.wires();
    for (i, &w) in ws.iter().enumerate() {
        if w >= live {
            return Err(format!("wire {w} is not live ({live} live wires)"));
        }
        if ws[..i].contains(&w) {
            return Err(format!("wire {w} used twice"));
        }
    }
    Ok(())
}

fn require_same_theory(a: &Circuit, b: &Circuit) -> Result<()> {
    if a.theory != b.theory {
        return Err(Error::TheoryMismatch(a.theory.to_string(), b.theory.to_string()));
    }
    Ok(())
}

/// Sequential composition: `a` first, then `b`.
pub fn compose_seq(a: &Circuit, b: &Circuit) -> Result<Circuit> {
    require_same_theory(a, b)?;
    if a.n_out() != b.n_in {
        return Err(Error::ArityMismatch(format!("{} outputs feed {} inputs", a.n_out(), b.n_in)));
    }
    let mut gates = a.gates.clone();
    gates.extend(b.gates.iter().cloned());
    Ok(Circuit { theory: a.theory, n_in: a.n_in, gates })
}

/// Parallel composition: `a` on the top wires, `b` below it.
pub fn tensor(a: &Circuit, b: &Circuit) -> Result<Circuit> {
    require_same_theory(a, b)?;
    let nb = b.n_in;
    let mut gates = vec![];
    let mut live_a = a.n_in;
    for g in &a.gates {
        match &g.kind {
            GateKind::Init => {
                // the fresh wire lands below b's wires; lift it above them
                gates.push(g.clone());
                let total = live_a + nb + 1;
                let mut perm: Vec<usize> = (0..total).collect();
                for (i, p) in perm.iter_mut().enumerate().take(total - 1).skip(live_a) {
                    *p = i + 1;
                }
                perm[total - 1] = live_a;
                if live_a + 1 != total {
                    gates.push(Gate::permute(perm));
                }
                live_a += 1;
            }
            GateKind::Permute(p) => {
                let mut full = p.clone();
                full.extend(live_a..live_a + nb);
                gates.push(Gate::permute(full));
            }
            GateKind::Free | GateKind::Discard => {
                gates.push(g.clone());
                live_a -= 1;
            }
            _ => gates.push(g.clone()),
        }
    }
    for g in &b.gates {
        gates.push(g.shifted(live_a));
    }
    Ok(Circuit { theory: a.theory, n_in: a.n_in + nb, gates })
}

fn inverse_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

/// Reversed circuit with negated angles.
pub fn adjoint(c: &Circuit) -> Result<Circuit> {
    if c.has_structural() {
        return Err(Error::UnsupportedTheory {
            theory: c.theory.to_string(),
            what: "adjoint of a circuit with Init/Free/Discard".into(),
        });
    }
    let gates = c
        .gates
        .iter()
        .rev()
        .map(|g| {
            let mut g = g.clone();
            g.kind = match &g.kind {
                GateKind::Permute(p) => GateKind::Permute(inverse_perm(p)),
                k => match k.angle() {
                    Some(a) => k.with_angle(-a),
                    None => k.clone(),
                },
            };
            g
        })
        .collect();
    Ok(Circuit { theory: c.theory, n_in: c.n_in, gates })
}

/// Angles reduced to `[0, 2π)` (phases) and `[0, 4π)` (`Rx`).
pub fn canonicalize(c: &Circuit) -> Circuit {
    let mut out = c.clone();
    for g in &mut out.gates {
        if let Some(a) = g.angle() {
            g.kind = g.kind.with_angle(crate::angle::wrap(a, g.kind.period()));
        }
    }
    out
}

/// Rewrite every derived gate into the generators of the circuit's theory.
pub fn expand_shortcuts(c: &Circuit) -> Circuit {
    let keep_phase = c.theory != Theory::QcGround;
    let mut gates = vec![];
    for g in &c.gates {
        expand_gate(g, keep_phase, &mut gates);
    }
    Circuit { theory: c.theory, n_in: c.n_in, gates }
}

fn czs(c: usize, t: usize) -> [Gate; 3] {
    [Gate::h(t), Gate::cnot(c, t), Gate::h(t)]
}

/// Expand one gate into primitive generators, appending to `out`.
pub fn expand_gate(g: &Gate, keep_phase: bool, out: &mut Vec<Gate>) {
    use GateKind::*;
    // negative controls: conjugate the wire by X
    if let Some(i) = g.controls.iter().position(|c| !c.positive) {
        let w = g.controls[i].wire;
        let mut inner = g.clone();
        inner.controls[i].positive = true;
        expand_gate(&Gate::x(w), keep_phase, out);
        expand_gate(&inner, keep_phase, out);
        expand_gate(&Gate::x(w), keep_phase, out);
        return;
    }
    let ctl: Vec<usize> = g.controls.iter().map(|c| c.wire).collect();
    let rest = |k: usize| -> Vec<Control> { ctl[..k].iter().map(|&w| Control::pos(w)).collect() };
    match (&g.kind, ctl.len()) {
        (GlobalPhase(a), _) => {
            if keep_phase {
                out.push(Gate::phase(*a));
            }
        }
        (H, _) | (CNot, _) | (Init, _) | (Free, _) | (Discard, _) | (Permute(_), _) => out.push(g.clone()),
        (P(_), 0) | (Swap, 0) => out.push(g.clone()),
        (X, 0) => {
            let t = g.targets[0];
            out.extend([Gate::h(t), Gate::p(t, PI), Gate::h(t)]);
        }
        (X, 1) => out.push(Gate::cnot(ctl[0], g.targets[0])),
        (X, _) => {
            let t = g.targets[0];
            out.push(Gate::h(t));
            expand_gate(&Gate::mcp(&ctl, t, PI), keep_phase, out);
            out.push(Gate::h(t));
        }
        (Z, _) => expand_gate(&Gate::mcp(&ctl, g.targets[0], PI), keep_phase, out),
        (Rx(a), 0) => {
            let t = g.targets[0];
            if keep_phase {
                out.push(Gate::phase(-a / 2.0));
            }
            out.extend([Gate::h(t), Gate::p(t, *a), Gate::h(t)]);
        }
        (Rx(a), k) => {
            // Λ_x Rx(θ/2); CZ(c,t); Λ_x Rx(−θ/2); CZ(c,t)
            let (t, c) = (g.targets[0], ctl[k - 1]);
            expand_gate(&Gate::rx(t, a / 2.0).ctrl(rest(k - 1)), keep_phase, out);
            out.extend(czs(c, t));
            expand_gate(&Gate::rx(t, -a / 2.0).ctrl(rest(k - 1)), keep_phase, out);
            out.extend(czs(c, t));
        }
        (P(a), k) => {
            // Λ_x P(φ/2)_c; H_t; Λ_{x,c} Rx(φ)_t; H_t
            let (t, c) = (g.targets[0], ctl[k - 1]);
            expand_gate(&Gate::p(c, a / 2.0).ctrl(rest(k - 1)), keep_phase, out);
            out.push(Gate::h(t));
            expand_gate(&Gate::rx(t, *a).ctrl(rest(k)), keep_phase, out);
            out.push(Gate::h(t));
        }
        (Swap, _) => {
            let (a, b) = (g.targets[0], g.targets[1]);
            out.push(Gate::cnot(b, a));
            let mut cs = rest(ctl.len());
            cs.push(Control::pos(a));
            expand_gate(&Gate::x(b).ctrl(cs), keep_phase, out);
            out.push(Gate::cnot(b, a));
        }
        (Toffoli, _) => {
            let (c1, c2, t) = (g.targets[0], g.targets[1], g.targets[2]);
            expand_gate(&Gate::x(t).ctrl([Control::pos(c1), Control::pos(c2)]), keep_phase, out);
        }
        (Fredkin, _) => {
            let (c, a, b) = (g.targets[0], g.targets[1], g.targets[2]);
            out.push(Gate::cnot(b, a));
            expand_gate(&Gate::toffoli(c, a, b), keep_phase, out);
            out.push(Gate::cnot(b, a));
        }
    }
}

/// Add one control (of either polarity) at wire `w` to `g`, producing gates whose
/// semantics is "apply `g` when wire `w` is in the chosen state". `g` must be a
/// primitive or controllable gate not touching `w`.
fn add_control(g: &Gate, w: Control, out: &mut Vec<Gate>) {
    use GateKind::*;
    let with = |g: &Gate| {
        let mut g = g.clone();
        g.controls.push(w);
        g
    };
    match &g.kind {
        GlobalPhase(a) => {
            if w.positive {
                out.push(Gate::p(w.wire, *a));
            } else {
                out.extend([Gate::x(w.wire), Gate::p(w.wire, *a), Gate::x(w.wire)]);
            }
        }
        P(_) | Rx(_) | X | Z | Swap => out.push(with(g)),
        CNot => out.push(with(&Gate::x(g.targets[1]).ctrl(g.controls.iter().copied().chain([Control::pos(g.targets[0])])))),
        Toffoli => out.push(with(
            &Gate::x(g.targets[2]).ctrl([Control::pos(g.targets[0]), Control::pos(g.targets[1])]),
        )),
        Fredkin => out.push(with(&Gate::swap(g.targets[1], g.targets[2]).ctrl([Control::pos(g.targets[0])]))),
        H => {
            let t = g.targets[0];
            for e in [Gate::p(t, FRAC_PI_2), Gate::rx(t, FRAC_PI_2), Gate::p(t, FRAC_PI_2)] {
                out.push(with(&e));
            }
        }
        Init | Free | Discard | Permute(_) => unreachable!("structural gates cannot be controlled"),
    }
}

/// Control the whole circuit on a fresh wire 0: `⟦result⟧ = diag(I, ⟦c⟧)`.
pub fn controlize(c: &Circuit) -> Result<Circuit> {
    controlize_with(c, true)
}

/// As [`controlize`], with the fresh wire acting as a negative control when
/// `positive` is false: `⟦result⟧ = diag(⟦c⟧, I)`.
pub fn controlize_with(c: &Circuit, positive: bool) -> Result<Circuit> {
    if c.theory != Theory::Qc || c.has_structural() {
        return Err(Error::UnsupportedTheory { theory: c.theory.to_string(), what: "controlize".into() });
    }
    let expanded = expand_shortcuts(c);
    let ctl = Control { wire: 0, positive };
    let mut gates = vec![];
    for g in &expanded.gates {
        let g = g.shifted(1);
        match g.kind {
            GateKind::Swap => {
                let (a, b) = (g.targets[0], g.targets[1]);
                for e in [Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)] {
                    add_control(&e, ctl, &mut gates);
                }
            }
            GateKind::Permute(_) => gates.push(g),
            _ => add_control(&g, ctl, &mut gates),
        }
    }
    Ok(Circuit { theory: Theory::Qc, n_in: c.n_in + 1, gates })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bookkeeping() {
        let c = Circuit::new(Theory::QcAncilla, 1).with(Gate::init()).with(Gate::cnot(0, 1)).with(Gate::free(1));
        assert_eq!(c.live_counts(), vec![1, 2, 2, 1]);
        assert_eq!(c.n_out(), 1);
        c.validate().unwrap();
        let bad = Circuit::new(Theory::Qc, 1).with(Gate::init());
        assert!(bad.validate().is_err());
        let bad = Circuit::new(Theory::Qc, 2).with(Gate::cnot(0, 0));
        assert!(bad.validate().is_err());
        let bad = Circuit::new(Theory::Qc, 2).with(Gate::h(0).ctrl([Control::pos(1)]));
        assert!(bad.validate().is_err());
        let bad = Circuit::new(Theory::QcGround, 1).with(Gate::phase(1.0));
        assert!(bad.validate().is_err());
    }

    #[test]
    fn adjoint_negates_phases() {
        let c = Circuit::new(Theory::Qc, 1).with(Gate::p(0, 0.7)).with(Gate::h(0));
        let a = adjoint(&c).unwrap();
        assert_eq!(a.gates, vec![Gate::h(0), Gate::p(0, -0.7)]);
        assert_eq!(adjoint(&a).unwrap(), c);
        let iso = Circuit::new(Theory::QcIso, 0).with(Gate::init());
        assert!(adjoint(&iso).is_err());
    }

    #[test]
    fn tensor_unit_and_shift() {
        let h = Circuit::new(Theory::Qc, 1).with(Gate::h(0));
        let e = Circuit::new(Theory::Qc, 0);
        assert_eq!(tensor(&e, &h).unwrap(), h);
        let hh = tensor(&h, &h).unwrap();
        assert_eq!(hh.gates, vec![Gate::h(0), Gate::h(1)]);
        assert_eq!(hh.n_in, 2);
    }

    #[test]
    fn compose_checks_arity() {
        let a = Circuit::new(Theory::QcIso, 0).with(Gate::init());
        let b = Circuit::new(Theory::QcIso, 2);
        assert!(matches!(compose_seq(&a, &b), Err(Error::ArityMismatch(_))));
        let c = Circuit::new(Theory::Qc, 1);
        assert!(matches!(compose_seq(&c, &c.clone().retheory(Theory::QcIso)), Err(Error::TheoryMismatch(..))));
    }

    #[test]
    fn expansion_is_primitive() {
        let c = Circuit::new(Theory::Qc, 4)
            .with(Gate::rx(0, 1.0))
            .with(Gate::toffoli(0, 1, 2))
            .with(Gate::fredkin(3, 1, 2))
            .with(Gate::p(3, 0.4).ctrl([Control::neg(0), Control::pos(2)]));
        let e = expand_shortcuts(&c);
        for g in &e.gates {
            assert!(g.controls.is_empty());
            assert!(matches!(g.kind, GateKind::H | GateKind::P(_) | GateKind::CNot | GateKind::GlobalPhase(_)));
        }
        let zero = Circuit::new(Theory::Qc, 1).with(Gate::mcp(&[], 0, 0.3));
        assert_eq!(expand_shortcuts(&zero).gates, vec![Gate::p(0, 0.3)]);
    }

    #[test]
    fn controlize_phase_goes_to_control_wire() {
        let c = Circuit::new(Theory::Qc, 0).with(Gate::phase(0.9));
        let k = controlize(&c).unwrap();
        assert_eq!(k.gates, vec![Gate::p(0, 0.9)]);
        assert_eq!(k.n_in, 1);
    }
}
