//! File formats: the line-oriented circuit text format, its JSON mirror, and
//! the plain-text complex matrix dump.
//!
//! ```text
//! qubits 3
//! theory qcancilla
//! H 0
//! CTRL[+0,-2] P(pi/4) 1
//! INIT
//! FREE 3
//! ```

use serde::{Deserialize, Serialize};

use crate::angle::{format_angle, parse_affine, Affine, ParamTable};
use crate::circuit::{validate_gate, Circuit, Control, Gate, GateKind, Theory};
use crate::error::{Error, Result};
use crate::semantics::{Matrix, C64};

fn perr(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parse a single gate (without trailing comment). Angles go through `table`,
/// so templates may mention named parameters.
pub fn parse_gate(text: &str, table: &mut ParamTable) -> std::result::Result<(Gate, Option<Affine>), String> {
    let text = text.trim();
    let (controls, rest) = if let Some(stripped) = text.strip_prefix("CTRL[") {
        let close = stripped.find(']').ok_or("missing `]` in CTRL[...]")?;
        let mut cs = vec![];
        for item in stripped[..close].split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (positive, num) = match item.as_bytes()[0] {
                b'+' => (true, &item[1..]),
                b'-' => (false, &item[1..]),
                _ => (true, item),
            };
            let wire = num.trim().parse().map_err(|_| format!("bad control `{item}`"))?;
            cs.push(Control { wire, positive });
        }
        (cs, stripped[close + 1..].trim())
    } else {
        (vec![], text)
    };
    // split "NAME(expr) args" — the angle may contain spaces
    let (head, angle, args) = match rest.find('(') {
        Some(open) if !rest[..open].contains(char::is_whitespace) => {
            let close = matching_paren(rest, open).ok_or("unbalanced parentheses")?;
            (&rest[..open], Some(&rest[open + 1..close]), &rest[close + 1..])
        }
        _ => {
            let mut it = rest.splitn(2, char::is_whitespace);
            (it.next().unwrap_or(""), None, it.next().unwrap_or(""))
        }
    };
    let wires: Vec<usize> = args
        .split_whitespace()
        .map(|w| w.parse().map_err(|_| format!("bad wire `{w}`")))
        .collect::<std::result::Result<_, _>>()?;
    let expr = match angle {
        Some(a) => Some(parse_affine(a, table)?),
        None => None,
    };
    let name = head.to_ascii_uppercase();
    let needs_angle = matches!(name.as_str(), "P" | "RX" | "PHASE");
    if needs_angle != expr.is_some() {
        return Err(if needs_angle { format!("{name} needs an angle") } else { format!("{name} takes no angle") });
    }
    let a = expr.as_ref().map(|e| if e.is_const() { e.constant } else { 0.0 }).unwrap_or(0.0);
    let mut controls = controls;
    let (kind, targets) = match name.as_str() {
        "H" => (GateKind::H, wires),
        "P" => (GateKind::P(a), wires),
        "RX" => (GateKind::Rx(a), wires),
        "X" => (GateKind::X, wires),
        "Z" => (GateKind::Z, wires),
        "PHASE" => (GateKind::GlobalPhase(a), wires),
        "CX" | "CNOT" => (GateKind::CNot, wires),
        "CZ" => {
            if wires.len() != 2 {
                return Err("CZ expects 2 wires".into());
            }
            controls.push(Control::pos(wires[0]));
            (GateKind::Z, vec![wires[1]])
        }
        "CCX" | "TOF" | "TOFFOLI" => (GateKind::Toffoli, wires),
        "SWAP" => {
            let mut w = wires;
            if w.len() == 2 && w[0] > w[1] {
                w.swap(0, 1);
            }
            (GateKind::Swap, w)
        }
        "CSWAP" | "FREDKIN" => (GateKind::Fredkin, wires),
        "INIT" => (GateKind::Init, wires),
        "FREE" => (GateKind::Free, wires),
        "DISCARD" => (GateKind::Discard, wires),
        "PERM" => (GateKind::Permute(wires), vec![]),
        "" => return Err("empty gate".into()),
        other => return Err(format!("unknown gate `{other}`")),
    };
    let g = Gate { kind, targets, controls };
    if g.targets.len() != g.kind.n_targets() {
        return Err(format!("{name} expects {} wire(s)", g.kind.n_targets()));
    }
    Ok((g, expr.filter(|e| !e.is_const())))
}

fn matching_paren(s: &str, open: usize) -> Option<usize> {
    let mut depth = 0;
    for (i, c) in s.char_indices().skip(open) {
        match c {
            '(' => depth += 1,
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i);
                }
            }
            _ => {}
        }
    }
    None
}

/// Parse the text circuit format, checking wire bookkeeping line by line.
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut n_in = None;
    let mut theory = Theory::Qc;
    let mut gates = vec![];
    let mut live = 0;
    let mut table = ParamTable::closed();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let lower = line.to_ascii_lowercase();
        if let Some(rest) = lower.strip_prefix("qubits") {
            if n_in.is_some() || !gates.is_empty() {
                return Err(perr(line_no, "`qubits` must appear once, before any gate"));
            }
            let n: usize = rest.trim().parse().map_err(|_| perr(line_no, "bad qubit count"))?;
            n_in = Some(n);
            live = n;
            continue;
        }
        if let Some(rest) = lower.strip_prefix("theory") {
            if !gates.is_empty() {
                return Err(perr(line_no, "`theory` must appear before any gate"));
            }
            theory = Theory::parse(rest.trim()).ok_or_else(|| perr(line_no, format!("unknown theory `{}`", rest.trim())))?;
            continue;
        }
        if n_in.is_none() {
            return Err(perr(line_no, "missing `qubits <n>` header"));
        }
        let (g, _) = parse_gate(line, &mut table).map_err(|m| perr(line_no, m))?;
        validate_gate(&g, live, theory).map_err(|m| perr(line_no, m))?;
        match g.kind {
            GateKind::Init => live += 1,
            GateKind::Free | GateKind::Discard => live -= 1,
            _ => {}
        }
        gates.push(g);
    }
    let n_in = n_in.ok_or_else(|| perr(1, "missing `qubits <n>` header"))?;
    Ok(Circuit { theory, n_in, gates })
}

pub fn format_gate(g: &Gate) -> String {
    format_gate_with(g, None, &[])
}

pub(crate) fn format_gate_with(g: &Gate, expr: Option<&Affine>, names: &[String]) -> String {
    let mut s = String::new();
    if !g.controls.is_empty() {
        let cs: Vec<String> =
            g.controls.iter().map(|c| format!("{}{}", if c.positive { '+' } else { '-' }, c.wire)).collect();
        s.push_str(&format!("CTRL[{}] ", cs.join(",")));
    }
    s.push_str(g.kind.name());
    if let Some(a) = g.angle() {
        let text = match expr {
            Some(e) => e.render(names),
            None => format_angle(a),
        };
        s.push_str(&format!("({text})"));
    }
    let wires: Vec<usize> = match &g.kind {
        GateKind::Permute(p) => p.clone(),
        _ => g.targets.clone(),
    };
    for w in wires {
        s.push_str(&format!(" {w}"));
    }
    s
}

pub fn format_circuit(c: &Circuit) -> String {
    let mut s = format!("qubits {}\ntheory {}\n", c.n_in, c.theory);
    for g in &c.gates {
        s.push_str(&format_gate(g));
        s.push('\n');
    }
    s
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct JsonGate {
    pub gate: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default)]
    pub targets: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub controls: Vec<Control>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct JsonCircuit {
    pub qubits: usize,
    pub theory: Theory,
    pub gates: Vec<JsonGate>,
}

pub fn to_json(c: &Circuit) -> JsonCircuit {
    let gates = c
        .gates
        .iter()
        .map(|g| JsonGate {
            gate: g.kind.name().to_string(),
            angle: g.angle(),
            targets: match &g.kind {
                GateKind::Permute(p) => p.clone(),
                _ => g.targets.clone(),
            },
            controls: g.controls.clone(),
        })
        .collect();
    JsonCircuit { qubits: c.n_in, theory: c.theory, gates }
}

fn kind_from_name(name: &str, angle: Option<f64>) -> std::result::Result<GateKind, String> {
    let a = angle.unwrap_or(0.0);
    let needs_angle = matches!(name, "P" | "RX" | "PHASE");
    if needs_angle != angle.is_some() {
        return Err(if needs_angle { format!("{name} needs an angle") } else { format!("{name} takes no angle") });
    }
    Ok(match name {
        "H" => GateKind::H,
        "P" => GateKind::P(a),
        "RX" => GateKind::Rx(a),
        "X" => GateKind::X,
        "Z" => GateKind::Z,
        "PHASE" => GateKind::GlobalPhase(a),
        "CX" | "CNOT" => GateKind::CNot,
        "CCX" | "TOF" | "TOFFOLI" => GateKind::Toffoli,
        "SWAP" => GateKind::Swap,
        "CSWAP" | "FREDKIN" => GateKind::Fredkin,
        "INIT" => GateKind::Init,
        "FREE" => GateKind::Free,
        "DISCARD" => GateKind::Discard,
        other => return Err(format!("unknown gate `{other}`")),
    })
}

pub fn from_json(j: &JsonCircuit) -> Result<Circuit> {
    let mut gates = vec![];
    let mut live = j.qubits;
    for (index, g) in j.gates.iter().enumerate() {
        let name = g.gate.to_ascii_uppercase();
        let bad = |msg: String| Error::Parse { line: index + 1, msg: format!("gate {index}: {msg}") };
        let gate = if name == "PERM" {
            Gate::permute(g.targets.clone())
        } else {
            let kind = kind_from_name(&name, g.angle).map_err(bad)?;
            let mut targets = g.targets.clone();
            if kind == GateKind::Swap && targets.len() == 2 && targets[0] > targets[1] {
                targets.swap(0, 1);
            }
            Gate { kind, targets, controls: g.controls.clone() }
        };
        validate_gate(&gate, live, j.theory).map_err(bad)?;
        match gate.kind {
            GateKind::Init => live += 1,
            GateKind::Free | GateKind::Discard => live -= 1,
            _ => {}
        }
        gates.push(gate);
    }
    Ok(Circuit { theory: j.theory, n_in: j.qubits, gates })
}

/// Accepts either the text format or its JSON mirror.
pub fn parse_any(text: &str) -> Result<Circuit> {
    if text.trim_start().starts_with('{') {
        let j: JsonCircuit = serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
        from_json(&j)
    } else {
        parse_circuit(text)
    }
}

pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let s = s.trim();
    let bad = || format!("bad complex number `{s}`");
    let body = match s.strip_suffix(['j', 'i']) {
        None => return s.parse::<f64>().map(|r| C64::new(r, 0.0)).map_err(|_| bad()),
        Some(b) => b,
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let im_of = |t: &str| -> std::result::Result<f64, String> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            t => t.parse().map_err(|_| bad()),
        }
    };
    match split {
        Some(k) => Ok(C64::new(body[..k].parse().map_err(|_| bad())?, im_of(&body[k..])?)),
        None => Ok(C64::new(0.0, im_of(body)?)),
    }
}

pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{sign}{:?}j", z.re, z.im.abs())
}

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<C64>> = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(parse_complex)
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|m| perr(i + 1, m))?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(perr(i + 1, format!("row has {} entries, expected {}", row.len(), first.len())));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(perr(1, "empty matrix"));
    }
    let (r, c) = (rows.len(), rows[0].len());
    Ok(Matrix::from_fn(r, c, |i, j| rows[i][j]))
}

pub fn format_matrix(m: &Matrix) -> String {
    let mut s = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_complex(m[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}
