//! Find every place a rule applies in a circuit and rewrite at one of them.

use qceq::format::{format_circuit, parse_circuit};
use qceq::rewrite::{apply, find_matches};
use qceq::rules::rule;
use qceq::semantics::{circuit_deviation, EvalOptions};

fn main() -> qceq::error::Result<()> {
    let c = parse_circuit("qubits 3\nCX 0 1\nP(0.4) 0\nH 2\nCX 0 1\n")?;
    // CX P(φ) CX = P(φ) on the control
    let g = rule("G")?;
    let matches = find_matches(&c, &g, false);
    println!("{} match(es) of G", matches.len());
    let Some(m) = matches.first() else { return Ok(()) };
    let out = apply(&c, &g, m)?;
    print!("before:\n{}after:\n{}", format_circuit(&c), format_circuit(&out));
    let (_, dev) = circuit_deviation(&c, &out, EvalOptions::default())?;
    println!("semantic deviation {dev:.1e}");
    Ok(())
}
