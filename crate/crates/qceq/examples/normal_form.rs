//! Commuting disjoint gates into a canonical order, and controlling a circuit.

use qceq::circuit::controlize;
use qceq::format::{format_circuit, parse_circuit};
use qceq::rewrite::deformation_normal_form;

fn main() -> qceq::error::Result<()> {
    let a = parse_circuit("qubits 3\nH 2\nX 0\nP(0.5) 1\nCX 0 1\n")?;
    let b = parse_circuit("qubits 3\nP(0.5) 1\nX 0\nCX 0 1\nH 2\n")?;
    let (na, nb) = (deformation_normal_form(&a), deformation_normal_form(&b));
    println!("same normal form: {}", na == nb);
    print!("{}", format_circuit(&na));
    let hp = parse_circuit("qubits 1\nH 0\nP(0.25) 0\n")?;
    print!("controlled:\n{}", format_circuit(&controlize(&hp)?));
    Ok(())
}
