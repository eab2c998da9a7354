//! Parse a circuit from text and print its unitary.

use qceq::format::{format_matrix, parse_circuit};
use qceq::semantics::eval_unitary;

const BELL: &str = "
qubits 2
H 0
CX 0 1
";

fn main() -> qceq::error::Result<()> {
    let c = parse_circuit(BELL)?;
    let u = eval_unitary(&c)?;
    println!("{} gates on {} wires", c.len(), c.n_in);
    print!("{}", format_matrix(&u));
    Ok(())
}
