//! Discarding a copied wire measures: the channel kills off-diagonal terms.

use qceq::format::{format_matrix, parse_circuit};
use qceq::semantics::{apply_superop, eval_cptp, is_cptp, Matrix, C64};

fn main() -> qceq::error::Result<()> {
    let measure = parse_circuit("qubits 1\ntheory qcground\nINIT\nCX 0 1\nDISCARD 1\n")?;
    let s = eval_cptp(&measure)?;
    println!("CPTP: {}", is_cptp(&s, 1e-9));
    let rho = Matrix::from_row_slice(2, 2, &[C64::new(0.6, 0.0), C64::new(0.2, 0.1), C64::new(0.2, -0.1), C64::new(0.4, 0.0)]);
    print!("in:\n{}out:\n{}", format_matrix(&rho), format_matrix(&apply_superop(&s, &rho)));
    Ok(())
}
