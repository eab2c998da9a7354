//! Numerically check each axiom of every theory on random parameters.

use qceq::circuit::Theory;
use qceq::rules::axiom_suite;
use qceq::semantics::EvalOptions;

fn main() {
    for theory in Theory::ALL {
        let rows = axiom_suite(theory, 10, 1, EvalOptions::default(), 1e-9);
        let worst = rows.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
        let failing: Vec<&str> = rows.iter().filter(|r| !r.pass).map(|r| r.rule.as_str()).collect();
        println!("{:<10} {:>3} rules  worst {worst:.1e}  failing {failing:?}", theory.name(), rows.len());
    }
}
