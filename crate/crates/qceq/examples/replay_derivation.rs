//! Replay the bundled derivation scripts step by step.

use qceq::rewrite::replay_shipped;
use qceq::semantics::EvalOptions;

fn main() {
    for (name, run) in replay_shipped(EvalOptions::default()) {
        match run {
            Ok(r) => {
                println!("{name}: {} steps, pass {}, max deviation {:.1e}", r.steps.len(), r.pass, r.max_deviation);
                for s in &r.steps {
                    println!("  {:>2}. {} {} @{}", s.index, s.rule, s.direction, s.anchor);
                }
            }
            Err(e) => println!("{name}: {e}"),
        }
    }
}
