//! Acceptance run: one pass/fail line per criterion, non-zero exit on any failure.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

use qceq::circuit::{Circuit, Theory};
use qceq::linalg::{direct_sum, max_abs};
use qceq::random::{angle_with_specials, haar_unitary, random_circuit, random_isometry, random_qc};
use qceq::rewrite::{apply, deformation_normal_form, find_matches_at, replay_shipped, Hints, DEFAULT_WINDOW};
use qceq::rules::{self, RuleSummary, Schema, Solver};
use qceq::semantics::{
    apply_superop, circuit_deviation, eval_cptp, eval_natural, max_deviation, EvalOptions, Matrix, C64,
};
use qceq::solvers::{
    euler_zxz, kstar_lhs_matrix, kstar_new_from_old, kstar_old_from_new, kstar_rhs_matrix, solve_kstar, zxz_matrix,
};
use qceq::synth::{
    copy_diagonal_circuit, copy_diagonal_matrix, copy_standard_circuit, copy_standard_matrix, csd_modified,
    synth_isometry, synth_unitary,
};

type Outcome = Result<String, String>;

const SEED: u64 = 2024;

fn rng(k: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ (k << 32))
}

fn opts() -> EvalOptions {
    EvalOptions::default()
}

fn suite_outcome(rows: &[RuleSummary], tol: f64) -> Outcome {
    let bad: Vec<String> = rows
        .iter()
        .filter(|s| !s.pass || s.max_deviation >= tol)
        .map(|s| format!("{} ({})", s.rule, s.error.clone().unwrap_or_else(|| format!("{:.2e}", s.max_deviation))))
        .collect();
    let worst = rows.iter().map(|s| s.max_deviation).fold(0.0, f64::max);
    if bad.is_empty() {
        Ok(format!("{} rules, max deviation {worst:.2e}", rows.len()))
    } else {
        Err(format!("failing: {}", bad.join(", ")))
    }
}

fn axiom_soundness() -> Outcome {
    let start = Instant::now();
    let mut rows = vec![];
    for t in [Theory::Qc, Theory::QcIso, Theory::QcAncilla, Theory::QcGround] {
        rows.extend(rules::axiom_suite(t, 20, SEED, opts(), 1e-9));
    }
    for n in 2..=5 {
        let name = format!("K*/{n}");
        if !rows.iter().any(|r| r.rule == name) {
            return Err(format!("{name} missing from the QC axioms"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let out = suite_outcome(&rows, 1e-9)?;
    if secs >= 60.0 {
        return Err(format!("{out}, but took {secs:.1}s"));
    }
    Ok(format!("{out}, {secs:.1}s"))
}

fn retired_rules() -> Outcome {
    suite_outcome(&rules::retired_suite(20, SEED, opts(), 1e-9), 1e-9)
}

fn derived_identities() -> Outcome {
    let rows = rules::derived_identity_suite(Theory::QcAncilla, 20, SEED, opts(), 1e-9);
    for needed in ["XX", "inverseEuler", "mctrlRXSWAP/2", "mctrlPinducdef/3", "ancillaTOFpos", "Paltdef/3", "RXaltdef/2", "K3"]
    {
        if !rows.iter().any(|r| r.rule == needed) {
            return Err(format!("{needed} missing from the identity suite"));
        }
    }
    suite_outcome(&rows, 1e-9)
}

fn euler_solver() -> Outcome {
    let mut r = rng(4);
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let u = haar_unitary(2, &mut r);
        let e = euler_zxz(&u).map_err(|e| e.to_string())?;
        worst = worst.max(max_abs(&(zxz_matrix(&e) - &u)));
        if !e.violations().is_empty() {
            return Err(format!("draw {i}: {:?}", e.violations()));
        }
        // same matrix through two unrelated factorizations
        let (v1, v2) = (haar_unitary(2, &mut r), haar_unitary(2, &mut r));
        let m1 = (&u * &v1) * v1.adjoint();
        let m2 = (&u * &v2) * v2.adjoint();
        let (e1, e2) = (euler_zxz(&m1).unwrap(), euler_zxz(&m2).unwrap());
        if e1.as_array().map(f64::to_bits) != e2.as_array().map(f64::to_bits) {
            return Err(format!("draw {i}: {:?} vs {:?}", e1.as_array(), e2.as_array()));
        }
    }
    if worst >= 1e-10 {
        return Err(format!("reconstruction {worst:.2e}"));
    }
    Ok(format!("1000 draws, reconstruction {worst:.2e}, canonical, bitwise unique"))
}

fn kstar_solver() -> Outcome {
    let zero = solve_kstar([0.0; 4]).map_err(|e| e.to_string())?;
    if zero.delta != [0.0; 8] {
        return Err(format!("γ = 0 gave {:?}", zero.delta));
    }
    let mut r = rng(5);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let g = [0; 4].map(|_| angle_with_specials(&mut r));
        let d = solve_kstar(g).map_err(|e| format!("draw {i} {g:?}: {e}"))?;
        if !d.violations().is_empty() {
            return Err(format!("draw {i} {g:?}: {:?}", d.violations()));
        }
        worst = worst.max(max_deviation(&kstar_lhs_matrix(g), &kstar_rhs_matrix(&d)).unwrap());
    }
    if worst >= 1e-9 {
        return Err(format!("reconstruction {worst:.2e}"));
    }
    Ok(format!("500 draws, reconstruction {worst:.2e}, γ=0 → δ=0"))
}

fn kstar_conversion() -> Outcome {
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for i in 0..500 {
        let g = [0; 4].map(|_| angle_with_specials(&mut r));
        let d = solve_kstar(g).map_err(|e| e.to_string())?;
        let old = kstar_old_from_new(&d).map_err(|e| format!("draw {i}: {e}"))?;
        let back = kstar_new_from_old(&old).map_err(|e| format!("draw {i}: {e}"))?;
        let dev = d.delta.iter().zip(back.delta.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst = worst.max(dev);
    }
    if worst >= 1e-12 {
        return Err(format!("f(g(δ')) off by {worst:.2e}"));
    }
    Ok(format!("500 tuples, max |f(g(δ'))−δ'| = {worst:.2e}"))
}

fn modified_csd() -> Outcome {
    let mut r = rng(7);
    let (mut rec, mut cs) = (0.0f64, 0.0f64);
    for i in 0..200 {
        let n = [3, 4][i % 2];
        let k = [1, 2, 4][(i / 2) % 3];
        let dim = 1 << n;
        let u = direct_sum(&Matrix::identity(k, k), &haar_unitary(dim - k, &mut r));
        let b = csd_modified(&u, k).map_err(|e| e.to_string())?;
        rec = rec.max(max_abs(&(b.reconstruct() - &u)));
        for j in 0..b.d {
            cs = cs.max((b.c[j] * b.c[j] + b.s[j] * b.s[j] - 1.0).abs());
        }
    }
    if rec >= 1e-10 || cs >= 1e-12 {
        return Err(format!("reconstruction {rec:.2e}, C²+S²−I {cs:.2e}"));
    }
    Ok(format!("200 draws, reconstruction {rec:.2e}, C²+S²−I {cs:.2e}"))
}

fn synthesis_round_trips() -> Outcome {
    let mut r = rng(8);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = r.gen_range(1..=3);
        let u = haar_unitary(1 << n, &mut r);
        let c = synth_unitary(&u).map_err(|e| e.to_string())?;
        worst = worst.max(max_deviation(&eval_natural(&c, opts()).unwrap().1, &u).unwrap());
    }
    let mut worst_iso = 0.0f64;
    for _ in 0..100 {
        let out = r.gen_range(1..=4);
        let inp = r.gen_range(0..out);
        let v = random_isometry(1 << out, 1 << inp, &mut r);
        let c = synth_isometry(&v).map_err(|e| e.to_string())?;
        worst_iso = worst_iso.max(max_deviation(&eval_natural(&c, opts()).unwrap().1, &v).unwrap());
    }
    let mut copies = 0.0f64;
    for (m, reference) in [(copy_standard_matrix(), copy_standard_circuit()), (copy_diagonal_matrix(), copy_diagonal_circuit())]
    {
        let c = synth_isometry(&m).map_err(|e| e.to_string())?;
        let (_, d) = circuit_deviation(&c, &reference, opts()).map_err(|e| e.to_string())?;
        copies = copies.max(d);
    }
    if worst >= 1e-8 || worst_iso >= 1e-8 || copies >= 1e-8 {
        return Err(format!("unitary {worst:.2e}, isometry {worst_iso:.2e}, copies {copies:.2e}"));
    }
    Ok(format!("unitary {worst:.2e}, isometry {worst_iso:.2e}, copy isometries {copies:.2e}"))
}

/// Rules usable for splicing into a unitary context.
fn spliceable() -> Vec<Schema> {
    rules::all_rules()
        .iter()
        .filter(|s| s.theory == Theory::Qc && !s.is_structural() && s.n <= 5 && !s.lhs.is_empty())
        .cloned()
        .collect()
}

fn rewriting() -> Outcome {
    let schemas = spliceable();
    let mut r = rng(9);
    let mut worst = 0.0f64;
    let mut applied = 0;
    let mut attempts = 0;
    while applied < 500 {
        attempts += 1;
        if attempts > 5000 {
            return Err(format!("only {applied} applications found"));
        }
        let s = schemas.choose(&mut r).unwrap();
        let reversed = s.solver == Solver::Shared && !s.rhs.is_empty() && r.gen_bool(0.3);
        let inst = match s.random_instance(&mut r) {
            Ok(i) => i,
            Err(_) => continue,
        };
        let pattern = if reversed { &inst.rhs } else { &inst.lhs };
        let width = s.n + r.gen_range(0..=2).min(5 - s.n.min(5));
        let mut map: Vec<usize> = (0..width).collect();
        map.shuffle(&mut r);
        let prefix = random_qc(width, r.gen_range(0..4), &mut r);
        let suffix = random_qc(width, r.gen_range(0..4), &mut r);
        let mut c = Circuit::new(Theory::Qc, width);
        c.gates.extend(prefix.gates.iter().cloned());
        c.gates.extend(pattern.gates.iter().map(|g| g.map_wires(|w| map[w])));
        c.gates.extend(suffix.gates.iter().cloned());
        let hints = Hints { wires: Some(map[..s.n].to_vec()), params: inst.params.clone() };
        let matches = match find_matches_at(&c, s, reversed, prefix.len(), &hints, DEFAULT_WINDOW) {
            Ok(m) => m,
            Err(e) => return Err(format!("{}: {e}", s.name)),
        };
        let Some(m) = matches.first() else {
            return Err(format!("{} ({}) not found in its own instance", s.name, if reversed { "R2L" } else { "L2R" }));
        };
        let out = apply(&c, s, m).map_err(|e| format!("{}: {e}", s.name))?;
        let (_, dev) = circuit_deviation(&c, &out, opts()).map_err(|e| e.to_string())?;
        if dev >= 1e-9 {
            return Err(format!("{} changed semantics by {dev:.2e}", s.name));
        }
        worst = worst.max(dev);
        applied += 1;
    }
    for i in 0..500 {
        let theory = [Theory::Qc, Theory::QcIso, Theory::QcAncilla, Theory::QcGround][i % 4];
        let n = r.gen_range(1..=3);
        let c = random_circuit(theory, n, r.gen_range(0..12), 5, &mut r);
        let nf = deformation_normal_form(&c);
        if deformation_normal_form(&nf) != nf {
            return Err(format!("normal form not idempotent on circuit {i}"));
        }
    }
    Ok(format!("500 applications over {} rules, max deviation {worst:.2e}; normal form idempotent on 500", schemas.len()))
}

fn derivation_replay() -> Outcome {
    let runs = replay_shipped(opts());
    let mut names = vec![];
    for (name, res) in &runs {
        match res {
            Ok(rep) if rep.pass => names.push(name.clone()),
            Ok(_) => return Err(format!("{name} did not pass")),
            Err(e) => return Err(format!("{name}: {e}")),
        }
    }
    for needed in ["XX", "ZZ", "CNOTCNOT", "CNOTSWAP", "RXcommutCNOT", "ctrlPinit"] {
        if !names.iter().any(|n| n == needed) {
            return Err(format!("{needed} not shipped"));
        }
    }
    Ok(format!("replayed {}", names.join(", ")))
}

fn cptp_layer() -> Outcome {
    let parse = |t: &str| qceq::format::parse_circuit(t).unwrap();
    let measure = parse("qubits 1\ntheory qcground\nINIT\nCX 0 1\nDISCARD 1\n");
    let and = parse("qubits 2\ntheory qcground\nINIT\nCCX 0 1 2\nDISCARD 0\nDISCARD 0\n");
    let mut r = rng(11);
    let s = eval_cptp(&measure).map_err(|e| e.to_string())?;
    let z = |re: f64, im: f64| C64::new(re, im);
    let (a, b, c, d) = (z(r.gen(), 0.0), z(r.gen(), r.gen()), z(r.gen(), r.gen()), z(r.gen(), 0.0));
    let rho = Matrix::from_row_slice(2, 2, &[a, c, b, d]);
    let got = apply_superop(&s, &rho);
    let want = Matrix::from_row_slice(2, 2, &[a, z(0.0, 0.0), z(0.0, 0.0), d]);
    let dm = max_deviation(&got, &want).unwrap();
    if dm != 0.0 {
        return Err(format!("measurement off by {dm:.2e}"));
    }
    let s = eval_cptp(&and).map_err(|e| e.to_string())?;
    let p: Vec<f64> = (0..4).map(|_| r.gen()).collect();
    let rho = Matrix::from_diagonal(&nalgebra::DVector::from_vec(p.iter().map(|&x| z(x, 0.0)).collect()));
    let got = apply_superop(&s, &rho);
    let want = Matrix::from_diagonal(&nalgebra::DVector::from_vec(vec![z(p[0] + p[1] + p[2], 0.0), z(p[3], 0.0)]));
    let da = max_deviation(&got, &want).unwrap();
    if da != 0.0 {
        return Err(format!("AND off by {da:.2e}"));
    }
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = r.gen_range(0..=2);
        let c = random_circuit(Theory::QcIso, n, r.gen_range(1..10), 4, &mut r);
        worst = worst.max(rules::discard_iso_deviation(&c, opts()).map_err(|e| e.to_string())?);
    }
    if worst >= 1e-9 {
        return Err(format!("discard-iso {worst:.2e}"));
    }
    Ok(format!("measurement and AND exact; discard-iso on 50 circuits {worst:.2e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("axiom soundness", axiom_soundness),
        ("retired rules", retired_rules),
        ("derived identities", derived_identities),
        ("Euler solver", euler_solver),
        ("K* solver", kstar_solver),
        ("K* conversion", kstar_conversion),
        ("modified CSD", modified_csd),
        ("synthesis round trips", synthesis_round_trips),
        ("rewriting", rewriting),
        ("derivation replay", derivation_replay),
        ("CPTP layer", cptp_layer),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = f();
        let secs = t.elapsed().as_secs_f64();
        match res {
            Ok(msg) => println!("criterion {:>2} {name}: PASS — {msg} [{secs:.1}s]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL — {msg} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
