use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qceq::circuit::{adjoint, compose_seq, controlize, Circuit, Theory};
use qceq::format::{format_circuit, from_json, parse_circuit, to_json};
use qceq::linalg::{direct_sum, max_abs};
use qceq::random::{angle_with_specials, haar_unitary, random_circuit, random_isometry, random_qc};
use qceq::rewrite::{apply, deformation_normal_form, find_matches, same_circuit};
use qceq::rules;
use qceq::semantics::{circuit_deviation, eval_unitary, isometry_deviation, EvalOptions, Matrix};
use qceq::solvers::{euler_xzx, euler_zxz, kstar_new_from_old, kstar_old_from_new, kstar_lhs_matrix, kstar_rhs_matrix, solve_kstar, xzx_matrix, zxz_matrix};
use qceq::synth::{csd_modified, multiplexed_rx, synth_isometry, synth_unitary};

fn opts() -> EvalOptions {
    EvalOptions::default()
}

fn any_theory() -> impl Strategy<Value = Theory> {
    prop_oneof![Just(Theory::Qc), Just(Theory::QcIso), Just(Theory::QcAncilla), Just(Theory::QcGround)]
}

fn special_angle() -> impl Strategy<Value = f64> {
    any::<u64>().prop_map(|s| angle_with_specials(&mut ChaCha8Rng::seed_from_u64(s)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_and_json_round_trip(seed: u64, theory in any_theory(), n in 0usize..4, len in 0usize..12) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(theory, n, len, 5, &mut r);
        let back = parse_circuit(&format_circuit(&c)).unwrap();
        prop_assert!(same_circuit(&c, &back, 1e-12), "{}", format_circuit(&c));
        prop_assert_eq!(back.theory, c.theory);
        let json = from_json(&to_json(&c)).unwrap();
        prop_assert!(same_circuit(&c, &json, 1e-15));
    }

    #[test]
    fn normal_form_is_idempotent_and_sound(seed: u64, theory in any_theory(), n in 1usize..4, len in 0usize..12) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let c = random_circuit(theory, n, len, 5, &mut r);
        let nf = deformation_normal_form(&c);
        prop_assert_eq!(deformation_normal_form(&nf), nf.clone());
        let (_, dev) = circuit_deviation(&c, &nf, opts()).unwrap();
        prop_assert!(dev < 1e-9, "deviation {dev:e}");
    }

    #[test]
    fn adjoint_inverts(seed: u64, n in 1usize..4, len in 0usize..10) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let c = random_qc(n, len, &mut r);
        let round = compose_seq(&c, &adjoint(&c).unwrap()).unwrap();
        let dev = max_abs(&(eval_unitary(&round).unwrap() - Matrix::identity(1 << n, 1 << n)));
        prop_assert!(dev < 1e-10);
    }

    #[test]
    fn controlize_is_block_diagonal(seed: u64, n in 0usize..3, len in 0usize..8) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let c = random_qc(n, len, &mut r);
        let u = eval_unitary(&c).unwrap();
        let cu = eval_unitary(&controlize(&c).unwrap()).unwrap();
        let want = direct_sum(&Matrix::identity(1 << n, 1 << n), &u);
        prop_assert!(max_abs(&(cu - want)) < 1e-10);
    }

    #[test]
    fn first_match_rewrite_preserves_semantics(seed: u64, n in 1usize..4, len in 1usize..10) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let c = random_qc(n, len, &mut r);
        let catalog = rules::all_rules();
        for _ in 0..8 {
            let s = &catalog[r.gen_range(0..catalog.len())];
            if s.theory != Theory::Qc {
                continue;
            }
            let reversed = r.gen_bool(0.5);
            if let Some(m) = find_matches(&c, s, reversed).first() {
                let Ok(out) = apply(&c, s, m) else { continue };
                let (_, dev) = circuit_deviation(&c, &out, opts()).unwrap();
                prop_assert!(dev < 1e-9, "{} changed semantics by {dev:e}", s.name);
            }
        }
    }

    #[test]
    fn euler_reconstructs_canonically(seed: u64) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let u = haar_unitary(2, &mut r);
        let e = euler_zxz(&u).unwrap();
        prop_assert!(max_abs(&(zxz_matrix(&e) - &u)) < 1e-10);
        prop_assert!(e.violations().is_empty(), "{:?}", e.violations());
        let x = euler_xzx(&u).unwrap();
        prop_assert!(max_abs(&(xzx_matrix(&x) - &u)) < 1e-10);
    }

    #[test]
    fn kstar_solution_is_canonical_and_sound(g in prop::array::uniform4(special_angle())) {
        let d = solve_kstar(g).unwrap();
        prop_assert!(d.violations().is_empty(), "{:?}", d.violations());
        prop_assert!(max_abs(&(kstar_rhs_matrix(&d) - kstar_lhs_matrix(g))) < 1e-9);
        let back = kstar_new_from_old(&kstar_old_from_new(&d).unwrap()).unwrap();
        for (a, b) in d.delta.iter().zip(back.delta.iter()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn csd_reconstructs(seed: u64, n in 2usize..5, kk in 0usize..4) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let half = 1 << (n - 1);
        let k = kk.min(half);
        let dim = 1 << n;
        let u = direct_sum(&Matrix::identity(k, k), &haar_unitary(dim - k, &mut r));
        let b = csd_modified(&u, k).unwrap();
        prop_assert!(max_abs(&(b.reconstruct() - &u)) < 1e-10);
        for f in [&b.a0, &b.a1, &b.b0, &b.b1] {
            prop_assert!(isometry_deviation(f) < 1e-10);
        }
    }

    // permutation-like semantics have exactly-zero cosines and sines, the
    // degenerate corner of the decomposition
    #[test]
    fn synthesis_of_circuit_semantics(seed: u64, n in 1usize..4, len in 0usize..10) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let u = eval_unitary(&random_qc(n, len, &mut r)).unwrap();
        let c = synth_unitary(&u).unwrap();
        prop_assert!(max_abs(&(eval_unitary(&c).unwrap() - &u)) < 1e-8);
    }

    #[test]
    fn isometry_synthesis(seed: u64, out in 1usize..4) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let inp = r.gen_range(0..=out);
        let v = random_isometry(1 << out, 1 << inp, &mut r);
        let c = synth_isometry(&v).unwrap();
        prop_assert!(max_abs(&(eval_unitary(&c).unwrap() - &v)) < 1e-8);
    }

    #[test]
    fn multiplexor_is_a_direct_sum(thetas in prop::collection::vec(-7.0f64..7.0, 4)) {
        let gates = multiplexed_rx(3, &thetas);
        let c = Circuit { theory: Theory::Qc, n_in: 3, gates };
        let got = eval_unitary(&c).unwrap();
        // wire 0 is the most significant bit, so select j owns rows {j, j + 4}
        for (j, t) in thetas.iter().enumerate() {
            let (cos, sin) = ((t / 2.0).cos(), (t / 2.0).sin());
            prop_assert!((got[(j, j)].re - cos).abs() < 1e-12);
            prop_assert!((got[(j + 4, j)].im + sin).abs() < 1e-12);
        }
    }
}
