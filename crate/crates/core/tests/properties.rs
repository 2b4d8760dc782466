use num_complex::Complex64;
use optqft::arith::adder::{exact_add, longest_carry_chain, windowed_add};
use optqft::errmetrics::lee_distance;
use optqft::qftlib::{optimistic_qft, optimistic_qft_alt};
use optqft::reduction::WeylOp;
use optqft::{Circuit, DyadicAngle, Gate, Permutation, Statevector};
use proptest::prelude::*;

const N: usize = 5;

fn gate() -> impl Strategy<Value = Gate> {
    let q = 0..N;
    let angle = (any::<i32>(), 0u32..8).prop_map(|(a, e)| DyadicAngle::new(a as i64, e));
    prop_oneof![
        q.clone().prop_map(Gate::H),
        q.clone().prop_map(Gate::X),
        (q.clone(), angle.clone()).prop_map(|(q, a)| Gate::Phase(q, a)),
        (q.clone(), 1..N, angle).prop_map(|(p, d, a)| Gate::CPhase(p, (p + d) % N, a)),
        (q, 1..N).prop_map(|(p, d)| Gate::Swap(p, (p + d) % N)),
    ]
}

fn circuit() -> impl Strategy<Value = Circuit> {
    prop::collection::vec(gate(), 0..40).prop_map(|g| Circuit::from_gates(N, g).unwrap())
}

fn state() -> impl Strategy<Value = Statevector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << N).prop_filter_map("zero", |v| {
        let amps: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        (norm > 1e-3)
            .then(|| Statevector::from_amplitudes(amps.iter().map(|a| a / norm).collect()).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn circuits_preserve_norm(c in circuit(), s in state()) {
        let out = s.apply_circuit(&c).unwrap();
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_round_trip(c in circuit(), s in state()) {
        let back = s.apply_circuit(&c.then(&c.inverse()).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&s).unwrap() < 1e-10);
    }

    #[test]
    fn text_round_trip(c in circuit()) {
        let parsed = Circuit::parse_text(&c.to_text()).unwrap();
        prop_assert_eq!(parsed, c);
    }

    #[test]
    fn depth_is_subadditive(a in circuit(), b in circuit()) {
        let ab = a.then(&b).unwrap();
        prop_assert!(ab.depth() <= a.depth() + b.depth());
        prop_assert!(ab.depth() >= a.depth().max(b.depth()));
    }

    #[test]
    fn permutation_inverse(keys in prop::collection::vec(any::<u32>(), 1..64)) {
        let mut idx: Vec<usize> = (0..keys.len()).collect();
        idx.sort_by_key(|&i| (keys[i], i));
        let p = Permutation::new(idx).unwrap();
        let id = p.inverse().after(&p).unwrap();
        prop_assert_eq!(id, Permutation::identity(keys.len()));
    }

    #[test]
    fn windowed_exact_iff_short_chain(n in 1usize..=24, k in 1usize..=24, a in any::<u64>(), b in any::<u64>()) {
        let k = k.min(n);
        let mask = (1u64 << n) - 1;
        let (a, b) = (a & mask, b & mask);
        let ok = windowed_add(a, b, n, k) == exact_add(a, b, n).0;
        prop_assert_eq!(ok, longest_carry_chain(a, b, n) <= k);
    }

    #[test]
    fn lee_symmetric_and_bounded(z in -100_000i64..100_000, m in 1u32..16) {
        let d = lee_distance(z, m);
        prop_assert_eq!(d, lee_distance(-z, m));
        prop_assert_eq!(d, lee_distance(z + (1i64 << m), m));
        prop_assert!(d <= 1u64 << (m - 1));
    }

    #[test]
    fn weyl_adjoint_inverts(r1 in any::<i32>(), r2 in any::<i32>(), s in state()) {
        let v = WeylOp::new(N, r1 as i64, r2 as i64);
        let back = v.apply_adjoint(&v.apply(&s).unwrap()).unwrap();
        prop_assert!(back.max_abs_diff(&s).unwrap() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn two_optimistic_orderings_agree(n in 1usize..=9, m in 1usize..=9, x in any::<usize>()) {
        let m = m.min(n);
        let x = x % (1 << n);
        let psi = Statevector::basis_state(n, x).unwrap();
        let a = psi.apply_circuit(&optimistic_qft(n, m).unwrap()).unwrap();
        let b = psi.apply_circuit(&optimistic_qft_alt(n, m).unwrap()).unwrap();
        prop_assert!(a.max_abs_diff(&b).unwrap() < 1e-9);
    }
}
