use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spectral_core::classify::{classify_orthogonality, classify_spectrality};
use spectral_core::linalg::{Mat2, Vec2};
use spectral_core::model::{conjugate, DigitSet, ExpandingMatrix, MeasureInstance};
use spectral_core::numerics::FourierEvaluator;
use spectral_core::scalar::parse::parse_scalar_expr;
use spectral_core::scalar::{canonicalize_root, p_valuation, AlgebraicScalar, Rational, RootBase};
use spectral_core::zeros::{analyze_zero_structure, in_e_a, residue_profile, ScanConfig};

fn base_strategy() -> impl Strategy<Value = Arc<RootBase>> {
    prop_oneof![
        Just((2, 1, 2)),
        Just((5, 3, 2)),
        Just((2, 1, 3)),
        Just((9, 5, 2)),
        Just((7, 2, 4)),
    ]
    .prop_map(|(t, s, r)| {
        Arc::new(canonicalize_root(&BigInt::from(t), &BigInt::from(s), r).unwrap())
    })
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-20i64..=20, 1i64..=9).prop_map(|(n, d)| Rational::new(n.into(), d.into()))
}

fn element(base: Arc<RootBase>) -> impl Strategy<Value = AlgebraicScalar> {
    let r = base.r() as usize;
    proptest::collection::vec(small_rational(), r)
        .prop_map(move |c| AlgebraicScalar::from_coeffs(&base, c).unwrap())
}

fn triple() -> impl Strategy<Value = (AlgebraicScalar, AlgebraicScalar, AlgebraicScalar)> {
    base_strategy().prop_flat_map(|b| (element(b.clone()), element(b.clone()), element(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn field_axioms((x, y, z) in triple()) {
        prop_assert_eq!(&x + &y, &y + &x);
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) + &z, &x + &(&y + &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert!((&x - &x).is_zero());
        if !x.is_zero() {
            let inv = x.inverse().unwrap();
            prop_assert!((&x * &inv).is_one());
            prop_assert_eq!((&y * &x).checked_div(&x).unwrap(), y.clone());
        }
    }

    #[test]
    fn canonical_roots_are_idempotent(t in 1u32..400, s in 1u32..400, r in 1u32..7) {
        let b = canonicalize_root(&BigInt::from(t), &BigInt::from(s), r).unwrap();
        let again = canonicalize_root(b.t(), b.s(), b.r()).unwrap();
        prop_assert_eq!(&again, &b);
        prop_assert!(b.r() <= r && r % b.r() == 0);
        prop_assert_eq!(b.t().gcd(b.s()), BigInt::from(1));
    }

    #[test]
    fn perfect_powers_collapse(t in 1u32..60, s in 1u32..60, r in 1u32..5) {
        let tp = num_traits::pow(BigInt::from(t), r as usize);
        let sp = num_traits::pow(BigInt::from(s), r as usize);
        let b = canonicalize_root(&tp, &sp, r).unwrap();
        prop_assert!(b.is_rational());
        let text = format!("({tp}/{sp})^(1/{r})");
        let x = parse_scalar_expr(&text).unwrap();
        prop_assert_eq!(x.as_rational(), Some(Rational::new(t.into(), s.into())));
    }

    #[test]
    fn valuation_is_multiplicative(
        x in small_rational().prop_filter("nonzero", |q| *q != Rational::from_integer(0.into())),
        y in small_rational().prop_filter("nonzero", |q| *q != Rational::from_integer(0.into())),
        p in prop::sample::select(vec![2u64, 3, 5, 7]),
    ) {
        let vx = p_valuation(&x, p).unwrap();
        let vy = p_valuation(&y, p).unwrap();
        let vxy = p_valuation(&(&x * &y), p).unwrap();
        prop_assert_eq!(vxy.exponent, vx.exponent + vy.exponent);
        prop_assert_eq!(vxy.unit, &vx.unit * &vy.unit);
    }

    #[test]
    fn e_a_depends_only_on_the_orbit(
        h in -60i64..60,
        l in 1i64..60,
        p in prop::sample::select(vec![3u64, 5, 7]),
        a1 in 0i64..7,
        a2 in 0i64..7,
    ) {
        let pi = p as i64;
        let a = (a1 % pi, a2 % pi);
        prop_assume!(a != (0, 0));
        let q = Rational::new(h.into(), l.into());
        let base = in_e_a(&q, a, p);
        for k in 1..pi {
            let b = ((k * a.0).rem_euclid(pi), (k * a.1).rem_euclid(pi));
            prop_assert_eq!(in_e_a(&q, b, p), base);
        }
    }
}

fn unimodular(rng: &mut ChaCha8Rng) -> [[i64; 2]; 2] {
    let mut m = [[1, 0], [0, 1]];
    for _ in 0..4 {
        let k = rng.gen_range(-2..=2);
        let e = if rng.gen_bool(0.5) {
            [[1, k], [0, 1]]
        } else {
            [[1, 0], [k, 1]]
        };
        m = [
            [
                m[0][0] * e[0][0] + m[0][1] * e[1][0],
                m[0][0] * e[0][1] + m[0][1] * e[1][1],
            ],
            [
                m[1][0] * e[0][0] + m[1][1] * e[1][0],
                m[1][0] * e[0][1] + m[1][1] * e[1][1],
            ],
        ];
    }
    m
}

fn apply(u: [[i64; 2]; 2], d: (i64, i64)) -> (i64, i64) {
    (u[0][0] * d.0 + u[0][1] * d.1, u[1][0] * d.0 + u[1][1] * d.1)
}

/// Unimodular images and translates of known examples; callers keep those with a ∈ E_p.
fn transformed_digits(rng: &mut ChaCha8Rng) -> DigitSet {
    let seeds: [&[(i64, i64)]; 2] = [
        &[(0, 0), (1, 0), (0, 1)],
        &[(0, 0), (1, 0), (1, -1), (2, -1), (2, -2)],
    ];
    let seed = seeds[rng.gen_range(0..2)];
    let u = unimodular(rng);
    let shift = (rng.gen_range(-3..=3), rng.gen_range(-3..=3));
    let mut ds: Vec<(i64, i64)> = seed
        .iter()
        .map(|&d| {
            let v = apply(u, d);
            (v.0 + shift.0, v.1 + shift.1)
        })
        .collect();
    ds.shuffle(rng);
    DigitSet::new(ds).unwrap()
}

#[test]
fn residue_systems_outside_e_a() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let cfg = ScanConfig {
        resolution: 96,
        refinements: 3,
        tol: 1e-9,
    };
    for _ in 0..200 {
        let (d, a) = loop {
            let d = transformed_digits(&mut rng);
            if let Some(a) = analyze_zero_structure(&d, &cfg).a() {
                break (d, a);
            }
        };
        let p = d.p() as i64;
        // (c2, c1) ≡ λ(a1, a2) mod p puts c1/c2 outside E_a.
        let (c1, c2) = loop {
            let lam = rng.gen_range(1..p);
            let c2 = lam * a.0 + p * rng.gen_range(-4..=4);
            let c1 = lam * a.1 + p * rng.gen_range(-4..=4);
            if c2 > 0 && c1.gcd(&c2) == 1 {
                break (c1, c2);
            }
        };
        let q = Rational::new(c1.into(), c2.into());
        assert!(!in_e_a(&q, a, p as u64));
        let prof = residue_profile(&d, c1, c2);
        assert!(
            prof.full_system,
            "{d} with c1/c2 = {c1}/{c2}: {:?}",
            prof.residues
        );
        assert_eq!(prof.gcd.abs(), 1, "{d} with c1/c2 = {c1}/{c2}");
    }
}

#[test]
fn verdicts_survive_unimodular_conjugation() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let diag = ["3", "6", "9", "2", "4", "(5)^(1/2)", "3/5*(5)^(1/2)"];
    let shear = ["0", "1", "-1", "3/4", "2", "-3", "1/3", "3/2"];
    let d2 = DigitSet::new(vec![(0, 0), (1, 0), (0, 1)]).unwrap();
    let d63 = DigitSet::new(vec![(0, 0), (1, 0), (1, -1), (2, -1), (2, -2)]).unwrap();
    let cfg = ScanConfig {
        resolution: 96,
        refinements: 3,
        tol: 1e-9,
    };
    let mut checked = 0;
    while checked < 100 {
        let r1 = diag[rng.gen_range(0..diag.len())];
        let r2 = if rng.gen_bool(0.4) {
            r1
        } else {
            diag[rng.gen_range(0..diag.len())]
        };
        let c = shear[rng.gen_range(0..shear.len())];
        let s = |x: &str| parse_scalar_expr(x).unwrap();
        let Ok(m) = ExpandingMatrix::new(s(r1), s(c), s(r2)) else {
            continue;
        };
        let d = if rng.gen_bool(0.5) {
            d2.clone()
        } else {
            d63.clone()
        };
        let inst = MeasureInstance::new(m, d);
        let rep = analyze_zero_structure(&inst.d, &cfg);

        let w = rng.gen_range(-3..=3);
        let (e1, e2) = (
            if rng.gen_bool(0.5) { 1 } else { -1 },
            if rng.gen_bool(0.5) { 1 } else { -1 },
        );
        let r = Mat2::from_ints([[e1, w], [0, e2]]);
        let (m2, d2v) = conjugate(&inst.m.mat(), &inst.d.as_vecs(), &r).unwrap();
        let inst2 = MeasureInstance::new(
            ExpandingMatrix::from_mat2(&m2).unwrap(),
            DigitSet::from_vecs(&d2v).unwrap(),
        );
        let rep2 = analyze_zero_structure(&inst2.d, &cfg);
        // Only transforms that keep the zero-structure hypothesis are comparable.
        if rep.a().is_some() != rep2.a().is_some() {
            continue;
        }

        assert_eq!(
            classify_spectrality(&inst, &rep).outcome,
            classify_spectrality(&inst2, &rep2).outcome,
            "M = [[{r1}, {c}], [0, {r2}]], R = {r}"
        );
        assert_eq!(
            classify_orthogonality(&inst, &rep).outcome,
            classify_orthogonality(&inst2, &rep2).outcome
        );
        checked += 1;
    }
}

#[test]
fn mu_hat_is_self_consistent() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let instances = [
        MeasureInstance::new(
            ExpandingMatrix::new(
                parse_scalar_expr("6").unwrap(),
                parse_scalar_expr("3/4").unwrap(),
                parse_scalar_expr("6").unwrap(),
            )
            .unwrap(),
            DigitSet::new(vec![(0, 0), (1, 0), (0, 1)]).unwrap(),
        ),
        MeasureInstance::new(
            ExpandingMatrix::new(
                parse_scalar_expr("(5)^(1/2)").unwrap(),
                parse_scalar_expr("1/3*(5)^(1/2)").unwrap(),
                parse_scalar_expr("(5)^(1/2)").unwrap(),
            )
            .unwrap(),
            DigitSet::new(vec![(0, 0), (1, 0), (1, -1), (2, -1), (2, -2)]).unwrap(),
        ),
    ];
    let eps = 1e-10;
    for k in 0..100 {
        let eval = FourierEvaluator::new(&instances[k % 2], None);
        let xi = [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)];
        let coarse = eval.mu_hat_f64(xi, eps);
        let fine = eval.mu_hat_f64(xi, eps / 100.0);
        assert!(coarse.value.norm() <= 1.0 + 1e-12);
        assert!(
            (coarse.value - fine.value).norm() <= eps + eps / 100.0,
            "xi = {xi:?}"
        );
        assert!(fine.depth >= coarse.depth);
    }
    // Exact frequencies agree with their float forms.
    let eval = FourierEvaluator::new(&instances[0], None);
    let v = Vec2::from_rationals(
        Rational::new(7.into(), 3.into()),
        Rational::new((-5).into(), 2.into()),
    );
    let exact = eval.mu_hat(&v, eps).value;
    let float = eval.mu_hat_f64(v.to_f64(), eps).value;
    assert!((exact - float).norm() <= 1e-9);
}
