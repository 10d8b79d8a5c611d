//! Randomized law checks across the crate: cube combinatorics, Host–Kra
//! membership, value-group arithmetic, the linear solver, and the cocycle
//! calculus.  Each property is exact — the generators only choose *which*
//! instance to check, never tolerances.

use nilspace_core::cocycle::{
    alternating_value_sum, check_cocycle, coboundary, directional_derivative,
};
use nilspace_core::cube::{faces, Configuration, Vertex};
use nilspace_core::groups::{make_heisenberg, Filtration};
use nilspace_core::host_kra::{dk_space, HKCubeGroup};
use nilspace_core::linear::{reduce, solve_mod, verify_certificate, Equation};
use nilspace_core::space::{CheckBudget, Point};
use nilspace_core::values::{
    metric, window_average, ValueGroup, ValuePoint,
};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn config_strategy(dim: usize, points: u16) -> impl Strategy<Value = Configuration<Point>> {
    proptest::collection::vec(0..points, 1 << dim)
        .prop_map(move |vals| Configuration::new(dim, vals))
}

fn rational_strategy() -> impl Strategy<Value = BigRational> {
    (0i64..60, 1i64..=60).prop_map(|(p, q)| {
        let r = BigRational::new(BigInt::from(p), BigInt::from(q));
        r.clone() - r.floor()
    })
}

proptest! {
    #[test]
    fn concat_then_split_round_trips(
        c1 in config_strategy(2, 5),
        c2 in config_strategy(2, 5),
        k in 1usize..=3,
    ) {
        let glued = Configuration::concat(&c1, &c2, k).unwrap();
        let (a, b) = glued.split(k).unwrap();
        prop_assert_eq!(a, c1);
        prop_assert_eq!(b, c2);
    }

    #[test]
    fn reflection_is_an_involution(c in config_strategy(3, 5), k in 1usize..=3) {
        let r = c.reflect(k).unwrap();
        prop_assert_eq!(r.reflect(k).unwrap(), c);
    }

    #[test]
    fn face_counts_match_binomials(n in 0usize..=4) {
        for k in 0..=n {
            let binom = (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1));
            prop_assert_eq!(faces(n, k).unwrap().len(), binom << k);
        }
    }

    #[test]
    fn cube_sets_are_closed_under_symmetries(
        c in config_strategy(2, 4),
        swap in proptest::bool::ANY,
        k in 1usize..=2,
    ) {
        // Membership in a degree-1 cube set is preserved by coordinate
        // permutations and reflections.
        let space = dk_space(&[2, 2], 1, 2).unwrap();
        let member = space.is_cube(&c).unwrap();
        let perm: Vec<usize> = if swap { vec![1, 0] } else { vec![0, 1] };
        prop_assert_eq!(space.is_cube(&c.permute(&perm).unwrap()).unwrap(), member);
        prop_assert_eq!(space.is_cube(&c.reflect(k).unwrap()).unwrap(), member);
    }

    #[test]
    fn peeling_accepts_exactly_the_generated_group(
        seeds in proptest::collection::vec((0u16..27, 0usize..12), 1..6),
    ) {
        // Random products of generators stay inside HK^2; the peeling
        // factorization reproduces each product exactly.
        let filt = make_heisenberg(3).unwrap();
        let hk = HKCubeGroup::new(filt, 2).unwrap();
        let gens = hk.generators().unwrap();
        let mut c = gens[0].map(|_| 0u16);
        for (g, which) in seeds {
            let pick = &gens[which % gens.len()];
            let _ = g;
            for v in Vertex::all(2) {
                c.set(v, hk.filtration().group().op(*c.get(v), *pick.get(v)));
            }
        }
        prop_assert!(hk.contains(&c).unwrap());
        let parts = hk.factorize(&c).unwrap().unwrap();
        let mut rebuilt = c.map(|_| 0u16);
        for (v, g) in parts {
            let face = nilspace_core::cube::Face::above(v);
            hk.face_multiply(&mut rebuilt, g, &face);
        }
        prop_assert_eq!(rebuilt, c);
    }

    #[test]
    fn translation_filtration_is_closed_under_commutators(
        i in 0usize..2, j in 0usize..2,
    ) {
        let filt: Filtration = make_heisenberg(2).unwrap();
        let center = filt.group().center();
        let nil = nilspace_core::host_kra::nilmanifold_space(filt, &center, 3, "heis2/center")
            .unwrap();
        let tf = nilspace_core::translations::translation_filtration(&nil.space, 2, 1000)
            .unwrap();
        let gi = tf.level(i + 1);
        let gj = tf.level(j + 1);
        for a in gi {
            for b in gj {
                let ab = nilspace_core::translations::compose(a, b);
                let ba = nilspace_core::translations::compose(b, a);
                let comm = nilspace_core::translations::compose(
                    &nilspace_core::translations::invert(&ab).unwrap(),
                    &ba,
                );
                prop_assert!(tf.level_contains(i + j + 2, &comm));
            }
        }
    }

    #[test]
    fn window_average_is_translation_equivariant(
        vals in proptest::collection::vec(0i64..10, 1..6),
        shift in rational_strategy(),
    ) {
        // Averaging small points commutes with adding a common shift.
        let group = ValueGroup::torus_only(1);
        let window = BigRational::new(BigInt::from(1), BigInt::from(4));
        let points: Vec<ValuePoint> = vals
            .iter()
            .map(|&v| ValuePoint::from_rationals(vec![BigRational::new(
                BigInt::from(v),
                BigInt::from(97),
            )]))
            .collect();
        let shift_point = ValuePoint::from_rationals(vec![shift]);
        let shifted: Vec<ValuePoint> =
            points.iter().map(|p| group.add(p, &shift_point)).collect();
        let avg = window_average(&group, &points, &window).unwrap();
        let avg_shifted = window_average(&group, &shifted, &window).unwrap();
        prop_assert_eq!(group.add(&avg, &shift_point), avg_shifted);
    }

    #[test]
    fn metric_is_a_symmetric_nonnegative_form(
        a in rational_strategy(),
        b in rational_strategy(),
    ) {
        let group = ValueGroup::torus_only(1);
        let pa = ValuePoint::from_rationals(vec![a]);
        let pb = ValuePoint::from_rationals(vec![b]);
        let d = metric(&group, &pa, &pb);
        prop_assert!(d >= BigRational::zero());
        prop_assert_eq!(metric(&group, &pb, &pa), d.clone());
        prop_assert_eq!(d.is_zero(), pa == pb);
    }

    #[test]
    fn value_points_render_and_parse_round_trip(
        a in rational_strategy(),
        f in 0u64..6,
    ) {
        let group = ValueGroup::new(1, vec![6]).unwrap();
        let p = ValuePoint {
            torus: vec![a],
            finite: vec![f],
        };
        let back = ValuePoint::parse(&p.render(), &group).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn modular_solver_reproduces_planted_solutions(
        planted in proptest::collection::vec(0i64..6, 4),
        rows in proptest::collection::vec(proptest::collection::vec(-2i64..=2, 4), 1..8),
        m in prop_oneof![Just(2i64), Just(3), Just(4), Just(6)],
    ) {
        let equations: Vec<Equation> = rows
            .iter()
            .map(|r| {
                let rhs = r
                    .iter()
                    .zip(&planted)
                    .map(|(c, x)| c * x)
                    .sum::<i64>()
                    .rem_euclid(m);
                Equation { coeffs: r.clone(), rhs }
            })
            .collect();
        let f = solve_mod(&equations, 4, m, 0, 1 << 20).unwrap();
        for eq in &equations {
            let got = eq
                .coeffs
                .iter()
                .zip(&f)
                .map(|(c, x)| c * x)
                .sum::<i64>()
                .rem_euclid(m);
            prop_assert_eq!(got, eq.rhs.rem_euclid(m));
        }
    }

    #[test]
    fn obstruction_certificates_verify(
        rows in proptest::collection::vec(proptest::collection::vec(-2i64..=2, 3), 1..6),
        rhs in proptest::collection::vec(0i64..6, 6),
        m in prop_oneof![Just(2i64), Just(4), Just(6)],
    ) {
        let equations: Vec<Equation> = rows
            .iter()
            .zip(rhs.iter().cycle())
            .map(|(r, &b)| Equation { coeffs: r.clone(), rhs: b })
            .collect();
        let red = reduce(&equations, 3, m);
        if let Some(cert) = red.obstruction() {
            prop_assert!(verify_certificate(&equations, 3, cert));
        }
    }

    #[test]
    fn coboundaries_are_cocycles_with_exact_derivative_laws(
        f_num in proptest::collection::vec(0i64..5, 3),
        l in 1usize..=2,
        k in 1usize..=2,
    ) {
        let space = dk_space(&[3], 1, 3).unwrap();
        let group = ValueGroup::torus_only(1);
        let f: Vec<ValuePoint> = f_num
            .iter()
            .map(|&v| ValuePoint::from_rationals(vec![BigRational::new(
                BigInt::from(v),
                BigInt::from(45),
            )]))
            .collect();
        let rho = coboundary(&space, l, &group, &f).unwrap();
        for rep in check_cocycle(&rho, &CheckBudget::default()).unwrap() {
            prop_assert!(rep.passed, "{}: {:?}", rep.name, rep.witness);
        }
        if k <= l + 1 {
            // d_k(d^l f) = d^(l+1) f.
            let up = directional_derivative(&rho, k).unwrap();
            let direct = coboundary(&space, l + 1, &group, &f).unwrap();
            prop_assert_eq!(up.values, direct.values);
        }
    }

    #[test]
    fn alternating_sums_telescope_over_concatenation(
        f_num in proptest::collection::vec(0i64..7, 4),
        c1 in config_strategy(1, 4),
        c2 in config_strategy(1, 4),
        k in 1usize..=2,
    ) {
        let group = ValueGroup::torus_only(1);
        let f: Vec<ValuePoint> = f_num
            .iter()
            .map(|&v| ValuePoint::from_rationals(vec![BigRational::new(
                BigInt::from(v),
                BigInt::from(11),
            )]))
            .collect();
        let glued = Configuration::concat(&c1, &c2, k).unwrap();
        let want = group.sub(
            &alternating_value_sum(&group, &c1, &f),
            &alternating_value_sum(&group, &c2, &f),
        );
        prop_assert_eq!(alternating_value_sum(&group, &glued, &f), want);
    }

    #[test]
    fn averaging_solutions_differ_from_planted_by_a_constant(
        f_num in proptest::collection::vec(0i64..4, 3),
        l in 1usize..=2,
    ) {
        let space = dk_space(&[3], 1, 2).unwrap();
        let group = ValueGroup::torus_only(1);
        let f: Vec<ValuePoint> = f_num
            .iter()
            .map(|&v| ValuePoint::from_rationals(vec![BigRational::new(
                BigInt::from(v),
                BigInt::from(120),
            )]))
            .collect();
        let rho = coboundary(&space, l, &group, &f).unwrap();
        let window = nilspace_core::values::default_window();
        let sol = nilspace_core::cocycle::solve_coboundary_averaging(&rho, &window).unwrap();
        let diffs: Vec<ValuePoint> = (0..3)
            .map(|x| group.sub(&sol.f[x], &f[x]))
            .collect();
        prop_assert!(diffs.iter().all(|d| d == &diffs[0]));
        prop_assert!(sol.report.max_window_spread <= BigRational::one());
    }
}
