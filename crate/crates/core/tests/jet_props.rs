use proptest::prelude::*;
use spencer_lab::algebra::{rat, var_list, MultiPoly};
use spencer_lab::jet::{
    catalog, delta_cohomology, involutivity_degree, is_finite_type, poincare_series,
    solution_dim_bound, to_flat_connection, Jet, LinearEquation, PdeSystem, SpencerComplex,
};
use spencer_lab::{QMatrix, QPoly, Rational};

fn small_rational() -> impl Strategy<Value = Rational> {
    (-4i64..=4, 1i64..=3).prop_map(|(n, d)| rat(n, d))
}

fn alpha(n: usize, max_order: u32) -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0..=max_order, n)
        .prop_filter("order bound", move |a| a.iter().sum::<u32>() <= max_order)
}

/// Constant-coefficient systems in `n` variables with `m` unknowns, order ≤ 2.
fn constant_system(n: usize, m: usize) -> impl Strategy<Value = PdeSystem> {
    let term = (
        0..m,
        alpha(n, 2),
        (-3i64..=3).prop_filter("nonzero", |c| *c != 0),
    );
    prop::collection::vec(prop::collection::vec(term, 1..=4), 1..=2).prop_filter_map(
        "valid system",
        move |eqs| {
            let vars = var_list(&["x", "y", "z"][..n]);
            let equations = eqs
                .into_iter()
                .map(|terms| {
                    LinearEquation::new(
                        terms
                            .into_iter()
                            .map(|(u, a, c)| (Jet::new(u, a), catalog::constant(&vars, rat(c, 1)))),
                    )
                })
                .collect();
            let unknowns = (0..m).map(|i| format!("u{i}")).collect();
            PdeSystem::new("random", vars.clone(), unknowns, equations).ok()
        },
    )
}

fn invertible(n: usize) -> impl Strategy<Value = QMatrix> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, n), n)
        .prop_map(|rows| {
            QMatrix::from_rows(
                rows.into_iter()
                    .map(|r| r.into_iter().map(|v| rat(v, 1)).collect())
                    .collect(),
            )
        })
        .prop_filter("invertible", |p| p.determinant() != rat(0, 1))
}

fn xy_poly() -> impl Strategy<Value = QPoly> {
    prop::collection::vec(
        (prop::collection::vec(0u32..=1, 2), small_rational()),
        0..=2,
    )
    .prop_map(|t| MultiPoly::from_terms(var_list(&["x", "y"]), t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_poincare_exactness(n in 1usize..=3, m in 1usize..=2, order in 1usize..=2) {
        let vars = ["x", "y", "z"];
        let unknowns = ["u", "v"];
        let free = PdeSystem::free(&vars[..n], &unknowns[..m], order);
        let cx = SpencerComplex::build(&free, n, 6).unwrap();
        let table = delta_cohomology(&cx);
        prop_assert!(table.entries.keys().any(|&(j, _)| j == 4));
        prop_assert!(table.vanishes_for(1..=4));
    }

    #[test]
    fn euler_characteristic_matches_spaces(sys in constant_system(2, 1)) {
        let cx = SpencerComplex::build(&sys, 2, sys.order() + 3).unwrap();
        let mut checked = 0;
        for d in 0..=sys.order() + 3 {
            if let Some((spaces, cohom)) = cx.strand_euler(d) {
                prop_assert_eq!(spaces, cohom);
                let strand = delta_cohomology(&cx).strand(d);
                prop_assert_eq!(strand.euler_characteristic(), strand.space_euler_characteristic());
                checked += 1;
            }
        }
        prop_assert!(checked >= 2);
    }

    #[test]
    fn prolongation_monotone(n in 2usize..=3, sys_seed in any::<prop::sample::Index>()) {
        let catalog_systems = [catalog::laplace(n), catalog::gradient_zero(), catalog::wave(), catalog::heat(), catalog::pure_second_derivatives()];
        let sys = &catalog_systems[sys_seed.index(catalog_systems.len())];
        let dims = poincare_series(sys, 7).unwrap();
        for j in 0..7 {
            prop_assert!(dims[j + 1] <= sys.n() * dims[j], "{:?}", dims);
        }
    }

    #[test]
    fn random_prolongation_monotone(sys in constant_system(2, 2)) {
        let dims = poincare_series(&sys, 6).unwrap();
        for j in 0..6 {
            prop_assert!(dims[j + 1] <= 2 * dims[j], "{:?}", dims);
        }
    }

    #[test]
    fn finite_type_consistency(a in prop::collection::vec(prop::collection::vec(small_rational(), 3), 3), m in 1usize..=3) {
        let rows: Vec<Vec<Rational>> = a.into_iter().take(m).map(|r| r.into_iter().take(m).collect()).collect();
        let sys = catalog::linear_ode(&QMatrix::from_rows(rows));
        let ft = is_finite_type(&sys, 4).unwrap();
        prop_assert!(ft.finite);
        let ell0 = ft.ell0.unwrap();
        prop_assert!(ft.symbol_dims[sys.order() + ell0 + 1..].iter().all(|&d| d == 0));
        let sum: usize = ft.symbol_dims.iter().sum();
        prop_assert_eq!(solution_dim_bound(&sys).unwrap(), sum);
        prop_assert_eq!(sum, m);
    }

    #[test]
    fn random_finite_type_consistency(sys in constant_system(2, 1)) {
        let ft = is_finite_type(&sys, 3).unwrap();
        if ft.finite {
            let tail = &ft.symbol_dims[sys.order() + ft.ell0.unwrap() + 1..];
            prop_assert!(tail.iter().all(|&d| d == 0));
            let longer = poincare_series(&sys, sys.order() + 8).unwrap();
            prop_assert!(longer[ft.symbol_dims.len()..].iter().all(|&d| d == 0));
            prop_assert_eq!(solution_dim_bound(&sys).unwrap(), longer.iter().sum::<usize>());
        }
    }

    #[test]
    fn flatness_soundness(a in xy_poly(), b in xy_poly()) {
        let sys = catalog::frobenius(a, b);
        if let Ok(flat) = to_flat_connection(&sys) {
            prop_assert!(flat.flatness_checked);
            for i in 0..2 {
                for j in 0..2 {
                    prop_assert!(flat.curvature(i, j).iter().flatten().all(MultiPoly::is_zero));
                }
            }
        }
    }

    #[test]
    fn coordinate_invariance(sys in constant_system(2, 1), p in invertible(2)) {
        let changed = sys.linear_change(&p, var_list(&["s", "t"])).unwrap();
        let top = sys.order() + 4;
        prop_assert_eq!(poincare_series(&sys, top).unwrap(), poincare_series(&changed, top).unwrap());
        let a = delta_cohomology(&SpencerComplex::build(&sys, 2, top).unwrap());
        let b = delta_cohomology(&SpencerComplex::build(&changed, 2, top).unwrap());
        let dims = |t: &spencer_lab::jet::DeltaCohomologyTable| t.entries.iter().map(|(k, e)| (*k, e.dim)).collect::<Vec<_>>();
        prop_assert_eq!(dims(&a), dims(&b));
        prop_assert_eq!(involutivity_degree(&sys, 3).unwrap().ell0, involutivity_degree(&changed, 3).unwrap().ell0);
    }
}
