use proptest::prelude::*;
use spencer_lab::algebra::{rat, var_list};
use spencer_lab::jet::{catalog, Jet, LinearEquation, PdeSystem};
use spencer_lab::microlocal::grid::{compass_directions, regular_grid};
use spencer_lab::microlocal::{
    characteristic_ideal, classify_mixed, external_product_char, is_elliptic, is_hyperbolic,
    noncharacteristic_restrict, CovectorSample, HyperbolicStatus, Region,
};
use spencer_lab::{QMatrix, Rational};

fn grid2() -> Vec<CovectorSample> {
    regular_grid(2, 3, &rat(-1, 1), &rat(1, 1), &compass_directions(2, None))
}

/// Scalar systems in `x, y` with constant or linear coefficients, order 1 or 2.
fn scalar_system(polynomial_coefficients: bool) -> impl Strategy<Value = PdeSystem> {
    let alpha = prop::collection::vec(0u32..=2, 2)
        .prop_filter("order", |a| (1..=2).contains(&a.iter().sum::<u32>()));
    let coef = ((-3i64..=3), (0i64..=2), prop::collection::vec(0u32..=1, 2));
    prop::collection::vec((alpha, coef), 1..=3).prop_filter_map("valid", move |terms| {
        let vars = var_list(&["x", "y"]);
        let eq = LinearEquation::new(terms.into_iter().filter_map(|(a, (c, lin, m))| {
            let mut p = catalog::constant(&vars, rat(c, 1));
            if polynomial_coefficients && lin != 0 {
                p.add_term(m, rat(lin, 1));
            }
            (!p.is_zero()).then(|| (Jet::new(0, a), p))
        }));
        PdeSystem::new("s", vars, vec!["u".into()], vec![eq])
            .ok()
            .filter(|s| characteristic_ideal(s).is_ok())
    })
}

/// `Σ a_ij ∂_i ∂_j` with `a = BᵀB + I`.
fn definite_second_order(n: usize) -> impl Strategy<Value = PdeSystem> {
    prop::collection::vec(prop::collection::vec(-2i64..=2, n), n).prop_map(move |b| {
        let names = ["x", "y", "z"];
        let vars = var_list(&names[..n]);
        let mut terms = Vec::new();
        for i in 0..n {
            for j in i..n {
                let mut a: i64 = (0..n).map(|k| b[k][i] * b[k][j]).sum();
                if i == j {
                    a += 1;
                } else {
                    a *= 2;
                }
                let mut alpha = vec![0u32; n];
                alpha[i] += 1;
                alpha[j] += 1;
                if a != 0 {
                    terms.push((Jet::new(0, alpha), catalog::constant(&vars, rat(a, 1))));
                }
            }
        }
        PdeSystem::new(
            "definite",
            vars,
            vec!["u".into()],
            vec![LinearEquation::new(terms)],
        )
        .unwrap()
    })
}

fn embedding(n: usize) -> impl Strategy<Value = QMatrix> {
    (1..n).prop_flat_map(move |d| {
        prop::collection::vec(prop::collection::vec(-2i64..=2, d), n)
            .prop_map(|rows| {
                QMatrix::from_rows(
                    rows.into_iter()
                        .map(|r| r.into_iter().map(|v| rat(v, 1)).collect())
                        .collect(),
                )
            })
            .prop_filter("full rank", move |e| e.rank() == d)
    })
}

fn catalog_pair() -> impl Strategy<Value = (usize, usize)> {
    (0usize..3, 0usize..3)
}

fn catalog_system(i: usize) -> PdeSystem {
    [catalog::d_x(), catalog::laplace(2), catalog::wave()][i].clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn conicity(sys in scalar_system(true)) {
        let cv = characteristic_ideal(&sys).unwrap();
        let xi: Vec<usize> = (cv.n..2 * cv.n).collect();
        for g in cv.generators() {
            prop_assert!(g.is_homogeneous_in(&xi), "{}", g);
        }
        prop_assert!(cv.conic);
    }

    #[test]
    fn elliptic_excludes_hyperbolic(sys in scalar_system(false)) {
        let grid = grid2();
        let e = is_elliptic(&sys, &grid).unwrap();
        if e.elliptic {
            for theta in compass_directions(2, None) {
                let h = is_hyperbolic(&sys, &theta, &grid).unwrap();
                prop_assert_ne!(h.status, HyperbolicStatus::Hyperbolic);
            }
        }
    }

    #[test]
    fn definite_forms_are_elliptic_not_hyperbolic(sys in definite_second_order(2)) {
        let grid = grid2();
        prop_assert!(is_elliptic(&sys, &grid).unwrap().elliptic);
        for theta in compass_directions(2, None) {
            prop_assert_ne!(is_hyperbolic(&sys, &theta, &grid).unwrap().status, HyperbolicStatus::Hyperbolic);
        }
    }

    #[test]
    fn labels_invariant_under_positive_rescaling(sys in scalar_system(true), c in 1i64..=7, d in 1i64..=5) {
        let c: Rational = rat(c, d);
        let grid = grid2();
        let scaled: Vec<CovectorSample> = grid
            .iter()
            .map(|s| CovectorSample::new(s.x.clone(), s.xi.iter().map(|v| v * &c).collect()).unwrap())
            .collect();
        let theta = vec![rat(1, 1), rat(0, 1)];
        let a = classify_mixed(&sys, &Region::everywhere(), &grid, Some(&theta), &[]).unwrap();
        let b = classify_mixed(&sys, &Region::everywhere(), &scaled, Some(&theta), &[]).unwrap();
        let labels = |r: &spencer_lab::microlocal::ClassificationReport| r.samples.iter().map(|s| s.label.tag()).collect::<Vec<_>>();
        prop_assert_eq!(labels(&a), labels(&b));
        let scaled_theta: Vec<Rational> = theta.iter().map(|v| v * &c).collect();
        let ha = is_hyperbolic(&sys, &theta, &grid).unwrap();
        let hb = is_hyperbolic(&sys, &scaled_theta, &grid).unwrap();
        prop_assert_eq!(ha.status, hb.status);
        prop_assert_eq!(ha.strict, hb.strict);
    }

    #[test]
    fn kunneth_dimension_additive((i, j) in catalog_pair()) {
        let (_, report) = external_product_char(&catalog_system(i), &catalog_system(j)).unwrap();
        prop_assert!(report.dimension_additive, "{:?}", report.dimensions);
        let [a, b, ab] = report.dimensions;
        prop_assert_eq!(ab.unwrap(), a.unwrap() + b.unwrap());
        prop_assert!(report.kunneth_ok);
    }

    #[test]
    fn elliptic_restrictions_are_noncharacteristic(sys in definite_second_order(3), e in embedding(3)) {
        let r = noncharacteristic_restrict(&sys, &e).unwrap();
        prop_assert!(r.noncharacteristic);
    }

    #[test]
    fn laplace_restrictions_are_noncharacteristic(e in embedding(2)) {
        prop_assert!(noncharacteristic_restrict(&catalog::laplace(2), &e).unwrap().noncharacteristic);
    }
}
