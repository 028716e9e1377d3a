use proptest::prelude::*;
use spencer_lab::algebra::{rat, var_list, MultiPoly};
use spencer_lab::index::{
    boundary_index, grr_index, line_bundle, tangent_todd, twisted_index, CharacterClass,
    CohomologyRingModel, SymbolClass,
};
use spencer_lab::jet::{catalog, to_flat_connection, DeltaCohomologyTable, PdeSystem};
use spencer_lab::microlocal::noncharacteristic_restrict;
use spencer_lab::QMatrix;

/// Riemann–Roch counts computed without the ring model.
fn expected_sections(model: &str, d: &[i64]) -> i64 {
    match model {
        "P1" | "S2" => d[0] + 1,
        "P2" => (d[0] + 1) * (d[0] + 2) / 2,
        "P3" => (d[0] + 1) * (d[0] + 2) * (d[0] + 3) / 6,
        "E" => d[0],
        "T2" => d[0] * d[1],
        "P1xP1" => (d[0] + 1) * (d[1] + 1),
        _ => unreachable!(),
    }
}

fn model_and_twist() -> impl Strategy<Value = (&'static str, Vec<i64>)> {
    prop::sample::select(vec!["P1", "P2", "P3", "E", "S2", "T2", "P1xP1"]).prop_flat_map(|name| {
        let k = CohomologyRingModel::by_name(name).unwrap().generators.len();
        (Just(name), prop::collection::vec(-6i64..=6, k))
    })
}

fn random_class(name: &'static str) -> impl Strategy<Value = CharacterClass> {
    let model = CohomologyRingModel::by_name(name).unwrap();
    let k = model.generators.len();
    prop::collection::vec(
        (prop::collection::vec(0u32..=2, k), -5i64..=5, 1i64..=4),
        0..=4,
    )
    .prop_map(move |terms| {
        let poly = MultiPoly::from_terms(
            model.ring.clone(),
            terms.into_iter().map(|(m, n, d)| (m, rat(n, d))),
        );
        CharacterClass::new(&model, poly).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn grr_integrality_and_values((name, twist) in model_and_twist()) {
        let model = CohomologyRingModel::by_name(name).unwrap();
        let r = twisted_index(&model, &twist).unwrap();
        let sum = r.breakdown.iter().fold(rat(0, 1), |acc, c| acc + &c.value);
        prop_assert!(sum.is_integer());
        prop_assert_eq!(r.index, expected_sections(name, &twist));
    }

    #[test]
    fn virtual_bundles_are_integral_and_additive(
        (name, a) in model_and_twist(),
        b_seed in prop::collection::vec(-4i64..=4, 2),
        c_seed in prop::collection::vec(-4i64..=4, 2),
    ) {
        let model = CohomologyRingModel::by_name(name).unwrap();
        let k = a.len();
        let (b, c) = (&b_seed[..k], &c_seed[..k]);
        let plus = line_bundle(&model, &a).unwrap().add(&line_bundle(&model, b).unwrap()).unwrap();
        let minus = line_bundle(&model, c).unwrap();
        let symbol = SymbolClass::new("virtual", plus, minus).unwrap();
        let r = grr_index(&symbol.difference(), &tangent_todd(&model).unwrap(), &model).unwrap();
        let expected = expected_sections(name, &a) + expected_sections(name, b) - expected_sections(name, c);
        prop_assert_eq!(r.index, expected);
    }

    #[test]
    fn deformation_invariance((name, twist, a) in model_and_twist().prop_flat_map(|(n, t)| (Just(n), Just(t), random_class(n)))) {
        let model = CohomologyRingModel::by_name(name).unwrap();
        let symbol = SymbolClass::dolbeault(&model, &twist).unwrap().difference();
        let deformed = symbol.add(&a).unwrap().sub(&a).unwrap();
        let todd = tangent_todd(&model).unwrap();
        prop_assert_eq!(grr_index(&symbol, &todd, &model).unwrap().index, grr_index(&deformed, &todd, &model).unwrap().index);
        prop_assert!(SymbolClass::new("zero", a.clone(), a).unwrap().difference().is_zero());
    }

    #[test]
    fn boundary_relation_additive(interior in prop::collection::vec(0usize..=9, 0..=5), boundary in prop::collection::vec(0usize..=9, 0..=5)) {
        let r = boundary_index(&DeltaCohomologyTable::from_degrees(&interior), &DeltaCohomologyTable::from_degrees(&boundary));
        prop_assert_eq!(r.relative_index + r.boundary_index, r.index);
        let alt = |v: &[usize]| v.iter().enumerate().map(|(i, &d)| if i % 2 == 0 { d as i64 } else { -(d as i64) }).sum::<i64>();
        prop_assert_eq!(r.index, alt(&interior));
        prop_assert_eq!(r.boundary_index, alt(&boundary));
    }

    #[test]
    fn pullback_compatibility(a in -4i64..=4, b in -4i64..=4, p in -3i64..=3, q in 1i64..=3) {
        let vars = var_list(&["x", "y"]);
        let sys: PdeSystem = catalog::frobenius(catalog::constant(&vars, rat(a, 1)), catalog::constant(&vars, rat(b, 1)));
        let line = QMatrix::from_rows(vec![vec![rat(q, 1)], vec![rat(p, 1)]]);
        let r = noncharacteristic_restrict(&sys, &line).unwrap();
        prop_assert!(r.noncharacteristic);
        let restricted = r.restricted.expect("codimension-one scalar restriction");
        let original = to_flat_connection(&sys).unwrap().rank;
        prop_assert_eq!(to_flat_connection(&restricted).unwrap().rank, original);
        prop_assert_eq!(original, 1);
    }
}
