use mob::catalog::{Catalog, CatalogError, CheckOptions, Params, Verdict};
use mob::report::relative_gap;
use proptest::prelude::*;

fn params(kv: &[(&str, f64)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

const LOW: [(f64, f64, f64); 5] = [
    (1.0, 0.5, 1.0),
    (2.0, 0.3, 1.5),
    (1.5, -0.4, 1.0),
    (1.0, 0.9, 1.0),
    (3.0, 1.0, 2.0),
];

fn with_n(p: (f64, f64, f64), n: f64) -> Params {
    params(&[("a", p.0), ("b", p.1), ("c", p.2), ("n", n)])
}

#[test]
fn entry3_derivative_form_matches_i2() {
    let cat = Catalog::builtin();
    for n in [0.0, 1.0, 2.0] {
        for p in LOW {
            let pm = with_n(p, n);
            let r = cat.eval_reference_form("3.252-3", &pm).unwrap();
            let c = cat.eval_entry("3.252-3/I2", &pm).unwrap();
            assert!(relative_gap(r, c) < 1e-10, "n = {n}, {p:?}: {r} vs {c}");
        }
    }
}

#[test]
fn entry4_derivative_form_matches_i2() {
    let cat = Catalog::builtin();
    for n in [2.0, 3.0] {
        for p in LOW {
            let pm = with_n(p, n);
            let r = cat.eval_reference_form("3.252-4", &pm).unwrap();
            let c = cat.eval_entry("3.252-4/I2", &pm).unwrap();
            assert!(relative_gap(r, c) < 1e-9, "n = {n}, {p:?}: {r} vs {c}");
        }
    }
}

#[test]
fn entry4_printed_prefactor_mismatch_is_constant() {
    // Above n = 3 the printed (n-1)!! differs from (n-1)! by the ratio
    // (n-1)!/(n-1)!!: 2 at n = 4 and 3 at n = 5.
    let cat = Catalog::builtin();
    for (n, factor) in [(4.0, 2.0), (5.0, 3.0)] {
        for p in LOW {
            let pm = with_n(p, n);
            let r = cat.eval_reference_form("3.252-4", &pm).unwrap();
            let c = cat.eval_entry("3.252-4/I2", &pm).unwrap();
            assert!((r / c - factor).norm() < 1e-9, "n = {n}: ratio {}", r / c);
        }
    }
}

#[test]
fn entry4_log_branch_matches_oracle() {
    let r = Catalog::builtin().crosscheck(
        "3.252-4",
        &with_n((1.0, 2.0, 1.0), 2.0),
        &CheckOptions::default(),
    );
    // integer n on the I13 side: the closed form and the pole-struck series
    // are both singular, leaving the derivative form and the oracle
    assert_eq!(r.verdict, Verdict::Indeterminate);
    assert!(r.source("closed_form").unwrap().error.as_deref().unwrap().contains("not valid"));
    assert!(r.value("engine").is_none());
    let gap = relative_gap(r.value("reference").unwrap(), r.value("oracle").unwrap());
    assert!(gap < 1e-10, "{gap}");
}

#[test]
fn reference_orders_are_limited() {
    let cat = Catalog::builtin();
    assert!(matches!(
        cat.eval_reference_form("3.252-1", &with_n((1.0, 0.5, 1.0), 5.0)),
        Err(CatalogError::UnsupportedOrder { .. })
    ));
    assert!(matches!(
        cat.eval_reference_form("3.252-3", &with_n((1.0, 0.5, 1.0), 0.5)),
        Err(CatalogError::UnsupportedOrder { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn region_guards_partition(a in 0.01f64..10.0, b in 0.01f64..10.0, c in 0.01f64..10.0) {
        let z = b * b / (a * c);
        let low = z.abs() < 1.0;
        let high = (1.0 / z).abs() < 1.0;
        prop_assert!(low ^ high || z == 1.0);
        let cat = Catalog::builtin();
        let e = cat.get("3.252-1").unwrap();
        let branch = e.active_branch(&params(&[("a", a), ("b", b), ("c", c), ("n", 1.5)]));
        match branch {
            Ok("I2") => prop_assert!(low),
            Ok("I13") => prop_assert!(high),
            Ok(other) => prop_assert!(false, "unexpected branch {}", other),
            Err(_) => prop_assert!((z - 1.0).abs() <= 1e-12),
        }
    }

    #[test]
    fn quartic_crosscheck_passes(b in 0.05f64..4.0, m in 0.6f64..2.4) {
        prop_assume!((b - 1.0).abs() > 0.05);
        prop_assume!(((2.0 * m) - (2.0 * m).round()).abs() > 0.05);
        let r = Catalog::builtin().crosscheck(
            "quartic",
            &params(&[("a", 1.0), ("b", b), ("c", 1.0), ("m", m)]),
            &CheckOptions::default(),
        );
        prop_assert_eq!(r.verdict, Verdict::Pass, "{:?}", r);
    }
}
