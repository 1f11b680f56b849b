//! Law checks for the trust monoids over randomized inputs.

use proptest::prelude::*;

use trustlab::algebra::{par_all, TrustTriple, FULL_DISTRUST, FULL_TRUST, NO_RELATION};

const TOL: f64 = 1e-12;

fn triples() -> impl Strategy<Value = TrustTriple> {
    (0.0..=1.0f64, 0.0..=1.0f64).prop_map(|(u, v)| {
        let (td, dtd) = if u + v > 1.0 {
            (1.0 - u, 1.0 - v)
        } else {
            (u, v)
        };
        TrustTriple::new(td, dtd).expect("reflected point lies on the simplex")
    })
}

/// Triples with some real uncertainty and substance on both stored legs,
/// used where strictness claims need interior points.
fn interior_triples() -> impl Strategy<Value = TrustTriple> {
    (0.05..=0.9f64, 0.05..=0.9f64).prop_map(|(td, share)| {
        let dtd = (1.0 - td) * share * 0.9;
        TrustTriple::new(td, dtd).expect("interior point")
    })
}

fn assert_valid(x: TrustTriple) {
    assert!((0.0..=1.0).contains(&x.td()), "td out of range: {x}");
    assert!((0.0..=1.0).contains(&x.dtd()), "dtd out of range: {x}");
    assert!((0.0..=1.0).contains(&x.ud()), "ud out of range: {x}");
    assert!(
        (x.td() + x.dtd() + x.ud() - 1.0).abs() <= TOL,
        "unit sum violated: {x}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn closure(x in triples(), y in triples()) {
        assert_valid(x.seq(y));
        assert_valid(x.par(y));
    }

    #[test]
    fn seq_associates(x in triples(), y in triples(), z in triples()) {
        let left = x.seq(y).seq(z);
        let right = x.seq(y.seq(z));
        prop_assert!(left.approx_eq(right, TOL), "{left} vs {right}");
    }

    #[test]
    fn par_associates(x in triples(), y in triples(), z in triples()) {
        let left = x.par(y).par(z);
        let right = x.par(y.par(z));
        prop_assert!(left.approx_eq(right, TOL), "{left} vs {right}");
    }

    #[test]
    fn par_commutes(x in triples(), y in triples()) {
        prop_assert_eq!(x.par(y), y.par(x));
    }

    // Both components of the sequential formula are symmetric in their
    // arguments, so seq commutes as a value map (path direction lives in the
    // graph, not in the operator).
    #[test]
    fn seq_commutes(x in triples(), y in triples()) {
        prop_assert_eq!(x.seq(y), y.seq(x));
    }

    #[test]
    fn identities_and_absorber_hold_exactly(x in triples()) {
        prop_assert_eq!(FULL_TRUST.seq(x), x);
        prop_assert_eq!(x.seq(FULL_TRUST), x);
        prop_assert_eq!(NO_RELATION.seq(x), NO_RELATION);
        prop_assert_eq!(x.seq(NO_RELATION), NO_RELATION);
        prop_assert_eq!(FULL_DISTRUST.par(x), x);
        prop_assert_eq!(x.par(FULL_DISTRUST), x);
    }

    #[test]
    fn seq_never_decreases_uncertainty(x in triples(), y in triples()) {
        let z = x.seq(y);
        prop_assert!(z.ud() >= x.ud().max(y.ud()) - TOL, "{x} . {y} = {z}");
    }

    #[test]
    fn seq_strictly_increases_uncertainty_in_the_interior(
        x in interior_triples(),
        y in interior_triples(),
    ) {
        let z = x.seq(y);
        prop_assert!(z.ud() > x.ud().max(y.ud()), "{x} . {y} = {z}");
    }

    #[test]
    fn par_matches_the_product_form(xs in prop::collection::vec(triples(), 1..6)) {
        let got = par_all(&xs).unwrap();
        let td = 1.0 - xs.iter().map(|x| 1.0 - x.td()).product::<f64>();
        let dtd = xs.iter().map(|x| x.dtd()).product::<f64>();
        prop_assert!((got.td() - td).abs() <= TOL);
        prop_assert!((got.dtd() - dtd).abs() <= TOL);
    }

    // seq does not distribute over par, not even with distrust pinned to
    // zero: the two sides differ by exactly td(x)·td(y)·td(z)·(1 − td(x)) on
    // the trust leg.
    #[test]
    fn non_distributivity_gap_without_distrust(
        x in 0.05..0.95f64,
        y in 0.05..0.95f64,
        z in 0.05..0.95f64,
    ) {
        let (tx, ty, tz) = (
            TrustTriple::new(x, 0.0).unwrap(),
            TrustTriple::new(y, 0.0).unwrap(),
            TrustTriple::new(z, 0.0).unwrap(),
        );
        let lhs = tx.seq(ty.par(tz));
        let rhs = tx.seq(ty).par(tx.seq(tz));
        let gap = rhs.td() - lhs.td();
        prop_assert!((gap - x * y * z * (1.0 - x)).abs() <= 1e-9, "gap {gap}");
    }
}

#[test]
fn non_distributivity_witness() {
    // seq(x, par(y, z)) != par(seq(x, y), seq(x, z)) at
    // x = ⟨0,1,0⟩, y = ⟨1,0,0⟩, z = ⟨0,1,0⟩: ⟨0,1,0⟩ on the left (distrust of
    // a fully trusted aggregate) vs ⟨1,0,0⟩ on the right.
    let lhs = FULL_DISTRUST.seq(FULL_TRUST.par(FULL_DISTRUST));
    let rhs = FULL_DISTRUST
        .seq(FULL_TRUST)
        .par(FULL_DISTRUST.seq(FULL_DISTRUST));
    assert_eq!(lhs, FULL_DISTRUST);
    assert_eq!(rhs, FULL_TRUST);
    assert_ne!(lhs, rhs);

    // And a plain numeric witness away from the corners.
    let x = TrustTriple::new(0.8, 0.1).unwrap();
    let y = TrustTriple::new(0.5, 0.3).unwrap();
    let z = TrustTriple::new(0.4, 0.2).unwrap();
    let lhs = x.seq(y.par(z));
    let rhs = x.seq(y).par(x.seq(z));
    assert!(!lhs.approx_eq(rhs, 1e-6), "{lhs} vs {rhs}");
}

#[test]
fn uncertainty_stays_flat_at_the_boundary() {
    // Full uncertainty on one side pins the result at full uncertainty; the
    // strictness of the growth lemma needs interior points.
    let x = TrustTriple::new(0.0, 0.0).unwrap();
    let y = TrustTriple::new(0.3, 0.3).unwrap();
    assert_eq!(x.seq(y).ud(), 1.0);
}
