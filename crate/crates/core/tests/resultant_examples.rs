use std::time::Instant;

use sparse_diffres::diffpoly::parse_poly;
use sparse_diffres::resultant::{dresultant, sdresultant, verify_certificate, Method, ResultantError, ResultantOptions};
use sparse_diffres::{DiffPoly, DiffSystem};

fn same_up_to_scale(a: &DiffPoly, b: &DiffPoly) -> bool {
    a.primitive().0 == b.primitive().0
}

#[test]
fn lattice_example() {
    let sys = DiffSystem::from_strs(2, &["1, y1*y2", "1, y1*y2'", "1, y1'*y2'"]).unwrap();
    let t = Instant::now();
    let out = sdresultant(&sys, &ResultantOptions::default()).unwrap();
    eprintln!("lattice example: {:?} {:?}", t.elapsed(), out.stats);
    let sr = parse_poly("u1_0*u0_1*u2_1*u1_1*u0_0' - u1_0*u0_0*u1_1*u2_1*u0_1' - u0_1^2*u2_1*u1_0^2 - u0_1*u0_0*u1_1^2*u2_0").unwrap();
    assert!(same_up_to_scale(&out.certificate.sr, &sr), "{}", out.certificate.sr);
    assert_eq!(out.certificate.h, vec![Some(1), Some(0), Some(0)]);
    assert_eq!(out.certificate.d, 5);
}

#[test]
fn quadratic_pair() {
    let sys = DiffSystem::from_strs(1, &["y1^2, y1'^2, y1*y1'"; 2]).unwrap();
    let out = sdresultant(&sys, &ResultantOptions::default()).unwrap();
    let sr = parse_poly(
        "u1_1^2*u0_0^2 - 2*u0_1*u1_0*u1_1*u0_0 + u0_1^2*u1_0^2 - u1_2*u0_2*u1_1*u0_0 - u1_2*u0_2*u0_1*u1_0 + u1_2^2*u0_1*u0_0 + u1_0*u1_1*u0_2^2",
    )
    .unwrap();
    assert_eq!(out.certificate.sr.len(), 7);
    assert!(same_up_to_scale(&out.certificate.sr, &sr), "{}", out.certificate.sr);
}

#[test]
fn mixed_order_pair() {
    let sys = DiffSystem::from_strs(1, &["y1, y1', y1^2"; 2]).unwrap();
    let t = Instant::now();
    let out = sdresultant(&sys, &ResultantOptions::default()).unwrap();
    eprintln!("mixed order pair: {:?} {:?}", t.elapsed(), out.stats);
    let sr = parse_poly(
        "-u1_2*u0_1*u0_0*u1_0 - u1_2*u0_1^2*u1_0' + u1_2*u0_1*u1_1'*u0_0 + u1_2*u0_1*u1_1*u0_0' - u1_1*u0_2*u0_0*u1_0 \
         + u1_1*u0_2*u1_0'*u0_1 + u0_2*u0_1*u1_0^2 - u1_1^2*u0_2*u0_0' + u1_1*u0_2*u0_1'*u1_0 + u1_1*u0_0^2*u1_2 \
         + u1_1^2*u0_2'*u0_0 - u1_1*u0_2'*u0_1*u1_0 - u1_1*u0_1*u1_2'*u0_0 + u0_1^2*u1_2'*u1_0 - u1_1*u0_1'*u1_2*u0_0 \
         - u1_1'*u0_2*u0_1*u1_0",
    )
    .unwrap();
    assert_eq!(out.certificate.sr.len(), 16, "{}", out.certificate.sr);
    assert!(same_up_to_scale(&out.certificate.sr, &sr), "{}", out.certificate.sr);
    assert_eq!(out.certificate.h, vec![Some(1), Some(1)]);
}

#[test]
fn proper_subset_example() {
    let sys = DiffSystem::from_strs(3, &["y1*y2, y3", "y1*y2, y3*y3'", "y1*y2, y3'", "y1^(6), y2^(6), y3^(6)"]).unwrap();
    let out = sdresultant(&sys, &ResultantOptions::default()).unwrap();
    let sr = parse_poly(
        // Eliminating y1*y2, y3 and y3' by hand gives
        // u00((u10 u21)' u11 u20 − u10 u21 (u11 u20)') − u01 u10 u11 u20².
        "u0_0*u1_0*u2_1'*u1_1*u2_0 + u0_0*u1_0'*u2_1*u1_1*u2_0 - u0_0*u1_0*u2_1*u1_1'*u2_0 - u0_0*u1_0*u2_1*u1_1*u2_0' - u0_1*u1_0*u1_1*u2_0^2",
    )
    .unwrap();
    assert!(same_up_to_scale(&out.certificate.sr, &sr), "{}", out.certificate.sr);
    assert_eq!(out.certificate.h, vec![Some(0), Some(1), Some(1), None]);
    assert_eq!(out.certificate.subset, vec![0, 1, 2]);
}

#[test]
fn dense_search_on_determinant_example() {
    let sys = DiffSystem::from_strs(2, &["y1'', y1''', y2'''"; 3]).unwrap();
    let a = sdresultant(&sys, &ResultantOptions::default()).unwrap();
    let b = dresultant(&sys, &ResultantOptions::default()).unwrap();
    assert!(same_up_to_scale(&a.certificate.sr, &b.certificate.sr));
    assert!(b.warnings.iter().any(|w| w.contains("below the searched orders")));
}

#[test]
fn dense_first_order_linear() {
    // Generic P_i = u_i0 y + u_i1 y' + u_i2, i = 0, 1: a 4 × 4 determinant of degree 4.
    let sys = DiffSystem::from_strs(1, &["1, y1, y1'"; 2]).unwrap();
    let out = dresultant(&sys, &ResultantOptions::default()).unwrap();
    assert_eq!(out.certificate.d, 4);
    assert_eq!(out.certificate.h, vec![Some(1), Some(1)]);
    verify_certificate(&sys, &out.certificate).unwrap();
}

#[test]
fn joint_method_agrees_on_small_examples() {
    let joint = ResultantOptions { method: Method::Joint, ..Default::default() };
    for sys in [
        DiffSystem::from_strs(2, &["y1'', y1''', y2'''"; 3]).unwrap(),
        DiffSystem::from_strs(1, &["y1^2, y1'^2, y1*y1'"; 2]).unwrap(),
    ] {
        let a = sdresultant(&sys, &ResultantOptions::default()).unwrap();
        let b = sdresultant(&sys, &joint).unwrap();
        assert_eq!(a.certificate.sr, b.certificate.sr);
        assert_eq!(a.certificate.h, b.certificate.h);
    }
}

#[test]
fn joint_method_reports_budget_on_lattice_example() {
    let sys = DiffSystem::from_strs(2, &["1, y1*y2", "1, y1*y2'", "1, y1'*y2'"]).unwrap();
    let opts = ResultantOptions { method: Method::Joint, budget: 2_000, ..Default::default() };
    match sdresultant(&sys, &opts) {
        Ok(out) => assert_eq!(out.certificate.d, 5),
        Err(e) => assert!(matches!(e, ResultantError::BudgetExceeded { .. }), "{e}"),
    }
}
