//! Invariants of every computed resultant on random small systems.

use proptest::prelude::*;
use sparse_diffres::essential::{is_essential, Mode};
use sparse_diffres::linalg::Backend;
use sparse_diffres::resultant::{sdresultant, verify_certificate, ResultantError, ResultantOptions};
use sparse_diffres::verify::{homogeneity_check, membership_check};
use sparse_diffres::{DerivVar, DiffSystem, Monomial};

const POOL: &[&str] = &["1", "y1", "y1'", "y1^2", "y1*y1'", "y1'^2", "y1''"];

fn support() -> impl Strategy<Value = Vec<usize>> {
    proptest::sample::subsequence((0..POOL.len()).collect::<Vec<_>>(), 2..=3)
}

fn system(a: &[usize], b: &[usize]) -> DiffSystem {
    let mons = |s: &[usize]| s.iter().map(|&k| POOL[k].parse::<Monomial>().unwrap()).collect::<Vec<_>>();
    DiffSystem::new(1, vec![mons(a), mons(b)]).unwrap()
}

fn small_opts() -> ResultantOptions {
    ResultantOptions { budget: 4_000, max_degree: Some(6), ..Default::default() }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn computed_resultants_satisfy_all_checks(a in support(), b in support()) {
        let sys = system(&a, &b);
        prop_assume!(is_essential(&sys, Mode::default()).unwrap().essential);
        let out = match sdresultant(&sys, &small_opts()) {
            Ok(o) => o,
            Err(ResultantError::BudgetExceeded { .. }) | Err(ResultantError::NotFound { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let c = &out.certificate;
        prop_assert!(verify_certificate(&sys, c).is_ok());
        prop_assert!(!c.sr.has_y());
        prop_assert_eq!(c.sr.total_degree(), Some(c.d as i64));
        for i in 0..2 {
            if c.h[i].is_some() {
                prop_assert!(homogeneity_check(&c.sr, i).passed);
            }
        }
        prop_assert!(membership_check(&c.sr, &sys, 12, 5, 3).unwrap().passed);
        // canonical form: primitive with positive leading coefficient
        prop_assert_eq!(&c.sr.primitive().0, &c.sr);

        let ff = ResultantOptions { backend: Backend::FractionFree, ..small_opts() };
        let other = sdresultant(&sys, &ff).unwrap();
        prop_assert_eq!(&other.certificate.sr, &c.sr);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let single = pool.install(|| sdresultant(&sys, &small_opts())).unwrap();
        prop_assert_eq!(&single.certificate.sr, &c.sr);
    }

    #[test]
    fn realized_orders_respect_bounds(a in support(), b in support()) {
        let sys = system(&a, &b);
        prop_assume!(is_essential(&sys, Mode::default()).unwrap().essential);
        if let Ok(out) = sdresultant(&sys, &small_opts()) {
            let rep = sparse_diffres::bounds::order_bounds(&sys).unwrap();
            for (h, b) in out.certificate.h.iter().zip(&rep.bound) {
                if let (Some(h), Some(b)) = (h, b) {
                    prop_assert!((*h as i64) <= *b);
                }
            }
            let deg = sparse_diffres::bounds::degree_bound(&sys, &out.certificate.h);
            prop_assert!(num_bigint::BigUint::from(out.certificate.d) <= deg);
            // the top-order partial derivative is nonzero in every present block
            for (i, h) in out.certificate.h.iter().enumerate() {
                if let Some(h) = h {
                    let any = (0..sys.support(i).len()).any(|k| !out.certificate.sr.partial(&DerivVar::u(i as u32, k as u32, *h)).is_zero());
                    prop_assert!(any);
                }
            }
        }
    }
}
