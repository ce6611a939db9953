//! Structural invariants checked over seeded random families: bracket
//! ordering, cocycle and invariance residuals, identity suites, fit
//! soundness, witness persistence, and the implication diagram.

use expsplit::corpus::{builtin, random_reversible, shared_range_variant, BUILTIN_NAMES};
use expsplit::invariance::{invariance_check, skew_identity_suite};
use expsplit::numerics::log2::LogMag;
use expsplit::projections::{shared_range_identities, validate_projection};
use expsplit::splitting::{
    classify_with_certs, find_violation, fit_certificate, gain_table, kernel_injectivity_check,
    verify_certificate, Concept, Verdict, VerifyOutcome,
};
use expsplit::{Certificate, EvolutionCache};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn log_tol() -> LogMag {
    LogMag::from_log2(TOL.log2())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn gain_brackets_are_ordered_and_dims_split(seed in 0u64..500, dim in 2usize..=6) {
        let e = random_reversible(seed, dim, 4);
        let t = gain_table(&e.system, &e.projection, 4, e.norm, TOL);
        prop_assert!(t.has_skew());
        for n in 0..t.p_dims.len() {
            prop_assert_eq!(t.p_dims[n] + t.q_dims[n], dim);
        }
        let eps = 1e-6;
        for pg in &t.pairs {
            prop_assert!(pg.range_sup.lo.log2() <= pg.range_sup.hi.log2() + eps);
            prop_assert!(pg.kernel_inf.lo.log2() <= pg.kernel_inf.hi.log2() + eps);
            // Restricted sup never exceeds the full norm of A(m,n) P_n,
            // and the full norm pays at most the projector norm over it.
            let p_norm = t.p_norms[pg.pair.1 as usize].log2();
            prop_assert!(pg.range_sup.lo.log2() <= pg.range_norm.log2() + eps);
            prop_assert!(pg.range_norm.log2() <= pg.range_sup.hi.log2() + p_norm + eps);
            if let (Some(ss), Some(sn)) = (&pg.skew_sup, &pg.skew_norm) {
                prop_assert!(ss.lo.log2() <= ss.hi.log2() + eps);
                prop_assert!(ss.lo.log2() <= sn.log2() + eps);
            }
        }
    }

    #[test]
    fn cache_agrees_with_direct_products(seed in 0u64..500, dim in 2usize..=4) {
        let e = random_reversible(seed, dim, 6);
        let cache = EvolutionCache::build(&e.system, 6);
        for m in 0..=6i64 {
            for n in 0..=m {
                let diff = cache.evolution(m, n).sub(&e.system.product_direct(m, n));
                prop_assert!(diff.sup_norm().is_zero(), "({m},{n})");
            }
        }
    }

    #[test]
    fn conjugated_families_stay_invariant(seed in 0u64..500, dim in 2usize..=4) {
        let e = random_reversible(seed, dim, 5);
        prop_assert!(validate_projection(&e.projection, 5, e.norm, TOL).ok());
        prop_assert!(invariance_check(&e.system, &e.projection, 5, e.norm, TOL).ok);
        let cache = EvolutionCache::build(&e.system, 5);
        for p in 0..=5i64 {
            for n in p..=5 {
                for m in n..=5 {
                    let r = cache.cocycle_residual(m, n, p, e.norm);
                    prop_assert!(r.le_tol(log_tol(), 0.0), "({m},{n},{p}): {:?}", r.log2());
                }
            }
        }
    }

    #[test]
    fn skew_identities_hold_for_reversible_families(seed in 0u64..500, dim in 2usize..=4) {
        let e = random_reversible(seed, dim, 4);
        let res = skew_identity_suite(&e.system, &e.projection, 4, e.norm, TOL).unwrap();
        prop_assert!(res.ok(), "b1 {:?} b2 {:?} b3 {:?} b4 {:?} b5 {:?}",
            res.b1.max_residual.log2(), res.b2.max_residual.log2(),
            res.b3.max_residual.log2(), res.b4.max_residual.log2(),
            res.b5.max_residual.log2());
    }

    #[test]
    fn shared_range_couplings_keep_the_identities(seed in 0u64..500, dim in 2usize..=6) {
        let e = random_reversible(seed, dim, 4);
        let r = shared_range_variant(&e.projection, seed ^ 0xABCD);
        prop_assert!(validate_projection(&r, 4, e.norm, TOL).ok());
        let res = shared_range_identities(&e.projection, &r, 4, e.norm, TOL).unwrap();
        prop_assert!(res.ok());
    }

    #[test]
    fn fitted_certificates_verify_on_their_own_table(seed in 0u64..500, dim in 2usize..=3) {
        let e = random_reversible(seed, dim, 5);
        let t = gain_table(&e.system, &e.projection, 5, e.norm, TOL);
        for concept in [Concept::Es, Concept::Ues] {
            if let Ok(cert) = fit_certificate(&t, concept, expsplit::DEFAULT_N_CAP.log2(), TOL) {
                let out = verify_certificate(&t, &cert, TOL).unwrap();
                prop_assert!(matches!(out, VerifyOutcome::Ok), "{concept:?}: {out:?}");
            }
        }
    }
}

#[test]
fn violation_witnesses_persist_as_the_window_grows() {
    // The first refutation in scan order can only move earlier when
    // deeper pairs join the table; for this claim it never does.
    let e = builtin("example3_r2").unwrap();
    let claim = Certificate::new(Concept::Ues, 100f64.log2(), 0.0, 1.0, 2.0).unwrap();
    for w in 14..=24 {
        let t = gain_table(&e.system, &e.projection, w, e.norm, TOL);
        let witness = find_violation(&t, &claim, TOL)
            .unwrap_or_else(|| panic!("no witness at window {w}"));
        assert_eq!(witness.pair, (14, 13), "window {w}");
    }
    // Below the binding pair no violation is visible at all.
    let t = gain_table(&e.system, &e.projection, 13, e.norm, TOL);
    assert!(find_violation(&t, &claim, TOL).is_none());
}

#[test]
fn certified_concepts_certify_everything_they_imply() {
    for name in BUILTIN_NAMES {
        let e = builtin(name).unwrap();
        let report = classify_with_certs(
            &e.system,
            &e.projection,
            &e.certificates,
            e.window,
            e.norm,
            expsplit::DEFAULT_N_CAP.log2(),
            TOL,
        );
        for cv in &report.verdicts {
            let certified = matches!(
                cv.verdict,
                Verdict::CertifiedByUser(_) | Verdict::CertifiedByFit(_)
            );
            if !certified {
                continue;
            }
            for implied in cv.concept.implies() {
                let down = report.verdict(*implied);
                assert!(
                    matches!(down, Verdict::CertifiedByUser(_) | Verdict::CertifiedByFit(_)),
                    "{name}: {:?} certified but implied {:?} is {}",
                    cv.concept,
                    implied,
                    down.status_str()
                );
            }
        }
    }
}

#[test]
fn restrictions_stay_injective_under_certified_splittings() {
    // Entries holding a verified restricted-family certificate must
    // have injective kernel restrictions on every pair.
    for name in ["example2_r2", "example3_r2", "example4_block"] {
        let e = builtin(name).unwrap();
        let records = kernel_injectivity_check(&e.system, &e.projection, 10, 1e-12);
        for rec in records {
            assert!(rec.injective, "{name}: pair {:?}", rec.pair);
        }
    }
}
