//! Invariance of projector families under the evolution, and the skew
//! evolution carried by the kernels.
//!
//! A family P_n is invariant when A_n P_n = P_{n+1} A_n: the evolution then
//! maps range(P_n) into range(P_{n+1}) and Ker P_n into Ker P_{n+1}. It is
//! strongly invariant when the restriction of A(m, n) to Ker P_n is an
//! isomorphism onto Ker P_m; on strongly invariant families the inverse of
//! that restriction extends to the skew evolution B(m, n), zero on
//! range(P_m), which plays the role of a backward evolution on the kernels
//! even when the system itself is not invertible.

use crate::numerics::log2::LogMag;
use crate::numerics::matrix::{NormKind, ScaledMatrix};
use crate::numerics::subspace::Subspace;
use crate::numerics::svd::{svd_columns, DEFAULT_RANK_TOL};
use crate::projections::{mat_norm, scaled_residual, CheckResult, ProjectionDef};
use crate::scan;
use crate::system::{EvolutionCache, SystemDef};

/// Restrictions whose singular-value ratio clears rank_tol by less than
/// this factor are not certified as isomorphisms.
const NEAR_SINGULAR_FACTOR: f64 = 10.0;

/// Backward-error scale for the identity X Y = Z.
fn product_scale(x: LogMag, y: LogMag, z: LogMag) -> LogMag {
    x.scale(y).max(z).max(LogMag::ONE_MAG)
}

/// Max over n < window of the relative residual of A_n P_n = P_{n+1} A_n.
pub fn invariance_check(
    sys: &SystemDef,
    proj: &ProjectionDef,
    window: i64,
    kind: NormKind,
    tol: f64,
) -> CheckResult<i64> {
    assert_eq!(sys.dim(), proj.dim(), "system and projection dimensions differ");
    CheckResult::from_scan(
        (0..window).map(|n| {
            let a = sys.step(n);
            let pn = proj.at(n);
            let pm = proj.at(n + 1);
            let na = mat_norm(&a, kind);
            let np = mat_norm(&pn, kind).max(mat_norm(&pm, kind));
            let scale = product_scale(na, np, LogMag::ZERO_MAG);
            (n, scaled_residual(&a.matmul(&pn), &pm.matmul(&a), scale, kind))
        }),
        tol,
    )
}

/// Relative residuals of A(m, n) P_n = P_m A(m, n) over all window pairs;
/// follows from one-step invariance but is measured directly.
pub fn commutation_check(
    cache: &EvolutionCache,
    proj: &ProjectionDef,
    kind: NormKind,
    tol: f64,
) -> CheckResult<(i64, i64)> {
    CheckResult::from_scan(
        scan::pairs(cache.window()).into_iter().map(|(m, n)| {
            let a = cache.evolution(m, n);
            let pn = proj.at(n);
            let pm = proj.at(m);
            let na = mat_norm(a, kind);
            let np = mat_norm(&pn, kind).max(mat_norm(&pm, kind));
            let scale = product_scale(na, np, LogMag::ZERO_MAG);
            ((m, n), scaled_residual(&a.matmul(&pn), &pm.matmul(a), scale, kind))
        }),
        tol,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IsoVerdict {
    Iso,
    NotInjective,
    /// Kept for report completeness; with equal kernel dimensions a
    /// singular restriction is reported NotInjective first.
    NotSurjective,
    DimMismatch,
    ContainmentViolation,
    /// The restriction clears the rank threshold by less than a factor of
    /// ten: too ill conditioned to certify as an isomorphism.
    Inconclusive,
}

impl IsoVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            IsoVerdict::Iso => "iso",
            IsoVerdict::NotInjective => "not_injective",
            IsoVerdict::NotSurjective => "not_surjective",
            IsoVerdict::DimMismatch => "dim_mismatch",
            IsoVerdict::ContainmentViolation => "containment_violation",
            IsoVerdict::Inconclusive => "inconclusive",
        }
    }
}

/// How A(m, n) restricted to Ker P_n sits against Ker P_m.
#[derive(Clone, Copy, Debug)]
pub struct IsoReport {
    pub pair: (i64, i64),
    pub dim_ker_n: usize,
    pub dim_ker_m: usize,
    /// Relative size of P_m A(m, n) K_n, which is zero when the image of
    /// Ker P_n lands inside Ker P_m.
    pub containment_residual: LogMag,
    /// Rank of the restriction in kernel coordinates.
    pub rank: usize,
    pub smallest_singular: LogMag,
    pub largest_singular: LogMag,
    pub verdict: IsoVerdict,
}

/// Orthonormal basis of Ker P_n, computed as the column space of I - P_n.
pub fn kernel_basis(proj: &ProjectionDef, n: i64) -> Subspace {
    Subspace::column_space(&proj.complement_at(n), DEFAULT_RANK_TOL)
}

/// Report plus the coordinate matrix of the restriction (needed to build
/// the skew evolution without repeating the work).
fn restriction_report(
    a: &ScaledMatrix,
    kn: &Subspace,
    km: &Subspace,
    pm: &ScaledMatrix,
    pair: (i64, i64),
    kind: NormKind,
    tol: f64,
) -> (IsoReport, ScaledMatrix) {
    let image = a.matmul(kn.basis());
    let leak = pm.matmul(&image);
    let scale =
        product_scale(mat_norm(pm, kind), mat_norm(&image, kind), LogMag::ZERO_MAG);
    let zero_target = ScaledMatrix::zeros(leak.rows(), leak.cols());
    let containment = scaled_residual(&leak, &zero_target, scale, kind);
    let coord = km.basis().transpose().matmul(&image);
    let mut report = IsoReport {
        pair,
        dim_ker_n: kn.dim(),
        dim_ker_m: km.dim(),
        containment_residual: containment,
        rank: 0,
        smallest_singular: LogMag::VACUOUS_INF,
        largest_singular: LogMag::ZERO_MAG,
        verdict: IsoVerdict::Iso,
    };
    let cut = LogMag::from_log2(tol.log2());
    if !containment.le_tol(cut, 0.0) {
        report.verdict = IsoVerdict::ContainmentViolation;
        return (report, coord);
    }
    if kn.dim() != km.dim() {
        report.verdict = IsoVerdict::DimMismatch;
        return (report, coord);
    }
    if kn.dim() == 0 {
        return (report, coord);
    }
    let svd = svd_columns(&coord);
    report.rank = svd.rank(DEFAULT_RANK_TOL);
    report.largest_singular = LogMag::from_scaled(svd.sigma_max());
    report.smallest_singular = LogMag::from_scaled(svd.sigma_min());
    report.verdict = if report.rank < kn.dim() {
        IsoVerdict::NotInjective
    } else if report.rank < km.dim() {
        IsoVerdict::NotSurjective
    } else {
        let margin = report.largest_singular.scale(LogMag::from_log2(
            (NEAR_SINGULAR_FACTOR * DEFAULT_RANK_TOL).log2(),
        ));
        if report.smallest_singular.le_tol(margin, 0.0) {
            IsoVerdict::Inconclusive
        } else {
            IsoVerdict::Iso
        }
    };
    (report, coord)
}

/// Decides whether A(m, n) restricted to Ker P_n is an isomorphism onto
/// Ker P_m.
pub fn strong_invariance_check(
    sys: &SystemDef,
    proj: &ProjectionDef,
    m: i64,
    n: i64,
    kind: NormKind,
    tol: f64,
) -> IsoReport {
    assert!(m >= n, "pairs require m >= n");
    let a = sys.product_direct(m, n);
    let kn = kernel_basis(proj, n);
    let km = kernel_basis(proj, m);
    let pm = proj.at(m);
    restriction_report(&a, &kn, &km, &pm, (m, n), kind, tol).0
}

#[derive(Clone, Debug, thiserror::Error)]
#[error("evolution over ({}, {}) is not an isomorphism between the kernels: {}", .pair.0, .pair.1, .report.verdict.as_str())]
pub struct NotStronglyInvariant {
    pub pair: (i64, i64),
    pub report: IsoReport,
}

/// B(m, n) as a total operator: inverse of the restriction of A(m, n) to
/// Ker P_n, pre-composed with Q_m so it vanishes on range(P_m).
fn skew_from_parts(
    kn: &Subspace,
    coord: &ScaledMatrix,
    km: &Subspace,
    qm: &ScaledMatrix,
) -> ScaledMatrix {
    let cinv = coord.inverse().expect("restriction certified invertible");
    kn.basis().matmul(&cinv).matmul(&km.basis().transpose()).matmul(qm)
}

/// Skew evolution B(m, n); errors unless the restriction is certified an
/// isomorphism.
pub fn skew_evolution(
    sys: &SystemDef,
    proj: &ProjectionDef,
    m: i64,
    n: i64,
    kind: NormKind,
    tol: f64,
) -> Result<ScaledMatrix, NotStronglyInvariant> {
    assert!(m >= n, "pairs require m >= n");
    let a = sys.product_direct(m, n);
    let kn = kernel_basis(proj, n);
    let km = kernel_basis(proj, m);
    let pm = proj.at(m);
    let (report, coord) = restriction_report(&a, &kn, &km, &pm, (m, n), kind, tol);
    if report.verdict != IsoVerdict::Iso {
        return Err(NotStronglyInvariant { pair: (m, n), report });
    }
    let qm = proj.complement_at(m);
    Ok(skew_from_parts(&kn, &coord, &km, &qm))
}

/// Skew evolutions B(m, n) for every pair in a window, built in one pass.
/// Construction fails on the first pair whose kernel restriction is not an
/// isomorphism, in scan order (m ascending, then n).
pub struct SkewTable {
    window: i64,
    skews: Vec<ScaledMatrix>,
}

impl SkewTable {
    pub fn build(
        cache: &EvolutionCache,
        proj: &ProjectionDef,
        kind: NormKind,
        tol: f64,
    ) -> Result<Self, NotStronglyInvariant> {
        let window = cache.window();
        let kernels: Vec<Subspace> = (0..=window).map(|n| kernel_basis(proj, n)).collect();
        let mut skews: Vec<ScaledMatrix> = Vec::with_capacity(scan::pairs(window).len());
        for (m, n) in scan::pairs(window) {
            let a = cache.evolution(m, n);
            let (report, coord) = restriction_report(
                a,
                &kernels[n as usize],
                &kernels[m as usize],
                &proj.at(m),
                (m, n),
                kind,
                tol,
            );
            if report.verdict != IsoVerdict::Iso {
                return Err(NotStronglyInvariant { pair: (m, n), report });
            }
            let qm = proj.complement_at(m);
            skews.push(skew_from_parts(&kernels[n as usize], &coord, &kernels[m as usize], &qm));
        }
        Ok(SkewTable { window, skews })
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    /// B(m, n); requires 0 <= n <= m <= window.
    pub fn get(&self, m: i64, n: i64) -> &ScaledMatrix {
        assert!(0 <= n && n <= m && m <= self.window, "pair outside table");
        // pairs() scans m ascending then n, so (m, n) lands at m(m+1)/2 + n.
        &self.skews[(m * (m + 1) / 2 + n) as usize]
    }
}

/// Residuals of the defining identities of the skew evolution:
///   b1: A(m,n) B(m,n) Q_m = Q_m     b2: B(m,n) A(m,n) Q_n = Q_n
///   b3: Q_n B(m,n) Q_m = B(m,n) Q_m  b4: B(n,n) = Q_n
///   b5: B(m,p) Q_m = B(n,p) B(m,n) Q_m  over triples m >= n >= p
#[derive(Clone, Debug)]
pub struct SkewResiduals {
    pub b1: CheckResult<(i64, i64)>,
    pub b2: CheckResult<(i64, i64)>,
    pub b3: CheckResult<(i64, i64)>,
    pub b4: CheckResult<i64>,
    pub b5: CheckResult<(i64, i64, i64)>,
}

impl SkewResiduals {
    pub fn ok(&self) -> bool {
        self.b1.ok && self.b2.ok && self.b3.ok && self.b4.ok && self.b5.ok
    }
}

/// Measures b1..b5 over the window. Every pair must pass the isomorphism
/// check; the first that does not aborts the suite.
pub fn skew_identity_suite(
    sys: &SystemDef,
    proj: &ProjectionDef,
    window: i64,
    kind: NormKind,
    tol: f64,
) -> Result<SkewResiduals, NotStronglyInvariant> {
    assert_eq!(sys.dim(), proj.dim(), "system and projection dimensions differ");
    let cache = EvolutionCache::build(sys, window);
    let table = SkewTable::build(&cache, proj, kind, tol)?;
    let qs: Vec<ScaledMatrix> = (0..=window).map(|n| proj.complement_at(n)).collect();
    let idx = |m: i64, n: i64| (m * (m + 1) / 2 + n) as usize;

    let qnorm: Vec<LogMag> = qs.iter().map(|q| mat_norm(q, kind)).collect();
    let bnorm: Vec<LogMag> = table.skews.iter().map(|b| mat_norm(b, kind)).collect();
    let mut b1v = Vec::new();
    let mut b2v = Vec::new();
    let mut b3v = Vec::new();
    for (m, n) in scan::pairs(window) {
        let a = cache.evolution(m, n);
        let b = table.get(m, n);
        let na = mat_norm(a, kind);
        let nb = bnorm[idx(m, n)];
        let (qm, qn) = (&qs[m as usize], &qs[n as usize]);
        b1v.push((
            (m, n),
            scaled_residual(&a.matmul(b), qm, product_scale(na, nb, qnorm[m as usize]), kind),
        ));
        let aq = a.matmul(qn);
        let naq = mat_norm(&aq, kind);
        b2v.push((
            (m, n),
            scaled_residual(&b.matmul(&aq), qn, product_scale(nb, naq, qnorm[n as usize]), kind),
        ));
        b3v.push((
            (m, n),
            scaled_residual(&qn.matmul(b), b, product_scale(qnorm[n as usize], nb, nb), kind),
        ));
    }
    let b4v = (0..=window).map(|n| {
        let scale = qnorm[n as usize].max(LogMag::ONE_MAG);
        (n, scaled_residual(table.get(n, n), &qs[n as usize], scale, kind))
    });
    let b5v = scan::triples(window).into_iter().map(|(m, n, p)| {
        let lhs = table.get(m, p);
        let rhs = table.get(n, p).matmul(table.get(m, n));
        let scale = product_scale(bnorm[idx(n, p)], bnorm[idx(m, n)], bnorm[idx(m, p)]);
        ((m, n, p), scaled_residual(lhs, &rhs, scale, kind))
    });
    Ok(SkewResiduals {
        b1: CheckResult::from_scan(b1v, tol),
        b2: CheckResult::from_scan(b2v, tol),
        b3: CheckResult::from_scan(b3v, tol),
        b4: CheckResult::from_scan(b4v, tol),
        b5: CheckResult::from_scan(b5v, tol),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::scaled::ScaledF64;

    fn steep_plane_projection() -> ProjectionDef {
        ProjectionDef::new("steep-plane", 2, |n| {
            ScaledMatrix::from_fn(2, 2, |i, j| match (i, j) {
                (0, 0) => ScaledF64::ONE,
                (0, 1) => ScaledF64::two_pow(n * n) - ScaledF64::ONE,
                _ => ScaledF64::ZERO,
            })
        })
    }

    fn steep_plane_system() -> SystemDef {
        SystemDef::new("steep-plane", 2, |n| {
            let p = steep_plane_projection();
            let q_next = ScaledMatrix::identity(2).sub(&p.at(n + 1));
            p.at(n).scale(ScaledF64::from_f64(2.0)).add(&q_next.scale(ScaledF64::from_f64(4.0)))
        })
    }

    /// diag(2, a_n, 4) with a_0 = 0, a_n = 4 otherwise; the kernel dimension
    /// of its natural projector family jumps across the first step.
    fn pinch_system() -> SystemDef {
        SystemDef::new("pinch", 3, |n| {
            let a = if n == 0 { 0.0 } else { 4.0 };
            ScaledMatrix::from_rows(&[
                vec![2.0, 0.0, 0.0],
                vec![0.0, a, 0.0],
                vec![0.0, 0.0, 4.0],
            ])
        })
    }

    fn pinch_projection() -> ProjectionDef {
        ProjectionDef::new("pinch", 3, |n| {
            if n == 0 {
                ScaledMatrix::from_rows(&[
                    vec![1.0, 0.0, 0.0],
                    vec![0.0, 1.0, 0.0],
                    vec![0.0, 0.0, 0.0],
                ])
            } else {
                ScaledMatrix::from_fn(3, 3, |i, j| match (i, j) {
                    (0, 0) => ScaledF64::ONE,
                    (0, 1) => ScaledF64::two_pow(1 - n),
                    _ => ScaledF64::ZERO,
                })
            }
        })
    }

    #[test]
    fn steep_plane_family_is_invariant() {
        let r = invariance_check(&steep_plane_system(), &steep_plane_projection(), 20, NormKind::Sup, 1e-9);
        assert!(r.ok, "{r:?}");
    }

    #[test]
    fn pinch_family_is_invariant_but_kernel_dims_jump() {
        let sys = pinch_system();
        let proj = pinch_projection();
        let inv = invariance_check(&sys, &proj, 40, NormKind::Sup, 1e-9);
        assert!(inv.ok, "{inv:?}");
        let report = strong_invariance_check(&sys, &proj, 1, 0, NormKind::Sup, 1e-9);
        assert_eq!(report.verdict, IsoVerdict::DimMismatch);
        assert_eq!((report.dim_ker_n, report.dim_ker_m), (1, 2));
    }

    #[test]
    fn perturbed_step_breaks_invariance_at_zero() {
        let sys = SystemDef::new("perturbed", 2, |n| {
            let mut a = steep_plane_system().step(n);
            if n == 0 {
                a.set(0, 1, a.get(0, 1) + ScaledF64::from_f64(0.01));
            }
            a
        });
        let r = invariance_check(&sys, &steep_plane_projection(), 5, NormKind::Sup, 1e-9);
        assert!(!r.ok);
        assert_eq!(r.first_fail, Some(0));
    }

    #[test]
    fn steep_plane_restrictions_are_isomorphisms() {
        let sys = steep_plane_system();
        let proj = steep_plane_projection();
        for (m, n) in [(0i64, 0i64), (3, 1), (10, 4), (15, 15)] {
            let report = strong_invariance_check(&sys, &proj, m, n, NormKind::Sup, 1e-9);
            assert_eq!(report.verdict, IsoVerdict::Iso, "{report:?}");
            assert_eq!(report.rank, 1);
        }
    }

    #[test]
    fn skew_at_equal_indices_is_the_complement() {
        let proj = steep_plane_projection();
        let b = skew_evolution(&steep_plane_system(), &proj, 7, 7, NormKind::Sup, 1e-9).unwrap();
        let q = proj.complement_at(7);
        let res = scaled_residual(&b, &q, mat_norm(&q, NormKind::Sup), NormKind::Sup);
        assert!(res.le_tol(LogMag::from_log2(-45.0), 0.0), "residual {res:?}");
    }

    #[test]
    fn pinned_skew_value_on_steep_plane() {
        // On this system the skew evolution contracts by 4^(n-m) and lands
        // on the complement at the start index: B(3,1) = 4^(-2) Q_1.
        let proj = steep_plane_projection();
        let b = skew_evolution(&steep_plane_system(), &proj, 3, 1, NormKind::Sup, 1e-9).unwrap();
        let target = proj.complement_at(1).scale(ScaledF64::from_f64(0.0625));
        let res = scaled_residual(&b, &target, mat_norm(&target, NormKind::Sup), NormKind::Sup);
        assert!(res.le_tol(LogMag::from_log2(-30.0), 0.0), "residual {res:?}");
    }

    #[test]
    fn skew_suite_passes_on_steep_plane() {
        let suite =
            skew_identity_suite(&steep_plane_system(), &steep_plane_projection(), 15, NormKind::Sup, 1e-9)
                .unwrap();
        assert!(suite.ok(), "{suite:?}");
    }

    #[test]
    fn skew_suite_is_exact_for_constant_diagonal_data() {
        let sys = SystemDef::new("identity", 2, |_| ScaledMatrix::identity(2));
        let proj = ProjectionDef::new("diag", 2, |_| {
            ScaledMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]])
        });
        let suite = skew_identity_suite(&sys, &proj, 6, NormKind::Sup, 1e-9).unwrap();
        assert!(suite.b1.max_residual.is_zero_mag());
        assert!(suite.b5.max_residual.is_zero_mag());
    }

    #[test]
    fn skew_matches_inverse_evolution_on_reversible_system() {
        // For invertible steps with P transported by conjugation, the skew
        // evolution must agree with A(m,n)^{-1} Q_m.
        let step = ScaledMatrix::from_rows(&[vec![0.4, 1.0], vec![-1.0, 0.5]]);
        let sys = SystemDef::new("reversible", 2, move |_| step.clone());
        let proj = ProjectionDef::new("conjugated", 2, move |n| {
            let a = SystemDef::new(
                "reversible",
                2,
                |_| ScaledMatrix::from_rows(&[vec![0.4, 1.0], vec![-1.0, 0.5]]),
            )
            .product_direct(n, 0);
            let p0 = ScaledMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
            a.matmul(&p0).matmul(&a.inverse().unwrap())
        });
        for (m, n) in [(4i64, 1i64), (6, 0), (5, 5)] {
            let b = skew_evolution(&sys, &proj, m, n, NormKind::Two, 1e-9).unwrap();
            let oracle = sys.product_direct(m, n).inverse().unwrap().matmul(&proj.complement_at(m));
            let res = scaled_residual(&b, &oracle, mat_norm(&oracle, NormKind::Two), NormKind::Two);
            assert!(res.le_tol(LogMag::from_log2(-26.6), 0.0), "({m},{n}) residual {res:?}");
        }
    }

    #[test]
    fn suite_aborts_on_kernel_dimension_jump() {
        let err = skew_identity_suite(&pinch_system(), &pinch_projection(), 5, NormKind::Sup, 1e-9)
            .unwrap_err();
        assert_eq!(err.pair, (1, 0));
        assert_eq!(err.report.verdict, IsoVerdict::DimMismatch);
    }
}
