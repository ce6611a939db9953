//! Projector families and their algebra.
//!
//! A splitting is carried by projectors P_n, with the complement always
//! computed as Q_n = I - P_n. This module validates candidate families
//! (idempotence, rank profile), measures the residuals of the identities
//! tying two families with a common range, and fits or certifies
//! exponential envelopes M p^n on ||P_n||.
//!
//! Residuals of product identities are scaled backward-error style, by the
//! product of the factor norms plus the target norm, so a steeply graded
//! family reports roundoff-level residuals instead of drowning the check
//! in cancellation of its own large intermediates.

use crate::numerics::log2::LogMag;
use crate::numerics::matrix::{NormKind, ScaledMatrix};
use crate::numerics::svd::{operator_norm, svd_columns, DEFAULT_RANK_TOL};

type ProjRule = std::sync::Arc<dyn Fn(i64) -> ScaledMatrix + Send + Sync>;

/// A time-indexed projector family P_n.
#[derive(Clone)]
pub struct ProjectionDef {
    name: String,
    dim: usize,
    rule: ProjRule,
}

impl ProjectionDef {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        rule: impl Fn(i64) -> ScaledMatrix + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), dim, rule: std::sync::Arc::new(rule) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, n: i64) -> ScaledMatrix {
        let p = (self.rule)(n);
        assert_eq!(
            (p.rows(), p.cols()),
            (self.dim, self.dim),
            "projector shape differs from the declared dimension"
        );
        p
    }

    /// Complement Q_n = I - P_n.
    pub fn complement_at(&self, n: i64) -> ScaledMatrix {
        ScaledMatrix::identity(self.dim).sub(&self.at(n))
    }
}

impl std::fmt::Debug for ProjectionDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProjectionDef").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

/// Outcome of one residual check scanned over a window. The witness type
/// is the scan index: a time n, a pair (m, n), or a triple (m, n, p).
#[derive(Clone, Copy, Debug)]
pub struct CheckResult<W = i64> {
    pub ok: bool,
    /// Largest relative residual seen.
    pub max_residual: LogMag,
    /// Index where the largest residual occurred (None for an empty scan).
    pub max_at: Option<W>,
    /// First index whose residual exceeded the tolerance.
    pub first_fail: Option<W>,
}

impl<W: Copy> CheckResult<W> {
    pub(crate) fn from_scan(residuals: impl IntoIterator<Item = (W, LogMag)>, tol: f64) -> Self {
        let cut = LogMag::from_log2(tol.log2());
        let mut out =
            Self { ok: true, max_residual: LogMag::ZERO_MAG, max_at: None, first_fail: None };
        for (n, r) in residuals {
            if out.max_at.is_none() || !r.le_tol(out.max_residual, 0.0) {
                out.max_residual = out.max_residual.max(r);
                out.max_at = Some(n);
            }
            if !r.le_tol(cut, 0.0) && out.first_fail.is_none() {
                out.first_fail = Some(n);
                out.ok = false;
            }
        }
        out
    }
}

/// ||computed - target|| / scale, with exact zero preserved.
pub(crate) fn scaled_residual(
    computed: &ScaledMatrix,
    target: &ScaledMatrix,
    scale: LogMag,
    kind: NormKind,
) -> LogMag {
    let diff = computed.sub(target);
    if diff.is_zero() {
        return LogMag::ZERO_MAG;
    }
    LogMag::from_scaled(operator_norm(&diff, kind)).ratio(scale)
}

pub(crate) fn mat_norm(a: &ScaledMatrix, kind: NormKind) -> LogMag {
    LogMag::from_scaled(operator_norm(a, kind))
}

/// Backward-error scale for the identity X Y = Z.
fn product_scale(x: LogMag, y: LogMag, z: LogMag) -> LogMag {
    x.scale(y).max(z).max(LogMag::ONE_MAG)
}

/// First place the projector rank changes along the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RankStep {
    /// (n + 1, n) for the first step across which the rank changed.
    pub pair: (i64, i64),
    /// Ranks at n + 1 and at n.
    pub ranks: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct ProjectionValidation {
    pub idempotent: CheckResult,
    /// rank P_n for n = 0..=window.
    pub ranks: Vec<usize>,
    /// First step where the rank changes, if any.
    pub rank_step: Option<RankStep>,
}

impl ProjectionValidation {
    pub fn ok(&self) -> bool {
        self.idempotent.ok
    }
}

/// Checks P_n^2 = P_n over the window and records the rank profile.
pub fn validate_projection(
    proj: &ProjectionDef,
    window: i64,
    kind: NormKind,
    tol: f64,
) -> ProjectionValidation {
    let idem = CheckResult::from_scan(
        (0..=window).map(|n| {
            let p = proj.at(n);
            let np = mat_norm(&p, kind);
            (n, scaled_residual(&p.matmul(&p), &p, product_scale(np, np, np), kind))
        }),
        tol,
    );
    let ranks: Vec<usize> =
        (0..=window).map(|n| svd_columns(&proj.at(n)).rank(DEFAULT_RANK_TOL)).collect();
    let rank_step = ranks.windows(2).enumerate().find_map(|(n, w)| {
        (w[1] != w[0]).then_some(RankStep { pair: (n as i64 + 1, n as i64), ranks: (w[1], w[0]) })
    });
    ProjectionValidation { idempotent: idem, ranks, rank_step }
}

/// The two families do not project onto the same range at index n.
#[derive(Clone, Copy, Debug, thiserror::Error)]
#[error("projector ranges differ at n = {n}")]
pub struct RangeMismatch {
    pub n: i64,
    pub residual: LogMag,
}

/// Residuals of the identities tying two projector families with a common
/// range: with Q = I - P and S = I - R,
///   r1: P R = R          r2: R P = P
///   r3: Q S = Q = (I + R - P) S
///   r4: S Q = S = (I + P - R) Q
#[derive(Clone, Debug)]
pub struct IdentityResiduals {
    pub r1: CheckResult,
    pub r2: CheckResult,
    pub r3: CheckResult,
    pub r4: CheckResult,
}

impl IdentityResiduals {
    pub fn ok(&self) -> bool {
        self.r1.ok && self.r2.ok && self.r3.ok && self.r4.ok
    }
}

/// Measures r1..r4 over the window.
///
/// Precondition, checked first: Range P_n = Range R_n for every n, decided
/// by the mutual projection residuals ||P R - R|| and ||R P - P|| against
/// tol times the larger family norm. A failure is a range mismatch, not a
/// residual report.
pub fn shared_range_identities(
    p_def: &ProjectionDef,
    r_def: &ProjectionDef,
    window: i64,
    kind: NormKind,
    tol: f64,
) -> Result<IdentityResiduals, RangeMismatch> {
    assert_eq!(p_def.dim(), r_def.dim(), "projector family dimensions differ");
    let eye = ScaledMatrix::identity(p_def.dim());
    let cut = LogMag::from_log2(tol.log2());
    let mut r1v = Vec::new();
    let mut r2v = Vec::new();
    let mut r3v = Vec::new();
    let mut r4v = Vec::new();
    for n in 0..=window {
        let p = p_def.at(n);
        let r = r_def.at(n);
        let np = mat_norm(&p, kind);
        let nr = mat_norm(&r, kind);
        let family_scale = np.max(nr).max(LogMag::ONE_MAG);
        let pr = p.matmul(&r);
        let rp = r.matmul(&p);
        for (prod, target) in [(&pr, &r), (&rp, &p)] {
            let res = scaled_residual(prod, target, family_scale, kind);
            if !res.le_tol(cut, 0.0) {
                return Err(RangeMismatch { n, residual: res });
            }
        }
        let q = eye.sub(&p);
        let s = eye.sub(&r);
        let nq = mat_norm(&q, kind);
        let ns = mat_norm(&s, kind);
        r1v.push((n, scaled_residual(&pr, &r, product_scale(np, nr, nr), kind)));
        r2v.push((n, scaled_residual(&rp, &p, product_scale(nr, np, np), kind)));
        let bridge_q = eye.add(&r).sub(&p);
        let nbq = mat_norm(&bridge_q, kind);
        let direct = scaled_residual(&q.matmul(&s), &q, product_scale(nq, ns, nq), kind);
        let bridged = scaled_residual(&bridge_q.matmul(&s), &q, product_scale(nbq, ns, nq), kind);
        r3v.push((n, direct.max(bridged)));
        let bridge_s = eye.add(&p).sub(&r);
        let nbs = mat_norm(&bridge_s, kind);
        let direct = scaled_residual(&s.matmul(&q), &s, product_scale(ns, nq, ns), kind);
        let bridged = scaled_residual(&bridge_s.matmul(&q), &s, product_scale(nbs, nq, ns), kind);
        r4v.push((n, direct.max(bridged)));
    }
    Ok(IdentityResiduals {
        r1: CheckResult::from_scan(r1v, tol),
        r2: CheckResult::from_scan(r2v, tol),
        r3: CheckResult::from_scan(r3v, tol),
        r4: CheckResult::from_scan(r4v, tol),
    })
}

/// Norms ||P_n|| for n = 0..=window.
pub fn growth_norms(proj: &ProjectionDef, window: i64, kind: NormKind) -> Vec<LogMag> {
    (0..=window).map(|n| mat_norm(&proj.at(n), kind)).collect()
}

/// Mean discrete curvature above this marks faster-than-exponential growth.
const SUPEREXP_CURVATURE: f64 = 0.05;
/// Fitted rates within this of 1 count as bounded.
const BOUNDED_RATE_LOG2: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Trend {
    Bounded,
    Exponential,
    Superexponential,
}

impl Trend {
    pub fn as_str(self) -> &'static str {
        match self {
            Trend::Bounded => "bounded",
            Trend::Exponential => "exponential",
            Trend::Superexponential => "superexponential",
        }
    }
}

/// Least exponential envelope of a norm sequence: M >= 1, p >= 1 with
/// ||P_n|| <= M p^n, both stored as log2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    pub log2_m: f64,
    pub log2_p: f64,
}

/// Fits the smallest M, then the smallest p for that M. None when the
/// required M exceeds the cap.
pub fn exp_bound_fit(norms: &[LogMag], log2_cap: f64) -> Option<GrowthFit> {
    let fit = exp_bound_envelope(norms);
    (fit.log2_m <= log2_cap).then_some(fit)
}

fn exp_bound_envelope(norms: &[LogMag]) -> GrowthFit {
    assert!(!norms.is_empty());
    // Only n = 0 constrains M once p is free, and conventions fix M, p >= 1.
    let l0 = norms[0].log2();
    let log2_m = l0.max(0.0);
    let log2_p = norms
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, l)| (l.log2() - log2_m) / n as f64)
        .fold(0.0f64, f64::max);
    GrowthFit { log2_m, log2_p }
}

/// Growth classification: mean second difference of log2 ||P_n|| beyond the
/// curvature cut is superexponential; otherwise the fitted rate separates
/// bounded from exponential.
pub fn growth_trend(norms: &[LogMag]) -> Trend {
    let ls: Vec<f64> = norms.iter().map(|l| l.log2().max(0.0)).collect();
    if ls.len() >= 3 {
        let mean_curv =
            ls.windows(3).map(|w| w[2] - 2.0 * w[1] + w[0]).sum::<f64>() / (ls.len() - 2) as f64;
        if mean_curv > SUPEREXP_CURVATURE {
            return Trend::Superexponential;
        }
    }
    if exp_bound_envelope(norms).log2_p <= BOUNDED_RATE_LOG2 {
        Trend::Bounded
    } else {
        Trend::Exponential
    }
}

/// Checks ||P_n|| <= M p^n (in log2, up to tol) across the window.
pub fn exp_bound_certify(norms: &[LogMag], log2_m: f64, log2_p: f64, tol: f64) -> CheckResult {
    CheckResult::from_scan(
        norms.iter().enumerate().map(|(n, l)| {
            let bound = log2_m + n as f64 * log2_p;
            let excess = if l.log2() <= bound { f64::NEG_INFINITY } else { l.log2() - bound };
            // Excess over the bound plays the role of a residual; compare in
            // log space directly rather than as a ratio.
            (n as i64, LogMag::from_log2(excess))
        }),
        scale_free_tol(tol),
    )
}

/// Residual checks compare magnitude ratios against tol; bound checks
/// compare log-space excess against tol directly, so the threshold feeding
/// `CheckResult::from_scan` (which cuts at log2 of its argument) is 2^tol.
fn scale_free_tol(tol: f64) -> f64 {
    tol.exp2()
}
