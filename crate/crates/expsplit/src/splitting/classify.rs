//! One-call analysis: measures a system against every concept.
//!
//! The pipeline validates the projector family, checks invariance,
//! classifies projector norm growth, builds the gain table, and then
//! settles each of the eight concepts in turn: a user certificate that
//! verifies wins outright, otherwise the fit decides. Strong concepts
//! are gated first on the growth trend (superexponential projector
//! norms admit no exponential envelope of any size) and on the skew
//! columns being available.
//!
//! Certified concepts imply their consequences, so a report in which a
//! concept is certified while one of its consequences is refuted can
//! only come from a defect in the measurements; the report carries
//! that as an internal error instead of papering over it.

use crate::invariance::invariance_check;
use crate::numerics::matrix::NormKind;
use crate::projections::{
    exp_bound_fit, growth_norms, growth_trend, validate_projection, CheckResult, GrowthFit,
    ProjectionDef, ProjectionValidation, Trend,
};
use crate::splitting::certificate::{Certificate, Concept, Form};
use crate::splitting::fit::{fit_certificate, FitError};
use crate::splitting::table::{gain_table, GainTable};
use crate::splitting::verify::{verify_certificate, VerifyOutcome};
use crate::system::SystemDef;

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// A user-supplied certificate checked out over the window.
    CertifiedByUser(Certificate),
    /// The fitted certificate checked out over the window.
    CertifiedByFit(Certificate),
    /// No rates exist under the envelope cap, even on the optimistic
    /// sides of the gain brackets.
    Infeasible {
        n_cap_log2: f64,
        binding: Vec<(i64, i64)>,
    },
    /// Projector norms outgrow every exponential envelope, which rules
    /// out the strong concepts before any rate is tried.
    TrendBlocked { trend: Trend },
    Inconclusive { reason: String },
}

impl Verdict {
    pub fn is_certified(&self) -> bool {
        matches!(self, Verdict::CertifiedByUser(_) | Verdict::CertifiedByFit(_))
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::CertifiedByUser(c) | Verdict::CertifiedByFit(c) => Some(c),
            _ => None,
        }
    }

    pub fn status_str(&self) -> &'static str {
        match self {
            Verdict::CertifiedByUser(_) => "certified_by_user",
            Verdict::CertifiedByFit(_) => "certified_by_fit",
            Verdict::Infeasible { .. } => "infeasible",
            Verdict::TrendBlocked { .. } => "trend_blocked",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConceptVerdict {
    pub concept: Concept,
    pub verdict: Verdict,
}

#[derive(Clone, Debug)]
pub struct AnalysisReport {
    pub window: i64,
    pub kind: NormKind,
    pub n_cap_log2: f64,
    pub tol: f64,
    pub validation: ProjectionValidation,
    pub invariance: CheckResult<i64>,
    pub trend: Trend,
    /// Least exponential envelope of the projector norms, when one
    /// exists under the cap.
    pub growth_fit: Option<GrowthFit>,
    /// Present when the basic checks passed and gains were measured.
    pub table: Option<GainTable>,
    /// One verdict per concept, in `Concept::ALL` order.
    pub verdicts: Vec<ConceptVerdict>,
    /// A fit that failed its own re-verification, or a certified
    /// concept with a refuted consequence: a defect, reported rather
    /// than hidden.
    pub internal_error: Option<String>,
}

impl AnalysisReport {
    pub fn verdict(&self, concept: Concept) -> &Verdict {
        &self
            .verdicts
            .iter()
            .find(|v| v.concept == concept)
            .expect("reports carry all concepts")
            .verdict
    }
}

pub fn classify(
    sys: &SystemDef,
    proj: &ProjectionDef,
    window: i64,
    kind: NormKind,
    n_cap_log2: f64,
    tol: f64,
) -> AnalysisReport {
    classify_with_certs(sys, proj, &[], window, kind, n_cap_log2, tol)
}

/// Analysis with user certificates in play: a certificate that verifies
/// settles its concept; one that does not is quietly superseded by the
/// standard pipeline.
pub fn classify_with_certs(
    sys: &SystemDef,
    proj: &ProjectionDef,
    user_certs: &[Certificate],
    window: i64,
    kind: NormKind,
    n_cap_log2: f64,
    tol: f64,
) -> AnalysisReport {
    let validation = validate_projection(proj, window, kind, tol);
    let invariance = invariance_check(sys, proj, window, kind, tol);
    let norms = growth_norms(proj, window, kind);
    let trend = growth_trend(&norms);
    let growth_fit = exp_bound_fit(&norms, n_cap_log2);

    let gate = if !validation.ok() {
        Some(format!(
            "projectors fail idempotence over the window (worst residual at n = {:?})",
            validation.idempotent.max_at
        ))
    } else if !invariance.ok {
        Some(format!(
            "projection family is not invariant under the system (first failure at step {})",
            invariance.first_fail.unwrap_or(0)
        ))
    } else {
        None
    };

    let mut internal_error = None;
    let (table, verdicts): (Option<GainTable>, Vec<ConceptVerdict>) = match gate {
        Some(reason) => {
            let verdicts = Concept::ALL
                .iter()
                .map(|&concept| ConceptVerdict {
                    concept,
                    verdict: Verdict::Inconclusive { reason: reason.clone() },
                })
                .collect();
            (None, verdicts)
        }
        None => {
            let table = gain_table(sys, proj, window, kind, tol);
            let verdicts = Concept::ALL
                .iter()
                .map(|&concept| ConceptVerdict {
                    concept,
                    verdict: concept_verdict(
                        &table,
                        concept,
                        user_certs,
                        trend,
                        n_cap_log2,
                        tol,
                        &mut internal_error,
                    ),
                })
                .collect();
            (Some(table), verdicts)
        }
    };

    let internal_error = internal_error.or_else(|| diagram_inconsistency(&verdicts));
    AnalysisReport {
        window,
        kind,
        n_cap_log2,
        tol,
        validation,
        invariance,
        trend,
        growth_fit,
        table,
        verdicts,
        internal_error,
    }
}

fn concept_verdict(
    table: &GainTable,
    concept: Concept,
    user_certs: &[Certificate],
    trend: Trend,
    n_cap_log2: f64,
    tol: f64,
    internal_error: &mut Option<String>,
) -> Verdict {
    for cert in user_certs.iter().filter(|c| c.concept() == concept) {
        if matches!(verify_certificate(table, cert, tol), Ok(VerifyOutcome::Ok)) {
            return Verdict::CertifiedByUser(cert.clone());
        }
    }
    if concept.form() == Form::Strong {
        if trend == Trend::Superexponential {
            return Verdict::TrendBlocked { trend };
        }
        if !table.has_skew() {
            let reason = table
                .skew_status
                .as_ref()
                .map(|e| e.to_string())
                .unwrap_or_else(|| "skew columns absent".into());
            return Verdict::Inconclusive { reason };
        }
    }
    match fit_certificate(table, concept, n_cap_log2, tol) {
        Ok(cert) => Verdict::CertifiedByFit(cert),
        Err(FitError::Infeasible { n_cap_log2, binding }) => {
            Verdict::Infeasible { n_cap_log2, binding }
        }
        Err(FitError::Inconclusive { binding, .. }) => Verdict::Inconclusive {
            reason: format!("gain brackets leave pairs {:?} undecided under the cap", binding),
        },
        Err(FitError::MissingColumn(e)) => Verdict::Inconclusive { reason: e.to_string() },
        Err(FitError::Unsound) => {
            *internal_error = Some(format!("fit for {} failed its own re-verification", concept));
            Verdict::Inconclusive { reason: "internal fit failure".into() }
        }
    }
}

/// A certified concept with a refuted consequence breaks the implication
/// diagram; report the first such break in concept order.
fn diagram_inconsistency(verdicts: &[ConceptVerdict]) -> Option<String> {
    for cv in verdicts {
        if !cv.verdict.is_certified() {
            continue;
        }
        for q in cv.concept.consequences() {
            let vq = &verdicts
                .iter()
                .find(|v| v.concept == q)
                .expect("reports carry all concepts")
                .verdict;
            if matches!(vq, Verdict::Infeasible { .. }) {
                return Some(format!(
                    "diagram inconsistency: {} certified while {} is refuted",
                    cv.concept, q
                ));
            }
        }
    }
    None
}
