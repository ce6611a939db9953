//! Serializable reports and the on-disk input formats.
//!
//! Every measured magnitude is emitted in two forms side by side: the
//! base-two logarithm as a float (absent when the value is zero or the
//! scan was vacuous) and a fixed-format decimal string. Consumers that
//! plot pick the log2 column; consumers that print pick the string.
//! All report types serialize with stable field order, so a run with
//! the same inputs produces byte-identical output.

use expsplit::invariance::{NotStronglyInvariant, SkewResiduals};
use expsplit::numerics::log2::LogMag;
use expsplit::projections::{CheckResult, IdentityResiduals, ProjectionValidation};
use expsplit::splitting::{
    AnalysisReport, Certificate, Form, GainTable, Verdict, VerifyOutcome, ViolationWitness,
};
use serde::{Deserialize, Serialize};

/// Bumped on any breaking change to the report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// One magnitude in both forms.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LogScalar {
    /// log2 of the value; null when the value is zero or unbounded.
    pub log2: Option<f64>,
    /// Decimal rendering, "0" and "inf" at the ends of the scale.
    pub dec: String,
}

impl LogScalar {
    pub fn from_logmag(v: LogMag) -> Self {
        LogScalar { log2: v.finite_log2(), dec: v.dec_string() }
    }

    pub fn from_log2(l: f64) -> Self {
        Self::from_logmag(LogMag::from_log2(l))
    }

    /// For plain linear quantities such as tolerances.
    pub fn from_linear(v: f64) -> Self {
        Self::from_log2(v.log2())
    }
}

/// Echo of the resolved run parameters.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub target: String,
    pub window: i64,
    pub norm: String,
    pub n_cap: LogScalar,
    pub tol: LogScalar,
    pub seed: u64,
}

/// A residual scan collapsed to its summary line. Locations are given
/// as index vectors so one shape covers per-step, per-pair, and
/// per-triple scans.
#[derive(Clone, Debug, Serialize)]
pub struct ScanLine {
    pub ok: bool,
    pub max_residual: LogScalar,
    pub max_at: Option<Vec<i64>>,
    pub first_fail: Option<Vec<i64>>,
}

/// A scan location that can be flattened into an index vector.
pub trait ScanLoc {
    fn to_vec(&self) -> Vec<i64>;
}

impl ScanLoc for i64 {
    fn to_vec(&self) -> Vec<i64> {
        vec![*self]
    }
}

impl ScanLoc for (i64, i64) {
    fn to_vec(&self) -> Vec<i64> {
        vec![self.0, self.1]
    }
}

impl ScanLoc for (i64, i64, i64) {
    fn to_vec(&self) -> Vec<i64> {
        vec![self.0, self.1, self.2]
    }
}

impl ScanLine {
    pub fn from_check<W: ScanLoc>(check: &CheckResult<W>) -> Self {
        ScanLine {
            ok: check.ok,
            max_residual: LogScalar::from_logmag(check.max_residual),
            max_at: check.max_at.as_ref().map(ScanLoc::to_vec),
            first_fail: check.first_fail.as_ref().map(ScanLoc::to_vec),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RankStepLine {
    pub pair: [i64; 2],
    pub ranks: [usize; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationBlock {
    pub ok: bool,
    pub idempotent: ScanLine,
    pub ranks: Vec<usize>,
    pub rank_step: Option<RankStepLine>,
}

impl ValidationBlock {
    pub fn from_validation(v: &ProjectionValidation) -> Self {
        ValidationBlock {
            ok: v.ok(),
            idempotent: ScanLine::from_check(&v.idempotent),
            ranks: v.ranks.clone(),
            rank_step: v.rank_step.as_ref().map(|s| RankStepLine {
                pair: [s.pair.0, s.pair.1],
                ranks: [s.ranks.0, s.ranks.1],
            }),
        }
    }
}

/// Outcome of requiring the kernels to map onto each other.
#[derive(Clone, Debug, Serialize)]
pub struct StrongInvarianceBlock {
    /// "ok", "failed", or "not_evaluated" when earlier checks already
    /// ruled the table out.
    pub status: String,
    pub pair: Option<[i64; 2]>,
    pub verdict: Option<String>,
    pub kernel_dims: Option<[usize; 2]>,
    pub containment_residual: Option<LogScalar>,
    pub smallest_singular: Option<LogScalar>,
    pub detail: Option<String>,
}

impl StrongInvarianceBlock {
    pub fn ok() -> Self {
        StrongInvarianceBlock {
            status: "ok".into(),
            pair: None,
            verdict: None,
            kernel_dims: None,
            containment_residual: None,
            smallest_singular: None,
            detail: None,
        }
    }

    pub fn not_evaluated() -> Self {
        StrongInvarianceBlock { status: "not_evaluated".into(), ..Self::ok() }
    }

    pub fn failed(err: &NotStronglyInvariant) -> Self {
        StrongInvarianceBlock {
            status: "failed".into(),
            pair: Some([err.pair.0, err.pair.1]),
            verdict: Some(err.report.verdict.as_str().to_string()),
            kernel_dims: Some([err.report.dim_ker_n, err.report.dim_ker_m]),
            containment_residual: Some(LogScalar::from_logmag(err.report.containment_residual)),
            smallest_singular: Some(LogScalar::from_logmag(err.report.smallest_singular)),
            detail: Some(err.to_string()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GrowthFitBlock {
    /// Envelope constant M with |P_n| <= M p^n.
    pub envelope: LogScalar,
    /// Per-step rate p of the same envelope.
    pub rate: LogScalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateBlock {
    pub concept: String,
    pub form: String,
    pub log2_n: f64,
    pub log2_c: f64,
    pub log2_a: f64,
    pub log2_b: f64,
    pub n: LogScalar,
    pub c: LogScalar,
    pub a: LogScalar,
    pub b: LogScalar,
}

impl CertificateBlock {
    pub fn from_certificate(cert: &Certificate) -> Self {
        let form = match cert.form() {
            Form::Restricted => "restricted",
            Form::Strong => "strong",
        };
        CertificateBlock {
            concept: cert.concept().as_str().to_string(),
            form: form.to_string(),
            log2_n: cert.log2_n(),
            log2_c: cert.log2_c(),
            log2_a: cert.log2_a(),
            log2_b: cert.log2_b(),
            n: LogScalar::from_log2(cert.log2_n()),
            c: LogScalar::from_log2(cert.log2_c()),
            a: LogScalar::from_log2(cert.log2_a()),
            b: LogScalar::from_log2(cert.log2_b()),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerdictBlock {
    pub concept: String,
    pub status: String,
    pub certificate: Option<CertificateBlock>,
    pub binding: Option<Vec<[i64; 2]>>,
    pub trend: Option<String>,
    pub reason: Option<String>,
}

impl VerdictBlock {
    pub fn from_verdict(concept: &str, verdict: &Verdict) -> Self {
        let mut block = VerdictBlock {
            concept: concept.to_string(),
            status: verdict.status_str().to_string(),
            certificate: None,
            binding: None,
            trend: None,
            reason: None,
        };
        match verdict {
            Verdict::CertifiedByUser(cert) | Verdict::CertifiedByFit(cert) => {
                block.certificate = Some(CertificateBlock::from_certificate(cert));
            }
            Verdict::Infeasible { binding, .. } => {
                block.binding = Some(binding.iter().map(|p| [p.0, p.1]).collect());
            }
            Verdict::TrendBlocked { trend } => {
                block.trend = Some(trend.as_str().to_string());
            }
            Verdict::Inconclusive { reason } => {
                block.reason = Some(reason.clone());
            }
        }
        block
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GainRowBlock {
    pub m: i64,
    pub n: i64,
    pub range_sup_lo: LogScalar,
    pub range_sup_hi: LogScalar,
    pub kernel_inf_lo: LogScalar,
    pub kernel_inf_hi: LogScalar,
    pub range_norm: LogScalar,
    pub skew_norm: Option<LogScalar>,
    pub skew_sup_lo: Option<LogScalar>,
    pub skew_sup_hi: Option<LogScalar>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GainTableBlock {
    pub window: i64,
    pub norm: String,
    pub p_dims: Vec<usize>,
    pub q_dims: Vec<usize>,
    pub p_norms: Vec<LogScalar>,
    pub q_norms: Vec<LogScalar>,
    pub pairs: Vec<GainRowBlock>,
}

impl GainTableBlock {
    pub fn from_table(table: &GainTable) -> Self {
        GainTableBlock {
            window: table.window,
            norm: table.kind.as_str().to_string(),
            p_dims: table.p_dims.clone(),
            q_dims: table.q_dims.clone(),
            p_norms: table.p_norms.iter().map(|&v| LogScalar::from_logmag(v)).collect(),
            q_norms: table.q_norms.iter().map(|&v| LogScalar::from_logmag(v)).collect(),
            pairs: table
                .pairs
                .iter()
                .map(|g| GainRowBlock {
                    m: g.pair.0,
                    n: g.pair.1,
                    range_sup_lo: LogScalar::from_logmag(g.range_sup.lo),
                    range_sup_hi: LogScalar::from_logmag(g.range_sup.hi),
                    kernel_inf_lo: LogScalar::from_logmag(g.kernel_inf.lo),
                    kernel_inf_hi: LogScalar::from_logmag(g.kernel_inf.hi),
                    range_norm: LogScalar::from_logmag(g.range_norm),
                    skew_norm: g.skew_norm.map(LogScalar::from_logmag),
                    skew_sup_lo: g.skew_sup.as_ref().map(|b| LogScalar::from_logmag(b.lo)),
                    skew_sup_hi: g.skew_sup.as_ref().map(|b| LogScalar::from_logmag(b.hi)),
                })
                .collect(),
        }
    }

    /// One row per pair, every magnitude in both columns; skew cells
    /// stay empty when the table has none.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "m,n,range_sup_lo_log2,range_sup_lo,range_sup_hi_log2,range_sup_hi,\
             kernel_inf_lo_log2,kernel_inf_lo,kernel_inf_hi_log2,kernel_inf_hi,\
             range_norm_log2,range_norm,skew_norm_log2,skew_norm,\
             skew_sup_lo_log2,skew_sup_lo,skew_sup_hi_log2,skew_sup_hi\n",
        );
        for row in &self.pairs {
            out.push_str(&format!("{},{}", row.m, row.n));
            for cell in [
                Some(&row.range_sup_lo),
                Some(&row.range_sup_hi),
                Some(&row.kernel_inf_lo),
                Some(&row.kernel_inf_hi),
                Some(&row.range_norm),
                row.skew_norm.as_ref(),
                row.skew_sup_lo.as_ref(),
                row.skew_sup_hi.as_ref(),
            ] {
                match cell {
                    Some(v) => out.push_str(&format!(",{},{}", csv_log2(v), v.dec)),
                    None => out.push_str(",,"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// log2 column in CSV: literal inf markers instead of empty cells, so
/// the column parses as a float throughout.
fn csv_log2(v: &LogScalar) -> String {
    match v.log2 {
        Some(l) => format!("{l}"),
        None if v.dec == "inf" => "inf".to_string(),
        None => "-inf".to_string(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemBlock {
    pub name: String,
    pub dim: usize,
    pub summary: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalyzeReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub system: SystemBlock,
    pub validation: ValidationBlock,
    pub invariance: ScanLine,
    pub strong_invariance: StrongInvarianceBlock,
    pub trend: String,
    pub growth_fit: Option<GrowthFitBlock>,
    pub verdicts: Vec<VerdictBlock>,
    pub gain_table: Option<GainTableBlock>,
    pub internal_error: Option<String>,
}

impl AnalyzeReport {
    pub fn from_analysis(config: RunConfig, system: SystemBlock, report: &AnalysisReport) -> Self {
        let strong_invariance = match &report.table {
            None => StrongInvarianceBlock::not_evaluated(),
            Some(t) => match &t.skew_status {
                None => StrongInvarianceBlock::ok(),
                Some(err) => StrongInvarianceBlock::failed(err),
            },
        };
        AnalyzeReport {
            schema_version: SCHEMA_VERSION,
            command: "analyze".into(),
            config,
            system,
            validation: ValidationBlock::from_validation(&report.validation),
            invariance: ScanLine::from_check(&report.invariance),
            strong_invariance,
            trend: report.trend.as_str().to_string(),
            growth_fit: report.growth_fit.as_ref().map(|f| GrowthFitBlock {
                envelope: LogScalar::from_log2(f.log2_m),
                rate: LogScalar::from_log2(f.log2_p),
            }),
            verdicts: report
                .verdicts
                .iter()
                .map(|v| VerdictBlock::from_verdict(v.concept.as_str(), &v.verdict))
                .collect(),
            gain_table: report.table.as_ref().map(GainTableBlock::from_table),
            internal_error: report.internal_error.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessBlock {
    pub pair: [i64; 2],
    pub tag: String,
    pub lhs: LogScalar,
    pub rhs: LogScalar,
}

impl WitnessBlock {
    pub fn from_witness(w: &ViolationWitness) -> Self {
        WitnessBlock {
            pair: [w.pair.0, w.pair.1],
            tag: w.tag.as_str().to_string(),
            lhs: LogScalar::from_log2(w.lhs),
            rhs: LogScalar::from_log2(w.rhs),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UndecidedBlock {
    pub pair: [i64; 2],
    pub tag: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub certificate: CertificateBlock,
    /// "ok", "violation", or "inconclusive".
    pub outcome: String,
    pub witness: Option<WitnessBlock>,
    pub undecided: Option<UndecidedBlock>,
}

impl VerifyReport {
    pub fn from_outcome(config: RunConfig, cert: &Certificate, outcome: &VerifyOutcome) -> Self {
        let (label, witness, undecided) = match outcome {
            VerifyOutcome::Ok => ("ok", None, None),
            VerifyOutcome::Violation(w) => ("violation", Some(WitnessBlock::from_witness(w)), None),
            VerifyOutcome::Inconclusive { pair, tag } => (
                "inconclusive",
                None,
                Some(UndecidedBlock { pair: [pair.0, pair.1], tag: tag.as_str().to_string() }),
            ),
        };
        VerifyReport {
            schema_version: SCHEMA_VERSION,
            command: "verify".into(),
            config,
            certificate: CertificateBlock::from_certificate(cert),
            outcome: label.to_string(),
            witness,
            undecided,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub concept: String,
    /// "fitted", "infeasible", or "inconclusive".
    pub status: String,
    pub certificate: Option<CertificateBlock>,
    pub n_cap: Option<LogScalar>,
    pub binding: Option<Vec<[i64; 2]>>,
    pub reason: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefuteReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub certificate: CertificateBlock,
    pub refuted: bool,
    pub witness: Option<WitnessBlock>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RangeSuiteBlock {
    pub coupling_seed: u64,
    pub ok: bool,
    pub r1: ScanLine,
    pub r2: ScanLine,
    pub r3: ScanLine,
    pub r4: ScanLine,
}

impl RangeSuiteBlock {
    pub fn from_residuals(seed: u64, res: &IdentityResiduals) -> Self {
        RangeSuiteBlock {
            coupling_seed: seed,
            ok: res.ok(),
            r1: ScanLine::from_check(&res.r1),
            r2: ScanLine::from_check(&res.r2),
            r3: ScanLine::from_check(&res.r3),
            r4: ScanLine::from_check(&res.r4),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SkewSuiteBlock {
    /// "ok", "failed" (a residual exceeded tolerance), or "blocked"
    /// (the skew family does not exist on this window).
    pub status: String,
    pub blocked: Option<StrongInvarianceBlock>,
    pub b1: Option<ScanLine>,
    pub b2: Option<ScanLine>,
    pub b3: Option<ScanLine>,
    pub b4: Option<ScanLine>,
    pub b5: Option<ScanLine>,
}

impl SkewSuiteBlock {
    pub fn from_result(res: &Result<SkewResiduals, NotStronglyInvariant>) -> Self {
        match res {
            Ok(r) => SkewSuiteBlock {
                status: if r.ok() { "ok" } else { "failed" }.to_string(),
                blocked: None,
                b1: Some(ScanLine::from_check(&r.b1)),
                b2: Some(ScanLine::from_check(&r.b2)),
                b3: Some(ScanLine::from_check(&r.b3)),
                b4: Some(ScanLine::from_check(&r.b4)),
                b5: Some(ScanLine::from_check(&r.b5)),
            },
            Err(err) => SkewSuiteBlock {
                status: "blocked".to_string(),
                blocked: Some(StrongInvarianceBlock::failed(err)),
                b1: None,
                b2: None,
                b3: None,
                b4: None,
                b5: None,
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentitiesReport {
    pub schema_version: u32,
    pub command: String,
    pub config: RunConfig,
    pub cocycle: ScanLine,
    pub range_suite: RangeSuiteBlock,
    pub skew_suite: SkewSuiteBlock,
}

impl IdentitiesReport {
    /// Flat residual table: the cocycle line, then r1..r4, then b1..b5
    /// (location cells empty for rows a blocked skew suite never ran).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("identity,ok,max_residual_log2,max_residual,max_at,first_fail\n");
        let mut push = |name: &str, line: Option<&ScanLine>| match line {
            Some(l) => {
                let loc = |v: &Option<Vec<i64>>| {
                    v.as_ref()
                        .map(|ix| {
                            ix.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ")
                        })
                        .unwrap_or_default()
                };
                out.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    name,
                    l.ok,
                    csv_log2(&l.max_residual),
                    l.max_residual.dec,
                    loc(&l.max_at),
                    loc(&l.first_fail),
                ));
            }
            None => out.push_str(&format!("{name},,,,,\n")),
        };
        push("cocycle", Some(&self.cocycle));
        push("r1", Some(&self.range_suite.r1));
        push("r2", Some(&self.range_suite.r2));
        push("r3", Some(&self.range_suite.r3));
        push("r4", Some(&self.range_suite.r4));
        push("b1", self.skew_suite.b1.as_ref());
        push("b2", self.skew_suite.b2.as_ref());
        push("b3", self.skew_suite.b3.as_ref());
        push("b4", self.skew_suite.b4.as_ref());
        push("b5", self.skew_suite.b5.as_ref());
        out
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ListEntry {
    pub name: String,
    pub dim: usize,
    pub window: i64,
    pub norm: String,
    pub summary: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ListReport {
    pub schema_version: u32,
    pub command: String,
    pub entries: Vec<ListEntry>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShowReport {
    pub schema_version: u32,
    pub command: String,
    pub entry: ListEntry,
    pub certificates: Vec<CertificateBlock>,
}

/// Renders any report as pretty JSON with a trailing newline.
pub fn render_json<T: Serialize>(report: &T) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serialization");
    text.push('\n');
    text
}

/// A system definition loaded from disk. The rule is either a named
/// builtin (with optional parameters) or an explicit list of step
/// matrices A_0, A_1, ... given as rows; explicit rules must also
/// carry a projector list of the same length plus one.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefinitionFile {
    pub schema_version: u32,
    pub dim: usize,
    pub norm: String,
    pub rule: RuleDef,
    #[serde(default)]
    pub projections: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default)]
    pub window: Option<i64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum RuleDef {
    Builtin {
        builtin: String,
        #[serde(default)]
        params: RuleParams,
    },
    Explicit {
        explicit: Vec<Vec<Vec<f64>>>,
    },
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleParams {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub dim: Option<usize>,
}

/// A certificate loaded from disk; the embedded certificate rejects
/// malformed rate pairs during deserialization.
#[derive(Clone, Debug, Deserialize)]
pub struct CertificateFile {
    pub schema_version: u32,
    #[serde(flatten)]
    pub certificate: Certificate,
}
