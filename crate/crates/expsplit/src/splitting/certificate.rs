//! Certificates for the eight splitting concepts and the constant
//! transforms between them.
//!
//! A certificate claims, for every window pair m >= n, the two estimates
//!
//!   forward:  |A(m,n) P_n x| <= N c^n a^(m-n) |P_n x|
//!   backward: b^(m-n) |Q_n x| <= N c^m |A(m,n) Q_n x|
//!
//! with constants N, c >= 1 and rates 0 < a < b, all stored here in log2
//! form. The concept qualifies the claim: uniform concepts pin c = 1,
//! dichotomy concepts ask a < 1 < b, and strong concepts restate both
//! sides with full operator norms, the skew evolution B(m,n) replacing
//! the restricted inverse on the backward side.

use serde::de::Error as _;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::projections::GrowthFit;

/// The eight concepts. Three independent qualifiers generate them:
/// uniform (c = 1), strong (full-norm estimates), dichotomy (a < 1 < b).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Concept {
    #[serde(rename = "es")]
    Es,
    #[serde(rename = "ues")]
    Ues,
    #[serde(rename = "ed")]
    Ed,
    #[serde(rename = "ued")]
    Ued,
    #[serde(rename = "ses")]
    Ses,
    #[serde(rename = "uses")]
    Uses,
    #[serde(rename = "sed")]
    Sed,
    #[serde(rename = "used")]
    Used,
}

impl Concept {
    pub const ALL: [Concept; 8] = [
        Concept::Es,
        Concept::Ues,
        Concept::Ed,
        Concept::Ued,
        Concept::Ses,
        Concept::Uses,
        Concept::Sed,
        Concept::Used,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Concept::Es => "es",
            Concept::Ues => "ues",
            Concept::Ed => "ed",
            Concept::Ued => "ued",
            Concept::Ses => "ses",
            Concept::Uses => "uses",
            Concept::Sed => "sed",
            Concept::Used => "used",
        }
    }

    pub fn long_name(self) -> &'static str {
        match self {
            Concept::Es => "exponential splitting",
            Concept::Ues => "uniform exponential splitting",
            Concept::Ed => "exponential dichotomy",
            Concept::Ued => "uniform exponential dichotomy",
            Concept::Ses => "strong exponential splitting",
            Concept::Uses => "uniform strong exponential splitting",
            Concept::Sed => "strong exponential dichotomy",
            Concept::Used => "uniform strong exponential dichotomy",
        }
    }

    pub fn is_uniform(self) -> bool {
        matches!(self, Concept::Ues | Concept::Ued | Concept::Uses | Concept::Used)
    }

    pub fn is_strong(self) -> bool {
        matches!(self, Concept::Ses | Concept::Uses | Concept::Sed | Concept::Used)
    }

    pub fn is_dichotomy(self) -> bool {
        matches!(self, Concept::Ed | Concept::Ued | Concept::Sed | Concept::Used)
    }

    pub fn form(self) -> Form {
        if self.is_strong() {
            Form::Strong
        } else {
            Form::Restricted
        }
    }

    /// Direct one-step implications: dropping uniformity, dropping
    /// strength, or relaxing a dichotomy to a splitting. Twelve arrows
    /// in total over the eight concepts.
    pub fn implies(self) -> &'static [Concept] {
        match self {
            Concept::Es => &[],
            Concept::Ues => &[Concept::Es],
            Concept::Ed => &[Concept::Es],
            Concept::Ued => &[Concept::Ed, Concept::Ues],
            Concept::Ses => &[Concept::Es],
            Concept::Uses => &[Concept::Ses, Concept::Ues],
            Concept::Sed => &[Concept::Ed, Concept::Ses],
            Concept::Used => &[Concept::Sed, Concept::Ued, Concept::Uses],
        }
    }

    /// Transitive closure of `implies`, in `ALL` order, self excluded.
    pub fn consequences(self) -> Vec<Concept> {
        let mut seen = [false; 8];
        let mut stack = vec![self];
        while let Some(c) = stack.pop() {
            for &w in c.implies() {
                let i = Concept::ALL.iter().position(|&x| x == w).unwrap();
                if !seen[i] {
                    seen[i] = true;
                    stack.push(w);
                }
            }
        }
        Concept::ALL.into_iter().filter(|&c| seen[Concept::ALL.iter().position(|&x| x == c).unwrap()]).collect()
    }

    /// Nonuniform counterpart (identity on already nonuniform concepts).
    pub fn drop_uniform(self) -> Concept {
        match self {
            Concept::Ues => Concept::Es,
            Concept::Ued => Concept::Ed,
            Concept::Uses => Concept::Ses,
            Concept::Used => Concept::Sed,
            c => c,
        }
    }

    /// Strong counterpart (identity on already strong concepts).
    pub fn to_strong(self) -> Concept {
        match self {
            Concept::Es => Concept::Ses,
            Concept::Ues => Concept::Uses,
            Concept::Ed => Concept::Sed,
            Concept::Ued => Concept::Used,
            c => c,
        }
    }

    /// Restricted counterpart (identity on already restricted concepts).
    pub fn drop_strong(self) -> Concept {
        match self {
            Concept::Ses => Concept::Es,
            Concept::Uses => Concept::Ues,
            Concept::Sed => Concept::Ed,
            Concept::Used => Concept::Ued,
            c => c,
        }
    }
}

impl fmt::Display for Concept {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Concept {
    type Err = CertificateError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.to_ascii_lowercase();
        Concept::ALL
            .into_iter()
            .find(|c| c.as_str() == lower)
            .ok_or_else(|| CertificateError::UnknownConcept(s.to_string()))
    }
}

/// Which estimates a certificate is stated for: restricted gains on the
/// range and kernel, or full operator norms with the skew evolution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Form {
    #[serde(rename = "restricted")]
    Restricted,
    #[serde(rename = "strong")]
    Strong,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Form::Restricted => "restricted",
            Form::Strong => "strong",
        })
    }
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum CertificateError {
    #[error("unknown concept {0:?}")]
    UnknownConcept(String),
    #[error("certificate constants must be finite")]
    NonFinite,
    #[error("N must be at least 1, got log2_N = {0}")]
    ScaleBelowOne(f64),
    #[error("c must be at least 1, got log2_c = {0}")]
    GrowthBelowOne(f64),
    #[error("rates must satisfy a < b, got log2_a = {0}, log2_b = {1}")]
    RatesOutOfOrder(f64, f64),
    #[error("{0} requires c = 1, got log2_c = {1}")]
    UniformNeedsUnitGrowth(Concept, f64),
    #[error("{0} requires a < 1 < b, got log2_a = {1}, log2_b = {2}")]
    DichotomyNeedsStraddle(Concept, f64, f64),
    #[error("form {0} does not match concept {1}")]
    FormMismatch(Form, Concept),
    #[error("certificate rates do not straddle 1, no dichotomy form exists")]
    NotDichotomyForm,
    #[error("transform applies to restricted-form certificates, got {0}")]
    NeedsRestrictedForm(Form),
    #[error("transform applies to strong-form certificates, got {0}")]
    NeedsStrongForm(Form),
    #[error("growth bound must have M >= 1 and p >= 1, got log2 ({0}, {1})")]
    InvalidGrowthBound(f64, f64),
}

/// Constants of a splitting estimate in log2 form. Invariants are
/// enforced at construction, so a value of this type is always a
/// well-formed claim for its concept.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    concept: Concept,
    log2_n: f64,
    log2_c: f64,
    log2_a: f64,
    log2_b: f64,
}

impl Certificate {
    pub fn new(
        concept: Concept,
        log2_n: f64,
        log2_c: f64,
        log2_a: f64,
        log2_b: f64,
    ) -> Result<Self, CertificateError> {
        if ![log2_n, log2_c, log2_a, log2_b].iter().all(|v| v.is_finite()) {
            return Err(CertificateError::NonFinite);
        }
        if log2_n < 0.0 {
            return Err(CertificateError::ScaleBelowOne(log2_n));
        }
        if log2_c < 0.0 {
            return Err(CertificateError::GrowthBelowOne(log2_c));
        }
        if !(log2_a < log2_b) {
            return Err(CertificateError::RatesOutOfOrder(log2_a, log2_b));
        }
        if concept.is_uniform() && log2_c != 0.0 {
            return Err(CertificateError::UniformNeedsUnitGrowth(concept, log2_c));
        }
        if concept.is_dichotomy() && !(log2_a < 0.0 && 0.0 < log2_b) {
            return Err(CertificateError::DichotomyNeedsStraddle(concept, log2_a, log2_b));
        }
        Ok(Certificate { concept, log2_n, log2_c, log2_a, log2_b })
    }

    pub fn concept(&self) -> Concept {
        self.concept
    }

    pub fn form(&self) -> Form {
        self.concept.form()
    }

    pub fn log2_n(&self) -> f64 {
        self.log2_n
    }

    pub fn log2_c(&self) -> f64 {
        self.log2_c
    }

    pub fn log2_a(&self) -> f64 {
        self.log2_a
    }

    pub fn log2_b(&self) -> f64 {
        self.log2_b
    }

    /// Same constants claimed for a different concept; fails if they do
    /// not meet the target concept's invariants.
    pub fn with_concept(&self, concept: Concept) -> Result<Self, CertificateError> {
        Certificate::new(concept, self.log2_n, self.log2_c, self.log2_a, self.log2_b)
    }
}

#[derive(Serialize, Deserialize)]
struct CertificateWire {
    concept: Concept,
    #[serde(rename = "log2_N")]
    log2_n: f64,
    log2_c: f64,
    log2_a: f64,
    log2_b: f64,
    form: Form,
}

impl Serialize for Certificate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CertificateWire {
            concept: self.concept,
            log2_n: self.log2_n,
            log2_c: self.log2_c,
            log2_a: self.log2_a,
            log2_b: self.log2_b,
            form: self.form(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let wire = CertificateWire::deserialize(d)?;
        if wire.form != wire.concept.form() {
            return Err(D::Error::custom(CertificateError::FormMismatch(wire.form, wire.concept)));
        }
        Certificate::new(wire.concept, wire.log2_n, wire.log2_c, wire.log2_a, wire.log2_b)
            .map_err(D::Error::custom)
    }
}

/// Certificate restated with the single rate d < 1 of the two-sided
/// dichotomy estimates
///
///   |A(m,n) P_n x| <= N c^n d^(m-n) |P_n x|
///   |Q_n x| <= N c^m d^(m-n) |A(m,n) Q_n x|
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DichotomyForm {
    pub log2_n: f64,
    pub log2_c: f64,
    pub log2_d: f64,
}

/// Collapses a rate pair a < 1 < b to the single rate d = max(a, 1/b).
/// d must dominate both a and 1/b for the d-estimates to follow from the
/// (a, b) ones, and the max is the least valid choice.
pub fn dichotomy_normal_form(cert: &Certificate) -> Result<DichotomyForm, CertificateError> {
    if !(cert.log2_a() < 0.0 && 0.0 < cert.log2_b()) {
        return Err(CertificateError::NotDichotomyForm);
    }
    Ok(DichotomyForm {
        log2_n: cert.log2_n(),
        log2_c: cert.log2_c(),
        log2_d: cert.log2_a().max(-cert.log2_b()),
    })
}

/// The same claim with rates stated base e: alpha = ln a, beta = ln b,
/// gamma = ln c. N stays in log2 form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialForm {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub log2_n: f64,
}

pub fn exponential_form(cert: &Certificate) -> ExponentialForm {
    let ln2 = std::f64::consts::LN_2;
    ExponentialForm {
        alpha: cert.log2_a() * ln2,
        beta: cert.log2_b() * ln2,
        gamma: cert.log2_c() * ln2,
        log2_n: cert.log2_n(),
    }
}

pub fn from_exponential_form(concept: Concept, f: &ExponentialForm) -> Result<Certificate, CertificateError> {
    let ln2 = std::f64::consts::LN_2;
    Certificate::new(concept, f.log2_n, f.gamma / ln2, f.alpha / ln2, f.beta / ln2)
}

fn check_growth_bound(bound: &GrowthFit) -> Result<(), CertificateError> {
    if !(bound.log2_m.is_finite() && bound.log2_p.is_finite()) || bound.log2_m < 0.0 || bound.log2_p < 0.0 {
        return Err(CertificateError::InvalidGrowthBound(bound.log2_m, bound.log2_p));
    }
    Ok(())
}

/// Carries a restricted certificate for P over to a projection sequence
/// R with the same ranges, given |P_n| + |R_n| <= M p^n. The rates
/// survive; the constants become N1 = 4 M^2 N and c1 = p^2 c. A uniform
/// concept is demoted to its nonuniform counterpart when p > 1.
pub fn transport_projection(cert: &Certificate, bound: &GrowthFit) -> Result<Certificate, CertificateError> {
    if cert.form() != Form::Restricted {
        return Err(CertificateError::NeedsRestrictedForm(cert.form()));
    }
    check_growth_bound(bound)?;
    let log2_n = cert.log2_n() + 2.0 + 2.0 * bound.log2_m;
    let log2_c = cert.log2_c() + 2.0 * bound.log2_p;
    let concept = if log2_c > 0.0 { cert.concept().drop_uniform() } else { cert.concept() };
    Certificate::new(concept, log2_n, log2_c, cert.log2_a(), cert.log2_b())
}

/// Upgrades a restricted certificate to the strong form when the
/// projections are exponentially bounded by |P_n| <= M p^n. The rates
/// survive; N1 = M N and c1 = p c. A uniform concept is demoted when
/// p > 1.
pub fn strengthen(cert: &Certificate, bound: &GrowthFit) -> Result<Certificate, CertificateError> {
    if cert.form() != Form::Restricted {
        return Err(CertificateError::NeedsRestrictedForm(cert.form()));
    }
    check_growth_bound(bound)?;
    let log2_n = cert.log2_n() + bound.log2_m;
    let log2_c = cert.log2_c() + bound.log2_p;
    let concept = if log2_c > 0.0 {
        cert.concept().to_strong().drop_uniform()
    } else {
        cert.concept().to_strong()
    };
    Certificate::new(concept, log2_n, log2_c, cert.log2_a(), cert.log2_b())
}

/// Reads a restricted certificate and a projection growth bound back out
/// of a strong one: the strong forward estimate at m = n bounds |P_n| by
/// N c^n, so (M, p) = (N, c).
pub fn weaken(cert: &Certificate) -> Result<(Certificate, GrowthFit), CertificateError> {
    if cert.form() != Form::Strong {
        return Err(CertificateError::NeedsStrongForm(cert.form()));
    }
    let restricted = cert.with_concept(cert.concept().drop_strong())?;
    let bound = GrowthFit { log2_m: cert.log2_n(), log2_p: cert.log2_c() };
    Ok((restricted, bound))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cert(concept: Concept, n: f64, c: f64, a: f64, b: f64) -> Certificate {
        Certificate::new(concept, n, c, a, b).unwrap()
    }

    #[test]
    fn constructor_enforces_invariants() {
        assert!(Certificate::new(Concept::Es, -0.5, 0.0, 0.0, 1.0).is_err());
        assert!(Certificate::new(Concept::Es, 0.0, -0.1, 0.0, 1.0).is_err());
        assert!(Certificate::new(Concept::Es, 0.0, 0.0, 1.0, 1.0).is_err());
        assert!(Certificate::new(Concept::Es, 0.0, 0.0, 2.0, 1.0).is_err());
        assert!(Certificate::new(Concept::Es, 0.0, f64::NAN, 0.0, 1.0).is_err());
        assert!(Certificate::new(Concept::Ues, 0.0, 0.5, 0.0, 1.0).is_err());
        assert!(Certificate::new(Concept::Ed, 0.0, 0.0, 0.5, 1.0).is_err());
        assert!(Certificate::new(Concept::Ed, 0.0, 0.0, -1.0, 0.0).is_err());
        assert!(Certificate::new(Concept::Ued, 0.0, 0.0, -1.0, 1.0).is_ok());
        assert!(Certificate::new(Concept::Ses, 0.0, 2.0, -0.5, 0.5).is_ok());
    }

    #[test]
    fn implication_arrows() {
        let total: usize = Concept::ALL.iter().map(|c| c.implies().len()).sum();
        assert_eq!(total, 12);
        assert_eq!(Concept::Used.consequences().len(), 7);
        assert_eq!(Concept::Es.consequences().len(), 0);
        assert_eq!(Concept::Ued.consequences(), vec![Concept::Es, Concept::Ues, Concept::Ed]);
        for c in Concept::ALL {
            for &w in c.implies() {
                assert!(!w.is_uniform() || c.is_uniform());
                assert!(!w.is_strong() || c.is_strong());
                assert!(!w.is_dichotomy() || c.is_dichotomy());
            }
        }
    }

    #[test]
    fn qualifier_counts() {
        assert_eq!(Concept::ALL.iter().filter(|c| c.is_uniform()).count(), 4);
        assert_eq!(Concept::ALL.iter().filter(|c| c.is_strong()).count(), 4);
        assert_eq!(Concept::ALL.iter().filter(|c| c.is_dichotomy()).count(), 4);
        for c in Concept::ALL {
            assert_eq!(c.as_str().parse::<Concept>().unwrap(), c);
            assert_eq!(c.as_str().to_uppercase().parse::<Concept>().unwrap(), c);
        }
        assert!("esx".parse::<Concept>().is_err());
    }

    #[test]
    fn serde_round_trip_and_field_names() {
        let c = cert(Concept::Ues, 0.0, 0.0, 1.0, 2.0);
        let json = serde_json::to_string(&c).unwrap();
        assert!(json.contains("\"log2_N\":0.0"));
        assert!(json.contains("\"concept\":\"ues\""));
        assert!(json.contains("\"form\":\"restricted\""));
        let back: Certificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, c);

        let strong = cert(Concept::Ses, 0.0, 2.0, -0.5, 0.5);
        let json = serde_json::to_string(&strong).unwrap();
        assert!(json.contains("\"form\":\"strong\""));

        // Mismatched form is rejected on the way in.
        let bad = json.replace("\"strong\"", "\"restricted\"");
        assert!(serde_json::from_str::<Certificate>(&bad).is_err());
        // So are out-of-order rates.
        let bad = r#"{"concept":"es","log2_N":0.0,"log2_c":0.0,"log2_a":2.0,"log2_b":1.0,"form":"restricted"}"#;
        assert!(serde_json::from_str::<Certificate>(bad).is_err());
    }

    #[test]
    fn dichotomy_normal_form_takes_the_larger_rate() {
        // (a, b) = (1/2, 4): d = max(1/2, 1/4) = 1/2.
        let d = dichotomy_normal_form(&cert(Concept::Ed, 0.0, 0.0, -1.0, 2.0)).unwrap();
        assert_eq!(d.log2_d, -1.0);
        // (a, b) = (1/4, 2): d = max(1/4, 1/2) = 1/2.
        let d = dichotomy_normal_form(&cert(Concept::Ed, 0.0, 0.0, -2.0, 1.0)).unwrap();
        assert_eq!(d.log2_d, -1.0);
        // (a, b) = (0.9, 1.1): d = max(0.9, 1/1.1) = 1/1.1.
        let d = dichotomy_normal_form(&cert(Concept::Ed, 0.0, 0.0, 0.9f64.log2(), 1.1f64.log2())).unwrap();
        assert!((d.log2_d + 1.1f64.log2()).abs() < 1e-12);
        assert!(d.log2_d < 0.0);

        assert_eq!(
            dichotomy_normal_form(&cert(Concept::Es, 0.0, 0.0, 1.0, 2.0)),
            Err(CertificateError::NotDichotomyForm)
        );
    }

    #[test]
    fn exponential_form_round_trips() {
        // (a, b, c) = (1, e, 1) maps to (alpha, beta, gamma) = (0, 1, 0).
        let e = std::f64::consts::E;
        let f = exponential_form(&cert(Concept::Es, 0.0, 0.0, 0.0, e.log2()));
        assert!(f.alpha.abs() < 1e-12 && (f.beta - 1.0).abs() < 1e-12 && f.gamma.abs() < 1e-12);

        // Oscillating-rate constants: (2^(-1/3), 4^(1/3), 4^(2/3)).
        let c = cert(Concept::Es, 0.0, 4.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0);
        let f = exponential_form(&c);
        let ln2 = std::f64::consts::LN_2;
        assert!((f.alpha + ln2 / 3.0).abs() < 1e-12);
        assert!((f.beta - 2.0 * ln2 / 3.0).abs() < 1e-12);
        assert!((f.gamma - 4.0 * ln2 / 3.0).abs() < 1e-12);

        let back = from_exponential_form(c.concept(), &f).unwrap();
        assert!((back.log2_a() - c.log2_a()).abs() < 1e-12);
        assert!((back.log2_b() - c.log2_b()).abs() < 1e-12);
        assert!((back.log2_c() - c.log2_c()).abs() < 1e-12);
    }

    #[test]
    fn transport_scales_the_constants() {
        // (N, c) = (2, 1) under (M, p) = (3, 1): N1 = 4 * 9 * 2 = 72.
        let c = cert(Concept::Es, 1.0, 0.0, 0.0, 1.0);
        let bound = GrowthFit { log2_m: 3f64.log2(), log2_p: 0.0 };
        let t = transport_projection(&c, &bound).unwrap();
        assert!((t.log2_n() - 72f64.log2()).abs() < 1e-12);
        assert_eq!(t.log2_c(), 0.0);
        assert_eq!(t.concept(), Concept::Es);

        // Unit bounds: (1, 1) becomes (4, 1).
        let c = cert(Concept::Ues, 0.0, 0.0, 0.0, 1.0);
        let t = transport_projection(&c, &GrowthFit { log2_m: 0.0, log2_p: 0.0 }).unwrap();
        assert_eq!(t.log2_n(), 2.0);
        assert_eq!(t.log2_c(), 0.0);
        assert_eq!(t.concept(), Concept::Ues);

        // p > 1 demotes a uniform concept: c1 = p^2 > 1.
        let t = transport_projection(&c, &GrowthFit { log2_m: 0.0, log2_p: 0.5 }).unwrap();
        assert_eq!(t.concept(), Concept::Es);
        assert_eq!(t.log2_c(), 1.0);

        let strong = cert(Concept::Ses, 0.0, 0.0, 0.0, 1.0);
        assert!(transport_projection(&strong, &bound).is_err());
    }

    #[test]
    fn strengthen_and_weaken() {
        // Oscillating-rate block example: (0, 4/3, -1/3, 2/3) under
        // (M, p) = (1, 2) gains c1 = 2 * 4^(2/3) = 2^(7/3).
        let es = cert(Concept::Es, 0.0, 4.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0);
        let s = strengthen(&es, &GrowthFit { log2_m: 0.0, log2_p: 1.0 }).unwrap();
        assert_eq!(s.concept(), Concept::Ses);
        assert!((s.log2_c() - 7.0 / 3.0).abs() < 1e-12);
        assert_eq!(s.log2_n(), 0.0);
        assert_eq!(s.log2_a(), es.log2_a());
        assert_eq!(s.log2_b(), es.log2_b());

        // Unit case keeps everything.
        let u = cert(Concept::Ues, 0.0, 0.0, -1.0, 1.0);
        let s = strengthen(&u, &GrowthFit { log2_m: 0.0, log2_p: 0.0 }).unwrap();
        assert_eq!(s.concept(), Concept::Uses);
        assert_eq!(s.log2_n(), 0.0);
        assert_eq!(s.log2_c(), 0.0);

        // Uniform demotion under p > 1.
        let s = strengthen(&u, &GrowthFit { log2_m: 1.0, log2_p: 1.0 }).unwrap();
        assert_eq!(s.concept(), Concept::Ses);

        // weaken reads the bound back off the strong constants.
        let strong = cert(Concept::Uses, 2.0, 0.0, -1.0, 1.0);
        let (restricted, bound) = weaken(&strong).unwrap();
        assert_eq!(restricted.concept(), Concept::Ues);
        assert_eq!(bound.log2_m, 2.0);
        assert_eq!(bound.log2_p, 0.0);
        assert!(weaken(&restricted).is_err());
    }
}
