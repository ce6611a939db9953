//! The splitting analysis itself: per-pair gain tables, certificates for
//! the eight concepts, verification and violation search, LP-based
//! constant fitting, and whole-system classification.

mod certificate;
mod classify;
mod fit;
mod simplex;
mod table;
mod verify;

pub use certificate::{
    dichotomy_normal_form, exponential_form, from_exponential_form, strengthen, transport_projection,
    weaken, Certificate, CertificateError, Concept, DichotomyForm, ExponentialForm, Form,
};
pub use classify::{classify, classify_with_certs, AnalysisReport, ConceptVerdict, Verdict};
pub use fit::{fit_certificate, FitError};
pub use table::{gain_table, gain_table_with_cache, GainTable, PairGains};
pub use verify::{
    find_violation, kernel_injectivity_check, reversible_es2_equiv, reversible_res2_check,
    verify_certificate, verify_dichotomy_form, InequalityTag, InjectivityRecord, MissingColumn,
    NotReversible, ReversibleEquiv, VerifyOutcome, ViolationWitness,
};
