//! Subcommand drivers: resolve a target, run the library on it, shape
//! the result into a report.

use std::fmt;
use std::fs;
use std::path::Path;

use anyhow::Context;
use expsplit::corpus::{self, CorpusEntry};
use expsplit::invariance::skew_identity_suite;
use expsplit::numerics::log2::LogMag;
use expsplit::numerics::matrix::ScaledMatrix;
use expsplit::projections::{shared_range_identities, CheckResult};
use expsplit::splitting::{
    classify_with_certs, find_violation, fit_certificate, gain_table, verify_certificate,
    Certificate, Concept, FitError,
};
use expsplit::{EvolutionCache, NormKind, ProjectionDef, SystemDef};

use crate::report::{
    render_json, AnalyzeReport, CertificateBlock, CertificateFile, DefinitionFile, FitReport,
    IdentitiesReport, ListEntry, ListReport, LogScalar, RangeSuiteBlock, RefuteReport, RuleDef,
    RunConfig, ScanLine, ShowReport, SkewSuiteBlock, SystemBlock, VerifyReport, WitnessBlock,
    SCHEMA_VERSION,
};

/// A run failure with its exit code class: configuration errors exit 2,
/// numerical failures exit 3.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Numerical(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical(_) => 3,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(msg) | RunError::Numerical(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for RunError {}

fn config_err(err: impl fmt::Display) -> RunError {
    RunError::Config(format!("{err:#}"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Flags shared by every subcommand, already validated and defaulted.
pub struct RunOptions {
    pub window: Option<i64>,
    pub norm: Option<NormKind>,
    /// Linear cap on the envelope constant.
    pub ncap: f64,
    pub tol: f64,
    pub seed: u64,
    pub format: OutputFormat,
}

impl RunOptions {
    fn n_cap_log2(&self) -> f64 {
        self.ncap.log2()
    }
}

/// Rendered report text plus the exit code it should carry. `note` is
/// a diagnostic for stderr that must not disturb the report stream.
pub struct RunOutput {
    pub text: String,
    pub exit_code: i32,
    pub note: Option<String>,
}

impl RunOutput {
    fn ok(text: String) -> Self {
        RunOutput { text, exit_code: 0, note: None }
    }
}

/// A resolved analysis target: a system, its projector family, and the
/// defaults it carries.
struct Target {
    label: String,
    name: String,
    summary: Option<String>,
    system: SystemDef,
    projection: ProjectionDef,
    norm: NormKind,
    window: i64,
    certificates: Vec<Certificate>,
}

impl Target {
    fn from_entry(label: String, entry: CorpusEntry) -> Self {
        Target {
            label,
            name: entry.name.clone(),
            summary: Some(entry.summary.to_string()),
            system: entry.system,
            projection: entry.projection,
            norm: entry.norm,
            window: entry.window,
            certificates: entry.certificates,
        }
    }

    fn window(&self, opts: &RunOptions) -> i64 {
        opts.window.unwrap_or(self.window)
    }

    fn norm(&self, opts: &RunOptions) -> NormKind {
        opts.norm.unwrap_or(self.norm)
    }

    fn config(&self, opts: &RunOptions) -> RunConfig {
        RunConfig {
            target: self.label.clone(),
            window: self.window(opts),
            norm: self.norm(opts).as_str().to_string(),
            n_cap: LogScalar::from_log2(opts.n_cap_log2()),
            tol: LogScalar::from_linear(opts.tol),
            seed: opts.seed,
        }
    }

    fn system_block(&self) -> SystemBlock {
        SystemBlock {
            name: self.name.clone(),
            dim: self.system.dim(),
            summary: self.summary.clone(),
        }
    }
}

/// Fixed shape of the `random_reversible` command-line target; other
/// dimensions are reachable through a definition file.
const RANDOM_TARGET_DIM: usize = 4;
const RANDOM_TARGET_WINDOW: i64 = 10;

fn load_target(spec: &str, opts: &RunOptions) -> Result<Target, RunError> {
    if let Some(entry) = corpus::builtin(spec) {
        return Ok(Target::from_entry(spec.to_string(), entry));
    }
    if spec == "random_reversible" {
        let entry = corpus::random_reversible(opts.seed, RANDOM_TARGET_DIM, RANDOM_TARGET_WINDOW);
        return Ok(Target::from_entry(spec.to_string(), entry));
    }
    if Path::new(spec).is_file() {
        return load_definition(spec, opts);
    }
    Err(RunError::Config(format!(
        "unknown target {spec:?}: not a catalog name, \"random_reversible\", or a definition file"
    )))
}

fn load_definition(path: &str, opts: &RunOptions) -> Result<Target, RunError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading definition file {path:?}"))
        .map_err(config_err)?;
    let def: DefinitionFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing definition file {path:?}"))
        .map_err(config_err)?;
    if def.schema_version != SCHEMA_VERSION {
        return Err(RunError::Config(format!(
            "definition file {path:?} has schema_version {}, expected {SCHEMA_VERSION}",
            def.schema_version
        )));
    }
    if def.dim == 0 {
        return Err(RunError::Config(format!("definition file {path:?} declares dimension 0")));
    }
    let norm: NormKind = def.norm.parse().map_err(RunError::Config)?;
    let mut target = match &def.rule {
        RuleDef::Builtin { builtin, params } => {
            let entry = if builtin == "random_reversible" {
                let dim = params.dim.unwrap_or(def.dim);
                corpus::random_reversible(
                    params.seed.unwrap_or(opts.seed),
                    dim,
                    def.window.unwrap_or(RANDOM_TARGET_WINDOW),
                )
            } else {
                if params.seed.is_some() || params.dim.is_some() {
                    return Err(RunError::Config(format!(
                        "builtin rule {builtin:?} takes no parameters"
                    )));
                }
                corpus::builtin(builtin).ok_or_else(|| {
                    RunError::Config(format!("definition file names unknown builtin {builtin:?}"))
                })?
            };
            if entry.dim() != def.dim {
                return Err(RunError::Config(format!(
                    "definition file declares dim {} but rule {builtin:?} has dim {}",
                    def.dim,
                    entry.dim()
                )));
            }
            Target::from_entry(path.to_string(), entry)
        }
        RuleDef::Explicit { explicit } => explicit_target(path, &def, explicit)?,
    };
    target.norm = norm;
    if let Some(w) = def.window {
        target.window = w;
    }
    Ok(target)
}

fn explicit_target(
    path: &str,
    def: &DefinitionFile,
    steps: &[Vec<Vec<f64>>],
) -> Result<Target, RunError> {
    let projections = def.projections.as_ref().ok_or_else(|| {
        RunError::Config(format!(
            "definition file {path:?} uses an explicit rule but has no projections list"
        ))
    })?;
    if steps.is_empty() {
        return Err(RunError::Config(format!("definition file {path:?} lists no step matrices")));
    }
    if projections.len() != steps.len() + 1 {
        return Err(RunError::Config(format!(
            "definition file {path:?} lists {} steps but {} projectors; need one projector \
             per index 0..=steps",
            steps.len(),
            projections.len()
        )));
    }
    let window = def.window.unwrap_or(steps.len() as i64);
    if window < 0 || window > steps.len() as i64 {
        return Err(RunError::Config(format!(
            "definition file {path:?} sets window {window} but lists only {} steps",
            steps.len()
        )));
    }
    let parse = |rows: &Vec<Vec<f64>>, what: &str, at: usize| -> Result<ScaledMatrix, RunError> {
        if rows.len() != def.dim || rows.iter().any(|r| r.len() != def.dim) {
            return Err(RunError::Config(format!(
                "definition file {path:?}: {what} {at} is not a {dim} by {dim} matrix",
                dim = def.dim
            )));
        }
        Ok(ScaledMatrix::from_rows(rows))
    };
    let mats: Vec<ScaledMatrix> =
        steps.iter().enumerate().map(|(k, rows)| parse(rows, "step", k)).collect::<Result<_, _>>()?;
    let projs: Vec<ScaledMatrix> = projections
        .iter()
        .enumerate()
        .map(|(k, rows)| parse(rows, "projector", k))
        .collect::<Result<_, _>>()?;
    let name = Path::new(path)
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.to_string());
    Ok(Target {
        label: path.to_string(),
        name: name.clone(),
        summary: None,
        system: SystemDef::new(name.clone(), def.dim, move |n| mats[n as usize].clone()),
        projection: ProjectionDef::new(name, def.dim, move |n| projs[n as usize].clone()),
        norm: NormKind::Sup,
        window,
        certificates: Vec::new(),
    })
}

fn load_certificate(path: &Path) -> Result<Certificate, RunError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading certificate file {}", path.display()))
        .map_err(config_err)?;
    let file: CertificateFile = serde_json::from_str(&text)
        .with_context(|| format!("parsing certificate file {}", path.display()))
        .map_err(config_err)?;
    if file.schema_version != SCHEMA_VERSION {
        return Err(RunError::Config(format!(
            "certificate file {} has schema_version {}, expected {SCHEMA_VERSION}",
            path.display(),
            file.schema_version
        )));
    }
    Ok(file.certificate)
}

fn reject_csv(opts: &RunOptions, command: &str) -> Result<(), RunError> {
    if opts.format == OutputFormat::Csv {
        return Err(RunError::Config(format!(
            "csv output is only available for analyze and identities, not {command}"
        )));
    }
    Ok(())
}

pub fn run_list(opts: &RunOptions) -> Result<RunOutput, RunError> {
    reject_csv(opts, "list")?;
    let entries = corpus::BUILTIN_NAMES
        .iter()
        .map(|name| {
            let entry = corpus::builtin(name).expect("catalog names resolve");
            ListEntry {
                name: entry.name.clone(),
                dim: entry.dim(),
                window: entry.window,
                norm: entry.norm.as_str().to_string(),
                summary: entry.summary.to_string(),
            }
        })
        .collect();
    let report =
        ListReport { schema_version: SCHEMA_VERSION, command: "list".into(), entries };
    Ok(RunOutput::ok(render_json(&report)))
}

pub fn run_show(name: &str, opts: &RunOptions) -> Result<RunOutput, RunError> {
    reject_csv(opts, "show")?;
    let entry = corpus::builtin(name).ok_or_else(|| {
        RunError::Config(format!(
            "unknown catalog entry {name:?}; `list` prints the available names"
        ))
    })?;
    let report = ShowReport {
        schema_version: SCHEMA_VERSION,
        command: "show".into(),
        entry: ListEntry {
            name: entry.name.clone(),
            dim: entry.dim(),
            window: entry.window,
            norm: entry.norm.as_str().to_string(),
            summary: entry.summary.to_string(),
        },
        certificates: entry.certificates.iter().map(CertificateBlock::from_certificate).collect(),
    };
    Ok(RunOutput::ok(render_json(&report)))
}

pub fn run_analyze(spec: &str, opts: &RunOptions) -> Result<RunOutput, RunError> {
    let target = load_target(spec, opts)?;
    let analysis = classify_with_certs(
        &target.system,
        &target.projection,
        &target.certificates,
        target.window(opts),
        target.norm(opts),
        opts.n_cap_log2(),
        opts.tol,
    );
    let report =
        AnalyzeReport::from_analysis(target.config(opts), target.system_block(), &analysis);
    let exit_code = if report.internal_error.is_some() { 3 } else { 0 };
    let note = report.internal_error.as_ref().map(|e| format!("internal error: {e}"));
    let text = match opts.format {
        OutputFormat::Json => render_json(&report),
        OutputFormat::Csv => match &report.gain_table {
            Some(table) => table.to_csv(),
            None => {
                return Err(RunError::Numerical(
                    "no gain table to render as csv: the projector checks failed".into(),
                ))
            }
        },
    };
    Ok(RunOutput { text, exit_code, note })
}

pub fn run_verify(spec: &str, cert_path: &Path, opts: &RunOptions) -> Result<RunOutput, RunError> {
    reject_csv(opts, "verify")?;
    let target = load_target(spec, opts)?;
    let cert = load_certificate(cert_path)?;
    let table = gain_table(
        &target.system,
        &target.projection,
        target.window(opts),
        target.norm(opts),
        opts.tol,
    );
    let outcome = verify_certificate(&table, &cert, opts.tol)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let report = VerifyReport::from_outcome(target.config(opts), &cert, &outcome);
    Ok(RunOutput::ok(render_json(&report)))
}

pub fn run_fit(spec: &str, concept: &str, opts: &RunOptions) -> Result<RunOutput, RunError> {
    reject_csv(opts, "fit")?;
    let concept: Concept = concept
        .parse()
        .map_err(|_| RunError::Config(format!("unknown concept {concept:?}")))?;
    let target = load_target(spec, opts)?;
    let table = gain_table(
        &target.system,
        &target.projection,
        target.window(opts),
        target.norm(opts),
        opts.tol,
    );
    let mut report = FitReport {
        schema_version: SCHEMA_VERSION,
        command: "fit".into(),
        config: target.config(opts),
        concept: concept.as_str().to_string(),
        status: String::new(),
        certificate: None,
        n_cap: None,
        binding: None,
        reason: None,
    };
    match fit_certificate(&table, concept, opts.n_cap_log2(), opts.tol) {
        Ok(cert) => {
            report.status = "fitted".into();
            report.certificate = Some(CertificateBlock::from_certificate(&cert));
        }
        Err(FitError::Infeasible { n_cap_log2, binding }) => {
            report.status = "infeasible".into();
            report.n_cap = Some(LogScalar::from_log2(n_cap_log2));
            report.binding = Some(binding.iter().map(|p| [p.0, p.1]).collect());
        }
        Err(FitError::Inconclusive { n_cap_log2, binding }) => {
            report.status = "inconclusive".into();
            report.n_cap = Some(LogScalar::from_log2(n_cap_log2));
            report.binding = Some(binding.iter().map(|p| [p.0, p.1]).collect());
            report.reason =
                Some("raising the envelope cap might make this concept feasible".into());
        }
        Err(err @ FitError::MissingColumn(_)) | Err(err @ FitError::Unsound) => {
            return Err(RunError::Numerical(err.to_string()));
        }
    }
    Ok(RunOutput::ok(render_json(&report)))
}

pub fn run_refute(spec: &str, cert_path: &Path, opts: &RunOptions) -> Result<RunOutput, RunError> {
    reject_csv(opts, "refute")?;
    let target = load_target(spec, opts)?;
    let cert = load_certificate(cert_path)?;
    let table = gain_table(
        &target.system,
        &target.projection,
        target.window(opts),
        target.norm(opts),
        opts.tol,
    );
    let witness = find_violation(&table, &cert, opts.tol);
    let report = RefuteReport {
        schema_version: SCHEMA_VERSION,
        command: "refute".into(),
        config: target.config(opts),
        certificate: CertificateBlock::from_certificate(&cert),
        refuted: witness.is_some(),
        witness: witness.as_ref().map(WitnessBlock::from_witness),
    };
    Ok(RunOutput::ok(render_json(&report)))
}

pub fn run_identities(spec: &str, opts: &RunOptions) -> Result<RunOutput, RunError> {
    let target = load_target(spec, opts)?;
    let window = target.window(opts);
    let norm = target.norm(opts);
    let cache = EvolutionCache::build(&target.system, window);
    let cocycle = cocycle_scan(&cache, window, norm, opts.tol);
    let coupled = corpus::shared_range_variant(&target.projection, opts.seed);
    let range = shared_range_identities(&target.projection, &coupled, window, norm, opts.tol)
        .map_err(|e| RunError::Numerical(e.to_string()))?;
    let skew = skew_identity_suite(&target.system, &target.projection, window, norm, opts.tol);
    let report = IdentitiesReport {
        schema_version: SCHEMA_VERSION,
        command: "identities".into(),
        config: target.config(opts),
        cocycle: ScanLine::from_check(&cocycle),
        range_suite: RangeSuiteBlock::from_residuals(opts.seed, &range),
        skew_suite: SkewSuiteBlock::from_result(&skew),
    };
    let exit_code = if skew.is_err() { 3 } else { 0 };
    let note = skew.err().map(|e| e.to_string());
    let text = match opts.format {
        OutputFormat::Json => render_json(&report),
        OutputFormat::Csv => report.to_csv(),
    };
    Ok(RunOutput { text, exit_code, note })
}

/// Relative residual of A(m, p) against A(m, n) A(n, p) over every
/// ordered triple in the window.
fn cocycle_scan(
    cache: &EvolutionCache,
    window: i64,
    kind: NormKind,
    tol: f64,
) -> CheckResult<(i64, i64, i64)> {
    let cut = LogMag::from_log2(tol.log2());
    let mut out: CheckResult<(i64, i64, i64)> = CheckResult {
        ok: true,
        max_residual: LogMag::ZERO_MAG,
        max_at: None,
        first_fail: None,
    };
    for m in 0..=window {
        for n in 0..=m {
            for p in 0..=n {
                let r = cache.cocycle_residual(m, n, p, kind);
                if out.max_at.is_none() || !r.le_tol(out.max_residual, 0.0) {
                    out.max_residual = out.max_residual.max(r);
                    out.max_at = Some((m, n, p));
                }
                if !r.le_tol(cut, 0.0) && out.first_fail.is_none() {
                    out.first_fail = Some((m, n, p));
                    out.ok = false;
                }
            }
        }
    }
    out
}
