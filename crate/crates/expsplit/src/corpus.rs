//! A catalog of systems with known splitting behavior.
//!
//! Four hand-built entries sit on the boundaries between the eight
//! concepts:
//!
//!   example2_r2    plane system with constant rates 2 and 4 across a
//!                  projector family whose norms grow like 2^(n^2); split
//!                  uniformly, dichotomic in no sense, too steep for any
//!                  strong bound
//!   example3_r2    the same steep projectors driven at rates that wander
//!                  by third-integer exponents a_n = n (n odd), n/3
//!                  (n even); split, but no uniform rate survives a long
//!                  enough window
//!   example4_block 2x2 blocks graded like 2^n with the wandering rates
//!                  of example3_r2; strongly split, uniform in no
//!                  direction, and closed under block-diagonal repetition
//!   example11_r3   a three-dimensional system whose kernel dimension
//!                  jumps at the first step; invariant but not strongly
//!                  invariant, and not reversible
//!
//! Two seeded generators complete the catalog: `random_reversible` builds
//! invertible steps near the identity together with a projector family
//! conjugated along the flow (strongly invariant by construction), and
//! `shared_range_variant` perturbs any projector family into a different
//! one with the same ranges, R_n = P_n + P_n W_n Q_n.
//!
//! Every entry records the certificates known to hold on its default
//! window and the analysis outcomes expected of it, each pinned to the
//! window where it is decidable; refutations that only bind on long
//! windows carry those longer windows explicitly.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::numerics::matrix::{NormKind, ScaledMatrix};
use crate::numerics::scaled::ScaledF64;
use crate::numerics::svd::svd_columns;
use crate::projections::ProjectionDef;
use crate::splitting::{Certificate, Concept, Verdict};
use crate::system::SystemDef;

/// Mixing constant for deriving per-index seeds from a stream seed.
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Largest dimension the random generators accept.
pub const MAX_RANDOM_DIM: usize = 8;

/// Condition number bound, in log2, that every random step must clear.
const COND_CAP_LOG2: f64 = 9.965784284662087; // log2 1000

/// Names accepted by `builtin`, in catalog order.
pub const BUILTIN_NAMES: [&str; 4] =
    ["example2_r2", "example3_r2", "example4_block", "example11_r3"];

/// How an analysis of one concept is expected to come out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Certified,
    Infeasible,
    TrendBlocked,
    Inconclusive,
}

impl Outcome {
    /// Whether a classification verdict lands in this bucket.
    pub fn matches(self, v: &Verdict) -> bool {
        matches!(
            (self, v),
            (Outcome::Certified, Verdict::CertifiedByUser(_) | Verdict::CertifiedByFit(_))
                | (Outcome::Infeasible, Verdict::Infeasible { .. })
                | (Outcome::TrendBlocked, Verdict::TrendBlocked { .. })
                | (Outcome::Inconclusive, Verdict::Inconclusive { .. })
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Certified => "certified",
            Outcome::Infeasible => "infeasible",
            Outcome::TrendBlocked => "trend_blocked",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

/// One machine-checkable expectation attached to a corpus entry.
///
/// Each check names the window it is decidable on; a refutation that needs
/// a long window to bind is not asserted on shorter ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpectedCheck {
    /// Classifying this concept at this window lands in this bucket.
    Verdict { concept: Concept, window: i64, outcome: Outcome },
    /// Strong invariance fails over this pair (kernel map not an iso).
    StrongInvarianceFailsAt { pair: (i64, i64) },
    /// This step matrix is singular, so the system is not reversible.
    SingularStepAt { step: i64 },
    /// Every step over the window is invertible with condition <= 10^3.
    Reversible { window: i64 },
}

/// A named system, its projector family, and what is known about them.
#[derive(Clone)]
pub struct CorpusEntry {
    pub name: String,
    /// One-line description of what the entry exercises.
    pub summary: &'static str,
    pub system: SystemDef,
    pub projection: ProjectionDef,
    pub norm: NormKind,
    /// Default analysis window.
    pub window: i64,
    /// Certificates known to verify at the default window.
    pub certificates: Vec<Certificate>,
    pub expected: Vec<ExpectedCheck>,
}

impl CorpusEntry {
    pub fn dim(&self) -> usize {
        self.system.dim()
    }
}

/// Looks up a catalog entry by name.
pub fn builtin(name: &str) -> Option<CorpusEntry> {
    match name {
        "example2_r2" => Some(example2_r2()),
        "example3_r2" => Some(example3_r2()),
        "example4_block" => Some(example4_block(1)),
        "example11_r3" => Some(example11_r3()),
        _ => None,
    }
}

fn cert(concept: Concept, ln: f64, lc: f64, la: f64, lb: f64) -> Certificate {
    Certificate::new(concept, ln, lc, la, lb).expect("catalog certificate is well formed")
}

fn verdict(concept: Concept, window: i64, outcome: Outcome) -> ExpectedCheck {
    ExpectedCheck::Verdict { concept, window, outcome }
}

/// 3 a_n for the third-integer rate sequence: a_n = n when n is odd and
/// n/3 when n is even, so a_0.. = 0, 1, 2/3, 3, 4/3, 5, 2, ...
fn rate_times3(n: i64) -> i64 {
    if n.rem_euclid(2) == 1 {
        3 * n
    } else {
        n
    }
}

/// Graded plane projector P_n = [[1, v_n], [0, 0]].
fn graded_projection(
    name: &str,
    v: impl Fn(i64) -> ScaledF64 + Send + Sync + 'static,
) -> ProjectionDef {
    ProjectionDef::new(name, 2, move |n| {
        ScaledMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => ScaledF64::ONE,
            (0, 1) => v(n),
            _ => ScaledF64::ZERO,
        })
    })
}

/// Step A_n = cp P_n + ck Q_{n+1}; range directions are stretched by cp,
/// and the next kernel is reached at rate ck.
fn split_step(proj: &ProjectionDef, n: i64, cp: ScaledF64, ck: ScaledF64) -> ScaledMatrix {
    proj.at(n).scale(cp).add(&proj.complement_at(n + 1).scale(ck))
}

/// Rates (2^(a_n - a_{n+1}), 4^(a_{n+1} - a_n)) of the wandering family.
fn wandering_rates(n: i64) -> (ScaledF64, ScaledF64) {
    let d3 = (rate_times3(n) - rate_times3(n + 1)) as f64;
    (ScaledF64::exp2(d3 / 3.0), ScaledF64::exp2(-2.0 * d3 / 3.0))
}

pub fn example2_r2() -> CorpusEntry {
    let v = |n: i64| ScaledF64::two_pow(n * n) - ScaledF64::ONE;
    let projection = graded_projection("example2_r2.projection", v);
    let p = projection.clone();
    let system = SystemDef::new("example2_r2", 2, move |n| {
        split_step(&p, n, ScaledF64::from_f64(2.0), ScaledF64::from_f64(4.0))
    });
    CorpusEntry {
        name: "example2_r2".into(),
        summary: "constant rates 2 and 4 across projectors growing like 2^(n^2)",
        system,
        projection,
        norm: NormKind::Sup,
        window: 20,
        certificates: vec![
            cert(Concept::Ues, 0.0, 0.0, 1.0, 2.0),
            cert(Concept::Es, 0.0, 0.0, 1.0, 2.0),
        ],
        expected: vec![
            verdict(Concept::Es, 20, Outcome::Certified),
            verdict(Concept::Ues, 20, Outcome::Certified),
            verdict(Concept::Ed, 20, Outcome::Infeasible),
            verdict(Concept::Ued, 20, Outcome::Infeasible),
            verdict(Concept::Ses, 20, Outcome::TrendBlocked),
            verdict(Concept::Uses, 20, Outcome::TrendBlocked),
            verdict(Concept::Sed, 20, Outcome::TrendBlocked),
            verdict(Concept::Used, 20, Outcome::TrendBlocked),
        ],
    }
}

pub fn example3_r2() -> CorpusEntry {
    let v = |n: i64| ScaledF64::two_pow(n * n) - ScaledF64::ONE;
    let projection = graded_projection("example3_r2.projection", v);
    let p = projection.clone();
    let system = SystemDef::new("example3_r2", 2, move |n| {
        let (cp, ck) = wandering_rates(n);
        split_step(&p, n, cp, ck)
    });
    CorpusEntry {
        name: "example3_r2".into(),
        summary: "third-integer wandering rates across projectors growing like 2^(n^2)",
        system,
        projection,
        norm: NormKind::Sup,
        window: 20,
        certificates: vec![cert(Concept::Es, 0.0, 4.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0)],
        expected: vec![
            verdict(Concept::Es, 20, Outcome::Certified),
            verdict(Concept::Ed, 20, Outcome::Certified),
            // The uniform refutations only cross the rate cap once the
            // wandering exponents have drifted far enough; they bind at
            // window 40 and are undecided at 20.
            verdict(Concept::Ues, 40, Outcome::Infeasible),
            verdict(Concept::Ued, 40, Outcome::Infeasible),
            verdict(Concept::Ses, 20, Outcome::TrendBlocked),
            verdict(Concept::Uses, 20, Outcome::TrendBlocked),
            verdict(Concept::Sed, 20, Outcome::TrendBlocked),
            verdict(Concept::Used, 20, Outcome::TrendBlocked),
        ],
    }
}

/// The block entry at a given number of identical 2x2 blocks; `builtin`
/// serves copies = 1. Under the sup norm the d-fold repetition has the
/// same gains as a single block, which makes it the reduction soundness
/// fixture.
///
/// The default window stops at 20: the step matrices mix scales about
/// 2^((5n-1)/3) and 2^((5-n)/3) in one entry, so past n = 27 a single
/// f64 significand can no longer hold both and the stored step loses the
/// kernel action entirely. Inside window 20 every column of the gain
/// table tracks the closed forms to better than 1e-4 and both catalog
/// certificates verify with wide margins.
pub fn example4_block(copies: usize) -> CorpusEntry {
    assert!(copies >= 1, "the block entry needs at least one block");
    let v = |n: i64| ScaledF64::two_pow(n) - ScaledF64::ONE;
    let block_proj = graded_projection("example4_block.block_projection", v);
    let bp = block_proj.clone();
    let name = if copies == 1 {
        "example4_block".to_string()
    } else {
        format!("example4_block_x{copies}")
    };
    let projection = ProjectionDef::new(format!("{name}.projection"), 2 * copies, move |n| {
        block_diagonal(&block_proj.at(n), copies)
    });
    let system = SystemDef::new(name.clone(), 2 * copies, move |n| {
        let (cp, ck) = wandering_rates(n);
        block_diagonal(&split_step(&bp, n, cp, ck), copies)
    });
    CorpusEntry {
        name,
        summary: "2x2 blocks graded like 2^n with third-integer wandering rates",
        system,
        projection,
        norm: NormKind::Sup,
        window: 20,
        certificates: vec![
            cert(Concept::Ses, 0.0, 10.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0),
            cert(Concept::Es, 0.0, 4.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0),
        ],
        expected: vec![
            verdict(Concept::Es, 20, Outcome::Certified),
            verdict(Concept::Ed, 20, Outcome::Certified),
            verdict(Concept::Ses, 20, Outcome::Certified),
            verdict(Concept::Sed, 20, Outcome::Certified),
            verdict(Concept::Ues, 20, Outcome::Infeasible),
            verdict(Concept::Ued, 20, Outcome::Infeasible),
            verdict(Concept::Uses, 20, Outcome::Infeasible),
            verdict(Concept::Used, 20, Outcome::Infeasible),
        ],
    }
}

pub fn example11_r3() -> CorpusEntry {
    let projection = ProjectionDef::new("example11_r3.projection", 3, |n| {
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
    });
    let system = SystemDef::new("example11_r3", 3, |n| {
        let mid = if n == 0 { 0.0 } else { 4.0 };
        ScaledMatrix::from_rows(&[
            vec![2.0, 0.0, 0.0],
            vec![0.0, mid, 0.0],
            vec![0.0, 0.0, 4.0],
        ])
    });
    CorpusEntry {
        name: "example11_r3".into(),
        summary: "kernel dimension jumps at step one; invariant, never strongly",
        system,
        projection,
        norm: NormKind::Sup,
        window: 40,
        certificates: vec![],
        expected: vec![
            verdict(Concept::Es, 40, Outcome::Certified),
            verdict(Concept::Ues, 40, Outcome::Certified),
            verdict(Concept::Ed, 40, Outcome::Infeasible),
            verdict(Concept::Ued, 40, Outcome::Infeasible),
            verdict(Concept::Ses, 40, Outcome::Inconclusive),
            verdict(Concept::Uses, 40, Outcome::Inconclusive),
            verdict(Concept::Sed, 40, Outcome::Inconclusive),
            verdict(Concept::Used, 40, Outcome::Inconclusive),
            ExpectedCheck::StrongInvarianceFailsAt { pair: (1, 0) },
            ExpectedCheck::SingularStepAt { step: 0 },
        ],
    }
}

/// Seeded reversible system: steps I + 0.3 R_n with R_n drawn entrywise
/// from [-1, 1], resampled until invertible with condition <= 10^3, and a
/// rank ceil(d/2) projector family conjugated along the flow,
/// P_{n+1} = A_n P_n A_n^{-1}. Strongly invariant by construction; the
/// euclidean norm keeps every gain column exact.
pub fn random_reversible(seed: u64, dim: usize, window: i64) -> CorpusEntry {
    assert!(
        (1..=MAX_RANDOM_DIM).contains(&dim),
        "random systems support dimensions 1..={MAX_RANDOM_DIM}"
    );
    let rank = dim.div_ceil(2);
    let name = format!("random_reversible_s{seed}_d{dim}");
    let system = SystemDef::new(name.clone(), dim, move |n| {
        random_invertible(stream(seed, n as u64), dim)
    });
    let basis = random_invertible(stream(seed, u64::MAX), dim);
    let basis_inv = basis.inverse().expect("resampling only returns invertible matrices");
    let seed_axes = ScaledMatrix::from_fn(dim, dim, |i, j| {
        if i == j && i < rank {
            ScaledF64::ONE
        } else {
            ScaledF64::ZERO
        }
    });
    let p0 = basis.matmul(&seed_axes).matmul(&basis_inv);
    let sys = system.clone();
    let projection = ProjectionDef::new(format!("{name}.projection"), dim, move |n| {
        let a = sys.product_direct(n, 0);
        let a_inv = a.inverse().expect("products of invertible steps are invertible");
        a.matmul(&p0).matmul(&a_inv)
    });
    CorpusEntry {
        name,
        summary: "seeded invertible steps with a projector family conjugated along the flow",
        system,
        projection,
        norm: NormKind::Two,
        window,
        certificates: vec![],
        expected: vec![ExpectedCheck::Reversible { window }],
    }
}

/// A projector family with the same ranges as `proj` but different
/// kernels: R_n = P_n + P_n W_n Q_n with W_n seeded per index. Idempotence
/// and the shared range are algebraic, since Q P = 0 kills every cross
/// term.
pub fn shared_range_variant(proj: &ProjectionDef, seed: u64) -> ProjectionDef {
    let dim = proj.dim();
    shared_range_from(format!("{}.shared_range_s{seed}", proj.name()), proj, move |n| {
        random_entries(seed.wrapping_mul(GOLDEN).wrapping_add(n as u64), dim)
    })
}

fn shared_range_from(
    name: String,
    proj: &ProjectionDef,
    coupling: impl Fn(i64) -> ScaledMatrix + Send + Sync + 'static,
) -> ProjectionDef {
    let base = proj.clone();
    let dim = proj.dim();
    ProjectionDef::new(name, dim, move |n| {
        let p = base.at(n);
        let q = ScaledMatrix::identity(dim).sub(&p);
        p.add(&p.matmul(&coupling(n)).matmul(&q))
    })
}

fn block_diagonal(block: &ScaledMatrix, copies: usize) -> ScaledMatrix {
    let d = block.rows();
    ScaledMatrix::from_fn(d * copies, d * copies, |i, j| {
        if i / d == j / d {
            block.get(i % d, j % d)
        } else {
            ScaledF64::ZERO
        }
    })
}

fn stream(seed: u64, lane: u64) -> u64 {
    seed.wrapping_mul(GOLDEN).wrapping_add(lane)
}

fn unit_draw(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64) / ((1u64 << 53) as f64) * 2.0 - 1.0
}

/// dim x dim matrix with entries drawn uniformly from [-1, 1).
fn random_entries(seed: u64, dim: usize) -> ScaledMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> =
        (0..dim).map(|_| (0..dim).map(|_| unit_draw(&mut rng)).collect()).collect();
    ScaledMatrix::from_rows(&rows)
}

/// I + 0.3 R for seeded R, resampled deterministically until the result
/// is invertible with condition number at most 10^3.
fn random_invertible(seed: u64, dim: usize) -> ScaledMatrix {
    for attempt in 0..64u64 {
        let r = random_entries(stream(seed, attempt), dim);
        let cand = ScaledMatrix::identity(dim).add(&r.scale(ScaledF64::from_f64(0.3)));
        let sv = svd_columns(&cand);
        if sv.sigma_min().is_zero() {
            continue;
        }
        let cond_log2 = sv.sigma_max().log2() - sv.sigma_min().log2();
        if cond_log2 <= COND_CAP_LOG2 && cand.inverse().is_some() {
            return cand;
        }
    }
    unreachable!("no invertible draw within 64 attempts");
}
