//! Per-pair gain tables, the raw material of every verification and fit.
//!
//! For each window pair (m, n) the table records, in log2 form:
//!
//!   range_sup   sup |A(m,n) u| / |u| over u in Range P_n
//!   kernel_inf  inf |A(m,n) u| / |u| over u in Range Q_n
//!   range_norm  |A(m,n) P_n|, full operator norm of the forward part
//!   skew_norm   |B(m,n)|, full operator norm of the skew evolution
//!   skew_sup    sup |B(m,n) u| / |u| over u in Range Q_m
//!
//! The restricted columns are brackets (exact for one-dimensional
//! subspaces and for the euclidean norm, sampled two-sided enclosures
//! otherwise); the norm columns are plain magnitudes. The two skew
//! columns exist only when the projections are strongly invariant over
//! the window; otherwise the table is still built and records why they
//! are missing. Pairs whose range or kernel is zero-dimensional carry
//! vacuous sentinels (-inf for suprema, +inf for infima).

use crate::invariance::{NotStronglyInvariant, SkewTable};
use crate::numerics::gain::{restricted_inf_gain, restricted_sup_gain, GainBracket};
use crate::numerics::log2::LogMag;
use crate::numerics::matrix::{NormKind, ScaledMatrix};
use crate::numerics::subspace::{split_projector, ProjectorSplit};
use crate::numerics::svd::DEFAULT_RANK_TOL;
use crate::projections::{mat_norm, ProjectionDef};
use crate::scan;
use crate::system::{EvolutionCache, SystemDef};

/// Gains of a single pair (m, n).
#[derive(Clone, Debug)]
pub struct PairGains {
    pub pair: (i64, i64),
    pub range_sup: GainBracket,
    pub kernel_inf: GainBracket,
    pub range_norm: LogMag,
    pub skew_norm: Option<LogMag>,
    pub skew_sup: Option<GainBracket>,
}

/// All gains over a window, plus the per-index projector data the checks
/// need alongside them.
#[derive(Clone, Debug)]
pub struct GainTable {
    pub window: i64,
    pub kind: NormKind,
    /// One entry per pair, in scan order (m ascending, then n).
    pub pairs: Vec<PairGains>,
    /// log2 |P_n| for n = 0..=window.
    pub p_norms: Vec<LogMag>,
    /// log2 |Q_n| for n = 0..=window.
    pub q_norms: Vec<LogMag>,
    pub p_dims: Vec<usize>,
    pub q_dims: Vec<usize>,
    /// Why the skew columns are absent, when they are.
    pub skew_status: Option<NotStronglyInvariant>,
}

impl GainTable {
    /// Gains for one pair; requires 0 <= n <= m <= window.
    pub fn get(&self, m: i64, n: i64) -> &PairGains {
        assert!(0 <= n && n <= m && m <= self.window, "pair outside table");
        &self.pairs[(m * (m + 1) / 2 + n) as usize]
    }

    pub fn has_skew(&self) -> bool {
        self.skew_status.is_none()
    }
}

/// Builds the table from scratch.
pub fn gain_table(
    sys: &SystemDef,
    proj: &ProjectionDef,
    window: i64,
    kind: NormKind,
    tol: f64,
) -> GainTable {
    let cache = EvolutionCache::build(sys, window);
    gain_table_with_cache(&cache, proj, kind, tol)
}

/// Builds the table over an existing evolution cache.
pub fn gain_table_with_cache(
    cache: &EvolutionCache,
    proj: &ProjectionDef,
    kind: NormKind,
    tol: f64,
) -> GainTable {
    let window = cache.window();
    let splits: Vec<ProjectorSplit> =
        (0..=window).map(|n| split_projector(&proj.at(n), DEFAULT_RANK_TOL)).collect();
    let projs: Vec<ScaledMatrix> = (0..=window).map(|n| proj.at(n)).collect();
    let (skew, skew_status) = match SkewTable::build(cache, proj, kind, tol) {
        Ok(t) => (Some(t), None),
        Err(e) => (None, Some(e)),
    };
    let pairs = scan::map_pairs(window, |(m, n)| {
        let a = cache.evolution(m, n);
        // The evolution over (n, n) is the identity, whose restricted
        // gains are exactly one on any nonzero subspace in every norm;
        // measuring them through the svd machinery would smear that by
        // the norm-equivalence factor.
        let exact_one = |dim: usize, fallback: &dyn Fn() -> GainBracket| {
            if m == n && dim > 0 {
                GainBracket::exact(LogMag::ONE_MAG)
            } else {
                fallback()
            }
        };
        let range_sup = exact_one(splits[n as usize].range.dim(), &|| {
            restricted_sup_gain(a, &splits[n as usize].range, kind)
        });
        let kernel_inf = exact_one(splits[n as usize].kernel.dim(), &|| {
            restricted_inf_gain(a, &splits[n as usize].kernel, kind)
        });
        let range_norm = mat_norm(&a.matmul(&projs[n as usize]), kind);
        let (skew_norm, skew_sup) = match &skew {
            Some(t) => {
                let b = t.get(m, n);
                let sup = exact_one(splits[m as usize].kernel.dim(), &|| {
                    restricted_sup_gain(b, &splits[m as usize].kernel, kind)
                });
                (Some(mat_norm(b, kind)), Some(sup))
            }
            None => (None, None),
        };
        PairGains { pair: (m, n), range_sup, kernel_inf, range_norm, skew_norm, skew_sup }
    });
    GainTable {
        window,
        kind,
        pairs,
        p_norms: projs.iter().map(|p| mat_norm(p, kind)).collect(),
        q_norms: (0..=window).map(|n| mat_norm(&proj.complement_at(n), kind)).collect(),
        p_dims: splits.iter().map(|s| s.range.dim()).collect(),
        q_dims: splits.iter().map(|s| s.kernel.dim()).collect(),
        skew_status,
    }
}
