//! Best and worst amplification of a map over a subspace.
//!
//! Splitting estimates compare ||A(m,n) v|| / ||v|| over v in an invariant
//! subspace: the supremum over range(P_n) drives contraction bounds and the
//! infimum over Ker P_n drives expansion bounds. In the two norm both
//! extremes are exact singular values of A K for an orthonormal basis K. In
//! the sup and one norms no closed form exists for dim >= 2, so the result
//! is a bracket: a witnessed sampled extremum on the achievable side and a
//! norm-equivalence bound on the other. Downstream checks only assert facts
//! that hold for every value inside the bracket.

use rand_core::{RngCore, SeedableRng};

use crate::numerics::log2::LogMag;
use crate::numerics::matrix::{vector_norm, NormKind, ScaledMatrix};
use crate::numerics::scaled::ScaledF64;
use crate::numerics::subspace::Subspace;
use crate::numerics::svd::svd_columns;

/// Sampling seed basis; mixed with the dimensions only, never with matrix
/// content, so two routes to the same restricted map sample identical
/// directions and their sampled extrema are comparable.
const DIRECTION_SEED: u64 = 0x5ca1_ab1e_0f01_d1ce;

/// Direction counts escalate 10 * 4^k for k = 0..=3 until the bracket is
/// tighter than this in log2.
const TARGET_WIDTH_LOG2: f64 = 0.1;

/// Enclosure of a restricted gain: lo <= gain <= hi.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GainBracket {
    pub lo: LogMag,
    pub hi: LogMag,
}

impl GainBracket {
    pub fn exact(v: LogMag) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    /// The gain is certainly <= bound (up to tol).
    pub fn surely_le(&self, bound: LogMag, tol: f64) -> bool {
        self.hi.le_tol(bound, tol)
    }

    /// The gain is certainly > bound (beyond tol).
    pub fn surely_gt(&self, bound: LogMag, tol: f64) -> bool {
        !self.lo.le_tol(bound, tol)
    }

    /// The gain is certainly >= bound (up to tol).
    pub fn surely_ge(&self, bound: LogMag, tol: f64) -> bool {
        bound.le_tol(self.lo, tol)
    }

    /// The gain is certainly < bound (beyond tol).
    pub fn surely_lt(&self, bound: LogMag, tol: f64) -> bool {
        !bound.le_tol(self.hi, tol)
    }

    pub fn width_log2(&self) -> f64 {
        if self.lo == self.hi {
            0.0
        } else {
            self.hi.log2() - self.lo.log2()
        }
    }
}

/// sup over nonzero v in the subspace of ||A v|| / ||v||.
pub fn restricted_sup_gain(a: &ScaledMatrix, space: &Subspace, kind: NormKind) -> GainBracket {
    restricted_gain(a, space, kind, Extremum::Sup)
}

/// inf over nonzero v in the subspace of ||A v|| / ||v||.
pub fn restricted_inf_gain(a: &ScaledMatrix, space: &Subspace, kind: NormKind) -> GainBracket {
    restricted_gain(a, space, kind, Extremum::Inf)
}

#[derive(Clone, Copy, PartialEq)]
enum Extremum {
    Sup,
    Inf,
}

fn restricted_gain(
    a: &ScaledMatrix,
    space: &Subspace,
    kind: NormKind,
    which: Extremum,
) -> GainBracket {
    assert_eq!(a.cols(), space.ambient(), "map and subspace dimensions differ");
    let r = space.dim();
    if r == 0 {
        // Extremum over an empty set of directions.
        return match which {
            Extremum::Sup => GainBracket::exact(LogMag::ZERO_MAG),
            Extremum::Inf => GainBracket::exact(LogMag::VACUOUS_INF),
        };
    }
    let k = space.basis();
    if r == 1 {
        let u = k.col(0);
        let num = LogMag::from_scaled(vector_norm(&a.matvec(&u), kind));
        let den = LogMag::from_scaled(vector_norm(&u, kind));
        return GainBracket::exact(num.ratio(den));
    }
    let m = a.matmul(k);
    let svd = svd_columns(&m);
    if kind == NormKind::Two {
        // K has orthonormal columns, so ||K c||_2 = ||c||_2 and the gain
        // range is exactly [sigma_min, sigma_max] of A K.
        let v = match which {
            Extremum::Sup => svd.sigma_max(),
            Extremum::Inf => svd.sigma_min(),
        };
        return GainBracket::exact(LogMag::from_scaled(v));
    }
    // Norm-equivalence bound on the unachievable side: sqrt(d) transfers
    // between the two norm and either the sup or the one norm.
    let half_log_d = 0.5 * (space.ambient() as f64).log2();
    let bound = match which {
        Extremum::Sup => {
            let from_sigma = LogMag::from_scaled(svd.sigma_max()).scale(LogMag::from_log2(half_log_d));
            // The restriction never beats the full operator norm.
            from_sigma.min(LogMag::from_scaled(match kind {
                NormKind::Sup => a.sup_norm(),
                NormKind::One => a.one_norm(),
                NormKind::Two => unreachable!(),
            }))
        }
        Extremum::Inf => {
            LogMag::from_scaled(svd.sigma_min()).ratio(LogMag::from_log2(half_log_d))
        }
    };
    let sampled = sampled_extremum(&m, k, kind, which, r, space.ambient(), bound);
    match which {
        Extremum::Sup => GainBracket { lo: sampled, hi: bound.max(sampled) },
        Extremum::Inf => GainBracket { lo: bound.min(sampled), hi: sampled },
    }
}

/// Extremum of ||M c|| / ||K c|| over deterministic pseudorandom directions
/// c; a witnessed (achieved) value, so it bounds the true extremum from the
/// achievable side. Draw counts escalate while the gap to the bound on the
/// other side stays wide; the count is a function of the data, so results
/// are reproducible.
#[allow(clippy::too_many_arguments)]
fn sampled_extremum(
    m: &ScaledMatrix,
    k: &ScaledMatrix,
    kind: NormKind,
    which: Extremum,
    r: usize,
    ambient: usize,
    other_side: LogMag,
) -> LogMag {
    let seed = DIRECTION_SEED ^ ((ambient as u64) << 32) ^ r as u64;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<LogMag> = None;
    let mut drawn = 0usize;
    for level in 0..4u32 {
        let total = 10 * 4usize.pow(level);
        while drawn < total {
            drawn += 1;
            let c = sphere_direction(&mut rng, r);
            let den = vector_norm(&k.matvec(&c), kind);
            if den.is_zero() {
                continue;
            }
            let num = vector_norm(&m.matvec(&c), kind);
            let ratio = LogMag::from_scaled(num).ratio(LogMag::from_scaled(den));
            best = Some(match (best, which) {
                (None, _) => ratio,
                (Some(b), Extremum::Sup) => b.max(ratio),
                (Some(b), Extremum::Inf) => b.min(ratio),
            });
        }
        let width = match best {
            None => f64::INFINITY,
            Some(b) if b == other_side => 0.0,
            Some(b) => match which {
                Extremum::Sup => (other_side.log2() - b.log2()).max(0.0),
                Extremum::Inf => (b.log2() - other_side.log2()).max(0.0),
            },
        };
        if width <= TARGET_WIDTH_LOG2 {
            break;
        }
    }
    best.unwrap_or(match which {
        Extremum::Sup => LogMag::ZERO_MAG,
        Extremum::Inf => LogMag::VACUOUS_INF,
    })
}

/// Standard normal coordinates via Box-Muller, normalized later only through
/// the ratio itself (gains are scale-invariant in c).
fn sphere_direction(rng: &mut rand_chacha::ChaCha8Rng, r: usize) -> Vec<ScaledF64> {
    let mut out = Vec::with_capacity(r);
    while out.len() < r {
        let u1 = uniform_open01(rng);
        let u2 = uniform_open01(rng);
        let rad = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        out.push(ScaledF64::from_f64(rad * c));
        if out.len() < r {
            out.push(ScaledF64::from_f64(rad * s));
        }
    }
    out
}

fn uniform_open01(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
    loop {
        let x = (rng.next_u64() >> 11) as f64 * 2f64.powi(-53);
        if x > 0.0 {
            return x;
        }
    }
}
