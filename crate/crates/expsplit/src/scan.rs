//! Deterministic scans over index pairs and triples of a window.
//!
//! Every windowed quantity is evaluated over the pair set
//! {(m, n): 0 <= n <= m <= W}, always in ascending m then ascending n; the
//! first reported witness of any scan is defined by that order. The pair
//! map has a data-parallel lane and a sequential lane producing identical
//! results in identical order, so reports are byte-stable either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Pairs (m, n) with 0 <= n <= m <= window, ascending in m, then in n.
pub fn pairs(window: i64) -> Vec<(i64, i64)> {
    assert!(window >= 0, "window must be nonnegative");
    let mut out = Vec::with_capacity(((window + 1) * (window + 2) / 2) as usize);
    for m in 0..=window {
        for n in 0..=m {
            out.push((m, n));
        }
    }
    out
}

/// Triples (m, n, p) with 0 <= p <= n <= m <= window, ascending
/// lexicographically in (m, n, p).
pub fn triples(window: i64) -> Vec<(i64, i64, i64)> {
    assert!(window >= 0, "window must be nonnegative");
    let mut out = Vec::new();
    for m in 0..=window {
        for n in 0..=m {
            for p in 0..=n {
                out.push((m, n, p));
            }
        }
    }
    out
}

/// Maps f over the window pairs, in parallel when built with the `parallel`
/// feature; output order matches `pairs(window)` either way.
pub fn map_pairs<T: Send>(window: i64, f: impl Fn((i64, i64)) -> T + Sync) -> Vec<T> {
    let ps = pairs(window);
    #[cfg(feature = "parallel")]
    {
        ps.par_iter().map(|&p| f(p)).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        ps.iter().map(|&p| f(p)).collect()
    }
}

/// Sequential lane with the same contract as `map_pairs`, kept available in
/// every build for comparison benchmarks.
pub fn map_pairs_seq<T>(window: i64, mut f: impl FnMut((i64, i64)) -> T) -> Vec<T> {
    pairs(window).into_iter().map(&mut f).collect()
}
