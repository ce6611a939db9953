//! Dense two-phase simplex for the small linear programs the fit stage
//! produces.
//!
//! Minimizes c . x subject to a_i . x <= b_i and x >= 0. Bland's rule
//! picks both the entering and the leaving variable, so the pivot
//! sequence is deterministic and cannot cycle. Callers keep programs
//! small (a handful of structural variables, rows added on demand), so
//! a full tableau is the simplest correct choice.

/// Entries smaller than this never serve as pivots.
pub const PIVOT_EPS: f64 = 1e-9;

/// Phase-1 objective values above this mean no feasible point.
const FEAS_EPS: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

/// Minimizes `c . x` over `x >= 0` subject to `row . x <= rhs` for each
/// `(row, rhs)` in `rows`. Every row must have `c.len()` coefficients.
pub fn solve_lp(c: &[f64], rows: &[(Vec<f64>, f64)]) -> LpOutcome {
    let nvar = c.len();
    let m = rows.len();
    // Columns: nvar originals, m slacks, then one artificial per row
    // whose rhs had to be negated.
    let flipped: Vec<bool> = rows.iter().map(|(_, b)| *b < 0.0).collect();
    let nart = flipped.iter().filter(|f| **f).count();
    let ncols = nvar + m + nart;

    let mut a = vec![vec![0.0; ncols]; m];
    let mut b = vec![0.0; m];
    let mut basis = vec![0usize; m];
    let mut art = 0usize;
    for (i, (coef, rhs)) in rows.iter().enumerate() {
        assert_eq!(coef.len(), nvar, "row {} has wrong arity", i);
        let s = if flipped[i] { -1.0 } else { 1.0 };
        for j in 0..nvar {
            a[i][j] = s * coef[j];
        }
        a[i][nvar + i] = s;
        b[i] = s * rhs;
        if flipped[i] {
            let col = nvar + m + art;
            a[i][col] = 1.0;
            basis[i] = col;
            art += 1;
        } else {
            basis[i] = nvar + i;
        }
    }

    if nart > 0 {
        // Phase 1: minimize the sum of artificials. Their reduced costs
        // start as minus the sum of the rows they are basic in.
        let mut obj = vec![0.0; ncols];
        for k in 0..nart {
            obj[nvar + m + k] = 1.0;
        }
        for i in 0..m {
            if basis[i] >= nvar + m {
                for j in 0..ncols {
                    obj[j] -= a[i][j];
                }
            }
        }
        if !run(&mut a, &mut b, &mut obj, &mut basis, ncols) {
            unreachable!("phase 1 is bounded below by zero");
        }
        let infeas: f64 =
            (0..m).filter(|&i| basis[i] >= nvar + m).map(|i| b[i]).sum();
        if infeas > FEAS_EPS {
            return LpOutcome::Infeasible;
        }
        // Pivot leftover artificials out; a row with no real entry left
        // is a dependency among the others, kept but hard-zeroed so it
        // can never reactivate.
        for i in 0..m {
            if basis[i] < nvar + m {
                continue;
            }
            match (0..nvar + m).find(|&j| a[i][j].abs() > PIVOT_EPS) {
                Some(j) => pivot(&mut a, &mut b, None, &mut basis, i, j),
                None => {
                    for v in a[i][..nvar + m].iter_mut() {
                        *v = 0.0;
                    }
                    b[i] = 0.0;
                }
            }
        }
    }

    // Phase 2 over the real columns only.
    let mut obj = vec![0.0; ncols];
    obj[..nvar].copy_from_slice(c);
    for i in 0..m {
        let f = obj[basis[i]];
        if f != 0.0 {
            for j in 0..ncols {
                obj[j] -= f * a[i][j];
            }
            obj[basis[i]] = 0.0;
        }
    }
    if !run(&mut a, &mut b, &mut obj, &mut basis, nvar + m) {
        return LpOutcome::Unbounded;
    }

    let mut x = vec![0.0; nvar];
    for i in 0..m {
        if basis[i] < nvar {
            x[basis[i]] = b[i];
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

/// Runs simplex iterations until optimal (true) or unbounded (false).
/// Columns at `limit` and beyond never enter.
fn run(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    obj: &mut [f64],
    basis: &mut [usize],
    limit: usize,
) -> bool {
    let cap = 10_000 + 200 * (a.len() + obj.len());
    for _ in 0..cap {
        // Bland: smallest admissible column with negative reduced cost.
        let Some(jc) = (0..limit).find(|&j| obj[j] < -PIVOT_EPS) else {
            return true;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..a.len() {
            if a[i][jc] > PIVOT_EPS {
                let ratio = b[i] / a[i][jc];
                let better = match leave {
                    None => true,
                    Some((r, best)) => {
                        ratio < best - PIVOT_EPS
                            || (ratio < best + PIVOT_EPS && basis[i] < basis[r])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((r, _)) = leave else {
            return false;
        };
        pivot(a, b, Some(&mut *obj), basis, r, jc);
    }
    panic!("simplex iteration cap exceeded");
}

fn pivot(
    a: &mut [Vec<f64>],
    b: &mut [f64],
    obj: Option<&mut [f64]>,
    basis: &mut [usize],
    r: usize,
    jc: usize,
) {
    let inv = 1.0 / a[r][jc];
    for v in a[r].iter_mut() {
        *v *= inv;
    }
    a[r][jc] = 1.0;
    b[r] *= inv;
    for i in 0..a.len() {
        if i == r {
            continue;
        }
        let f = a[i][jc];
        if f != 0.0 {
            for j in 0..a[r].len() {
                let d = f * a[r][j];
                a[i][j] -= d;
            }
            a[i][jc] = 0.0;
            b[i] -= f * b[r];
            if b[i] < 0.0 && b[i] > -1e-12 {
                b[i] = 0.0;
            }
        }
    }
    if let Some(o) = obj {
        let f = o[jc];
        if f != 0.0 {
            for j in 0..a[r].len() {
                o[j] -= f * a[r][j];
            }
            o[jc] = 0.0;
        }
    }
    basis[r] = jc;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_core::{RngCore, SeedableRng};

    fn optimal(out: LpOutcome) -> (Vec<f64>, f64) {
        match out {
            LpOutcome::Optimal { x, value } => (x, value),
            other => panic!("expected optimal, got {:?}", other),
        }
    }

    #[test]
    fn simplex_pins() {
        let (x, v) =
            optimal(solve_lp(&[-1.0, -1.0], &[(vec![1.0, 1.0], 1.0)]));
        assert!((v + 1.0).abs() < 1e-9);
        assert!((x[0] + x[1] - 1.0).abs() < 1e-9);

        assert_eq!(solve_lp(&[1.0], &[(vec![1.0], -1.0)]), LpOutcome::Infeasible);
        assert_eq!(solve_lp(&[-1.0], &[]), LpOutcome::Unbounded);
        assert_eq!(solve_lp(&[-1.0], &[(vec![0.0], 1.0)]), LpOutcome::Unbounded);

        // Lower bound through a negated row: min x1 with x1 >= 3.
        let (x, v) = optimal(solve_lp(&[1.0], &[(vec![-1.0], -3.0)]));
        assert!((v - 3.0).abs() < 1e-9 && (x[0] - 3.0).abs() < 1e-9);

        // No rows, nonnegative cost: the origin.
        let (x, v) = optimal(solve_lp(&[2.0, 0.0], &[]));
        assert_eq!((x, v), (vec![0.0, 0.0], 0.0));
    }

    #[test]
    fn equality_pair_rows() {
        // x1 = 2 via two opposite rows, minimize -x1 + x2.
        let rows = vec![(vec![1.0, 0.0], 2.0), (vec![-1.0, 0.0], -2.0)];
        let (x, v) = optimal(solve_lp(&[-1.0, 1.0], &rows));
        assert!((x[0] - 2.0).abs() < 1e-9);
        assert!((v + 2.0).abs() < 1e-9);
    }

    fn det3(a: &[[f64; 3]; 3]) -> f64 {
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    fn solve3(a: &[[f64; 3]; 3], b: &[f64; 3]) -> Option<[f64; 3]> {
        let d = det3(a);
        if d.abs() < 1e-6 {
            return None;
        }
        let mut x = [0.0; 3];
        for j in 0..3 {
            let mut aj = *a;
            for i in 0..3 {
                aj[i][j] = b[i];
            }
            x[j] = det3(&aj) / d;
        }
        Some(x)
    }

    /// Every vertex of {x >= 0, Ax <= b} lies on three of the bounding
    /// hyperplanes; enumerating all triples gives an exact optimum to
    /// compare against whenever the program is bounded.
    #[test]
    fn random_programs_agree_with_vertex_enumeration() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5ca1ab1e);
        let mut unit = move || {
            let mut r = rng.next_u64() as f64 / u64::MAX as f64;
            r = 4.0 * r - 2.0;
            (r * 64.0).round() / 64.0
        };
        let mut optimal_seen = 0;
        let mut infeasible_seen = 0;
        for _ in 0..200 {
            let nrows = 3 + (unit().abs() * 2.0) as usize;
            let c: Vec<f64> = (0..3).map(|_| unit()).collect();
            let rows: Vec<(Vec<f64>, f64)> =
                (0..nrows).map(|_| ((0..3).map(|_| unit()).collect(), unit())).collect();

            // Hyperplanes: the rows, then the coordinate planes.
            let mut planes: Vec<([f64; 3], f64)> = rows
                .iter()
                .map(|(r, b)| ([r[0], r[1], r[2]], *b))
                .collect();
            for j in 0..3 {
                let mut e = [0.0; 3];
                e[j] = 1.0;
                planes.push((e, 0.0));
            }
            let feasible = |x: &[f64; 3]| {
                x.iter().all(|v| *v >= -1e-7)
                    && rows.iter().all(|(r, b)| {
                        r.iter().zip(x).map(|(ri, xi)| ri * xi).sum::<f64>()
                            <= b + 1e-7
                    })
            };
            let mut best: Option<f64> = None;
            let np = planes.len();
            for i in 0..np {
                for j in i + 1..np {
                    for k in j + 1..np {
                        let a = [planes[i].0, planes[j].0, planes[k].0];
                        let b = [planes[i].1, planes[j].1, planes[k].1];
                        let Some(x) = solve3(&a, &b) else { continue };
                        if feasible(&x) {
                            let v = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
                            best = Some(best.map_or(v, |b: f64| b.min(v)));
                        }
                    }
                }
            }

            match solve_lp(&c, &rows) {
                LpOutcome::Optimal { x, value } => {
                    optimal_seen += 1;
                    let xa = [x[0], x[1], x[2]];
                    assert!(feasible(&xa), "returned point violates a row");
                    let direct: f64 =
                        c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
                    assert!((direct - value).abs() < 1e-7);
                    let best = best.expect("optimal but no feasible vertex");
                    assert!(
                        (value - best).abs() < 1e-5,
                        "value {} vs vertex optimum {}",
                        value,
                        best
                    );
                }
                LpOutcome::Infeasible => {
                    infeasible_seen += 1;
                    assert!(best.is_none(), "claimed infeasible but a vertex is feasible");
                }
                LpOutcome::Unbounded => {
                    // Cross-check: box the variables and the optimum must
                    // run to the box.
                    let mut boxed = rows.clone();
                    for j in 0..3 {
                        let mut e = vec![0.0; 3];
                        e[j] = 1.0;
                        boxed.push((e, 1e6));
                    }
                    let (x, _) = optimal(solve_lp(&c, &boxed));
                    assert!(
                        x.iter().any(|v| *v > 1e5),
                        "unbounded but boxed optimum stays interior: {:?}",
                        x
                    );
                }
            }
        }
        assert!(optimal_seen > 30, "only {} optimal cases", optimal_seen);
        assert!(infeasible_seen > 5, "only {} infeasible cases", infeasible_seen);
    }
}
