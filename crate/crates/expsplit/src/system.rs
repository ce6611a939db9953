//! Nonautonomous linear systems and their evolution operators.
//!
//! A system is the sequence of step matrices A_n in x_{n+1} = A_n x_n. The
//! evolution operator over a pair m >= n is the ordered product
//! A(m, n) = A_{m-1} ... A_n, with A(n, n) = I, satisfying the cocycle
//! law A(m, p) = A(m, n) A(n, p) for m >= n >= p. Window analyses touch
//! every pair, so products are cached by the left-extension recurrence
//! A(m, n) = A_{m-1} A(m - 1, n), which fixes the association order and
//! keeps results reproducible bit for bit.

use crate::numerics::matrix::ScaledMatrix;
use crate::numerics::svd::operator_norm;
use crate::numerics::{log2::LogMag, matrix::NormKind};

type StepRule = std::sync::Arc<dyn Fn(i64) -> ScaledMatrix + Send + Sync>;

/// A discrete-time system given by its step matrices.
#[derive(Clone)]
pub struct SystemDef {
    name: String,
    dim: usize,
    rule: StepRule,
}

impl SystemDef {
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        rule: impl Fn(i64) -> ScaledMatrix + Send + Sync + 'static,
    ) -> Self {
        Self { name: name.into(), dim, rule: std::sync::Arc::new(rule) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The step matrix A_n.
    pub fn step(&self, n: i64) -> ScaledMatrix {
        let a = (self.rule)(n);
        assert_eq!(
            (a.rows(), a.cols()),
            (self.dim, self.dim),
            "step matrix shape differs from the declared dimension"
        );
        a
    }

    /// A(m, n) as a fresh ordered product, without touching any cache.
    pub fn product_direct(&self, m: i64, n: i64) -> ScaledMatrix {
        assert!(m >= n && n >= 0, "evolution needs m >= n >= 0");
        let mut acc = ScaledMatrix::identity(self.dim);
        for k in n..m {
            acc = self.step(k).matmul(&acc);
        }
        acc
    }
}

impl std::fmt::Debug for SystemDef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SystemDef").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

/// All evolution operators of a window, stored triangularly.
pub struct EvolutionCache {
    window: i64,
    table: Vec<ScaledMatrix>,
}

impl EvolutionCache {
    /// Precomputes A(m, n) for every 0 <= n <= m <= window.
    pub fn build(sys: &SystemDef, window: i64) -> Self {
        assert!(window >= 0, "window must be nonnegative");
        let count = ((window + 1) * (window + 2) / 2) as usize;
        let mut table = Vec::with_capacity(count);
        for m in 0..=window {
            for n in 0..=m {
                let entry = if m == n {
                    ScaledMatrix::identity(sys.dim)
                } else {
                    // A(m, n) = A_{m-1} A(m-1, n); the previous row is
                    // already in the table.
                    let prev = &table[Self::index(m - 1, n)];
                    sys.step(m - 1).matmul(prev)
                };
                table.push(entry);
            }
        }
        Self { window, table }
    }

    fn index(m: i64, n: i64) -> usize {
        (m * (m + 1) / 2 + n) as usize
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn evolution(&self, m: i64, n: i64) -> &ScaledMatrix {
        assert!(0 <= n && n <= m && m <= self.window, "pair ({m}, {n}) outside the window");
        &self.table[Self::index(m, n)]
    }

    /// Relative cocycle defect ||A(m,p) - A(m,n) A(n,p)|| / ||A(m,p)|| in
    /// the given norm; zero numerator reports as zero magnitude even when
    /// the denominator vanishes.
    pub fn cocycle_residual(&self, m: i64, n: i64, p: i64, kind: NormKind) -> LogMag {
        assert!(m >= n && n >= p, "cocycle needs m >= n >= p");
        let direct = self.evolution(m, p);
        let split = self.evolution(m, n).matmul(self.evolution(n, p));
        let diff = direct.sub(&split);
        if diff.is_zero() {
            return LogMag::ZERO_MAG;
        }
        let num = LogMag::from_scaled(operator_norm(&diff, kind));
        let den = LogMag::from_scaled(operator_norm(direct, kind));
        num.ratio(den)
    }
}
