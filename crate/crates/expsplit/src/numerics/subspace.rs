//! Range and kernel bases of projector matrices.
//!
//! A projector P_n splits the state space into range(P_n) and Ker P_n =
//! range(I - P_n). Orthonormal bases for both come from the column SVD with
//! the relative rank cut; downstream code measures restricted gains, checks
//! whether evolution images stay inside a subspace, and builds coordinate
//! matrices of restricted maps on top of these bases.

use crate::numerics::matrix::{vector_norm, NormKind, ScaledMatrix};
use crate::numerics::scaled::ScaledF64;
use crate::numerics::svd::svd_columns;

/// A linear subspace carried as an orthonormal basis (ambient x dim).
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: ScaledMatrix,
}

impl Subspace {
    pub fn from_orthonormal(basis: ScaledMatrix) -> Self {
        Self { basis }
    }

    /// Column space of an arbitrary matrix.
    pub fn column_space(a: &ScaledMatrix, rank_tol: f64) -> Self {
        let svd = svd_columns(a);
        let r = svd.rank(rank_tol);
        Self { basis: svd.principal_columns(r) }
    }

    pub fn ambient(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &ScaledMatrix {
        &self.basis
    }

    /// Coordinates K^T v of the orthogonal projection of v onto the space.
    pub fn coords(&self, v: &[ScaledF64]) -> Vec<ScaledF64> {
        self.basis.transpose().matvec(v)
    }

    /// v - K K^T v: the component of v outside the subspace.
    pub fn residual(&self, v: &[ScaledF64]) -> Vec<ScaledF64> {
        let proj = self.basis.matvec(&self.coords(v));
        v.iter().zip(proj).map(|(&x, p)| x - p).collect()
    }

    /// Two-norm of the component of v outside the subspace.
    pub fn residual_norm(&self, v: &[ScaledF64]) -> ScaledF64 {
        vector_norm(&self.residual(v), NormKind::Two)
    }
}

/// Range and kernel of a projector.
#[derive(Clone, Debug)]
pub struct ProjectorSplit {
    pub range: Subspace,
    pub kernel: Subspace,
}

/// Extracts range(P) and Ker P = range(I - P) bases.
///
/// Assumes P is (numerically) a projector; the identity P^2 = P is checked
/// by validation elsewhere, not here.
pub fn split_projector(p: &ScaledMatrix, rank_tol: f64) -> ProjectorSplit {
    assert!(p.is_square(), "projector must be square");
    let complement = ScaledMatrix::identity(p.rows()).sub(p);
    ProjectorSplit {
        range: Subspace::column_space(p, rank_tol),
        kernel: Subspace::column_space(&complement, rank_tol),
    }
}
