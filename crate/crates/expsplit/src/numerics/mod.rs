pub mod gain;
pub mod log2;
pub mod matrix;
pub mod scaled;
pub mod subspace;
pub mod svd;
