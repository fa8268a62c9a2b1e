//! Sparse regression, matrix completion and image demixing pipelines.

pub mod demix;
pub mod lasso;
pub mod matcomp;
mod reduced;

pub use demix::{gen_demix_instance, run_mca_demix, Component, DemixInstance, DemixMetrics, DemixResult};
pub use lasso::{gen_lasso_instance, LassoInstance};
pub use matcomp::{
    bench_csv, estimate_rank_90, estimate_rank_90_matrix, gen_matcomp_instance, matcomp_dual,
    matcomp_primal, run_matcomp_benchmark, BenchRow, MatCompInstance,
};
