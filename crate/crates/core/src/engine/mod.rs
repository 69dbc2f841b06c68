//! The bias-corrected statistic, its dependence correction and its null
//! variance estimate, all evaluated from a [`GramSummary`](crate::gram::GramSummary).

mod contrast;
mod design;
mod statistic;
mod trace;
mod variance;

pub use contrast::{b_aggregate, b_matrix, ContrastMatrix};
pub use design::{f_vector, f_vector_sum, BoundaryWeights, DependenceDesign};
pub use statistic::{l_trace, v_vector, LagTraceVector};
pub(crate) use statistic::l_trace_with as statistic_trace;
pub use trace::{
    build_trace_table, build_trace_table_with, trace_product_estimate, SeparationRule, TraceEstimator,
    TraceTable,
};
pub use variance::{variance_coefficients, variance_estimate, VarianceEstimate};
