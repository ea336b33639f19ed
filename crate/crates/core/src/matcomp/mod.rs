//! Low-rank matrix completion: the SVT solver, incoherence diagnostics and
//! the classical sample-count and noisy-recovery bounds.

mod bounds;
mod coherence;
mod svt;

pub use bounds::{
    noise_radius, recovery_error_bound, relative_error, samples_per_df, theorem1_bound, SampleBound,
};
pub use coherence::{
    coherence_of_subspace, matrix_coherence, matrix_coherence_at_rank, CoherenceReport,
};
pub use svt::{singular_value_shrink, svt_complete, CompletionResult, SvtParams};
