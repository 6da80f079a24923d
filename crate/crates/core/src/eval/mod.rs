//! Fidelity metrics: lambda-way KL divergence, Q-error over join workloads,
//! a conjunctive-query executor, and a seeded workload generator.

mod kld;
mod query;
mod report;
mod workload;

pub use kld::kld_lambda;
pub use query::{cardinality, qerror, qerror_from_counts, ConjunctiveQuery, PredOp, PredValue, Predicate};
pub use report::{batch_qerrors, summarize_qerrors, EvalMetadata, EvalReport, QErrorSummary};
pub use workload::{generate_workload, load_workload, save_workload};
