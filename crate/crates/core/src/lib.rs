//! Response-time analysis for parallel real-time tasks modeled as DAGs.
//!
//! A DAG task is reduced to `<C, (L_0, ..., L_k)>`: its total work and the
//! lengths of disjoint generalized paths peeled off greedily through residue
//! graphs ([`decompose`]). From that model [`bounds`] computes Graham's
//! bound, the tighter multi-path bound, and the federated core allocations
//! derived from each. [`sim`] and [`oracle`] check the bounds against
//! simulated and exhaustively enumerated work-conserving schedules, while
//! [`taskgen`], [`federated`] and [`experiment`] run randomized comparisons.
//!
//! ```
//! use dagbound::{bounds, decompose, dag::example_dag};
//!
//! let dag = example_dag();
//! let model = decompose::model_of(&dag);
//! assert_eq!(model.lengths(), &[6, 3, 1]);
//! assert_eq!(bounds::graham_bound(10, 6, 2).unwrap(), 8.into());
//! assert_eq!(bounds::multipath_bound(&model, 2).unwrap(), 7.into());
//! ```

pub mod bounds;
pub mod dag;
pub mod decompose;
pub mod error;
pub mod experiment;
pub mod federated;
pub mod oracle;
pub mod sim;
pub mod taskgen;

pub use bounds::Rational;
pub use dag::{Dag, DagSpec, VertexId, Work};
pub use decompose::{decompose, model_of, MultiPathModel, PathList};
pub use error::{Error, Result};
pub use federated::{Method, SchedResult, Task, TaskSet};
pub use sim::{ExecutionSequence, ExecutionTimes, Policy};
pub use taskgen::GenParams;
