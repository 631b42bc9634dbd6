//! Cost-constrained optimal recall-interval policies.
//!
//! Pipeline: fit a truncated Dirichlet-process-mixture model of visit
//! dynamics by Gibbs sampling, estimate policy value and cost by forward
//! simulation (g-computation), and search the unit sphere of risk-score
//! weights with a Gaussian-process surrogate under an average-cost
//! constraint.

pub mod bench;
pub mod calibrate;
pub mod design;
pub mod dynamics;
pub mod error;
pub mod gibbs;
pub mod gp;
pub mod linalg;
pub mod loess;
pub mod model;
pub mod optim;
pub mod policy;
pub mod search;
pub mod seeds;
pub mod stats;
pub mod trajectory;
pub mod value;

pub use design::{CovariateLayout, DeltaTransform, ModelMode};
pub use dynamics::{ActionSampler, ConstantAction, LogisticBehavior, ModelSource, PreparedModel, PreparedSource};
pub use error::{Error, Result};
pub use model::{Atom, MixtureModel, PosteriorChain};
pub use policy::{Feature, FeatureSpec, HistoryTail, Policy};
pub use trajectory::{Trajectory, VisitRecord};
pub use value::{UtilityKind, UtilitySpec, ValueEstimate};
