//! Mutual angular regularization (MAR) for feed-forward networks.
//!
//! - [`diversity`]: pairwise non-obtuse angles, the MAR score and its gradient,
//!   and the Chebyshev lower bound on the pairwise angle.
//! - [`network`]: bias-free feed-forward networks, four losses, backprop, and
//!   minibatch SGD on the MAR-penalized objective.
//! - [`bounds`]: closed-form estimation and approximation error bounds and the
//!   trade-off between them in the diversity angle `θ`.
//! - [`geometry`]: numerical checks of the geometric facts the bounds rest on.
//! - [`datagen`]: seeded synthetic regression and long-tail classification data.

pub mod bounds;
pub mod datagen;
pub mod dataset;
pub mod diversity;
pub mod error;
pub mod geometry;
pub mod matrix;
pub mod network;

pub use bounds::{ApproxBoundInputs, BoundReport, LayerBound, MultiLayerBoundInputs, SingleLayerBoundInputs};
pub use datagen::{BarronTarget, MixtureSpec};
pub use dataset::Dataset;
pub use diversity::{ChebyshevQuery, DiversityStats, MarConfig};
pub use error::{Error, Result};
pub use geometry::{FullAngle, SeparatedFamily2D};
pub use matrix::ComponentMatrix;
pub use network::{Activation, ActivationKind, LossKind, Network, Penalty, TrainConfig};
