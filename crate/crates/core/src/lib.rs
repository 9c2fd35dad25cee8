//! Simulation and verification toolkit for trajectory-length growth through
//! random sparse deep ReLU networks.
//!
//! The crate samples networks whose weights follow sparse-Gaussian,
//! sparse-uniform, or sparse-discrete laws, measures how the arc length of
//! an input trajectory grows layer by layer, computes the matching
//! closed-form lower bounds on that growth, and checks every supporting
//! probabilistic fact with independent enumeration or Monte Carlo oracles.
//!
//! Modules:
//! - [`distributions`]: weight/bias laws, reproducible sampling, and the
//!   analytic constants (`M`, Marcinkiewicz–Zygmund) behind the bounds.
//! - [`network`]: realized sparse ReLU networks and forward traces.
//! - [`trajectory`]: polylines, arc construction, arc length, and growth
//!   measurement; plus the IDX dataset parser in [`trajectory::idx`].
//! - [`bounds`]: the per-layer lower-bound bases and their product form.
//! - [`verify`]: independent oracle checks of the supporting inequalities.
//! - [`harness`]: experiment sweeps, CSV/SVG output, figure presets.

pub mod bounds;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod network;
pub mod rng;
pub mod stats;
pub mod trajectory;
pub mod verify;

pub use error::{Error, IdxError, Result};
pub use rng::StreamRng;
