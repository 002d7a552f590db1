//! Sparse signal recovery from few linear observations.
//!
//! The central solver alternates a sparsity-enforcing step (soft thresholding
//! of 1-level undecimated Haar coefficients) with a data-restoring step that
//! puts the observed measurements back, in the spirit of the Papoulis-Gerchberg
//! band-limited extrapolation iteration:
//!
//! ```text
//! f0 = K* g
//! h  = S(f_{n-1})
//! fn = h + K* (g - K h)
//! ```
//!
//! A thresholded Landweber (ISTA) baseline and a discrete Papoulis-Gerchberg
//! extrapolator are provided alongside, together with the observation
//! operators (random 1D sample selection, radial-line 2D Fourier sampling),
//! test signals, metrics and an experiment harness.
//!
//! ```
//! use pgist::operators::{make_random_pattern, LinearOperator, Selection1D};
//! use pgist::signals::gen_heavisine;
//! use pgist::solvers::{recover_pg_ist, SolverConfig};
//!
//! let truth = gen_heavisine(256).unwrap();
//! let op = Selection1D::new(make_random_pattern(256, 96, 1).unwrap());
//! let g = op.forward(&truth).unwrap();
//! let result = recover_pg_ist(&op, &g, &SolverConfig::default()).unwrap();
//! assert_eq!(result.estimate.len(), 256);
//! ```

pub mod cli;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod operators;
pub mod signals;
pub mod solvers;
pub mod thresholding;
pub mod transforms;

pub use error::{Error, Result};
pub use signals::{Field, Image2D, Signal1D};
