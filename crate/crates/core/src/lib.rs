//! Dimension reduction for classification and regression built on one
//! generalized eigenproblem `M v = λ N v`, with the resulting directions
//! reordered by how well each one separates the response rather than by
//! eigenvalue.
//!
//! The pieces:
//!
//! - [`linalg`]: dense matrices, Cholesky, symmetric and generalized
//!   eigensolvers.
//! - [`data`]: labelled datasets, CSV I/O, slicing and per-group moments.
//! - [`kernels`]: the `(M, N)` pairs for PCA, SIR, SAVE, SIR-II, DR and SSDR.
//! - [`ordering`]: eigenvalue, T and F scores, ranks, and their population
//!   counterparts.
//! - [`discriminant`]: LDA/QDA, error rates and the univariate Bayes error.
//! - [`metrics`]: subspace distance.
//! - [`simgen`]: seeded random streams and the simulated configurations.
//! - [`experiment`]: replicated studies, summaries, output files and the CSV
//!   workflow.
//!
//! ```
//! use sdr_order::data::group_moments;
//! use sdr_order::kernels::{build_kernel, KernelSpec, Method};
//! use sdr_order::ordering::score_t_matrix;
//! use sdr_order::simgen::{illustrative_spec, RngStream};
//!
//! let spec = illustrative_spec(5.0, 2.0).unwrap();
//! let data = spec.sample_classes(&[300, 300], &mut RngStream::new(1, 0)).unwrap();
//! let groups = data.groups().unwrap();
//! let basis = build_kernel(&KernelSpec::new(Method::Pca), &group_moments(&data, &groups).unwrap())
//!     .unwrap()
//!     .solve()
//!     .unwrap();
//! let t = score_t_matrix(basis.vectors(), data.x(), &groups).unwrap();
//! // The smallest-variance direction carries the mean shift.
//! assert_eq!(t.ranks[2], 1);
//! ```

pub mod data;
pub mod discriminant;
pub mod error;
pub mod experiment;
pub mod kernels;
pub mod linalg;
pub mod metrics;
pub mod ordering;
pub mod simgen;

pub use error::{Error, Result};
