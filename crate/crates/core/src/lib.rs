//! Neighborhood selection for finite-alphabet Markov random fields on `Z^d`.
//!
//! Given a single sample of a stationary field observed on a box, the
//! estimator scores every central-symmetric candidate neighborhood up to a
//! radius by a penalized maximum pseudo-likelihood criterion and returns the
//! minimizer. The crate also provides the counting machinery behind the
//! criterion (window-restricted block counts, projections, sieve partitions),
//! a seeded heat-bath Gibbs sampler for generating synthetic fields, an exact
//! joint-distribution oracle for tiny tori, and typicality diagnostics that
//! compare empirical conditional frequencies against a known model.
//!
//! Modules mirror the pipeline:
//!
//! * [`lattice`]: sites, boxes, neighborhoods, candidate enumeration.
//! * [`model`]: pair potentials, one-point specifications, exact tiny joints.
//! * [`sampler`]: samples and the Gibbs sampler.
//! * [`counts`]: block counting, projection, sieve partitions.
//! * [`pseudolikelihood`]: the criterion itself.
//! * [`estimator`]: candidate search, empirical specifications, diagnostics.
//! * [`cli`]: the `mrfpic` command-line front end and its file formats.
//! * [`oracle`]: brute-force reference implementations used by the test suite.

#![warn(missing_docs)]
#![forbid(unsafe_code)]

pub mod cli;
pub mod counts;
pub mod estimator;
pub mod lattice;
pub mod model;
pub mod oracle;
pub mod pseudolik;
pub mod sampler;
