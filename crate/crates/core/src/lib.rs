//! Numerical laboratory for scale-indexed monotonicity functionals of
//! semilinear elliptic and parabolic systems.
//!
//! The crate evaluates boundary-adjusted energies `Phi(r)` over balls and
//! their Gaussian-weighted parabolic counterparts `Psi(r)` over space-time
//! layers, assembles their derivative decompositions from closed forms,
//! verifies the exact integral identities (Pohozaev, integration by parts,
//! the layer identity) on discrete solutions, scans scaling indices `beta`
//! for admissibility, and runs blow-up rescaling studies with homogeneity
//! degree estimation.
//!
//! Layout:
//! - [`geometry`]: grids, sphere/ball/layer quadrature, the backward heat
//!   kernel, the smooth cutoff and the `E(r)` envelope integral;
//! - [`models`]: the nonlinearity catalog `(F, f)` with admissibility scans;
//! - [`field`]: discrete fields, samplers and the on-disk field format;
//! - [`solvers`]: manufactured/exact fixtures, the elliptic relaxation
//!   solver, the theta-scheme time stepper and the coincidence indicator;
//! - [`elliptic`], [`parabolic`], [`blowup`]: the functional evaluations;
//! - [`config`], [`runner`], [`selftest`]: batch front door plumbing.

pub mod blowup;
pub mod config;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod geometry;
pub mod models;
pub mod parabolic;
pub mod report;
pub mod runner;
pub mod selftest;
pub mod solvers;

pub use error::{Error, Result};

use std::sync::Once;

static THREAD_INIT: Once = Once::new();

/// Initializes the global worker pool, honoring the `MONOTONE_THREADS`
/// environment variable as an upper bound on the number of workers.
/// Safe to call more than once; only the first call has an effect.
pub fn init_threads() {
    THREAD_INIT.call_once(|| {
        if let Ok(v) = std::env::var("MONOTONE_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    let _ = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build_global();
                }
            }
        }
    });
}
