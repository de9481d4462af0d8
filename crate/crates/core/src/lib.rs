//! Planning toolkit for QKD networks built from multi-protocol collaborative
//! (MPC) networking cells.
//!
//! The crate is organized around the pipeline used by the experiment harness:
//!
//! * [`netmodel`] — optical-network graphs, CSC-edge enumeration and random
//!   instance generation,
//! * [`keyrate`] — per-link key-generation-rate models (BB84, MDI, TF) and the
//!   MPC-cell bandwidth combination,
//! * [`formulation`] — translation of an instance into the max-min-fairness
//!   mixed-integer program for a given networking-cell variant,
//! * [`solver`] — built-in revised-simplex LP core with branch-and-bound and a
//!   rounding heuristic, plus an independent solution verifier,
//! * [`relaysim`] — the seven-step layered-encryption relay cell over
//!   simulated key pools, with an exposure audit,
//! * [`experiment`] — the comparative Group 1 / Group 2 harness emitting CSV
//!   reports.

pub mod experiment;
pub mod formulation;
pub mod keyrate;
pub mod lp_format;
pub mod netmodel;
pub mod relaysim;
pub mod solver;

/// Map `f` over `items`, in parallel when the `parallel` feature is enabled.
///
/// Order of the returned vector always matches the input order.
pub(crate) fn map_maybe_parallel<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}
