//! Joint graph alignment and gene-metabolite association prediction for
//! pairs of bipartite metabolic graphs.
//!
//! A metabolic graph connects metabolites and genes through directed
//! reaction roles (`left` for reactants, `right` for products). Two such
//! graphs from different organisms usually describe overlapping chemistry
//! under different identifiers, with diverging coverage. This crate
//! aligns the two graphs in a shared embedding space, prunes vertices
//! that have no counterpart on the other side, transfers association
//! triples across the discovered vertex equivalences, and trains link
//! prediction heads on the enriched triple pools.
//!
//! The main entry points:
//!
//! - [`graph`] — data model, TSV ingestion, validation, splitting, and
//!   negative sampling.
//! - [`features`] — precomputed per-vertex modality vectors and their
//!   fusion into initial embeddings.
//! - [`encoder`] — the GCN + highway + attention structure encoder and
//!   the margin-based alignment trainer.
//! - [`dangling`] — counterpart-free vertex detection and adjacency
//!   down-weighting.
//! - [`transfer`] — mutual-nearest-neighbor link inference and triple
//!   transfer across graphs.
//! - [`linkpred`] — translation / rotation / bilinear scoring heads
//!   with margin training and threshold selection.
//! - [`eval`] — corrupted-triple classification metrics and alignment
//!   hit rates.
//! - [`synth`] — paired synthetic benchmark instances with planted
//!   ground truth.
//! - [`pipeline`] — the full interactive loop behind the `metalign`
//!   binary.
//!
//! Every runnable capability has a corresponding example under
//! `examples/`; `cargo run --example pipeline` walks the whole loop on a
//! synthetic pair.

pub mod autodiff;
pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod dangling;
pub mod encoder;
pub mod eval;
pub mod features;
pub mod graph;
pub mod index;
pub mod linkpred;
pub mod optim;
pub mod pipeline;
pub mod rng;
pub mod synth;
pub mod transfer;

pub use config::RunConfig;
pub use graph::{
    DataSplit, Direction, GraphError, InterLink, MetabolicGraph, Provenance, Triple, VertexId,
    VertexKind,
};
