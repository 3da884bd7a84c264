//! Co-specialization analysis of country–industry employment panels.
//!
//! The pipeline runs from a raw employment panel through Balassa RCA
//! networks ([`rca`]), co-specialization motif counts ([`motifs`]) and their
//! significance under the Bipartite Configuration Model ([`bicm`]), to
//! fixed-effect panel regressions of productivity on lagged motif z-scores
//! ([`panel`]). [`pipeline`] wires the stages together for the command line.

pub mod bicm;
pub mod error;
pub mod ingest;
pub mod motifs;
pub mod panel;
pub mod pipeline;
pub mod rca;

pub use error::{Error, Result};
