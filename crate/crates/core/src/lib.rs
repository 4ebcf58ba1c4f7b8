//! Return-spillover analysis for multi-asset panels.
//!
//! Prices are read and aligned ([`data`]), screened ([`diagnostics`]), and
//! modelled with a constant VAR ([`var`]) or a time-varying one filtered with
//! forgetting factors ([`tvp`]). Generalized forecast-error variance shares
//! drive the connectedness indices ([`connectedness`]) and the directed
//! network export ([`network`]). [`pipeline`] wires the stages behind the
//! `spillover` binary.

pub mod connectedness;
pub mod data;
pub mod diagnostics;
pub mod error;
pub mod format;
pub mod linalg;
pub mod network;
pub mod pipeline;
pub mod simulate;
pub mod tvp;
pub mod var;

pub use error::{Error, Result};
