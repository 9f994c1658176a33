//! Citation classification, reference ranking and signed influence
//! propagation over citation graphs.
//!
//! A citing paper is parsed into sentences, references and citation
//! mentions ([`document`]). Each mention gets a context window
//! ([`context`]) and a sentiment label ([`sentiment`]). Per-reference
//! factors are classified into contribution classes ([`classifier`]) and
//! ranked with LambdaMART ([`ranker`]). Class and rank together give a local
//! influence in `[-1, 1]`, and [`influence`] propagates these over the
//! corpus graph to paper and author influence factors. [`span`] labels the
//! words a marker covers. [`store`] and [`cli`] persist all of it.
//!
//! ```
//! use citation_influence::influence::{propagate, InfluenceGraph, PropagationParams};
//!
//! let mut g = InfluenceGraph::new();
//! g.add_paper("a", &[("alice".into(), 0.5), ("bob".into(), 0.5)]).unwrap();
//! g.add_paper("b", &[]).unwrap();
//! g.add_edge("b", "a", 0.5).unwrap();
//! let af = propagate(&g, &PropagationParams::default()).unwrap();
//! assert!((af.score_of(&g, "a").unwrap() - 1.425).abs() < 1e-12);
//! ```

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod classifier;
pub mod cli;
pub mod context;
pub mod document;
pub mod error;
pub mod influence;
pub mod pipeline;
pub mod ranker;
pub mod sentiment;
pub mod span;
pub mod store;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
