//! Transfer-credit assessment from learning outcomes.
//!
//! Three passes score receiving-course outcomes (rows) against
//! sending-course outcomes (columns):
//!
//! 1. [`bloom`]: Bloom's level per outcome from its verbs, placed in a
//!    WordNet verb taxonomy ([`wordnet`], [`measures`]).
//! 2. [`semantic`]: cosine similarity of sentence embeddings
//!    ([`embedding`]).
//! 3. [`aggregation`]: weighted combination and thresholds.
//!
//! [`pipeline::Assessor`] runs all three.

pub mod aggregation;
pub mod bloom;
pub mod canonical;
pub mod course;
pub mod embedding;
pub mod grid;
pub mod measures;
pub mod pipeline;
pub mod semantic;
pub mod simverb;
pub mod wordnet;
pub mod wordvec;
