pub mod bench;
pub mod config;
pub mod featurizer;
pub mod frontend;
pub mod index;
pub mod search;
pub mod synth;
pub mod rerank;
pub mod recommend;
