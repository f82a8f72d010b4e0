//! Synthetic labelled corpora and frame-level evaluation.

mod eval;
mod synth;

pub use eval::{
    evaluate, evaluate_events, evaluate_sharded, EvalCounts, EventReport, EventRow,
    LabelledStream,
};
pub use synth::{hand_template, synth_corpus, SynthSpec};
