//! The four knowledge sources: RGB, depth and semantic feature vectors, and
//! the speaker position turned into a feature by harmonic encoding, adaptive
//! max pooling and a small MLP.

mod features;
pub mod position;
pub mod synth;

pub use features::{FeatureVec, Source, SpeakerPosition};
pub use position::{adaptive_max_pool, encode_position_raw, pool_bins, PositionMlp};
pub use synth::{synth_sample, toy_target, SyntheticSample};
