//! GH and GIG laws, their samplers, and sample containers.

pub mod gh;
pub mod gig;
pub mod sample;

pub use gh::GhParams;
pub use gig::GigParams;
pub use sample::{parse_values, SampleSet, SampleSource, SAMPLE_CHUNK};
