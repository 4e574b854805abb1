//! Construction and evaluation toolkit for spatially aligned audio-video
//! data: first-order Ambisonics rotation and stereo downmix,
//! equirectangular-to-perspective projection, a clip curation pipeline,
//! and evaluation metrics (Fréchet distance over embeddings, Spatial
//! AV-Align, localization scores).
//!
//! Everything in this crate is a pure function over immutable inputs and
//! safe to call concurrently. File formats and orchestration live in the
//! companion CLI crate.

pub mod ambisonics;
pub mod dsp;
pub mod error;
pub mod geometry;
pub mod metrics;
pub mod pipeline;
pub mod raster;

pub use error::{Error, Result};
