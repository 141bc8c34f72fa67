//! Recognition of hand states from wrist-mounted camera streams.
//!
//! The crate is `no_std` (it needs `alloc`) and carries the whole algorithmic
//! pipeline; file access, the CLI and the pipeline runner live in the `handcam`
//! companion crate.
//!
//! - [`media`]: 8-bit images, binary PPM codec, flip / gray / bilinear resize
//! - [`alignment`]: per-pixel Laplace statistics, stable masks, multiscale ZNCC
//! - [`features`]: feature-file codec, color histograms, stream fusion
//! - [`classify`]: one-vs-rest linear hinge-loss models and cross-validation
//! - [`change`]: change features, change labels, non-maximum suppression
//! - [`inference`]: exact pairwise decoding over change-candidate segments
//! - [`discovery`]: active segments, average-linkage clustering, modified purity
//! - [`eval`]: per-frame accuracy and confusion matrices
//! - [`synth`]: seeded synthetic streams and frame sets

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod alignment;
pub mod change;
pub mod classify;
pub mod discovery;
mod error;
pub mod eval;
pub mod features;
pub mod inference;
mod labels;
pub mod media;
mod similarity;
mod stream;
pub mod synth;

pub use error::{Error, Result};
pub use labels::{LabelSpace, StateSequence, Task};
pub use similarity::cosine_similarity;
pub use stream::{Camera, FeatureStream, FrameFeature, StreamMeta, DEFAULT_FPS};
