//! Multi-label random ferns for frame-level instrument recognition.
//!
//! The crate is organized as a pipeline:
//!
//! - [`audio`]: WAV input, 40 ms framing and the 91-value feature vector.
//! - [`synth`]: training mixes built from isolated instrument recordings.
//! - [`ferns`]: multi-label ferns, the binary-relevance battery baseline,
//!   and the binary model format.
//! - [`eval`]: RMS-weighted precision, recall and F-score.
//! - [`bench`]: model size and real-time factor measurement.
//! - [`csvio`]: CSV formats shared by the command-line tool.
//!
//! ```no_run
//! use mlferns::ferns::{train_multilabel, TrainParams};
//! # fn demo(set: &mlferns::ferns::TrainingSet, x: &[f64]) -> mlferns::Result<()> {
//! let model = train_multilabel(set, TrainParams::new(1000, 10, 42))?;
//! let present = model.predict_multilabel(x)?;
//! println!("{:?}", present.names(model.classes()));
//! # Ok(())
//! # }
//! ```

pub mod audio;
pub mod bench;
pub mod csvio;
pub mod error;
pub mod eval;
pub mod ferns;
pub mod rng;
pub mod synth;

pub use error::{Error, Result};
