//! One-class driver identification from CAN-bus telemetry.
//!
//! The crate learns a single owner driver's per-second driving pattern with a
//! recurrent GAN (LSTM generator and LSTM discriminator) trained on the owner's
//! data only, then uses the trained discriminator to flag any other driving
//! pattern as theft. It covers the full pipeline:
//!
//! * [`dataset`] — CSV trace parsing and the canonical in-memory trace form
//! * [`featureng`] — correlation pruning, filter rules, sliding windows,
//!   min-max normalization
//! * [`ndcore`] — dense matrices, LSTM with backpropagation through time,
//!   losses, SGD and Adam
//! * [`rgan`] — the recurrent GAN and its adversarial training loop
//! * [`detector`] — score thresholding, calibration, and streaming replay
//! * [`evalkit`] — test-set composition and accuracy/precision/recall/F1
//! * [`synthgen`] — a deterministic synthetic driver-trace generator for
//!   experiments without real vehicle data

pub mod dataset;
pub mod detector;
pub mod evalkit;
pub mod featureng;
pub mod ndcore;
pub mod rgan;
pub mod synthgen;
