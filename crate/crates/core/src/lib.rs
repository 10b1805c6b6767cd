//! Monocular obstacle detection from sparse optical flow.
//!
//! The pipeline: frames ([`imaging`]) are tracked with pyramidal
//! Lucas-Kanade at a fixed circular pattern ([`flow`]), turned into
//! magnitude/phase vectors ([`features`]) and classified by an RBF SVM, a
//! perceptron or an SVR ([`learn`], selected by name via [`registry`]).
//! [`eval`] holds cross-validation and benchmarks, [`sim`] a synthetic world
//! to record data in, and [`nav`] the closed steering loop.

pub mod cli;
pub mod eval;
pub mod features;
pub mod flow;
pub mod imaging;
pub mod learn;
pub mod nav;
pub mod registry;
pub mod seed;
pub mod sim;
