//! Skeleton-sequence action recognition: 3D joint sequences are encoded
//! as compact color images and classified by small residual networks,
//! trained from scratch with a self-contained numerical engine.

pub mod checkpoint;
pub mod dataset;
pub mod encode;
pub mod error;
pub mod gradcheck;
pub mod image;
pub mod layout;
pub mod network;
pub mod nn;
pub mod optim;
pub mod rng;
pub mod skeleton;
pub mod synth;
pub mod tensor;
pub mod train;

pub use error::{Error, Result};
