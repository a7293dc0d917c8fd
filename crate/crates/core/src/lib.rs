//! Wavelet-scattering image forensics: a dual-tree complex wavelet engine,
//! a second-order scattering feature extractor, and a noise-aware texture
//! fusion module that refines candidate inpainting-forgery masks, plus the
//! evaluation harness around them.

pub mod candidate;
pub mod commands;
pub mod config;
pub mod dataset;
pub mod dtcwt;
pub mod error;
pub mod fusion;
pub mod image;
pub mod metrics;
pub mod noise;
pub mod scattering;
pub mod segmentation;

pub use error::{Error, Result};
