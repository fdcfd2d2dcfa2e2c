//! Simulation and inference library for radio-visual transmitter discovery.
//!
//! A pan-only platform carries a camera, an omnidirectional and a directional
//! radio receiver. One of `N` surrounding targets is a radio transmitter. The
//! crate simulates that world, learns the camera's probability of detection
//! as a function of RSSI with a heteroscedastic GP, and runs a Bayesian
//! optimization controller over the pan angle that fuses both cues.
//!
//! The numerical layers ([`linalg`], [`gp`], [`world`], [`pod`]) are generic
//! over [`Scalar`] (`f32` / `f64`); the controller and the Monte Carlo harness
//! run in `f64`. Aliases for the common instantiations live at the crate root.

pub mod bo;
pub mod config;
pub mod error;
pub mod gp;
pub mod linalg;
pub mod mc;
pub mod pod;
pub mod scalar;
pub mod seed;
pub mod world;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type Matrix32 = linalg::Matrix<f32>;
pub type KernelSpec64 = gp::KernelSpec<f64>;
pub type KernelSpec32 = gp::KernelSpec<f32>;
pub type GpDataset64 = gp::GpDataset<f64>;
pub type GpDataset32 = gp::GpDataset<f32>;
pub type GpModel64 = gp::GpModel<f64>;
pub type GpModel32 = gp::GpModel<f32>;
pub type RadioModel64 = world::RadioModel<f64>;
pub type DetectionModel64 = world::DetectionModel<f64>;
pub type World64 = world::World<f64>;
pub type PodModel64 = pod::PodModel<f64>;
pub type PodModel32 = pod::PodModel<f32>;
