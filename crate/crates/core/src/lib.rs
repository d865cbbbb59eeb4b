pub mod blender;
pub mod bump;
pub mod chart;
pub mod conditions;
pub mod config;
pub mod construction;
pub mod ergodic;
pub mod error;
pub mod fields;
pub mod kan;
pub mod layout;
pub mod perturb;
pub mod ppm;
pub mod report;
pub mod rng;
pub mod shapes;
pub mod torus;

pub use error::{Error, Result};
