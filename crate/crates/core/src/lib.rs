pub mod affine;
pub mod biholo;
pub mod boettcher;
pub mod cli;
pub mod cyclo;
pub mod dyadic;
pub mod error;
pub mod exact;
pub mod ext;
pub mod greens;
pub mod henon;
pub mod model;
pub mod mp;
pub mod path;
pub mod render;
pub mod report;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
