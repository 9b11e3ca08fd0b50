//! File formats, the synthetic trace generator and the experiment runners
//! around [`scalesim_core`].

pub mod config;
pub mod error;
pub mod experiment;
pub mod forecast;
pub mod generate;
pub mod io;
pub mod output;

pub use error::{Error, Result};
