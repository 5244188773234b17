pub mod baker_akhiezer;
pub mod calibration;
pub mod cli;
pub mod error;
pub mod master_field;
pub mod matrix_model;
pub mod num;
pub mod pipeline;
pub mod potentials;
pub mod quadrature;
pub mod roots;
pub mod scaling;
pub mod series;

pub use error::{Error, Result};
pub use num::{Precision, XComplex, XReal};
pub use series::{BiSeries, TaylorSeries};
