pub mod acceptance;
pub mod correlations;
pub mod error;
pub mod export;
pub mod grid;
pub mod observables;
pub mod oracle;
pub mod propagator;
pub mod quadrature;
pub mod reservoir;
pub mod scenario;
pub mod tcl;

pub use error::{Error, Result};
pub use grid::TimeGrid;
