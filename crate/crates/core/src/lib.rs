pub mod acceptance;
pub mod config;
pub mod density;
pub mod dynamics;
pub mod error;
pub mod fourier;
pub mod grid;
pub mod interp;
pub mod model;
pub mod model1d;
pub mod model3d;
pub mod oracle;
pub mod pv;
pub mod quad;
pub mod resonance;
pub mod sampled;
pub mod scattering1d;
pub mod sph;
pub mod table;

pub use error::{Error, Result};
pub use grid::UniformGrid;
pub use num_complex::Complex64;
pub use sampled::SampledFunction;
