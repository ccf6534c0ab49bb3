//! Stream I/O, test-matrix generators, neighboring inputs, sensitivity checks
//! and error reports. Used by the `dplrf` binary and the integration tests.

pub mod evaluate;
pub mod generate;
pub mod matrix_io;
pub mod neighbors;
pub mod sensitivity;
pub mod stream;

pub use evaluate::{calibration, evaluate_lowspace, evaluate_spectral, Algorithm, ErrorReport};
pub use generate::{gen_stream, Generated, Model};
pub use neighbors::{neighbor_priv1, neighbor_priv2};
pub use sensitivity::{sensitivity_check, SensitivityConfig, SensitivityReport};
pub use stream::StreamFile;
