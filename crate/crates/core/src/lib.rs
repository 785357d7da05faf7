pub mod analytic;
pub mod cayley;
pub mod error;
pub mod geometric;
pub mod harness;
pub mod matrix;
pub mod oracle;
pub mod padic;

pub use error::{AflError, Result};
pub use padic::{PadicScalar, PrecisionContext, QuadExtScalar, Valuation};
