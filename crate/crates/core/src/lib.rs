//! Total q-concurrence and α-concurrence measures for bipartite and multipartite states.

pub mod bounds;
pub mod closedform;
pub mod error;
pub mod measures;
pub mod monogamy;
pub mod qlinalg;
pub mod states;

pub use error::{Error, Result};
pub use measures::{ctq_pure, mu, MeasureParams, MeasureValue};
pub use qlinalg::{ComplexMatrix, DimensionSignature, C64};
pub use states::{DensityMatrix, MultipartiteState, PureState, SchmidtSpectrum};
