//! Phase-estimation simulation: dense state vectors, output distributions
//! with dithering, the semiclassical (measure-and-reuse) estimator, and
//! post-selection of padded windows.

mod postselect;
mod qpe;
mod semiclassical;
mod statevector;

pub use postselect::{inequality_postselect, postselect_range, Postselected};
pub use qpe::{
    dither_gates, dithered_error_density, error_density, gamma, qpe_distribution, wrap_phase, QpeDistribution,
};
pub use semiclassical::{semiclassical_run, SemiclassicalMode, SemiclassicalResult};
pub use statevector::{run_circuit, StateVector};
