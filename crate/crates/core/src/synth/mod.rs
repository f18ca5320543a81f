//! Circuit synthesis for bond-dimension-4 MPS control states.

pub mod cartan;
mod chain;
pub mod cost;
pub mod csd;
pub mod fit;
pub mod gates;
pub mod linalg;

pub use cartan::{cartan_d, Cartan};
pub use chain::{mux_ry, state_prep_tree, synthesize, BlockReport, SynthesisOptions, SynthesisReport};
pub use cost::{rotation_count, t_cost, t_count, template_rotation_count};
pub use csd::{csd_2by1, Csd, RotationQubit};
pub use gates::{Gate, GateKind, GateList};
