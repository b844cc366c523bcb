//! Field, pseudopotential and ion-dynamics model for a planar point Paul
//! trap made of a centre disk and a concentric ring electrode.

// `!(x > 0.0)` rejects NaN; quadrature nodes are kept at published precision
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod bessel;
pub mod characterize;
pub mod constants;
pub mod crystal;
pub mod dynamics;
pub mod error;
pub mod field;
pub mod optimize;
pub mod quadrature;
pub mod solve;
pub mod spectrum;
pub mod trap;

pub use characterize::{characterize, TrapCharacteristics};
pub use error::{Error, Result};
pub use trap::{IonSpecies, RfDrive, RingGeometry, TrapConfig};
