//! Electrostatics, phonon bands and spin-spin couplings for honeycomb lattices
//! of ions in surface-electrode microtraps.
//!
//! Quantities are in reduced units (`d = M = ω_c = 1`) unless noted; see
//! [`units`] for the map to SI.

pub mod dipole;
pub mod electrostatics;
pub mod error;
pub mod geometry;
pub mod phonons;
pub mod series;
pub mod special;
pub mod spincoupling;
pub mod trap;
pub mod units;
pub mod wires;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/units.md")]
    mod units {}
    #[doc = include_str!("../../../book/src/electrostatics.md")]
    mod electrostatics {}
    #[doc = include_str!("../../../book/src/dipole.md")]
    mod dipole {}
    #[doc = include_str!("../../../book/src/phonons.md")]
    mod phonons {}
    #[doc = include_str!("../../../book/src/spincoupling.md")]
    mod spincoupling {}
    #[doc = include_str!("../../../book/src/wires.md")]
    mod wires {}
    #[doc = include_str!("../../../book/src/trap.md")]
    mod trap {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
