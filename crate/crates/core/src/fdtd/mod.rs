//! Axisymmetric (body-of-revolution) FDTD solver for the non-paraxial
//! cavity modes: the curved mirror enters as a staircase perfect conductor,
//! the planar DBR as rasterized dielectric layers, and the azimuthal order
//! m selects the field family (m = 1 carries the linearly-polarized
//! fundamental-like modes). Closed PEC outer walls keep the discrete energy
//! exactly conserved, which doubles as the solver's self-test.

mod analysis;
mod domain;
mod solver;

pub use analysis::{
    mode_profile, record_from_series, resonances, run_ringdown, ModeProfile, ProbeRecord,
    Resonance,
};
pub use domain::{build_domain, DomainSpec, SimulationDomain, TopMirror};
pub use solver::{node_ring_weight, FieldComponent, Probe, Simulation, SourceSpec};
