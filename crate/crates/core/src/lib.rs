//! Desk-scale modeling toolkit for hemispherical optical micro-cavities.
//!
//! The crate covers the full design loop for a plano-concave micro-cavity
//! built from a planar distributed Bragg reflector and a concave
//! micro-mirror:
//!
//! * [`tmm`] — transfer-matrix response of multilayer dielectric stacks
//!   (reflection/transmission amplitudes, stop bands, finesse).
//! * [`coating`] — angle-dependent coating thinning on the curved mirror and
//!   a stop-band placement optimizer for wide-solid-angle reflectivity.
//! * [`modes`] — paraxial resonator theory: stability, waist, mode volume,
//!   and the near-hemispherical mode spectrum.
//! * [`cqed`] — dipole-cavity coupling, linewidths, strong-coupling verdicts,
//!   normal-mode-split transmission spectra, and spectrum analysis.
//! * [`fdtd`] — axisymmetric (body-of-revolution) FDTD solver for the
//!   non-paraxial modes of the real cavity geometry.
//! * [`surface`] — mirror metrology: height-map PSD, sphere fits, and
//!   scatter-loss budgets.
//! * [`io`] — plain-text stack files, CSV tables, and the binary grid format
//!   shared between the FDTD dumps and the surface tools.
//!
//! # Conventions
//!
//! Phases assume a time dependence `exp(-i w t)`, so absorbing media carry a
//! non-negative imaginary refractive index, and reflection phases are
//! reported in `(-pi, pi]`. Linewidths (`gamma`, `kappa`) are half widths at
//! half maximum in energy units (ueV) throughout.

pub mod coating;
pub mod constants;
pub mod cqed;
pub mod error;
pub mod fdtd;
pub mod io;
pub mod modes;
pub mod numeric;
pub mod surface;
pub mod tmm;

pub use error::{Error, Result};
