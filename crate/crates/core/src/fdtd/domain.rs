//! Discretization of the cavity geometry onto the body-of-revolution grid:
//! DBR rasterization with error diffusion, staircase PEC mask for the curved
//! mirror, and the Courant-stable time step.

use crate::coating::DimpleGeometry;
use crate::constants::C0;
use crate::error::{Error, Result};
use crate::modes::CavityGeometry;
use crate::tmm::LayerStack;

/// The curved end of the cavity.
#[derive(Debug, Clone)]
pub enum TopMirror {
    /// Flat PEC wall at the far end (the R_M -> infinity switch).
    Flat,
    /// Concave spherical mirror carved as a staircase PEC mask; the sphere
    /// radius comes from the cavity geometry, the aperture from the dimple.
    Dimple(DimpleGeometry),
}

/// Build recipe for a simulation domain.
#[derive(Debug, Clone)]
pub struct DomainSpec {
    pub cavity: CavityGeometry,
    pub top_mirror: TopMirror,
    /// Planar DBR below the cavity; `None` leaves a bare PEC planar mirror.
    pub dbr: Option<LayerStack>,
    /// Substrate thickness kept behind the DBR before the bottom wall, um.
    pub substrate_pad_um: f64,
    /// Refractive index of the medium filling the cavity region (1.0 for
    /// vacuum). Enters the resolution rule through n_max.
    pub fill_index: f64,
    /// Domain radius, um.
    pub radial_extent_um: f64,
    /// Cells per (design wavelength / n_max); floor 15.
    pub resolution: f64,
    pub design_wavelength_nm: f64,
    /// Azimuthal mode number m; m = 1 is the linearly-polarized
    /// fundamental-like family.
    pub azimuthal_order: u32,
    /// Courant margin, at most 0.99.
    pub courant_margin: f64,
}

impl DomainSpec {
    pub fn new(cavity: CavityGeometry, top_mirror: TopMirror) -> DomainSpec {
        DomainSpec {
            cavity,
            top_mirror,
            dbr: None,
            substrate_pad_um: 0.0,
            fill_index: 1.0,
            radial_extent_um: 0.0,
            resolution: 20.0,
            design_wavelength_nm: 750.0,
            azimuthal_order: 1,
            courant_margin: 0.99,
        }
    }
}

/// Discretized axisymmetric simulation domain. Cells are uniform squares of
/// side `cell_size_um`; cell (i, k) spans `r in [i, i+1] cells` and
/// `z in [k, k+1] cells`, stored row-major with the axial index fastest.
#[derive(Debug, Clone)]
pub struct SimulationDomain {
    pub nr: usize,
    pub nz: usize,
    pub cell_size_um: f64,
    pub azimuthal_order: u32,
    /// Relative permittivity per cell (`nr * nz`).
    pub eps_r: Vec<f64>,
    /// Perfect-conductor mask per cell (`nr * nz`).
    pub pec: Vec<bool>,
    /// z of the planar mirror surface (top of the DBR, or the bottom wall
    /// when there is no stack), um.
    pub planar_surface_z_um: f64,
    /// z of the curved-mirror apex (or the top wall for a flat mirror), um.
    pub apex_z_um: f64,
    /// Cell count of each rasterized DBR layer, incident (cavity) side first.
    pub dbr_layer_cells: Vec<usize>,
    pub n_max: f64,
    pub courant_margin: f64,
    /// Warnings accumulated while building (for run reports).
    pub warnings: Vec<String>,
}

/// Largest Courant margin (relative to the 2-D bound `d/(c sqrt(2))`) that
/// keeps the body-of-revolution update stable for azimuthal order m. The
/// `m/r` couplings at the axis stiffen the update beyond the Cartesian
/// bound; these caps sit just inside the empirically measured stability
/// edges (0.95/0.99 for m = 0, 0.85/0.90 for m = 1, ~1.2/m above).
pub fn stable_courant_margin(azimuthal_order: u32) -> f64 {
    match azimuthal_order {
        0 => 0.95,
        1 => 0.85,
        m => (1.15 / m as f64).min(0.85),
    }
}

impl SimulationDomain {
    #[inline]
    pub fn cell(&self, i: usize, k: usize) -> usize {
        i * self.nz + k
    }

    pub fn radial_extent_um(&self) -> f64 {
        self.nr as f64 * self.cell_size_um
    }

    pub fn axial_extent_um(&self) -> f64 {
        self.nz as f64 * self.cell_size_um
    }

    /// Courant-stable time step in seconds (margin already clamped per
    /// azimuthal order at build time).
    pub fn dt_s(&self) -> f64 {
        self.courant_margin * self.cell_size_um * 1e-6 / (C0 * std::f64::consts::SQRT_2)
    }

    /// Highest frequency resolved at 20 cells per wavelength in the densest
    /// medium; sources exceeding this draw a warning, not an error.
    pub fn max_resolved_frequency_thz(&self) -> f64 {
        C0 / (20.0 * self.n_max * self.cell_size_um * 1e-6) * 1e-12
    }
}

pub fn build_domain(spec: &DomainSpec) -> Result<SimulationDomain> {
    if spec.resolution < 15.0 {
        return Err(Error::build(format!(
            "resolution {} is below the floor of 15 cells per wavelength",
            spec.resolution
        )));
    }
    if !(0.0 < spec.courant_margin && spec.courant_margin <= 0.99) {
        return Err(Error::build("courant margin must lie in (0, 0.99]"));
    }
    if spec.design_wavelength_nm <= 0.0 {
        return Err(Error::build("design wavelength must be > 0"));
    }
    if spec.radial_extent_um <= 0.0 {
        return Err(Error::build("radial extent must be > 0"));
    }

    if spec.fill_index < 1.0 || !spec.fill_index.is_finite() {
        return Err(Error::build("fill index must be >= 1"));
    }

    // Densest medium sets the cell size.
    let mut n_max: f64 = spec.fill_index;
    if let Some(stack) = &spec.dbr {
        stack.validate()?;
        for layer in &stack.layers {
            let n = layer.index.at(spec.design_wavelength_nm);
            if n.im != 0.0 {
                return Err(Error::build("FDTD stacks must use real indices"));
            }
            n_max = n_max.max(n.re);
        }
        n_max = n_max.max(stack.substrate_index);
    }

    let target_cell = spec.design_wavelength_nm * 1e-3 / (spec.resolution * n_max);
    // Snap the cell size so the cavity length lands exactly on the grid.
    let length = spec.cavity.length_um;
    let n_cavity = (length / target_cell).ceil().max(4.0) as usize;
    let cell = length / n_cavity as f64;

    let mut warnings = Vec::new();

    let margin_cap = stable_courant_margin(spec.azimuthal_order);
    let courant_margin = if spec.courant_margin > margin_cap {
        warnings.push(format!(
            "courant margin {} clamped to the m = {} stability cap {}",
            spec.courant_margin, spec.azimuthal_order, margin_cap
        ));
        margin_cap
    } else {
        spec.courant_margin
    };

    // Stack rasterization, incident (cavity) side first, walking down from
    // the planar surface with cumulative rounding so the total thickness
    // error stays below one cell.
    let mut dbr_layer_cells = Vec::new();
    let mut layer_eps_top_down: Vec<f64> = Vec::new();
    let mut substrate_eps = 1.0;
    if let Some(stack) = &spec.dbr {
        let mut cum_um = 0.0;
        let mut cum_cells = 0usize;
        for layer in &stack.layers {
            cum_um += layer.thickness_nm * 1e-3;
            let boundary = (cum_um / cell).round() as usize;
            let n_cells = boundary - cum_cells;
            cum_cells = boundary;
            dbr_layer_cells.push(n_cells);
            if n_cells == 0 {
                warnings.push(format!(
                    "DBR layer of {} nm rasterized to zero cells at cell size {:.1} nm",
                    layer.thickness_nm,
                    cell * 1e3
                ));
            }
            let n = layer.index.at(spec.design_wavelength_nm).re;
            for _ in 0..n_cells {
                layer_eps_top_down.push(n * n);
            }
        }
        substrate_eps = stack.substrate_index * stack.substrate_index;
    }
    let n_stack = layer_eps_top_down.len();
    let n_sub = (spec.substrate_pad_um / cell).round() as usize;

    let k_planar = n_sub + n_stack;
    let k_apex = k_planar + n_cavity;

    // Geometry of the curved end.
    let (nz, mask_dimple) = match &spec.top_mirror {
        TopMirror::Flat => (k_apex, None),
        TopMirror::Dimple(dimple) => {
            if (dimple.radius_of_curvature_um - spec.cavity.mirror_radius_um).abs()
                > 1e-9 * spec.cavity.mirror_radius_um
            {
                return Err(Error::build(
                    "dimple radius of curvature differs from the cavity mirror radius",
                ));
            }
            if dimple.depth_um >= length {
                return Err(Error::build(
                    "dimple depth exceeds the cavity length; the bowl would hit the planar mirror",
                ));
            }
            (k_apex + 2, Some(dimple.clone()))
        }
    };
    let nr = (spec.radial_extent_um / cell).round().max(4.0) as usize;
    if nr < 8 || nz < 8 {
        return Err(Error::build("domain too small for the requested extents"));
    }

    let z_planar = k_planar as f64 * cell;
    let z_apex = k_apex as f64 * cell;

    let mut eps_r = vec![1.0; nr * nz];
    let mut pec = vec![false; nr * nz];

    let fill_eps = spec.fill_index * spec.fill_index;
    for i in 0..nr {
        for k in 0..nz {
            let idx = i * nz + k;
            if k < n_sub {
                eps_r[idx] = substrate_eps;
            } else if k < k_planar {
                // Stack stored top-down; cell k sits (k_planar - 1 - k) below
                // the surface.
                eps_r[idx] = layer_eps_top_down[k_planar - 1 - k];
            } else {
                eps_r[idx] = fill_eps;
            }
        }
    }

    if let Some(dimple) = &mask_dimple {
        let r_m = dimple.radius_of_curvature_um;
        let z_center = z_planar + length - r_m;
        let z_flat = z_center + r_m * dimple.opening_half_angle_deg.to_radians().cos();
        for i in 0..nr {
            let r_c = (i as f64 + 0.5) * cell;
            for k in 0..nz {
                let z_c = (k as f64 + 0.5) * cell;
                if z_c >= z_flat {
                    let dist2 = r_c * r_c + (z_c - z_center) * (z_c - z_center);
                    if dist2 >= r_m * r_m {
                        pec[i * nz + k] = true;
                    }
                }
            }
        }
        if dimple.aperture_radius_um() > spec.radial_extent_um {
            warnings.push(format!(
                "dimple aperture radius {:.2} um clipped by the domain wall at {:.2} um",
                dimple.aperture_radius_um(),
                spec.radial_extent_um
            ));
        }
    }

    Ok(SimulationDomain {
        nr,
        nz,
        cell_size_um: cell,
        azimuthal_order: spec.azimuthal_order,
        eps_r,
        pec,
        planar_surface_z_um: z_planar,
        apex_z_um: z_apex,
        dbr_layer_cells,
        n_max,
        courant_margin,
        warnings,
    })
}
