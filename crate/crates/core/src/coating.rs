//! Coating deposition on the curved dimple mirror and stop-band placement.
//!
//! The atomic coating beam meets the curved substrate at a polar-angle
//! dependent inclination, thinning the deposited layers away from the dimple
//! center. That slides the stop band toward shorter wavelengths with angle,
//! and once the band's upper edge crosses the working wavelength the mirror
//! reflectivity collapses. The optimizer scales the center thickness so the
//! working wavelength stays inside the (shifted) band over the whole mode
//! solid angle.
//!
//! Local incidence is treated as normal: the cavity-mode wavefronts match
//! the mirror curvature, so each bounce meets the local coating head-on.
//! The merit function is worst-case (min over angle) because cavity loss is
//! dominated by the worst bounce location.

use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::numeric::{bisect_root, golden_section_max};
use crate::tmm::{LayerStack, PlaneWaveQuery, Polarization};

/// Concave dimple mirror geometry. Angles in degrees, lengths in um.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimpleGeometry {
    pub radius_of_curvature_um: f64,
    pub opening_half_angle_deg: f64,
    pub depth_um: f64,
    pub substrate_thickness_um: f64,
}

impl DimpleGeometry {
    /// Builds from depth; the opening half-angle follows from
    /// `cos(theta_open) = 1 - d/R_M`.
    pub fn from_depth(
        radius_of_curvature_um: f64,
        depth_um: f64,
        substrate_thickness_um: f64,
    ) -> Result<DimpleGeometry> {
        ensure_finite(
            "dimple geometry",
            &[radius_of_curvature_um, depth_um, substrate_thickness_um],
        )?;
        if !(0.0 < depth_um && depth_um < radius_of_curvature_um) {
            return Err(Error::input("dimple depth must satisfy 0 < d < R_M"));
        }
        let opening = (1.0 - depth_um / radius_of_curvature_um).acos();
        Ok(DimpleGeometry {
            radius_of_curvature_um,
            opening_half_angle_deg: opening.to_degrees(),
            depth_um,
            substrate_thickness_um,
        })
    }

    /// Builds from the opening half-angle; depth follows.
    pub fn from_opening_angle(
        radius_of_curvature_um: f64,
        opening_half_angle_deg: f64,
        substrate_thickness_um: f64,
    ) -> Result<DimpleGeometry> {
        ensure_finite(
            "dimple geometry",
            &[
                radius_of_curvature_um,
                opening_half_angle_deg,
                substrate_thickness_um,
            ],
        )?;
        if !(0.0 < opening_half_angle_deg && opening_half_angle_deg < 90.0) {
            return Err(Error::input("opening half-angle must lie in (0, 90) deg"));
        }
        let depth =
            radius_of_curvature_um * (1.0 - opening_half_angle_deg.to_radians().cos());
        Ok(DimpleGeometry {
            radius_of_curvature_um,
            opening_half_angle_deg,
            depth_um: depth,
            substrate_thickness_um,
        })
    }

    /// Builds with both depth and angle given; they must agree through
    /// `cos(theta_open) = 1 - d/R_M` to 1e-6.
    pub fn new(
        radius_of_curvature_um: f64,
        opening_half_angle_deg: f64,
        depth_um: f64,
        substrate_thickness_um: f64,
    ) -> Result<DimpleGeometry> {
        let g = DimpleGeometry::from_depth(radius_of_curvature_um, depth_um, substrate_thickness_um)?;
        let expected_cos = 1.0 - depth_um / radius_of_curvature_um;
        if (opening_half_angle_deg.to_radians().cos() - expected_cos).abs() > 1e-6 {
            return Err(Error::input(format!(
                "opening half-angle {} deg inconsistent with depth {} um (expect {} deg)",
                opening_half_angle_deg, depth_um, g.opening_half_angle_deg
            )));
        }
        Ok(DimpleGeometry {
            opening_half_angle_deg,
            ..g
        })
    }

    /// Aperture radius of the opening, `R_M sin(theta_open)`.
    pub fn aperture_radius_um(&self) -> f64 {
        self.radius_of_curvature_um * self.opening_half_angle_deg.to_radians().sin()
    }
}

/// Deposition thinning law: local thickness factor `cos(theta)^p` where
/// theta is the polar angle from the dimple axis. `p = 0` is a uniform
/// coating, `p = 1` the flux-projection default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepositionModel {
    pub thinning_exponent: f64,
}

impl DepositionModel {
    pub fn new(thinning_exponent: f64) -> Result<DepositionModel> {
        ensure_finite("thinning exponent", &[thinning_exponent])?;
        if thinning_exponent < 0.0 {
            return Err(Error::input("thinning exponent must be >= 0"));
        }
        Ok(DepositionModel { thinning_exponent })
    }

    pub fn uniform() -> DepositionModel {
        DepositionModel {
            thinning_exponent: 0.0,
        }
    }

    /// Flux-projection cosine law.
    pub fn cosine() -> DepositionModel {
        DepositionModel {
            thinning_exponent: 1.0,
        }
    }

    pub fn thickness_factor(&self, theta_rad: f64) -> f64 {
        theta_rad.cos().powf(self.thinning_exponent)
    }
}

/// A coating design: the base stack as deposited on a flat witness plus the
/// thickness multiplier realized at the dimple center (theta = 0).
#[derive(Debug, Clone, PartialEq)]
pub struct CoatingDesign {
    pub base_stack: LayerStack,
    pub center_scale: f64,
}

impl CoatingDesign {
    pub fn new(base_stack: LayerStack, center_scale: f64) -> Result<CoatingDesign> {
        ensure_finite("center scale", &[center_scale])?;
        if center_scale <= 0.0 {
            return Err(Error::input("center scale must be > 0"));
        }
        Ok(CoatingDesign {
            base_stack,
            center_scale,
        })
    }
}

/// Stack actually present at polar angle `theta`: every thickness multiplied
/// by `s cos(theta)^p`, indices unchanged.
pub fn local_stack(
    design: &CoatingDesign,
    model: &DepositionModel,
    theta_rad: f64,
) -> Result<LayerStack> {
    ensure_finite("theta", &[theta_rad])?;
    if !(0.0..PI / 2.0).contains(&theta_rad) {
        return Err(Error::input("theta must lie in [0, pi/2)"));
    }
    Ok(design
        .base_stack
        .scale_thicknesses(design.center_scale * model.thickness_factor(theta_rad)))
}

fn local_reflectance(
    design: &CoatingDesign,
    model: &DepositionModel,
    working_wavelength_nm: f64,
    theta_rad: f64,
) -> Result<f64> {
    // Normal local incidence: mode wavefronts match the mirror curvature.
    local_stack(design, model, theta_rad)?
        .reflectance(&PlaneWaveQuery::normal(working_wavelength_nm, Polarization::TE))
}

/// Reflectance seen by the mode versus polar angle, at normal local
/// incidence.
pub fn reflectivity_profile(
    design: &CoatingDesign,
    model: &DepositionModel,
    working_wavelength_nm: f64,
    theta_grid_rad: &[f64],
) -> Result<Vec<(f64, f64)>> {
    theta_grid_rad
        .iter()
        .map(|&theta| {
            local_reflectance(design, model, working_wavelength_nm, theta).map(|r| (theta, r))
        })
        .collect()
}

/// Smallest angle in `[0, max_angle]` where the local reflectance drops
/// below `reflectance_threshold`, refined by bisection to 0.01 deg.
/// `None` when the reflectance holds up across the whole aperture.
pub fn cutoff_angle(
    design: &CoatingDesign,
    model: &DepositionModel,
    working_wavelength_nm: f64,
    reflectance_threshold: f64,
    max_angle_rad: f64,
) -> Result<Option<f64>> {
    ensure_finite("cutoff inputs", &[reflectance_threshold, max_angle_rad])?;
    if !(0.0 < reflectance_threshold && reflectance_threshold < 1.0) {
        return Err(Error::input("reflectance threshold must lie in (0, 1)"));
    }
    if !(0.0 < max_angle_rad && max_angle_rad < PI / 2.0) {
        return Err(Error::input("max angle must lie in (0, pi/2)"));
    }

    let step = 0.25f64.to_radians();
    let n = (max_angle_rad / step).ceil() as usize;
    let mut prev = 0.0;
    for i in 0..=n {
        let theta = (i as f64 * step).min(max_angle_rad);
        let r = local_reflectance(design, model, working_wavelength_nm, theta)?;
        if r < reflectance_threshold {
            if i == 0 {
                return Ok(Some(0.0));
            }
            let root = bisect_root(
                |t| {
                    local_reflectance(design, model, working_wavelength_nm, t)
                        .unwrap_or(0.0)
                        - reflectance_threshold
                },
                prev,
                theta,
                0.01f64.to_radians(),
            )?;
            return Ok(Some(root));
        }
        prev = theta;
    }
    Ok(None)
}

/// Maximizes the worst-case reflectance over the aperture,
/// `f(s) = min over theta in [0, max_angle] of R(theta; s)`, by a coarse
/// deterministic scan followed by golden-section refinement. The inner
/// minimum is evaluated on a theta grid of 0.5 deg spacing (endpoints
/// included). Returns `(s_star, achieved_min_reflectance)`.
pub fn optimize_center_scale(
    base_stack: &LayerStack,
    model: &DepositionModel,
    working_wavelength_nm: f64,
    max_angle_rad: f64,
) -> Result<(f64, f64)> {
    ensure_finite("optimizer inputs", &[working_wavelength_nm, max_angle_rad])?;
    if !(0.0 < max_angle_rad && max_angle_rad < PI / 2.0) {
        return Err(Error::input("max angle must lie in (0, pi/2)"));
    }
    base_stack.validate()?;

    let spacing = 0.5f64.to_radians();
    let n_theta = (max_angle_rad / spacing).ceil() as usize;
    let thetas: Vec<f64> = (0..=n_theta)
        .map(|i| (i as f64 * spacing).min(max_angle_rad))
        .collect();

    let merit = |s: f64| -> f64 {
        let design = CoatingDesign {
            base_stack: base_stack.clone(),
            center_scale: s,
        };
        thetas
            .iter()
            .map(|&t| local_reflectance(&design, model, working_wavelength_nm, t).unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
    };

    // Coarse bracket over thickness scales; the band can only reach the
    // working wavelength within a factor-of-two window around unity.
    const S_LO: f64 = 0.6;
    const S_HI: f64 = 1.8;
    const S_STEP: f64 = 0.005;
    let n_s = ((S_HI - S_LO) / S_STEP).round() as usize;
    let mut best = (S_LO, f64::NEG_INFINITY);
    for i in 0..=n_s {
        let s = S_LO + i as f64 * S_STEP;
        let f = merit(s);
        if f > best.1 {
            best = (s, f);
        }
    }
    if best.1 <= 0.5 {
        return Err(Error::OptimizationFailure {
            min_required: 0.5,
            best_scale: best.0,
            best_merit: best.1,
        });
    }

    let lo = (best.0 - S_STEP).max(S_LO);
    let hi = (best.0 + S_STEP).min(S_HI);
    let (s_star, f_star) = golden_section_max(merit, lo, hi, 1e-7);
    if f_star >= best.1 {
        Ok((s_star, f_star))
    } else {
        Ok((best.0, best.1))
    }
}
