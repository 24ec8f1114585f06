//! Paraxial plano-concave resonator theory: stability, fundamental-mode
//! waist and divergence, effective mode volume, and the near-hemispherical
//! mode spectrum with its c/4L transverse grouping.
//!
//! Marginal geometries (L = R_M exactly) are rejected rather than
//! approximated: the paraxial formulas genuinely fail there, and the FDTD
//! solver is the authority in that regime. Near-hemispherical studies pass
//! `L = R_M - eps` with an explicit eps.

use std::f64::consts::PI;

use crate::constants;
use crate::error::{ensure_finite, Error, Result};

/// Plano-concave cavity: on-axis mirror separation and the radius of
/// curvature of the concave mirror, both in um.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityGeometry {
    pub length_um: f64,
    pub mirror_radius_um: f64,
}

impl CavityGeometry {
    pub fn new(length_um: f64, mirror_radius_um: f64) -> Result<CavityGeometry> {
        ensure_finite("cavity geometry", &[length_um, mirror_radius_um])?;
        if length_um <= 0.0 || mirror_radius_um <= 0.0 {
            return Err(Error::input("cavity length and mirror radius must be > 0"));
        }
        Ok(CavityGeometry {
            length_um,
            mirror_radius_um,
        })
    }
}

/// Resonator stability parameters. The planar mirror fixes g1 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub g1: f64,
    pub g2: f64,
    pub stable: bool,
    /// On the stability boundary (g1 g2 = 0 or 1): hemispherical or planar.
    pub marginal: bool,
}

pub fn stability(geometry: &CavityGeometry) -> Stability {
    let g1 = 1.0;
    let g2 = 1.0 - geometry.length_um / geometry.mirror_radius_um;
    let product = g1 * g2;
    Stability {
        g1,
        g2,
        stable: (0.0..=1.0).contains(&product),
        marginal: product == 0.0 || product == 1.0,
    }
}

/// Fundamental Gaussian mode of a strictly stable plano-concave cavity.
/// `waist_radius_um` is the 1/e amplitude (1/e^2 intensity) radius at the
/// planar mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianModeParams {
    pub waist_radius_um: f64,
    pub rayleigh_range_um: f64,
    pub divergence_half_angle_rad: f64,
    pub effective_mode_volume_um3: f64,
}

/// Paraxial fundamental mode:
/// `w0^2 = (lambda/pi) sqrt(L (R_M - L))`, `theta_C = lambda/(pi w0)`,
/// `V_eff = pi w0^2 L / 4`.
pub fn gaussian_mode(geometry: &CavityGeometry, wavelength_nm: f64) -> Result<GaussianModeParams> {
    ensure_finite("wavelength", &[wavelength_nm])?;
    if wavelength_nm <= 0.0 {
        return Err(Error::input("wavelength must be > 0"));
    }
    let s = stability(geometry);
    if !s.stable || s.marginal {
        return Err(Error::DegenerateGeometry(format!(
            "gaussian_mode requires 0 < g2 < 1; got g2 = {} (L = {} um, R_M = {} um)",
            s.g2, geometry.length_um, geometry.mirror_radius_um
        )));
    }
    let lambda_um = wavelength_nm * 1e-3;
    let l = geometry.length_um;
    let r = geometry.mirror_radius_um;
    let w0_sq = (lambda_um / PI) * (l * (r - l)).sqrt();
    let w0 = w0_sq.sqrt();
    Ok(GaussianModeParams {
        waist_radius_um: w0,
        rayleigh_range_um: PI * w0_sq / lambda_um,
        divergence_half_angle_rad: lambda_um / (PI * w0),
        effective_mode_volume_um3: PI * w0_sq * l / 4.0,
    })
}

/// Effective mode volume for a given waist and length, `pi w0^2 L / 4`.
pub fn effective_mode_volume_um3(waist_radius_um: f64, length_um: f64) -> f64 {
    PI * waist_radius_um * waist_radius_um * length_um / 4.0
}

/// Paraxial inversion of the divergence relation: `w0 = lambda/(pi theta_C)`.
///
/// Note: at w0 = lambda this gives theta_C = 1/pi rad = 18.2 deg, noticeably
/// below the ~40 deg opening the hemispherical design aims for; near the
/// hemispherical point the paraxial relation underestimates the true
/// divergence and the FDTD solver should be consulted instead.
pub fn mode_waist_from_divergence(theta_c_rad: f64, wavelength_nm: f64) -> Result<f64> {
    ensure_finite("divergence", &[theta_c_rad, wavelength_nm])?;
    if !(0.0 < theta_c_rad && theta_c_rad < PI / 2.0) {
        return Err(Error::input("divergence half-angle must lie in (0, pi/2)"));
    }
    if wavelength_nm <= 0.0 {
        return Err(Error::input("wavelength must be > 0"));
    }
    Ok(wavelength_nm * 1e-3 / (PI * theta_c_rad))
}

/// One resonance: longitudinal index q, transverse order n, frequency THz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeLine {
    pub q: u32,
    pub n: u32,
    pub frequency_thz: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModeSpectrum {
    pub lines: Vec<ModeLine>,
}

/// Frequency of mode (q, n): `nu = (c/2L) (q + (n+1) arccos(sqrt(g1 g2))/pi)`.
pub fn mode_frequency_thz(geometry: &CavityGeometry, q: u32, n: u32) -> Result<f64> {
    let s = stability(geometry);
    if !s.stable || s.marginal {
        return Err(Error::DegenerateGeometry(
            "mode spectrum requires a strictly stable cavity".into(),
        ));
    }
    let fsr = constants::fsr_thz(geometry.length_um);
    let gouy = (s.g1 * s.g2).sqrt().acos() / PI;
    Ok(fsr * (q as f64 + (n as f64 + 1.0) * gouy))
}

/// Transverse mode spacing `(c/2L) arccos(sqrt(g1 g2))/pi` in THz; tends to
/// c/4L in the hemispherical limit g2 -> 0.
pub fn transverse_spacing_thz(geometry: &CavityGeometry) -> Result<f64> {
    let s = stability(geometry);
    if !s.stable || s.marginal {
        return Err(Error::DegenerateGeometry(
            "transverse spacing requires a strictly stable cavity".into(),
        ));
    }
    Ok(constants::fsr_thz(geometry.length_um) * (s.g1 * s.g2).sqrt().acos() / PI)
}

/// All modes with wavelength inside `wavelength_window_nm` and transverse
/// order up to `max_transverse_order`, sorted by frequency then n.
pub fn mode_spectrum(
    geometry: &CavityGeometry,
    wavelength_window_nm: (f64, f64),
    max_transverse_order: u32,
) -> Result<ModeSpectrum> {
    let (w_lo, w_hi) = wavelength_window_nm;
    ensure_finite("wavelength window", &[w_lo, w_hi])?;
    if !(w_lo > 0.0 && w_hi > w_lo) {
        return Err(Error::input("wavelength window must be ordered and positive"));
    }
    let f_lo = constants::frequency_thz(w_hi);
    let f_hi = constants::frequency_thz(w_lo);

    let s = stability(geometry);
    if !s.stable || s.marginal {
        return Err(Error::DegenerateGeometry(
            "mode spectrum requires a strictly stable cavity".into(),
        ));
    }
    let fsr = constants::fsr_thz(geometry.length_um);
    let gouy = (s.g1 * s.g2).sqrt().acos() / PI;

    let mut lines = Vec::new();
    for n in 0..=max_transverse_order {
        let offset = (n as f64 + 1.0) * gouy;
        // q range with f_lo <= fsr (q + offset) <= f_hi and q >= 1.
        let q_min = (f_lo / fsr - offset).ceil().max(1.0) as u64;
        let q_max = (f_hi / fsr - offset).floor() as i64;
        if q_max < q_min as i64 {
            continue;
        }
        for q in q_min..=(q_max as u64) {
            let frequency = fsr * (q as f64 + offset);
            lines.push(ModeLine {
                q: q as u32,
                n,
                frequency_thz: frequency,
            });
        }
    }
    lines.sort_by(|a, b| a.frequency_thz.total_cmp(&b.frequency_thz).then(a.n.cmp(&b.n)));
    Ok(ModeSpectrum { lines })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ABCD round-trip oracle: the fundamental q-parameter at the planar
    /// mirror must reproduce itself after L -> mirror(R_M) -> L.
    fn abcd_self_consistency_error(geometry: &CavityGeometry, w0_um: f64, lambda_um: f64) -> f64 {
        use num_complex::Complex64;
        let zr = PI * w0_um * w0_um / lambda_um;
        let q0 = Complex64::new(0.0, zr);
        let (l, r) = (geometry.length_um, geometry.mirror_radius_um);
        let prop = |q: Complex64, d: f64| q + d;
        // Curved mirror acts as a lens of focal length R/2.
        let mirror = |q: Complex64| q / (-2.0 / r * q + 1.0);
        let q1 = prop(mirror(prop(q0, l)), l);
        (q1 - q0).norm() / zr
    }

    #[test]
    fn hemispherical_point_is_marginal() {
        let g = CavityGeometry::new(50.0, 50.0).unwrap();
        let s = stability(&g);
        assert_eq!(s.g2, 0.0);
        assert!(s.stable && s.marginal);
    }

    #[test]
    fn interior_point_is_stable() {
        let g = CavityGeometry::new(25.0, 50.0).unwrap();
        let s = stability(&g);
        assert!((s.g2 - 0.5).abs() < 1e-15);
        assert!(s.stable && !s.marginal);
    }

    #[test]
    fn too_long_cavity_is_unstable() {
        let g = CavityGeometry::new(60.0, 50.0).unwrap();
        let s = stability(&g);
        assert!(s.g2 < 0.0);
        assert!(!s.stable);
    }

    #[test]
    fn waist_formula_and_abcd_oracle_agree() {
        let g = CavityGeometry::new(50.0, 50.1).unwrap();
        let mode = gaussian_mode(&g, 750.0).unwrap();
        assert!((mode.waist_radius_um - 0.731).abs() < 5e-4);
        let err = abcd_self_consistency_error(&g, mode.waist_radius_um, 0.75);
        assert!(err < 1e-12, "ABCD round-trip error {err}");
        for &(l, r) in &[(25.0, 50.0), (40.0, 55.0), (10.0, 100.0)] {
            let g = CavityGeometry::new(l, r).unwrap();
            let mode = gaussian_mode(&g, 780.0).unwrap();
            let err = abcd_self_consistency_error(&g, mode.waist_radius_um, 0.78);
            assert!(err < 1e-12, "L={l} R={r}: {err}");
        }
    }

    #[test]
    fn marginal_geometry_rejected() {
        let g = CavityGeometry::new(50.0, 50.0).unwrap();
        assert!(matches!(
            gaussian_mode(&g, 750.0),
            Err(Error::DegenerateGeometry(_))
        ));
        let g = CavityGeometry::new(60.0, 50.0).unwrap();
        assert!(gaussian_mode(&g, 750.0).is_err());
    }

    #[test]
    fn mode_volume_formula() {
        // w0 = 0.5 um, L = 50 um -> V_eff = pi 0.25 * 50 / 4 = 9.82 um^3.
        let v = effective_mode_volume_um3(0.5, 50.0);
        assert!((v - 9.817_477).abs() < 1e-5);
        let g = CavityGeometry::new(50.0, 50.1).unwrap();
        let mode = gaussian_mode(&g, 750.0).unwrap();
        let direct = effective_mode_volume_um3(mode.waist_radius_um, 50.0);
        assert!((mode.effective_mode_volume_um3 - direct).abs() < 1e-12);
    }

    #[test]
    fn waist_shrinks_toward_hemispherical_limit() {
        let mut last = f64::INFINITY;
        for &eps in &[5.0, 2.0, 1.0, 0.5, 0.1, 0.01] {
            let g = CavityGeometry::new(50.0 - eps, 50.0).unwrap();
            let w = gaussian_mode(&g, 750.0).unwrap().waist_radius_um;
            assert!(w < last);
            last = w;
        }
    }

    #[test]
    fn waist_homogeneity() {
        // w0^2 is proportional to lambda sqrt(L (R - L)).
        let g1 = CavityGeometry::new(30.0, 50.0).unwrap();
        let g2 = CavityGeometry::new(60.0, 100.0).unwrap();
        let w1 = gaussian_mode(&g1, 700.0).unwrap().waist_radius_um;
        let w2 = gaussian_mode(&g2, 700.0).unwrap().waist_radius_um;
        // Doubling both lengths doubles sqrt(L(R-L)): w^2 doubles.
        assert!((w2 * w2 / (w1 * w1) - 2.0).abs() < 1e-12);
        let w3 = gaussian_mode(&g1, 1400.0).unwrap().waist_radius_um;
        assert!((w3 * w3 / (w1 * w1) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn divergence_round_trip() {
        let w0 = 0.6;
        let lambda = 750.0;
        let theta = lambda * 1e-3 / (PI * w0);
        let back = mode_waist_from_divergence(theta, lambda).unwrap();
        assert!((back - w0).abs() < 1e-12);
    }

    #[test]
    fn divergence_reference_values() {
        // w0 = lambda = 0.75 um: paraxial theta_C = 1/pi rad = 18.2 deg
        // (the design's quoted ~40 deg opening is a non-paraxial statement).
        let theta_c = mode_waist_from_divergence(1.0 / PI, 750.0).unwrap();
        assert!((theta_c - 0.75).abs() < 1e-12);
        assert!(((1.0 / PI) as f64).to_degrees() - 18.24 < 0.01);
        // w0 = 0.5 um at 750 nm -> 27.3 deg.
        let theta = 0.75 / (PI * 0.5);
        assert!((theta.to_degrees() - 27.35).abs() < 0.01);
        assert!((mode_waist_from_divergence(theta, 750.0).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn hemispherical_spacing_approaches_quarter_fsr() {
        // g2 -> 0: transverse spacing -> c/4L; for L = 60 um that is 1.249 THz.
        let r = 60.0 / (1.0 - 1e-6);
        let g = CavityGeometry::new(60.0, r).unwrap();
        let spacing = transverse_spacing_thz(&g).unwrap();
        let c4l = constants::fsr_thz(60.0) / 2.0;
        assert!((c4l - 1.24914).abs() < 1e-4);
        assert!((spacing - c4l).abs() / c4l < 1e-3);
    }

    #[test]
    fn half_confocal_spacing_closed_form() {
        // g2 = 0.5: arccos(sqrt(0.5))/pi = 1/4.
        let g = CavityGeometry::new(50.0, 100.0).unwrap();
        let spacing = transverse_spacing_thz(&g).unwrap();
        assert!((spacing - constants::fsr_thz(50.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn spectrum_fsr_and_ordering() {
        let g = CavityGeometry::new(50.0, 100.0).unwrap();
        let spec = mode_spectrum(&g, (740.0, 760.0), 3).unwrap();
        assert!(!spec.lines.is_empty());
        for line in &spec.lines {
            let w = constants::wavelength_nm(line.frequency_thz);
            assert!((740.0..=760.0).contains(&w), "{w}");
        }
        // nu(q+1, n) - nu(q, n) = c/2L exactly.
        let fsr = constants::fsr_thz(50.0);
        for a in &spec.lines {
            if let Some(b) = spec.lines.iter().find(|b| b.n == a.n && b.q == a.q + 1) {
                assert!((b.frequency_thz - a.frequency_thz - fsr).abs() < 1e-9);
            }
        }
        // For fixed q, frequency nondecreasing in n.
        for a in &spec.lines {
            for b in &spec.lines {
                if a.q == b.q && b.n > a.n {
                    assert!(b.frequency_thz >= a.frequency_thz);
                }
            }
        }
    }

    #[test]
    fn hemispherical_group_degeneracy() {
        // (q, n) and (q-1, n+2) are degenerate exactly when the Gouy factor
        // is 1/2, i.e. in the g2 -> 0 limit.
        let r = 60.0 / (1.0 - 1e-12);
        let g = CavityGeometry::new(60.0, r).unwrap();
        let f1 = mode_frequency_thz(&g, 10, 0).unwrap();
        let f2 = mode_frequency_thz(&g, 9, 2).unwrap();
        assert!((f1 - f2).abs() / f1 < 1e-6);
        // Away from the limit they split.
        let g = CavityGeometry::new(30.0, 60.0).unwrap();
        let f1 = mode_frequency_thz(&g, 10, 0).unwrap();
        let f2 = mode_frequency_thz(&g, 9, 2).unwrap();
        assert!((f1 - f2).abs() / f1 > 1e-3);
    }

    #[test]
    fn near_planar_limit_degenerate_in_n() {
        // g2 -> 1: arccos(1) = 0, all n collapse onto each q.
        let g = CavityGeometry::new(1e-3, 1e9).unwrap();
        let spacing = transverse_spacing_thz(&g).unwrap();
        assert!(spacing / constants::fsr_thz(1e-3) < 1e-4);
    }
}
