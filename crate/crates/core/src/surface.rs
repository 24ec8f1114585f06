//! Mirror-substrate metrology: height-map power spectral density, sphere
//! fitting with sphericity residuals, band-limited RMS roughness, and the
//! scatter-loss finesse ceiling.
//!
//! PSD convention: heights in nm, pixel pitch in um, spatial frequencies in
//! 1/mm. The 2-D PSD is normalized so its integral over frequency space
//! equals the variance of the detrended map (Parseval, window-compensated).
//! The radially averaged curve keeps that property exactly: each annulus
//! value is the annulus' total power divided by `2 pi f df`, so
//! `integral 2 pi f PSD df` reproduces the variance including the corner
//! region beyond the axis Nyquist frequency.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{ensure_finite, Error, Result};
use crate::numeric::solve_dense;

/// Measured surface: row-major height grid (nm) on a square pixel pitch
/// (um), with an optional validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct HeightMap {
    pub nx: usize,
    pub ny: usize,
    /// Row-major, `heights[row * nx + col]`, nm.
    pub heights: Vec<f64>,
    pub pixel_pitch_um: f64,
    /// `true` = valid pixel. `None` means all pixels valid.
    pub mask: Option<Vec<bool>>,
}

impl HeightMap {
    pub fn new(nx: usize, ny: usize, heights: Vec<f64>, pixel_pitch_um: f64) -> Result<HeightMap> {
        if heights.len() != nx * ny {
            return Err(Error::input("height grid size mismatch"));
        }
        if !(pixel_pitch_um.is_finite() && pixel_pitch_um > 0.0) {
            return Err(Error::input("pixel pitch must be > 0"));
        }
        ensure_finite("heights", &heights)?;
        Ok(HeightMap {
            nx,
            ny,
            heights,
            pixel_pitch_um,
            mask: None,
        })
    }

    pub fn at(&self, col: usize, row: usize) -> f64 {
        self.heights[row * self.nx + col]
    }

    /// Builds from a function of physical coordinates (um), mainly for
    /// synthetic test surfaces.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        pixel_pitch_um: f64,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<HeightMap> {
        let mut heights = Vec::with_capacity(nx * ny);
        for row in 0..ny {
            for col in 0..nx {
                heights.push(f(col as f64 * pixel_pitch_um, row as f64 * pixel_pitch_um));
            }
        }
        HeightMap::new(nx, ny, heights, pixel_pitch_um)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Window {
    None,
    Hann,
}

/// Radially averaged isotropic PSD. Frequencies in 1/mm, values in
/// nm^2 mm^2.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsdCurve {
    pub spatial_frequency_per_mm: Vec<f64>,
    pub psd_nm2_mm2: Vec<f64>,
    pub window: Window,
    /// Variance of the detrended (and window-compensated) map, nm^2.
    pub variance_nm2: f64,
}

/// Removes the best-fit plane `a + b x + c y` in place.
fn detrend(heights: &mut [f64], nx: usize, ny: usize) {
    // Normal equations for the 3-parameter plane over the full grid.
    let n = (nx * ny) as f64;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    let (mut sz, mut sxz, mut syz) = (0.0, 0.0, 0.0);
    for row in 0..ny {
        for col in 0..nx {
            let (x, y, z) = (col as f64, row as f64, heights[row * nx + col]);
            sx += x;
            sy += y;
            sxx += x * x;
            syy += y * y;
            sxy += x * y;
            sz += z;
            sxz += x * z;
            syz += y * z;
        }
    }
    let mut a = vec![n, sx, sy, sx, sxx, sxy, sy, sxy, syy];
    let mut b = vec![sz, sxz, syz];
    if solve_dense(&mut a, &mut b, 3).is_err() {
        return;
    }
    for row in 0..ny {
        for col in 0..nx {
            heights[row * nx + col] -= b[0] + b[1] * col as f64 + b[2] * row as f64;
        }
    }
}

fn fft_2d(data: &mut [Complex64], nx: usize, ny: usize) {
    let mut planner = FftPlanner::new();
    let fft_row = planner.plan_fft_forward(nx);
    for row in data.chunks_exact_mut(nx) {
        fft_row.process(row);
    }
    let fft_col = planner.plan_fft_forward(ny);
    let mut column = vec![Complex64::new(0.0, 0.0); ny];
    for col in 0..nx {
        for row in 0..ny {
            column[row] = data[row * nx + col];
        }
        fft_col.process(&mut column);
        for row in 0..ny {
            data[row * nx + col] = column[row];
        }
    }
}

/// Isotropic PSD of a complete rectangular height map: detrend, optional
/// Hann window (amplitude-compensated), 2-D DFT, annular average in annuli
/// one frequency bin wide.
pub fn compute_psd(map: &HeightMap, window: Window) -> Result<PsdCurve> {
    if map.mask.as_ref().is_some_and(|m| m.iter().any(|&v| !v)) {
        return Err(Error::input(
            "spectral analysis requires a complete, mask-free grid",
        ));
    }
    if map.nx < 16 || map.ny < 16 {
        return Err(Error::input("grid must be at least 16 x 16"));
    }

    let (nx, ny) = (map.nx, map.ny);
    let mut h = map.heights.clone();
    detrend(&mut h, nx, ny);

    // Window and its power compensation.
    let mut w2_mean = 1.0;
    if window == Window::Hann {
        let wx: Vec<f64> = (0..nx)
            .map(|i| {
                0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (nx - 1) as f64).cos())
            })
            .collect();
        let wy: Vec<f64> = (0..ny)
            .map(|j| {
                0.5 * (1.0 - (2.0 * std::f64::consts::PI * j as f64 / (ny - 1) as f64).cos())
            })
            .collect();
        let mut sum_w2 = 0.0;
        for row in 0..ny {
            for col in 0..nx {
                let w = wx[col] * wy[row];
                h[row * nx + col] *= w;
                sum_w2 += w * w;
            }
        }
        w2_mean = sum_w2 / (nx * ny) as f64;
    }

    let variance = h.iter().map(|v| v * v).sum::<f64>() / (nx * ny) as f64 / w2_mean;

    let mut data: Vec<Complex64> = h.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_2d(&mut data, nx, ny);

    // Physical scales in mm.
    let pitch_mm = map.pixel_pitch_um * 1e-3;
    let dfx = 1.0 / (nx as f64 * pitch_mm);
    let dfy = 1.0 / (ny as f64 * pitch_mm);
    let df = dfx.min(dfy);
    // PSD_2d = |H|^2 pitch^2 / (Nx Ny), compensated for the window power.
    let norm = pitch_mm * pitch_mm / ((nx * ny) as f64 * w2_mean);

    // Annular accumulation over the full frequency rectangle (corners
    // included) so the integral identity holds exactly.
    let f_corner = ((nx as f64 / 2.0 * dfx).powi(2) + (ny as f64 / 2.0 * dfy).powi(2)).sqrt();
    let n_annuli = (f_corner / df).ceil() as usize + 1;
    let mut power = vec![0.0; n_annuli];
    for row in 0..ny {
        let fy = if row <= ny / 2 {
            row as f64 * dfy
        } else {
            (row as f64 - ny as f64) * dfy
        };
        for col in 0..nx {
            if row == 0 && col == 0 {
                continue; // DC removed by detrending anyway
            }
            let fx = if col <= nx / 2 {
                col as f64 * dfx
            } else {
                (col as f64 - nx as f64) * dfx
            };
            let f = (fx * fx + fy * fy).sqrt();
            let k = ((f / df).round() as usize).min(n_annuli - 1);
            power[k] += data[row * nx + col].norm_sqr() * norm * dfx * dfy;
        }
    }

    let mut freqs = Vec::new();
    let mut values = Vec::new();
    for (k, &p) in power.iter().enumerate().skip(1) {
        let f = k as f64 * df;
        freqs.push(f);
        values.push(p / (2.0 * std::f64::consts::PI * f * df));
    }
    Ok(PsdCurve {
        spatial_frequency_per_mm: freqs,
        psd_nm2_mm2: values,
        window,
        variance_nm2: variance,
    })
}

/// Band-limited RMS roughness from an isotropic PSD curve:
/// `sigma = sqrt( integral of 2 pi f PSD(f) df over the band )` by the
/// trapezoid rule.
pub fn rms_in_band(psd: &PsdCurve, f_low_per_mm: f64, f_high_per_mm: f64) -> Result<f64> {
    ensure_finite("band", &[f_low_per_mm, f_high_per_mm])?;
    if !(f_low_per_mm >= 0.0 && f_high_per_mm > f_low_per_mm) {
        return Err(Error::input("band must be ordered with positive width"));
    }
    let fs = &psd.spatial_frequency_per_mm;
    if fs.is_empty() || f_low_per_mm > fs[fs.len() - 1] || f_high_per_mm < fs[0] {
        return Err(Error::input("band lies outside the PSD support"));
    }
    let pts: Vec<(f64, f64)> = fs
        .iter()
        .zip(&psd.psd_nm2_mm2)
        .filter(|(&f, _)| f >= f_low_per_mm && f <= f_high_per_mm)
        .map(|(&f, &p)| (f, 2.0 * std::f64::consts::PI * f * p))
        .collect();
    if pts.len() < 2 {
        return Err(Error::input("band contains fewer than two PSD points"));
    }
    Ok(crate::numeric::trapezoid(&pts).max(0.0).sqrt())
}

/// Least-squares sphere fit over a circular region of a height map.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SphereFit {
    pub fitted_radius_um: f64,
    /// Sphere center (x, y, z) in um; z in the height coordinate.
    pub center_um: (f64, f64, f64),
    pub rms_residual_nm: f64,
    pub max_abs_residual_nm: f64,
    pub fit_region_diameter_um: f64,
    /// True when the surface curves away from +z (a dimple in a height map).
    pub concave_up: bool,
}

/// Fits a sphere to the region of `map` within `region_diameter_um` of
/// `region_center_um` (in-plane coordinates, um). Linearized algebraic fit
/// refined by one Gauss-Newton pass; residuals are measured along z over the
/// fit region only.
pub fn fit_sphere(
    map: &HeightMap,
    region_center_um: (f64, f64),
    region_diameter_um: f64,
) -> Result<SphereFit> {
    ensure_finite(
        "fit region",
        &[region_center_um.0, region_center_um.1, region_diameter_um],
    )?;
    if region_diameter_um <= 0.0 {
        return Err(Error::input("fit region diameter must be > 0"));
    }
    let pitch = map.pixel_pitch_um;
    let r_region = region_diameter_um / 2.0;

    // Collect region points in um.
    let mut pts: Vec<(f64, f64, f64)> = Vec::new();
    for row in 0..map.ny {
        for col in 0..map.nx {
            if let Some(mask) = &map.mask {
                if !mask[row * map.nx + col] {
                    continue;
                }
            }
            let x = col as f64 * pitch;
            let y = row as f64 * pitch;
            if (x - region_center_um.0).hypot(y - region_center_um.1) <= r_region {
                pts.push((x, y, map.at(col, row) * 1e-3));
            }
        }
    }
    if pts.len() < 100 {
        return Err(Error::input(format!(
            "fit region holds {} pixels; need at least 100",
            pts.len()
        )));
    }

    // Algebraic fit: x^2+y^2+z^2 = 2 a x + 2 b y + 2 c z + d.
    let mut ata = vec![0.0; 16];
    let mut atb = vec![0.0; 4];
    for &(x, y, z) in &pts {
        let row = [2.0 * x, 2.0 * y, 2.0 * z, 1.0];
        let rhs = x * x + y * y + z * z;
        for i in 0..4 {
            atb[i] += row[i] * rhs;
            for j in 0..4 {
                ata[i * 4 + j] += row[i] * row[j];
            }
        }
    }
    if solve_dense(&mut ata, &mut atb, 4).is_err() {
        return Err(Error::analysis(
            "sphere fit degenerate (flat region): fitted radius is infinite",
        ));
    }
    let (mut a, mut b, mut c) = (atb[0], atb[1], atb[2]);
    let r2 = atb[3] + a * a + b * b + c * c;
    if !(r2.is_finite() && r2 > 0.0) {
        return Err(Error::analysis(
            "sphere fit degenerate (flat region): fitted radius is infinite",
        ));
    }
    let mut radius = r2.sqrt();

    const FLAT_RADIUS_UM: f64 = 1e7; // 10 m: flatter than any real dimple
    if radius > FLAT_RADIUS_UM {
        return Err(Error::analysis(format!(
            "sphere fit degenerate (flat region): fitted radius {radius:.3e} um is effectively infinite"
        )));
    }

    // One Gauss-Newton pass on (a, b, c, R) against radial distances.
    {
        let mut jtj = vec![0.0; 16];
        let mut jtr = vec![0.0; 4];
        for &(x, y, z) in &pts {
            let dx = x - a;
            let dy = y - b;
            let dz = z - c;
            let dist = (dx * dx + dy * dy + dz * dz).sqrt().max(1e-12);
            let res = dist - radius;
            let row = [-dx / dist, -dy / dist, -dz / dist, -1.0];
            for i in 0..4 {
                jtr[i] += row[i] * res;
                for j in 0..4 {
                    jtj[i * 4 + j] += row[i] * row[j];
                }
            }
        }
        let mut step: Vec<f64> = jtr.iter().map(|v| -v).collect();
        if solve_dense(&mut jtj, &mut step, 4).is_ok() {
            a += step[0];
            b += step[1];
            c += step[2];
            radius += step[3];
        }
    }

    // Residuals along z against the matching hemisphere branch.
    let z_mean = pts.iter().map(|p| p.2).sum::<f64>() / pts.len() as f64;
    let lower_branch = c > z_mean;
    let mut ss = 0.0;
    let mut max_abs: f64 = 0.0;
    let mut n_res = 0usize;
    for &(x, y, z) in &pts {
        let rho2 = (x - a) * (x - a) + (y - b) * (y - b);
        let under = radius * radius - rho2;
        if under <= 0.0 {
            continue;
        }
        let z_sphere = if lower_branch {
            c - under.sqrt()
        } else {
            c + under.sqrt()
        };
        let res_nm = (z - z_sphere) * 1e3;
        ss += res_nm * res_nm;
        max_abs = max_abs.max(res_nm.abs());
        n_res += 1;
    }
    if n_res == 0 {
        return Err(Error::analysis("no fit-region point projects onto the sphere"));
    }

    Ok(SphereFit {
        fitted_radius_um: radius,
        center_um: (a, b, c),
        rms_residual_nm: (ss / n_res as f64).sqrt(),
        max_abs_residual_nm: max_abs,
        fit_region_diameter_um: region_diameter_um,
        concave_up: lower_branch,
    })
}

/// Scatter-loss budget for a cavity round trip.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatterEstimate {
    pub rms_roughness_nm: f64,
    /// Total integrated scatter per reflective surface, `(4 pi sigma / lambda)^2`.
    pub total_integrated_scatter: f64,
    /// Mean per-mirror loss: transmission plus scatter.
    pub per_bounce_loss: f64,
    /// `2 pi / (sum of transmissions + per-mirror scatter)` for one round trip.
    pub finesse_ceiling: f64,
}

/// Normal-incidence total-integrated-scatter budget: each mirror in
/// `mirror_transmissions` contributes its transmission plus
/// `TIS = (4 pi sigma / lambda)^2` to the round-trip loss, and the finesse
/// ceiling is `2 pi` over that total.
pub fn scatter_budget(
    sigma_nm: f64,
    wavelength_nm: f64,
    mirror_transmissions: &[f64],
) -> Result<ScatterEstimate> {
    ensure_finite("scatter", &[sigma_nm, wavelength_nm])?;
    ensure_finite("transmissions", mirror_transmissions)?;
    if sigma_nm < 0.0 {
        return Err(Error::input("rms roughness must be >= 0"));
    }
    if wavelength_nm <= 0.0 {
        return Err(Error::input("wavelength must be > 0"));
    }
    if mirror_transmissions.is_empty() {
        return Err(Error::input("need at least one mirror transmission"));
    }
    if mirror_transmissions.iter().any(|&t| !(0.0 < t && t < 1.0)) {
        return Err(Error::input("mirror transmissions must lie in (0, 1)"));
    }
    let tis = (4.0 * std::f64::consts::PI * sigma_nm / wavelength_nm).powi(2);
    let n = mirror_transmissions.len() as f64;
    let t_sum: f64 = mirror_transmissions.iter().sum();
    let total_loss = t_sum + n * tis;
    Ok(ScatterEstimate {
        rms_roughness_nm: sigma_nm,
        total_integrated_scatter: tis,
        per_bounce_loss: t_sum / n + tis,
        finesse_ceiling: 2.0 * std::f64::consts::PI / total_loss,
    })
}
