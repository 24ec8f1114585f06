//! Transfer-matrix response of multilayer dielectric stacks.
//!
//! Characteristic (Abeles) 2x2 matrices per layer with the transverse
//! wavevector conserved across interfaces, so absorbing layers and
//! evanescent orders are handled uniformly through a complex longitudinal
//! wavevector.
//!
//! Sign conventions (used consistently by the whole crate): time dependence
//! `exp(-i w t)`, absorbing media have `Im(n) >= 0`, the reflection phase is
//! `arg(r)` reported in `(-pi, pi]`. The TM amplitude follows the admittance
//! convention, which coincides with TE at normal incidence.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{ensure_finite, Error, Result};
use crate::numeric::bisect_root;

/// Refractive index of a layer: constant or tabulated over wavelength with
/// linear interpolation (clamped outside the table).
#[derive(Debug, Clone, PartialEq)]
pub enum IndexModel {
    Constant(Complex64),
    /// `(wavelength_nm, index)` pairs, strictly increasing in wavelength.
    Table(Vec<(f64, Complex64)>),
}

impl IndexModel {
    pub fn at(&self, wavelength_nm: f64) -> Complex64 {
        match self {
            IndexModel::Constant(n) => *n,
            IndexModel::Table(points) => {
                if wavelength_nm <= points[0].0 {
                    return points[0].1;
                }
                if wavelength_nm >= points[points.len() - 1].0 {
                    return points[points.len() - 1].1;
                }
                let i = points.partition_point(|p| p.0 <= wavelength_nm);
                let (w0, n0) = points[i - 1];
                let (w1, n1) = points[i];
                let t = (wavelength_nm - w0) / (w1 - w0);
                n0 + (n1 - n0) * t
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let check = |n: Complex64| -> Result<()> {
            if !n.re.is_finite() || !n.im.is_finite() {
                return Err(Error::input("refractive index must be finite"));
            }
            if n.re <= 0.0 {
                return Err(Error::input("refractive index real part must be > 0"));
            }
            if n.im < 0.0 {
                return Err(Error::input(
                    "refractive index imaginary part must be >= 0 (absorption)",
                ));
            }
            Ok(())
        };
        match self {
            IndexModel::Constant(n) => check(*n),
            IndexModel::Table(points) => {
                if points.len() < 2 {
                    return Err(Error::input("index table needs at least two points"));
                }
                if !points.windows(2).all(|w| w[1].0 > w[0].0) {
                    return Err(Error::input("index table wavelengths must increase"));
                }
                points.iter().try_for_each(|&(w, n)| {
                    if !(w.is_finite() && w > 0.0) {
                        return Err(Error::input("index table wavelength must be > 0"));
                    }
                    check(n)
                })
            }
        }
    }
}

/// One physical layer: index model plus thickness in nm.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub index: IndexModel,
    pub thickness_nm: f64,
}

impl Layer {
    pub fn new(index: Complex64, thickness_nm: f64) -> Layer {
        Layer {
            index: IndexModel::Constant(index),
            thickness_nm,
        }
    }

    pub fn lossless(n: f64, thickness_nm: f64) -> Layer {
        Layer::new(Complex64::new(n, 0.0), thickness_nm)
    }

    fn validate(&self) -> Result<()> {
        if !(self.thickness_nm.is_finite() && self.thickness_nm > 0.0) {
            return Err(Error::input("layer thickness must be > 0"));
        }
        self.index.validate()
    }
}

/// Ordered multilayer: incident side first, semi-infinite substrate last.
/// An empty layer list is a bare interface (or no interface at all when the
/// bounding indices match).
#[derive(Debug, Clone, PartialEq)]
pub struct LayerStack {
    pub incident_index: f64,
    pub layers: Vec<Layer>,
    pub substrate_index: f64,
}

/// Incident plane wave: vacuum wavelength, incidence angle in the incident
/// medium, and polarization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveQuery {
    pub wavelength_nm: f64,
    pub angle_rad: f64,
    pub polarization: Polarization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    TE,
    TM,
}

impl PlaneWaveQuery {
    pub fn normal(wavelength_nm: f64, polarization: Polarization) -> Self {
        PlaneWaveQuery {
            wavelength_nm,
            angle_rad: 0.0,
            polarization,
        }
    }

    fn validate(&self) -> Result<()> {
        ensure_finite("query", &[self.wavelength_nm, self.angle_rad])?;
        if self.wavelength_nm <= 0.0 {
            return Err(Error::input("wavelength must be > 0"));
        }
        if !(0.0..PI / 2.0).contains(&self.angle_rad) {
            return Err(Error::input("incidence angle must lie in [0, pi/2)"));
        }
        Ok(())
    }
}

/// Amplitude and power response of a stack for one plane-wave query.
#[derive(Debug, Clone, Copy)]
pub struct StackResponse {
    pub r: Complex64,
    pub t: Complex64,
    /// Power reflectance |r|^2.
    pub reflectance: f64,
    /// Power transmittance including the index/angle flux factor.
    pub transmittance: f64,
    /// arg(r) in (-pi, pi].
    pub reflection_phase: f64,
}

/// `sin(delta)/q` with the removable singularity at `q -> 0` filled in.
fn sin_over_q(delta: Complex64, q: Complex64, k0_d: f64) -> Complex64 {
    if delta.norm() < 1e-8 {
        // sin(q k0 d)/q = k0 d (1 - (q k0 d)^2/6 + ...)
        Complex64::new(k0_d, 0.0) * (Complex64::new(1.0, 0.0) - delta * delta / 6.0)
    } else {
        delta.sin() / q
    }
}

impl LayerStack {
    pub fn new(incident_index: f64, layers: Vec<Layer>, substrate_index: f64) -> LayerStack {
        LayerStack {
            incident_index,
            layers,
            substrate_index,
        }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("bounding indices", &[self.incident_index, self.substrate_index])?;
        if self.incident_index < 1.0 || self.substrate_index < 1.0 {
            return Err(Error::input("incident and substrate indices must be >= 1"));
        }
        self.layers.iter().try_for_each(Layer::validate)
    }

    /// Every layer thickness multiplied by `factor`; indices unchanged.
    pub fn scale_thicknesses(&self, factor: f64) -> LayerStack {
        LayerStack {
            incident_index: self.incident_index,
            substrate_index: self.substrate_index,
            layers: self
                .layers
                .iter()
                .map(|l| Layer {
                    index: l.index.clone(),
                    thickness_nm: l.thickness_nm * factor,
                })
                .collect(),
        }
    }

    /// Total geometric thickness in nm.
    pub fn total_thickness_nm(&self) -> f64 {
        self.layers.iter().map(|l| l.thickness_nm).sum()
    }

    /// Complex reflection/transmission of the stack for one query.
    pub fn response(&self, query: &PlaneWaveQuery) -> Result<StackResponse> {
        self.validate()?;
        query.validate()?;

        let lambda = query.wavelength_nm;
        let k0 = 2.0 * PI / lambda;
        // Conserved transverse slowness n0 sin(theta).
        let beta = self.incident_index * query.angle_rad.sin();
        let beta2 = Complex64::new(beta * beta, 0.0);

        // q = n cos(theta) = sqrt(n^2 - beta^2), branch with Im(q) >= 0 so
        // evanescent waves decay under exp(-i w t).
        let q_of = |n: Complex64| -> Complex64 {
            let q = (n * n - beta2).sqrt();
            if q.im < 0.0 {
                -q
            } else {
                q
            }
        };
        let admittance = |n: Complex64, q: Complex64| -> Complex64 {
            match query.polarization {
                Polarization::TE => q,
                Polarization::TM => n * n / q,
            }
        };

        let n_in = Complex64::new(self.incident_index, 0.0);
        let n_sub = Complex64::new(self.substrate_index, 0.0);
        let q_in = q_of(n_in);
        let q_sub = q_of(n_sub);
        let eta_in = admittance(n_in, q_in);
        let eta_sub = admittance(n_sub, q_sub);
        if eta_in.norm() < 1e-14 {
            return Err(Error::input("grazing incidence: vanishing admittance"));
        }

        // Characteristic matrix product, accumulated as [B; C] = M [1; eta_sub].
        let mut b = Complex64::new(1.0, 0.0);
        let mut c = eta_sub;
        for layer in self.layers.iter().rev() {
            let n = layer.index.at(lambda);
            let q = q_of(n);
            let k0_d = k0 * layer.thickness_nm;
            let delta = q * k0_d;
            let cos_d = delta.cos();
            let s_over_q = sin_over_q(delta, q, k0_d);
            // m01 = -i sin(d)/eta, m10 = -i eta sin(d); the -i sign goes with
            // the exp(-i w t) convention.
            let neg_i = -Complex64::i();
            let (m01, m10) = match query.polarization {
                Polarization::TE => (neg_i * s_over_q, neg_i * q * delta.sin()),
                Polarization::TM => (
                    neg_i * delta.sin() * q / (n * n),
                    neg_i * n * n * s_over_q,
                ),
            };
            let nb = cos_d * b + m01 * c;
            let nc = m10 * b + cos_d * c;
            b = nb;
            c = nc;
        }

        let denom = eta_in * b + c;
        let r = (eta_in * b - c) / denom;
        let t = 2.0 * eta_in / denom;
        let reflectance = r.norm_sqr().min(1.0);
        let transmittance = 4.0 * eta_in.re * eta_sub.re / denom.norm_sqr();
        let mut phase = r.arg();
        if phase <= -PI {
            phase += 2.0 * PI;
        }
        Ok(StackResponse {
            r,
            t,
            reflectance,
            transmittance,
            reflection_phase: phase,
        })
    }

    /// Power reflectance only (the common case in sweeps).
    pub fn reflectance(&self, query: &PlaneWaveQuery) -> Result<f64> {
        Ok(self.response(query)?.reflectance)
    }

    /// Data-parallel response over many queries.
    pub fn sweep(&self, queries: &[PlaneWaveQuery]) -> Result<Vec<StackResponse>> {
        queries.par_iter().map(|q| self.response(q)).collect()
    }
}

/// Quarter-wave Bragg stack centered at `center_wavelength_nm` with air as
/// the incident medium.
///
/// Layer convention (mirrors the stack file documentation): with
/// `high_first = true` the stack is `(HL)^N H` — it starts with a high-index
/// layer on the incident side and a terminating high-index layer is appended
/// so the substrate also sees high index (`2N + 1` layers). With
/// `high_first = false` the stack is `(LH)^N` (`2N` layers).
pub fn quarter_wave_stack(
    n_high: f64,
    n_low: f64,
    substrate_index: f64,
    center_wavelength_nm: f64,
    num_pairs: usize,
    high_first: bool,
) -> Result<LayerStack> {
    ensure_finite(
        "quarter-wave parameters",
        &[n_high, n_low, substrate_index, center_wavelength_nm],
    )?;
    if n_high <= 1.0 || n_low <= 1.0 {
        return Err(Error::input("quarter-wave indices must be > 1"));
    }
    if substrate_index < 1.0 {
        return Err(Error::input("substrate index must be >= 1"));
    }
    if num_pairs == 0 {
        return Err(Error::input("num_pairs must be >= 1"));
    }
    if center_wavelength_nm <= 0.0 {
        return Err(Error::input("center wavelength must be > 0"));
    }

    let t_high = center_wavelength_nm / (4.0 * n_high);
    let t_low = center_wavelength_nm / (4.0 * n_low);
    let high = || Layer::lossless(n_high, t_high);
    let low = || Layer::lossless(n_low, t_low);

    let mut layers = Vec::with_capacity(2 * num_pairs + 1);
    for _ in 0..num_pairs {
        if high_first {
            layers.push(high());
            layers.push(low());
        } else {
            layers.push(low());
            layers.push(high());
        }
    }
    if high_first {
        layers.push(high());
    }
    Ok(LayerStack::new(1.0, layers, substrate_index))
}

/// Maximal contiguous wavelength interval around the reflectance maximum
/// where `R >= threshold`, with the interior endpoints refined by bisection
/// to 0.01 nm. Returns `None` when the threshold is never reached.
pub fn stop_band(
    stack: &LayerStack,
    angle_rad: f64,
    polarization: Polarization,
    reflectance_threshold: f64,
    scan_range_nm: (f64, f64),
    scan_step_nm: f64,
) -> Result<Option<(f64, f64)>> {
    let (lo, hi) = scan_range_nm;
    ensure_finite("scan range", &[lo, hi, scan_step_nm, reflectance_threshold])?;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::input("scan range must be ordered and positive"));
    }
    if scan_step_nm <= 0.0 {
        return Err(Error::input("scan step must be > 0"));
    }
    if !(0.0 < reflectance_threshold && reflectance_threshold < 1.0) {
        return Err(Error::input("reflectance threshold must lie in (0, 1)"));
    }

    let n = ((hi - lo) / scan_step_nm).ceil() as usize + 1;
    let lambdas: Vec<f64> = (0..n).map(|i| (lo + i as f64 * scan_step_nm).min(hi)).collect();
    let reflectances: Vec<f64> = lambdas
        .par_iter()
        .map(|&w| {
            stack.reflectance(&PlaneWaveQuery {
                wavelength_nm: w,
                angle_rad,
                polarization,
            })
        })
        .collect::<Result<_>>()?;

    let (peak, peak_r) = reflectances
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, &r)| (i, r))
        .expect("non-empty scan");
    if peak_r < reflectance_threshold {
        return Ok(None);
    }

    let mut left = peak;
    while left > 0 && reflectances[left - 1] >= reflectance_threshold {
        left -= 1;
    }
    let mut right = peak;
    while right + 1 < lambdas.len() && reflectances[right + 1] >= reflectance_threshold {
        right += 1;
    }

    let r_at = |w: f64| -> f64 {
        stack
            .reflectance(&PlaneWaveQuery {
                wavelength_nm: w,
                angle_rad,
                polarization,
            })
            .unwrap_or(0.0)
    };

    let lambda_min = if left == 0 {
        lambdas[0]
    } else {
        bisect_root(
            |w| r_at(w) - reflectance_threshold,
            lambdas[left - 1],
            lambdas[left],
            0.01,
        )
        .unwrap_or(lambdas[left])
    };
    let lambda_max = if right + 1 == lambdas.len() {
        lambdas[right]
    } else {
        bisect_root(
            |w| r_at(w) - reflectance_threshold,
            lambdas[right],
            lambdas[right + 1],
            0.01,
        )
        .unwrap_or(lambdas[right])
    };
    Ok(Some((lambda_min, lambda_max)))
}

/// Finesse of a two-mirror cavity: `F = pi sqrt(rho) / (1 - rho)` with
/// `rho = sqrt(R1 R2 (1 - loss))` the round-trip amplitude factor.
pub fn finesse_from_mirrors(r1: f64, r2: f64, round_trip_intensity_loss: f64) -> Result<f64> {
    ensure_finite("finesse inputs", &[r1, r2, round_trip_intensity_loss])?;
    if !(0.0 < r1 && r1 < 1.0 && 0.0 < r2 && r2 < 1.0) {
        return Err(Error::input("mirror reflectivities must lie in (0, 1)"));
    }
    if !(0.0..1.0).contains(&round_trip_intensity_loss) {
        return Err(Error::input("round-trip loss must lie in [0, 1)"));
    }
    let rho = (r1 * r2 * (1.0 - round_trip_intensity_loss)).sqrt();
    if rho >= 1.0 {
        return Err(Error::input("round-trip amplitude factor must be < 1"));
    }
    Ok(finesse_from_round_trip(rho))
}

/// Finesse from the round-trip amplitude factor directly.
pub fn finesse_from_round_trip(rho: f64) -> f64 {
    PI * rho.sqrt() / (1.0 - rho)
}

/// Inverse of [`finesse_from_round_trip`], solved by bisection to 1e-12.
pub fn round_trip_from_finesse(finesse: f64) -> Result<f64> {
    if !(finesse.is_finite() && finesse > 0.0) {
        return Err(Error::input("finesse must be > 0"));
    }
    bisect_root(|rho| finesse_from_round_trip(rho) - finesse, 1e-12, 1.0 - 1e-15, 1e-14)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TAU: f64 = 2.0 * PI;

    /// Independent Fresnel single-interface oracle in the admittance sign
    /// convention (TE and TM coincide at normal incidence).
    fn fresnel_oracle(n1: f64, n2: f64, angle: f64, pol: Polarization) -> (Complex64, f64, f64) {
        let c1 = Complex64::new(angle.cos(), 0.0);
        let s1 = angle.sin();
        let s2 = Complex64::new(n1 * s1 / n2, 0.0);
        let c2 = (Complex64::new(1.0, 0.0) - s2 * s2).sqrt();
        let (eta1, eta2) = match pol {
            Polarization::TE => (n1 * c1, n2 * c2),
            Polarization::TM => (Complex64::new(n1, 0.0) / c1, Complex64::new(n2, 0.0) / c2),
        };
        let r = (eta1 - eta2) / (eta1 + eta2);
        let t_pow = 4.0 * eta1.re * eta2.re / (eta1 + eta2).norm_sqr();
        (r, r.norm_sqr(), t_pow)
    }

    #[test]
    fn empty_stack_no_interface() {
        let stack = LayerStack::new(1.0, vec![], 1.0);
        let resp = stack
            .response(&PlaneWaveQuery::normal(750.0, Polarization::TE))
            .unwrap();
        assert!(resp.r.norm() < 1e-15);
        assert!(resp.reflectance < 1e-15);
        assert!((resp.transmittance - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bare_interface_matches_fresnel_normal() {
        let stack = LayerStack::new(1.0, vec![], 1.5);
        let resp = stack
            .response(&PlaneWaveQuery::normal(633.0, Polarization::TE))
            .unwrap();
        // R = ((1-1.5)/(1+1.5))^2 = 0.04
        assert!((resp.reflectance - 0.04).abs() < 1e-15);
        assert!((resp.transmittance - 0.96).abs() < 1e-15);
    }

    #[test]
    fn bare_interface_matches_fresnel_over_angles() {
        let stack = LayerStack::new(1.0, vec![], 1.5);
        for pol in [Polarization::TE, Polarization::TM] {
            for k in 0..30 {
                let angle = k as f64 * (PI / 2.0) / 30.0;
                let resp = stack
                    .response(&PlaneWaveQuery {
                        wavelength_nm: 633.0,
                        angle_rad: angle,
                        polarization: pol,
                    })
                    .unwrap();
                let (r, rr, tt) = fresnel_oracle(1.0, 1.5, angle, pol);
                assert!((resp.r - r).norm() < 1e-12, "amplitude {pol:?} {angle}");
                assert!((resp.reflectance - rr).abs() < 1e-12);
                assert!((resp.transmittance - tt).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn te_tm_degenerate_at_normal_incidence() {
        let stack = quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 5, true).unwrap();
        let te = stack
            .response(&PlaneWaveQuery::normal(712.0, Polarization::TE))
            .unwrap();
        let tm = stack
            .response(&PlaneWaveQuery::normal(712.0, Polarization::TM))
            .unwrap();
        assert!((te.r - tm.r).norm() < 1e-12);
        assert!((te.transmittance - tm.transmittance).abs() < 1e-12);
    }

    #[test]
    fn quarter_wave_matches_closed_form() {
        // (HL)^N H on substrate: Y = (nH/nL)^(2N) nH^2 / ns at the center
        // wavelength, R = ((1-Y)/(1+Y))^2.
        let (nh, nl, ns, n_pairs) = (2.3, 1.45, 1.5, 8);
        let stack = quarter_wave_stack(nh, nl, ns, 750.0, n_pairs, true).unwrap();
        assert_eq!(stack.layers.len(), 2 * n_pairs + 1);
        let y = (nh / nl).powi(2 * n_pairs as i32) * nh * nh / ns;
        let expected = ((1.0 - y) / (1.0 + y)).powi(2);
        let resp = stack
            .response(&PlaneWaveQuery::normal(750.0, Polarization::TE))
            .unwrap();
        assert!(
            (resp.reflectance - expected).abs() < 1e-10,
            "got {} want {}",
            resp.reflectance,
            expected
        );
    }

    #[test]
    fn quarter_wave_thickness_definition() {
        let stack = quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 1, true).unwrap();
        assert!((stack.layers[0].thickness_nm - 750.0 / (4.0 * 2.3)).abs() < 1e-12);
        assert!((stack.layers[0].thickness_nm - 81.52).abs() < 0.01);
        assert!((stack.layers[1].thickness_nm - 750.0 / (4.0 * 1.45)).abs() < 1e-12);
    }

    #[test]
    fn quarter_wave_rejects_zero_pairs() {
        assert!(quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 0, true).is_err());
    }

    #[test]
    fn lossless_energy_conservation() {
        let stack = LayerStack::new(
            1.0,
            vec![
                Layer::lossless(2.3, 93.0),
                Layer::lossless(1.45, 140.0),
                Layer::lossless(1.9, 55.0),
            ],
            1.52,
        );
        for pol in [Polarization::TE, Polarization::TM] {
            for k in 0..40 {
                let angle = k as f64 * 1.5 / 40.0;
                let resp = stack
                    .response(&PlaneWaveQuery {
                        wavelength_nm: 700.0,
                        angle_rad: angle,
                        polarization: pol,
                    })
                    .unwrap();
                assert!(
                    (resp.reflectance + resp.transmittance - 1.0).abs() < 1e-12,
                    "{pol:?} angle {angle}"
                );
            }
        }
    }

    #[test]
    fn absorbing_layer_dissipates() {
        let stack = LayerStack::new(
            1.0,
            vec![Layer::new(Complex64::new(2.0, 0.05), 200.0)],
            1.5,
        );
        let resp = stack
            .response(&PlaneWaveQuery::normal(750.0, Polarization::TE))
            .unwrap();
        assert!(resp.reflectance + resp.transmittance < 1.0 - 1e-6);
    }

    #[test]
    fn total_internal_reflection_is_lossless() {
        // Glass to air above the critical angle: R = 1 exactly (evanescent
        // transmission carries no power).
        let stack = LayerStack::new(1.5, vec![Layer::lossless(1.2, 350.0)], 1.0);
        let resp = stack
            .response(&PlaneWaveQuery {
                wavelength_nm: 750.0,
                angle_rad: 60f64.to_radians(),
                polarization: Polarization::TE,
            })
            .unwrap();
        assert!((resp.reflectance - 1.0).abs() < 1e-12);
        assert!(resp.transmittance < 1e-12);
    }

    #[test]
    fn thickness_scaling_shifts_wavelength() {
        // response(scale(stack, f), lambda) == response(stack, lambda/f)
        // for dispersionless indices.
        let stack = quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 4, true).unwrap();
        let f = 1.17;
        let scaled = stack.scale_thicknesses(f);
        for &lambda in &[640.0, 700.0, 750.0, 820.0, 900.0] {
            let a = scaled
                .response(&PlaneWaveQuery::normal(lambda, Polarization::TE))
                .unwrap();
            let b = stack
                .response(&PlaneWaveQuery::normal(lambda / f, Polarization::TE))
                .unwrap();
            assert!((a.r - b.r).norm() < 1e-10, "lambda {lambda}");
            assert!((a.reflectance - b.reflectance).abs() < 1e-10);
        }
    }

    #[test]
    fn reflectance_is_continuous_in_wavelength() {
        let stack = quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 6, true).unwrap();
        for k in 0..60 {
            let lambda = 600.0 + 5.0 * k as f64;
            let a = stack
                .reflectance(&PlaneWaveQuery::normal(lambda, Polarization::TE))
                .unwrap();
            let b = stack
                .reflectance(&PlaneWaveQuery::normal(lambda + 0.001, Polarization::TE))
                .unwrap();
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn stop_band_none_for_bare_interface() {
        let stack = LayerStack::new(1.0, vec![], 1.5);
        let band = stop_band(&stack, 0.0, Polarization::TE, 0.95, (600.0, 900.0), 0.5).unwrap();
        assert!(band.is_none());
    }

    #[test]
    fn stop_band_scales_with_thickness() {
        let stack = quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 6, true).unwrap();
        let band = stop_band(&stack, 0.0, Polarization::TE, 0.95, (550.0, 1000.0), 0.5)
            .unwrap()
            .unwrap();
        assert!(band.0 < 750.0 && 750.0 < band.1);
        let f = 1.08;
        let scaled_band = stop_band(
            &stack.scale_thicknesses(f),
            0.0,
            Polarization::TE,
            0.95,
            (550.0, 1100.0),
            0.5,
        )
        .unwrap()
        .unwrap();
        // Bisection refinement is to 0.01 nm; scaling is exact physics.
        assert!((scaled_band.0 - f * band.0).abs() < 0.05);
        assert!((scaled_band.1 - f * band.1).abs() < 0.05);
    }

    #[test]
    fn stop_band_rejects_bad_range() {
        let stack = quarter_wave_stack(2.3, 1.45, 1.5, 750.0, 6, true).unwrap();
        assert!(stop_band(&stack, 0.0, Polarization::TE, 0.95, (900.0, 600.0), 0.5).is_err());
    }

    #[test]
    fn finesse_paper_projections() {
        // 99.95% mirrors: F = pi sqrt(0.9995)/(1 - 0.9995) = 6281.6,
        // i.e. the "approaching 6,300" projection.
        let f = finesse_from_mirrors(0.9995, 0.9995, 0.0).unwrap();
        assert!((f - 6281.615).abs() < 0.01);
        assert!((f / 6300.0 - 1.0).abs() < 0.005);
        // 99.5% mirrors: F = 626.75, the "predicted finesse is 600" case.
        let f = finesse_from_mirrors(0.995, 0.995, 0.0).unwrap();
        assert!((f - 626.75).abs() < 0.01);
        assert_eq!(f.round() as i64, 627);
    }

    #[test]
    fn finesse_monotone_in_reflectivity() {
        let f1 = finesse_from_mirrors(0.99, 0.99, 0.0).unwrap();
        let f2 = finesse_from_mirrors(0.999, 0.999, 0.0).unwrap();
        assert!(f1 < f2);
    }

    #[test]
    fn finesse_rejects_out_of_range() {
        assert!(finesse_from_mirrors(1.0, 0.99, 0.0).is_err());
        assert!(finesse_from_mirrors(0.99, 0.99, 1.0).is_err());
    }

    #[test]
    fn round_trip_finesse_inversion() {
        for &f in &[10.0, 50.0, 200.0, 600.0, 6281.6] {
            let rho = round_trip_from_finesse(f).unwrap();
            assert!((finesse_from_round_trip(rho) - f).abs() / f < 1e-9);
        }
    }

    #[test]
    fn reflection_phase_in_half_open_interval() {
        // Air -> denser medium flips the field: phase pi (not -pi).
        let stack = LayerStack::new(1.0, vec![], 1.5);
        let resp = stack
            .response(&PlaneWaveQuery::normal(750.0, Polarization::TE))
            .unwrap();
        assert!((resp.reflection_phase - PI).abs() < 1e-12);
        let _ = TAU;
    }

    #[test]
    fn tabulated_index_interpolates() {
        let layer = Layer {
            index: IndexModel::Table(vec![
                (600.0, Complex64::new(2.4, 0.0)),
                (800.0, Complex64::new(2.2, 0.0)),
            ]),
            thickness_nm: 80.0,
        };
        assert!((layer.index.at(700.0).re - 2.3).abs() < 1e-12);
        assert!((layer.index.at(500.0).re - 2.4).abs() < 1e-12); // clamped
        assert!((layer.index.at(900.0).re - 2.2).abs() < 1e-12); // clamped
    }

    #[test]
    fn rejects_non_finite_inputs() {
        let stack = LayerStack::new(1.0, vec![Layer::lossless(2.0, f64::NAN)], 1.5);
        assert!(stack
            .response(&PlaneWaveQuery::normal(750.0, Polarization::TE))
            .is_err());
        let stack = LayerStack::new(1.0, vec![], 1.5);
        assert!(stack
            .response(&PlaneWaveQuery::normal(-5.0, Polarization::TE))
            .is_err());
    }
}
