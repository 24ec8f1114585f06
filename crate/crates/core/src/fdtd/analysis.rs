//! Ringdown protocol and post-processing: recorded probe series, windowed
//! spectra with parabolic peak refinement, Q from the decay of band-filtered
//! envelopes, and steady-state mode profiles (waist, mode volume, antinode).

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::find_peaks;

use super::domain::SimulationDomain;
use super::solver::{node_ring_weight, FieldComponent, Probe, Simulation, SourceSpec};

/// Time series recorded by one or more probes during a ringdown run.
#[derive(Debug, Clone)]
pub struct ProbeRecord {
    /// Sample period in fs (after decimation).
    pub sample_dt_fs: f64,
    /// One series per probe.
    pub series: Vec<Vec<f64>>,
    /// Sample index after which every source is off.
    pub source_off_sample: usize,
    pub center_frequency_thz: f64,
    pub warnings: Vec<String>,
}

/// Drives one or more soft sources (several point sources form a shaped
/// line source) and records the probes. Sources are additive, so the
/// post-turn-off dynamics are exactly source-free. `duration_cycles` counts
/// optical cycles of the first source's center frequency; resolving quality
/// factors up to ~1e4 needs at least 2000 cycles.
pub fn run_ringdown(
    domain: &SimulationDomain,
    sources: &[SourceSpec],
    probe_positions: &[((f64, f64), FieldComponent)],
    duration_cycles: f64,
) -> Result<ProbeRecord> {
    if duration_cycles < 1.0 {
        return Err(Error::build("duration must cover at least one cycle"));
    }
    if sources.is_empty() {
        return Err(Error::build("at least one source is required"));
    }
    if probe_positions.is_empty() {
        return Err(Error::build("at least one probe is required"));
    }
    let mut sim = Simulation::new(domain);
    for s in sources {
        sim.add_source(s)?;
    }
    let probes: Vec<Probe> = probe_positions
        .iter()
        .map(|&(pos, comp)| sim.add_probe(pos, comp))
        .collect::<Result<_>>()?;

    let dt = sim.dt_s();
    let lead = &sources[0];
    let period_s = 1.0 / (lead.center_frequency_thz * 1e12);
    let n_steps = (duration_cycles * period_s / dt).ceil() as usize;

    // Decimate so the record still oversamples the source band by ~8x.
    let f_max_thz = sources
        .iter()
        .map(|s| s.center_frequency_thz + 4.0 * s.bandwidth_thz)
        .fold(0.0f64, f64::max);
    let stride = ((1.0 / (8.0 * f_max_thz * 1e12 * dt)).floor() as usize).max(1);

    let mut warnings = domain.warnings.clone();
    let f_limit = domain.max_resolved_frequency_thz();
    let f_band = sources
        .iter()
        .map(|s| s.center_frequency_thz + 2.0 * s.bandwidth_thz)
        .fold(0.0f64, f64::max);
    if f_band > f_limit {
        warnings.push(format!(
            "source band reaches past the 20-cells-per-wavelength limit of {f_limit:.1} THz"
        ));
    }

    let mut series = vec![Vec::with_capacity(n_steps / stride + 1); probes.len()];
    let off_time = sources
        .iter()
        .map(SourceSpec::off_time_s)
        .fold(0.0f64, f64::max);
    let mut source_off_sample = 0usize;
    for step in 0..n_steps {
        sim.step();
        if step % stride == 0 {
            for (s, p) in series.iter_mut().zip(&probes) {
                s.push(sim.sample(p));
            }
            if sim.current_time_s() < off_time {
                source_off_sample = series[0].len();
            }
        }
    }

    Ok(ProbeRecord {
        sample_dt_fs: dt * stride as f64 * 1e15,
        series,
        source_off_sample,
        center_frequency_thz: lead.center_frequency_thz,
        warnings,
    })
}

/// One extracted resonance.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Resonance {
    pub frequency_thz: f64,
    /// Quality factor from the envelope decay; `None` when no decay is
    /// measurable over the record (closed lossless domains).
    pub quality_factor: Option<f64>,
    /// Spectral amplitude relative to the strongest peak.
    pub relative_amplitude: f64,
}

fn hann(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * std::f64::consts::PI * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Spectrum magnitude of the late-time record, averaged over probes.
/// Returns (frequency grid step THz, magnitudes, fft length, dt_s).
fn late_spectrum(record: &ProbeRecord) -> Result<(f64, Vec<f64>, usize, f64)> {
    let n_total = record.series.first().map(|s| s.len()).unwrap_or(0);
    if n_total < 64 {
        return Err(Error::analysis("record too short for spectral analysis"));
    }
    let start = record.source_off_sample.min(n_total / 2);
    let n = n_total - start;
    let dt_s = record.sample_dt_fs * 1e-15;
    let nfft = (4 * n).next_power_of_two();
    let window = hann(n);

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nfft);
    let mut mags = vec![0.0; nfft / 2];
    for s in &record.series {
        let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); nfft];
        let mean = s[start..].iter().sum::<f64>() / n as f64;
        for (i, (&v, &w)) in s[start..].iter().zip(&window).enumerate() {
            buf[i] = Complex64::new((v - mean) * w, 0.0);
        }
        fft.process(&mut buf);
        for (m, b) in mags.iter_mut().zip(buf.iter().take(nfft / 2)) {
            *m += b.norm();
        }
    }
    let df_thz = 1.0 / (nfft as f64 * dt_s) * 1e-12;
    Ok((df_thz, mags, nfft, dt_s))
}

/// Locates spectral peaks in the late-time (source-free) part of the record
/// and fits a quality factor to each from the band-filtered envelope decay.
pub fn resonances(record: &ProbeRecord) -> Result<Vec<Resonance>> {
    let (df, mags, nfft, dt_s) = late_spectrum(record)?;

    // Noise gate: genuine ringdown lines tower over the median magnitude.
    let mut sorted = mags.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let max = *sorted.last().unwrap();
    if !(max.is_finite()) || max <= 0.0 || max < 10.0 * median.max(1e-300) {
        return Err(Error::analysis("no spectral peak above the noise floor"));
    }

    let peaks = find_peaks(0.0, df, &mags, 0.005);
    let strongest = peaks
        .iter()
        .map(|p| p.height)
        .fold(0.0f64, f64::max)
        .max(1e-300);

    let mut out = Vec::new();
    for p in &peaks {
        if p.height < 10.0 * median {
            continue;
        }
        let q = fit_decay_q(record, p.x, df, nfft, dt_s);
        out.push(Resonance {
            frequency_thz: p.x,
            quality_factor: q,
            relative_amplitude: p.height / strongest,
        });
    }
    if out.is_empty() {
        return Err(Error::analysis("no spectral peak above the noise floor"));
    }
    Ok(out)
}

/// Q from an exponential fit to the band-filtered analytic envelope of the
/// first probe. `None` when the decay over the record is too small to
/// measure.
fn fit_decay_q(
    record: &ProbeRecord,
    f_peak_thz: f64,
    df_thz: f64,
    nfft: usize,
    dt_s: f64,
) -> Option<f64> {
    let s = &record.series[0];
    let n_total = s.len();
    let start = record.source_off_sample.min(n_total / 2);
    let n = n_total - start;

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nfft);
    let mut buf: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); nfft];
    let mean = s[start..].iter().sum::<f64>() / n as f64;
    for (i, &v) in s[start..].iter().enumerate() {
        buf[i] = Complex64::new(v - mean, 0.0);
    }
    fft.process(&mut buf);

    // Keep a one-sided, Hann-tapered band around the peak: the analytic
    // signal of that line. Smooth band edges keep the strong early signal
    // from leaking into the weak tail of the envelope.
    let center_bin = (f_peak_thz / df_thz).round() as usize;
    let half_width = ((0.05 * f_peak_thz / df_thz).round() as usize).max(8);
    for (i, v) in buf.iter_mut().enumerate() {
        let offset = i as f64 - center_bin as f64;
        if offset.abs() <= half_width as f64 && i <= nfft / 2 {
            let taper = 0.5 * (1.0 + (std::f64::consts::PI * offset / half_width as f64).cos());
            *v *= taper;
        } else {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    let ifft = planner.plan_fft_inverse(nfft);
    ifft.process(&mut buf);

    // Log-envelope slope over the central part of the window. Samples below
    // 1% of the envelope maximum are dropped: the brick-wall band filter
    // leaks the strong early signal into the weak tail at roughly that
    // level, which would flatten the fitted slope.
    let lo = n / 5;
    let hi = 4 * n / 5;
    if hi <= lo + 16 {
        return None;
    }
    let env_max = buf[lo..hi].iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let floor = env_max * 1e-2;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut count = 0.0;
    for i in lo..hi {
        let env = buf[i].norm();
        if env <= floor {
            continue;
        }
        let x = i as f64 * dt_s;
        let y = env.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        count += 1.0;
    }
    if count < 16.0 {
        return None;
    }
    let denom = count * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (count * sxy - sx * sy) / denom; // d ln(env) / dt
    let alpha = -slope;
    let window_s = (hi - lo) as f64 * dt_s;
    // Less than ~1% amplitude decay across the window: unresolvable.
    if alpha * window_s < 0.01 {
        return None;
    }
    Some(std::f64::consts::PI * f_peak_thz * 1e12 / alpha)
}

/// Steady-state mode profile extracted from a narrowband re-excitation.
#[derive(Debug, Clone)]
pub struct ModeProfile {
    pub resonance_frequency_thz: f64,
    pub quality_factor: Option<f64>,
    /// Time-averaged energy density at the grid nodes,
    /// `(nr + 1) x (nz + 1)` with the axial index fastest. Arbitrary units.
    pub energy_density: Vec<f64>,
    pub nr: usize,
    pub nz: usize,
    pub cell_size_um: f64,
    /// 1/e amplitude radius of the transverse profile at the measurement
    /// plane; `None` when the profile never falls to 1/e^2 of its on-axis
    /// value inside the domain (no transverse confinement).
    pub waist_radius_um: Option<f64>,
    pub effective_mode_volume_um3: f64,
    /// z of the measurement plane (the first DBR interface, or the first
    /// on-axis antinode above a bare planar mirror), um.
    pub measurement_plane_z_um: f64,
    /// z of the on-axis energy-density maximum nearest the planar mirror
    /// surface (the emitter-relevant antinode), um.
    pub antinode_z_um: f64,
    /// Energy density at that antinode relative to the global maximum.
    pub antinode_strength: f64,
}

/// Re-excites the domain at `resonance_frequency_thz` with a narrowband
/// copy of `source`, waits `settle_cycles` after the source turns off, then
/// accumulates the time-averaged energy density over `average_cycles`.
pub fn mode_profile(
    domain: &SimulationDomain,
    resonance_frequency_thz: f64,
    source: &SourceSpec,
    settle_cycles: f64,
    average_cycles: f64,
) -> Result<ModeProfile> {
    if resonance_frequency_thz <= 0.0 {
        return Err(Error::input("resonance frequency must be > 0"));
    }
    let narrow = SourceSpec {
        center_frequency_thz: resonance_frequency_thz,
        ..source.clone()
    };
    let mut sim = Simulation::new(domain);
    sim.add_source(&narrow)?;

    let dt = sim.dt_s();
    let period_s = 1.0 / (resonance_frequency_thz * 1e12);
    let t_settle_end = narrow.off_time_s() + settle_cycles * period_s;
    let n_settle = (t_settle_end / dt).ceil() as usize;
    let n_average = (average_cycles * period_s / dt).ceil() as usize;
    // Sample the quadratic density a few times per cycle.
    let stride = ((period_s / (8.0 * dt)).floor() as usize).max(1);

    for _ in 0..n_settle {
        sim.step();
    }
    let (nr, nz) = (domain.nr, domain.nz);
    let w = nz + 1;
    let mut acc = vec![0.0; (nr + 1) * w];
    let mut n_acc = 0usize;
    for step in 0..n_average {
        sim.step();
        if step % stride == 0 {
            sim.accumulate_energy_density(&mut acc);
            n_acc += 1;
        }
    }
    if n_acc == 0 {
        return Err(Error::analysis("averaging window too short"));
    }
    for v in &mut acc {
        *v /= n_acc as f64;
    }

    let u_max = acc.iter().cloned().fold(0.0f64, f64::max);
    if u_max <= 0.0 {
        return Err(Error::analysis("no energy accumulated at the resonance"));
    }

    let cell = domain.cell_size_um;
    // V_eff = sum u dV / max u, ring volumes 2 pi r dr dz with the half-cell
    // rule on the axis.
    let mut v_eff = 0.0;
    for i in 0..=nr {
        let ring = 2.0 * std::f64::consts::PI * node_ring_weight(i, nr, cell);
        for k in 0..=nz {
            v_eff += acc[i * w + k] * ring;
        }
    }
    v_eff /= u_max;

    // Measurement plane: the vacuum-side DBR interface, or the first on-axis
    // antinode above a bare PEC planar mirror.
    let k_planar = (domain.planar_surface_z_um / cell).round() as usize;
    let k_meas = if domain.dbr_layer_cells.is_empty() {
        let k_hi =
            (k_planar + (0.75 * period_s * crate::constants::C0 * 1e6 / cell / 2.0) as usize)
                .min(nz);
        let mut best = (k_planar, 0.0);
        for k in k_planar..=k_hi {
            let u = acc[k]; // i = 0 row
            if u > best.1 {
                best = (k, u);
            }
        }
        best.0
    } else {
        k_planar
    };

    // Transverse profile and 1/e amplitude (1/e^2 energy) radius.
    let u_axis = acc[k_meas];
    let mut waist = None;
    if u_axis > 0.0 {
        let target = u_axis / (std::f64::consts::E * std::f64::consts::E);
        for i in 1..=nr {
            let u = acc[i * w + k_meas];
            if u < target {
                let u_prev = acc[(i - 1) * w + k_meas];
                let t = if u_prev > u {
                    ((u_prev - target) / (u_prev - u)).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                waist = Some((i as f64 - 1.0 + t) * cell);
                break;
            }
        }
    }

    // Emitter-relevant antinode: on-axis local maximum nearest the planar
    // surface (inside the stack or just above it).
    let mut antinode = (k_meas, acc[k_meas]);
    let mut best_dist = usize::MAX;
    for k in 1..nz {
        let u = acc[k];
        if u > acc[k - 1] && u >= acc[k + 1] && u > 0.05 * u_max {
            let dist = k.abs_diff(k_planar);
            if dist < best_dist {
                best_dist = dist;
                antinode = (k, u);
            }
        }
    }

    Ok(ModeProfile {
        resonance_frequency_thz,
        quality_factor: None,
        energy_density: acc,
        nr,
        nz,
        cell_size_um: cell,
        waist_radius_um: waist,
        effective_mode_volume_um3: v_eff,
        measurement_plane_z_um: k_meas as f64 * cell,
        antinode_z_um: antinode.0 as f64 * cell,
        antinode_strength: antinode.1 / u_max,
    })
}

/// Synthetic record constructor for analysis tests and file replay.
pub fn record_from_series(series: Vec<f64>, sample_dt_fs: f64, center_thz: f64) -> ProbeRecord {
    ProbeRecord {
        sample_dt_fs,
        series: vec![series],
        source_off_sample: 0,
        center_frequency_thz: center_thz,
        warnings: Vec::new(),
    }
}
