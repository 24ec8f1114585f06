//! Body-of-revolution FDTD update loop.
//!
//! Fields carry the azimuthal dependence `cos(m phi)` for (E_r, E_z, H_phi)
//! and `sin(m phi)` for (E_phi, H_r, H_z); the magnetic field is stored
//! scaled by the free-space impedance so both updates share the factor
//! `c dt / cell`. Staggering on the uniform square grid (cell side d):
//!
//! component | radial position | axial position
//! ----------|-----------------|---------------
//! `e_r`     | (i + 1/2) d     | k d
//! `e_phi`   | i d             | k d
//! `e_z`     | i d             | (k + 1/2) d
//! `h_r`     | i d             | (k + 1/2) d
//! `h_phi`   | (i + 1/2) d     | (k + 1/2) d
//! `h_z`     | (i + 1/2) d     | k d
//!
//! On-axis singular terms use the series-limit rules for the given m:
//! for m = 0 the axis `e_z` update is `4 h_phi(1/2)/d`, for m = 1 the axis
//! `e_phi` and `h_r` carry the one-sided limits of `dh_z/dr` and `de_z/dr`,
//! and for m >= 2 every axis component vanishes. PEC cells force the
//! adjacent tangential electric components to exactly zero by zeroing their
//! update coefficients.

use rayon::prelude::*;

use crate::constants::C0;
use crate::error::{Error, Result};

use super::domain::SimulationDomain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FieldComponent {
    Er,
    Ephi,
    Ez,
    Hr,
    Hphi,
    Hz,
}

/// Soft (additive) excitation: a Gaussian-modulated sinusoid injected into
/// one field component at one grid location. The temporal profile is
/// truncated at `t0 + 6 tau` so late-time dynamics are exactly source-free.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    /// (r, z) in um.
    pub position_um: (f64, f64),
    pub component: FieldComponent,
    pub center_frequency_thz: f64,
    /// Gaussian bandwidth (sigma in frequency), THz.
    pub bandwidth_thz: f64,
    pub amplitude: f64,
}

impl SourceSpec {
    fn tau_s(&self) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * self.bandwidth_thz * 1e12)
    }

    /// Time after which the truncated source is identically zero.
    pub fn off_time_s(&self) -> f64 {
        11.0 * self.tau_s()
    }

    fn value(&self, t_s: f64) -> f64 {
        let tau = self.tau_s();
        let t0 = 5.0 * tau;
        if t_s >= t0 + 6.0 * tau {
            return 0.0;
        }
        let env = (-(t_s - t0) * (t_s - t0) / (2.0 * tau * tau)).exp();
        self.amplitude * env * (2.0 * std::f64::consts::PI * self.center_frequency_thz * 1e12
            * (t_s - t0))
            .sin()
    }

    fn validate(&self) -> Result<()> {
        if !(self.bandwidth_thz > 0.0 && self.center_frequency_thz > 0.0) {
            return Err(Error::build("source needs positive frequency and bandwidth"));
        }
        Ok(())
    }
}

/// A probe location resolved to a grid sample.
#[derive(Debug, Clone, Copy)]
pub struct Probe {
    pub component: FieldComponent,
    index: usize,
}

struct BoundSource {
    spec: SourceSpec,
    index: usize,
}

/// Explicit leapfrog state over one simulation domain.
pub struct Simulation {
    pub domain: SimulationDomain,
    m: f64,
    nr: usize,
    nz: usize,
    dt_s: f64,
    step_count: u64,

    er: Vec<f64>,
    ephi: Vec<f64>,
    ez: Vec<f64>,
    hr: Vec<f64>,
    hphi: Vec<f64>,
    hz: Vec<f64>,

    // Update coefficients c dt / (eps_r d); zero on PEC and walls.
    ce_r: Vec<f64>,
    ce_phi: Vec<f64>,
    ce_z: Vec<f64>,
    // eps_r at each electric component (energy bookkeeping).
    ep_r: Vec<f64>,
    ep_phi: Vec<f64>,
    ep_z: Vec<f64>,
    ch: f64,

    sources: Vec<BoundSource>,
}

impl Simulation {
    pub fn new(domain: &SimulationDomain) -> Simulation {
        let (nr, nz) = (domain.nr, domain.nz);
        let m_order = domain.azimuthal_order;
        let dt = domain.dt_s();
        let d_m = domain.cell_size_um * 1e-6;
        let base = C0 * dt / d_m;

        let cell_pec = |i: usize, k: usize| domain.pec[i * nz + k];
        let cell_eps = |i: usize, k: usize| domain.eps_r[i * nz + k];

        // e_r at (i+1/2, k): tangential to the z-face between cells k-1, k.
        let mut ce_r = vec![0.0; nr * (nz + 1)];
        let mut ep_r = vec![1.0; nr * (nz + 1)];
        for i in 0..nr {
            for k in 1..nz {
                let idx = i * (nz + 1) + k;
                if cell_pec(i, k - 1) || cell_pec(i, k) {
                    continue;
                }
                let eps = 0.5 * (cell_eps(i, k - 1) + cell_eps(i, k));
                ce_r[idx] = base / eps;
                ep_r[idx] = eps;
            }
        }

        // e_phi at (i, k): node component, adjacent to up to four cells.
        let mut ce_phi = vec![0.0; (nr + 1) * (nz + 1)];
        let mut ep_phi = vec![1.0; (nr + 1) * (nz + 1)];
        for i in 0..nr {
            // i = nr is the radial wall; stays zero.
            if i == 0 && m_order != 1 {
                continue;
            }
            for k in 1..nz {
                let idx = i * (nz + 1) + k;
                let mut eps = 0.0;
                let mut count = 0.0;
                let mut blocked = false;
                for ci in i.saturating_sub(1)..=i.min(nr - 1) {
                    for ck in [k - 1, k] {
                        blocked |= cell_pec(ci, ck);
                        eps += cell_eps(ci, ck);
                        count += 1.0;
                    }
                }
                if blocked {
                    continue;
                }
                let eps = eps / count;
                ce_phi[idx] = base / eps;
                ep_phi[idx] = eps;
            }
        }

        // e_z at (i, k+1/2): tangential to the r-face between cells i-1, i.
        let mut ce_z = vec![0.0; (nr + 1) * nz];
        let mut ep_z = vec![1.0; (nr + 1) * nz];
        for i in 0..nr {
            // i = nr radial wall stays zero.
            if i == 0 && m_order != 0 {
                continue;
            }
            for k in 0..nz {
                let idx = i * nz + k;
                let (blocked, eps) = if i == 0 {
                    (cell_pec(0, k), cell_eps(0, k))
                } else {
                    (
                        cell_pec(i - 1, k) || cell_pec(i, k),
                        0.5 * (cell_eps(i - 1, k) + cell_eps(i, k)),
                    )
                };
                if blocked {
                    continue;
                }
                ce_z[idx] = base / eps;
                ep_z[idx] = eps;
            }
        }

        Simulation {
            domain: domain.clone(),
            m: m_order as f64,
            nr,
            nz,
            dt_s: dt,
            step_count: 0,
            er: vec![0.0; nr * (nz + 1)],
            ephi: vec![0.0; (nr + 1) * (nz + 1)],
            ez: vec![0.0; (nr + 1) * nz],
            hr: vec![0.0; (nr + 1) * nz],
            hphi: vec![0.0; nr * nz],
            hz: vec![0.0; nr * (nz + 1)],
            ce_r,
            ce_phi,
            ce_z,
            ep_r,
            ep_phi,
            ep_z,
            ch: base,
            sources: Vec::new(),
        }
    }

    pub fn dt_s(&self) -> f64 {
        self.dt_s
    }

    pub fn current_time_s(&self) -> f64 {
        self.step_count as f64 * self.dt_s
    }

    fn locate(&self, position_um: (f64, f64), component: FieldComponent) -> Result<usize> {
        let d = self.domain.cell_size_um;
        let (r, z) = position_um;
        if !(r >= 0.0 && z >= 0.0) {
            return Err(Error::build("positions must be non-negative"));
        }
        // Nearest sample of the requested component.
        let (ri_half, zi_half) = match component {
            FieldComponent::Er => (true, false),
            FieldComponent::Ephi => (false, false),
            FieldComponent::Ez => (false, true),
            FieldComponent::Hr => (false, true),
            FieldComponent::Hphi => (true, true),
            FieldComponent::Hz => (true, false),
        };
        let i = if ri_half {
            ((r / d - 0.5).round().max(0.0) as usize).min(self.nr - 1)
        } else {
            ((r / d).round() as usize).min(self.nr)
        };
        let k = if zi_half {
            ((z / d - 0.5).round().max(0.0) as usize).min(self.nz - 1)
        } else {
            ((z / d).round() as usize).min(self.nz)
        };
        if r > self.domain.radial_extent_um() || z > self.domain.axial_extent_um() {
            return Err(Error::build(format!(
                "position ({r}, {z}) um lies outside the domain"
            )));
        }
        // The containing cell must be ordinary vacuum/dielectric.
        let ci = i.min(self.nr - 1);
        let ck = k.min(self.nz - 1);
        if self.domain.pec[ci * self.nz + ck] {
            return Err(Error::build(format!(
                "position ({r}, {z}) um lies inside the mirror body"
            )));
        }
        let width = match component {
            FieldComponent::Er | FieldComponent::Hz => self.nz + 1,
            FieldComponent::Ephi => self.nz + 1,
            FieldComponent::Ez | FieldComponent::Hr | FieldComponent::Hphi => self.nz,
        };
        Ok(i * width + k.min(width - 1))
    }

    pub fn add_source(&mut self, spec: &SourceSpec) -> Result<()> {
        spec.validate()?;
        let index = self.locate(spec.position_um, spec.component)?;
        // Electric sources must land on a live (non-PEC) component.
        let dead = match spec.component {
            FieldComponent::Er => self.ce_r[index] == 0.0,
            FieldComponent::Ephi => self.ce_phi[index] == 0.0,
            FieldComponent::Ez => self.ce_z[index] == 0.0,
            _ => false,
        };
        if dead {
            return Err(Error::build("source placed on a PEC-clamped component"));
        }
        self.sources.push(BoundSource {
            spec: spec.clone(),
            index,
        });
        Ok(())
    }

    pub fn add_probe(&self, position_um: (f64, f64), component: FieldComponent) -> Result<Probe> {
        Ok(Probe {
            component,
            index: self.locate(position_um, component)?,
        })
    }

    pub fn sample(&self, probe: &Probe) -> f64 {
        match probe.component {
            FieldComponent::Er => self.er[probe.index],
            FieldComponent::Ephi => self.ephi[probe.index],
            FieldComponent::Ez => self.ez[probe.index],
            FieldComponent::Hr => self.hr[probe.index],
            FieldComponent::Hphi => self.hphi[probe.index],
            FieldComponent::Hz => self.hz[probe.index],
        }
    }

    /// Advances one leapfrog step: E then H.
    pub fn step(&mut self) {
        self.update_e::<false>();
        self.apply_sources(false);
        self.update_h();
        self.apply_sources(true);
        self.step_count += 1;
    }

    /// Advances one step and returns the conserved discrete energy
    /// `U = 1/2 <eps e_n, e_{n+1}> + 1/2 <h, h>` (arbitrary units). U is
    /// exactly constant in source-free, lossless, closed domains.
    pub fn step_energy(&mut self) -> f64 {
        let cross = self.update_e::<true>();
        self.apply_sources(false);
        let u = 0.5 * cross + 0.5 * self.magnetic_energy();
        self.update_h();
        self.apply_sources(true);
        self.step_count += 1;
        u
    }

    fn apply_sources(&mut self, magnetic_pass: bool) {
        let t = self.current_time_s();
        for s in &self.sources {
            let is_h = matches!(
                s.spec.component,
                FieldComponent::Hr | FieldComponent::Hphi | FieldComponent::Hz
            );
            if is_h != magnetic_pass {
                continue;
            }
            let t_eval = if is_h { t + 0.5 * self.dt_s } else { t };
            let v = s.spec.value(t_eval);
            if v == 0.0 {
                continue;
            }
            match s.spec.component {
                FieldComponent::Er => self.er[s.index] += v,
                FieldComponent::Ephi => self.ephi[s.index] += v,
                FieldComponent::Ez => self.ez[s.index] += v,
                FieldComponent::Hr => self.hr[s.index] += v,
                FieldComponent::Hphi => self.hphi[s.index] += v,
                FieldComponent::Hz => self.hz[s.index] += v,
            }
        }
    }

    /// True once every attached source has shut off.
    pub fn sources_off(&self) -> bool {
        let t = self.current_time_s();
        self.sources.iter().all(|s| t >= s.spec.off_time_s())
    }

    fn update_e<const MEASURE: bool>(&mut self) -> f64 {
        let (nz, m) = (self.nz, self.m);
        let w = nz + 1;

        let hz = &self.hz;
        let hphi = &self.hphi;
        let hr = &self.hr;

        // e_r rows: i = 0..nr, each row owns k = 0..=nz.
        let ce_r = &self.ce_r;
        let ep_r = &self.ep_r;
        let cross_r: f64 = self
            .er
            .par_chunks_mut(w)
            .enumerate()
            .map(|(i, row)| {
                let mr = m / (i as f64 + 0.5);
                let weight = i as f64 + 0.5;
                let hz_row = &hz[i * w..(i + 1) * w];
                let hp_row = &hphi[i * nz..(i + 1) * nz];
                let ce = &ce_r[i * w..(i + 1) * w];
                let ep = &ep_r[i * w..(i + 1) * w];
                let mut acc = 0.0;
                for k in 1..nz {
                    let old = row[k];
                    let new = old + ce[k] * (mr * hz_row[k] - (hp_row[k] - hp_row[k - 1]));
                    row[k] = new;
                    if MEASURE {
                        acc += weight * ep[k] * old * new;
                    }
                }
                acc
            })
            .sum();

        // e_phi rows: i = 0..=nr (row nr is the wall, coefficient zero).
        let ce_phi = &self.ce_phi;
        let ep_phi = &self.ep_phi;
        let nr = self.nr;
        let cross_phi: f64 = self
            .ephi
            .par_chunks_mut(w)
            .enumerate()
            .map(|(i, row)| {
                if i == nr {
                    return 0.0;
                }
                let hr_row = &hr[i * nz..(i + 1) * nz];
                let ce = &ce_phi[i * w..(i + 1) * w];
                let ep = &ep_phi[i * w..(i + 1) * w];
                let mut acc = 0.0;
                if i == 0 {
                    // m = 1 axis rule; other orders have zero coefficients.
                    let hz_row = &hz[0..w];
                    for k in 1..nz {
                        let old = row[k];
                        let new = old
                            + ce[k] * ((hr_row[k] - hr_row[k - 1]) - 2.0 * hz_row[k]);
                        row[k] = new;
                        // Axis ring carries zero volume: no energy term.
                        let _ = (old, new);
                    }
                } else {
                    let weight = i as f64;
                    let hz_hi = &hz[i * w..(i + 1) * w];
                    let hz_lo = &hz[(i - 1) * w..i * w];
                    for k in 1..nz {
                        let old = row[k];
                        let new = old
                            + ce[k]
                                * ((hr_row[k] - hr_row[k - 1]) - (hz_hi[k] - hz_lo[k]));
                        row[k] = new;
                        if MEASURE {
                            acc += weight * ep[k] * old * new;
                        }
                    }
                }
                acc
            })
            .sum();

        // e_z rows: i = 0..=nr (row nr is the wall).
        let ce_z = &self.ce_z;
        let ep_z = &self.ep_z;
        let cross_z: f64 = self
            .ez
            .par_chunks_mut(nz)
            .enumerate()
            .map(|(i, row)| {
                if i == nr {
                    return 0.0;
                }
                let ce = &ce_z[i * nz..(i + 1) * nz];
                let ep = &ep_z[i * nz..(i + 1) * nz];
                let mut acc = 0.0;
                if i == 0 {
                    // m = 0 axis rule (4 h_phi / d); zero otherwise.
                    let hp_row = &hphi[0..nz];
                    let weight = 0.125;
                    for k in 0..nz {
                        let old = row[k];
                        let new = old + ce[k] * 4.0 * hp_row[k];
                        row[k] = new;
                        if MEASURE {
                            acc += weight * ep[k] * old * new;
                        }
                    }
                } else {
                    let fi = i as f64;
                    let a = (fi + 0.5) / fi;
                    let b = (fi - 0.5) / fi;
                    let mi = m / fi;
                    let hp_hi = &hphi[i * nz..(i + 1) * nz];
                    let hp_lo = &hphi[(i - 1) * nz..i * nz];
                    let hr_row = &hr[i * nz..(i + 1) * nz];
                    for k in 0..nz {
                        let old = row[k];
                        let new =
                            old + ce[k] * (a * hp_hi[k] - b * hp_lo[k] - mi * hr_row[k]);
                        row[k] = new;
                        if MEASURE {
                            acc += fi * ep[k] * old * new;
                        }
                    }
                }
                acc
            })
            .sum();

        if MEASURE {
            cross_r + cross_phi + cross_z
        } else {
            0.0
        }
    }

    fn update_h(&mut self) {
        let (nr, nz, m, ch) = (self.nr, self.nz, self.m, self.ch);
        let w = nz + 1;
        let er = &self.er;
        let ephi = &self.ephi;
        let ez = &self.ez;
        let m_order = self.domain.azimuthal_order;

        // h_r rows: i = 0..=nr; the wall row stays zero by construction.
        self.hr
            .par_chunks_mut(nz)
            .enumerate()
            .for_each(|(i, row)| {
                if i == nr {
                    return;
                }
                if i == 0 {
                    if m_order != 1 {
                        return;
                    }
                    let ez1 = &ez[nz..2 * nz];
                    let ephi0 = &ephi[0..w];
                    for k in 0..nz {
                        row[k] += ch * (ez1[k] + (ephi0[k + 1] - ephi0[k]));
                    }
                } else {
                    let mi = m / i as f64;
                    let ez_row = &ez[i * nz..(i + 1) * nz];
                    let ephi_row = &ephi[i * w..(i + 1) * w];
                    for k in 0..nz {
                        row[k] += ch * (mi * ez_row[k] + (ephi_row[k + 1] - ephi_row[k]));
                    }
                }
            });

        // h_phi rows: i = 0..nr.
        self.hphi
            .par_chunks_mut(nz)
            .enumerate()
            .for_each(|(i, row)| {
                let ez_lo = &ez[i * nz..(i + 1) * nz];
                let ez_hi = &ez[(i + 1) * nz..(i + 2) * nz];
                let er_row = &er[i * w..(i + 1) * w];
                for k in 0..nz {
                    row[k] += ch * ((ez_hi[k] - ez_lo[k]) - (er_row[k + 1] - er_row[k]));
                }
            });

        // h_z rows: i = 0..nr.
        self.hz
            .par_chunks_mut(w)
            .enumerate()
            .for_each(|(i, row)| {
                let fi = i as f64;
                let inv = 1.0 / (fi + 0.5);
                let ephi_lo = &ephi[i * w..(i + 1) * w];
                let ephi_hi = &ephi[(i + 1) * w..(i + 2) * w];
                let er_row = &er[i * w..(i + 1) * w];
                for k in 0..w {
                    row[k] += ch
                        * (-((fi + 1.0) * ephi_hi[k] - fi * ephi_lo[k]) * inv
                            - m * inv * er_row[k]);
                }
            });
    }

    fn magnetic_energy(&self) -> f64 {
        let (nr, nz) = (self.nr, self.nz);
        let w = nz + 1;
        let mut sum = 0.0;
        for i in 0..nr {
            let weight = i as f64 + 0.5;
            for k in 0..nz {
                let v = self.hphi[i * nz + k];
                sum += weight * v * v;
            }
            for k in 0..w {
                let v = self.hz[i * w + k];
                sum += weight * v * v;
            }
        }
        for i in 1..nr {
            let weight = i as f64;
            for k in 0..nz {
                let v = self.hr[i * nz + k];
                sum += weight * v * v;
            }
        }
        sum
    }

    /// Largest |E| over all PEC-clamped tangential components. Exactly zero
    /// for a correct update.
    pub fn max_tangential_e_on_pec(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, c) in self.er.iter().zip(&self.ce_r) {
            if *c == 0.0 {
                worst = worst.max(v.abs());
            }
        }
        for (v, c) in self.ephi.iter().zip(&self.ce_phi) {
            if *c == 0.0 {
                worst = worst.max(v.abs());
            }
        }
        for (v, c) in self.ez.iter().zip(&self.ce_z) {
            if *c == 0.0 {
                worst = worst.max(v.abs());
            }
        }
        worst
    }

    /// Adds the instantaneous energy density (azimuthally averaged, arbitrary
    /// units) at the grid nodes into `acc`, laid out `(nr + 1) x (nz + 1)`
    /// with the axial index fastest.
    pub fn accumulate_energy_density(&self, acc: &mut [f64]) {
        let (nr, nz) = (self.nr, self.nz);
        let w = nz + 1;
        assert_eq!(acc.len(), (nr + 1) * w);
        for i in 0..=nr {
            for k in 0..=nz {
                // Interpolate staggered components to the node (i, k).
                let er2 = {
                    let lo = if i > 0 { self.er[(i - 1) * w + k] } else { 0.0 };
                    let hi = if i < nr { self.er[i * w + k] } else { 0.0 };
                    let v = if i == 0 {
                        // On axis the radial component is single-sided.
                        hi
                    } else if i == nr {
                        lo
                    } else {
                        0.5 * (lo + hi)
                    };
                    v * v
                };
                let ephi2 = {
                    let v = self.ephi[i * w + k];
                    v * v
                };
                let ez2 = {
                    let lo = if k > 0 { self.ez[i * nz + k - 1] } else { 0.0 };
                    let hi = if k < nz { self.ez[i * nz + k] } else { 0.0 };
                    let v = if k == 0 {
                        hi
                    } else if k == nz {
                        lo
                    } else {
                        0.5 * (lo + hi)
                    };
                    v * v
                };
                let hr2 = {
                    let lo = if k > 0 { self.hr[i * nz + k - 1] } else { 0.0 };
                    let hi = if k < nz { self.hr[i * nz + k] } else { 0.0 };
                    let v = if k == 0 {
                        hi
                    } else if k == nz {
                        lo
                    } else {
                        0.5 * (lo + hi)
                    };
                    v * v
                };
                let hz2 = {
                    let lo = if i > 0 { self.hz[(i - 1) * w + k] } else { 0.0 };
                    let hi = if i < nr { self.hz[i * w + k] } else { 0.0 };
                    let v = if i == 0 {
                        hi
                    } else if i == nr {
                        lo
                    } else {
                        0.5 * (lo + hi)
                    };
                    v * v
                };
                let hphi2 = {
                    let mut sum = 0.0;
                    let mut n = 0.0;
                    for ci in [i.wrapping_sub(1), i] {
                        if ci >= nr {
                            continue;
                        }
                        for ck in [k.wrapping_sub(1), k] {
                            if ck >= nz {
                                continue;
                            }
                            sum += self.hphi[ci * nz + ck];
                            n += 1.0;
                        }
                    }
                    let v = if n > 0.0 { sum / n } else { 0.0 };
                    v * v
                };
                let eps = {
                    // Cell-averaged permittivity around the node.
                    let mut sum = 0.0;
                    let mut n = 0.0;
                    for ci in [i.wrapping_sub(1), i] {
                        if ci >= nr {
                            continue;
                        }
                        for ck in [k.wrapping_sub(1), k] {
                            if ck >= nz {
                                continue;
                            }
                            sum += self.domain.eps_r[ci * nz + ck];
                            n += 1.0;
                        }
                    }
                    if n > 0.0 {
                        sum / n
                    } else {
                        1.0
                    }
                };
                acc[i * w + k] += 0.5 * (eps * (er2 + ephi2 + ez2) + hr2 + hphi2 + hz2);
            }
        }
    }

    /// All-fields max |value|, for sanity checks.
    pub fn max_field(&self) -> f64 {
        [
            &self.er,
            &self.ephi,
            &self.ez,
            &self.hr,
            &self.hphi,
            &self.hz,
        ]
        .iter()
        .flat_map(|v| v.iter())
        .fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

/// Ring volume (um^3, without the 2 pi factor) of the node ring at radial
/// index `i`: `r dr dz` with the half-cell rule on the axis.
pub fn node_ring_weight(i: usize, nr: usize, cell_um: f64) -> f64 {
    let d3 = cell_um * cell_um * cell_um;
    if i == 0 {
        d3 / 8.0
    } else if i == nr {
        // Outer wall ring: half cell inward.
        d3 * (i as f64 / 2.0 - 1.0 / 8.0).max(0.0)
    } else {
        d3 * i as f64
    }
}
