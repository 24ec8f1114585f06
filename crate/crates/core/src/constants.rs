//! Physical constants (SI) and the unit conversions used across the crate.

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;

/// Planck constant, J*s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Reduced Planck constant, J*s.
pub const HBAR: f64 = PLANCK / (2.0 * std::f64::consts::PI);

/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_8128e-12;

/// Vacuum permeability, H/m.
pub const MU0: f64 = 1.256_637_062_12e-6;

/// Elementary charge, C (also J per eV).
pub const E_CHARGE: f64 = 1.602_176_634e-19;

/// One Debye in C*m.
pub const DEBYE: f64 = 3.335_64e-30;

/// Joules per micro-electronvolt.
pub const JOULE_PER_UEV: f64 = E_CHARGE * 1e-6;

/// Free spectral range c/2L in THz for a cavity length in um.
pub fn fsr_thz(length_um: f64) -> f64 {
    C0 / (2.0 * length_um * 1e-6) * 1e-12
}

/// Vacuum wavelength in nm for a frequency in THz.
pub fn wavelength_nm(frequency_thz: f64) -> f64 {
    C0 / (frequency_thz * 1e12) * 1e9
}

/// Frequency in THz for a vacuum wavelength in nm.
pub fn frequency_thz(wavelength_nm: f64) -> f64 {
    C0 / (wavelength_nm * 1e-9) * 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wavelength_frequency_round_trip() {
        let f = frequency_thz(750.0);
        assert!((wavelength_nm(f) - 750.0).abs() < 1e-9);
        // 750 nm sits just shy of 400 THz.
        assert!((f - 399.72).abs() < 0.01);
    }

    #[test]
    fn fsr_matches_handbook_value() {
        // L = 50 um -> c/2L = 3.0 THz.
        assert!((fsr_thz(50.0) - 2.997_924_58).abs() < 1e-9);
    }
}
