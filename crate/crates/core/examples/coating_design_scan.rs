//! Scans TiO2/SiO2-class quarter-wave stacks over pair count and reports the
//! 95% and 99.5% stop-band edges at normal incidence, plus the center
//! wavelength that places the 95% band's upper edge at a requested target.
//! Useful for sizing a coating before running the optimizer.

use microcav::tmm::{quarter_wave_stack, stop_band, Polarization};

fn main() {
    let (nh, nl, ns) = (2.3, 1.45, 1.5);
    let lambda0 = 770.0;
    println!("quarter-wave (HL)^N H, nH={nh}, nL={nl}, substrate {ns}, centered {lambda0} nm");
    println!(
        "{:>3} {:>10} {:>18} {:>18} {:>8} {:>8}",
        "N", "R(center)", "95% band (nm)", "99.5% band (nm)", "r95", "r995"
    );
    for n_pairs in 3..=16 {
        let stack = quarter_wave_stack(nh, nl, ns, lambda0, n_pairs, true).unwrap();
        let r0 = stack
            .reflectance(&microcav::tmm::PlaneWaveQuery::normal(
                lambda0,
                Polarization::TE,
            ))
            .unwrap();
        let b95 = stop_band(&stack, 0.0, Polarization::TE, 0.95, (550.0, 1100.0), 0.25).unwrap();
        let b995 = stop_band(&stack, 0.0, Polarization::TE, 0.995, (550.0, 1100.0), 0.25).unwrap();
        let fmt = |b: Option<(f64, f64)>| match b {
            Some((a, b)) => format!("[{a:7.2},{b:7.2}]"),
            None => "none".to_string(),
        };
        let ratio = |b: Option<(f64, f64)>| b.map(|(a, b)| b / a).unwrap_or(0.0);
        println!(
            "{n_pairs:>3} {r0:>10.6} {:>18} {:>18} {:>8.4} {:>8.4}",
            fmt(b95),
            fmt(b995),
            ratio(b95),
            ratio(b995),
        );
    }

    // Where must the center sit so the 95% upper edge lands on 808 nm?
    for n_pairs in [5, 6] {
        let stack = quarter_wave_stack(nh, nl, ns, lambda0, n_pairs, true).unwrap();
        if let Some((lo, hi)) =
            stop_band(&stack, 0.0, Polarization::TE, 0.95, (550.0, 1100.0), 0.25).unwrap()
        {
            let center = 808.0 / hi * lambda0;
            let shifted = quarter_wave_stack(nh, nl, ns, center, n_pairs, true).unwrap();
            let band =
                stop_band(&shifted, 0.0, Polarization::TE, 0.95, (550.0, 1100.0), 0.25).unwrap();
            println!(
                "N={n_pairs}: edges scale from [{lo:.2},{hi:.2}]; center {center:.2} nm gives {band:?}"
            );
        }
    }
}
