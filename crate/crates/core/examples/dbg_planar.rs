use microcav::fdtd::*;
use microcav::modes::CavityGeometry;
use microcav::numeric::bessel_j1;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let radius = 30.0;
    let cavity = CavityGeometry::new(5.0, 1e9).unwrap();
    let mut spec = DomainSpec::new(cavity, TopMirror::Flat);
    spec.radial_extent_um = radius;
    spec.design_wavelength_nm = 2000.0;
    spec.resolution = 20.0;
    spec.azimuthal_order = 1;
    let d = build_domain(&spec).unwrap();
    println!("grid {} x {} cells", d.nr, d.nz);

    // Mode-matched line source: H_z with the J1(chi'_11 r/a) profile of the
    // lowest transverse family, so higher-p satellites stay dark.
    const CHI_P11: f64 = 1.8412;
    let mut sources = Vec::new();
    let n_src = 40;
    for j in 0..n_src {
        let r = (j as f64 + 0.5) / n_src as f64 * radius;
        sources.push(SourceSpec {
            position_um: (r, 1.1),
            component: FieldComponent::Hz,
            center_frequency_thz: 90.0,
            bandwidth_thz: 42.0,
            amplitude: bessel_j1(CHI_P11 * r / radius),
        });
    }
    let probes = vec![
        ((0.7188 * radius, 1.85), FieldComponent::Hz),
        ((0.95 * radius, 1.35), FieldComponent::Hz),
    ];
    let record = run_ringdown(&d, &sources, &probes, 1000.0).unwrap();
    println!("ringdown done {:?}", t0.elapsed());
    let found = resonances(&record).unwrap();
    let fsr = 29.9792458;
    for q in 1..=5 {
        let f_expect = q as f64 * fsr;
        let best = found.iter().min_by(|a, b| {
            (a.frequency_thz - f_expect).abs().total_cmp(&(b.frequency_thz - f_expect).abs())
        }).unwrap();
        println!("q={q}: expect {:.3}, found {:.4} ({:+.3}%, amp {:.4})", f_expect, best.frequency_thz,
            (best.frequency_thz - f_expect) / f_expect * 100.0, best.relative_amplitude);
    }
    println!("n_peaks = {}, total {:?}", found.len(), t0.elapsed());
}
