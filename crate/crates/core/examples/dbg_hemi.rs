use microcav::coating::DimpleGeometry;
use microcav::fdtd::*;
use microcav::modes::CavityGeometry;
use std::time::Instant;

fn main() {
    let res: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(20.0);
    let t0 = Instant::now();
    let cavity = CavityGeometry::new(10.0, 10.0).unwrap();
    let dimple = DimpleGeometry::from_opening_angle(10.0, 50.0, 150.0).unwrap();
    let mut spec = DomainSpec::new(cavity, TopMirror::Dimple(dimple));
    spec.radial_extent_um = 7.8;
    spec.design_wavelength_nm = 750.0;
    spec.resolution = res;
    spec.azimuthal_order = 1;
    let d = build_domain(&spec).unwrap();
    println!("res {res}: grid {} x {}, cell {:.2} nm, dt {:.3e}", d.nr, d.nz, d.cell_size_um*1e3, d.dt_s());

    let source = SourceSpec {
        position_um: (0.10, 0.19),
        component: FieldComponent::Er,
        center_frequency_thz: 400.0,
        bandwidth_thz: 10.0,
        amplitude: 1.0,
    };
    let probes = vec![
        ((0.22, 0.19), FieldComponent::Er),
        ((0.45, 1.30), FieldComponent::Er),
    ];
    let record = run_ringdown(&d, &[source.clone()], &probes, 800.0).unwrap();
    println!("discovery done {:?} warn {:?}", t0.elapsed(), record.warnings);
    let found = resonances(&record).unwrap();
    let mut near: Vec<_> = found.iter().filter(|r| (r.frequency_thz - 400.0).abs() < 12.0).collect();
    near.sort_by(|a, b| b.relative_amplitude.total_cmp(&a.relative_amplitude));
    for r in near.iter().take(8) {
        println!("  peak {:.3} THz amp {:.4}", r.frequency_thz, r.relative_amplitude);
    }
    let f0 = near[0].frequency_thz;

    let narrow = SourceSpec { bandwidth_thz: 0.8, ..source };
    let profile = mode_profile(&d, f0, &narrow, 200.0, 1200.0).unwrap();
    println!(
        "f0 = {:.3} THz: waist = {:?} um, V_eff = {:.3} um^3, antinode z = {:.3} um (strength {:.3}), plane z = {:.3}",
        f0, profile.waist_radius_um, profile.effective_mode_volume_um3,
        profile.antinode_z_um, profile.antinode_strength, profile.measurement_plane_z_um
    );
    // transverse profile at the measurement plane
    let w = d.nz + 1;
    let k = (profile.measurement_plane_z_um / d.cell_size_um).round() as usize;
    print!("profile u(r)/u(0): ");
    for i in (0..=60).step_by(5) {
        print!("{:.3} ", profile.energy_density[i * w + k] / profile.energy_density[k]);
    }
    println!();
    println!("total {:?}", t0.elapsed());
}
