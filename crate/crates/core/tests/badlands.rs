use cpqr::badlands::*;
use cpqr::cp_potential::{PotentialTable, TableSpec};
use cpqr::optics::*;
use cpqr::Constants;
use std::sync::OnceLock;

fn consts() -> Constants {
    Constants::default()
}

fn bulks() -> &'static [PotentialTable; 3] {
    static T: OnceLock<[PotentialTable; 3]> = OnceLock::new();
    T.get_or_init(|| {
        let k = consts();
        let p = PolarizabilityModel::hydrogen(&k);
        [DielectricModel::Perfect, DielectricModel::silicon(&k), DielectricModel::silica(&k)]
            .map(|d| PotentialTable::build(&MirrorSpec::bulk(d), &p, TableSpec::default(), &k).unwrap())
    })
}

fn energy_10cm() -> f64 {
    consts().height_to_energy(0.1).unwrap().energy
}

#[test]
fn deep_van_der_waals_closed_form() {
    let m = consts().atom_mass_au;
    for t in bulks() {
        for z in [0.02, 0.1, 0.5, 1.0] {
            let want = 3.0 * z / (32.0 * m * t.c3);
            let got = badlands_q(t, energy_10cm(), z);
            assert!((got / want - 1.0).abs() < 1e-2, "z = {z}: {got:e} vs {want:e}");
        }
    }
}

#[test]
fn vanishes_far_out_and_peaks_in_between() {
    let grid = log_grid(1.0, 1e6, 241).unwrap();
    for t in bulks() {
        let prof = badlands_profile(t, energy_10cm(), &grid).unwrap();
        assert!(prof.q.last().unwrap().abs() < 1e-3);
        assert!(prof.q[0] < 0.1 * prof.peak_q);
        assert!(prof.peak_q > 0.0 && prof.peak_q.is_finite());
        assert!(prof.q.iter().all(|&q| q <= prof.peak_q * (1.0 + 1e-12)));
    }
}

#[test]
fn peak_orderings() {
    let grid = log_grid(1.0, 1e6, 241).unwrap();
    let p: Vec<BadlandsProfile> = bulks().iter().map(|t| badlands_profile(t, energy_10cm(), &grid).unwrap()).collect();
    assert!(p[2].peak_q > p[1].peak_q && p[1].peak_q > p[0].peak_q);
    assert!(p[2].peak_z < p[1].peak_z && p[1].peak_z < p[0].peak_z);
}

#[test]
fn agrees_with_finite_differences_of_the_phase() {
    let m = consts().atom_mass_au;
    let e = energy_10cm();
    let grid = log_grid(1.0, 1e6, 121).unwrap();
    for t in bulks() {
        let peak = badlands_profile(t, e, &grid).unwrap();
        // phi' = p, so the phase derivatives come from differences of p
        let p = |z: f64| (2.0 * m * (e - t.eval_potential(z))).sqrt();
        for z in [0.5 * peak.peak_z, peak.peak_z, 2.0 * peak.peak_z] {
            let h = 1e-3 * z;
            let (d1, d2, d3) = (p(z), (p(z + h) - p(z - h)) / (2.0 * h), (p(z + h) - 2.0 * p(z) + p(z - h)) / (h * h));
            let schwarzian = d3 / d1 - 1.5 * (d2 / d1).powi(2);
            let fd = schwarzian / (2.0 * d1 * d1);
            let q = badlands_q(t, e, z);
            assert!((fd / q - 1.0).abs() < 1e-3, "z = {z}: {fd:e} vs {q:e}");
        }
    }
}

#[test]
fn grid_must_contain_the_peak() {
    let t = &bulks()[0];
    let narrow = log_grid(1.0, 10.0, 20).unwrap();
    assert!(matches!(badlands_profile(t, energy_10cm(), &narrow), Err(cpqr::Error::Coverage(_))));
    let far = log_grid(1e5, 1e6, 20).unwrap();
    assert!(matches!(badlands_profile(t, energy_10cm(), &far), Err(cpqr::Error::Coverage(_))));
    assert!(badlands_profile(t, -1.0, &log_grid(1.0, 1e6, 20).unwrap()).is_err());
}

#[test]
fn csv_layout() {
    let grid = log_grid(1.0, 1e6, 31).unwrap();
    let prof = badlands_profile(&bulks()[2], energy_10cm(), &grid).unwrap();
    let mut out = Vec::new();
    prof.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "z_bohr,Q");
    assert_eq!(lines.len(), 32);
    let cols: Vec<f64> = lines[5].split(',').map(|s| s.parse().unwrap()).collect();
    assert_eq!(cols, vec![grid[4], prof.q[4]]);
}
