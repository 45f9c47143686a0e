use qfridge::composite::AtomModel;
use qfridge::harness::{find_minimum, presets, sweep_drive, upturn_drive, RateSource};
use qfridge::rates::{working_region_bound, Dephasing4};

const TARGET_MIN: f64 = 68.1;

#[test]
fn three_level_interior_minimum() {
    let spec = presets::fig2a().unwrap();
    let rows = sweep_drive(&spec).unwrap();
    assert!(rows.iter().all(|r| r.is_ok()));
    let f = |d: f64| spec.n_ss_at(d);
    let m = find_minimum(&rows, Some(&f)).unwrap();
    assert!(!m.at_boundary, "minimum at grid edge: {m:?}");
    assert!((m.n_ss / TARGET_MIN - 1.0).abs() < 0.02, "{m:?}");
    // both grid extremes sit within 1% of the thermal value
    for r in [rows.first().unwrap(), rows.last().unwrap()] {
        assert!((r.n_ss / spec.nbar_r - 1.0).abs() < 0.01, "drive {}: {}", r.drive, r.n_ss);
    }
}

#[test]
fn three_level_extremes_return_to_thermal() {
    // the undriven atom is at the bath temperature, so compare against the Planck value
    let mut spec = presets::fig2a().unwrap();
    spec.nbar_r = presets::room_planck_nbar().unwrap();
    assert!((spec.n_ss_at(0.0).unwrap() / spec.nbar_r - 1.0).abs() < 1e-9);
    let far = spec.n_ss_at(1e8).unwrap();
    assert!((far / spec.nbar_r - 1.0).abs() < 0.01, "{far}");
}

#[test]
fn three_level_upturn_near_bound() {
    let spec = presets::fig2a().unwrap();
    let rows = sweep_drive(&spec).unwrap();
    let m = find_minimum(&rows, None).unwrap();
    let up = upturn_drive(&rows, &m, 2.0).expect("curve turns up");
    let d = presets::dephasing_3l().unwrap();
    let bound = working_region_bound(d.ups_eb, d.ups_ab).unwrap();
    let ratio = up / bound;
    assert!((1.0 / 3.0..=3.0).contains(&ratio), "upturn {up}, bound {bound}");
}

#[test]
fn four_level_monotone_to_asymptote() {
    let spec = presets::fig2b().unwrap();
    let rows = sweep_drive(&spec).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].n_ss <= w[0].n_ss * (1.0 + 1e-12), "{} -> {}", w[0].n_ss, w[1].n_ss);
    }
    let AtomModel::Four(p) = spec.model else { unreachable!() };
    let ups = Dephasing4::new(&p).unwrap().ups_ab;
    let asym = spec.kappa * spec.nbar_r / (2.0 * spec.g_n.powi(2) / ups + spec.kappa);
    assert!(find_minimum(&rows, None).unwrap().at_boundary);
    let last = rows.last().unwrap().n_ss;
    assert!((last / asym - 1.0).abs() < 1e-3, "{last} vs {asym}");
    assert!((last / TARGET_MIN - 1.0).abs() < 0.02);
    let thermal = qfridge::harness::SweepSpec { nbar_r: presets::room_planck_nbar().unwrap(), ..spec };
    assert!((thermal.n_ss_at(0.0).unwrap() / thermal.nbar_r - 1.0).abs() < 1e-9);
}

#[test]
fn oracle_source_matches_closed_sweep() {
    for mut spec in [presets::fig2a().unwrap(), presets::fig2b().unwrap()] {
        let closed = sweep_drive(&spec).unwrap();
        spec.rate_source = RateSource::RegressionOracle;
        let oracle = sweep_drive(&spec).unwrap();
        for (c, o) in closed.iter().zip(&oracle) {
            assert!(o.is_ok(), "{:?}", o.error);
            assert!((c.n_ss / o.n_ss - 1.0).abs() < 1e-8, "drive {}: {} vs {}", c.drive, c.n_ss, o.n_ss);
        }
    }
}

#[test]
fn room_resonator_estimates() {
    let nv = qfridge::harness::estimate_report(&presets::sec5_nv()).unwrap();
    assert!((nv.limit_approx - 68.9).abs() < 0.5);
    assert!((nv.effective_temperature_approx_kelvin - 3.3).abs() < 0.1);
    let na = qfridge::harness::estimate_report(&presets::sec5_na().unwrap()).unwrap();
    assert!(na.limit_approx < 1.0, "{}", na.limit_approx);
    assert!((presets::room_planck_nbar().unwrap() - 6250.6).abs() < 0.5);
}
