//! The eliminated resonator equation against the full atom ⊗ Fock steady state
//! at small thermal occupation.

use qfridge::atom::ThreeLevelParams;
use qfridge::composite::{composite_steady_state, suggest_fock_dim, AtomModel, CompositeSpec};
use qfridge::rates::rates_3l;

const KAPPA: f64 = 1e-3;
const NBAR: f64 = 0.5;

fn atom() -> ThreeLevelParams {
    ThreeLevelParams {
        omega_r: 1.0,
        omega_ea: 3.0,
        omega_eb: 4.0,
        gamma_ea: 1.0,
        gamma_eb: 1.0,
        gp_a: 0.05,
        gp_b: 0.05,
        gp_e: 0.0,
        // n̄ = 0.5 at the resonator frequency
        temperature: 1.0 / 3f64.ln(),
        drive: 1.0,
    }
}

fn discrepancy(g: f64) -> (f64, f64, f64) {
    let p = atom();
    let predicted = rates_3l(&p, g).unwrap().with_resonator(KAPPA, NBAR).unwrap().n_ss_predicted.unwrap();
    let spec = CompositeSpec { atom: AtomModel::Three(p), kappa: KAPPA, nbar_r: NBAR, g, fock_dim: suggest_fock_dim(NBAR, 2) };
    let ss = composite_steady_state(&spec).unwrap();
    ((ss.mean_photon - predicted).abs() / predicted, predicted, ss.mean_photon)
}

#[test]
fn ladder_converges_faster_than_quadratic() {
    let g = 1e-2;
    let (d0, pred, comp) = discrepancy(g);
    assert!(d0 < 0.05, "g = {g}: predicted {pred}, composite {comp}");
    let (d1, ..) = discrepancy(g / 2.0);
    let (d2, ..) = discrepancy(g / 4.0);
    assert!(d0 / d1 >= 4.0, "ratio {} ({d0:e} -> {d1:e})", d0 / d1);
    assert!(d1 / d2 >= 4.0, "ratio {} ({d1:e} -> {d2:e})", d1 / d2);
}
