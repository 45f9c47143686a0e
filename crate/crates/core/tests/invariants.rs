use proptest::prelude::*;
use qfridge::atom::{atom_terms_4l, build_atom_liouvillian_3l, build_atom_liouvillian_4l, four, FourLevelParams, ThreeLevelParams};
use qfridge::c64;
use qfridge::operator::{evolve, steady_state, Operator};
use qfridge::rates::{collective_coupling, rates_3l, rates_4l, steady_populations_3l, steady_populations_4l, Dephasing4};
use qfridge::resonator::{adaptive_steady_distribution, birth_death_generator, PhotonDistribution, ResonatorParams};

fn three_level() -> impl Strategy<Value = ThreeLevelParams> {
    (0.2..3.0f64, 0.5..5.0f64, 0.1..2.0f64, 0.1..2.0f64, 0.0..0.3f64, 0.0..0.3f64, 0.0..0.3f64, 0.3..5.0f64, 0.0..20.0f64).prop_map(
        |(omega_r, omega_ea, gamma_ea, gamma_eb, gp_a, gp_b, gp_e, temperature, drive)| ThreeLevelParams {
            omega_r,
            omega_ea,
            omega_eb: omega_ea + omega_r,
            gamma_ea,
            gamma_eb,
            gp_a,
            gp_b,
            gp_e,
            temperature,
            drive,
        },
    )
}

fn four_level() -> impl Strategy<Value = FourLevelParams> {
    (0.2..3.0f64, 0.5..4.0f64, 0.5..4.0f64, 0.1..2.0f64, 0.1..2.0f64, 0.1..2.0f64, 0.0..0.3f64, 0.3..5.0f64, 0.0..20.0f64).prop_map(
        |(omega_r, omega_em, omega_ma, gamma_em, gamma_ma, gamma_eb, gp, temperature, drive)| FourLevelParams {
            omega_r,
            omega_em,
            omega_ma,
            omega_eb: omega_em + omega_ma + omega_r,
            gamma_em,
            gamma_ma,
            gamma_eb,
            gp_a: gp,
            gp_b: 0.5 * gp,
            gp_m: 0.0,
            gp_e: 0.0,
            temperature,
            drive,
        },
    )
}

/// Random density matrix `A A† / tr(A A†)`.
fn density(dim: usize) -> impl Strategy<Value = Operator> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), dim * dim).prop_map(move |v| {
        let a = Operator::from_fn(dim, |i, j| c64::new(v[i * dim + j].0, v[i * dim + j].1));
        let m = &a * &a.adjoint();
        let tr = m.trace();
        m.scaled(c64::new(1.0 / tr.re, 0.0))
    })
}

fn check_physical(rho: &Operator, tol: f64) -> Result<(), TestCaseError> {
    prop_assert!((rho.trace() - c64::new(1.0, 0.0)).norm() < tol);
    prop_assert!(rho.hermiticity_error() < tol);
    let min = rho.hermitian_part().hermitian_eigenvalues().unwrap().into_iter().fold(f64::INFINITY, f64::min);
    prop_assert!(min > -tol, "negative eigenvalue {min}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generator_is_traceless_and_hermiticity_preserving(p in three_level(), q in four_level(), r3 in density(3), r4 in density(4)) {
        for (l, rho) in [(build_atom_liouvillian_3l(&p).unwrap(), r3), (build_atom_liouvillian_4l(&q).unwrap(), r4)] {
            let out = l.apply(&rho).unwrap();
            prop_assert!(out.trace().norm() < 1e-12 * l.norm());
            prop_assert!(out.hermiticity_error() < 1e-12 * l.norm());
        }
    }

    #[test]
    fn evolution_stays_physical(p in three_level(), rho in density(3), t in 0.01..5.0f64) {
        let l = build_atom_liouvillian_3l(&p).unwrap();
        check_physical(&evolve(&l, &rho, t).unwrap(), 1e-9)?;
    }

    #[test]
    fn populations_on_simplex(p in three_level(), q in four_level()) {
        for pops in [steady_populations_3l(&p).unwrap().pops, steady_populations_4l(&q).unwrap().pops] {
            prop_assert!(pops.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((pops.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn bath_ratio_is_boltzmann(q in four_level()) {
        for (bath, gap) in [(q.bath_em().unwrap(), q.omega_em), (q.bath_ma().unwrap(), q.omega_ma), (q.bath_eb().unwrap(), q.omega_eb)] {
            let want = (-gap / q.temperature).exp();
            prop_assert!((bath.gamma_plus / bath.gamma_minus / want - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rates_scale_with_coupling_squared(p in three_level(), q in four_level(), g in 0.01..1.0f64, n in 1u64..1000) {
        let gn = collective_coupling(g, n).unwrap();
        let (a, b) = (rates_3l(&p, g).unwrap(), rates_3l(&p, gn).unwrap());
        prop_assert!((b.a_plus - n as f64 * a.a_plus).abs() <= 1e-12 * b.a_plus.abs().max(1e-300));
        prop_assert!((b.a_minus / (n as f64 * a.a_minus) - 1.0).abs() < 1e-12);
        let (a, b) = (rates_4l(&q, g).unwrap(), rates_4l(&q, gn).unwrap());
        prop_assert!((b.a_plus / (n as f64 * a.a_plus) - 1.0).abs() < 1e-12);
        prop_assert!((b.a_minus / (n as f64 * a.a_minus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cooling_criterion(a_plus in 0.0..2.0f64, a_minus in 0.0..2.0f64, kappa in 0.01..1.0f64, nbar in 0.01..50.0f64) {
        let rp = ResonatorParams { kappa, nbar_r: nbar, a_plus, a_minus };
        let Ok(n) = rp.steady_photon_number() else { return Ok(()) };
        let margin = nbar * a_minus - (nbar + 1.0) * a_plus;
        if margin.abs() > 1e-9 {
            prop_assert_eq!(n < nbar, margin > 0.0);
        }
    }

    #[test]
    fn steady_distribution_is_geometric(a_plus in 0.0..1.0f64, a_minus in 0.0..2.0f64, kappa in 0.05..1.0f64, nbar in 0.0..5.0f64) {
        let rp = ResonatorParams { kappa, nbar_r: nbar, a_plus, a_minus };
        prop_assume!(rp.net_damping() > 0.05);
        let dist = adaptive_steady_distribution(&rp).unwrap();
        let ratio = rp.up_rate() / rp.down_rate();
        for k in 0..dist.probs.len().min(30) {
            let want = (1.0 - ratio) * ratio.powi(k as i32);
            prop_assert!((dist.probs[k] - want).abs() < 1e-10, "p_{k} = {} vs {want}", dist.probs[k]);
        }
        prop_assert!((dist.mean() / rp.steady_photon_number().unwrap() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn long_evolution_reaches_steady_state() {
    let p = ThreeLevelParams {
        omega_r: 1.0,
        omega_ea: 3.0,
        omega_eb: 4.0,
        gamma_ea: 1.0,
        gamma_eb: 0.7,
        gp_a: 0.05,
        gp_b: 0.03,
        gp_e: 0.02,
        temperature: 1.5,
        drive: 0.9,
    };
    let l = build_atom_liouvillian_3l(&p).unwrap();
    let ss = steady_state(&l).unwrap();
    let rho = evolve(&l, &Operator::ket_bra(3, 0, 0), 2000.0).unwrap();
    assert!(rho.max_abs_diff(&ss) < 1e-10, "{}", rho.max_abs_diff(&ss));
}

#[test]
fn undriven_optical_coherence_decays_at_dephasing_rate() {
    let q = FourLevelParams {
        omega_r: 1.0,
        omega_em: 2.0,
        omega_ma: 1.5,
        omega_eb: 4.5,
        gamma_em: 1.0,
        gamma_ma: 0.8,
        gamma_eb: 0.6,
        gp_a: 0.05,
        gp_b: 0.03,
        gp_m: 0.01,
        gp_e: 0.02,
        temperature: 1.2,
        drive: 0.0,
    };
    let l = atom_terms_4l(&q).unwrap().liouvillian().unwrap();
    // equal superposition of e and m, |⟨τ⁺_em⟩(t)| decays as e^{−Υ'_em t}
    let psi = Operator::from_fn(4, |i, j| {
        let on = |k| k == four::E || k == four::M;
        if on(i) && on(j) {
            c64::new(0.5, 0.0)
        } else {
            c64::new(0.0, 0.0)
        }
    });
    let coh = |t: f64| evolve(&l, &psi, t).unwrap().get(four::E, four::M).norm();
    let (t1, t2) = (0.3, 1.7);
    let fit = (coh(t1) / coh(t2)).ln() / (t2 - t1);
    let ups = Dephasing4::new(&q).unwrap().ups_em;
    assert!((fit / ups - 1.0).abs() < 1e-9, "{fit} vs {ups}");
}

#[test]
fn chain_transient_matches_mean_equation() {
    let rp = ResonatorParams { kappa: 0.2, nbar_r: 1.5, a_plus: 0.1, a_minus: 0.6 };
    let chain = birth_death_generator(&rp, 80).unwrap();
    let p0 = PhotonDistribution::fock(6, 80).unwrap();
    for t in [0.5, 2.0, 6.0] {
        let pt = chain.evolve(&p0, t).unwrap();
        let want = rp.transient_mean_photon(6.0, t).unwrap();
        assert!((pt.mean() - want).abs() < 1e-9, "t = {t}: {} vs {want}", pt.mean());
    }
}
