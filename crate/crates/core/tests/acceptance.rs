//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers (visible with `--nocapture`).

use num_complex::Complex64 as C64;
use spinsim::algebra::{
    apply_unitary, distance_up_to_diagonal_phase, distance_up_to_global_phase, DensityMatrix4,
    PureState4,
};
use spinsim::gates::{
    cnot_ideal, cnot_phase_report, cnot_pulse_sequence, diagonal_phase_inverse, r1_pulse_sequence,
    readout_sequence, u_gate_ideal, u_pulse_sequence, GateParams,
};
use spinsim::harness::{
    compare, default_phi_grid, first_harmonic_amplitude, run_point, sweep, visibility, Figure,
    GateLevel, InitialState, Observable, SchemeId, SweepConfig, TheoryForm,
};
use spinsim::measure::{
    line_amplitudes, populations, populations_from_lines, LineAmplitudeSet, ObservedSpin,
    QuadratureTable,
};
use spinsim::prep::{prepare, solve_prep_angles, thermal_state, ThermalParams};
use spinsim::pulse::{compile_unitary, run_sequence, SpinSystem};
use spinsim::spectra::{dft_spectrum, fit_lines, line_frequencies, synthesize_fid, ErrorModel, FidParams};
use std::f64::consts::{FRAC_PI_2, PI};

const THETA_90: f64 = FRAC_PI_2;
const THETA_53: f64 = 53.24 * PI / 180.0;

fn pass(n: u32, what: &str, detail: &str) {
    println!("ACCEPTANCE {n:2} [{what}]: PASS — {detail}");
}

#[test]
fn criterion_01_u_phase_gate_decomposition() {
    let sys = SpinSystem::default();
    let mut worst = 0.0f64;
    for k in 0..721 {
        let phi = 2.0 * PI * k as f64 / 720.0;
        let compiled = compile_unitary(&u_pulse_sequence(phi), &sys).unwrap();
        let d = distance_up_to_global_phase(&compiled, &u_gate_ideal(phi)).unwrap();
        worst = worst.max(d);
    }
    assert!(worst < 1e-10, "max distance {worst}");
    let mut spot_worst = 0.0f64;
    for phi in [0.0, FRAC_PI_2] {
        let compiled = compile_unitary(&u_pulse_sequence(phi), &sys).unwrap();
        let d = compiled.max_abs_diff(&u_gate_ideal(phi));
        assert!(d < 1e-12, "spot phi={phi}: {d}");
        spot_worst = spot_worst.max(d);
    }
    pass(
        1,
        "U(phi) decomposition",
        &format!("max distance over 721 phi = {worst:.3e}, spot residual = {spot_worst:.3e}"),
    );
}

#[test]
fn criterion_02_cnot_pulse_sequence() {
    let sys = SpinSystem::default();
    let report = cnot_phase_report(&sys).unwrap();
    assert!(report.distance < 1e-10, "distance {}", report.distance);
    let seq = cnot_pulse_sequence(&sys);
    let mut worst = 0.0f64;
    for theta in [THETA_90, THETA_53] {
        let g = GateParams::new(theta);
        let psi = PureState4::new([
            C64::new(g.alpha(), 0.0),
            C64::new(0.0, 0.0),
            C64::new(g.beta(), 0.0),
            C64::new(0.0, 0.0),
        ])
        .unwrap();
        let out = run_sequence(&seq, &psi.density(), &sys).unwrap();
        let want = [g.alpha().powi(2), 0.0, 0.0, g.beta().powi(2)];
        for (got, want) in out.diagonal().iter().zip(want) {
            worst = worst.max((got - want).abs());
        }
    }
    assert!(worst < 1e-10, "population residual {worst}");
    pass(
        2,
        "CNOT pulse sequence",
        &format!(
            "distance = {:.3e}, phases [rad] = ({:+.6}, {:+.6}, {:+.6}, {:+.6}), population residual = {worst:.3e}",
            report.distance,
            report.phases_rad[0],
            report.phases_rad[1],
            report.phases_rad[2],
            report.phases_rad[3]
        ),
    );
}

#[test]
fn criterion_03_unmarked_fringes() {
    let mut details = Vec::new();
    let mut visibilities = Vec::new();
    for theta in [THETA_90, THETA_53] {
        let config = SweepConfig::new(SchemeId::Unmarked, theta, 24);
        let ds = sweep(&config).unwrap();
        for e in compare(&ds, Figure::Fig2, TheoryForm::Derived, false).unwrap() {
            assert!(e.max_abs < 1e-10, "{e:?}");
        }
        let amp = 2.0 * first_harmonic_amplitude(&ds, Observable::P00);
        assert!((amp - theta.sin()).abs() < 1e-6, "amp {amp}");
        let vis = visibility(&ds, Observable::P00).unwrap();
        assert!((vis - theta.sin()).abs() < 1e-10);
        visibilities.push(vis);
        for e in compare(&ds, Figure::Fig2, TheoryForm::Caption, true).unwrap() {
            assert!(e.max_abs < 1e-10, "caption after offset: {e:?}");
            assert!(
                (e.phi_offset_rad - FRAC_PI_2).abs() < 1e-9,
                "offset {}",
                e.phi_offset_rad
            );
        }
        details.push(format!("theta={:.2}°: amp={amp:.6}", theta * 180.0 / PI));
    }
    assert!((visibilities[0] - 1.0).abs() < 1e-10);
    assert!((visibilities[1] - 0.8012).abs() < 1e-4);
    assert!(visibilities[1] < visibilities[0]);
    let ratio = GateParams::new(THETA_53).population_ratio();
    assert!((ratio - 3.981).abs() <= 0.001, "ratio {ratio}");
    pass(
        3,
        "unmarked-scheme fringes",
        &format!(
            "{}; visibility 1 -> {:.4} as population ratio 1 -> {ratio:.4}",
            details.join("; "),
            visibilities[1]
        ),
    );
}

#[test]
fn criterion_04_marked_populations_constant() {
    let mut worst_var = 0.0f64;
    let mut worst_res = 0.0f64;
    for theta in [THETA_90, THETA_53] {
        let config = SweepConfig::new(SchemeId::Marked, theta, 24);
        let ds = sweep(&config).unwrap();
        for obs in [
            Observable::P00,
            Observable::P01,
            Observable::P10,
            Observable::P11,
        ] {
            let vals: Vec<f64> = ds.rows.iter().map(|r| obs.of_row(r)).collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(hi - lo < 1e-10, "{obs:?} varies by {}", hi - lo);
            worst_var = worst_var.max(hi - lo);
        }
        for e in compare(&ds, Figure::Fig3, TheoryForm::Caption, false).unwrap() {
            assert!(e.max_abs < 1e-10, "{e:?}");
            worst_res = worst_res.max(e.max_abs);
        }
        for row in &ds.rows {
            assert!((row.marginal.0 - 0.5).abs() < 1e-10);
            assert!((row.marginal.1 - 0.5).abs() < 1e-10);
        }
    }
    pass(
        4,
        "marked-scheme populations",
        &format!("max phi-variation = {worst_var:.3e}, max residual vs theory = {worst_res:.3e}"),
    );
}

#[test]
fn criterion_05_marked_coherences() {
    let mut worst = 0.0f64;
    for theta in [THETA_90, THETA_53] {
        let config = SweepConfig::new(SchemeId::Marked, theta, 24);
        let ds = sweep(&config).unwrap();
        for form in [TheoryForm::Derived, TheoryForm::Caption] {
            for e in compare(&ds, Figure::Fig4, form, false).unwrap() {
                assert!(e.max_abs < 1e-10, "{e:?}");
                worst = worst.max(e.max_abs);
            }
        }
    }
    pass(
        5,
        "marked-scheme coherences",
        &format!("max residual vs ±(1/2)sin(theta)sin(phi) = {worst:.3e}"),
    );
}

#[test]
fn criterion_06_effective_pure_equivalence() {
    let mut worst = 0.0f64;
    for scheme in [SchemeId::Unmarked, SchemeId::Marked] {
        for theta in [THETA_90, THETA_53] {
            let mut pure = SweepConfig::new(scheme, theta, 24);
            pure.initial = InitialState::Pure;
            let mut eff = pure.clone();
            eff.initial = InitialState::EffectivePure { a: 0.2475, b: 0.01 };
            let dp = sweep(&pure).unwrap();
            let de = sweep(&eff).unwrap();
            for (a, b) in dp.rows.iter().zip(de.rows.iter()) {
                for (x, y) in a.pops.as_array().iter().zip(b.pops.as_array()) {
                    worst = worst.max((x - y).abs());
                }
                worst = worst.max((a.marginal.0 - b.marginal.0).abs());
                worst = worst.max((a.marginal.1 - b.marginal.1).abs());
                worst = worst.max((a.coh.c0 - b.coh.c0).abs());
                worst = worst.max((a.coh.c1 - b.coh.c1).abs());
            }
        }
    }
    assert!(worst < 1e-10, "normalized observable deviation {worst}");
    pass(
        6,
        "effective-pure equivalence",
        &format!("max |effective-pure − pure| over both schemes = {worst:.3e}"),
    );
}

#[test]
fn criterion_07_preparation_solver() {
    let sys = SpinSystem::default();
    let thermal = ThermalParams {
        eps_b: 0.01,
        eps_a: 0.03977,
    };
    let sol = solve_prep_angles(&thermal).unwrap();
    let rho = prepare(&thermal, &sol.angles, &sys).unwrap();
    let d = rho.diagonal();
    let res = (d[1] - d[3]).abs().max((d[2] - d[3]).abs());
    assert!(res < 1e-9, "post-crush residual {res}");
    assert!(sol.b > 0.0);

    let doubled = ThermalParams {
        eps_b: 0.02,
        eps_a: 0.07954,
    };
    let sol2 = solve_prep_angles(&doubled).unwrap();
    assert!((sol2.b - 2.0 * sol.b).abs() < 1e-6, "B scaling {} vs {}", sol2.b, sol.b);
    assert!((sol2.angles.marker_pair - sol.angles.marker_pair).abs() < 1e-6);
    assert!((sol2.angles.observed_pair - sol.angles.observed_pair).abs() < 1e-6);
    pass(
        7,
        "preparation solver",
        &format!(
            "angles = ({:.6}, {:.6}) rad, residual = {res:.3e}, B = {:.6} (doubles to {:.6})",
            sol.angles.marker_pair, sol.angles.observed_pair, sol.b, sol2.b
        ),
    );
}

#[test]
fn criterion_08_spectral_round_trip() {
    let sys = SpinSystem::default();
    let fid_params = FidParams::default();
    // a marked state with all four lines populated
    let config = SweepConfig::new(SchemeId::Marked, THETA_53, 24);
    let rho0 = PureState4::basis(0).density();
    let u = spinsim::gates::r2_gate(THETA_53) ;
    let rho = apply_unitary(&u, &rho0).unwrap();
    let rho = apply_unitary(&u_gate_ideal(0.7), &rho).unwrap();
    let lines = line_amplitudes(&rho, &readout_sequence(), &sys).unwrap();

    let mut fitted = LineAmplitudeSet {
        b: [C64::new(0.0, 0.0); 2],
        a: [C64::new(0.0, 0.0); 2],
    };
    let mut worst_rel = 0.0f64;
    for spin in [ObservedSpin::B, ObservedSpin::A] {
        let freqs = line_frequencies(&sys, &fid_params, spin);
        let amps = lines.of(spin);
        let fid = synthesize_fid(&amps, &freqs, &fid_params);
        let spec = dft_spectrum(&fid).unwrap();
        let rec = fit_lines(&spec, &freqs, fid_params.t2, fid_params.dwell_time).unwrap();
        for (got, want) in rec.iter().zip(amps.iter()) {
            let rel = (got - want).norm() / want.norm();
            assert!(rel < 0.01, "line amplitude rel error {rel}");
            worst_rel = worst_rel.max(rel);
        }
        match spin {
            ObservedSpin::B => fitted.b = [rec[0], rec[1]],
            ObservedSpin::A => fitted.a = [rec[0], rec[1]],
        }
    }
    let direct = populations(&rho);
    let via_spectra = populations_from_lines(&fitted, &QuadratureTable::default());
    let mut worst_pop = 0.0f64;
    for (got, want) in via_spectra.as_array().iter().zip(direct.as_array()) {
        worst_pop = worst_pop.max((got - want).abs());
    }
    assert!(worst_pop < 0.01, "population deviation {worst_pop}");
    let _ = config;
    pass(
        8,
        "spectral round trip",
        &format!(
            "worst line-amplitude rel error = {:.4}%, worst population deviation = {:.4}%",
            100.0 * worst_rel,
            100.0 * worst_pop
        ),
    );
}

#[test]
fn criterion_09_noise_realism() {
    let mut details = Vec::new();
    for (theta, seed) in [(THETA_90, 7u64), (THETA_53, 7u64)] {
        let mut config = SweepConfig::new(SchemeId::Marked, theta, 24);
        config.gate_level = GateLevel::Pulse;
        config.error = Some(ErrorModel {
            rf_scale_sigma: 0.05,
            noise_sigma: 0.0,
            n_shots: 128,
            seed,
        });
        let ds = sweep(&config).unwrap();

        // marked marginals stay statistically compatible with 1/2: within
        // three observed per-shot standard deviations and a 0.05 blanket
        let mut worst_pull = 0.0f64;
        let mut worst_dev = 0.0f64;
        for row in &ds.rows {
            let std = row.shot_std.unwrap();
            for (m, s) in [(row.marginal.0, std.marginal[0]), (row.marginal.1, std.marginal[1])] {
                let dev = (m - 0.5).abs();
                worst_dev = worst_dev.max(dev);
                assert!(dev <= 3.0 * s, "marginal {m} deviates {dev:.4} > 3×{s:.4}");
                assert!(dev <= 0.05, "marginal deviation {dev} above blanket");
                worst_pull = worst_pull.max(dev / s);
            }
        }

        // coherence fringe amplitude within 10% of (1/2)·sin(theta)
        let target = 0.5 * theta.sin();
        for obs in [Observable::C0, Observable::C1] {
            let amp = first_harmonic_amplitude(&ds, obs);
            let rel = (amp - target).abs() / target;
            assert!(rel < 0.10, "{obs:?} amplitude {amp} vs {target} ({rel:.3})");
        }
        let amp0 = first_harmonic_amplitude(&ds, Observable::C0);

        // identical seed reproduces byte-identical output
        let ds2 = sweep(&config).unwrap();
        assert_eq!(ds.to_csv(), ds2.to_csv());
        assert_eq!(
            ds.sidecar_json(&[], &[]),
            ds2.sidecar_json(&[], &[])
        );
        details.push(format!(
            "theta={:.2}°: worst marginal pull = {worst_pull:.2}σ (dev {worst_dev:.4}), c0 amp {amp0:.4} vs {target:.4}",
            theta * 180.0 / PI
        ));
    }
    pass(9, "noise realism", &details.join("; "));
}

#[test]
fn criterion_10_structural_invariants() {
    let sys = SpinSystem::default();
    let mut states_checked = 0usize;
    let mut props_checked = 0usize;
    let mut check_state = |rho: &DensityMatrix4| {
        assert!(rho.hermiticity_defect() < 1e-12);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(rho.eigenvalues()[0] >= -1e-10);
        states_checked += 1;
    };

    // initial states
    check_state(&PureState4::basis(0).density());
    let thermal = ThermalParams::default();
    check_state(&thermal_state(&thermal).unwrap());
    let sol = solve_prep_angles(&thermal).unwrap();
    check_state(&prepare(&thermal, &sol.angles, &sys).unwrap());

    // every compiled propagator in use
    let phis = default_phi_grid(8);
    for theta in [THETA_90, THETA_53] {
        let r1 = compile_unitary(&r1_pulse_sequence(theta), &sys).unwrap();
        assert!(r1.unitary_defect() < 1e-12);
        props_checked += 1;
        for &phi in &phis {
            let u = compile_unitary(&u_pulse_sequence(phi), &sys).unwrap();
            assert!(u.unitary_defect() < 1e-12);
            props_checked += 1;
        }
    }
    let cn_seq = compile_unitary(&cnot_pulse_sequence(&sys), &sys).unwrap();
    let ro = compile_unitary(&readout_sequence(), &sys).unwrap();
    for u in [&cn_seq, &ro, &cnot_ideal()] {
        assert!(u.unitary_defect() < 1e-12);
        props_checked += 1;
    }

    // every state along both schemes at both gate levels
    for scheme in [SchemeId::Unmarked, SchemeId::Marked] {
        for gate_level in [GateLevel::Ideal, GateLevel::Pulse] {
            for theta in [THETA_90, THETA_53] {
                for &phi in &phis {
                    let mut rho = PureState4::basis(0).density();
                    match gate_level {
                        GateLevel::Ideal => {
                            let split = match scheme {
                                SchemeId::Unmarked => spinsim::gates::r1_gate(theta),
                                SchemeId::Marked => spinsim::gates::r2_gate(theta),
                            };
                            rho = apply_unitary(&split, &rho).unwrap();
                            check_state(&rho);
                            rho = apply_unitary(&u_gate_ideal(phi), &rho).unwrap();
                            check_state(&rho);
                        }
                        GateLevel::Pulse => {
                            rho = run_sequence(&r1_pulse_sequence(theta), &rho, &sys).unwrap();
                            check_state(&rho);
                            if scheme == SchemeId::Marked {
                                let rep = cnot_phase_report(&sys).unwrap();
                                rho = apply_unitary(
                                    &diagonal_phase_inverse(&rep.phases_rad),
                                    &rho,
                                )
                                .unwrap();
                                rho = run_sequence(&cnot_pulse_sequence(&sys), &rho, &sys)
                                    .unwrap();
                                check_state(&rho);
                            }
                            rho = run_sequence(&u_pulse_sequence(phi), &rho, &sys).unwrap();
                            check_state(&rho);
                        }
                    }
                    let after_readout =
                        run_sequence(&readout_sequence(), &rho, &sys).unwrap();
                    check_state(&after_readout);
                }
            }
        }
    }

    // consistency of the two equivalence checks with the compiled CNOT
    let (d, _) = distance_up_to_diagonal_phase(&cn_seq, &cnot_ideal()).unwrap();
    assert!(d < 1e-10);

    pass(
        10,
        "structural invariants",
        &format!("{states_checked} states and {props_checked} propagators verified"),
    );
}

#[test]
fn run_point_matches_direct_pipeline() {
    // cross-check of the harness entry point against a hand-built pipeline
    let config = SweepConfig::new(SchemeId::Marked, THETA_53, 24);
    let row = run_point(&config, 0.7).unwrap();
    let rho = apply_unitary(&spinsim::gates::r2_gate(THETA_53), &PureState4::basis(0).density())
        .unwrap();
    let rho = apply_unitary(&u_gate_ideal(0.7), &rho).unwrap();
    let pops = populations(&rho);
    for (a, b) in row.pops.as_array().iter().zip(pops.as_array()) {
        assert!((a - b).abs() < 1e-14);
    }
}
