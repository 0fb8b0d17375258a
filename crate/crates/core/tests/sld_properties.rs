use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use qfi_channel::sld::{
    build_sld_pair, commutator_expectation, expectation, qfi_matrix, wick_expectation, QuadraticObservable,
};
use qfi_channel::{
    apply_channel, make_probe, phase_rotate, qfi, single_mode_output_yields, weighted_cr_bound, ChannelParamsF64,
    GaussianStateF64, Parameter, ProbeClass, WeightMatrixF64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C = Complex64;

fn theta(g: f64, n: f64) -> ChannelParamsF64 {
    ChannelParamsF64::new(g, n).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// `d/dmu tr[rho(theta) X]` by central differences with one Richardson step.
/// The temperature direction is scaled by `e^gamma` to match the generator
/// normalization of the yields.
fn weak_derivative(probe: &GaussianStateF64, g: f64, nbar: f64, param: Parameter, x: &QuadraticObservable) -> f64 {
    let h = 1e-5;
    let at = |d: f64| {
        let th = match param {
            Parameter::Gamma => theta(g + d, nbar),
            Parameter::Nbar => theta(g, nbar + d),
        };
        expectation(&apply_channel(probe, &th).unwrap(), x).re
    };
    let central = |h: f64| (at(h) - at(-h)) / (2.0 * h);
    let d = (4.0 * central(h / 2.0) - central(h)) / 3.0;
    match param {
        Parameter::Gamma => d,
        Parameter::Nbar => d * g.exp(),
    }
}

#[test]
fn sld_weak_form_matches_qfi_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let class = ProbeClass::ALL[rng.random_range(0..4)];
        let n = rng.random_range(0.1..3.0);
        let (g, nbar) = (rng.random_range(0.1..1.5), rng.random_range(0.1..2.0));
        let probe = phase_rotate(&make_probe(class, n).unwrap(), 0, rng.random_range(0.0..6.0));
        let pair = build_sld_pair(&probe, &theta(g, nbar)).unwrap();
        let j = qfi_matrix(&probe, &theta(g, nbar)).unwrap();
        let scale = (j[0][0] * j[1][1]).sqrt();
        for (mu, pm) in [Parameter::Gamma, Parameter::Nbar].into_iter().enumerate() {
            for (nu, sld) in [&pair.gamma, &pair.nbar].into_iter().enumerate() {
                let fd = weak_derivative(&probe, g, nbar, pm, sld);
                let tol = 1e-6 * if mu == nu { j[mu][nu] } else { scale };
                assert!(
                    (fd - j[mu][nu]).abs() <= tol,
                    "{class} {mu}{nu}: fd {fd} vs {}",
                    j[mu][nu]
                );
            }
        }
    }
}

#[test]
fn qfi_matrix_diagonal_matches_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..125 {
        let n = rng.random_range(0.05..5.0);
        let th = theta(rng.random_range(0.05..2.0), rng.random_range(0.05..3.0));
        for class in ProbeClass::ALL {
            let j = qfi_matrix(&make_probe(class, n).unwrap(), &th).unwrap();
            assert!(
                rel(j[0][0], qfi(Parameter::Gamma, class, n, &th).unwrap()) < 1e-8,
                "{class}"
            );
            assert!(
                rel(j[1][1], qfi(Parameter::Nbar, class, n, &th).unwrap()) < 1e-8,
                "{class}"
            );
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            assert!(det >= -1e-10 * j[0][0] * j[1][1]);
        }
    }
}

#[test]
fn slds_are_hermitian_and_traceless() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..50 {
        let class = ProbeClass::ALL[rng.random_range(0..4)];
        let probe = make_probe(class, rng.random_range(0.0..4.0)).unwrap();
        let pair = build_sld_pair(&probe, &theta(rng.random_range(0.05..2.0), rng.random_range(0.05..3.0))).unwrap();
        for sld in [&pair.gamma, &pair.nbar] {
            assert!(sld.max_imaginary() < 1e-10);
            assert!(expectation(&pair.output, sld).norm() < 1e-9);
        }
    }
}

#[test]
fn commutator_vanishes_for_tmsv() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..200 {
        let r: f64 = rng.random_range(1e-6..2.0);
        let n = r.sinh().powi(2);
        let th = theta(rng.random_range(0.05..2.0), rng.random_range(1e-6..3.0));
        let probe = make_probe(ProbeClass::TwoModeSqueezedVacuum, n).unwrap();
        let value = commutator_expectation(&probe, &th).unwrap_or_else(|e| panic!("r={r} {th:?} {e}"));
        assert!(value.norm() < 1e-9, "r={r} {th:?}: {value}");
        let rotated = phase_rotate(&phase_rotate(&probe, 0, 0.4), 1, -1.3);
        assert!((commutator_expectation(&rotated, &th).unwrap() - value).norm() < 1e-9);
    }
    let vac = GaussianStateF64::vacuum(2);
    assert!(commutator_expectation(&vac, &theta(1.0, 1.0)).unwrap().norm() < 1e-9);
}

#[test]
fn coherent_sld_has_linear_part() {
    let th = theta(std::f64::consts::LN_2, 0.5);
    let probe = make_probe(ProbeClass::Coherent, 1.0).unwrap();
    let pair = build_sld_pair(&probe, &th).unwrap();
    assert!(pair.gamma.linear().norm() > 1e-3);
    let fd = weak_derivative(&probe, th.gamma(), th.nbar(), Parameter::Gamma, &pair.gamma);
    assert!(rel(fd, qfi(Parameter::Gamma, ProbeClass::Coherent, 1.0, &th).unwrap()) < 1e-8);
    let tm = build_sld_pair(&make_probe(ProbeClass::TwoModeSqueezedVacuum, 1.0).unwrap(), &th).unwrap();
    assert!(tm.gamma.linear().norm() < 1e-14);
}

/// `tr[rho Q^4]` on a thermal state in a truncated Fock basis.
fn fock_fourth_moment(nbar: f64, cutoff: usize) -> f64 {
    let dim = cutoff + 4;
    let mut q = DMatrix::<f64>::zeros(dim, dim);
    for k in 1..dim {
        let v = (k as f64 / 2.0).sqrt();
        q[(k - 1, k)] = v;
        q[(k, k - 1)] = v;
    }
    let q2 = &q * &q;
    let q4 = &q2 * &q2;
    (0..cutoff)
        .map(|k| nbar.powi(k as i32) / (1.0 + nbar).powi(k as i32 + 1) * q4[(k, k)])
        .sum()
}

#[test]
fn wick_fourth_moment_matches_fock_oracle() {
    for &nbar in &[0.0, 0.4, 1.3] {
        let state = make_probe(ProbeClass::Thermal, nbar).unwrap();
        let mut m = DMatrix::zeros(2, 2);
        m[(0, 0)] = C::new(1.0, 0.0);
        let q2 = QuadraticObservable::new(DVector::zeros(2), C::new(0.0, 0.0), DVector::zeros(2), m).unwrap();
        let wick = wick_expectation(&state, &q2, &q2);
        let s11 = nbar + 0.5;
        assert!((wick.re - 3.0 * s11 * s11).abs() < 1e-12);
        assert!(wick.im.abs() < 1e-15);
        assert!((wick.re - fock_fourth_moment(nbar, 60)).abs() < 1e-9);
    }
}

#[test]
fn wick_pairing_is_conjugation_symmetric() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let state = apply_channel(
        &make_probe(ProbeClass::TwoModeSqueezedVacuum, 1.2).unwrap(),
        &theta(0.4, 0.3),
    )
    .unwrap();
    let state = GaussianStateF64::new(2, vec![0.3, -0.2, 0.1, 0.5], state.cov_row_major().to_vec()).unwrap();
    let mut random_obs = || {
        let c = |rng: &mut ChaCha8Rng| C::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let center = DVector::from_fn(4, |_, _| rng.random_range(-1.0..1.0));
        let lin = DVector::from_fn(4, |_, _| c(&mut rng));
        let quad = DMatrix::from_fn(4, 4, |_, _| c(&mut rng));
        QuadraticObservable::new(center, c(&mut rng), lin, quad).unwrap()
    };
    for _ in 0..20 {
        let (a, b) = (random_obs(), random_obs());
        let ab = wick_expectation(&state, &a, &b);
        let ba = wick_expectation(&state, &b.adjoint(), &a.adjoint());
        assert!((ab - ba.conj()).norm() < 1e-12 * ab.norm().max(1.0));
    }
}

#[test]
fn single_mode_qfi_matrix_matches_output_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..100 {
        let class = [
            ProbeClass::Coherent,
            ProbeClass::Thermal,
            ProbeClass::SingleModeSqueezed,
        ][rng.random_range(0..3)];
        let n = rng.random_range(0.05..5.0);
        let th = theta(rng.random_range(0.05..2.0), rng.random_range(0.05..3.0));
        let probe = make_probe(class, n).unwrap();
        let out = apply_channel(&probe, &th).unwrap();
        let (jg, jn) = single_mode_output_yields(&out, &th).unwrap();
        let j = qfi_matrix(&probe, &th).unwrap();
        assert!((j[0][0] - jg).abs() <= 1e-8 * jg.max(1e-6), "{class}");
        assert!(rel(j[1][1], jn) < 1e-8, "{class}");
    }
}

#[test]
fn temperature_cost_from_qfi_matrix() {
    let th = theta(std::f64::consts::LN_2, 1.0);
    let j = qfi_matrix(&make_probe(ProbeClass::TwoModeSqueezedVacuum, 1.0).unwrap(), &th).unwrap();
    let cost = weighted_cr_bound(&WeightMatrixF64::nbar_only(), j).unwrap();
    let single = 1.0 / qfi(Parameter::Nbar, ProbeClass::TwoModeSqueezedVacuum, 1.0, &th).unwrap();
    if j[0][1].abs() < 1e-12 * j[0][0] {
        assert!(rel(cost, single) < 1e-8);
    } else {
        assert!(cost > single);
    }
}

#[test]
fn near_pure_outputs_are_rejected() {
    let tmsv = make_probe(ProbeClass::TwoModeSqueezedVacuum, 1.0).unwrap();
    assert!(qfi_matrix(&tmsv, &theta(0.0, 0.5)).is_err());
    assert!(qfi_matrix(&GaussianStateF64::vacuum(2), &theta(0.5, 0.0)).is_err());
}
