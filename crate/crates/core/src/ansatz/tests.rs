use std::f64::consts::{FRAC_PI_2, PI};

use super::*;
use crate::loss::ObservableSpec;
use crate::qsim::{ChannelMode, StateVector};

#[test]
fn pqc3_parameter_counts() {
    assert_eq!(build_pqc3(&AnsatzSpec::pqc3(2, 1)).unwrap().n_params(), 5);
    assert_eq!(build_pqc3(&AnsatzSpec::pqc3(10, 5)).unwrap().n_params(), 145);
    let single = build_pqc3(&AnsatzSpec::pqc3(1, 1)).unwrap();
    assert_eq!(single.n_params(), 2);
    assert!(single.gates().iter().all(|g| g.qubits().len() == 1));
    assert!(build_pqc3(&AnsatzSpec::pqc3(0, 1)).is_err());
    assert!(build_pqc3(&AnsatzSpec::pqc3(2, 0)).is_err());
}

#[test]
fn pqc3_count_formula_over_grid() {
    for n in 1..=12 {
        for l in 1..=10 {
            let spec = AnsatzSpec::pqc3(n, l);
            let c = build_pqc3(&spec).unwrap();
            assert_eq!(c.n_params(), l * (2 * n + (n - 1)));
            assert_eq!(spec.param_count(), c.n_params());
            assert_eq!(c.n_layers(), l);
            assert_eq!(c.slot_shift_rules().unwrap().len(), c.n_params());
        }
    }
}

#[test]
fn angle_encoding_examples() {
    let zero = StateVector::zero(2).unwrap();
    let id = angle_encode(&[0.0], 2).unwrap().run(&zero, &[]).unwrap();
    assert!((id.inner(&zero).unwrap().norm_sqr() - 1.0).abs() < 1e-15);

    let flipped = angle_encode(&[PI], 1).unwrap().run(&StateVector::zero(1).unwrap(), &[]).unwrap();
    assert!((flipped.expectation_z(0).unwrap() + 1.0).abs() < 1e-15);

    let half = angle_encode(&[FRAC_PI_2], 1).unwrap().run(&StateVector::zero(1).unwrap(), &[]).unwrap();
    assert!(half.expectation_z(0).unwrap().abs() < 1e-15);
    let a = half.amplitudes();
    assert!((a[0].re - a[1].re).abs() < 1e-15);

    assert_eq!(
        angle_encode(&[0.1, 0.2, 0.3], 2).unwrap_err(),
        Error::TooManyFeatures { features: 3, n_qubits: 2 }
    );
}

#[test]
fn init_schemes() {
    let p = init_params(&InitScheme::RandomNormal { sigma: 0.1 }, 145, 42).unwrap();
    let mean = p.iter().sum::<f64>() / 145.0;
    let sd = (p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 144.0).sqrt();
    assert!((0.08..=0.12).contains(&sd), "sample sd {sd}");

    let q = init_params(&InitScheme::IdentityNearZero { epsilon: 1e-3 }, 64, 1).unwrap();
    assert!(q.iter().all(|v| v.abs() <= 1e-3));

    for scheme in [
        InitScheme::RandomNormal { sigma: 0.1 },
        InitScheme::IdentityNearZero { epsilon: 0.5 },
    ] {
        assert_eq!(init_params(&scheme, 10, 9).unwrap(), init_params(&scheme, 10, 9).unwrap());
        assert_ne!(init_params(&scheme, 10, 9).unwrap(), init_params(&scheme, 10, 10).unwrap());
    }

    let warm = ParamVector::new(vec![0.5, -0.5]).unwrap();
    let ws = InitScheme::WarmStart { params: warm.clone() };
    assert_eq!(init_params(&ws, 2, 0).unwrap(), warm);
    assert!(init_params(&ws, 3, 0).is_err());

    assert_eq!(init_params(&InitScheme::RandomNormal { sigma: 0.1 }, 0, 1).unwrap_err(), Error::EmptyParams);
    assert!(init_params(&InitScheme::RandomNormal { sigma: 0.0 }, 3, 1).is_err());
    assert!(init_params(&InitScheme::IdentityNearZero { epsilon: -1.0 }, 3, 1).is_err());
}

#[test]
fn param_vector_rejects_non_finite() {
    assert_eq!(ParamVector::new(vec![0.0, f64::NAN]).unwrap_err(), Error::NonFiniteParam(1));
    let p = ParamVector::new(vec![1.0, 2.0]).unwrap();
    assert_ne!(p.snapshot_hash(), ParamVector::new(vec![2.0, 1.0]).unwrap().snapshot_hash());
}

fn ry_circuit() -> Circuit {
    let mut c = Circuit::new(1).unwrap();
    c.push(Gate::ry(0, Angle::Slot(0))).unwrap();
    c
}

#[test]
fn cosine_gradient_examples() {
    let c = ry_circuit();
    let zero = StateVector::zero(1).unwrap();
    let z = ObservableSpec::z(0);
    let g = grad_parameter_shift(&c, &[FRAC_PI_2], &z, &ChannelMode::Ideal, &zero, 0).unwrap();
    assert!((g[0] + 1.0).abs() < 1e-14);
    let g0 = grad_parameter_shift(&c, &[0.0], &z, &ChannelMode::Ideal, &zero, 0).unwrap();
    assert!(g0[0].abs() < 1e-15);
}

#[test]
fn shared_slots_are_rejected() {
    let mut c = Circuit::new(1).unwrap();
    c.push(Gate::rx(0, Angle::Slot(0))).unwrap();
    c.push(Gate::rz(0, Angle::Slot(0))).unwrap();
    let zero = StateVector::zero(1).unwrap();
    let err = grad_parameter_shift(&c, &[0.3], &ObservableSpec::z(0), &ChannelMode::Ideal, &zero, 0);
    assert_eq!(err.unwrap_err(), Error::SharedParamSlot(0));
    let wrong_len = grad_parameter_shift(&ry_circuit(), &[0.3, 0.1], &ObservableSpec::z(0), &ChannelMode::Ideal, &zero, 0);
    assert!(wrong_len.is_err());
}

fn central_difference<F: Fn(&[f64]) -> f64>(f: F, x: &[f64], h: f64) -> Vec<f64> {
    (0..x.len())
        .map(|j| {
            let mut a = x.to_vec();
            let mut b = x.to_vec();
            a[j] += h;
            b[j] -= h;
            (f(&a) - f(&b)) / (2.0 * h)
        })
        .collect()
}

#[test]
fn shift_rule_matches_finite_differences() {
    use crate::loss::ObservableSpec as O;
    use crate::qsim::{Pauli, PauliString};
    let circ = build_pqc3(&AnsatzSpec::pqc3(3, 2)).unwrap();
    let obs = O::new(vec![
        (PauliString::z_string([0, 1, 2]).unwrap(), 1.0),
        (PauliString::new([(1, Pauli::X), (2, Pauli::Y)]).unwrap(), -0.7),
        (PauliString::single(2, Pauli::X), 0.4),
    ])
    .unwrap();
    let input = StateVector::zero(3).unwrap();
    for seed in 0..10 {
        let p = init_params(&InitScheme::RandomNormal { sigma: 1.5 }, circ.n_params(), seed).unwrap();
        let ps = grad_parameter_shift(&circ, &p, &obs, &ChannelMode::Ideal, &input, 0).unwrap();
        let fd = central_difference(|x| obs.expectation(&circ.run(&input, x).unwrap()).unwrap(), &p, 1e-5);
        let diff: f64 = ps.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(diff <= 1e-6 * scale, "seed {seed}: {diff} vs {scale}");
    }
}

#[test]
fn noisy_shift_rule_matches_finite_differences() {
    let circ = build_pqc3(&AnsatzSpec::pqc3(2, 2)).unwrap();
    let mode = ChannelMode::noisy(0.05).unwrap();
    let obs = ObservableSpec::z(1);
    let input = StateVector::zero(2).unwrap();
    let p = init_params(&InitScheme::RandomNormal { sigma: 1.0 }, circ.n_params(), 5).unwrap();
    let ps = grad_parameter_shift(&circ, &p, &obs, &mode, &input, 0).unwrap();
    let fd = central_difference(
        |x| match prepare(&circ, &input, x, &mode).unwrap() {
            Prepared::Mixed(r) => obs.expectation_density(&r).unwrap(),
            Prepared::Pure(_) => unreachable!(),
        },
        &p,
        1e-5,
    );
    for (a, b) in ps.iter().zip(&fd) {
        assert!((a - b).abs() < 1e-8);
    }
}

#[test]
fn shot_gradient_is_deterministic_and_close() {
    let c = ry_circuit();
    let zero = StateVector::zero(1).unwrap();
    let z = ObservableSpec::z(0);
    let mode = ChannelMode::shots(20_000).unwrap();
    let a = grad_parameter_shift(&c, &[1.0], &z, &mode, &zero, 3).unwrap();
    assert_eq!(a, grad_parameter_shift(&c, &[1.0], &z, &mode, &zero, 3).unwrap());
    // each shifted term has variance ≤ 1/shots; the half-difference ≤ 1/(2·shots)
    let se = (0.5f64 / 20_000.0).sqrt();
    assert!((a[0] + 1f64.sin()).abs() < 5.0 * se);
}

#[test]
fn identity_init_keeps_input_state() {
    let spec = AnsatzSpec::pqc3(3, 4);
    let circ = build_pqc3(&spec).unwrap();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let input = StateVector::product(&[[h.into(), h.into()], [1.0.into(), 0.0.into()], [h.into(), (-h).into()]]).unwrap();
    for seed in 0..20 {
        let p = init_params(&InitScheme::IdentityNearZero { epsilon: 1e-3 }, spec.param_count(), seed).unwrap();
        let out = circ.run(&input, &p).unwrap();
        assert!(input.inner(&out).unwrap().norm_sqr() >= 0.999);
    }
}
