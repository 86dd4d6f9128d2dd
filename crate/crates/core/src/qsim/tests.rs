use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use super::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn ket0() -> [C64; 2] {
    [c(1.0), c(0.0)]
}

fn plus() -> [C64; 2] {
    [c(FRAC_1_SQRT_2), c(FRAC_1_SQRT_2)]
}

fn bell() -> StateVector {
    let s = StateVector::product(&[plus(), ket0()]).unwrap();
    s.apply_gate(&Gate::cnot(0, 1).unwrap(), &[]).unwrap()
}

/// Fidelity |⟨a|b⟩|², insensitive to global phase.
fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).unwrap().norm_sqr()
}

// ---- Kronecker-product oracle -------------------------------------------

type Dense = Vec<Vec<C64>>;

fn kron(a: &Dense, b: &Dense) -> Dense {
    let (ra, rb) = (a.len(), b.len());
    let mut out = vec![vec![c(0.0); ra * rb]; ra * rb];
    for i in 0..ra {
        for j in 0..ra {
            for k in 0..rb {
                for l in 0..rb {
                    out[i * rb + k][j * rb + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn dense(m: Mat2) -> Dense {
    m.iter().map(|r| r.to_vec()).collect()
}

fn eye2() -> Dense {
    dense([[c(1.0), c(0.0)], [c(0.0), c(1.0)]])
}

fn add(a: &Dense, b: &Dense) -> Dense {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect()
}

/// ⊗ of per-qubit factors, qubit 0 leftmost.
fn kron_chain(factors: &[Dense]) -> Dense {
    factors[1..].iter().fold(factors[0].clone(), |acc, f| kron(&acc, f))
}

fn oracle_matrix(gate: &Gate, n: usize, params: &[f64]) -> Dense {
    let theta = gate.angle().map(|a| a.resolve(params).unwrap()).unwrap_or(0.0);
    let target = match gate.kind() {
        GateKind::Rx => rx(theta),
        GateKind::Ry => ry(theta),
        GateKind::Rz | GateKind::Crz => rz(theta),
        GateKind::Cnot => pauli_x(),
        GateKind::Cz => pauli_z(),
    };
    let q = gate.qubits();
    if q.len() == 1 {
        let f: Vec<Dense> = (0..n).map(|i| if i == q[0] { dense(target) } else { eye2() }).collect();
        return kron_chain(&f);
    }
    let p0 = dense([[c(1.0), c(0.0)], [c(0.0), c(0.0)]]);
    let p1 = dense([[c(0.0), c(0.0)], [c(0.0), c(1.0)]]);
    let off: Vec<Dense> = (0..n).map(|i| if i == q[0] { p0.clone() } else { eye2() }).collect();
    let on: Vec<Dense> = (0..n)
        .map(|i| {
            if i == q[0] {
                p1.clone()
            } else if i == q[1] {
                dense(target)
            } else {
                eye2()
            }
        })
        .collect();
    add(&kron_chain(&off), &kron_chain(&on))
}

fn matvec(m: &Dense, v: &[C64]) -> Vec<C64> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn random_gate(n: usize, kind: u8, a: usize, b: usize, angle: f64) -> Gate {
    let q0 = a % n;
    let q1 = (q0 + 1 + b % (n.max(2) - 1)) % n;
    match (kind % 6, n) {
        (0, _) => Gate::rx(q0, Angle::Fixed(angle)),
        (1, _) => Gate::ry(q0, Angle::Fixed(angle)),
        (2, _) | (3..=5, 1) => Gate::rz(q0, Angle::Fixed(angle)),
        (3, _) => Gate::cnot(q0, q1).unwrap(),
        (4, _) => Gate::cz(q0, q1).unwrap(),
        _ => Gate::crz(q0, q1, Angle::Fixed(angle)).unwrap(),
    }
}

// ---- spec examples ------------------------------------------------------

#[test]
fn ry_pi_flips_zero_to_one() {
    let s = StateVector::zero(1).unwrap();
    let out = s.apply_gate(&Gate::ry(0, Angle::Fixed(PI)), &[]).unwrap();
    let a = out.amplitudes();
    assert!(a[0].norm() < 1e-15);
    assert!((a[1] - c(1.0)).norm() < 1e-15);
}

#[test]
fn rz_leaves_zero_state_invariant_up_to_phase() {
    let s = StateVector::zero(1).unwrap();
    let out = s.apply_gate(&Gate::rz(0, Angle::Fixed(1.234)), &[]).unwrap();
    assert!((overlap(&s, &out) - 1.0).abs() < 1e-14);
    assert!((out.expectation_z(0).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn cnot_prepares_bell_state() {
    let b = bell();
    let a = b.amplitudes();
    assert!((a[0] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    assert!((a[3] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
    assert!(a[1].norm() < 1e-15 && a[2].norm() < 1e-15);
}

#[test]
fn gate_errors() {
    let s = StateVector::zero(2).unwrap();
    assert_eq!(
        s.apply_gate(&Gate::rx(2, Angle::Fixed(0.1)), &[]).unwrap_err(),
        Error::QubitOutOfRange { index: 2, n_qubits: 2 }
    );
    assert_eq!(
        s.apply_gate(&Gate::rx(0, Angle::Slot(1)), &[0.3]).unwrap_err(),
        Error::ParamSlotOutOfRange { slot: 1, len: 1 }
    );
    assert!(StateVector::from_amplitudes(1, vec![c(1.0), c(1.0)]).is_err());
    assert!(StateVector::from_amplitudes(2, vec![c(1.0), c(0.0)]).is_err());
}

#[test]
fn expectation_z_examples() {
    let zero = StateVector::zero(1).unwrap();
    let one = StateVector::basis(1, 1).unwrap();
    assert_eq!(expectation_z(&zero, 0).unwrap(), 1.0);
    assert_eq!(expectation_z(&one, 0).unwrap(), -1.0);
    assert!(expectation_z(&bell(), 0).unwrap().abs() < 1e-15);
    assert!(expectation_z(&zero, 1).is_err());
}

#[test]
fn partial_trace_examples() {
    let r = bell().partial_trace(&[0]).unwrap();
    let want = [0.5, 0.0, 0.0, 0.5];
    for (z, w) in r.entries().iter().zip(want) {
        assert!((z - c(w)).norm() < 1e-15);
    }

    let prod = StateVector::product(&[ket0(), plus()]).unwrap();
    let r = prod.partial_trace(&[1]).unwrap();
    let plus_state = StateVector::product(&[plus()]).unwrap();
    assert!((r.fidelity(&plus_state).unwrap() - 1.0).abs() < 1e-14);
    assert!((r.purity() - 1.0).abs() < 1e-12);

    assert_eq!(bell().partial_trace(&[]).unwrap_err(), Error::InvalidKeepSet);
    assert_eq!(bell().partial_trace(&[0, 0]).unwrap_err(), Error::InvalidKeepSet);
    assert!(bell().partial_trace(&[5]).is_err());
}

/// Brute-force contraction: ρ_keep[i][j] = Σ_env ψ[i,env] ψ*[j,env].
fn brute_partial_trace(state: &StateVector, keep: &[usize]) -> Vec<C64> {
    let n = state.n_qubits();
    let a = state.amplitudes();
    let k = keep.len();
    let sub = |idx: usize| -> usize {
        keep.iter().fold(0, |acc, &q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
    };
    let env = |idx: usize| -> usize {
        (0..n)
            .filter(|q| !keep.contains(q))
            .fold(0, |acc, q| (acc << 1) | ((idx >> (n - 1 - q)) & 1))
    };
    let kd = 1 << k;
    let mut out = vec![c(0.0); kd * kd];
    for x in 0..a.len() {
        for y in 0..a.len() {
            if env(x) == env(y) {
                out[sub(x) * kd + sub(y)] += a[x] * a[y].conj();
            }
        }
    }
    out
}

#[test]
fn ghz_reduced_state_matches_brute_force() {
    let h = FRAC_1_SQRT_2;
    let mut amps = vec![c(0.0); 8];
    amps[0] = c(h);
    amps[7] = c(h);
    let ghz = StateVector::from_amplitudes(3, amps).unwrap();
    let r = ghz.partial_trace(&[0, 1]).unwrap();
    let brute = brute_partial_trace(&ghz, &[0, 1]);
    for (x, y) in r.entries().iter().zip(&brute) {
        assert!((x - y).norm() < 1e-15);
    }
    // ½(|00⟩⟨00| + |11⟩⟨11|)
    for i in 0..4 {
        for j in 0..4 {
            let want = if i == j && (i == 0 || i == 3) { 0.5 } else { 0.0 };
            assert!((r.get(i, j) - c(want)).norm() < 1e-15);
        }
    }
}

#[test]
fn state_fidelity_examples() {
    let zero = StateVector::zero(1).unwrap();
    let plus_s = StateVector::product(&[plus()]).unwrap();
    assert!((state_fidelity(&zero.to_density(), &zero).unwrap() - 1.0).abs() < 1e-15);
    let mixed = DensityMatrix::maximally_mixed(1).unwrap();
    assert!((state_fidelity(&mixed, &plus_s).unwrap() - 0.5).abs() < 1e-15);
    assert!((state_fidelity(&plus_s.to_density(), &zero).unwrap() - 0.5).abs() < 1e-15);
    assert!(state_fidelity(&mixed, &bell()).is_err());
}

#[test]
fn sampling_examples() {
    let zero = StateVector::zero(1).unwrap();
    let one = StateVector::basis(1, 1).unwrap();
    for shots in [1, 7, 1000] {
        assert_eq!(sample_z(&zero, 0, shots, 3).unwrap(), 1.0);
        assert_eq!(sample_z(&one, 0, shots, 3).unwrap(), -1.0);
    }
    assert_eq!(sample_z(&zero, 0, 0, 3).unwrap_err(), Error::ZeroShots);

    let p = StateVector::product(&[plus()]).unwrap();
    let a = sample_z(&p, 0, 1000, 11).unwrap();
    assert_eq!(a, sample_z(&p, 0, 1000, 11).unwrap());
    // 5σ of the binomial standard error 1/√1000
    assert!(a.abs() < 5.0 / 1000f64.sqrt());
}

#[test]
fn sample_mean_converges_to_expectation() {
    let s = StateVector::zero(1)
        .unwrap()
        .apply_gate(&Gate::ry(0, Angle::Fixed(1.1)), &[])
        .unwrap();
    let z = s.expectation_z(0).unwrap();
    let shots = 1000;
    let seeds = 100;
    let mean = (0..seeds).map(|k| sample_z(&s, 0, shots, k).unwrap()).sum::<f64>() / seeds as f64;
    let se = ((1.0 - z * z) / (shots * seeds) as f64).sqrt();
    assert!((mean - z).abs() < 3.0 * se, "mean {mean} vs {z} (se {se})");
}

/// (1−p)ρ + (p/3)(XρX + YρY + ZρZ) by explicit Pauli conjugation.
fn depolarize_by_pauli_sum(rho: &DensityMatrix, q: usize, p: f64) -> Vec<C64> {
    let n = rho.n_qubits();
    let d = rho.dim();
    let full = |m: Mat2| -> Dense {
        let f: Vec<Dense> = (0..n).map(|i| if i == q { dense(m) } else { eye2() }).collect();
        kron_chain(&f)
    };
    let r: Dense = (0..d).map(|i| (0..d).map(|j| rho.get(i, j)).collect()).collect();
    let conj_by = |m: &Dense| -> Dense {
        // m r m† with Hermitian Paulis
        let mr: Dense = (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| m[i][k] * r[k][j]).sum()).collect())
            .collect();
        (0..d)
            .map(|i| (0..d).map(|j| (0..d).map(|k| mr[i][k] * m[j][k].conj()).sum()).collect())
            .collect()
    };
    let terms = [conj_by(&full(pauli_x())), conj_by(&full(pauli_y())), conj_by(&full(pauli_z()))];
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let s: C64 = terms.iter().map(|t| t[i][j]).sum();
            out.push(r[i][j] * (1.0 - p) + s * (p / 3.0));
        }
    }
    out
}

#[test]
fn depolarizing_examples() {
    let rho = StateVector::zero(1).unwrap().to_density();
    assert_eq!(apply_depolarizing(&rho, 0, 0.0).unwrap(), rho);

    let full = apply_depolarizing(&rho, 0, 0.75).unwrap();
    for (z, w) in full.entries().iter().zip([0.5, 0.0, 0.0, 0.5]) {
        assert!((z - c(w)).norm() < 1e-15);
    }

    let p = 0.01;
    let out = apply_depolarizing(&rho, 0, p).unwrap();
    let oracle = depolarize_by_pauli_sum(&rho, 0, p);
    for (z, w) in out.entries().iter().zip(&oracle) {
        assert!((z - w).norm() < 1e-15);
    }
    assert!((out.get(0, 0).re - (1.0 - 2.0 * p / 3.0)).abs() < 1e-15);
    assert!((out.get(1, 1).re - 2.0 * p / 3.0).abs() < 1e-15);

    assert_eq!(apply_depolarizing(&rho, 0, 1.5).unwrap_err(), Error::InvalidProbability(1.5));
    assert!(apply_depolarizing(&rho, 0, -0.1).is_err());
}

#[test]
fn entangled_pair_has_half_purity() {
    assert!((bell().partial_trace(&[1]).unwrap().purity() - 0.5).abs() < 1e-9);
}

#[test]
fn density_pauli_expectation_matches_statevector() {
    let b = bell();
    let zz = PauliString::z_string([0, 1]).unwrap();
    let xx = PauliString::new([(0, Pauli::X), (1, Pauli::X)]).unwrap();
    for p in [zz, xx, PauliString::single(0, Pauli::Y)] {
        let sv = b.expectation_pauli(&p).unwrap();
        let dm = b.to_density().expectation_pauli(&p).unwrap();
        assert!((sv - dm).abs() < 1e-14);
    }
    assert!((b.expectation_pauli(&PauliString::z_string([0, 1]).unwrap()).unwrap() - 1.0).abs() < 1e-14);
}

#[test]
fn noisy_circuit_run_inserts_channel_per_layer() {
    let mut circ = Circuit::new(1).unwrap();
    circ.push(Gate::rx(0, Angle::Slot(0))).unwrap();
    circ.end_layer();
    circ.push(Gate::rx(0, Angle::Slot(1))).unwrap();
    circ.end_layer();
    let rho0 = StateVector::zero(1).unwrap().to_density();
    let noise = NoiseSpec::depolarizing(0.1).unwrap();
    let out = circ.run_density(&rho0, &[0.0, 0.0], &noise).unwrap();
    // two rounds of ⟨Z⟩ ↦ (1 − 4p/3)⟨Z⟩
    let shrink = 1.0 - 4.0 * 0.1 / 3.0;
    assert!((out.expectation_z(0).unwrap() - shrink * shrink).abs() < 1e-14);
    let clean = circ.run_density(&rho0, &[0.3, 0.4], &NoiseSpec::none()).unwrap();
    let pure = circ.run(&StateVector::zero(1).unwrap(), &[0.3, 0.4]).unwrap();
    for (a, b) in clean.entries().iter().zip(pure.to_density().entries()) {
        assert!((a - b).norm() < 1e-14);
    }
}

proptest! {
    #[test]
    fn gates_match_kronecker_oracle(
        n in 1usize..=3,
        gates in prop::collection::vec((0u8..6, 0usize..3, 0usize..3, -6.3f64..6.3), 1..12),
        seed_amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
    ) {
        let dim = 1 << n;
        let raw: Vec<C64> = seed_amps[..dim].iter().map(|&(r, i)| C64::new(r, i)).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let amps: Vec<C64> = raw.iter().map(|z| z / norm).collect();
        let mut state = StateVector::from_amplitudes(n, amps.clone()).unwrap();
        let mut reference = amps;
        let mut rho = state.to_density();
        for &(k, a, b, angle) in &gates {
            let g = random_gate(n, k, a, b, angle);
            let m = oracle_matrix(&g, n, &[]);
            reference = matvec(&m, &reference);
            state.apply_gate_mut(&g, &[]).unwrap();
            rho.apply_gate_mut(&g, &[]).unwrap();
        }
        for (x, y) in state.amplitudes().iter().zip(&reference) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        prop_assert!((state.norm() - 1.0).abs() < 1e-10);
        let pure = state.to_density();
        for (x, y) in rho.entries().iter().zip(pure.entries()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_matches_contraction(
        seed_amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8),
        keep in prop::sample::subsequence(vec![0usize, 1, 2], 1..=3),
        reverse in any::<bool>(),
    ) {
        let raw: Vec<C64> = seed_amps.iter().map(|&(r, i)| C64::new(r, i)).collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let s = StateVector::from_amplitudes(3, raw.iter().map(|z| z / norm).collect()).unwrap();
        let mut keep = keep;
        if reverse { keep.reverse(); }
        let r = s.partial_trace(&keep).unwrap();
        for (x, y) in r.entries().iter().zip(brute_partial_trace(&s, &keep)) {
            prop_assert!((x - y).norm() < 1e-12);
        }
        prop_assert!(r.is_hermitian(1e-10));
        prop_assert!((r.trace() - 1.0).abs() < 1e-10);
        prop_assert!(r.min_eigenvalue() > -1e-9);
    }

    #[test]
    fn depolarizing_preserves_density_invariants(
        p in 0.0f64..=1.0,
        q in 0usize..2,
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let s = StateVector::zero(2).unwrap()
            .apply_gate(&Gate::ry(0, Angle::Fixed(a)), &[]).unwrap()
            .apply_gate(&Gate::crz(0, 1, Angle::Fixed(b)).unwrap(), &[]).unwrap()
            .apply_gate(&Gate::rx(1, Angle::Fixed(a * b)), &[]).unwrap();
        let out = s.to_density().apply_depolarizing(q, p).unwrap();
        prop_assert!(out.is_hermitian(1e-10));
        prop_assert!((out.trace() - 1.0).abs() < 1e-10);
        prop_assert!(out.min_eigenvalue() > -1e-9);
        let oracle = depolarize_by_pauli_sum(&s.to_density(), q, p);
        for (x, y) in out.entries().iter().zip(&oracle) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }
}
