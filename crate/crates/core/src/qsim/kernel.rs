//! Amplitude-vector kernels. Qubit 0 is the most significant index bit.

use num_complex::Complex64 as C64;

use super::gate::Mat2;

#[inline]
fn bit(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

pub(crate) fn apply_1q(v: &mut [C64], n_qubits: usize, q: usize, m: &Mat2) {
    let stride = bit(n_qubits, q);
    let mut base = 0;
    while base < v.len() {
        for i in base..base + stride {
            let (a, b) = (v[i], v[i + stride]);
            v[i] = m[0][0] * a + m[0][1] * b;
            v[i + stride] = m[1][0] * a + m[1][1] * b;
        }
        base += 2 * stride;
    }
}

pub(crate) fn apply_controlled(v: &mut [C64], n_qubits: usize, control: usize, target: usize, m: &Mat2) {
    let cmask = bit(n_qubits, control);
    let tmask = bit(n_qubits, target);
    for i in 0..v.len() {
        if i & cmask == 0 || i & tmask != 0 {
            continue;
        }
        let j = i | tmask;
        let (a, b) = (v[i], v[j]);
        v[i] = m[0][0] * a + m[0][1] * b;
        v[j] = m[1][0] * a + m[1][1] * b;
    }
}
