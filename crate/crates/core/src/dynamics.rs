//! Time evolution of joint states.
//!
//! Two independent paths cross-validate each other: an exact block solver
//! that diagonalizes each fixed-excitation subspace of the rotating-wave
//! Hamiltonian (any parameters, any initial state), and the closed-form
//! solution valid for the symmetric resonant case starting from
//! |gg> tensor |alpha>.

use crate::hilbert::{coherent_coefficients, CoherentPrep, JointState, QubitLabel, SystemParams};
use crate::{Error, C64};

/// One invariant subspace of fixed total excitation N = (#excited qubits) + n.
///
/// Dimension is 1 for N = 0, 3 for N = 1 and 4 for N >= 2 (less when the
/// Fock truncation cuts into the block). Basis ordering is canonical:
/// descending photon number, i.e. (gg,N), (ge,N-1), (eg,N-1), (ee,N-2).
#[derive(Debug, Clone)]
pub struct ExcitationBlock {
    pub n_total: usize,
    pub basis: Vec<(QubitLabel, usize)>,
    pub dim: usize,
    pub h: [[f64; 4]; 4],
    pub eigenvalues: [f64; 4],
    /// Orthonormal eigenvectors, column k = eigenvectors[..][k].
    pub eigenvectors: [[f64; 4]; 4],
}

/// Cyclic Jacobi diagonalization of a small real symmetric matrix.
/// Converges to off-diagonal norm below 1e-14 of the matrix scale.
fn jacobi_eigh(mut a: [[f64; 4]; 4], dim: usize) -> ([f64; 4], [[f64; 4]; 4]) {
    let mut v = [[0.0; 4]; 4];
    for (i, row) in v.iter_mut().enumerate().take(dim) {
        row[i] = 1.0;
    }
    let scale: f64 = (0..dim)
        .flat_map(|i| (0..dim).map(move |j| (i, j)))
        .map(|(i, j)| a[i][j] * a[i][j])
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let tol = 1e-14 * scale;
    for _sweep in 0..64 {
        let off: f64 = (0..dim)
            .flat_map(|p| (p + 1..dim).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum::<f64>()
            .sqrt();
        if off < tol {
            break;
        }
        for p in 0..dim {
            for q in p + 1..dim {
                if a[p][q].abs() < f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for i in 0..dim {
                    let (aip, aiq) = (a[i][p], a[i][q]);
                    a[i][p] = c * aip - s * aiq;
                    a[i][q] = s * aip + c * aiq;
                }
                for j in 0..dim {
                    let (apj, aqj) = (a[p][j], a[q][j]);
                    a[p][j] = c * apj - s * aqj;
                    a[q][j] = s * apj + c * aqj;
                }
                for i in 0..dim {
                    let (vip, viq) = (v[i][p], v[i][q]);
                    v[i][p] = c * vip - s * viq;
                    v[i][q] = s * vip + c * viq;
                }
            }
        }
    }
    let mut eig = [0.0; 4];
    for i in 0..dim {
        eig[i] = a[i][i];
    }
    // Sort ascending, carrying the eigenvector columns along.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig[i].partial_cmp(&eig[j]).unwrap());
    let mut eig_sorted = [0.0; 4];
    let mut v_sorted = [[0.0; 4]; 4];
    for (k, &src) in order.iter().enumerate() {
        eig_sorted[k] = eig[src];
        for i in 0..dim {
            v_sorted[i][k] = v[i][src];
        }
    }
    (eig_sorted, v_sorted)
}

fn block_basis(n_total: usize, fock_cap: Option<usize>) -> Vec<(QubitLabel, usize)> {
    let mut basis = Vec::with_capacity(4);
    let candidates = [
        (QubitLabel::Gg, n_total as isize),
        (QubitLabel::Ge, n_total as isize - 1),
        (QubitLabel::Eg, n_total as isize - 1),
        (QubitLabel::Ee, n_total as isize - 2),
    ];
    for (label, n) in candidates {
        if n < 0 {
            continue;
        }
        let n = n as usize;
        if let Some(cap) = fock_cap {
            if n > cap {
                continue;
            }
        }
        basis.push((label, n));
    }
    basis
}

fn build_block_inner(params: &SystemParams, n_total: usize, fock_cap: Option<usize>) -> ExcitationBlock {
    let basis = block_basis(n_total, fock_cap);
    let dim = basis.len();
    let mut h = [[0.0; 4]; 4];
    for (i, &(label, n)) in basis.iter().enumerate() {
        h[i][i] = params.omega * (n as f64 + 0.5) + params.e1 * label.s1() + params.e2 * label.s2();
    }
    // a sigma_i^+ + h.c. links photon-number-adjacent basis states that flip
    // one qubit: <e., n-1| H |g., n> = lambda_i sqrt(n).
    for (i, &(li, ni)) in basis.iter().enumerate() {
        for (j, &(lj, nj)) in basis.iter().enumerate().skip(i + 1) {
            let elem = if ni == nj + 1 {
                // |li, ni> loses a photon, one qubit gets excited.
                match (li, lj) {
                    (QubitLabel::Gg, QubitLabel::Eg) | (QubitLabel::Ge, QubitLabel::Ee) => {
                        params.lambda1 * (ni as f64).sqrt()
                    }
                    (QubitLabel::Gg, QubitLabel::Ge) | (QubitLabel::Eg, QubitLabel::Ee) => {
                        params.lambda2 * (ni as f64).sqrt()
                    }
                    _ => 0.0,
                }
            } else {
                0.0
            };
            h[i][j] = elem;
            h[j][i] = elem;
        }
    }
    let (eigenvalues, eigenvectors) = jacobi_eigh(h, dim);
    ExcitationBlock { n_total, basis, dim, h, eigenvalues, eigenvectors }
}

/// Build the fixed-excitation block for total excitation `n_total`, with no
/// Fock truncation.
pub fn build_block(params: &SystemParams, n_total: usize) -> ExcitationBlock {
    build_block_inner(params, n_total, None)
}

/// Exact propagator: every block eigendecomposed once, after which evolution
/// to any time is O(n_max) small matrix-vector products.
#[derive(Debug, Clone)]
pub struct Propagator {
    pub params: SystemParams,
    pub n_max: usize,
    blocks: Vec<ExcitationBlock>,
}

impl Propagator {
    pub fn new(params: SystemParams, n_max: usize) -> Self {
        let blocks = (0..=n_max + 2)
            .map(|n_total| build_block_inner(&params, n_total, Some(n_max)))
            .collect();
        Self { params, n_max, blocks }
    }

    pub fn blocks(&self) -> &[ExcitationBlock] {
        &self.blocks
    }

    /// Apply V diag(e^{-i E_k t}) V^T blockwise. Unitary, so negative t is
    /// allowed and the norm is preserved.
    pub fn evolve(&self, state: &JointState, t: f64) -> JointState {
        assert_eq!(state.n_max(), self.n_max, "state truncation must match the propagator");
        let mut out = state.clone();
        out.time = state.time + t;
        for block in &self.blocks {
            let dim = block.dim;
            let mut a = [C64::new(0.0, 0.0); 4];
            for (i, &(label, n)) in block.basis.iter().enumerate() {
                a[i] = state.amplitude(label, n);
            }
            let mut y = [C64::new(0.0, 0.0); 4];
            for k in 0..dim {
                let mut acc = C64::new(0.0, 0.0);
                for (i, ai) in a.iter().enumerate().take(dim) {
                    acc += block.eigenvectors[i][k] * ai;
                }
                y[k] = acc * C64::from_polar(1.0, -block.eigenvalues[k] * t);
            }
            for (i, &(label, n)) in block.basis.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (k, yk) in y.iter().enumerate().take(dim) {
                    acc += block.eigenvectors[i][k] * yk;
                }
                *out.amplitude_mut(label, n) = acc;
            }
        }
        out
    }

    /// <H> of a state under this propagator's Hamiltonian.
    pub fn energy(&self, state: &JointState) -> f64 {
        let mut acc = 0.0;
        for block in &self.blocks {
            let dim = block.dim;
            let mut a = [C64::new(0.0, 0.0); 4];
            for (i, &(label, n)) in block.basis.iter().enumerate() {
                a[i] = state.amplitude(label, n);
            }
            for i in 0..dim {
                for j in 0..dim {
                    acc += (a[i].conj() * block.h[i][j] * a[j]).re;
                }
            }
        }
        acc
    }

    /// Probability of each total-excitation number N.
    pub fn excitation_distribution(&self, state: &JointState) -> Vec<f64> {
        self.blocks
            .iter()
            .map(|b| {
                b.basis
                    .iter()
                    .map(|&(label, n)| state.amplitude(label, n).norm_sqr())
                    .sum()
            })
            .collect()
    }
}

/// Convenience wrapper that builds a propagator for a single evolution; use
/// [`Propagator`] directly for sweeps.
pub fn evolve_numeric(state: &JointState, t: f64) -> JointState {
    Propagator::new(state.params, state.n_max()).evolve(state, t)
}

/// Closed-form evolution for the symmetric resonant case with the
/// |gg> tensor |alpha> start: per-n global phase e^{-i(omega/2)(2n-1)t} and
/// Rabi argument lambda t sqrt(2(2n-1)). Terms whose Fock index would be
/// negative vanish identically (their printed coefficients carry factors of
/// sqrt(n) or sqrt(n(n-1))), so n = 0 contributes only the gg component.
pub fn evolve_analytic(params: SystemParams, prep: CoherentPrep, t: f64) -> Result<JointState, Error> {
    if !params.is_symmetric_resonant() {
        return Err(Error::NotSymmetricResonant);
    }
    let coeffs = coherent_coefficients(&prep)?;
    // Same tail renormalization as initial_state, so the two paths agree to
    // machine precision.
    let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let lambda = params.lambda();
    let omega = params.omega;
    let mut out = JointState::zero(params, prep);
    out.time = t;
    for (n, &cn_raw) in coeffs.iter().enumerate() {
        let cn = cn_raw / norm;
        if cn.norm() == 0.0 {
            continue;
        }
        let nf = n as f64;
        let phase = C64::from_polar(1.0, -(omega / 2.0) * (2.0 * nf - 1.0) * t);
        let pre = cn * phase;
        if n == 0 {
            *out.amplitude_mut(QubitLabel::Gg, 0) += pre;
            continue;
        }
        let d = 2.0 * nf - 1.0;
        let rabi = lambda * t * (2.0 * d).sqrt();
        let (s, c) = rabi.sin_cos();
        *out.amplitude_mut(QubitLabel::Gg, n) += pre * ((nf * c + (nf - 1.0)) / d);
        let sym = pre * C64::new(0.0, -1.0) * (nf.sqrt() / (2.0 * d).sqrt() * s);
        *out.amplitude_mut(QubitLabel::Ge, n - 1) += sym;
        *out.amplitude_mut(QubitLabel::Eg, n - 1) += sym;
        if n >= 2 {
            *out.amplitude_mut(QubitLabel::Ee, n - 2) +=
                pre * ((nf * (nf - 1.0)).sqrt() / d * (c - 1.0));
        }
    }
    Ok(out)
}
