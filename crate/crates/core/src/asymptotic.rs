//! Large-nbar branch decomposition of the joint state into three
//! qubit-state x coherent-field products, used for overlay markers, the
//! predicted heralded phase, and branch-weight diagnostics.

use std::f64::consts::PI;

use crate::hilbert::{coherent_row, CoherentPrep, JointState, QubitLabel, SystemParams};
use crate::{Error, C64};

/// One branch of the decomposition: an (unnormalized, as printed) qubit
/// 4-vector, the coherent label of its field factor and the branch's global
/// phase. Squared norms of the qubit vectors are 1/4, 1/2, 1/4 for
/// k = -1, 0, +1.
#[derive(Debug, Clone)]
pub struct GeaBranch {
    pub k: i32,
    pub qubit_state: [C64; 4],
    /// Coherent label alpha_k(t) = e^{-i(omega + k lambda/sqrt(nbar)) t} alpha.
    pub field_alpha: C64,
    /// e^{-i k lambda sqrt(nbar) t}.
    pub global_phase: C64,
}

impl GeaBranch {
    pub fn weight(&self) -> f64 {
        self.qubit_state.iter().map(|a| a.norm_sqr()).sum()
    }
}

fn branch_frequency(params: &SystemParams, prep: &CoherentPrep, k: i32) -> f64 {
    if prep.nbar == 0.0 {
        params.omega
    } else {
        params.omega + k as f64 * params.lambda() / prep.nbar.sqrt()
    }
}

/// The three branches at time t. Physically meaningful for nbar >> 1; no
/// hard validity check is made.
pub fn branches(params: SystemParams, prep: CoherentPrep, t: f64) -> Result<[GeaBranch; 3], Error> {
    if !params.is_symmetric_resonant() {
        return Err(Error::NotSymmetricResonant);
    }
    let alpha = prep.alpha();
    let theta = prep.theta;
    let mk = |k: i32| -> GeaBranch {
        let w = branch_frequency(&params, &prep, k);
        let qubit_state = if k == 0 {
            [
                C64::new(0.5, 0.0),
                C64::new(0.0, 0.0),
                C64::new(0.0, 0.0),
                C64::from_polar(0.5, -2.0 * (theta + PI / 2.0 + params.omega * t)),
            ]
        } else {
            let sign = k as f64; // +1 branch adds the symmetric term, -1 subtracts
            let one = C64::from_polar(0.25, -(w * t + theta));
            [
                C64::new(0.25, 0.0),
                sign * one,
                sign * one,
                C64::from_polar(0.25, -2.0 * (w * t + theta)),
            ]
        };
        GeaBranch {
            k,
            qubit_state,
            field_alpha: C64::from_polar(1.0, -w * t) * alpha,
            global_phase: C64::from_polar(1.0, -(k as f64) * params.lambda() * prep.nbar.sqrt() * t),
        }
    };
    Ok([mk(-1), mk(0), mk(1)])
}

/// Relative phase of the heralded state (|gg> + e^{-i phi}|ee>)/sqrt(2)
/// produced when the central-branch quadrature peak is measured:
/// phi = 2(theta + pi/2 + omega t) mod 2 pi.
pub fn predicted_phase(params: SystemParams, prep: CoherentPrep, t: f64) -> f64 {
    let phi = 2.0 * (prep.theta + PI / 2.0 + params.omega * t);
    phi.rem_euclid(2.0 * PI)
}

/// Coherent labels alpha_k and their quadrature overlays x_k = 2 Re(alpha_k),
/// for k = -1, 0, +1.
pub fn blob_markers(params: SystemParams, prep: CoherentPrep, t: f64) -> [(i32, C64, f64); 3] {
    let alpha = prep.alpha();
    std::array::from_fn(|j| {
        let k = j as i32 - 1;
        let a = C64::from_polar(1.0, -branch_frequency(&params, &prep, k) * t) * alpha;
        (k, a, 2.0 * a.re)
    })
}

/// Assemble the full joint state from the three branches: amplitude(r, n) =
/// sum_k global_k D_k[r] <n|alpha_k>. Approximate for finite nbar; the norm
/// is close to but not exactly 1.
pub fn reconstruct(params: SystemParams, prep: CoherentPrep, t: f64) -> Result<JointState, Error> {
    let brs = branches(params, prep, t)?;
    let mut out = JointState::zero(params, prep);
    out.time = t;
    for br in &brs {
        let row = coherent_row(br.field_alpha, prep.n_max);
        for label in QubitLabel::ALL {
            let coeff = br.global_phase * br.qubit_state[label.index()];
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            for (n, cn) in row.iter().enumerate() {
                *out.amplitude_mut(label, n) += coeff * cn;
            }
        }
    }
    Ok(out)
}
