//! The truncated joint Hilbert space: basis indexing over the product basis
//! {gg, ge, eg, ee} x {Fock n}, coherent-state preparation, and norms.

use crate::{Error, C64};

/// Hard limit on the coherent tail mass left above the Fock truncation.
pub const TAIL_LIMIT: f64 = 1e-12;

/// Resonator and qubit parameters, hbar = 1.
///
/// `omega` is the resonator angular frequency, `e1`/`e2` the qubit charging
/// energies (sigma_z has eigenvalues +-1, so the qubit gap is 2E), and
/// `lambda1`/`lambda2` the qubit-resonator couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega: f64,
    pub e1: f64,
    pub e2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
}

impl SystemParams {
    pub fn new(omega: f64, e1: f64, e2: f64, lambda1: f64, lambda2: f64) -> Result<Self, Error> {
        if !(omega > 0.0) {
            return Err(Error::InvalidParams(format!("omega must be > 0, got {omega}")));
        }
        if lambda1 < 0.0 || lambda2 < 0.0 {
            return Err(Error::InvalidParams(format!(
                "couplings must be >= 0, got lambda1 = {lambda1}, lambda2 = {lambda2}"
            )));
        }
        Ok(Self { omega, e1, e2, lambda1, lambda2 })
    }

    /// Both qubits on resonance with the field and equally coupled:
    /// e1 = e2 = omega/2 and lambda1 = lambda2 = lambda.
    pub fn symmetric_resonant(omega: f64, lambda: f64) -> Result<Self, Error> {
        Self::new(omega, omega / 2.0, omega / 2.0, lambda, lambda)
    }

    /// True iff the closed-form evolution applies: the qubit gap 2E equals
    /// omega exactly and the two couplings are identical.
    pub fn is_symmetric_resonant(&self) -> bool {
        self.e1 == self.e2 && 2.0 * self.e1 == self.omega && self.lambda1 == self.lambda2
    }

    /// The common coupling in the symmetric resonant case.
    pub fn lambda(&self) -> f64 {
        self.lambda1
    }
}

/// Coherent field preparation: alpha = sqrt(nbar) e^{-i theta}, truncated at
/// Fock index `n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentPrep {
    pub nbar: f64,
    pub theta: f64,
    pub n_max: usize,
}

impl CoherentPrep {
    /// Default truncation policy: the smallest n_max >= ceil(nbar + 10
    /// sqrt(nbar)) whose Poisson tail mass is below `TAIL_LIMIT`. At small
    /// nbar the bare 10-sigma point can leave a tail marginally above the
    /// limit, so the bound is enforced directly.
    pub fn new(nbar: f64, theta: f64) -> Result<Self, Error> {
        if nbar < 0.0 {
            return Err(Error::InvalidParams(format!("nbar must be >= 0, got {nbar}")));
        }
        let mut n_max = (nbar + 10.0 * nbar.sqrt()).ceil().max(16.0) as usize;
        let mut prep = Self { nbar, theta, n_max };
        while truncation_tail_mass(&prep) >= TAIL_LIMIT {
            n_max += 1;
            prep.n_max = n_max;
        }
        Ok(prep)
    }

    pub fn with_n_max(nbar: f64, theta: f64, n_max: usize) -> Result<Self, Error> {
        if nbar < 0.0 {
            return Err(Error::InvalidParams(format!("nbar must be >= 0, got {nbar}")));
        }
        Ok(Self { nbar, theta, n_max })
    }

    pub fn alpha(&self) -> C64 {
        C64::from_polar(self.nbar.sqrt(), -self.theta)
    }
}

/// The four two-qubit basis labels, in the canonical ordering used everywhere
/// for indexing: gg < ge < eg < ee. The first letter is qubit 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QubitLabel {
    Gg = 0,
    Ge = 1,
    Eg = 2,
    Ee = 3,
}

impl QubitLabel {
    pub const ALL: [QubitLabel; 4] = [QubitLabel::Gg, QubitLabel::Ge, QubitLabel::Eg, QubitLabel::Ee];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Number of excited qubits carried by this label.
    pub fn excitations(self) -> usize {
        match self {
            QubitLabel::Gg => 0,
            QubitLabel::Ge | QubitLabel::Eg => 1,
            QubitLabel::Ee => 2,
        }
    }

    /// sigma_z eigenvalue of qubit 1 (+1 excited, -1 ground).
    pub fn s1(self) -> f64 {
        match self {
            QubitLabel::Eg | QubitLabel::Ee => 1.0,
            _ => -1.0,
        }
    }

    /// sigma_z eigenvalue of qubit 2.
    pub fn s2(self) -> f64 {
        match self {
            QubitLabel::Ge | QubitLabel::Ee => 1.0,
            _ => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QubitLabel::Gg => "gg",
            QubitLabel::Ge => "ge",
            QubitLabel::Eg => "eg",
            QubitLabel::Ee => "ee",
        }
    }
}

/// Joint qubit-field state: a dense complex amplitude array indexed by
/// (QubitLabel, n) for n in [0, n_max], plus the parameters it was built with
/// and the time it has been evolved to.
#[derive(Debug, Clone)]
pub struct JointState {
    amplitudes: Vec<C64>,
    n_max: usize,
    pub params: SystemParams,
    pub prep: CoherentPrep,
    pub time: f64,
}

impl JointState {
    pub fn zero(params: SystemParams, prep: CoherentPrep) -> Self {
        Self {
            amplitudes: vec![C64::new(0.0, 0.0); 4 * (prep.n_max + 1)],
            n_max: prep.n_max,
            params,
            prep,
            time: 0.0,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    #[inline]
    pub fn idx(&self, label: QubitLabel, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        label.index() * (self.n_max + 1) + n
    }

    #[inline]
    pub fn amplitude(&self, label: QubitLabel, n: usize) -> C64 {
        self.amplitudes[self.idx(label, n)]
    }

    #[inline]
    pub fn amplitude_mut(&mut self, label: QubitLabel, n: usize) -> &mut C64 {
        let i = self.idx(label, n);
        &mut self.amplitudes[i]
    }

    /// The amplitudes of one qubit label over all Fock indices.
    pub fn channel(&self, label: QubitLabel) -> &[C64] {
        let w = self.n_max + 1;
        &self.amplitudes[label.index() * w..(label.index() + 1) * w]
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability of each qubit label, with the field traced out.
    pub fn label_probabilities(&self) -> [f64; 4] {
        let mut p = [0.0; 4];
        for label in QubitLabel::ALL {
            p[label.index()] = self.channel(label).iter().map(|a| a.norm_sqr()).sum();
        }
        p
    }

    pub fn inner(&self, other: &JointState) -> C64 {
        assert_eq!(self.n_max, other.n_max);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

/// Coherent coefficients C_n = e^{-nbar/2} alpha^n / sqrt(n!) with
/// alpha = sqrt(nbar) e^{-i theta}, evaluated in log space so the factorial
/// never overflows.
pub fn coherent_coefficients(prep: &CoherentPrep) -> Result<Vec<C64>, Error> {
    let mut c = vec![C64::new(0.0, 0.0); prep.n_max + 1];
    if prep.nbar == 0.0 {
        c[0] = C64::new(1.0, 0.0);
        return Ok(c);
    }
    let ln_mag_alpha = 0.5 * prep.nbar.ln();
    let mut total = 0.0;
    for (n, cn) in c.iter_mut().enumerate() {
        let nf = n as f64;
        let ln_mag = -0.5 * prep.nbar + nf * ln_mag_alpha - 0.5 * libm::lgamma(nf + 1.0);
        let mag = ln_mag.exp();
        *cn = C64::from_polar(mag, -nf * prep.theta);
        total += mag * mag;
    }
    let tail = (1.0 - total).max(0.0);
    if tail > TAIL_LIMIT {
        return Err(Error::TruncationInsufficient { tail_mass: tail, limit: TAIL_LIMIT });
    }
    Ok(c)
}

/// Tail mass left above the truncation (0 for a vacuum preparation).
pub fn truncation_tail_mass(prep: &CoherentPrep) -> f64 {
    if prep.nbar == 0.0 {
        return 0.0;
    }
    let ln_mag_alpha = 0.5 * prep.nbar.ln();
    let total: f64 = (0..=prep.n_max)
        .map(|n| {
            let nf = n as f64;
            (2.0 * (-0.5 * prep.nbar + nf * ln_mag_alpha - 0.5 * libm::lgamma(nf + 1.0))).exp()
        })
        .sum();
    (1.0 - total).max(0.0)
}

/// Overlap coefficients <n|alpha> for an arbitrary complex alpha, by the ratio
/// recurrence C_{n+1} = C_n alpha / sqrt(n+1). A power-of-1e280 rescale keeps
/// the recurrence alive when e^{-|alpha|^2/2} underflows.
pub fn coherent_row(alpha: C64, n_max: usize) -> Vec<C64> {
    const LN_BIG: f64 = 644.7238260383329; // ln(1e280)
    let mut out = vec![C64::new(0.0, 0.0); n_max + 1];
    let ln0 = -0.5 * alpha.norm_sqr();
    let mut scale_pows: i32 = 0;
    let mut cur = if ln0 < -600.0 {
        scale_pows = ((-ln0 - 600.0) / LN_BIG).ceil() as i32;
        C64::new((ln0 + scale_pows as f64 * LN_BIG).exp(), 0.0)
    } else {
        C64::new(ln0.exp(), 0.0)
    };
    for (n, slot) in out.iter_mut().enumerate() {
        let mut v = cur;
        for _ in 0..scale_pows {
            v *= 1e-280;
        }
        *slot = v;
        cur = cur * alpha / ((n + 1) as f64).sqrt();
        if scale_pows > 0 && cur.norm_sqr() > 1e250 {
            cur *= 1e-280;
            scale_pows -= 1;
        }
    }
    out
}

/// The protocol's initial state |gg> tensor |alpha>: amplitude(gg, n) = C_n,
/// all other labels zero.
pub fn initial_state(params: SystemParams, prep: CoherentPrep) -> Result<JointState, Error> {
    let coeffs = coherent_coefficients(&prep)?;
    let mut state = JointState::zero(params, prep);
    for (n, &cn) in coeffs.iter().enumerate() {
        *state.amplitude_mut(QubitLabel::Gg, n) = cn;
    }
    // Renormalize away the (sub-1e-12) truncated tail so downstream norm
    // invariants hold exactly.
    let norm = state.norm();
    for a in state.amplitudes_mut() {
        *a /= norm;
    }
    Ok(state)
}
