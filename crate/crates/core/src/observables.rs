//! Everything measured or plotted from a joint state: the reduced qubit
//! density matrix, the P_gg revival trace, the Husimi Q-function, and the
//! x-quadrature densities P_r(x,t) that the heralding protocol measures.

use rayon::prelude::*;

use crate::dynamics::Propagator;
use crate::hilbert::{coherent_row, CoherentPrep, JointState, QubitLabel, SystemParams};
use crate::{Error, C64};

/// Reduced 4x4 density matrix of the two qubits, canonical {gg,ge,eg,ee}
/// ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitDensityMatrix {
    pub m: [[C64; 4]; 4],
}

impl QubitDensityMatrix {
    pub fn from_pure(v: &[C64; 4]) -> Self {
        let mut m = [[C64::new(0.0, 0.0); 4]; 4];
        for r in 0..4 {
            for s in 0..4 {
                m[r][s] = v[r] * v[s].conj();
            }
        }
        Self { m }
    }

    pub fn trace(&self) -> f64 {
        (0..4).map(|i| self.m[i][i].re).sum()
    }

    pub fn purity(&self) -> f64 {
        let mut acc = 0.0;
        for r in 0..4 {
            for s in 0..4 {
                acc += (self.m[r][s] * self.m[s][r]).re;
            }
        }
        acc
    }

    /// <v| rho |v> for a (unit) vector v.
    pub fn expectation(&self, v: &[C64; 4]) -> f64 {
        let mut acc = C64::new(0.0, 0.0);
        for r in 0..4 {
            for s in 0..4 {
                acc += v[r].conj() * self.m[r][s] * v[s];
            }
        }
        acc.re
    }

    pub fn population(&self, label: QubitLabel) -> f64 {
        self.m[label.index()][label.index()].re
    }

    /// Eigenvalues by Jacobi on the 8x8 real embedding would be overkill;
    /// for the PSD check it is enough that every principal 1x1 and the full
    /// quadratic form on a probe set are non-negative, but tests use the
    /// stronger check below via the Gershgorin-free power iteration.
    pub fn min_eigenvalue_lower_bound(&self) -> f64 {
        // rho is Hermitian PSD-ish with trace 1; lambda_min >= min over unit
        // probes of <v|rho|v>. Use the matrix's own eigenbasis via inverse
        // power iteration on (I - rho) instead: lambda_min(rho) =
        // 1 - lambda_max(I - rho) when trace-normalized. Power-iterate I-rho.
        let mut v = [
            C64::new(0.5, 0.1),
            C64::new(-0.3, 0.4),
            C64::new(0.2, -0.6),
            C64::new(0.4, 0.2),
        ];
        let mut lam = 0.0;
        for _ in 0..200 {
            let mut w = [C64::new(0.0, 0.0); 4];
            for r in 0..4 {
                w[r] = v[r];
                for s in 0..4 {
                    w[r] -= self.m[r][s] * v[s];
                }
            }
            let n: f64 = w.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
            if n == 0.0 {
                return 0.0;
            }
            for (x, y) in v.iter_mut().zip(&w) {
                *x = y / n;
            }
            lam = n;
        }
        1.0 - lam
    }
}

/// rho^Q[r][s] = sum_n A_{r,n} A*_{s,n}: the field traced out.
pub fn reduce_to_qubits(state: &JointState) -> QubitDensityMatrix {
    let mut m = [[C64::new(0.0, 0.0); 4]; 4];
    for r in QubitLabel::ALL {
        for s in QubitLabel::ALL {
            let acc: C64 = state
                .channel(r)
                .iter()
                .zip(state.channel(s))
                .map(|(a, b)| a * b.conj())
                .sum();
            m[r.index()][s.index()] = acc;
        }
    }
    QubitDensityMatrix { m }
}

/// P_gg(t) over a time grid. Uses the closed-form amplitudes on the
/// symmetric resonant domain, the block propagator otherwise.
pub fn p_gg_trace(params: SystemParams, prep: CoherentPrep, t_grid: &[f64]) -> Result<Vec<f64>, Error> {
    if params.is_symmetric_resonant() {
        let coeffs = crate::hilbert::coherent_coefficients(&prep)?;
        let norm_sqr: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        let weights: Vec<f64> = coeffs.iter().map(|c| c.norm_sqr() / norm_sqr).collect();
        let lambda = params.lambda();
        Ok(t_grid
            .par_iter()
            .map(|&t| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(n, &w)| {
                        if n == 0 {
                            w
                        } else {
                            let nf = n as f64;
                            let d = 2.0 * nf - 1.0;
                            let g = (nf * (lambda * t * (2.0 * d).sqrt()).cos() + (nf - 1.0)) / d;
                            w * g * g
                        }
                    })
                    .sum()
            })
            .collect())
    } else {
        let s0 = crate::hilbert::initial_state(params, prep)?;
        let prop = Propagator::new(params, prep.n_max);
        Ok(t_grid
            .par_iter()
            .map(|&t| prop.evolve(&s0, t).label_probabilities()[0])
            .collect())
    }
}

/// Husimi Q(alpha) = <alpha| rho^F |alpha>, no 1/pi factor, evaluated on the
/// rectangular grid re x im (row-major, index = iy * re.len() + ix).
pub fn q_function(state: &JointState, re: &[f64], im: &[f64]) -> Vec<f64> {
    let n_max = state.n_max();
    let mut out = vec![0.0; re.len() * im.len()];
    out.par_chunks_mut(re.len()).enumerate().for_each(|(iy, row)| {
        for (ix, q) in row.iter_mut().enumerate() {
            let alpha = C64::new(re[ix], im[iy]);
            let coeffs = coherent_row(alpha, n_max);
            let mut acc = 0.0;
            for label in QubitLabel::ALL {
                let ov: C64 = coeffs
                    .iter()
                    .zip(state.channel(label))
                    .map(|(c, a)| c.conj() * a)
                    .sum();
                acc += ov.norm_sqr();
            }
            *q = acc;
        }
    });
    out
}

/// Square default grid for [`q_function`]: 301 x 301 points covering the disc
/// of radius sqrt(nbar) + 6.
pub fn default_q_grid(nbar: f64) -> (Vec<f64>, Vec<f64>) {
    let r = nbar.sqrt() + 6.0;
    let n = 301;
    let axis: Vec<f64> = (0..n).map(|i| -r + 2.0 * r * i as f64 / (n - 1) as f64).collect();
    (axis.clone(), axis)
}

/// Position wavefunctions of the field mode in the x = a + a^dag convention:
/// psi_0(x) = (2 pi)^{-1/4} e^{-x^2/4} and the three-term recurrence
/// psi_{n+1} = (x psi_n - sqrt(n) psi_{n-1}) / sqrt(n+1).
#[derive(Debug, Clone)]
pub struct QuadratureBasis {
    pub grid: Vec<f64>,
    pub dx: f64,
    pub n_max: usize,
    /// psi[i * (n_max + 1) + n] = psi_n(x_i).
    psi: Vec<f64>,
}

impl QuadratureBasis {
    #[inline]
    pub fn psi_row(&self, i: usize) -> &[f64] {
        &self.psi[i * (self.n_max + 1)..(i + 1) * (self.n_max + 1)]
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Index of the grid point nearest to x.
    pub fn nearest(&self, x: f64) -> Result<usize, Error> {
        let lo = self.grid[0] - self.dx / 2.0;
        let hi = self.grid[self.grid.len() - 1] + self.dx / 2.0;
        if !(lo..hi).contains(&x) {
            return Err(Error::OutsideGrid { x });
        }
        let i = ((x - self.grid[0]) / self.dx).round() as usize;
        Ok(i.min(self.grid.len() - 1))
    }
}

/// Default half-range: every coherent blob lives within |x| <= 2 sqrt(n_max),
/// plus 8 density standard deviations.
pub fn default_x_half_range(n_max: usize) -> f64 {
    2.0 * (n_max as f64).sqrt() + 8.0
}

/// Evaluate the normalized wavefunctions psi_0..psi_n_max at one x, with a
/// power-of-1e280 rescale so the upward recurrence survives the underflow of
/// the Gaussian seed deep in the classically forbidden region.
fn psi_column(x: f64, n_max: usize, out: &mut [f64]) {
    const LN_BIG: f64 = 644.7238260383329; // ln(1e280)
    let ln0 = -x * x / 4.0 - 0.25 * (2.0 * std::f64::consts::PI).ln();
    let mut scale_pows: i32 = 0;
    let mut cur = if ln0 < -600.0 {
        scale_pows = ((-ln0 - 600.0) / LN_BIG).ceil() as i32;
        (ln0 + scale_pows as f64 * LN_BIG).exp()
    } else {
        ln0.exp()
    };
    let mut prev = 0.0;
    for (n, slot) in out.iter_mut().enumerate().take(n_max + 1) {
        let mut v = cur;
        for _ in 0..scale_pows {
            v *= 1e-280;
        }
        *slot = v;
        let nf = n as f64;
        let next = (x * cur - nf.sqrt() * prev) / (nf + 1.0).sqrt();
        prev = cur;
        cur = next;
        if scale_pows > 0 && (cur.abs() > 1e250 || prev.abs() > 1e250) {
            cur *= 1e-280;
            prev *= 1e-280;
            scale_pows -= 1;
        }
    }
}

/// Build the quadrature basis over a symmetric grid of spacing `dx` covering
/// at least [-half_range, +half_range].
pub fn build_quadrature_basis(n_max: usize, half_range: f64, dx: f64) -> Result<QuadratureBasis, Error> {
    if !(dx > 0.0 && dx <= 0.1) {
        return Err(Error::InvalidParams(format!("dx must be in (0, 0.1], got {dx}")));
    }
    let required = default_x_half_range(n_max);
    if half_range < required {
        return Err(Error::InvalidParams(format!(
            "half_range {half_range} below required span {required}"
        )));
    }
    let half_points = (half_range / dx).ceil() as i64;
    let grid: Vec<f64> = (-half_points..=half_points).map(|i| i as f64 * dx).collect();
    let width = n_max + 1;
    let mut psi = vec![0.0; grid.len() * width];
    psi.par_chunks_mut(width).zip(grid.par_iter()).for_each(|(row, &x)| {
        psi_column(x, n_max, row);
    });
    Ok(QuadratureBasis { grid, dx, n_max, psi })
}

/// Basis with the default range for this truncation.
pub fn default_quadrature_basis(n_max: usize, dx: f64) -> Result<QuadratureBasis, Error> {
    build_quadrature_basis(n_max, default_x_half_range(n_max), dx)
}

/// One time slice of the x-quadrature measurement: the complex projection
/// amplitudes c_r(x_i) = sum_n A_{r,n} psi_n(x_i), the per-channel densities
/// P_r = |c_r|^2 and their sum.
#[derive(Debug, Clone)]
pub struct QuadratureSlice<'a> {
    pub basis: &'a QuadratureBasis,
    pub t: f64,
    /// c[r][i], canonical label ordering.
    pub c: [Vec<C64>; 4],
    pub p_r: [Vec<f64>; 4],
    pub p_total: Vec<f64>,
}

impl QuadratureSlice<'_> {
    pub fn dx(&self) -> f64 {
        self.basis.dx
    }

    /// The four projection amplitudes at grid index i.
    pub fn c_at(&self, i: usize) -> [C64; 4] {
        [self.c[0][i], self.c[1][i], self.c[2][i], self.c[3][i]]
    }

    /// Riemann mass of the total density.
    pub fn total_mass(&self) -> f64 {
        self.p_total.iter().sum::<f64>() * self.basis.dx
    }
}

/// Project a state onto the quadrature grid: one pass over the psi matrix.
pub fn quadrature_slice<'a>(state: &JointState, basis: &'a QuadratureBasis) -> Result<QuadratureSlice<'a>, Error> {
    if basis.n_max < state.n_max() {
        return Err(Error::InvalidParams(format!(
            "basis n_max {} below state n_max {}",
            basis.n_max,
            state.n_max()
        )));
    }
    let m = basis.len();
    let n = state.n_max() + 1;
    let channels = [
        state.channel(QubitLabel::Gg),
        state.channel(QubitLabel::Ge),
        state.channel(QubitLabel::Eg),
        state.channel(QubitLabel::Ee),
    ];
    let rows: Vec<[C64; 4]> = (0..m)
        .into_par_iter()
        .map(|i| {
            let psi = &basis.psi_row(i)[..n];
            let mut acc = [C64::new(0.0, 0.0); 4];
            for (k, &p) in psi.iter().enumerate() {
                if p == 0.0 {
                    continue;
                }
                acc[0] += p * channels[0][k];
                acc[1] += p * channels[1][k];
                acc[2] += p * channels[2][k];
                acc[3] += p * channels[3][k];
            }
            acc
        })
        .collect();
    let mut c: [Vec<C64>; 4] = std::array::from_fn(|_| Vec::with_capacity(m));
    let mut p_r: [Vec<f64>; 4] = std::array::from_fn(|_| Vec::with_capacity(m));
    let mut p_total = Vec::with_capacity(m);
    for row in rows {
        let mut tot = 0.0;
        for r in 0..4 {
            let v = row[r];
            c[r].push(v);
            let p = v.norm_sqr();
            p_r[r].push(p);
            tot += p;
        }
        p_total.push(tot);
    }
    Ok(QuadratureSlice { basis, t: state.time, c, p_r, p_total })
}
