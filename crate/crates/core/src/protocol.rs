//! The heralded-entanglement protocol: projective (and Gaussian-blurred)
//! x-quadrature measurement, conditional qubit states and fidelities,
//! success probability P_s(t), Monte Carlo heralding, and peak-width
//! analysis against the ideal trigonometric width law.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{evolve_analytic, Propagator};
use crate::hilbert::{initial_state, CoherentPrep, JointState, SystemParams};
use crate::observables::{
    default_quadrature_basis, quadrature_slice, QuadratureBasis, QuadratureSlice,
    QubitDensityMatrix,
};
use crate::{Error, C64};

/// Bell-like target (|gg> + e^{-i phi}|ee>)/sqrt(2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetState {
    pub phi: f64,
}

impl TargetState {
    pub fn new(phi: f64) -> Self {
        Self { phi }
    }

    pub fn vector(&self) -> [C64; 4] {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        [
            C64::new(inv, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::from_polar(inv, -self.phi),
        ]
    }
}

/// Result of one heralding measurement.
#[derive(Debug, Clone)]
pub struct HeraldedOutcome {
    pub t: f64,
    pub x: f64,
    pub conditional: QubitDensityMatrix,
    pub fidelity: f64,
    pub success: bool,
    pub probability_density: f64,
}

/// P_s(t) over a time grid for one target and threshold.
#[derive(Debug, Clone)]
pub struct SuccessCurve {
    pub t_grid: Vec<f64>,
    pub p_s: Vec<f64>,
    pub f_min: f64,
    pub target: TargetState,
}

const DENSITY_FLOOR: f64 = 1e-30;

/// Project onto the grid point nearest x: the conditional qubit state is the
/// normalized c_r(x) vector, pure by construction.
pub fn conditional_state(
    slice: &QuadratureSlice<'_>,
    x: f64,
    target: &TargetState,
    f_min: f64,
) -> Result<HeraldedOutcome, Error> {
    let i = slice.basis.nearest(x)?;
    let p = slice.p_total[i];
    if p <= DENSITY_FLOOR {
        return Err(Error::ZeroProbabilityOutcome { x });
    }
    let c = slice.c_at(i);
    let norm = p.sqrt();
    let v: [C64; 4] = std::array::from_fn(|r| c[r] / norm);
    let tv = target.vector();
    let overlap: C64 = (0..4).map(|r| tv[r].conj() * v[r]).sum();
    let fidelity = overlap.norm_sqr();
    Ok(HeraldedOutcome {
        t: slice.t,
        x,
        conditional: QubitDensityMatrix::from_pure(&v),
        fidelity,
        success: fidelity > f_min,
        probability_density: p,
    })
}

/// P_s of one slice for several targets at once (the slice is the expensive
/// part; the per-target fidelity is four complex multiplies per grid point).
/// Theta is strict: a point with F exactly equal to f_min does not count.
pub fn ps_of_slice(slice: &QuadratureSlice<'_>, targets: &[TargetState], f_min: f64) -> Vec<f64> {
    let tvs: Vec<[C64; 4]> = targets.iter().map(|t| t.vector()).collect();
    let dx = slice.dx();
    let mut ps = vec![0.0; targets.len()];
    for i in 0..slice.p_total.len() {
        let p = slice.p_total[i];
        if p <= DENSITY_FLOOR {
            continue;
        }
        let c = slice.c_at(i);
        for (j, tv) in tvs.iter().enumerate() {
            let overlap: C64 = (0..4).map(|r| tv[r].conj() * c[r]).sum();
            let f = overlap.norm_sqr() / p;
            if f > f_min {
                ps[j] += p * dx;
            }
        }
    }
    ps
}

fn evolve_to(params: SystemParams, prep: CoherentPrep, prop: Option<&Propagator>, s0: &JointState, t: f64) -> JointState {
    match prop {
        Some(p) => p.evolve(s0, t),
        None => evolve_analytic(params, prep, t).expect("symmetric resonant checked by caller"),
    }
}

/// P_s(t) curves for several targets over a shared time grid.
pub fn success_curves(
    params: SystemParams,
    prep: CoherentPrep,
    targets: &[TargetState],
    f_min: f64,
    t_grid: &[f64],
    basis: &QuadratureBasis,
) -> Result<Vec<SuccessCurve>, Error> {
    if !(0.0 < f_min && f_min < 1.0) {
        return Err(Error::InvalidParams(format!("f_min must be in (0,1), got {f_min}")));
    }
    let s0 = initial_state(params, prep)?;
    let prop = if params.is_symmetric_resonant() {
        None
    } else {
        Some(Propagator::new(params, prep.n_max))
    };
    let per_t: Vec<Vec<f64>> = t_grid
        .par_iter()
        .map(|&t| {
            let st = evolve_to(params, prep, prop.as_ref(), &s0, t);
            let slice = quadrature_slice(&st, basis).expect("basis sized for prep");
            ps_of_slice(&slice, targets, f_min)
        })
        .collect();
    Ok(targets
        .iter()
        .enumerate()
        .map(|(j, &target)| SuccessCurve {
            t_grid: t_grid.to_vec(),
            p_s: per_t.iter().map(|row| row[j]).collect(),
            f_min,
            target,
        })
        .collect())
}

/// Single-target convenience over [`success_curves`].
pub fn success_probability(
    params: SystemParams,
    prep: CoherentPrep,
    target: TargetState,
    f_min: f64,
    t_grid: &[f64],
    basis: &QuadratureBasis,
) -> Result<SuccessCurve, Error> {
    Ok(success_curves(params, prep, &[target], f_min, t_grid, basis)?.remove(0))
}

/// Reproducible inverse-CDF sampler over the discretized masses
/// P(x_i, t) dx, linear inside a cell. All draws come from one explicitly
/// seeded stream.
pub struct OutcomeSampler<'a, 's> {
    slice: &'s QuadratureSlice<'a>,
    cumulative: Vec<f64>,
    rng: ChaCha8Rng,
}

impl<'a, 's> OutcomeSampler<'a, 's> {
    pub fn new(slice: &'s QuadratureSlice<'a>, seed: u64) -> Self {
        let dx = slice.dx();
        let mut cumulative = Vec::with_capacity(slice.p_total.len());
        let mut acc = 0.0;
        for &p in &slice.p_total {
            acc += p * dx;
            cumulative.push(acc);
        }
        Self { slice, cumulative, rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn draw(&mut self, target: &TargetState, f_min: f64) -> HeraldedOutcome {
        let total = *self.cumulative.last().expect("non-empty grid");
        let u: f64 = self.rng.gen::<f64>() * total;
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.cumulative.len() - 1);
        let lo = if i == 0 { 0.0 } else { self.cumulative[i - 1] };
        let w = self.cumulative[i] - lo;
        let frac = if w > 0.0 { ((u - lo) / w).clamp(0.0, 1.0) } else { 0.5 };
        let dx = self.slice.dx();
        let x = self.slice.basis.grid[i] - dx / 2.0 + dx * frac;
        let mut out = conditional_state(self.slice, self.slice.basis.grid[i], target, f_min)
            .expect("sampled cell has positive mass");
        out.x = x;
        out
    }
}

/// One seeded draw; deterministic for a fixed seed.
pub fn sample_outcome(
    slice: &QuadratureSlice<'_>,
    target: &TargetState,
    f_min: f64,
    seed: u64,
) -> HeraldedOutcome {
    OutcomeSampler::new(slice, seed).draw(target, f_min)
}

/// `count` seeded draws from one stream.
pub fn sample_outcomes(
    slice: &QuadratureSlice<'_>,
    target: &TargetState,
    f_min: f64,
    seed: u64,
    count: usize,
) -> Vec<HeraldedOutcome> {
    let mut sampler = OutcomeSampler::new(slice, seed);
    (0..count).map(|_| sampler.draw(target, f_min)).collect()
}

/// Imprecise measurement: the conditional density matrix is the Gaussian
/// mixture rho(y) proportional to sum_i G(y - x_i; sigma_m) c_i c_i^dag dx.
/// sigma_m = 0 reduces exactly to the projective case.
pub fn blurred_outcome(
    slice: &QuadratureSlice<'_>,
    y: f64,
    sigma_m: f64,
    target: &TargetState,
    f_min: f64,
) -> Result<HeraldedOutcome, Error> {
    if sigma_m < 0.0 {
        return Err(Error::InvalidParams(format!("sigma_m must be >= 0, got {sigma_m}")));
    }
    if sigma_m == 0.0 {
        return conditional_state(slice, y, target, f_min);
    }
    let basis = slice.basis;
    let dx = slice.dx();
    let norm = 1.0 / (sigma_m * (2.0 * PI).sqrt());
    let lo = basis.nearest((y - 8.0 * sigma_m).max(basis.grid[0]))?;
    let hi = basis.nearest((y + 8.0 * sigma_m).min(basis.grid[basis.len() - 1]))?;
    let mut rho = [[C64::new(0.0, 0.0); 4]; 4];
    let mut density = 0.0;
    for i in lo..=hi {
        let g = norm * (-(y - basis.grid[i]).powi(2) / (2.0 * sigma_m * sigma_m)).exp();
        if g == 0.0 {
            continue;
        }
        let c = slice.c_at(i);
        density += g * slice.p_total[i] * dx;
        for r in 0..4 {
            for s in 0..4 {
                rho[r][s] += g * dx * c[r] * c[s].conj();
            }
        }
    }
    if density <= DENSITY_FLOOR {
        return Err(Error::ZeroProbabilityOutcome { x: y });
    }
    let trace: f64 = (0..4).map(|r| rho[r][r].re).sum();
    for row in rho.iter_mut() {
        for v in row.iter_mut() {
            *v /= trace;
        }
    }
    let conditional = QubitDensityMatrix { m: rho };
    let fidelity = conditional.expectation(&target.vector());
    Ok(HeraldedOutcome {
        t: slice.t,
        x: y,
        conditional,
        fidelity,
        success: fidelity > f_min,
        probability_density: density,
    })
}

/// Ideal (infinite-nbar) full width of the P_s plateau at threshold f_min.
pub fn ideal_width(f_min: f64, omega: f64) -> f64 {
    (2.0 * f_min - 1.0).clamp(-1.0, 1.0).acos() / omega
}

/// Centre of the P_s plateau for `target` nearest to t_r/4. The heralded
/// phase advances as 2(theta + pi/2 + omega t), so plateaus repeat with
/// period pi/omega.
pub fn plateau_center(params: SystemParams, prep: CoherentPrep, target: &TargetState) -> f64 {
    let base = (target.phi / 2.0 - PI / 2.0 - prep.theta) / params.omega;
    let period = PI / params.omega;
    let t_quarter = PI * prep.nbar.sqrt() / (2.0 * params.lambda());
    let m = ((t_quarter - base) / period).round();
    base + m * period
}

/// One cell of the width sweep: measured full width at half maximum, or the
/// reason the peak could not be resolved.
pub type WidthCell = Result<f64, String>;

/// Measured widths against the ideal law, with the finite-nbar broadening
/// coefficient fitted per threshold.
#[derive(Debug, Clone)]
pub struct WidthFitResult {
    pub nbars: Vec<f64>,
    pub f_mins: Vec<f64>,
    /// Delta t^infinity per threshold.
    pub ideal_widths: Vec<f64>,
    /// widths[j][i] is the cell for f_mins[j], nbars[i].
    pub widths: Vec<Vec<WidthCell>>,
    /// K per threshold, least squares of (width - ideal) against 1/sqrt(nbar)
    /// through the origin. None when fewer than two cells resolved.
    pub k_fit: Vec<Option<f64>>,
    /// Coefficient of determination of the affine fit of the same data.
    pub r_squared: Vec<Option<f64>>,
}

/// FWHM of the P_s plateau nearest t_r/4, measured on a window of
/// `t_points` times by linear interpolation of the half-maximum crossings.
pub fn measure_plateau_width(
    params: SystemParams,
    prep: CoherentPrep,
    basis: &QuadratureBasis,
    target: &TargetState,
    f_min: f64,
    t_points: usize,
) -> Result<f64, Error> {
    if prep.nbar <= 0.0 {
        return Err(Error::UnresolvablePeak("nbar must be positive".into()));
    }
    let ideal = ideal_width(f_min, params.omega);
    let t_c = plateau_center(params, prep, target);
    let half_window = ideal / 2.0 + 5.0 / (params.lambda() * prep.nbar.sqrt()) + 0.35 / params.omega;
    let t_grid: Vec<f64> = (0..t_points)
        .map(|i| t_c - half_window + 2.0 * half_window * i as f64 / (t_points - 1) as f64)
        .collect();
    let curve = success_probability(params, prep, *target, f_min, &t_grid, basis)?;
    let (i_max, &p_max) = curve
        .p_s
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    if p_max < 0.05 {
        return Err(Error::UnresolvablePeak(format!("plateau maximum {p_max:.3} too low")));
    }
    let half = p_max / 2.0;
    let mut lo = i_max;
    while lo > 0 && curve.p_s[lo - 1] > half {
        lo -= 1;
    }
    let mut hi = i_max;
    while hi + 1 < curve.p_s.len() && curve.p_s[hi + 1] > half {
        hi += 1;
    }
    if lo == 0 || hi == curve.p_s.len() - 1 {
        return Err(Error::UnresolvablePeak("peak touches the window boundary".into()));
    }
    if hi - lo + 1 < 20 {
        return Err(Error::UnresolvablePeak(format!(
            "peak spans only {} grid points",
            hi - lo + 1
        )));
    }
    let cross = |i0: usize, i1: usize| -> f64 {
        let (p0, p1) = (curve.p_s[i0], curve.p_s[i1]);
        let (t0, t1) = (t_grid[i0], t_grid[i1]);
        t0 + (half - p0) * (t1 - t0) / (p1 - p0)
    };
    let t_left = cross(lo - 1, lo);
    let t_right = cross(hi, hi + 1);
    Ok(t_right - t_left)
}

/// Sweep widths over (nbar, f_min) and fit the finite-size broadening law.
pub fn width_analysis(
    params: SystemParams,
    preps: &[CoherentPrep],
    f_mins: &[f64],
    target: &TargetState,
    dx: f64,
    t_points: usize,
) -> Result<WidthFitResult, Error> {
    for &f in f_mins {
        if !(0.0 < f && f < 1.0) {
            return Err(Error::InvalidParams(format!("f_min must be in (0,1), got {f}")));
        }
    }
    let nbars: Vec<f64> = preps.iter().map(|p| p.nbar).collect();
    let ideal_widths: Vec<f64> = f_mins.iter().map(|&f| ideal_width(f, params.omega)).collect();
    // One basis per nbar, shared across thresholds.
    let mut widths: Vec<Vec<WidthCell>> = vec![Vec::with_capacity(preps.len()); f_mins.len()];
    for prep in preps {
        let basis = default_quadrature_basis(prep.n_max, dx)?;
        for (j, &f_min) in f_mins.iter().enumerate() {
            let cell = measure_plateau_width(params, *prep, &basis, target, f_min, t_points)
                .map_err(|e| e.to_string());
            widths[j].push(cell);
        }
    }
    let mut k_fit = Vec::with_capacity(f_mins.len());
    let mut r_squared = Vec::with_capacity(f_mins.len());
    for (j, row) in widths.iter().enumerate() {
        let pts: Vec<(f64, f64)> = row
            .iter()
            .zip(&nbars)
            .filter_map(|(cell, &nbar)| {
                cell.as_ref().ok().map(|&w| (1.0 / nbar.sqrt(), w - ideal_widths[j]))
            })
            .collect();
        if pts.len() < 2 {
            k_fit.push(None);
            r_squared.push(None);
            continue;
        }
        let sxy: f64 = pts.iter().map(|(x, y)| x * y).sum();
        let sxx: f64 = pts.iter().map(|(x, _)| x * x).sum();
        k_fit.push(Some(sxy / sxx));
        r_squared.push(Some(affine_r_squared(&pts)));
    }
    Ok(WidthFitResult { nbars, f_mins: f_mins.to_vec(), ideal_widths, widths, k_fit, r_squared })
}

/// R^2 of the ordinary least-squares line through (x, y) pairs.
pub fn affine_r_squared(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx: f64 = pts.iter().map(|(x, _)| x).sum::<f64>() / n;
    let my: f64 = pts.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = pts.iter().map(|(_, y)| (y - my) * (y - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return 1.0;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts
        .iter()
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    1.0 - ss_res / syy
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::QubitLabel;

    fn params() -> SystemParams {
        SystemParams::symmetric_resonant(1.0, 1.0).unwrap()
    }

    #[test]
    fn ideal_width_trivials() {
        assert!((ideal_width(0.5, 1.0) - PI / 2.0).abs() < 1e-14);
        assert!(ideal_width(1.0, 1.0).abs() < 1e-14);
        assert!((ideal_width(0.75, 2.0) - (PI / 3.0) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn t0_conditional_state_is_gg() {
        let prep = CoherentPrep::new(8.0, 0.0).unwrap();
        let s = initial_state(params(), prep).unwrap();
        let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
        let slice = quadrature_slice(&s, &basis).unwrap();
        let target = TargetState::new(1.1);
        let out = conditional_state(&slice, 2.0 * prep.nbar.sqrt(), &target, 0.9).unwrap();
        assert!((out.conditional.population(QubitLabel::Gg) - 1.0).abs() < 1e-12);
        assert!((out.fidelity - 0.5).abs() < 1e-12);
        assert!(!out.success);
        // Projection idempotence: the projective conditional is rank 1.
        let rho = &out.conditional;
        for r in 0..4 {
            for s2 in 0..4 {
                let mut sq = C64::new(0.0, 0.0);
                for k in 0..4 {
                    sq += rho.m[r][k] * rho.m[k][s2];
                }
                assert!((sq - rho.m[r][s2]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_probability_outcome_is_an_error() {
        let prep = CoherentPrep::new(8.0, 0.0).unwrap();
        let s = initial_state(params(), prep).unwrap();
        let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
        let slice = quadrature_slice(&s, &basis).unwrap();
        let target = TargetState::new(0.0);
        // The blob sits at +2 sqrt(nbar); the far negative edge has no mass.
        let x = -(2.0 * (prep.n_max as f64).sqrt() + 7.9);
        assert!(matches!(
            conditional_state(&slice, x, &target, 0.9),
            Err(Error::ZeroProbabilityOutcome { .. })
        ));
    }

    #[test]
    fn ps_is_one_when_threshold_below_half_at_t0() {
        let prep = CoherentPrep::new(8.0, 0.0).unwrap();
        let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
        let curve =
            success_probability(params(), prep, TargetState::new(0.7), 0.4, &[0.0], &basis).unwrap();
        assert!((curve.p_s[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ps_monotone_in_threshold() {
        let prep = CoherentPrep::new(20.0, 0.0).unwrap();
        let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
        let t_grid: Vec<f64> = (0..40).map(|i| 0.2 * i as f64).collect();
        let target = TargetState::new(PI);
        let loose =
            success_probability(params(), prep, target, 0.6, &t_grid, &basis).unwrap();
        let tight =
            success_probability(params(), prep, target, 0.8, &t_grid, &basis).unwrap();
        for (a, b) in tight.p_s.iter().zip(&loose.p_s) {
            assert!(a <= &(b + 1e-12));
        }
    }

    #[test]
    fn sampling_is_deterministic_for_fixed_seed() {
        let prep = CoherentPrep::new(10.0, 0.0).unwrap();
        let s = evolve_analytic(params(), prep, 2.0).unwrap();
        let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
        let slice = quadrature_slice(&s, &basis).unwrap();
        let target = TargetState::new(PI);
        let a = sample_outcome(&slice, &target, 0.9, 42);
        let b = sample_outcome(&slice, &target, 0.9, 42);
        assert_eq!(a.x, b.x);
        assert_eq!(a.fidelity, b.fidelity);
        let c = sample_outcome(&slice, &target, 0.9, 43);
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn blur_sigma_zero_reduces_to_projective() {
        let prep = CoherentPrep::new(10.0, 0.0).unwrap();
        let s = evolve_analytic(params(), prep, 2.0).unwrap();
        let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
        let slice = quadrature_slice(&s, &basis).unwrap();
        let target = TargetState::new(PI);
        let x = 3.1;
        let a = blurred_outcome(&slice, x, 0.0, &target, 0.9).unwrap();
        let b = conditional_state(&slice, x, &target, 0.9).unwrap();
        assert!((a.fidelity - b.fidelity).abs() < 1e-12);
        for r in 0..4 {
            for c in 0..4 {
                assert!((a.conditional.m[r][c] - b.conditional.m[r][c]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn blur_continuity_near_sigma_zero() {
        let prep = CoherentPrep::new(10.0, 0.0).unwrap();
        let s = evolve_analytic(params(), prep, 2.0).unwrap();
        let basis = default_quadrature_basis(prep.n_max, 0.02).unwrap();
        let slice = quadrature_slice(&s, &basis).unwrap();
        let target = TargetState::new(PI);
        let x = 3.1;
        let f0 = blurred_outcome(&slice, x, 0.0, &target, 0.9).unwrap().fidelity;
        let f1 = blurred_outcome(&slice, x, 0.05, &target, 0.9).unwrap().fidelity;
        // Finite-difference slope at sigma = 0 stays bounded.
        assert!(((f1 - f0) / 0.05).abs() < 5.0);
    }

    #[test]
    fn plateau_center_lands_on_the_phase_condition() {
        let prep = CoherentPrep::new(200.0, 0.0).unwrap();
        let t = plateau_center(params(), prep, &TargetState::new(PI));
        // phi(t) = pi + 2t must equal pi mod 2 pi.
        let phi = crate::asymptotic::predicted_phase(params(), prep, t);
        assert!((phi - PI).abs() < 1e-9);
        // And it is the plateau nearest t_r/4.
        let t_quarter = PI * prep.nbar.sqrt() / 2.0;
        assert!((t - t_quarter).abs() <= PI / 2.0 + 1e-12);
    }

    #[test]
    fn width_fit_handles_unresolvable_cells() {
        let prep = CoherentPrep::new(0.0, 0.0).unwrap();
        let basis = default_quadrature_basis(prep.n_max, 0.05).unwrap();
        let err = measure_plateau_width(params(), prep, &basis, &TargetState::new(PI), 0.75, 61);
        assert!(matches!(err, Err(Error::UnresolvablePeak(_))));
    }

    #[test]
    fn affine_fit_on_exact_line() {
        let pts: Vec<(f64, f64)> = (1..6).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        assert!((affine_r_squared(&pts) - 1.0).abs() < 1e-12);
    }
}
