//! The six subcommands. Each builds CSV, SVG and JSON payloads from the
//! same computed data, then hands off to the output writer.

use serde_json::{json, Value};
use tavis_core::asymptotic::blob_markers;
use tavis_core::hilbert::truncation_tail_mass;
use tavis_core::observables::{default_q_grid, default_quadrature_basis};
use tavis_core::protocol::{plateau_center, OutcomeSampler};
use tavis_core::{
    evolve_analytic, initial_state, p_gg_trace, q_function, quadrature_slice, success_curves,
    CoherentPrep, JointState, Propagator, QuadratureSlice, SystemParams, TargetState,
};

use crate::config::Resolved;
use crate::output::{csv_escape, emit, fmt12, Artifact};
use crate::svg;
use crate::CliError;

fn state_at(params: SystemParams, prep: CoherentPrep, t: f64) -> Result<JointState, CliError> {
    if params.is_symmetric_resonant() {
        Ok(evolve_analytic(params, prep, t)?)
    } else {
        let s0 = initial_state(params, prep)?;
        Ok(Propagator::new(params, prep.n_max).evolve(&s0, t))
    }
}

fn tail_mass_diag(preps: &[CoherentPrep]) -> Value {
    json!(preps.iter().map(|p| truncation_tail_mass(p)).collect::<Vec<f64>>())
}

pub fn cmd_revival(r: &Resolved) -> Result<(), CliError> {
    let params = r.params()?;
    let prep = r.prep(r.nbar[0])?;
    let t_grid = r.t_grid();
    let p = p_gg_trace(params, prep, &t_grid)?;

    let mut csv = String::from("t,p_gg\n");
    for (t, v) in t_grid.iter().zip(&p) {
        csv.push_str(&format!("{},{}\n", fmt12(*t), fmt12(*v)));
    }
    let series = vec![(
        "p_gg".to_string(),
        t_grid.iter().copied().zip(p.iter().copied()).collect::<Vec<_>>(),
    )];
    let svg = svg::line_plot("Ground-state return probability", "t", "P_gg", &series, &[]);
    emit(
        r,
        Artifact {
            csv,
            svg,
            data: json!({ "t": t_grid, "p_gg": p }),
            diagnostics: json!({ "truncation_tail_mass": tail_mass_diag(&[prep]) }),
        },
    )
}

pub fn cmd_qfunc(r: &Resolved) -> Result<(), CliError> {
    let params = r.params()?;
    let prep = r.prep(r.nbar[0])?;
    let t = r.time.expect("qfunc time has a default");
    let state = state_at(params, prep, t)?;
    let (re, im) = default_q_grid(prep.nbar);
    let q = q_function(&state, &re, &im);
    let markers = blob_markers(params, prep, t);

    let da = (re[1] - re[0]) * (im[1] - im[0]);
    let q_mass: f64 = q.iter().sum::<f64>() * da;

    let mut csv = String::from("kind,re,im,value\n");
    for (iy, &y) in im.iter().enumerate() {
        for (ix, &x) in re.iter().enumerate() {
            csv.push_str(&format!(
                "q,{},{},{}\n",
                fmt12(x),
                fmt12(y),
                fmt12(q[iy * re.len() + ix])
            ));
        }
    }
    for (k, a, _) in markers {
        csv.push_str(&format!("marker,{},{},{k}\n", fmt12(a.re), fmt12(a.im)));
    }

    let marker_pts: Vec<(f64, f64)> = markers.iter().map(|(_, a, _)| (a.re, a.im)).collect();
    let svg = svg::heatmap(
        &format!("Phase-space distribution at t = {t:.4}"),
        "Re(alpha)",
        "Im(alpha)",
        &re,
        &im,
        &q,
        &marker_pts,
    );
    emit(
        r,
        Artifact {
            csv,
            svg,
            data: json!({
                "re": re,
                "im": im,
                "q": q,
                "markers": markers
                    .iter()
                    .map(|(k, a, x)| json!({ "k": k, "re": a.re, "im": a.im, "x": x }))
                    .collect::<Vec<_>>(),
            }),
            diagnostics: json!({
                "truncation_tail_mass": tail_mass_diag(&[prep]),
                "q_mass": q_mass,
                "q_mass_deviation_from_pi": q_mass - std::f64::consts::PI,
            }),
        },
    )
}

/// Total density recomputed on a dx/2 grid and compared at shared points.
fn xdist_grid_delta(
    state: &JointState,
    prep: CoherentPrep,
    dx: f64,
    coarse: &QuadratureSlice<'_>,
) -> Result<f64, CliError> {
    let fine_basis = default_quadrature_basis(prep.n_max, dx / 2.0)?;
    let fine = quadrature_slice(state, &fine_basis)?;
    let mut delta = 0.0_f64;
    for (i, &p) in coarse.p_total.iter().enumerate() {
        delta = delta.max((p - fine.p_total[2 * i]).abs());
    }
    Ok(delta)
}

pub fn cmd_xdist(r: &Resolved) -> Result<(), CliError> {
    let params = r.params()?;
    let prep = r.prep(r.nbar[0])?;
    let t = r.time.expect("xdist time has a default");
    let state = state_at(params, prep, t)?;
    let basis = default_quadrature_basis(prep.n_max, r.dx)?;
    let slice = quadrature_slice(&state, &basis)?;
    let markers = blob_markers(params, prep, t);

    // p_sym is the (|ge> + |eg>)/sqrt(2) channel.
    let p_sym: Vec<f64> = (0..basis.len())
        .map(|i| (slice.c[1][i] + slice.c[2][i]).norm_sqr() / 2.0)
        .collect();

    let mut csv = String::from("x,p_gg,p_ee,p_sym,p_total,x_minus,x_zero,x_plus\n");
    for i in 0..basis.len() {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt12(basis.grid[i]),
            fmt12(slice.p_r[0][i]),
            fmt12(slice.p_r[3][i]),
            fmt12(p_sym[i]),
            fmt12(slice.p_total[i]),
            fmt12(markers[0].2),
            fmt12(markers[1].2),
            fmt12(markers[2].2),
        ));
    }

    let mk_series = |name: &str, values: &[f64]| {
        (name.to_string(), basis.grid.iter().copied().zip(values.iter().copied()).collect())
    };
    let series: Vec<(String, Vec<(f64, f64)>)> = vec![
        mk_series("p_total", &slice.p_total),
        mk_series("p_gg", &slice.p_r[0]),
        mk_series("p_ee", &slice.p_r[3]),
        mk_series("p_sym", &p_sym),
    ];
    let vlines: Vec<f64> = markers.iter().map(|m| m.2).collect();
    let svg = svg::line_plot(
        &format!("x-quadrature distribution at t = {t:.4}"),
        "x",
        "density",
        &series,
        &vlines,
    );

    let grid_delta = xdist_grid_delta(&state, prep, r.dx, &slice)?;
    emit(
        r,
        Artifact {
            csv,
            svg,
            data: json!({
                "x": basis.grid,
                "p_gg": slice.p_r[0],
                "p_ee": slice.p_r[3],
                "p_sym": p_sym,
                "p_total": slice.p_total,
                "markers": vlines,
            }),
            diagnostics: json!({
                "truncation_tail_mass": tail_mass_diag(&[prep]),
                "total_mass": slice.total_mass(),
                "grid_convergence_delta": grid_delta,
            }),
        },
    )
}

pub fn cmd_ps(r: &Resolved) -> Result<(), CliError> {
    let params = r.params()?;
    let prep = r.prep(r.nbar[0])?;
    let f_min = r.fmin[0];
    let t_grid = r.t_grid();
    let targets: Vec<TargetState> = r.phi.iter().map(|&p| TargetState::new(p)).collect();
    let basis = default_quadrature_basis(prep.n_max, r.dx)?;
    let curves = success_curves(params, prep, &targets, f_min, &t_grid, &basis)?;

    let mut csv = String::from("t");
    for &phi in &r.phi {
        csv.push_str(&format!(",ps_phi_{phi:.6}"));
    }
    csv.push('\n');
    for (i, &t) in t_grid.iter().enumerate() {
        csv.push_str(&fmt12(t));
        for curve in &curves {
            csv.push(',');
            csv.push_str(&fmt12(curve.p_s[i]));
        }
        csv.push('\n');
    }

    let series: Vec<(String, Vec<(f64, f64)>)> = curves
        .iter()
        .map(|c| {
            (
                format!("phi = {:.4}", c.target.phi),
                t_grid.iter().copied().zip(c.p_s.iter().copied()).collect(),
            )
        })
        .collect();
    let svg = svg::line_plot(
        &format!("Heralding success probability (F_min = {f_min})"),
        "t",
        "P_s",
        &series,
        &[],
    );

    // Grid-convergence delta at the first curve's maximum.
    let (i_max, _) = curves[0]
        .p_s
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .expect("t grid is non-empty");
    let fine_basis = default_quadrature_basis(prep.n_max, r.dx / 2.0)?;
    let fine = success_curves(params, prep, &targets, f_min, &[t_grid[i_max]], &fine_basis)?;
    let grid_delta = (curves[0].p_s[i_max] - fine[0].p_s[0]).abs();

    emit(
        r,
        Artifact {
            csv,
            svg,
            data: json!({
                "t": t_grid,
                "curves": curves
                    .iter()
                    .map(|c| json!({ "phi": c.target.phi, "p_s": c.p_s }))
                    .collect::<Vec<_>>(),
            }),
            diagnostics: json!({
                "truncation_tail_mass": tail_mass_diag(&[prep]),
                "grid_convergence_delta": grid_delta,
            }),
        },
    )
}

pub fn cmd_herald(r: &Resolved) -> Result<(), CliError> {
    let params = r.params()?;
    let prep = r.prep(r.nbar[0])?;
    let target = TargetState::new(r.phi[0]);
    let f_min = r.fmin[0];
    let t = match r.time {
        Some(t) => t,
        None => plateau_center(params, prep, &target),
    };
    // Echo the materialized time in the provenance config.
    let mut resolved = r.clone();
    resolved.time = Some(t);

    let state = state_at(params, prep, t)?;
    let basis = default_quadrature_basis(prep.n_max, r.dx)?;
    let slice = quadrature_slice(&state, &basis)?;
    let mut sampler = OutcomeSampler::new(&slice, r.seed);
    let outcomes: Vec<_> = (0..r.shots).map(|_| sampler.draw(&target, f_min)).collect();

    let successes: Vec<&_> = outcomes.iter().filter(|o| o.success).collect();
    let success_rate = successes.len() as f64 / r.shots as f64;
    let mean_fid = if successes.is_empty() {
        f64::NAN
    } else {
        successes.iter().map(|o| o.fidelity).sum::<f64>() / successes.len() as f64
    };

    let mut csv = String::from("shot,x,fidelity,success,success_rate,mean_success_fidelity\n");
    for (i, o) in outcomes.iter().enumerate() {
        csv.push_str(&format!(
            "{i},{},{},{},{},{}\n",
            fmt12(o.x),
            fmt12(o.fidelity),
            o.success,
            fmt12(success_rate),
            fmt12(mean_fid),
        ));
    }

    // SVG: empirical histogram of measured x, 100 bins.
    let (lo, hi) = outcomes.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), o| {
        (lo.min(o.x), hi.max(o.x))
    });
    let bins = 100usize;
    let bw = ((hi - lo) / bins as f64).max(1e-12);
    let mut hist = vec![0.0f64; bins];
    for o in &outcomes {
        let b = (((o.x - lo) / bw) as usize).min(bins - 1);
        hist[b] += 1.0 / (r.shots as f64 * bw);
    }
    let pts: Vec<(f64, f64)> =
        hist.iter().enumerate().map(|(b, &v)| (lo + (b as f64 + 0.5) * bw, v)).collect();
    let svg = svg::line_plot(
        &format!("Measured x histogram at t = {t:.4} ({} shots)", r.shots),
        "x",
        "empirical density",
        &[("shots".to_string(), pts)],
        &[],
    );

    emit(
        &resolved,
        Artifact {
            csv,
            svg,
            data: json!({
                "t": t,
                "shots": outcomes
                    .iter()
                    .map(|o| json!({ "x": o.x, "fidelity": o.fidelity, "success": o.success }))
                    .collect::<Vec<_>>(),
                "summary": {
                    "success_rate": success_rate,
                    "mean_success_fidelity": mean_fid,
                },
            }),
            diagnostics: json!({ "truncation_tail_mass": tail_mass_diag(&[prep]) }),
        },
    )
}

pub fn cmd_width(r: &Resolved) -> Result<(), CliError> {
    let params = r.params()?;
    let preps: Vec<CoherentPrep> =
        r.nbar.iter().map(|&n| r.prep(n)).collect::<Result<_, _>>()?;
    let target = TargetState::new(r.phi[0]);
    let fit = tavis_core::width_analysis(params, &preps, &r.fmin, &target, r.dx, r.tsteps)?;

    let mut csv = String::from("nbar,f_min,ideal_width,width,status,k_fit,r_squared\n");
    for (j, &f_min) in fit.f_mins.iter().enumerate() {
        let k = fit.k_fit[j].map(fmt12).unwrap_or_default();
        let r2 = fit.r_squared[j].map(fmt12).unwrap_or_default();
        for (i, &nbar) in fit.nbars.iter().enumerate() {
            let (width, status) = match &fit.widths[j][i] {
                Ok(w) => (fmt12(*w), "ok".to_string()),
                Err(e) => (String::new(), csv_escape(e)),
            };
            csv.push_str(&format!(
                "{},{},{},{width},{status},{k},{r2}\n",
                fmt12(nbar),
                fmt12(f_min),
                fmt12(fit.ideal_widths[j]),
            ));
        }
    }

    let series: Vec<(String, Vec<(f64, f64)>)> = fit
        .f_mins
        .iter()
        .enumerate()
        .map(|(j, &f_min)| {
            let pts: Vec<(f64, f64)> = fit
                .widths[j]
                .iter()
                .zip(&fit.nbars)
                .filter_map(|(cell, &nbar)| cell.as_ref().ok().map(|&w| (nbar, w)))
                .collect();
            (format!("F_min = {f_min}"), pts)
        })
        .collect();
    let svg = svg::line_plot("Plateau width vs mean photon number", "nbar", "width", &series, &[]);

    emit(
        r,
        Artifact {
            csv,
            svg,
            data: json!({
                "nbar": fit.nbars,
                "f_min": fit.f_mins,
                "ideal_width": fit.ideal_widths,
                "width": fit
                    .widths
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|cell| match cell {
                                Ok(w) => json!({ "width": w, "status": "ok" }),
                                Err(e) => json!({ "width": null, "status": e }),
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>(),
                "k_fit": fit.k_fit,
                "r_squared": fit.r_squared,
            }),
            diagnostics: json!({ "truncation_tail_mass": tail_mass_diag(&preps) }),
        },
    )
}
