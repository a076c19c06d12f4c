//! Subcommand dispatch: ties configuration parsing to the physics
//! modules and emits the CSV/JSON artifacts.

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::config::{RunConfig, SweepAxis, SweepObservable};
use crate::dynamics::{evolve, splitting_from_spectrum};
use crate::error::{Error, Result};
use crate::feasibility::feasibility_report;
use crate::hamiltonian::{build_hamiltonian, BasisState};
use crate::kernel::{build_kernel, project_kernel, two_mode_evolve, uniform_box_grid, AMode};
use crate::modes::{coupling_overlap, mode_frequency, ModeId, ModelParams, Species, Well};
use crate::output::{csv_document, resolve_out_dir, write_atomic, Row};
use crate::selfenergy::{delta_e_closed, pt2_series};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Modes,
    Couplings,
    Spectrum,
    Evolve,
    DeltaE,
    Kernel,
    Sweep,
    Feasibility,
}

/// What a dispatch produced: files written plus a one-line summary for
/// stdout.
#[derive(Debug)]
pub struct DispatchOutcome {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Parse an initial-state label like `a,L,0` or `b,2,1`.
pub fn parse_initial(s: &str) -> Result<BasisState> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::config("evolve.initial", format!("`{s}` is not of the form `a,L,n` or `b,j,n`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let n: u32 = parts[2].parse().map_err(|_| bad())?;
    match parts[0] {
        "a" => {
            let sigma = match parts[1] {
                "L" | "l" => Well::Left,
                "R" | "r" => Well::Right,
                _ => return Err(bad()),
            };
            Ok(BasisState::A { sigma, n })
        }
        "b" => {
            let j: u32 = parts[1].parse().map_err(|_| bad())?;
            Ok(BasisState::B { j, n })
        }
        _ => Err(bad()),
    }
}

fn uniform_times(t_max: f64, n_samples: usize) -> Result<Vec<f64>> {
    if !(t_max > 0.0) || n_samples < 2 {
        return Err(Error::config("evolve", format!("need t_max > 0 and n_samples >= 2, got {t_max}, {n_samples}")));
    }
    let h = t_max / (n_samples - 1) as f64;
    Ok((0..n_samples).map(|i| i as f64 * h).collect())
}

/// Model parameters with one sweep axis overridden.
fn with_axis_value(base: &ModelParams, axis: SweepAxis, value: f64) -> Result<ModelParams> {
    let mut p = base.clone();
    match axis {
        SweepAxis::D => {
            p.geometry = crate::modes::Geometry::new(p.geometry.ell(), value)?;
        }
        SweepAxis::Ell => {
            p.geometry = crate::modes::Geometry::new(value, p.geometry.d())?;
        }
        SweepAxis::G0 => {
            if !(value >= 0.0) {
                return Err(Error::InvalidParameter { name: "g0", reason: format!("must be >= 0, got {value}") });
            }
            p.g0 = value;
        }
        SweepAxis::Delta => {
            p.omega_cavity = value + p.omega_a1() - p.omega_internal_b;
        }
    }
    p.validate()?;
    Ok(p)
}

/// Run one subcommand against a parsed config. `out_dir_flag` is the
/// command-line override for the output directory.
pub fn dispatch(sub: Subcommand, cfg: &RunConfig, out_dir_flag: Option<&str>) -> Result<DispatchOutcome> {
    let out_dir = resolve_out_dir(out_dir_flag, cfg.output.dir.as_deref());
    let prefix = cfg.output.prefix();
    let echo = cfg.echo_toml();
    let mut files = Vec::new();
    let emit = |name: &str, content: &str, files: &mut Vec<PathBuf>| -> Result<PathBuf> {
        let path = out_dir.join(format!("{prefix}_{name}"));
        write_atomic(&path, content)?;
        files.push(path.clone());
        Ok(path)
    };

    let summary = match sub {
        Subcommand::Modes => {
            let p = cfg.model_params()?;
            let t = cfg.truncation.to_truncation()?;
            let mut rows = Vec::new();
            for (species, label, j_hi) in
                [(Species::ALeft, "a_left", 1), (Species::ARight, "a_right", 1), (Species::B, "b", t.j_max)]
            {
                for j in 1..=j_hi {
                    let w = mode_frequency(&p, ModeId { species, j })?;
                    rows.push(Row::Data(vec![label.into(), j.into(), w.into()]));
                }
            }
            let n = rows.len();
            emit("modes.csv", &csv_document(&echo, &["species", "j", "omega"], &rows), &mut files)?;
            format!("modes: {n} mode frequencies written")
        }
        Subcommand::Couplings => {
            let p = cfg.model_params()?;
            let t = cfg.truncation.to_truncation()?;
            let mut rows = Vec::new();
            for j in 1..=t.j_max {
                let gl = coupling_overlap(&p, Well::Left, j)?;
                let gr = coupling_overlap(&p, Well::Right, j)?;
                rows.push(Row::Data(vec![j.into(), gl.into(), gr.into()]));
            }
            emit("couplings.csv", &csv_document(&echo, &["j", "g_l", "g_r"], &rows), &mut files)?;
            format!("couplings: {} overlaps written", t.j_max)
        }
        Subcommand::Spectrum => {
            let p = cfg.model_params()?;
            let t = cfg.truncation.to_truncation()?;
            let h = build_hamiltonian(&p, t, cfg.truncation.rwa)?;
            let mut eig: Vec<f64> = h.matrix().clone().symmetric_eigen().eigenvalues.iter().copied().collect();
            eig.sort_by(|a, b| a.total_cmp(b));
            let rows: Vec<Row> =
                eig.iter().enumerate().map(|(i, &e)| Row::Data(vec![i.into(), e.into()])).collect();
            emit("spectrum.csv", &csv_document(&echo, &["index", "energy"], &rows), &mut files)?;
            format!("spectrum: {} eigenvalues (dim {})", eig.len(), h.dim())
        }
        Subcommand::Evolve => {
            let p = cfg.model_params()?;
            let t = cfg.truncation.to_truncation()?;
            let h = build_hamiltonian(&p, t, cfg.truncation.rwa)?;
            let initial = parse_initial(&cfg.evolve.initial)?;
            let t_max = match cfg.evolve.t_max {
                Some(q) => q.0,
                None => {
                    // span one slow half-period of the splitting
                    let de = pt2_series(&p, cfg.delta_e.tol)?.delta_e;
                    if de.abs() > 0.0 {
                        PI * p.hbar / de.abs()
                    } else {
                        1.0
                    }
                }
            };
            let grid = uniform_times(t_max, cfg.evolve.n_samples)?;
            let ts = evolve(&h, initial, &grid)?;
            let rows: Vec<Row> = (0..ts.t.len())
                .map(|i| {
                    Row::Data(vec![
                        ts.t[i].into(),
                        ts.p_t3k[i].into(),
                        ts.p_left[i].into(),
                        ts.p_excited[i].into(),
                        ts.norm[i].into(),
                    ])
                })
                .collect();
            emit(
                "evolve.csv",
                &csv_document(&echo, &["t", "p_t3k", "p_left", "p_excited", "norm"], &rows),
                &mut files,
            )?;
            let p_max = ts.p_t3k.iter().fold(0.0f64, |m, &v| m.max(v));
            format!("evolve: {} samples to t = {t_max:.6e}, max p_t3k = {p_max:.6e}", ts.t.len())
        }
        Subcommand::DeltaE => {
            let p = cfg.model_params()?;
            let series = pt2_series(&p, cfg.delta_e.tol)?;
            let closed = delta_e_closed(&p)?;
            let rel = (series.delta_e - closed.value).abs() / closed.value.abs().max(f64::MIN_POSITIVE);
            let rows = vec![Row::Data(vec![
                p.geometry.d().into(),
                series.delta_e.into(),
                closed.value.into(),
                rel.into(),
                series.j_used.into(),
            ])];
            emit(
                "delta_e.csv",
                &csv_document(&echo, &["d", "delta_e_series", "delta_e_closed", "rel_diff", "j_used"], &rows),
                &mut files,
            )?;
            let mut s = format!(
                "delta-e: series = {:.6e} (j_used {}), closed = {:.6e}, rel diff = {rel:.3e}",
                series.delta_e, series.j_used, closed.value
            );
            if let Some(pole) = closed.pole.filter(|pp| pp.is_warning()) {
                s.push_str(&format!(
                    "; warning: resonance proximity, (2l+d)/xi within {:.3e} of {}*pi",
                    pole.distance, pole.nearest_k
                ));
            }
            s
        }
        Subcommand::Kernel => {
            let p = cfg.model_params()?;
            let kc = &cfg.kernel;
            let x = uniform_box_grid(&p, kc.n_points)?;
            let grid = build_kernel(&p, &x, kc.j_max)?;
            let mut rows = Vec::with_capacity(x.len() * x.len());
            for (r, &xr) in x.iter().enumerate() {
                for (c, &xc) in x.iter().enumerate() {
                    rows.push(Row::Data(vec![xr.into(), xc.into(), grid.matrix()[(r, c)].into()]));
                }
            }
            emit("kernel.csv", &csv_document(&echo, &["x", "x_prime", "pi_value"], &rows), &mut files)?;

            let pi_ss = project_kernel(&grid, AMode::S, AMode::S)?;
            let pi_aa = project_kernel(&grid, AMode::A, AMode::A)?;
            let de = pi_aa - pi_ss;
            let t_max = match kc.two_mode_t_max {
                Some(q) => q.0,
                None if de.abs() > 0.0 => 2.0 * PI * p.hbar / de.abs(),
                None => 1.0,
            };
            let t_grid = uniform_times(t_max, kc.two_mode_samples)?;
            let e = p.hbar * p.omega_a1();
            let s = two_mode_evolve(e, pi_ss, pi_aa, p.hbar, &t_grid)?;
            let rows: Vec<Row> = (0..s.t.len())
                .map(|i| {
                    Row::Data(vec![
                        s.t[i].into(),
                        s.p[i].into(),
                        s.c_l[i].re.into(),
                        s.c_l[i].im.into(),
                        s.c_r[i].re.into(),
                        s.c_r[i].im.into(),
                    ])
                })
                .collect();
            emit(
                "two_mode.csv",
                &csv_document(&echo, &["t", "p", "c_l_re", "c_l_im", "c_r_re", "c_r_im"], &rows),
                &mut files,
            )?;
            format!(
                "kernel: {0}x{0} grid (j_max {1}), pi_ss = {pi_ss:.6e}, pi_aa = {pi_aa:.6e}",
                kc.n_points, kc.j_max
            )
        }
        Subcommand::Sweep => {
            let sweep = cfg
                .sweep
                .as_ref()
                .ok_or_else(|| Error::config("sweep", "a [sweep] block is required for this subcommand"))?;
            let base = cfg.model_params()?;
            let values = sweep.values()?;
            let axis = sweep.axis.to_string();
            let (columns, rows, ok) = match sweep.observable {
                SweepObservable::DeltaE => {
                    let columns =
                        vec![axis.clone(), "delta_e_series".into(), "delta_e_closed".into(), "rel_diff".into(), "j_used".into()];
                    let mut rows = Vec::new();
                    let mut ok = 0usize;
                    for &v in &values {
                        let point = with_axis_value(&base, sweep.axis, v).and_then(|p| {
                            let series = pt2_series(&p, cfg.delta_e.tol)?;
                            let closed = delta_e_closed(&p)?;
                            Ok((series, closed))
                        });
                        match point {
                            Ok((series, closed)) => {
                                let rel = (series.delta_e - closed.value).abs()
                                    / closed.value.abs().max(f64::MIN_POSITIVE);
                                rows.push(Row::Data(vec![
                                    v.into(),
                                    series.delta_e.into(),
                                    closed.value.into(),
                                    rel.into(),
                                    series.j_used.into(),
                                ]));
                                ok += 1;
                            }
                            Err(e) if e.exit_code() == 1 => {
                                rows.push(Row::Comment(format!("skipped {axis}={v}: {e}")));
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    (columns, rows, ok)
                }
                SweepObservable::Splitting => {
                    let columns = vec![axis.clone(), "delta_e_spec".into()];
                    let truncation = cfg.truncation.to_truncation()?;
                    let mut rows = Vec::new();
                    let mut ok = 0usize;
                    for &v in &values {
                        let point = with_axis_value(&base, sweep.axis, v).and_then(|p| {
                            let h = build_hamiltonian(&p, truncation, cfg.truncation.rwa)?;
                            splitting_from_spectrum(&h)
                        });
                        match point {
                            Ok(de) => {
                                rows.push(Row::Data(vec![v.into(), de.into()]));
                                ok += 1;
                            }
                            Err(e) if e.exit_code() == 1 => {
                                rows.push(Row::Comment(format!("skipped {axis}={v}: {e}")));
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    (columns, rows, ok)
                }
            };
            let cols: Vec<&str> = columns.iter().map(String::as_str).collect();
            emit("sweep.csv", &csv_document(&echo, &cols, &rows), &mut files)?;
            format!("sweep: {ok}/{} points over {axis} succeeded", values.len())
        }
        Subcommand::Feasibility => {
            let fc = cfg
                .feasibility
                .as_ref()
                .ok_or_else(|| Error::config("feasibility", "a [feasibility] block is required for this subcommand"))?;
            let report = feasibility_report(&fc.to_experiment_params())?;
            let json = serde_json::to_string_pretty(&report)
                .map_err(|e| Error::config("feasibility", e.to_string()))?;
            emit("feasibility.json", &format!("{json}\n"), &mut files)?;
            format!(
                "feasibility: xi = {:.3e} m, eps/hbar = {:.3e} rad/s, d_max = {:.3e} m, feasible = {}",
                report.xi_m, report.epsilon_over_hbar, report.d_max_m, report.feasible
            )
        }
    };

    Ok(DispatchOutcome { files, summary })
}
