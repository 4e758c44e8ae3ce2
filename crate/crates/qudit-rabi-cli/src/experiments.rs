//! The six experiment runners. Each consumes a validated config, produces a
//! CSV table plus a JSON summary, and names the parameter point whose ground
//! state is used for truncation diagnostics.

use serde_json::json;

use qudit_rabi::dynamics::{
    adiabatic_run, analytic_j_z, analytic_photon, analytic_quench_fidelity, analytic_sigma_z,
    dominant_peak, quench_run, spectrum_of, RampSchedule, RampScheme, TimeSeries,
};
use qudit_rabi::entanglement::{negativity_map, parity_resolved_ground};
use qudit_rabi::model::{build_full_hamiltonian, ModelParams, ParityBlocks};
use qudit_rabi::operators::fidelity;
use qudit_rabi::strong_coupling::{
    ghz_state, ghz_state_corrected, ground_splitting_scaling, log_log_slope, perturbative_energies,
    GhzSign,
};
use qudit_rabi::weak_coupling::energies_sorted;
use qudit_rabi::RabiError;

use crate::config::{CliError, CliResult, ExperimentConfig, ExperimentKind, ModelSection};
use crate::output::Table;

pub struct RunOutput {
    pub table: Table,
    pub results: serde_json::Value,
    /// Parameters at the most demanding couplings of the run; their ground
    /// state feeds the truncation diagnostics.
    pub diag_params: ModelParams,
}

/// Couplings and frequencies are rescaled to omega = 1 on ingestion; all CSV
/// columns are in omega units (energies) or 1/omega (times).
fn normalized_params(m: &ModelSection, g1: f64, g2: f64) -> CliResult<ModelParams> {
    let w = m.omega;
    let built = match m.n_max {
        Some(n) => ModelParams::new(m.d, 1.0, m.omega1 / w, m.omega2 / w, g1 / w, g2 / w, n),
        None => ModelParams::with_auto_n_max(m.d, 1.0, m.omega1 / w, m.omega2 / w, g1 / w, g2 / w),
    };
    built.map_err(Into::into)
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    match cfg.experiment {
        ExperimentKind::Spectrum => spectrum(cfg),
        ExperimentKind::GhzFidelity => ghz_fidelity(cfg),
        ExperimentKind::NegativityMap => negativity_map_run(cfg),
        ExperimentKind::Quench => quench(cfg),
        ExperimentKind::Adiabatic => adiabatic(cfg),
        ExperimentKind::SplittingScaling => splitting_scaling(cfg),
    }
}

/// Low-energy spectrum vs coupling strength (g1 = g2 = g), with the
/// dispersive levels and the strong-coupling doublet alongside the exact
/// ones.
fn spectrum(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    let m = &cfg.model;
    let sweep = cfg.sweep.as_ref().expect("validated");
    let levels = sweep.levels.unwrap_or(10);
    let g_axis = linspace(sweep.g_min / m.omega, sweep.g_max / m.omega, sweep.points);
    // One truncation for the whole sweep, adequate at the top coupling.
    let top = normalized_params(m, sweep.g_max, sweep.g_max)?;
    if levels == 0 || levels > top.dim() {
        return Err(CliError::Config(format!(
            "sweep.levels must be in 1..={}",
            top.dim()
        )));
    }

    let mut columns = vec!["g1 [omega]".to_string(), "g2 [omega]".to_string()];
    columns.extend((0..levels).map(|k| format!("E_exact_{k} [omega]")));
    columns.extend((0..2 * m.d).map(|k| format!("E_weak_{k} [omega]")));
    columns.push("E_strong_minus [omega]".to_string());
    columns.push("E_strong_plus [omega]".to_string());
    let mut table = Table::new(columns);

    let blocks = ParityBlocks::new(&top);
    for &g in &g_axis {
        let p = ModelParams {
            g1: g,
            g2: g,
            ..top
        };
        let h = build_full_hamiltonian(&p)?;
        let exact = blocks.eigh_sectors(&h)?.merged_values();
        let weak = energies_sorted(&p)?;
        let (e_minus, e_plus) = match perturbative_energies(&p) {
            Ok(r) => (r.e_minus, r.e_plus),
            Err(RabiError::SingularDenominator(_)) => (f64::NAN, f64::NAN),
            Err(e) => return Err(e.into()),
        };
        let mut row = vec![g, g];
        row.extend(&exact[..levels]);
        row.extend(&weak);
        row.push(e_minus);
        row.push(e_plus);
        table.push_row(row);
    }

    Ok(RunOutput {
        table,
        results: json!({
            "levels": levels,
            "points": sweep.points,
            "n-max": top.n_max,
        }),
        diag_params: top,
    })
}

/// Overlap of the exact ground state with the GHZ reference (and its
/// first-order-corrected version) along g1 = g2 = g.
fn ghz_fidelity(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    let m = &cfg.model;
    let sweep = cfg.sweep.as_ref().expect("validated");
    let g_axis = linspace(sweep.g_min / m.omega, sweep.g_max / m.omega, sweep.points);
    let top = normalized_params(m, sweep.g_max, sweep.g_max)?;

    let mut table = Table::new(vec![
        "g1 [omega]".into(),
        "g2 [omega]".into(),
        "fidelity_ghz [dimensionless]".into(),
        "fidelity_ghz_corrected [dimensionless]".into(),
    ]);
    let mut last = (f64::NAN, f64::NAN);
    for &g in &g_axis {
        let p = ModelParams {
            g1: g,
            g2: g,
            ..top
        };
        let (_, ground) = parity_resolved_ground(&p)?;
        let f_ghz = fidelity(&ground, &ghz_state(&p, GhzSign::Plus)?)?;
        let f_corr = match ghz_state_corrected(&p, GhzSign::Plus) {
            Ok(state) => fidelity(&ground, &state)?,
            Err(RabiError::SingularDenominator(_)) => f64::NAN,
            Err(e) => return Err(e.into()),
        };
        last = (f_ghz, f_corr);
        table.push_row(vec![g, g, f_ghz, f_corr]);
    }

    Ok(RunOutput {
        table,
        results: json!({
            "fidelity-at-max-coupling": last.0,
            "corrected-fidelity-at-max-coupling": last.1,
        }),
        diag_params: top,
    })
}

/// Ground-state negativity on a coupling grid (long-format CSV).
fn negativity_map_run(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    let m = &cfg.model;
    let grid = cfg.grid.as_ref().expect("validated");
    let w = m.omega;
    let g1_axis = linspace(grid.g1_min / w, grid.g1_max / w, grid.g1_points);
    let g2_axis = linspace(grid.g2_min / w, grid.g2_max / w, grid.g2_points);
    let corner = normalized_params(m, grid.g1_max, grid.g2_max)?;

    let result = negativity_map(&corner, &g1_axis, &g2_axis)?;
    let mut table = Table::new(vec![
        "g1 [omega]".into(),
        "g2 [omega]".into(),
        "negativity [dimensionless]".into(),
    ]);
    for (i, &g1) in g1_axis.iter().enumerate() {
        for (j, &g2) in g2_axis.iter().enumerate() {
            table.push_row(vec![g1, g2, result.values[(i, j)]]);
        }
    }
    let (a1, a2) = result.argmax();
    Ok(RunOutput {
        table,
        results: json!({
            "argmax-g1": a1,
            "argmax-g2": a2,
            "max-negativity": result.max_value(),
            "n-max": result.n_max,
        }),
        diag_params: corner,
    })
}

/// Quench from the uncoupled ground state: exact observables, the analytic
/// strong-coupling curves, and the dominant spectral peaks.
fn quench(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    let m = &cfg.model;
    let time = cfg.time.as_ref().expect("validated");
    let p = normalized_params(m, m.g1.expect("validated"), m.g2.expect("validated"))?;
    let times = TimeSeries::uniform_grid(time.t_max, time.samples);

    let rec = quench_run(&p, &times)?;
    let fid_analytic = analytic_quench_fidelity(&p, &times)?;
    let photon_analytic = analytic_photon(&p, &times)?;
    let closed_qubit = p.d == 2 && (p.g1 - p.g2).abs() <= 1e-12;
    let sigma_analytic = if closed_qubit {
        Some((analytic_sigma_z(&p, &times)?, analytic_j_z(&p, &times)?))
    } else {
        None
    };

    let mut columns = vec![
        "t [1/omega]".to_string(),
        "fidelity [dimensionless]".to_string(),
        "sigma_z [dimensionless]".to_string(),
        "j_z [dimensionless]".to_string(),
        "photon_number [dimensionless]".to_string(),
        "fidelity_analytic [dimensionless]".to_string(),
        "photon_analytic [dimensionless]".to_string(),
    ];
    if sigma_analytic.is_some() {
        columns.push("sigma_z_analytic [dimensionless]".to_string());
        columns.push("j_z_analytic [dimensionless]".to_string());
    }
    let mut table = Table::new(columns);
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![
            t,
            rec.fidelity.values()[i],
            rec.sigma_z.values()[i],
            rec.j_z.values()[i],
            rec.photon_number.values()[i],
            fid_analytic.values()[i],
            photon_analytic.values()[i],
        ];
        if let Some((sz, jz)) = &sigma_analytic {
            row.push(sz.values()[i]);
            row.push(jz.values()[i]);
        }
        table.push_row(row);
    }

    let mut peaks = serde_json::Map::new();
    for series in [&rec.fidelity, &rec.sigma_z, &rec.j_z, &rec.photon_number] {
        let (freqs, mags) = spectrum_of(series)?;
        let (f, mag) = dominant_peak(&freqs, &mags);
        peaks.insert(
            series.label().to_string(),
            json!({ "frequency [omega]": f, "amplitude": mag }),
        );
    }
    let bin = 2.0 * std::f64::consts::PI / time.t_max;
    Ok(RunOutput {
        table,
        results: json!({
            "dominant-peaks": peaks,
            "frequency-bin [omega]": bin,
        }),
        diag_params: p,
    })
}

/// Adiabatic GHZ preparation under one of the two ramp protocols.
fn adiabatic(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    let m = &cfg.model;
    let ramp = cfg.ramp.as_ref().expect("validated");
    let end = normalized_params(m, m.g1.expect("validated"), m.g2.expect("validated"))?;
    let (scheme, start) = match ramp.scheme.as_str() {
        "I" => (
            RampScheme::CouplingsOn,
            ModelParams {
                g1: 0.0,
                g2: 0.0,
                ..end
            },
        ),
        _ => {
            let om = ramp.omega_initial.expect("validated") / m.omega;
            (
                RampScheme::FrequenciesDown,
                ModelParams {
                    omega1: om,
                    omega2: om,
                    ..end
                },
            )
        }
    };
    let sign = match ramp.ghz_sign.as_deref() {
        Some("-") => GhzSign::Minus,
        _ => GhzSign::Plus,
    };
    let schedule = RampSchedule::new(scheme, ramp.t_f, start, end)?;
    let target = ghz_state(&end, sign)?;
    let fid = adiabatic_run(&schedule, ramp.slices, &target)?;

    let mut table = Table::new(vec![
        "t [1/omega]".into(),
        "mu [dimensionless]".into(),
        "g1 [omega]".into(),
        "g2 [omega]".into(),
        "omega1 [omega]".into(),
        "omega2 [omega]".into(),
        "fidelity_to_target [dimensionless]".into(),
    ]);
    for (i, &t) in fid.times().iter().enumerate() {
        let pt = schedule.params_at(t);
        table.push_row(vec![
            t,
            schedule.mu(t),
            pt.g1,
            pt.g2,
            pt.omega1,
            pt.omega2,
            fid.values()[i],
        ]);
    }
    let final_fidelity = *fid.values().last().unwrap();
    Ok(RunOutput {
        table,
        results: json!({
            "scheme": ramp.scheme,
            "final-fidelity": final_fidelity,
            "slices": ramp.slices,
        }),
        diag_params: end,
    })
}

/// Exact ground-gap scaling with the qudit spacing; the log-log slope is the
/// order at which the ground degeneracy is lifted, d - 1.
fn splitting_scaling(cfg: &ExperimentConfig) -> CliResult<RunOutput> {
    let m = &cfg.model;
    let sp = cfg.splitting.as_ref().expect("validated");
    let p = normalized_params(m, sp.g, sp.g)?;
    let samples: Vec<f64> = sp.omega2_values.iter().map(|&x| x / m.omega).collect();
    let points = ground_splitting_scaling(&p, &samples)?;
    let slope = log_log_slope(&points)?;

    let mut table = Table::new(vec!["omega2 [omega]".into(), "gap [omega]".into()]);
    for &(om2, gap) in &points {
        table.push_row(vec![om2, gap]);
    }
    Ok(RunOutput {
        table,
        results: json!({
            "fitted-slope": slope,
            "expected-order": m.d - 1,
        }),
        diag_params: p,
    })
}
