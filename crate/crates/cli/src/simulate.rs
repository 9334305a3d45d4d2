//! Monte Carlo sweeps over an SNR grid, aligned with the analytic predictions.

use std::path::PathBuf;

use scopt::channel::{simulate, ChannelConfig, Detector, SimReport, ML_ENUMERATION_LIMIT};
use scopt::scopt::{med_scopt, ScoptParams};
use scopt::scopt_analytic::{
    p_dem_scopt_exact, p_dem_scopt_union, per_coordinate_error, threshold_message_error,
};
use scopt::Error;

use crate::analytic::render;
use crate::error::{CliError, Result};
use crate::grid::db_to_linear;
use crate::manifest::OutputSet;
use crate::sweep::{Family, SweepSpec};
use crate::table::{flag_cell, Cell, CurveTable};

pub const SIM_COLUMNS: &[&str] = &[
    "snr_db",
    "rho_s",
    "trials",
    "message_errors",
    "p_message",
    "p_message_lower",
    "p_message_upper",
    "block_errors",
    "p_block",
    "coordinate_errors",
    "p_coordinate",
    "p_coordinate_lower",
    "p_coordinate_upper",
    "invalid_blocks",
    "pred_coordinate",
    "pred_message_threshold",
    "p_union",
    "p_exact",
    "flag",
];

/// Validates everything a sweep needs before the first trial runs.
pub fn prepare(spec: &SweepSpec) -> Result<(ScoptParams, Vec<ChannelConfig>)> {
    if spec.family != Family::Scopt {
        return Err(CliError::Usage(
            "simulate supports --family scopt only".into(),
        ));
    }
    let params = spec.scopt_shape()?.params()?;
    if spec.detector == Detector::MlBruteforce {
        let fits = params
            .num_signals()
            .is_some_and(|m| m <= ML_ENUMERATION_LIMIT as u128);
        if !fits {
            return Err(Error::EnumerationGuard {
                size: params
                    .num_signals()
                    .map_or_else(|| "more than 2^128".to_string(), |m| m.to_string()),
                limit: ML_ENUMERATION_LIMIT,
            }
            .into());
        }
    }
    let configs = spec
        .grid
        .points_db()
        .into_iter()
        .map(|db| {
            let cfg = ChannelConfig::new(db_to_linear(db), spec.trials, spec.seed, spec.detector)
                .with_workers(spec.workers)
                .with_chunk_size(spec.chunk_size)
                .with_noise_variance(spec.noise_variance);
            cfg.validate().map(|_| cfg)
        })
        .collect::<scopt::Result<Vec<_>>>()?;
    let coordinates = params.big_n() as u64;
    if spec
        .trials
        .checked_mul(coordinates)
        .is_none_or(|t| t > 1 << 63)
    {
        return Err(Error::CounterOverflow {
            trials: spec.trials,
            coordinates,
        }
        .into());
    }
    Ok((params, configs))
}

pub fn sim_row(params: &ScoptParams, snr_db: f64, r: &SimReport) -> Result<Vec<Cell>> {
    let rho = r.config.rho_s;
    let d = med_scopt(rho, params.k(), params.n())?;
    let union = p_dem_scopt_union(params.n(), d)?;
    let exact = p_dem_scopt_exact(params.n(), d)?;
    let flags: &[&str] = if union.was_clamped() {
        &["clamped"]
    } else {
        &[]
    };
    Ok(vec![
        Cell::num(snr_db),
        Cell::num(rho),
        Cell::Int(r.trials),
        Cell::Int(r.message_errors),
        Cell::num(r.p_message.p),
        Cell::num(r.p_message.lower),
        Cell::num(r.p_message.upper),
        Cell::Int(r.block_errors),
        Cell::num(r.p_block.p),
        Cell::Int(r.coordinate_errors),
        Cell::num(r.p_coordinate.p),
        Cell::num(r.p_coordinate.lower),
        Cell::num(r.p_coordinate.upper),
        Cell::Int(r.invalid_blocks),
        Cell::num(per_coordinate_error(params.k(), rho).value()),
        Cell::num(threshold_message_error(params, rho).value()),
        Cell::num(union.value.value()),
        Cell::num(exact.value()),
        flag_cell(flags),
    ])
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub table: CurveTable,
    pub reports: Vec<SimReport>,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Every grid point reuses the same seed, so neighbouring points see the
/// same noise draws scaled differently and the curve is smooth.
pub fn run_sweep(spec: &SweepSpec) -> Result<(CurveTable, Vec<SimReport>)> {
    let (params, configs) = prepare(spec)?;
    let mut table = CurveTable::new(SIM_COLUMNS);
    let mut reports = Vec::with_capacity(configs.len());
    for (db, cfg) in spec.grid.points_db().into_iter().zip(&configs) {
        let report = simulate(&params, cfg)?;
        table.push(sim_row(&params, db, &report)?);
        reports.push(report);
    }
    Ok((table, reports))
}

/// Writes `<stem>.<ext>`, `<stem>.reports.json` and `<stem>.manifest.json`.
pub fn cmd_simulate(spec: &SweepSpec) -> Result<SimulateOutput> {
    let (table, reports) = run_sweep(spec)?;
    let (dir, stem) = spec.out_parts();
    let config = serde_json::to_value(spec).expect("spec serializes");
    let mut out = OutputSet::new(dir, "simulate", config, Some(spec.seed));
    let ext = spec.format.extension();
    let mut files = vec![out.write(
        &format!("{stem}.{ext}"),
        render(&table, spec.format).as_bytes(),
    )?];
    let mut json = serde_json::to_string_pretty(&reports).expect("reports serialize");
    json.push('\n');
    files.push(out.write(&format!("{stem}.reports.json"), json.as_bytes())?);
    let (manifest, _) = out.finish(&format!("{stem}.manifest.json"))?;
    Ok(SimulateOutput {
        table,
        reports,
        files,
        manifest,
    })
}
