//! Batch evaluation of the closed-form error and energy-loss expressions.

use std::path::PathBuf;

use scopt::numerics::Probability;
use scopt::scopt::med_scopt;
use scopt::scopt_analytic::{
    energy_loss_scopt, energy_loss_scopt_inverted, p_dem_scopt_exact, p_dem_scopt_union,
    per_coordinate_error, RfMode,
};
use scopt::scsh::{
    energy_loss_chernoff, energy_loss_shannon, p_dem_chernoff, p_dem_exact_tail, p_dem_shannon,
    shannon_limit,
};
use scopt::Error;

use crate::error::Result;
use crate::grid::db_to_linear;
use crate::manifest::OutputSet;
use crate::sweep::{Family, Format, ScoptShape, SweepSpec};
use crate::table::{flag_cell, Cell, CurveTable};

pub const SCSH_COLUMNS: &[&str] = &[
    "snr_db",
    "rho_s",
    "rho_s0",
    "ratio",
    "p_shannon",
    "p_chernoff",
    "p_exact_tail",
    "loss_shannon_db",
    "loss_chernoff_db",
    "flag",
];

pub const SCOPT_COLUMNS: &[&str] = &[
    "snr_db",
    "rho_s",
    "rho_s0_exact",
    "rho_s0_approx",
    "d_med",
    "p_union",
    "p_union_raw",
    "p_exact",
    "loss_closed_exact_db",
    "loss_closed_approx_db",
    "loss_inverted_exact_db",
    "loss_inverted_approx_db",
    "p_coordinate",
    "flag",
];

pub const SCSH_LOSS_COLUMNS: &[&str] = &["p_dem", "loss_shannon_db", "loss_chernoff_db", "flag"];

pub const SCOPT_LOSS_COLUMNS: &[&str] = &[
    "p_dem",
    "loss_closed_exact_db",
    "loss_closed_approx_db",
    "loss_inverted_exact_db",
    "loss_inverted_approx_db",
    "flag",
];

/// Runs a loss formula; domain and validity failures become an empty cell
/// plus a flag, anything else propagates.
fn loss_cell(
    f: impl FnOnce() -> scopt::Result<scopt::numerics::Decibel>,
    flags: &mut Vec<&'static str>,
) -> Result<Cell> {
    match f() {
        Ok(db) => Ok(Cell::num(db.db())),
        Err(Error::Validity(_) | Error::Domain { .. }) => {
            if !flags.contains(&"loss_undefined") {
                flags.push("loss_undefined");
            }
            Ok(Cell::Empty)
        }
        Err(e) => Err(e.into()),
    }
}

pub fn scsh_row(rf: f64, n: u64, snr_db: f64) -> Result<Vec<Cell>> {
    let rho = db_to_linear(snr_db);
    let rho0 = shannon_limit(rf)?;
    let ratio = rho / rho0;
    let shannon = p_dem_shannon(n, rho, rf)?;
    let chernoff = p_dem_chernoff(n, ratio)?;
    let tail = p_dem_exact_tail(n, ratio)?;
    let mut flags = Vec::new();
    if shannon.value() == 0.0 || chernoff.value() == 0.0 || tail.value() == 0.0 {
        flags.push("p_underflow");
    }
    let loss_s = loss_cell(|| energy_loss_shannon(rf, n, shannon), &mut flags)?;
    let loss_c = loss_cell(|| energy_loss_chernoff(n, chernoff), &mut flags)?;
    Ok(vec![
        Cell::num(snr_db),
        Cell::num(rho),
        Cell::num(rho0),
        Cell::num(ratio),
        Cell::num(shannon.value()),
        Cell::num(chernoff.value()),
        Cell::num(tail.value()),
        loss_s,
        loss_c,
        flag_cell(&flags),
    ])
}

pub fn scopt_row(shape: ScoptShape, snr_db: f64) -> Result<Vec<Cell>> {
    let ScoptShape { k, n, .. } = shape;
    let rho = db_to_linear(snr_db);
    let d = med_scopt(rho, k, n)?;
    let union = p_dem_scopt_union(n, d)?;
    let exact = p_dem_scopt_exact(n, d)?;
    let mut flags = Vec::new();
    if union.was_clamped() {
        flags.push("clamped");
    }
    if union.value.value() == 0.0 || exact.value() == 0.0 {
        flags.push("p_underflow");
    }
    let p = union.value;
    let closed_exact = loss_cell(|| energy_loss_scopt(k, n, p, RfMode::Exact), &mut flags)?;
    let closed_approx = loss_cell(|| energy_loss_scopt(k, n, p, RfMode::Approx), &mut flags)?;
    let inv_exact = loss_cell(
        || energy_loss_scopt_inverted(k, n, p, RfMode::Exact),
        &mut flags,
    )?;
    let inv_approx = loss_cell(
        || energy_loss_scopt_inverted(k, n, p, RfMode::Approx),
        &mut flags,
    )?;
    Ok(vec![
        Cell::num(snr_db),
        Cell::num(rho),
        Cell::num(RfMode::Exact.shannon_limit(k)),
        Cell::num(RfMode::Approx.shannon_limit(k)),
        Cell::num(d),
        Cell::num(union.value.value()),
        Cell::num(union.raw),
        Cell::num(exact.value()),
        closed_exact,
        closed_approx,
        inv_exact,
        inv_approx,
        Cell::num(per_coordinate_error(k, rho).value()),
        flag_cell(&flags),
    ])
}

fn loss_rows(spec: &SweepSpec) -> Result<Option<CurveTable>> {
    if spec.pdem.is_empty() {
        return Ok(None);
    }
    let table = match spec.family {
        Family::Scsh => {
            let (rf, n) = spec.scsh_shape()?;
            let mut t = CurveTable::new(SCSH_LOSS_COLUMNS);
            for &p in &spec.pdem {
                let p = Probability::new(p)?;
                let mut flags = Vec::new();
                let a = loss_cell(|| energy_loss_shannon(rf, n, p), &mut flags)?;
                let b = loss_cell(|| energy_loss_chernoff(n, p), &mut flags)?;
                t.push(vec![Cell::num(p.value()), a, b, flag_cell(&flags)]);
            }
            t
        }
        Family::Scopt => {
            let ScoptShape { k, n, .. } = spec.scopt_shape()?;
            let mut t = CurveTable::new(SCOPT_LOSS_COLUMNS);
            for &p in &spec.pdem {
                let p = Probability::new(p)?;
                let mut flags = Vec::new();
                let mut row = vec![Cell::num(p.value())];
                row.push(loss_cell(
                    || energy_loss_scopt(k, n, p, RfMode::Exact),
                    &mut flags,
                )?);
                row.push(loss_cell(
                    || energy_loss_scopt(k, n, p, RfMode::Approx),
                    &mut flags,
                )?);
                row.push(loss_cell(
                    || energy_loss_scopt_inverted(k, n, p, RfMode::Exact),
                    &mut flags,
                )?);
                row.push(loss_cell(
                    || energy_loss_scopt_inverted(k, n, p, RfMode::Approx),
                    &mut flags,
                )?);
                row.push(flag_cell(&flags));
                t.push(row);
            }
            t
        }
    };
    Ok(Some(table))
}

/// The per-SNR curve table and, when targets were given, the loss table.
pub fn analytic_tables(spec: &SweepSpec) -> Result<(CurveTable, Option<CurveTable>)> {
    spec.check_pdem()?;
    let mut curve = match spec.family {
        Family::Scsh => CurveTable::new(SCSH_COLUMNS),
        Family::Scopt => CurveTable::new(SCOPT_COLUMNS),
    };
    match spec.family {
        Family::Scsh => {
            let (rf, n) = spec.scsh_shape()?;
            for db in spec.grid.points_db() {
                curve.push(scsh_row(rf, n, db)?);
            }
        }
        Family::Scopt => {
            let shape = spec.scopt_shape()?;
            for db in spec.grid.points_db() {
                curve.push(scopt_row(shape, db)?);
            }
        }
    }
    Ok((curve, loss_rows(spec)?))
}

pub(crate) fn render(table: &CurveTable, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

#[derive(Debug, Clone)]
pub struct AnalyticOutput {
    pub curve: CurveTable,
    pub loss: Option<CurveTable>,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Writes `<stem>.<ext>`, optionally `<stem>.loss.<ext>`, and `<stem>.manifest.json`.
pub fn cmd_analytic(spec: &SweepSpec) -> Result<AnalyticOutput> {
    let (curve, loss) = analytic_tables(spec)?;
    let (dir, stem) = spec.out_parts();
    let ext = spec.format.extension();
    let config = serde_json::to_value(spec).expect("spec serializes");
    let mut out = OutputSet::new(dir, "analytic", config, None);
    let mut files = vec![out.write(
        &format!("{stem}.{ext}"),
        render(&curve, spec.format).as_bytes(),
    )?];
    if let Some(loss) = &loss {
        files.push(out.write(
            &format!("{stem}.loss.{ext}"),
            render(loss, spec.format).as_bytes(),
        )?);
    }
    let (manifest, _) = out.finish(&format!("{stem}.manifest.json"))?;
    Ok(AnalyticOutput {
        curve,
        loss,
        files,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SnrGrid;

    fn value(t: &CurveTable, row: usize, col: &str) -> Option<f64> {
        t.column(col).unwrap()[row]
    }

    #[test]
    fn scsh_below_limit_is_one() {
        let mut s = SweepSpec::new(Family::Scsh, "x.csv");
        s.rf = Some(2.0);
        s.n = Some(100_000);
        s.grid = "-10:4.75:0.25".parse().unwrap();
        let (t, loss) = analytic_tables(&s).unwrap();
        assert!(loss.is_none());
        assert_eq!(t.len(), s.grid.len());
        assert!(t
            .column("p_shannon")
            .unwrap()
            .iter()
            .all(|p| *p == Some(1.0)));
        assert!(t
            .column("p_chernoff")
            .unwrap()
            .iter()
            .all(|p| *p == Some(1.0)));
    }

    #[test]
    fn scopt_k1_n50_at_0db() {
        let mut s = SweepSpec::new(Family::Scopt, "x.csv");
        s.k = Some(1);
        s.q = Some(50);
        s.grid = SnrGrid::new(0.0, 0.0, 0.0).unwrap();
        let (t, _) = analytic_tables(&s).unwrap();
        let p = value(&t, 0, "p_union").unwrap();
        assert!((p - 5.733_031_4e-5).abs() / 5.733e-5 < 1e-6, "{p}");
        assert!((value(&t, 0, "d_med").unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn low_snr_rows_flag_clamp_and_missing_loss() {
        let mut s = SweepSpec::new(Family::Scopt, "x.csv");
        s.k = Some(1);
        s.n = Some(50);
        s.grid = SnrGrid::new(-10.0, -10.0, 0.0).unwrap();
        let (t, _) = analytic_tables(&s).unwrap();
        let flag = &t.rows()[0][t.column_index("flag").unwrap()];
        assert_eq!(flag, &Cell::text("clamped;loss_undefined"));
        assert_eq!(value(&t, 0, "p_union"), Some(1.0));
        assert_eq!(value(&t, 0, "loss_closed_exact_db"), None);
    }

    #[test]
    fn loss_table_rows_follow_targets() {
        let mut s = SweepSpec::new(Family::Scsh, "x.csv");
        s.rf = Some(2.0);
        s.n = Some(1000);
        s.grid = SnrGrid::new(5.0, 5.0, 0.0).unwrap();
        s.pdem = vec![1e-10, 1e-6];
        let (_, loss) = analytic_tables(&s).unwrap();
        let loss = loss.unwrap();
        assert_eq!(loss.len(), 2);
        let c = loss.column("loss_chernoff_db").unwrap()[0].unwrap();
        assert!((c - 1.053_708_650_098_585).abs() < 1e-9);
        s.pdem = vec![0.0];
        assert!(analytic_tables(&s).is_err());
    }
}
