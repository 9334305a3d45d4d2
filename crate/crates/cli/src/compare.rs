//! Side-by-side curves of the sphere-packing estimates and the permutation
//! constellation bounds, with a gnuplot script to draw them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use scopt::scopt::{med_scopt, rf_exact};
use scopt::scopt_analytic::{p_dem_scopt_exact, p_dem_scopt_union};
use scopt::scsh::{p_dem_chernoff, p_dem_shannon, shannon_limit};
use serde::Serialize;
use serde_json::json;

use crate::error::Result;
use crate::grid::{db_to_linear, SnrGrid};
use crate::manifest::OutputSet;
use crate::sweep::Family;
use crate::table::{flag_cell, Cell, CurveTable};

pub const COMPARE_COLUMNS: &[&str] = &[
    "curve", "family", "rf", "rf_exact", "k", "n", "snr_db", "rho_s", "p_main", "p_alt", "flag",
];

/// Error level at which curves are said to cross.
pub const CROSSING_LEVEL: f64 = 1e-3;

pub const SCSH_N: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveFamily {
    pub family: Family,
    /// Nominal spectral efficiency label.
    pub rf: f64,
    pub k: Option<usize>,
    pub n: u64,
}

impl CurveFamily {
    pub fn name(&self) -> String {
        match self.k {
            None => format!("scsh_rf{}_n{}", self.rf, self.n),
            Some(k) => format!("scopt_rf{}_k{}_n{}", self.rf, k, self.n),
        }
    }

    pub fn title(&self) -> String {
        match self.k {
            None => format!("SCSH Rf={} n={}", self.rf, self.n),
            Some(k) => format!("SCOPT Rf={} K={} n={}", self.rf, k, self.n),
        }
    }

    /// `rf` for sphere packing, `log2((2K)!)/K` for permutations.
    pub fn rf_exact(&self) -> f64 {
        self.k.map_or(self.rf, rf_exact)
    }

    /// Shannon limit at the nominal `rf`, in dB.
    pub fn rho_s0_db(&self) -> f64 {
        10.0 * (self.rf.exp2() - 1.0).log10()
    }

    /// Main estimate and its companion: Shannon sphere / Chernoff for
    /// sphere packing, union bound / exact slab expression for permutations.
    pub fn evaluate(&self, rho: f64) -> Result<(f64, f64, bool)> {
        match self.k {
            None => {
                let rho0 = shannon_limit(self.rf)?;
                let main = p_dem_shannon(self.n, rho, self.rf)?;
                let alt = p_dem_chernoff(self.n, rho / rho0)?;
                Ok((main.value(), alt.value(), false))
            }
            Some(k) => {
                let d = med_scopt(rho, k, self.n)?;
                let union = p_dem_scopt_union(self.n, d)?;
                let exact = p_dem_scopt_exact(self.n, d)?;
                Ok((union.value.value(), exact.value(), union.was_clamped()))
            }
        }
    }
}

/// The four sphere-packing curves at n = 1e5 and the four permutation
/// constellations whose `rf_approx` matches the same labels.
pub fn default_families() -> Vec<CurveFamily> {
    let mut v: Vec<CurveFamily> = [2.0, 4.0, 6.0, 8.0]
        .into_iter()
        .map(|rf| CurveFamily {
            family: Family::Scsh,
            rf,
            k: None,
            n: SCSH_N,
        })
        .collect();
    for (rf, k, n) in [(2.0, 1, 50), (4.0, 2, 50), (6.0, 4, 30), (8.0, 8, 20)] {
        v.push(CurveFamily {
            family: Family::Scopt,
            rf,
            k: Some(k),
            n,
        });
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSummary {
    pub curve: String,
    pub family: CurveFamily,
    pub rho_s0_db: f64,
    /// First grid SNR where the main estimate drops below [`CROSSING_LEVEL`].
    pub crossing_db: Option<f64>,
}

impl CurveSummary {
    pub fn crosses_below_limit(&self) -> bool {
        self.crossing_db.is_some_and(|c| c < self.rho_s0_db)
    }
}

pub fn compare_table(grid: &SnrGrid) -> Result<(CurveTable, Vec<CurveSummary>)> {
    let mut table = CurveTable::new(COMPARE_COLUMNS);
    let mut summaries = Vec::new();
    for fam in default_families() {
        let name = fam.name();
        let mut crossing = None;
        for db in grid.points_db() {
            let rho = db_to_linear(db);
            let (main, alt, clamped) = fam.evaluate(rho)?;
            if crossing.is_none() && main < CROSSING_LEVEL {
                crossing = Some(db);
            }
            let flags: &[&str] = if clamped { &["clamped"] } else { &[] };
            table.push(vec![
                Cell::text(&name),
                Cell::text(fam.family.to_string()),
                Cell::num(fam.rf),
                Cell::num(fam.rf_exact()),
                fam.k.map_or(Cell::Empty, |k| Cell::Int(k as u64)),
                Cell::Int(fam.n),
                Cell::num(db),
                Cell::num(rho),
                Cell::num(main),
                Cell::num(alt),
                flag_cell(flags),
            ]);
        }
        summaries.push(CurveSummary {
            curve: name,
            rho_s0_db: fam.rho_s0_db(),
            family: fam,
            crossing_db: crossing,
        });
    }
    Ok((table, summaries))
}

/// Gnuplot script plotting every curve from `csv` on a log scale, solid
/// lines for the main estimates and dashed for the companions.
pub fn plot_script(csv: &str, image: &str) -> String {
    let mut s = String::new();
    s.push_str("set terminal pngcairo size 1000,700\n");
    writeln!(s, "set output '{image}'").unwrap();
    s.push_str("set datafile separator ','\n");
    s.push_str("set logscale y\nset format y '10^{%L}'\nset yrange [1e-12:1.5]\n");
    s.push_str("set xlabel 'SNR (dB)'\nset ylabel 'message error probability'\n");
    s.push_str("set key outside right\nset grid\n");
    let fams = default_families();
    s.push_str("plot \\\n");
    for (i, fam) in fams.iter().enumerate() {
        let name = fam.name();
        let sep = if i + 1 == fams.len() { "\n" } else { ", \\\n" };
        writeln!(
            s,
            "  '{csv}' using (strcol(1) eq '{name}' ? $7 : 1/0):9 with lines lw 2 lc {c} title '{t}', \\",
            c = i + 1,
            t = fam.title(),
        )
        .unwrap();
        write!(
            s,
            "  '{csv}' using (strcol(1) eq '{name}' ? $7 : 1/0):10 with lines dt 2 lc {c} notitle{sep}",
            c = i + 1,
        )
        .unwrap();
    }
    s
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub table: CurveTable,
    pub summaries: Vec<CurveSummary>,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Writes `compare.csv`, `compare.gp` and `compare.manifest.json` into `dir`.
pub fn cmd_compare(dir: &Path, grid: &SnrGrid) -> Result<CompareOutput> {
    let (table, summaries) = compare_table(grid)?;
    let config = json!({ "grid": grid, "families": default_families() });
    let mut out = OutputSet::new(dir, "compare", config, None);
    let files = vec![
        out.write("compare.csv", table.to_csv().as_bytes())?,
        out.write(
            "compare.gp",
            plot_script("compare.csv", "compare.png").as_bytes(),
        )?,
    ];
    let (manifest, _) = out.finish("compare.manifest.json")?;
    Ok(CompareOutput {
        table,
        summaries,
        files,
        manifest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eight_families() {
        let (t, sums) = compare_table(&SnrGrid::default_sweep()).unwrap();
        assert_eq!(sums.len(), 8);
        assert_eq!(t.len(), 8 * 161);
        let names: std::collections::BTreeSet<_> = sums.iter().map(|s| s.curve.clone()).collect();
        assert_eq!(names.len(), 8);
    }

    #[test]
    fn sphere_threshold_is_sharp() {
        let grid = SnrGrid::default_sweep();
        let (_, sums) = compare_table(&grid).unwrap();
        for s in sums.iter().filter(|s| s.family.k.is_none()) {
            let fam = s.family;
            // last grid point at or below the limit, then the next one
            let below = grid
                .points_db()
                .into_iter()
                .rfind(|db| *db <= s.rho_s0_db)
                .unwrap();
            let above = below + grid.step_db;
            assert_eq!(fam.evaluate(db_to_linear(below)).unwrap().0, 1.0);
            assert!(
                fam.evaluate(db_to_linear(above)).unwrap().0 < 1e-6,
                "{}",
                s.curve
            );
        }
    }

    #[test]
    fn permutation_curves_cross_below_limit() {
        let (_, sums) = compare_table(&SnrGrid::default_sweep()).unwrap();
        for s in sums.iter().filter(|s| s.family.k.is_some()) {
            assert!(s.crosses_below_limit(), "{s:?}");
        }
    }

    #[test]
    fn script_mentions_every_curve() {
        let s = plot_script("compare.csv", "compare.png");
        for f in default_families() {
            assert!(s.contains(&f.name()));
        }
        assert!(s.trim_end().ends_with("notitle"));
    }
}
