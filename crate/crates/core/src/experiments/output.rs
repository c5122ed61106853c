//! Report files: the sweep table as CSV and JSON, plus one CSV per figure.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::sweep::{CellRow, CellStatus, SweepReport};
use crate::generators::GeneratorKind;

#[derive(Serialize)]
struct FlatRow<'a> {
    generator: GeneratorKind,
    sigma2: f64,
    status: CellStatus,
    n: u64,
    eta_n: u64,
    e_f: Option<f64>,
    gamma_f: Option<f64>,
    e_min: Option<f64>,
    e_max: Option<f64>,
    gamma_min: Option<f64>,
    gamma_max: Option<f64>,
    gamma: Option<f64>,
    e_p: Option<f64>,
    e_p_star: Option<f64>,
    eta: Option<u64>,
    eta_star: Option<u64>,
    error: Option<&'a str>,
}

impl<'a> From<&'a CellRow> for FlatRow<'a> {
    fn from(row: &'a CellRow) -> Self {
        let r = row.report.as_ref();
        FlatRow {
            generator: row.generator,
            sigma2: row.sigma2,
            status: row.status,
            n: row.n,
            eta_n: row.eta_n,
            e_f: r.map(|r| r.e_f),
            gamma_f: r.map(|r| r.gamma_f),
            e_min: r.map(|r| r.e_min),
            e_max: r.map(|r| r.e_max),
            gamma_min: r.map(|r| r.gamma_min),
            gamma_max: r.map(|r| r.gamma_max),
            gamma: r.map(|r| r.gamma),
            e_p: r.and_then(|r| r.e_p),
            e_p_star: r.and_then(|r| r.e_p_star),
            eta: r.map(|r| r.eta),
            eta_star: r.map(|r| r.eta_star),
            error: row.error.as_deref(),
        }
    }
}

/// One row per (generator, sigma2) cell with every report field. Missing
/// values are empty fields.
pub fn write_sweep_csv<W: Write>(out: W, report: &SweepReport) -> Result<(), crate::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in &report.rows {
        w.serialize(FlatRow::from(row))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_json<W: Write>(out: W, report: &SweepReport) -> Result<(), crate::Error> {
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, report)?;
    writeln!(out)?;
    Ok(())
}

fn figure<W: Write, T: Serialize>(out: W, rows: impl IntoIterator<Item = T>) -> Result<(), crate::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct GammaPoint {
    generator: GeneratorKind,
    sigma2: f64,
    gamma: f64,
    gamma_f: f64,
    gamma_min: f64,
    gamma_max: f64,
}

#[derive(Serialize)]
struct ErrorPoint {
    generator: GeneratorKind,
    sigma2: f64,
    e_f: f64,
    e_min: f64,
    e_max: f64,
}

#[derive(Serialize)]
struct PdfErrorPoint {
    generator: GeneratorKind,
    sigma2: f64,
    e_p: Option<f64>,
    e_p_star: Option<f64>,
}

#[derive(Serialize)]
struct UniquePoint {
    generator: GeneratorKind,
    sigma2: f64,
    eta_n: u64,
    eta: u64,
    eta_star: u64,
}

#[derive(Serialize)]
struct PdfPoint {
    generator: GeneratorKind,
    sigma2: f64,
    m: usize,
    p_g: f64,
}

/// Names of the figure files, in the order they are written.
pub const FIGURE_FILES: [&str; 5] = ["fig_gamma.csv", "fig_errors.csv", "fig_ep.csv", "fig_eta.csv", "fig_pdf.csv"];

fn evaluated(report: &SweepReport) -> impl Iterator<Item = (&CellRow, &crate::evaluation::BagReport)> {
    report.rows.iter().filter_map(|row| row.report.as_ref().map(|r| (row, r)))
}

/// Writes `sweep.csv`, `sweep.json` and the figure files into `dir`,
/// returning the paths in write order.
pub fn write_sweep_outputs(report: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>, crate::Error> {
    std::fs::create_dir_all(dir)?;
    let create = |name: &str| -> Result<(PathBuf, BufWriter<File>), crate::Error> {
        let path = dir.join(name);
        Ok((path.clone(), BufWriter::new(File::create(&path)?)))
    };
    let mut paths = Vec::new();

    let (path, f) = create("sweep.csv")?;
    write_sweep_csv(f, report)?;
    paths.push(path);
    let (path, f) = create("sweep.json")?;
    write_sweep_json(f, report)?;
    paths.push(path);

    let (path, f) = create(FIGURE_FILES[0])?;
    figure(
        f,
        evaluated(report).map(|(row, r)| GammaPoint {
            generator: row.generator,
            sigma2: row.sigma2,
            gamma: r.gamma,
            gamma_f: r.gamma_f,
            gamma_min: r.gamma_min,
            gamma_max: r.gamma_max,
        }),
    )?;
    paths.push(path);

    let (path, f) = create(FIGURE_FILES[1])?;
    figure(
        f,
        evaluated(report).map(|(row, r)| ErrorPoint {
            generator: row.generator,
            sigma2: row.sigma2,
            e_f: r.e_f,
            e_min: r.e_min,
            e_max: r.e_max,
        }),
    )?;
    paths.push(path);

    let (path, f) = create(FIGURE_FILES[2])?;
    figure(
        f,
        evaluated(report).map(|(row, r)| PdfErrorPoint {
            generator: row.generator,
            sigma2: row.sigma2,
            e_p: r.e_p,
            e_p_star: r.e_p_star,
        }),
    )?;
    paths.push(path);

    let (path, f) = create(FIGURE_FILES[3])?;
    figure(
        f,
        evaluated(report).map(|(row, r)| UniquePoint {
            generator: row.generator,
            sigma2: row.sigma2,
            eta_n: row.eta_n,
            eta: r.eta,
            eta_star: r.eta_star,
        }),
    )?;
    paths.push(path);

    let (path, f) = create(FIGURE_FILES[4])?;
    figure(
        f,
        report.best_pdf.iter().flat_map(|b| {
            b.occurrence.iter().enumerate().map(move |(i, &p_g)| PdfPoint {
                generator: b.generator,
                sigma2: b.sigma2,
                m: i + 1,
                p_g,
            })
        }),
    )?;
    paths.push(path);

    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::SamplingConfig;
    use crate::evaluation::convergence::ConvergenceRule;
    use crate::experiments::sweep::{run_sweep, SweepMode, SweepSpec};

    fn report() -> SweepReport {
        let mut spec = SweepSpec::new("t", SamplingConfig::new(20e-6, 1e-6, 2e5).with_t_min(2e-6), SweepMode::Desk);
        spec.sigma2_grid = vec![0.1, 10.0];
        spec.rule = ConvergenceRule { min_patterns: 100, window: 100, rel_tol: 0.01 };
        spec.eta_at = 100;
        spec.cap = 100;
        run_sweep(&spec, 5).unwrap()
    }

    #[test]
    fn csv_has_one_row_per_cell() {
        let r = report();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &r).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "generator,sigma2,status,n,eta_n,e_f,gamma_f,e_min,e_max,gamma_min,gamma_max,gamma,e_p,e_p_star,eta,eta_star,error"
        );
        assert_eq!(lines.count(), 6);
        assert!(text.contains("angie,0.1,cap_hit,100,100,0.0,0.0,0.0,0.0,0.0,0.0,0.0,"), "{text}");
    }

    #[test]
    fn outputs_are_byte_identical_across_runs() {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let pa = write_sweep_outputs(&report(), a.path()).unwrap();
        let pb = write_sweep_outputs(&report(), b.path()).unwrap();
        assert_eq!(pa.len(), 7);
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap(), "{}", x.display());
        }
        let pdf = std::fs::read_to_string(a.path().join("fig_pdf.csv")).unwrap();
        // header plus 20 grid points for each of three generators
        assert_eq!(pdf.lines().count(), 61);
        let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&pa[1]).unwrap()).unwrap();
        assert_eq!(json["provenance"]["seed"], 5);
        assert_eq!(json["provenance"]["mode"], "desk");
    }
}
