use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{ExactCurve, ExperimentConfig, ExperimentOutput, ResultRow, ResultTable};
use crate::error::{Error, Result};
use crate::transpile::volume_report;

pub const CSV_HEADER: [&str; 9] = [
    "time",
    "observable",
    "raw_mean",
    "raw_err",
    "ro_mean",
    "ro_err",
    "zne_mean",
    "zne_err",
    "exact",
];

pub fn write_csv(table: &ResultTable, path: &Path) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    w.write_record(CSV_HEADER)?;
    for r in &table.rows {
        w.write_record([
            r.time.to_string(),
            r.observable.clone(),
            r.raw_mean.to_string(),
            r.raw_err.to_string(),
            r.ro_mean.to_string(),
            r.ro_err.to_string(),
            r.zne_mean.to_string(),
            r.zne_err.to_string(),
            r.exact.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_io(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            line: 0,
            reason: format!("{other:?}"),
        },
    }
}

pub fn read_csv(path: &Path) -> Result<ResultTable> {
    let mut r = csv::Reader::from_path(path).map_err(|e| csv_io(path, e))?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            reason: format!("unexpected header {header:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let num = |k: usize| -> Result<f64> {
            rec.get(k)
                .unwrap_or("")
                .parse()
                .map_err(|e| Error::Parse {
                    line,
                    reason: format!("column {}: {e}", CSV_HEADER[k]),
                })
        };
        rows.push(ResultRow {
            time: num(0)?,
            observable: rec.get(1).unwrap_or("").to_string(),
            raw_mean: num(2)?,
            raw_err: num(3)?,
            ro_mean: num(4)?,
            ro_err: num(5)?,
            zne_mean: num(6)?,
            zne_err: num(7)?,
            exact: num(8)?,
        });
    }
    Ok(ResultTable { rows })
}

/// Wide CSV: `time` then one column per observable.
pub fn write_exact_csv(curve: &ExactCurve, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_io(path, e))?;
    let mut header = vec!["time".to_string()];
    header.extend(curve.columns.iter().map(|(n, _)| n.clone()));
    w.write_record(&header)?;
    for (k, t) in curve.times.iter().enumerate() {
        let mut rec = vec![t.to_string()];
        rec.extend(curve.columns.iter().map(|(_, v)| v[k].to_string()));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// File-name form of an observable, e.g. `loschmidt:0101` -> `loschmidt_0101`.
pub fn file_stem(observable: &str) -> String {
    observable
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn x(&self, v: f64) -> f64 {
        let span = if self.x1 > self.x0 { self.x1 - self.x0 } else { 1.0 };
        LEFT + (v - self.x0) / span * (W - LEFT - RIGHT)
    }

    fn y(&self, v: f64) -> f64 {
        let span = if self.y1 > self.y0 { self.y1 - self.y0 } else { 1.0 };
        H - BOTTOM - (v - self.y0) / span * (H - TOP - BOTTOM)
    }
}

/// Line plot of one observable: raw, readout-mitigated and ZNE points with
/// error bars, and the exact curve dashed (`exact` if given, else the table's
/// exact column).
pub fn write_svg(
    table: &ResultTable,
    observable: &str,
    exact: Option<(&[f64], &[f64])>,
    path: &Path,
) -> Result<()> {
    let rows: Vec<&ResultRow> = table.for_observable(observable).collect();
    if rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    let (ex_t, ex_v): (Vec<f64>, Vec<f64>) = match exact {
        Some((t, v)) => (t.to_vec(), v.to_vec()),
        None => rows.iter().map(|r| (r.time, r.exact)).unzip(),
    };
    let mut ys: Vec<f64> = ex_v.clone();
    for r in &rows {
        ys.extend([
            r.raw_mean - r.raw_err,
            r.raw_mean + r.raw_err,
            r.ro_mean - r.ro_err,
            r.ro_mean + r.ro_err,
            r.zne_mean - r.zne_err,
            r.zne_mean + r.zne_err,
        ]);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.time).chain(ex_t.iter().copied()).collect();
    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = 0.05 * (max(&ys) - min(&ys)).max(1e-3);
    let f = Frame {
        x0: min(&xs),
        x1: max(&xs),
        y0: min(&ys) - pad,
        y1: max(&ys) + pad,
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">
<rect width="100%" height="100%" fill="white"/>
<text x="{}" y="18" text-anchor="middle" font-size="13">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(observable)
    );
    // axes and ticks
    let (ax0, ax1, ay0, ay1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{ax0} {ay1} L{ax0} {ay0} L{ax1} {ay0}" stroke="black" fill="none"/>"#
    );
    for k in 0..=4 {
        let xv = f.x0 + (f.x1 - f.x0) * k as f64 / 4.0;
        let yv = f.y0 + (f.y1 - f.y0) * k as f64 / 4.0;
        let (px, py) = (f.x(xv), f.y(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{ay0}" x2="{px:.2}" y2="{}" stroke="black"/><text x="{px:.2}" y="{}" text-anchor="middle">{xv:.3}</text>"#,
            ay0 + 4.0,
            ay0 + 16.0
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{py:.2}" x2="{ax0}" y2="{py:.2}" stroke="black"/><text x="{}" y="{:.2}" text-anchor="end">{yv:.3}</text>"#,
            ax0 - 4.0,
            ax0 - 6.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        (ax0 + ax1) / 2.0,
        H - 12.0
    );

    let exact_pts: Vec<String> = ex_t
        .iter()
        .zip(&ex_v)
        .map(|(&t, &v)| format!("{:.2},{:.2}", f.x(t), f.y(v)))
        .collect();
    let _ = writeln!(
        s,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-dasharray="6 4"/>"#,
        exact_pts.join(" ")
    );

    let series: [(&str, &str, fn(&ResultRow) -> (f64, f64)); 3] = [
        ("raw", "#d62728", |r| (r.raw_mean, r.raw_err)),
        ("readout", "#1f77b4", |r| (r.ro_mean, r.ro_err)),
        ("readout+ZNE", "#2ca02c", |r| (r.zne_mean, r.zne_err)),
    ];
    for (k, (name, color, get)) in series.iter().enumerate() {
        let pts: Vec<String> = rows
            .iter()
            .map(|r| format!("{:.2},{:.2}", f.x(r.time), f.y(get(r).0)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1"/>"#,
            pts.join(" ")
        );
        for r in &rows {
            let (m, e) = get(r);
            let (px, lo, hi) = (f.x(r.time), f.y(m - e), f.y(m + e));
            let _ = writeln!(
                s,
                r#"<line x1="{px:.2}" y1="{lo:.2}" x2="{px:.2}" y2="{hi:.2}" stroke="{color}"/><circle cx="{px:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                f.y(m)
            );
        }
        let ly = TOP + 20.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{ly}" r="4" fill="{color}"/><text x="{}" y="{}">{name}</text>"#,
            W - RIGHT + 20.0,
            W - RIGHT + 30.0,
            ly + 4.0
        );
    }
    let ly = TOP + 60.0;
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="black" stroke-dasharray="6 4"/><text x="{}" y="{}">exact</text>"#,
        W - RIGHT + 12.0,
        W - RIGHT + 28.0,
        W - RIGHT + 30.0,
        ly + 4.0
    );
    s.push_str("</svg>\n");
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `results.csv`, one SVG per observable, `calibration.json` and
/// `run.log` into `dir`. Returns the paths written.
pub fn write_outputs(
    dir: &Path,
    cfg: &ExperimentConfig,
    out: &ExperimentOutput,
    exact: Option<&ExactCurve>,
) -> Result<Vec<PathBuf>> {
    if out.table.rows.is_empty() {
        return Err(Error::EmptyTable);
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let csv_path = dir.join("results.csv");
    write_csv(&out.table, &csv_path)?;
    written.push(csv_path);

    for name in out.table.observables() {
        let curve = exact.and_then(|c| {
            c.columns
                .iter()
                .find(|(n, _)| *n == name)
                .map(|(_, v)| (c.times.as_slice(), v.as_slice()))
        });
        let p = dir.join(format!("{}.svg", file_stem(&name)));
        write_svg(&out.table, &name, curve, &p)?;
        written.push(p);
    }

    let cal = dir.join("calibration.json");
    out.calibration.save(&cal)?;
    written.push(cal);

    let m = out.sample_circuit.metrics();
    let v = volume_report(&out.sample_circuit);
    let times = cfg.times.values();
    let mut log = String::new();
    let _ = writeln!(log, "model: {} {} g={} convention={:?}", cfg.model, cfg.geometry, cfg.g, cfg.convention);
    let _ = writeln!(log, "topology: {}", cfg.topology);
    let _ = writeln!(
        log,
        "noise: p2={} e01={} e10={}",
        cfg.noise.p2, cfg.noise.e01, cfg.noise.e10
    );
    let _ = writeln!(log, "master_seed: {}", cfg.master_seed);
    let _ = writeln!(
        log,
        "grid: {} times x {} scale factors x {} repetitions, {} shots each",
        times.len(),
        cfg.scale_factors.len(),
        cfg.repetitions,
        cfg.shots
    );
    let _ = writeln!(
        log,
        "circuit: {} qubits, {} CNOTs, two-qubit depth {}, volume {}",
        m.qubit_count, m.cnot_count, m.two_qubit_depth, v.circuit_volume
    );
    let _ = writeln!(log, "calibration circuits: {}", out.calibration_circuits);
    let _ = writeln!(log, "executed circuits: {}", out.executed_circuits);
    let log_path = dir.join("run.log");
    fs::write(&log_path, log).map_err(|e| Error::io(&log_path, e))?;
    written.push(log_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ResultTable {
        let row = |t: f64, o: &str| ResultRow {
            time: t,
            observable: o.into(),
            raw_mean: 0.1 + t / 3.0,
            raw_err: 0.01,
            ro_mean: 0.2,
            ro_err: 1.0 / 7.0,
            zne_mean: -0.3,
            zne_err: 0.0,
            exact: (t * 1.1).cos().powi(2),
        };
        ResultTable {
            rows: vec![row(0.0, "loschmidt:0000"), row(0.5, "loschmidt:0000"), row(0.0, "gauss:A")],
        }
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("r.csv");
        write_csv(&table(), &p).unwrap();
        assert_eq!(read_csv(&p).unwrap(), table());
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("time,observable,raw_mean,raw_err,ro_mean,ro_err,zne_mean,zne_err,exact\n"));
    }

    #[test]
    fn empty_table_refused() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            write_csv(&ResultTable::default(), &dir.path().join("x.csv")),
            Err(Error::EmptyTable)
        ));
        assert!(write_svg(&table(), "nope", None, &dir.path().join("x.svg")).is_err());
    }

    #[test]
    fn svg_is_well_formed_enough() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.svg");
        write_svg(&table(), "loschmidt:0000", None, &p).unwrap();
        let s = fs::read_to_string(&p).unwrap();
        assert!(s.starts_with("<?xml"));
        assert!(s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<polyline").count(), 4);
        assert!(s.contains("stroke-dasharray"));
    }

    #[test]
    fn io_errors_carry_the_path() {
        let err = write_csv(&table(), Path::new("/nonexistent/dir/r.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/dir/r.csv"));
    }
}
