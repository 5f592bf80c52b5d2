//! Deterministic artifact emission: a sorted-key JSON summary, one
//! RFC-4180-style CSV per table, and a generic plot script tying the CSVs
//! together.
//!
//! Determinism is the whole point: identical inputs must produce
//! byte-identical files, so keys are sorted (JSON objects round-trip
//! through a `BTreeMap`), floats are printed by the shortest round-trip
//! form, and tables are written in the order the caller built them.
//! Non-finite floats have no JSON representation and serialize as `null`;
//! callers keep astronomically scaled quantities in log-domain pairs, so
//! finite logs are the norm and `null` marks an exact zero.

use serde::Serialize;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("cannot write {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("value does not serialize: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// Canonical text for one number: shortest round-trip decimal, switching
/// to exponent form outside [1e-4, 1e15) so saturated values stay short.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string(); // merge -0
    }
    if x.is_finite() && x.abs() >= 1e-4 && x.abs() < 1e15 {
        format!("{x}")
    } else if x.is_finite() {
        format!("{x:e}")
    } else {
        format!("{x}") // inf / -inf / NaN, for CSV cells only
    }
}

/// Serialize any value to pretty JSON with sorted object keys and a
/// trailing newline.
pub fn sorted_json<T: Serialize>(value: &T) -> Result<String, ReportError> {
    // Routing through `Value` replaces struct field order by the map's
    // sorted key order.
    let v = serde_json::to_value(value)?;
    let mut s = serde_json::to_string_pretty(&v)?;
    s.push('\n');
    Ok(s)
}

/// One CSV table: column names, preformatted rows, and which columns the
/// plot script should draw.
#[derive(Clone, Debug)]
pub struct Table {
    /// File stem; the artifact is `<name>.csv`.
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// 1-based (x, y) column indices for the plot script.
    pub plot_cols: (usize, usize),
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Table {
        Table {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            plot_cols: (1, 2),
        }
    }

    pub fn plot(mut self, x: usize, y: usize) -> Table {
        assert!(x >= 1 && y >= 1 && x <= self.columns.len() && y <= self.columns.len());
        self.plot_cols = (x, y);
        self
    }

    pub fn push(&mut self, cells: Vec<String>) {
        assert_eq!(
            cells.len(),
            self.columns.len(),
            "row width must match the header of `{}`",
            self.name
        );
        self.rows.push(cells);
    }

    /// RFC-4180 text: CRLF line ends, quotes only where needed.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let mut line = |cells: &[String], out: &mut String| {
            for (i, c) in cells.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&csv_field(c));
            }
            out.push_str("\r\n");
        };
        line(&self.columns, &mut out);
        for row in &self.rows {
            line(row, &mut out);
        }
        out
    }
}

/// Quote a field iff it contains a delimiter, quote, or line break.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\r', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Plot script covering every table: plain text, one plot per CSV, no
/// styling beyond lines-with-points so any gnuplot-compatible tool works.
pub fn plot_script(tables: &[Table]) -> String {
    let mut s = String::from(
        "# Generated plotting script; renders each CSV next to it.\n\
         set datafile separator ','\n\
         set key autotitle columnhead\n\
         set grid\n",
    );
    for t in tables {
        let (x, y) = t.plot_cols;
        s.push_str(&format!(
            "\nset terminal pngcairo size 900,600\nset output '{0}.png'\nset xlabel '{1}'\nset ylabel '{2}'\nplot '{0}.csv' using {3}:{4} with linespoints\n",
            t.name,
            t.columns[x - 1],
            t.columns[y - 1],
            x,
            y
        ));
    }
    s
}

fn write_file(path: &Path, text: &str) -> Result<(), ReportError> {
    std::fs::write(path, text).map_err(|e| ReportError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

/// Write `results.json`, one `<table>.csv` each, and `plot.gp` into
/// `out_dir` (created if absent). Returns the paths written, in order.
pub fn write_report<T: Serialize>(
    out_dir: &Path,
    results: &T,
    tables: &[Table],
) -> Result<Vec<PathBuf>, ReportError> {
    std::fs::create_dir_all(out_dir).map_err(|e| ReportError::Io {
        path: out_dir.display().to_string(),
        msg: e.to_string(),
    })?;
    let mut written = Vec::new();
    let json_path = out_dir.join("results.json");
    write_file(&json_path, &sorted_json(results)?)?;
    written.push(json_path);
    for t in tables {
        let p = out_dir.join(format!("{}.csv", t.name));
        write_file(&p, &t.to_csv())?;
        written.push(p);
    }
    let gp = out_dir.join("plot.gp");
    write_file(&gp, &plot_script(tables))?;
    written.push(gp);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_keys_come_out_sorted() {
        #[derive(Serialize)]
        struct Zed {
            zulu: u32,
            alpha: u32,
            mike: u32,
        }
        let s = sorted_json(&Zed {
            zulu: 1,
            alpha: 2,
            mike: 3,
        })
        .unwrap();
        let a = s.find("alpha").unwrap();
        let m = s.find("mike").unwrap();
        let z = s.find("zulu").unwrap();
        assert!(a < m && m < z, "declaration order must not leak: {s}");
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn nonfinite_floats_become_null() {
        #[derive(Serialize)]
        struct V {
            x: f64,
        }
        let s = sorted_json(&V {
            x: f64::NEG_INFINITY,
        })
        .unwrap();
        assert!(s.contains("null"), "{s}");
    }

    #[test]
    fn csv_is_crlf_with_minimal_quoting() {
        let mut t = Table::new("demo", &["name", "value"]);
        t.push(vec!["plain".to_string(), "1.5".to_string()]);
        t.push(vec!["with, comma".to_string(), "say \"hi\"".to_string()]);
        let csv = t.to_csv();
        assert_eq!(
            csv,
            "name,value\r\nplain,1.5\r\n\"with, comma\",\"say \"\"hi\"\"\"\r\n"
        );
    }

    #[test]
    fn float_formatting_is_short_and_unambiguous() {
        assert_eq!(fmt_f64(0.0), "0");
        assert_eq!(fmt_f64(-0.0), "0");
        assert_eq!(fmt_f64(1.5), "1.5");
        assert_eq!(fmt_f64(-12345.678), "-12345.678");
        assert_eq!(fmt_f64(1e-7), "1e-7");
        assert_eq!(fmt_f64(f64::MAX), "1.7976931348623157e308");
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        // Round-trip: parse(fmt(x)) == x bit-for-bit on finite values.
        for &x in &[1.5e-300, 0.1, 2.0 / 3.0, 1e15, 9.999e-5] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn plot_script_references_each_table_and_its_columns() {
        let a = Table::new("first", &["k", "v"]);
        let b = Table::new("second", &["t", "x", "y"]).plot(1, 3);
        let gp = plot_script(&[a, b]);
        assert!(gp.contains("'first.csv' using 1:2"));
        assert!(gp.contains("'second.csv' using 1:3"));
        assert!(gp.contains("set output 'second.png'"));
    }

    #[test]
    fn write_report_emits_the_full_bundle() {
        let dir = std::env::temp_dir().join(format!("heatlab-report-{}", std::process::id()));
        let _ = std::fs::remove_dir_all(&dir);
        let mut t = Table::new("rows", &["i", "x"]);
        t.push(vec!["0".to_string(), "1".to_string()]);
        let written = write_report(&dir, &serde_json::json!({"ok": true}), &[t]).unwrap();
        let names: Vec<_> = written
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().to_string())
            .collect();
        assert_eq!(names, vec!["results.json", "rows.csv", "plot.gp"]);
        for p in &written {
            assert!(p.exists(), "missing artifact {}", p.display());
        }
        // Identical inputs ⇒ byte-identical artifacts.
        let first: Vec<_> = written
            .iter()
            .map(|p| std::fs::read(p).unwrap())
            .collect();
        let again = write_report(&dir, &serde_json::json!({"ok": true}), &[{
            let mut t = Table::new("rows", &["i", "x"]);
            t.push(vec!["0".to_string(), "1".to_string()]);
            t
        }])
        .unwrap();
        for (p, old) in again.iter().zip(&first) {
            assert_eq!(&std::fs::read(p).unwrap(), old, "{} changed", p.display());
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
