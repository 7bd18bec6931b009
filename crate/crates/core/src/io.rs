//! CSV tables with described columns, radial-function CSV files and their
//! JSON sidecars.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lie_data::RankOneSpace;
use crate::spherical::{RadialFunction, RadialGrid, TransformMeta};

/// Column header: `name [unit] (what the column checks)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub unit: String,
    pub about: String,
}

impl Column {
    pub fn new(name: &str, unit: &str, about: &str) -> Self {
        Self {
            name: name.into(),
            unit: unit.into(),
            about: about.into(),
        }
    }

    fn header(&self) -> String {
        if self.about.is_empty() {
            format!("{} [{}]", self.name, self.unit)
        } else {
            format!("{} [{}] ({})", self.name, self.unit, self.about)
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<Column>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: Vec<Column>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Domain(format!(
                "row has {} cells for {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn push_numbers(&mut self, row: &[f64]) -> Result<()> {
        self.push(row.iter().map(|&v| fmt_f64(v)).collect())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.columns.iter().map(Column::header)).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// Shortest round-trip representation, so output bytes depend only on the value.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:e}")
    }
}

#[derive(Clone, Debug, Serialize, serde::Deserialize)]
pub struct RadialSidecar {
    pub space: String,
    pub grid: crate::spherical::GridSummary,
    pub truncation: Option<f64>,
    pub epsilon_ladder: Vec<f64>,
}

impl RadialSidecar {
    pub fn new(f: &RadialFunction, meta: Option<&TransformMeta>) -> Self {
        Self {
            space: f.space.label(),
            grid: crate::spherical::GridSummary::of(&f.grid),
            truncation: meta.map(|m| m.truncation),
            epsilon_ladder: meta.map(|m| m.epsilon_ladder.clone()).unwrap_or_default(),
        }
    }
}

/// `path` with its extension replaced by `json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn radial_columns() -> Vec<Column> {
    vec![
        Column::new("r", "geodesic radius", ""),
        Column::new("re", "value", "real part"),
        Column::new("im", "value", "imaginary part"),
    ]
}

pub fn radial_table(f: &RadialFunction) -> Table {
    let mut t = Table::new(radial_columns());
    for (&r, v) in f.grid.points().iter().zip(&f.values) {
        t.rows.push(vec![fmt_f64(r), fmt_f64(v.re), fmt_f64(v.im)]);
    }
    t
}

/// CSV with columns `r, re, im` plus a JSON sidecar next to it.
pub fn write_radial(f: &RadialFunction, path: &Path, meta: Option<&TransformMeta>) -> Result<()> {
    radial_table(f).write(path)?;
    let side = serde_json::to_string_pretty(&RadialSidecar::new(f, meta)).map_err(|e| Error::Parse(e.to_string()))?;
    fs::write(sidecar_path(path), side + "\n")?;
    Ok(())
}

pub fn read_radial(space: RankOneSpace, path: &Path) -> Result<RadialFunction> {
    let text = fs::read_to_string(path)?;
    parse_radial(space, &text)
}

pub fn parse_radial(space: RankOneSpace, text: &str) -> Result<RadialFunction> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut r = Vec::new();
    let mut values = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != 3 {
            return Err(Error::Parse(format!("row {}: expected 3 cells, found {}", i + 2, rec.len())));
        }
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("row {}, column {}: {e}", i + 2, k + 1)))
        };
        r.push(num(0)?);
        values.push(Complex64::new(num(1)?, num(2)?));
    }
    RadialFunction::new(space, RadialGrid::new(r)?, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_roundtrip_is_exact() {
        let grid = RadialGrid::uniform(3.0, 31).unwrap();
        let f = RadialFunction::from_fn(RankOneSpace::h3(), grid, |r| Complex64::new((-r).exp(), r.sin() / 3.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_radial(&f, &p, None).unwrap();
        let g = read_radial(RankOneSpace::h3(), &p).unwrap();
        assert_eq!(f.values, g.values);
        assert_eq!(f.grid.points(), g.grid.points());
        let side: RadialSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(&p)).unwrap()).unwrap();
        assert_eq!(side.space, "H3(R)");
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("r [geodesic radius],re [value] (real part)"));
    }

    #[test]
    fn table_rejects_ragged_rows() {
        let mut t = Table::new(vec![Column::new("t", "time", "")]);
        assert!(t.push(vec!["1".into(), "2".into()]).is_err());
        t.push_numbers(&[f64::INFINITY]).unwrap();
        assert_eq!(t.to_csv().unwrap(), "t [time]\ninf\n");
    }

    #[test]
    fn bad_cell_reports_row() {
        let err = parse_radial(RankOneSpace::h3(), "r,re,im\n0,1,0\n0.5,x,0\n").unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
    }
}
