// SPDX-License-Identifier: Apache-2.0

//! CSV formats: interface snapshots (`alpha,h` or `alpha,z1,z2`) and the
//! per-sample diagnostics table. Reals are written with 17 significant digits.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::geometry::{self, GraphInterface, ParamCurve};
use crate::trajectory::Snapshot;

/// Header of the diagnostics table, in column order.
pub const DIAGNOSTICS_HEADER: [&str; 13] = [
    "t", "E", "dEdt", "delta", "L", "Kmax", "Mheight", "mheight", "csym", "esym", "fingers",
    "wiener", "lmin",
];

pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_real).unwrap_or_default()
}

pub fn write_snapshot(path: &Path, snapshot: &Snapshot) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    let alpha = geometry::nodes(snapshot.m());
    let res = match snapshot {
        Snapshot::Graph(g) => w.write_record(["alpha", "h"]).and_then(|_| {
            for (a, h) in alpha.iter().zip(g.heights()) {
                w.write_record([fmt_real(*a), fmt_real(*h)])?;
            }
            Ok(())
        }),
        Snapshot::Curve(c) => w.write_record(["alpha", "z1", "z2"]).and_then(|_| {
            for ((a, z1), z2) in alpha.iter().zip(c.z1()).zip(c.z2()) {
                w.write_record([fmt_real(*a), fmt_real(*z1), fmt_real(*z2)])?;
            }
            Ok(())
        }),
    };
    res.map_err(|e| Error::csv(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a snapshot written by [`write_snapshot`]; the `alpha` column must
/// match the uniform grid.
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let headers: Vec<String> = r
        .headers()
        .map_err(|e| Error::csv(path, e))?
        .iter()
        .map(|s| s.trim().to_string())
        .collect();
    let cols = match headers.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["alpha", "h"] => 2,
        ["alpha", "z1", "z2"] => 3,
        other => {
            return Err(Error::Config(format!(
                "{}: unrecognised snapshot header {other:?}",
                path.display()
            )))
        }
    };
    let mut data: Vec<Vec<f64>> = vec![Vec::new(); cols];
    for (line, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        for (c, col) in data.iter_mut().enumerate() {
            let field = rec.get(c).unwrap_or("");
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Config(format!(
                    "{}: row {}: cannot parse {field:?}",
                    path.display(),
                    line + 2
                ))
            })?;
            col.push(v);
        }
    }
    let m = data[0].len();
    geometry::check_grid(m)?;
    let w = geometry::spacing(m);
    for (j, a) in data[0].iter().enumerate() {
        if (a - geometry::node(m, j)).abs() > 1e-9 * w {
            return Err(Error::Config(format!(
                "{}: alpha column is not the uniform grid at row {}",
                path.display(),
                j + 2
            )));
        }
    }
    let mut data = data.into_iter().skip(1);
    let first = data.next().unwrap_or_default();
    Ok(match data.next() {
        None => Snapshot::Graph(GraphInterface::new(first)?),
        Some(z2) => Snapshot::Curve(ParamCurve::new(first, z2)?),
    })
}

/// Appends one row per sample and flushes after each so partial runs leave a
/// readable table.
pub struct DiagnosticsWriter {
    path: PathBuf,
    inner: csv::Writer<File>,
}

impl DiagnosticsWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let mut inner = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        inner
            .write_record(DIAGNOSTICS_HEADER)
            .map_err(|e| Error::csv(path, e))?;
        inner.flush().map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            inner,
        })
    }

    pub fn write(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        let row = [
            fmt_real(r.t),
            fmt_real(r.energy),
            fmt_real(r.energy_rate),
            fmt_opt(r.delta),
            fmt_real(r.perimeter),
            fmt_real(r.max_curvature),
            fmt_real(r.max_height),
            fmt_real(r.min_height),
            fmt_opt(r.central_sym_err),
            fmt_opt(r.even_sym_err),
            r.finger_count.map(|c| c.to_string()).unwrap_or_default(),
            fmt_opt(r.wiener_norm),
            fmt_opt(r.min_slope_x1),
        ];
        self.inner
            .write_record(&row)
            .map_err(|e| Error::csv(&self.path, e))?;
        self.inner.flush().map_err(|e| Error::io(&self.path, e))
    }
}

/// Reads a diagnostics table back (empty cells become `None`).
pub fn read_diagnostics(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let opt = |k: usize| -> Result<Option<f64>> {
            let s = rec.get(k).unwrap_or("").trim();
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("{}: bad value {s:?}", path.display())))
            }
        };
        let req = |k: usize| -> Result<f64> {
            opt(k)?.ok_or_else(|| {
                Error::Config(format!(
                    "{}: missing {} value",
                    path.display(),
                    DIAGNOSTICS_HEADER[k]
                ))
            })
        };
        out.push(DiagnosticsRecord {
            t: req(0)?,
            energy: req(1)?,
            energy_rate: req(2)?,
            delta: opt(3)?,
            perimeter: req(4)?,
            max_curvature: req(5)?,
            max_height: req(6)?,
            min_height: req(7)?,
            central_sym_err: opt(8)?,
            even_sym_err: opt(9)?,
            finger_count: opt(10)?.map(|v| v as usize),
            wiener_norm: opt(11)?,
            min_slope_x1: opt(12)?,
        });
    }
    Ok(out)
}

/// Writes `contents` to `path`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    let mut f = File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(contents.as_bytes())
        .map_err(|e| Error::io(path, e))
}
