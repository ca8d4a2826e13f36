//! Permeability rasters: a `rows cols` header line, then row-major values.

use std::fmt::{self, Write as _};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub rows: usize,
    pub cols: usize,
    /// Row-major, `values[r * cols + c]`.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterSummary {
    pub min: f64,
    pub max: f64,
    /// `log10(max / min)`.
    pub log10_range: f64,
}

impl fmt::Display for RasterSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "min {:.4e} max {:.4e} log10 range {:.4e}",
            self.min, self.max, self.log10_range
        )
    }
}

/// Parse a raster file, checking the header size and positivity.
pub fn load_spe10_slice(path: impl AsRef<Path>) -> Result<Raster> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Raster::parse(&text).map_err(|(data, detail)| {
        let path = path.to_path_buf();
        if data {
            Error::Data { path, detail }
        } else {
            Error::Format { path, detail }
        }
    })
}

impl Raster {
    /// Error flag is `true` for bad values, `false` for bad layout.
    fn parse(text: &str) -> std::result::Result<Self, (bool, String)> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or((false, "empty file".to_string()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| (false, format!("bad header {header:?}"))))
            .collect::<std::result::Result<_, _>>()?;
        let [rows, cols] = dims[..] else {
            return Err((false, format!("header must be `rows cols`, got {header:?}")));
        };
        if rows == 0 || cols == 0 {
            return Err((false, format!("empty raster {rows}x{cols}")));
        }
        let mut values = Vec::with_capacity(rows * cols);
        for tok in lines.flat_map(str::split_whitespace) {
            let v: f64 = tok.parse().map_err(|_| (false, format!("bad value {tok:?}")))?;
            if !(v > 0.0 && v.is_finite()) {
                return Err((true, format!("nonpositive or non-finite value {v} at index {}", values.len())));
            }
            values.push(v);
        }
        if values.len() != rows * cols {
            return Err((false, format!("header says {rows}x{cols}, found {} values", values.len())));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    /// Nearest-neighbour resampling on cell centres.
    pub fn resample(&self, rows: usize, cols: usize) -> Self {
        let pick = |i: usize, n: usize, m: usize| (((i as f64 + 0.5) * m as f64 / n as f64) as usize).min(m - 1);
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let sr = pick(r, rows, self.rows);
            for c in 0..cols {
                values.push(self.get(sr, pick(c, cols, self.cols)));
            }
        }
        Self { rows, cols, values }
    }

    pub fn summary(&self) -> RasterSummary {
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = self.values.iter().copied().fold(0.0, f64::max);
        RasterSummary {
            min,
            max,
            log10_range: (max / min).log10(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for row in self.values.chunks(self.cols) {
            let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(" "));
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}
