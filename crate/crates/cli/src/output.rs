use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;

use crate::args::Format;
use crate::error::CliError;

/// Round-trip decimal form (17 significant digits).
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone)]
pub struct OutputSink {
    pub dir: PathBuf,
    pub format: Format,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl OutputSink {
    pub fn new(dir: PathBuf, format: Format) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        Ok(Self { dir, format })
    }

    fn path(&self, stem: &str, ext: &str) -> PathBuf {
        self.dir.join(format!("{stem}.{ext}"))
    }

    /// Pretty JSON with the struct's field order.
    pub fn write_json<T: Serialize>(&self, stem: &str, value: &T) -> Result<PathBuf, CliError> {
        let path = self.path(stem, "json");
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(path)
    }

    fn write_table(
        &self,
        stem: &str,
        header: &[&str],
        rows: impl Iterator<Item = Vec<String>>,
    ) -> Result<PathBuf, CliError> {
        let path = self.path(stem, "csv");
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(&row)?;
        }
        w.flush().map_err(io_err(&path))?;
        Ok(path)
    }

    /// Closed polylines: CSV `curve,re,im` or JSON `{"curves": [[[re, im], ...], ...]}`.
    pub fn write_curves(&self, stem: &str, curves: &[Vec<Complex64>]) -> Result<PathBuf, CliError> {
        match self.format {
            Format::Csv => self.write_table(
                stem,
                &["curve", "re", "im"],
                curves.iter().enumerate().flat_map(|(k, curve)| {
                    curve
                        .iter()
                        .map(move |z| vec![k.to_string(), fmt_f64(z.re), fmt_f64(z.im)])
                }),
            ),
            Format::Json => {
                #[derive(Serialize)]
                struct Curves<'a> {
                    curves: &'a [Vec<Complex64>],
                }
                self.write_json(stem, &Curves { curves })
            }
        }
    }

    /// Point cloud: CSV `re,im` or JSON `{"points": [[re, im], ...]}`.
    pub fn write_points(&self, stem: &str, points: &[Complex64]) -> Result<PathBuf, CliError> {
        match self.format {
            Format::Csv => self.write_table(
                stem,
                &["re", "im"],
                points.iter().map(|z| vec![fmt_f64(z.re), fmt_f64(z.im)]),
            ),
            Format::Json => {
                #[derive(Serialize)]
                struct Points<'a> {
                    points: &'a [Complex64],
                }
                self.write_json(stem, &Points { points })
            }
        }
    }

    /// Sampled density: CSV `x,density` or JSON `{"x": [...], "density": [...]}`.
    pub fn write_density(&self, stem: &str, samples: &[(f64, f64)]) -> Result<PathBuf, CliError> {
        match self.format {
            Format::Csv => self.write_table(
                stem,
                &["x", "density"],
                samples.iter().map(|(x, d)| vec![fmt_f64(*x), fmt_f64(*d)]),
            ),
            Format::Json => {
                #[derive(Serialize)]
                struct Density {
                    x: Vec<f64>,
                    density: Vec<f64>,
                }
                self.write_json(
                    stem,
                    &Density {
                        x: samples.iter().map(|s| s.0).collect(),
                        density: samples.iter().map(|s| s.1).collect(),
                    },
                )
            }
        }
    }
}
