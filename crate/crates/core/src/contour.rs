//! Classifier decision surfaces over a regular 2-D grid.

use std::io::Write;

use nalgebra::DMatrix;

use crate::action::TrainedAction;
use crate::dataset::{format_real, DataSet};
use crate::error::{Error, Result};
use crate::Execution;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Points per axis.
    pub steps: usize,
    /// Fraction of each axis' data range added on both sides.
    pub margin: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { steps: 100, margin: 0.1 }
    }
}

#[derive(Clone, Debug)]
pub struct ContourGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `scores[(r, c)]` is the score at `(xs[c], ys[r])`.
    pub scores: DMatrix<f64>,
    /// The classifier-stage input the grid overlays.
    pub points: DataSet,
}

impl ContourGrid {
    /// `x,y,score` rows, y-major.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "y", "score"])?;
        for (r, y) in self.ys.iter().enumerate() {
            for (c, x) in self.xs.iter().enumerate() {
                w.write_record([format_real(*x), format_real(*y), format_real(self.scores[(r, c)])])?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }

    /// `x,y,label` rows for the overlaid points; label is empty when the
    /// data is unlabeled.
    pub fn write_points_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["x", "y", "label"])?;
        for i in 0..self.points.n_observations() {
            let label = self.points.targets().map(|t| t.cell(i)).unwrap_or_default();
            let x = self.points.observations()[(i, 0)];
            let y = self.points.observations()[(i, 1)];
            w.write_record([format_real(x), format_real(y), label])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

fn axis(values: &[f64], steps: usize, margin: f64) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pad = margin * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    (0..steps).map(|i| if i + 1 == steps { hi } else { lo + (hi - lo) * i as f64 / (steps - 1) as f64 }).collect()
}

/// Runs everything before the trained flow's final classifier on `ds`, then
/// evaluates that classifier over a grid spanning the result's bounding box
/// (expanded by `grid.margin`).
pub fn decision_contour(trained: &TrainedAction, ds: &DataSet, grid: GridSpec, exec: Execution) -> Result<ContourGrid> {
    if grid.steps < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 steps per axis, got {}", grid.steps)));
    }
    if !(grid.margin >= 0.0 && grid.margin.is_finite()) {
        return Err(Error::InvalidGrid(format!("margin must be a non-negative number, got {}", grid.margin)));
    }
    let (head, tail) = trained.split_last();
    if !tail.is_classifier() {
        return Err(Error::NoScoreColumn);
    }
    let mut points = ds.clone();
    for stage in head {
        points = stage.run_with(&points, exec)?;
    }
    if points.n_features() != 2 {
        return Err(Error::ContourDimension(points.n_features()));
    }
    if points.n_observations() == 0 {
        return Err(Error::EmptyDataSet);
    }
    let xs = axis(points.column(0), grid.steps, grid.margin);
    let ys = axis(points.column(1), grid.steps, grid.margin);
    let s = grid.steps;
    let coords = DMatrix::from_fn(s * s, 2, |i, j| if j == 0 { xs[i % s] } else { ys[i / s] });
    let out = tail.run_with(&DataSet::new(coords)?, exec)?;
    if out.n_features() != 1 {
        return Err(Error::MultipleScoreColumns(out.n_features()));
    }
    let col = out.column(0);
    let scores = DMatrix::from_fn(s, s, |r, c| col[r * s + c]);
    Ok(ContourGrid { xs, ys, scores, points })
}
