//! Mean-with-error-bar line plots, one series per method.

use std::path::Path;

use plotters::prelude::*;

use crate::config::Family;
use crate::table::{ResultTable, SeedLabel};
use crate::BenchError;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub method: String,
    pub xs: Vec<f64>,
    pub means: Vec<f64>,
    /// Zero where the group had a single seed.
    pub stderrs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl PlotData {
    /// Collects the mean and stderr rows of `metric` from a finalized table.
    /// NaN means are dropped.
    pub fn from_table(table: &ResultTable, family: Family, metric: &str) -> Self {
        let mut series: Vec<Series> = Vec::new();
        for r in table.rows.iter().filter(|r| r.metric == metric && r.seed == SeedLabel::Mean) {
            if r.value.is_nan() {
                continue;
            }
            let idx = match series.iter().position(|s| s.method == r.method) {
                Some(i) => i,
                None => {
                    series.push(Series {
                        method: r.method.clone(),
                        xs: Vec::new(),
                        means: Vec::new(),
                        stderrs: Vec::new(),
                    });
                    series.len() - 1
                }
            };
            let se = table.aggregate(r.x, &r.method, metric, SeedLabel::Stderr).unwrap_or(0.0);
            let s = &mut series[idx];
            s.xs.push(r.x);
            s.means.push(r.value);
            s.stderrs.push(if se.is_finite() { se } else { 0.0 });
        }
        for s in &mut series {
            let mut idx: Vec<usize> = (0..s.xs.len()).collect();
            idx.sort_by(|&a, &b| s.xs[a].total_cmp(&s.xs[b]));
            s.xs = idx.iter().map(|&i| s.xs[i]).collect();
            s.means = idx.iter().map(|&i| s.means[i]).collect();
            s.stderrs = idx.iter().map(|&i| s.stderrs[i]).collect();
        }
        series.sort_by(|a, b| a.method.cmp(&b.method));
        let y_label = match metric {
            "csec" => "secrecy rate (bit/s/Hz)".to_string(),
            "wall_time_s" => "wall time (s)".to_string(),
            m => m.replace('_', " "),
        };
        Self {
            title: family.name().to_string(),
            x_label: family.x_label().to_string(),
            y_label,
            series,
        }
    }

    fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        let mut x = (f64::INFINITY, f64::NEG_INFINITY);
        let mut y = (f64::INFINITY, f64::NEG_INFINITY);
        for s in &self.series {
            for i in 0..s.xs.len() {
                x = (x.0.min(s.xs[i]), x.1.max(s.xs[i]));
                y = (y.0.min(s.means[i] - s.stderrs[i]), y.1.max(s.means[i] + s.stderrs[i]));
            }
        }
        let widen = |(lo, hi): (f64, f64)| {
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        (widen(x), widen(y))
    }
}

pub fn render_svg(data: &PlotData, path: &Path) -> Result<(), BenchError> {
    let perr = |e: &dyn std::fmt::Display| BenchError::Plot(e.to_string());
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| perr(&e))?;
    let ((x0, x1), (y0, y1)) = data.bounds();
    let mut chart = ChartBuilder::on(&root)
        .caption(&data.title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x0..x1, y0..y1)
        .map_err(|e| perr(&e))?;
    chart
        .configure_mesh()
        .x_desc(data.x_label.as_str())
        .y_desc(data.y_label.as_str())
        .draw()
        .map_err(|e| perr(&e))?;
    for (k, s) in data.series.iter().enumerate() {
        let color = Palette99::pick(k).to_rgba();
        let pts: Vec<(f64, f64)> = s.xs.iter().copied().zip(s.means.iter().copied()).collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))
            .map_err(|e| perr(&e))?
            .label(s.method.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2)));
        chart
            .draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))
            .map_err(|e| perr(&e))?;
        chart
            .draw_series(s.xs.iter().zip(s.means.iter().zip(&s.stderrs)).filter(|(_, (_, e))| **e > 0.0).map(
                |(&x, (&m, &e))| PathElement::new(vec![(x, m - e), (x, m + e)], color.stroke_width(1)),
            ))
            .map_err(|e| perr(&e))?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(|e| perr(&e))?;
    root.present().map_err(|e| perr(&e))?;
    Ok(())
}
