//! SVG line charts and the gain-plane feasibility map.

use std::ops::Range;
use std::path::Path;

use anyhow::{anyhow, Result};
use pathdob_core::dstability::GainGrid;
use pathdob_core::SimTrace;
use plotters::coord::ranged1d::{AsRangedCoord, ValueFormatter};
use plotters::coord::Shift;
use plotters::prelude::*;

const SIZE: (u32, u32) = (900, 560);
/// Polylines longer than this are thinned to per-bucket extremes.
const MAX_POINTS: usize = 2000;

pub struct Series<'a> {
    pub label: &'a str,
    pub x: &'a [f64],
    pub y: &'a [f64],
}

pub struct Axes<'a> {
    pub title: &'a str,
    pub x_desc: &'a str,
    pub y_desc: &'a str,
    pub log_x: bool,
}

fn plot_err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow!("plotting: {e}")
}

fn finite_points<'a>(s: &'a Series<'a>) -> impl Iterator<Item = (f64, f64)> + 'a {
    s.x.iter()
        .zip(s.y)
        .map(|(x, y)| (*x, *y))
        .filter(|(x, y)| x.is_finite() && y.is_finite())
}

fn thinned(points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    if points.len() <= MAX_POINTS {
        return points;
    }
    let bucket = points.len().div_ceil(MAX_POINTS / 2);
    let mut out = Vec::with_capacity(MAX_POINTS + 1);
    for chunk in points.chunks(bucket) {
        let lo = chunk
            .iter()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty chunk");
        let hi = chunk
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty chunk");
        if lo.0 <= hi.0 {
            out.extend([*lo, *hi]);
        } else {
            out.extend([*hi, *lo]);
        }
    }
    if out.last() != points.last() {
        out.push(points[points.len() - 1]);
    }
    out
}

fn extent(values: impl Iterator<Item = f64>) -> Option<Range<f64>> {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    (lo <= hi).then_some(lo..hi)
}

fn padded(r: Range<f64>) -> Range<f64> {
    let span = r.end - r.start;
    let pad = if span > 0.0 {
        0.05 * span
    } else {
        0.5 * r.start.abs().max(1.0)
    };
    r.start - pad..r.end + pad
}

fn draw_lines<DB, X>(
    area: &DrawingArea<DB, Shift>,
    axes: &Axes,
    series: &[Series],
    x: X,
    y: Range<f64>,
) -> Result<()>
where
    DB: DrawingBackend,
    X: AsRangedCoord<Value = f64>,
    X::CoordDescType: ValueFormatter<f64>,
{
    let mut chart = ChartBuilder::on(area)
        .caption(axes.title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(42)
        .y_label_area_size(64)
        .build_cartesian_2d(x, y)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc(axes.x_desc)
        .y_desc(axes.y_desc)
        .draw()
        .map_err(plot_err)?;
    for (i, s) in series.iter().enumerate() {
        let color = Palette99::pick(i).to_rgba();
        chart
            .draw_series(LineSeries::new(
                thinned(finite_points(s).collect()),
                color.stroke_width(2),
            ))
            .map_err(plot_err)?
            .label(s.label)
            .legend(move |(x, y)| {
                PathElement::new(vec![(x, y), (x + 18, y)], color.stroke_width(2))
            });
    }
    if series.len() > 1 {
        chart
            .configure_series_labels()
            .background_style(WHITE.mix(0.85))
            .border_style(BLACK)
            .draw()
            .map_err(plot_err)?;
    }
    Ok(())
}

fn draw_panel<DB: DrawingBackend>(
    area: &DrawingArea<DB, Shift>,
    axes: &Axes,
    series: &[Series],
) -> Result<()> {
    let xr = extent(series.iter().flat_map(|s| finite_points(s).map(|p| p.0)))
        .ok_or_else(|| anyhow!("nothing to plot in `{}`", axes.title))?;
    let yr = padded(
        extent(series.iter().flat_map(|s| finite_points(s).map(|p| p.1)))
            .expect("x extent implies y extent"),
    );
    if axes.log_x {
        if xr.start <= 0.0 {
            return Err(anyhow!("log axis needs positive abscissae"));
        }
        draw_lines(area, axes, series, (xr.start..xr.end).log_scale(), yr)
    } else {
        let xr = if xr.end > xr.start { xr } else { padded(xr) };
        draw_lines(area, axes, series, xr, yr)
    }
}

pub fn line_chart(path: &Path, axes: &Axes, series: &[Series]) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    draw_panel(&root, axes, series)?;
    root.present().map_err(plot_err)
}

/// Lateral deviation over steering angle, steering shown in degrees.
pub fn trace_chart(path: &Path, trace: &SimTrace, title: &str) -> Result<()> {
    let steer_deg: Vec<f64> = trace.delta_f.iter().map(|v| v.to_degrees()).collect();
    let root = SVGBackend::new(path, (SIZE.0, 2 * SIZE.1)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let panels = root.split_evenly((2, 1));
    let y_axes = Axes {
        title,
        x_desc: "time [s]",
        y_desc: "lateral deviation y [m]",
        log_x: false,
    };
    draw_panel(
        &panels[0],
        &y_axes,
        &[Series {
            label: "y",
            x: &trace.t,
            y: &trace.y,
        }],
    )?;
    let s_axes = Axes {
        title: "steering",
        x_desc: "time [s]",
        y_desc: "steering angle [deg]",
        log_x: false,
    };
    draw_panel(
        &panels[1],
        &s_axes,
        &[Series {
            label: "delta_f",
            x: &trace.t,
            y: &steer_deg,
        }],
    )?;
    root.present().map_err(plot_err)
}

/// Feasible cells of `grid` as filled runs along `K_d`, with `selected` marked.
pub fn feasibility_chart(path: &Path, grid: &GainGrid, selected: (f64, f64)) -> Result<()> {
    let step_p = grid.kp.get(1).map_or(1.0, |v| v - grid.kp[0]);
    let step_d = grid.kd.get(1).map_or(1.0, |v| v - grid.kd[0]);
    let xr = grid.kp[0] - step_p / 2.0..grid.kp[grid.kp.len() - 1] + step_p / 2.0;
    let yr = grid.kd[0] - step_d / 2.0..grid.kd[grid.kd.len() - 1] + step_d / 2.0;
    let root = SVGBackend::new(path, (720, 680)).into_drawing_area();
    root.fill(&WHITE).map_err(plot_err)?;
    let mut chart = ChartBuilder::on(&root)
        .caption("D-stable gain region", ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(42)
        .y_label_area_size(56)
        .build_cartesian_2d(xr, yr)
        .map_err(plot_err)?;
    chart
        .configure_mesh()
        .x_desc("K_p")
        .y_desc("K_d")
        .draw()
        .map_err(plot_err)?;
    let fill = RGBColor(120, 170, 220).filled();
    let mut runs = Vec::new();
    for (i, kp) in grid.kp.iter().enumerate() {
        let mut start = None;
        for j in 0..=grid.kd.len() {
            let feasible = j < grid.kd.len() && grid.cell(i, j).feasible;
            match (feasible, start) {
                (true, None) => start = Some(j),
                (false, Some(j0)) => {
                    let (lo, hi) = (grid.kd[j0] - step_d / 2.0, grid.kd[j - 1] + step_d / 2.0);
                    runs.push(Rectangle::new(
                        [(kp - step_p / 2.0, lo), (kp + step_p / 2.0, hi)],
                        fill,
                    ));
                    start = None;
                }
                _ => {}
            }
        }
    }
    chart.draw_series(runs).map_err(plot_err)?;
    chart
        .draw_series(std::iter::once(Circle::new(selected, 5, RED.filled())))
        .map_err(plot_err)?;
    root.present().map_err(plot_err)
}
