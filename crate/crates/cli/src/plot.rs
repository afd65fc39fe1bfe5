use std::path::Path;

use anyhow::{anyhow, Result};
use plotters::coord::Shift;
use plotters::prelude::*;

const SIZE: (u32, u32) = (720, 480);
const PALETTE: [RGBColor; 3] = [RGBColor(70, 110, 170), RGBColor(210, 120, 50), RGBColor(90, 160, 90)];

/// Bars for each group, one per series, with ± error whiskers.
pub struct BarPanel {
    pub title: String,
    pub groups: Vec<String>,
    pub series: Vec<String>,
    /// `values[series][group]` = (error rate, spread).
    pub values: Vec<Vec<(f64, f64)>>,
    /// Horizontal reference mark and its legend label.
    pub reference: Option<(f64, String)>,
}

/// A named line: points as (x index, rate, spread).
pub type Line = (String, Vec<(usize, f64, f64)>);

/// Lines over categorical x positions.
pub struct LinePanel {
    pub title: String,
    pub x_label: String,
    pub ticks: Vec<String>,
    pub lines: Vec<Line>,
    pub reference: Option<(f64, String)>,
}

fn err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow!("plotting: {e}")
}

fn y_max(values: impl Iterator<Item = f64>) -> f64 {
    (values.fold(0.0f64, f64::max) * 1.15).clamp(0.05, 1.0)
}

fn tick_label(ticks: &[String], x: f64) -> String {
    let i = x.round();
    if (x - i).abs() < 1e-6 && i >= 0.0 {
        ticks.get(i as usize).cloned().unwrap_or_default()
    } else {
        String::new()
    }
}

fn draw_bars(area: &DrawingArea<SVGBackend<'_>, Shift>, panel: &BarPanel) -> Result<()> {
    let top = y_max(
        panel
            .values
            .iter()
            .flatten()
            .map(|(v, e)| v + e)
            .chain(panel.reference.iter().map(|r| r.0)),
    );
    let n = panel.groups.len();
    let mut chart = ChartBuilder::on(area)
        .caption(&panel.title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(36)
        .y_label_area_size(50)
        .build_cartesian_2d(-0.5f64..n as f64 - 0.5, 0.0f64..top)
        .map_err(err)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(n)
        .x_label_formatter(&|x| tick_label(&panel.groups, *x))
        .y_desc("error rate")
        .draw()
        .map_err(err)?;
    let k = panel.series.len().max(1) as f64;
    let width = 0.8 / k;
    for (s, name) in panel.series.iter().enumerate() {
        let color = PALETTE[s % PALETTE.len()];
        let offset = -0.4 + width * s as f64;
        let bars = panel.values[s].iter().enumerate().map(|(g, &(v, _))| {
            let x0 = g as f64 + offset;
            Rectangle::new([(x0, 0.0), (x0 + width * 0.92, v)], color.filled())
        });
        chart
            .draw_series(bars)
            .map_err(err)?
            .label(name.as_str())
            .legend(move |(x, y)| Rectangle::new([(x, y - 5), (x + 10, y + 5)], color.filled()));
        let whiskers = panel.values[s].iter().enumerate().map(|(g, &(v, e))| {
            let x = g as f64 + offset + width * 0.46;
            PathElement::new(vec![(x, (v - e).max(0.0)), (x, v + e)], BLACK)
        });
        chart.draw_series(whiskers).map_err(err)?;
    }
    if let Some((y, label)) = &panel.reference {
        let y = *y;
        chart
            .draw_series(std::iter::once(PathElement::new(
                vec![(-0.5, y), (n as f64 - 0.5, y)],
                RED,
            )))
            .map_err(err)?
            .label(label.as_str())
            .legend(|(x, yy)| PathElement::new(vec![(x, yy), (x + 12, yy)], RED));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperLeft)
        .draw()
        .map_err(err)?;
    Ok(())
}

/// Writes one or more bar panels stacked vertically into an SVG file.
pub fn bar_chart(path: &Path, panels: &[BarPanel]) -> Result<()> {
    let height = SIZE.1 * panels.len().max(1) as u32;
    let root = SVGBackend::new(path, (SIZE.0, height)).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    for (area, panel) in root.split_evenly((panels.len().max(1), 1)).iter().zip(panels) {
        draw_bars(area, panel)?;
    }
    root.present().map_err(err)?;
    Ok(())
}

pub fn line_chart(path: &Path, panel: &LinePanel) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let top = y_max(
        panel
            .lines
            .iter()
            .flat_map(|(_, pts)| pts.iter().map(|p| p.1 + p.2))
            .chain(panel.reference.iter().map(|r| r.0)),
    );
    let n = panel.ticks.len();
    let mut chart = ChartBuilder::on(&root)
        .caption(&panel.title, ("sans-serif", 20))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(-0.3f64..n as f64 - 0.7, 0.0f64..top)
        .map_err(err)?;
    chart
        .configure_mesh()
        .disable_x_mesh()
        .x_labels(n)
        .x_label_formatter(&|x| tick_label(&panel.ticks, *x))
        .x_desc(panel.x_label.as_str())
        .y_desc("error rate")
        .draw()
        .map_err(err)?;
    for (i, (name, points)) in panel.lines.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let xy: Vec<(f64, f64)> = points.iter().map(|&(x, y, _)| (x as f64, y)).collect();
        chart
            .draw_series(LineSeries::new(xy.clone(), color.stroke_width(2)))
            .map_err(err)?
            .label(name.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 12, y)], color.stroke_width(2)));
        chart
            .draw_series(xy.iter().map(|&p| Circle::new(p, 4, color.filled())))
            .map_err(err)?;
        chart
            .draw_series(
                points
                    .iter()
                    .map(|&(x, y, e)| PathElement::new(vec![(x as f64, (y - e).max(0.0)), (x as f64, y + e)], BLACK)),
            )
            .map_err(err)?;
    }
    if let Some((y, label)) = &panel.reference {
        let y = *y;
        chart
            .draw_series(std::iter::once(PathElement::new(
                vec![(-0.3, y), (n as f64 - 0.7, y)],
                RED,
            )))
            .map_err(err)?
            .label(label.as_str())
            .legend(|(x, yy)| PathElement::new(vec![(x, yy), (x + 12, yy)], RED));
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.85))
        .border_style(BLACK)
        .position(SeriesLabelPosition::UpperRight)
        .draw()
        .map_err(err)?;
    root.present().map_err(err)?;
    Ok(())
}
