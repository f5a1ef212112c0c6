//! Static SVG line plots of report series.

use plotters::coord::ranged1d::{AsRangedCoord, ValueFormatter};
use plotters::prelude::*;

use crate::error::{CliError, Result};
use crate::report::{Line, Series};

const SIZE: (u32, u32) = (800, 560);

/// Renders one series to SVG text; the inner `Err` is the skip note when fewer than two points are plottable.
///
/// Points that a log axis cannot show (non-positive or non-finite) are dropped.
pub fn render(series: &Series) -> Result<std::result::Result<String, String>> {
    let keep = |&(x, y): &(f64, f64)| x.is_finite() && y.is_finite() && (!series.log_x || x > 0.0) && (!series.log_y || y > 0.0);
    let lines: Vec<Line> = series
        .lines
        .iter()
        .map(|l| Line { label: l.label.clone(), points: l.points.iter().copied().filter(keep).collect() })
        .filter(|l| !l.points.is_empty())
        .collect();
    let total: usize = lines.iter().map(|l| l.points.len()).sum();
    if total < 2 {
        return Ok(Err(format!("{}: fewer than two plottable points, no SVG written", series.name)));
    }
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in lines.iter().flat_map(|l| l.points.iter()) {
        (x0, x1, y0, y1) = (x0.min(x), x1.max(x), y0.min(y), y1.max(y));
    }
    let (x0, x1) = pad(x0, x1, series.log_x);
    let (y0, y1) = pad(y0, y1, series.log_y);
    let svg = match (series.log_x, series.log_y) {
        (false, false) => draw(series, &lines, x0..x1, y0..y1),
        (true, false) => draw(series, &lines, (x0..x1).log_scale(), y0..y1),
        (false, true) => draw(series, &lines, x0..x1, (y0..y1).log_scale()),
        (true, true) => draw(series, &lines, (x0..x1).log_scale(), (y0..y1).log_scale()),
    }?;
    Ok(Ok(svg))
}

/// Widens a range by 5% (multiplicatively on log axes) so markers are not clipped.
fn pad(lo: f64, hi: f64, log: bool) -> (f64, f64) {
    if log {
        let f = if hi > lo { (hi / lo).powf(0.05) } else { 2.0 };
        (lo / f, hi * f)
    } else {
        let d = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
        (lo - d, hi + d)
    }
}

fn draw<X, Y>(series: &Series, lines: &[Line], x: X, y: Y) -> Result<String>
where
    X: AsRangedCoord<Value = f64>,
    Y: AsRangedCoord<Value = f64>,
    X::CoordDescType: ValueFormatter<f64>,
    Y::CoordDescType: ValueFormatter<f64>,
{
    let fail = |e: &dyn std::fmt::Display| CliError::Plot(format!("{}: {e}", series.name));
    let mut out = String::new();
    {
        let root = SVGBackend::with_string(&mut out, SIZE).into_drawing_area();
        root.fill(&WHITE).map_err(|e| fail(&e))?;
        let mut chart = ChartBuilder::on(&root)
            .caption(&series.title, ("sans-serif", 20))
            .margin(12)
            .x_label_area_size(44)
            .y_label_area_size(72)
            .build_cartesian_2d(x, y)
            .map_err(|e| fail(&e))?;
        chart
            .configure_mesh()
            .x_desc(series.x_label.as_str())
            .y_desc(series.y_label.as_str())
            .draw()
            .map_err(|e| fail(&e))?;
        for (i, line) in lines.iter().enumerate() {
            let color = Palette99::pick(i).to_rgba();
            chart
                .draw_series(LineSeries::new(line.points.iter().copied(), color.stroke_width(2)))
                .map_err(|e| fail(&e))?
                .label(line.label.as_str())
                .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], color.stroke_width(2)));
            chart
                .draw_series(line.points.iter().map(|&p| Circle::new(p, 4, color.filled())))
                .map_err(|e| fail(&e))?;
        }
        if lines.len() > 1 {
            chart
                .configure_series_labels()
                .background_style(WHITE.mix(0.85))
                .border_style(BLACK)
                .draw()
                .map_err(|e| fail(&e))?;
        }
        root.present().map_err(|e| fail(&e))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sweep(points: Vec<(f64, f64)>, log_x: bool) -> Series {
        Series {
            name: "ratio_vs_a".into(),
            title: "ratio".into(),
            x_label: "a".into(),
            y_label: "ln(lhs/rhs)".into(),
            log_x,
            log_y: false,
            lines: vec![Line { label: "bumps-0".into(), points }],
        }
    }

    #[test]
    fn four_point_sweep_has_four_markers_and_labels() {
        let s = sweep(vec![(10.0, -3.0), (100.0, -5.0), (1000.0, -9.0), (1e4, -20.0)], true);
        let svg = render(&s).unwrap().unwrap();
        assert_eq!(svg.matches("<circle").count(), 4);
        for label in ["a", "ln(lhs/rhs)", "ratio"] {
            assert!(svg.contains(&format!(">\n{label}\n</text>")), "missing {label}");
        }
        assert_eq!(svg, render(&s).unwrap().unwrap());
    }

    #[test]
    fn empty_series_is_skipped_with_a_reason() {
        let note = render(&sweep(vec![], false)).unwrap().unwrap_err();
        assert!(note.contains("ratio_vs_a"));
        // one positive-x point survives on a log axis
        assert!(render(&sweep(vec![(0.0, 1.0), (1.0, 2.0)], true)).unwrap().is_err());
    }
}
