//! Optional SVG figures. CSV files stay the durable output.

use std::path::Path;

use anyhow::{anyhow, Result};
use plotters::prelude::*;
use ra2vipas::bo::EpisodeTrace;
use ra2vipas::mc::DrSeries;
use ra2vipas::pod::{PodFitPoint, PodTrainingSample};

const SIZE: (u32, u32) = (800, 500);
const PALETTE: [RGBColor; 3] = [RGBColor(31, 119, 180), RGBColor(214, 39, 40), RGBColor(44, 160, 44)];

fn err<E: std::fmt::Display>(e: E) -> anyhow::Error {
    anyhow!("plotting failed: {e}")
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() && hi > lo {
        (lo, hi)
    } else {
        (lo.min(0.0), lo.max(0.0) + 1.0)
    }
}

/// Training samples, true POD and the fitted mean with a ±2σ band.
pub fn pod_fit(path: &Path, samples: &[PodTrainingSample<f64>], curve: &[PodFitPoint<f64>], r2: f64) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let (x0, x1) = span(samples.iter().map(|s| s.rssi_iso).chain(curve.iter().map(|p| p.rssi)));
    let mut chart = ChartBuilder::on(&root)
        .caption(format!("POD vs RSSI (R² = {r2:.3})"), ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(x0..x1, -0.05f64..1.05f64)
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc("RSSI [dBm]")
        .y_desc("probability of detection")
        .draw()
        .map_err(err)?;
    chart
        .draw_series(
            samples
                .iter()
                .map(|s| Circle::new((s.rssi_iso, s.empirical_pod), 2, BLACK.mix(0.25).filled())),
        )
        .map_err(err)?
        .label("empirical labels")
        .legend(|(x, y)| Circle::new((x + 10, y), 3, BLACK.mix(0.4).filled()));
    chart
        .draw_series(LineSeries::new(curve.iter().map(|p| (p.rssi, p.pod_true)), PALETTE[2].stroke_width(2)))
        .map_err(err)?
        .label("true")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], PALETTE[2]));
    chart
        .draw_series(LineSeries::new(curve.iter().map(|p| (p.rssi, p.pred_mean)), PALETTE[0].stroke_width(2)))
        .map_err(err)?
        .label("GP mean")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], PALETTE[0]));
    for sign in [-2.0, 2.0] {
        chart
            .draw_series(LineSeries::new(
                curve.iter().map(|p| (p.rssi, p.pred_mean + sign * p.pred_std)),
                PALETTE[0].mix(0.4),
            ))
            .map_err(err)?;
    }
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(err)?;
    root.present().map_err(err)
}

/// Discovery Rate per variant over time.
pub fn dr_series(path: &Path, series: &DrSeries) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let t_max = series.times.last().copied().unwrap_or(1.0);
    let mut chart = ChartBuilder::on(&root)
        .caption("Discovery Rate", ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0f64..t_max, 0f64..1.02f64)
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc("time [s]")
        .y_desc("DR")
        .draw()
        .map_err(err)?;
    for (i, (v, dr)) in series.dr.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        chart
            .draw_series(LineSeries::new(
                series.times.iter().copied().zip(dr.iter().copied()),
                color.stroke_width(2),
            ))
            .map_err(err)?
            .label(v.name())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color));
    }
    chart
        .configure_series_labels()
        .position(SeriesLabelPosition::LowerRight)
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(err)?;
    root.present().map_err(err)
}

/// Pan angle and bearing estimate of one episode, with the true bearing.
pub fn episode(path: &Path, trace: &EpisodeTrace, tx_bearing: f64, title: &str) -> Result<()> {
    let root = SVGBackend::new(path, SIZE).into_drawing_area();
    root.fill(&WHITE).map_err(err)?;
    let t_max = trace.rows.last().map_or(1.0, |r| r.t_seconds);
    let pi = std::f64::consts::PI;
    let mut chart = ChartBuilder::on(&root)
        .caption(title, ("sans-serif", 22))
        .margin(12)
        .x_label_area_size(40)
        .y_label_area_size(50)
        .build_cartesian_2d(0f64..t_max, -pi..pi)
        .map_err(err)?;
    chart
        .configure_mesh()
        .x_desc("time [s]")
        .y_desc("angle [rad]")
        .draw()
        .map_err(err)?;
    chart
        .draw_series(trace.rows.iter().map(|r| Circle::new((r.t_seconds, r.pan_rad), 3, PALETTE[0].filled())))
        .map_err(err)?
        .label("pan")
        .legend(|(x, y)| Circle::new((x + 10, y), 3, PALETTE[0].filled()));
    chart
        .draw_series(LineSeries::new(
            trace.rows.iter().map(|r| (r.t_seconds, r.gamma_hat_rad)),
            PALETTE[1].stroke_width(2),
        ))
        .map_err(err)?
        .label("bearing estimate")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], PALETTE[1]));
    chart
        .draw_series(LineSeries::new(vec![(0.0, tx_bearing), (t_max, tx_bearing)], PALETTE[2].stroke_width(1)))
        .map_err(err)?
        .label("transmitter bearing")
        .legend(|(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], PALETTE[2]));
    chart
        .configure_series_labels()
        .background_style(WHITE.mix(0.8))
        .border_style(BLACK)
        .draw()
        .map_err(err)?;
    root.present().map_err(err)
}
