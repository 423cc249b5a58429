//! Dual-axis line plot of daily tweet volume against daily cases, with the
//! pandemic periods shaded behind the lines.

use std::fmt::Write;

use crate::epi::{PandemicPeriods, Period};
use crate::numfmt::fmt_f64;
use crate::series::DailySeries;

pub const WIDTH: f64 = 960.0;
pub const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 70.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const VOLUME_COLOR: &str = "#1f77b4";
const CASES_COLOR: &str = "#d62728";

fn band_color(p: Period) -> &'static str {
    match p {
        Period::PrePeak => "#fff2cc",
        Period::FreeContagious => "#f8cecc",
        Period::Measures => "#dae8fc",
        Period::Decay => "#d5e8d4",
    }
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// A "nice" axis maximum: 1, 2 or 5 times a power of ten, at least `v`.
fn nice_max(v: f64) -> f64 {
    if v <= 0.0 {
        return 1.0;
    }
    let base = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * base)
        .find(|m| *m >= v)
        .unwrap_or(10.0 * base)
}

fn polyline(
    series: &DailySeries,
    x: impl Fn(usize) -> f64,
    y: impl Fn(f64) -> f64,
    color: &str,
) -> String {
    let pts: Vec<String> = series
        .values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{},{}", px(x(i)), px(y(*v))))
        .collect();
    format!(
        "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
        pts.join(" ")
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// `volume` and `cases` must share the same start date and length.
pub fn volume_vs_cases(
    title: &str,
    volume: &DailySeries,
    cases: &DailySeries,
    periods: Option<&PandemicPeriods>,
) -> String {
    let n = volume.len().max(1);
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let step = if n > 1 { plot_w / (n - 1) as f64 } else { 0.0 };
    let x = |i: usize| LEFT + step * i as f64;
    let vmax = nice_max(volume.values.iter().cloned().fold(0.0, f64::max));
    let cmax = nice_max(cases.values.iter().cloned().fold(0.0, f64::max));
    let yv = |v: f64| TOP + plot_h * (1.0 - v / vmax);
    let yc = |v: f64| TOP + plot_h * (1.0 - v / cmax);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">",
        W = WIDTH,
        H = HEIGHT
    );
    let _ = writeln!(
        s,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" text-anchor=\"middle\">{}</text>",
        px(WIDTH / 2.0),
        escape(title)
    );

    if let Some(p) = periods {
        for period in Period::ALL {
            let iv = p.interval(period);
            let (Some(a), Some(b)) = (
                volume.index_of(iv.start),
                volume.index_of(iv.end.pred_opt().unwrap_or(iv.end)),
            ) else {
                continue;
            };
            if iv.is_empty() {
                continue;
            }
            let x0 = x(a) - step / 2.0;
            let x1 = x(b) + step / 2.0;
            let _ = writeln!(
                s,
                "<rect class=\"period {}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>",
                period.name(),
                px(x0.max(LEFT)),
                px(TOP),
                px(x1.min(WIDTH - RIGHT) - x0.max(LEFT)),
                px(plot_h),
                band_color(period)
            );
        }
    }

    // axes
    let _ = writeln!(
        s,
        "<g stroke=\"black\" stroke-width=\"1\"><line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\"/><line x1=\"{r}\" y1=\"{t}\" x2=\"{r}\" y2=\"{b}\"/><line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\"/></g>",
        l = px(LEFT),
        r = px(WIDTH - RIGHT),
        t = px(TOP),
        b = px(TOP + plot_h)
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let y = px(TOP + plot_h * (1.0 - f));
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\" fill=\"{VOLUME_COLOR}\">{}</text>",
            px(LEFT - 6.0),
            fmt_tick(vmax * f)
        );
        let _ = writeln!(
            s,
            "<text x=\"{}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{CASES_COLOR}\">{}</text>",
            px(WIDTH - RIGHT + 6.0),
            fmt_tick(cmax * f)
        );
    }
    if !volume.is_empty() {
        let ticks = 6.min(n);
        for k in 0..ticks {
            let i = if ticks > 1 {
                k * (n - 1) / (ticks - 1)
            } else {
                0
            };
            let _ = writeln!(
                s,
                "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{}</text>",
                px(x(i)),
                px(TOP + plot_h + 18.0),
                volume.date(i)
            );
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"16\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{VOLUME_COLOR}\" transform=\"rotate(-90 16 {})\" text-anchor=\"middle\">tweets per day</text>",
        px(TOP + plot_h / 2.0),
        px(TOP + plot_h / 2.0)
    );
    let _ = writeln!(
        s,
        "<text x=\"{x}\" y=\"{y}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{CASES_COLOR}\" transform=\"rotate(90 {x} {y})\" text-anchor=\"middle\">new cases per day</text>",
        x = px(WIDTH - 16.0),
        y = px(TOP + plot_h / 2.0)
    );

    s.push_str(&polyline(volume, x, yv, VOLUME_COLOR));
    s.push_str(&polyline(cases, x, yc, CASES_COLOR));
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        fmt_f64(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    #[test]
    fn canvas_lines_and_bands() {
        let d = NaiveDate::from_ymd_opt(2020, 3, 1).unwrap();
        let v = DailySeries::new(d, vec![1.0, 4.0, 9.0, 3.0]);
        let c = DailySeries::new(d, vec![10.0, 30.0, 20.0, 0.0]);
        let svg = volume_vs_cases("GR <test>", &v, &c, None);
        assert!(svg
            .starts_with("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"960\" height=\"480\""));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("GR &lt;test&gt;"));
        assert!(!svg.contains("class=\"period"));
        assert!(svg.ends_with("</svg>\n"));
        assert_eq!(nice_max(9.0), 10.0);
        assert_eq!(nice_max(30.0), 50.0);
        assert_eq!(nice_max(0.0), 1.0);
    }
}
