use std::fmt::Write;

use super::BeeswarmRow;

const WIDTH: f64 = 640.0;
const LANE: f64 = 60.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 20.0;
const DOT: f64 = 3.0;

fn color(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let r = (30.0 + 225.0 * t).round() as u8;
    let b = (255.0 - 225.0 * t).round() as u8;
    format!("#{r:02x}30{b:02x}")
}

/// Static beeswarm: one lane per confounder in the row order given, dots
/// stacked within small x-bins, colored from low (blue) to high (red) raw value.
pub fn write_beeswarm_svg(rows: &[BeeswarmRow], title: &str) -> String {
    let mut lanes: Vec<(&str, Vec<&BeeswarmRow>)> = Vec::new();
    for r in rows {
        match lanes.iter_mut().find(|(n, _)| *n == r.confounder) {
            Some((_, v)) => v.push(r),
            None => lanes.push((&r.confounder, vec![r])),
        }
    }
    let extent = rows.iter().map(|r| r.shap_value.abs()).fold(0.0, f64::max).max(1e-12);
    let height = 40.0 + LANE * lanes.len() as f64 + 30.0;
    let plot = WIDTH - LEFT - RIGHT;
    let x_of = |v: f64| LEFT + plot * (v + extent) / (2.0 * extent);
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{height}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(s, "<text x=\"{}\" y=\"20\" text-anchor=\"middle\">{}</text>", WIDTH / 2.0, escape(title));
    let zero = x_of(0.0);
    let _ = writeln!(
        s,
        "<line x1=\"{zero:.2}\" y1=\"30\" x2=\"{zero:.2}\" y2=\"{:.2}\" stroke=\"#999\"/>",
        height - 30.0
    );
    for (k, (name, dots)) in lanes.iter().enumerate() {
        let mid = 40.0 + LANE * (k as f64 + 0.5);
        let _ = writeln!(s, "<text x=\"{}\" y=\"{mid:.2}\" text-anchor=\"end\">{}</text>", LEFT - 8.0, escape(name));
        let (lo, hi) = dots
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), d| (a.min(d.raw_value), b.max(d.raw_value)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        let mut bins: Vec<(i64, usize)> = Vec::new();
        for d in dots {
            let x = x_of(d.shap_value);
            let bin = (x / (2.0 * DOT)).floor() as i64;
            let count = match bins.iter_mut().find(|(b, _)| *b == bin) {
                Some((_, c)) => {
                    *c += 1;
                    *c
                }
                None => {
                    bins.push((bin, 1));
                    1
                }
            };
            let step = ((count / 2) as f64 * 2.0 * DOT).min(LANE / 2.0 - DOT);
            let y = if count % 2 == 0 { mid - step } else { mid + step };
            let _ = writeln!(
                s,
                "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{DOT}\" fill=\"{}\"/>",
                color((d.raw_value - lo) / span)
            );
        }
    }
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{:.2}\" text-anchor=\"middle\">SHAP value (effect units)</text>",
        LEFT + plot / 2.0,
        height - 10.0
    );
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
