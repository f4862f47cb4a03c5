//! Self-contained SVG charts: scatter with a 45° line, line charts and
//! horizontal bars. Output is a pure function of the inputs.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 360.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 36.0;
const BOTTOM: f64 = 48.0;

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Linear map from a data range onto a pixel range.
#[derive(Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Axis {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Axis { lo, hi, px_lo, px_hi }
    }

    fn at(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    fn ticks(&self) -> [f64; 5] {
        std::array::from_fn(|k| self.lo + (self.hi - self.lo) * k as f64 / 4.0)
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn frame(out: &mut String, title: &str, x_label: &str, y_label: &str, x: &Axis, y: &Axis) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>
<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>
"#,
        W / 2.0,
        esc(title),
        H - BOTTOM,
        W - RIGHT,
        H - BOTTOM,
        H - BOTTOM,
    );
    for t in x.ticks() {
        let px = x.at(t);
        let _ = writeln!(
            out,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            H - BOTTOM + 14.0,
            tick_label(t)
        );
    }
    for t in y.ticks() {
        let py = y.at(t);
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 4.0,
            py + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        H - 10.0,
        esc(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        (TOP + H - BOTTOM) / 2.0,
        (TOP + H - BOTTOM) / 2.0,
        esc(y_label)
    );
}

fn tick_label(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.trunc() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

/// Predicted (x) against observed (y) with the line y = x.
pub fn scatter(title: &str, predicted: &[f64], observed: &[f64]) -> String {
    let (lo, hi) = range(predicted.iter().chain(observed).copied());
    let (lo, hi) = (lo.min(0.0), hi);
    let x = Axis::new(lo, hi, LEFT, W - RIGHT);
    let y = Axis::new(lo, hi, H - BOTTOM, TOP);
    let mut out = String::new();
    frame(&mut out, title, "predicted crashes", "observed crashes", &x, &y);
    let _ = writeln!(
        out,
        r##"<line class="ref" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#c0392b" stroke-dasharray="4 3"/>"##,
        x.at(x.lo),
        y.at(y.lo),
        x.at(x.hi),
        y.at(y.hi)
    );
    for (p, o) in predicted.iter().zip(observed) {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="#2c3e50" fill-opacity="0.6"/>"##,
            x.at(*p),
            y.at(*o)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// One or more labelled polylines over a shared x axis.
pub fn lines(title: &str, x_label: &str, y_label: &str, series: &[(String, Vec<(f64, f64)>)]) -> String {
    const COLOURS: [&str; 6] = ["#2c3e50", "#c0392b", "#27ae60", "#8e44ad", "#d35400", "#16a085"];
    let (xl, xh) = range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.0)));
    let (yl, yh) = range(series.iter().flat_map(|(_, p)| p.iter().map(|q| q.1)));
    let (xl, xh) = if xl.is_finite() { (xl, xh) } else { (0.0, 1.0) };
    let (yl, yh) = if yl.is_finite() { (yl, yh) } else { (0.0, 1.0) };
    let x = Axis::new(xl, xh, LEFT, W - RIGHT);
    let y = Axis::new(yl, yh, H - BOTTOM, TOP);
    let mut out = String::new();
    frame(&mut out, title, x_label, y_label, &x, &y);
    for (k, (name, pts)) in series.iter().enumerate() {
        let colour = COLOURS[k % COLOURS.len()];
        let path: Vec<String> = pts.iter().map(|(a, b)| format!("{:.2},{:.2}", x.at(*a), y.at(*b))).collect();
        let _ = writeln!(
            out,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"/>"#,
            path.join(" ")
        );
        for (a, b) in pts {
            let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{colour}"/>"#, x.at(*a), y.at(*b));
        }
        if series.len() > 1 {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" fill="{colour}">{}</text>"#,
                W - RIGHT - 100.0,
                TOP + 12.0 * (k as f64 + 1.0),
                esc(name)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Horizontal bars, one per label, longest first as given.
pub fn bars(title: &str, value_label: &str, items: &[(String, f64)]) -> String {
    let hi = items.iter().map(|(_, v)| *v).fold(0.0f64, f64::max);
    let left = 130.0;
    let x = Axis::new(0.0, if hi > 0.0 { hi } else { 1.0 }, left, W - RIGHT);
    let band = (H - TOP - BOTTOM) / items.len().max(1) as f64;
    let mut out = String::new();
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">
<rect width="{W}" height="{H}" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>
"#,
        W / 2.0,
        esc(title)
    );
    for (k, (name, v)) in items.iter().enumerate() {
        let top = TOP + band * k as f64;
        let _ = writeln!(
            out,
            r##"<rect x="{left}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#2c3e50"/>"##,
            top + band * 0.15,
            (x.at(v.max(0.0)) - left).max(0.0),
            band * 0.7
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            left - 6.0,
            top + band * 0.5 + 4.0,
            esc(name)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}">{v:.2}</text>"#,
            x.at(v.max(0.0)) + 4.0,
            top + band * 0.5 + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (left + W - RIGHT) / 2.0,
        H - 10.0,
        esc(value_label)
    );
    out.push_str("</svg>\n");
    out
}
