//! Minimal deterministic SVG scatter/line rendering: fixed 800x600 canvas,
//! labeled axes, no external assets, bit-identical output for identical data.

/// A single-curve figure in data coordinates.
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN_LEFT: f64 = 78.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 46.0;
const MARGIN_BOTTOM: f64 = 58.0;

/// Expands a degenerate or too-tight data range by 5% padding.
fn padded(min: f64, max: f64) -> (f64, f64) {
    let span = max - min;
    if span > 0.0 {
        (min - 0.05 * span, max + 0.05 * span)
    } else {
        let pad = min.abs().max(1e-9) * 0.1 + 1e-12;
        (min - pad, max + pad)
    }
}

pub fn render_svg(fig: &Figure) -> String {
    let (xmin, xmax) = padded(
        fig.points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min),
        fig.points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max),
    );
    let (ymin, ymax) = padded(
        fig.points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
        fig.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let px = |x: f64| MARGIN_LEFT + (x - xmin) / (xmax - xmin) * plot_w;
    let py = |y: f64| MARGIN_TOP + (ymax - y) / (ymax - ymin) * plot_h;

    let mut s = String::with_capacity(64 * 1024);
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH:.0}\" height=\"{HEIGHT:.0}\" \
         viewBox=\"0 0 {WIDTH:.0} {HEIGHT:.0}\">\n"
    ));
    s.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"17\">{}</text>\n",
        WIDTH / 2.0,
        escape_text(&fig.title)
    ));

    // gridlines and tick labels, five per axis
    for i in 0..5 {
        let f = i as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let yv = ymin + f * (ymax - ymin);
        let (gx, gy) = (px(xv), py(yv));
        s.push_str(&format!(
            "<line x1=\"{gx:.2}\" y1=\"{MARGIN_TOP:.1}\" x2=\"{gx:.2}\" y2=\"{:.1}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_TOP + plot_h
        ));
        s.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT:.1}\" y1=\"{gy:.2}\" x2=\"{:.1}\" y2=\"{gy:.2}\" \
             stroke=\"#dddddd\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        s.push_str(&format!(
            "<text x=\"{gx:.2}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            MARGIN_TOP + plot_h + 18.0,
            tick_label(xv)
        ));
        s.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"11\">{}</text>\n",
            MARGIN_LEFT - 6.0,
            gy + 4.0,
            tick_label(yv)
        ));
    }

    // frame
    s.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT:.1}\" y=\"{MARGIN_TOP:.1}\" width=\"{plot_w:.1}\" \
         height=\"{plot_h:.1}\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n"
    ));

    // the curve
    s.push_str("<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.2\" points=\"");
    for (i, (x, y)) in fig.points.iter().enumerate() {
        if i > 0 {
            s.push(' ');
        }
        s.push_str(&format!("{:.2},{:.2}", px(*x), py(*y)));
    }
    s.push_str("\"/>\n");

    // axis labels
    s.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0,
        escape_text(&fig.x_label)
    ));
    s.push_str(&format!(
        "<text x=\"20\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\" transform=\"rotate(-90 20 {:.1})\">{}</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0,
        escape_text(&fig.y_label)
    ));
    s.push_str("</svg>\n");
    s
}

/// Compact tick formatting: plain decimals near unity, scientific otherwise.
fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".into()
    } else if (1e-3..1e4).contains(&a) {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.2e}")
    }
}

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
