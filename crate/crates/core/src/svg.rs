//! Minimal deterministic SVG line/step plots.
//!
//! The CSV curves are the canonical output; these renderings are a
//! convenience, so the implementation stays deliberately small: fixed
//! viewport, fixed palette, value-derived ticks, no styling options.

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 42.0;
const MARGIN_BOTTOM: f64 = 54.0;

const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    /// Point-to-point polyline.
    Line,
    /// Histogram-style steps; points are (edge, density) pairs where
    /// the final point closes the last bin.
    Steps,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub kind: SeriesKind,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str, log_y: bool) -> Self {
        Self {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            log_y,
            series: Vec::new(),
        }
    }

    pub fn line(mut self, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            kind: SeriesKind::Line,
            points,
        });
        self
    }

    pub fn steps(mut self, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            kind: SeriesKind::Steps,
            points,
        });
        self
    }

    pub fn render(&self) -> String {
        let (x_lo, x_hi) = self.x_range();
        let (y_lo, y_hi) = self.y_range();
        let map_x = |x: f64| -> f64 {
            MARGIN_LEFT + (x - x_lo) / (x_hi - x_lo) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
        };
        // y_lo/y_hi live in plot space: log10 units on a log axis.
        let map_y = |y: f64| -> f64 {
            let v = if self.log_y {
                y.max(10f64.powf(y_lo)).log10()
            } else {
                y
            };
            HEIGHT
                - MARGIN_BOTTOM
                - (v - y_lo) / (y_hi - y_lo) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
        };

        let mut out = String::with_capacity(16 * 1024);
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
        ));
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">{}</text>\n",
            WIDTH / 2.0,
            escape(&self.title)
        ));

        // Axes.
        out.push_str(&format!(
            "<line x1=\"{l:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
            l = MARGIN_LEFT,
            r = WIDTH - MARGIN_RIGHT,
            b = HEIGHT - MARGIN_BOTTOM
        ));
        out.push_str(&format!(
            "<line x1=\"{l:.1}\" y1=\"{t:.1}\" x2=\"{l:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
            l = MARGIN_LEFT,
            t = MARGIN_TOP,
            b = HEIGHT - MARGIN_BOTTOM
        ));

        // Ticks and labels.
        for i in 0..=4 {
            let f = f64::from(i) / 4.0;
            let xv = x_lo + f * (x_hi - x_lo);
            let px = map_x(xv);
            out.push_str(&format!(
                "<line x1=\"{px:.1}\" y1=\"{b:.1}\" x2=\"{px:.1}\" y2=\"{b2:.1}\" stroke=\"black\"/>\n",
                b = HEIGHT - MARGIN_BOTTOM,
                b2 = HEIGHT - MARGIN_BOTTOM + 5.0
            ));
            out.push_str(&format!(
                "<text x=\"{px:.1}\" y=\"{ty:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{}</text>\n",
                tick_label(xv),
                ty = HEIGHT - MARGIN_BOTTOM + 18.0
            ));

            let yv = y_lo + f * (y_hi - y_lo);
            let py = HEIGHT
                - MARGIN_BOTTOM
                - f * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);
            out.push_str(&format!(
                "<line x1=\"{l:.1}\" y1=\"{py:.1}\" x2=\"{l2:.1}\" y2=\"{py:.1}\" stroke=\"black\"/>\n",
                l = MARGIN_LEFT - 5.0,
                l2 = MARGIN_LEFT
            ));
            let label = if self.log_y {
                tick_label(10f64.powf(yv))
            } else {
                tick_label(yv)
            };
            out.push_str(&format!(
                "<text x=\"{tx:.1}\" y=\"{py2:.1}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{label}</text>\n",
                tx = MARGIN_LEFT - 8.0,
                py2 = py + 4.0
            ));
        }
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>\n",
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            HEIGHT - 14.0,
            escape(&self.x_label)
        ));
        out.push_str(&format!(
            "<text x=\"18\" y=\"{:.1}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 18 {:.1})\">{}</text>\n",
            (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
            (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0,
            escape(&self.y_label)
        ));

        for (si, series) in self.series.iter().enumerate() {
            let color = PALETTE[si % PALETTE.len()];
            let mut path = String::new();
            match series.kind {
                SeriesKind::Line => {
                    for &(x, y) in &series.points {
                        if path.is_empty() {
                            path.push('M');
                        } else {
                            path.push('L');
                        }
                        path.push_str(&format!("{:.2} {:.2}", map_x(x), map_y(y)));
                    }
                }
                SeriesKind::Steps => {
                    for w in series.points.windows(2) {
                        let (x0, y0) = w[0];
                        let (x1, _) = w[1];
                        if path.is_empty() {
                            path.push_str(&format!("M{:.2} {:.2}", map_x(x0), map_y(y0)));
                        } else {
                            path.push_str(&format!("L{:.2} {:.2}", map_x(x0), map_y(y0)));
                        }
                        path.push_str(&format!("L{:.2} {:.2}", map_x(x1), map_y(y0)));
                    }
                }
            }
            out.push_str(&format!(
                "<path d=\"{path}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.4\"/>\n"
            ));
        }
        out.push_str("</svg>\n");
        out
    }

    fn x_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for s in &self.series {
            for &(x, _) in &s.points {
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
        pad_range(lo, hi)
    }

    /// Plot-space y range; log10 units when `log_y` is set.
    fn y_range(&self) -> (f64, f64) {
        if self.log_y {
            let mut min_pos = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in &self.series {
                for &(_, y) in &s.points {
                    if y > 0.0 {
                        min_pos = min_pos.min(y);
                        hi = hi.max(y);
                    }
                }
            }
            if !min_pos.is_finite() {
                return (0.0, 1.0);
            }
            pad_range(min_pos.log10(), hi.log10())
        } else {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for s in &self.series {
                for &(_, y) in &s.points {
                    lo = lo.min(y);
                    hi = hi.max(y);
                }
            }
            pad_range(lo.min(0.0), hi)
        }
    }
}

fn pad_range(lo: f64, hi: f64) -> (f64, f64) {
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    let pad = 0.03 * (hi - lo);
    (lo - pad, hi + pad)
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 {
        "0".to_string()
    } else if (0.001..10_000.0).contains(&a) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
