//! Minimal self-contained SVG line charts for experiment outputs. No
//! external plotting stack; byte-identical output for identical input.

/// One named polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineChart {
    title: String,
    x_label: String,
    y_label: String,
    log_x: bool,
    series: Vec<Series>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 500.0;
const TOP: f64 = 46.0;
const BOTTOM: f64 = 370.0;
const PALETTE: [&str; 9] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
    "#bcbd22",
];

/// Short deterministic tick label: plain decimal in a comfortable range,
/// scientific outside it.
fn tick_label(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let a = v.abs();
    if !(0.001..100_000.0).contains(&a) {
        return format!("{v:.1e}");
    }
    let mut s = format!("{v:.3}");
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.pop();
    }
    s
}

impl LineChart {
    pub fn new(
        title: impl Into<String>,
        x_label: impl Into<String>,
        y_label: impl Into<String>,
    ) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            series: Vec::new(),
        }
    }

    /// Plot against log10 of x (x values must be positive).
    pub fn with_log_x(mut self) -> Self {
        self.log_x = true;
        self
    }

    pub fn add_series(&mut self, name: impl Into<String>, points: Vec<(f64, f64)>) {
        self.series.push(Series {
            name: name.into(),
            points,
        });
    }

    fn tx(&self, x: f64) -> f64 {
        if self.log_x {
            x.log10()
        } else {
            x
        }
    }

    pub fn render_svg(&self) -> String {
        let mut svg = String::with_capacity(4096);
        svg.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"sans-serif\" font-size=\"12\">\n"
        ));
        svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
            (LEFT + RIGHT) / 2.0,
            escape(&self.title)
        ));

        let pts: Vec<(f64, f64)> = self
            .series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_x || *x > 0.0))
            .map(|&(x, y)| (self.tx(x), y))
            .collect();
        if pts.is_empty() {
            svg.push_str(&format!(
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">no data</text>\n</svg>\n",
                (LEFT + RIGHT) / 2.0,
                (TOP + BOTTOM) / 2.0
            ));
            return svg;
        }

        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in &pts {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 == x1 {
            x0 -= 0.5;
            x1 += 0.5;
        }
        let pad = 0.05 * (y1 - y0);
        if pad > 0.0 {
            y0 -= pad;
            y1 += pad;
        } else {
            y0 -= 0.5;
            y1 += 0.5;
        }
        let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * (RIGHT - LEFT);
        let sy = |y: f64| BOTTOM - (y - y0) / (y1 - y0) * (BOTTOM - TOP);

        // Axes.
        svg.push_str(&format!(
            "<path d=\"M {LEFT:.2} {TOP:.2} L {LEFT:.2} {BOTTOM:.2} L {RIGHT:.2} {BOTTOM:.2}\" \
             fill=\"none\" stroke=\"black\"/>\n"
        ));

        // X ticks: the distinct data abscissae when few, else a linear grid.
        let mut xticks: Vec<f64> = pts.iter().map(|p| p.0).collect();
        xticks.sort_by(f64::total_cmp);
        xticks.dedup();
        if xticks.len() > 8 {
            xticks = (0..=5).map(|i| x0 + (x1 - x0) * i as f64 / 5.0).collect();
        }
        for &x in &xticks {
            let label = if self.log_x {
                tick_label(10f64.powf(x))
            } else {
                tick_label(x)
            };
            svg.push_str(&format!(
                "<line x1=\"{0:.2}\" y1=\"{1:.2}\" x2=\"{0:.2}\" y2=\"{2:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{0:.2}\" y=\"{3:.2}\" text-anchor=\"middle\">{label}</text>\n",
                sx(x),
                BOTTOM,
                BOTTOM + 4.0,
                BOTTOM + 18.0
            ));
        }
        for i in 0..=5 {
            let y = y0 + (y1 - y0) * i as f64 / 5.0;
            svg.push_str(&format!(
                "<line x1=\"{1:.2}\" y1=\"{0:.2}\" x2=\"{2:.2}\" y2=\"{0:.2}\" stroke=\"black\"/>\n\
                 <text x=\"{3:.2}\" y=\"{4:.2}\" text-anchor=\"end\">{label}</text>\n",
                sy(y),
                LEFT - 4.0,
                LEFT,
                LEFT - 8.0,
                sy(y) + 4.0,
                label = tick_label(y)
            ));
        }
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>\n",
            (LEFT + RIGHT) / 2.0,
            HEIGHT - 10.0,
            escape(&self.x_label)
        ));
        svg.push_str(&format!(
            "<text x=\"16\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.2})\">{}</text>\n",
            (TOP + BOTTOM) / 2.0,
            (TOP + BOTTOM) / 2.0,
            escape(&self.y_label)
        ));

        // Series polylines, markers, legend.
        for (i, s) in self.series.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let visible: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!self.log_x || *x > 0.0))
                .map(|&(x, y)| (sx(self.tx(x)), sy(y)))
                .collect();
            if visible.len() > 1 {
                let path: Vec<String> = visible.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                svg.push_str(&format!(
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                    path.join(" ")
                ));
            }
            for (x, y) in &visible {
                svg.push_str(&format!(
                    "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>\n"
                ));
            }
            let ly = TOP + 10.0 + 18.0 * i as f64;
            svg.push_str(&format!(
                "<line x1=\"{0:.2}\" y1=\"{ly:.2}\" x2=\"{1:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" stroke-width=\"2\"/>\n\
                 <text x=\"{2:.2}\" y=\"{3:.2}\">{name}</text>\n",
                RIGHT + 10.0,
                RIGHT + 30.0,
                RIGHT + 36.0,
                ly + 4.0,
                name = escape(&s.name)
            ));
        }
        svg.push_str("</svg>\n");
        svg
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_deterministic_chart() {
        let mut chart = LineChart::new("TV vs N", "N", "total variation").with_log_x();
        chart.add_series("tv", vec![(200.0, 0.4), (400.0, 0.3), (800.0, 0.2), (1600.0, 0.1)]);
        let svg = chart.render_svg();
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("TV vs N"));
        assert!(svg.contains("<polyline"));
        assert_eq!(svg.matches("<circle").count(), 4);
        // Log-x ticks land on the original N values.
        for n in ["200", "400", "800", "1600"] {
            assert!(svg.contains(&format!(">{n}</text>")), "missing tick {n}");
        }
        assert_eq!(svg, chart.render_svg());
    }

    #[test]
    fn handles_empty_and_flat_data() {
        let chart = LineChart::new("empty", "x", "y");
        assert!(chart.render_svg().contains("no data"));

        let mut flat = LineChart::new("flat", "x", "y");
        flat.add_series("s", vec![(1.0, 0.25), (2.0, 0.25)]);
        let svg = flat.render_svg();
        assert!(svg.contains("<polyline"));
        assert!(svg.contains("0.25"));
    }

    #[test]
    fn multiple_series_get_distinct_colors_and_legend() {
        let mut chart = LineChart::new("masses", "N", "mass");
        for (i, name) in ["well 1", "well 2", "residual"].iter().enumerate() {
            chart.add_series(*name, vec![(100.0, 0.1 * i as f64), (200.0, 0.2)]);
        }
        let svg = chart.render_svg();
        for name in ["well 1", "well 2", "residual"] {
            assert!(svg.contains(name));
        }
        assert!(svg.contains(PALETTE[0]));
        assert!(svg.contains(PALETTE[1]));
        assert!(svg.contains(PALETTE[2]));
    }

    #[test]
    fn tick_labels_are_compact() {
        assert_eq!(tick_label(0.0), "0");
        assert_eq!(tick_label(200.0), "200");
        assert_eq!(tick_label(0.25), "0.25");
        assert_eq!(tick_label(-0.5), "-0.5");
        assert_eq!(tick_label(1e-6), "1.0e-6");
        assert_eq!(tick_label(3.2e7), "3.2e7");
    }

    #[test]
    fn titles_are_escaped() {
        let chart = LineChart::new("a < b & c", "x", "y");
        assert!(chart.render_svg().contains("a &lt; b &amp; c"));
    }
}
