//! Static SVG phase portraits.

use std::fmt::Write;

use pbm_core::Vec2;

const SIZE: f64 = 600.0;
const PAD: f64 = 30.0;

pub struct Portrait {
    pub title: String,
    /// Half width of the square window centred at the origin.
    pub extent: f64,
    pub trajectories: Vec<Vec<Vec2>>,
    pub points: Vec<(String, Vec2)>,
    /// Dashed reference circles (twist radii).
    pub circles: Vec<f64>,
}

impl Portrait {
    fn map(&self, p: Vec2) -> (f64, f64) {
        let s = (SIZE - 2.0 * PAD) / (2.0 * self.extent);
        (PAD + (p.x + self.extent) * s, PAD + (self.extent - p.y) * s)
    }

    /// Splits a trajectory where it leaves the window.
    fn visible_runs<'a>(&self, path: &'a [Vec2]) -> Vec<&'a [Vec2]> {
        let inside = |p: &Vec2| p.x.abs() <= self.extent && p.y.abs() <= self.extent;
        path.split(|p| !inside(p)).filter(|run| run.len() >= 2).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
        );
        let _ = writeln!(s, "<title>{}</title>", escape(&self.title));
        let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
        let (x0, y0) = self.map(Vec2::new(-self.extent, 0.0));
        let (x1, _) = self.map(Vec2::new(self.extent, 0.0));
        let (cx, cy) = self.map(Vec2::ZERO);
        let (_, top) = self.map(Vec2::new(0.0, self.extent));
        let (_, bottom) = self.map(Vec2::new(0.0, -self.extent));
        let _ = writeln!(s, r##"<g stroke="#999" stroke-width="0.8">"##);
        let _ = writeln!(s, r#"<line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/>"#);
        let _ = writeln!(s, r#"<line x1="{cx:.2}" y1="{top:.2}" x2="{cx:.2}" y2="{bottom:.2}"/>"#);
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" font-size="13" font-family="serif">x</text>"##,
            x1 - 10.0,
            y0 - 6.0
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.2}" font-size="13" font-family="serif">y</text>"##,
            cx + 6.0,
            top + 12.0
        );

        let scale = (SIZE - 2.0 * PAD) / (2.0 * self.extent);
        for r in &self.circles {
            let _ = writeln!(
                s,
                r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="{:.2}" fill="none" stroke="#777" stroke-dasharray="4 3"/>"##,
                r * scale
            );
        }

        let _ = writeln!(s, r##"<g fill="none" stroke="#1f4e99" stroke-width="0.9">"##);
        for path in &self.trajectories {
            for run in self.visible_runs(path) {
                s.push_str("<polyline points=\"");
                for (k, p) in run.iter().enumerate() {
                    let (u, v) = self.map(*p);
                    if k > 0 {
                        s.push(' ');
                    }
                    let _ = write!(s, "{u:.2},{v:.2}");
                }
                s.push_str("\"/>\n");
            }
        }
        let _ = writeln!(s, "</g>");

        for (label, p) in &self.points {
            let (u, v) = self.map(*p);
            let _ = writeln!(
                s,
                r##"<circle cx="{u:.2}" cy="{v:.2}" r="4.5" fill="#c0392b" stroke="black" stroke-width="0.8"/>"##
            );
            let _ = writeln!(
                s,
                r##"<text x="{:.2}" y="{:.2}" font-size="15" font-family="serif" font-style="italic">{}</text>"##,
                u + 6.0,
                v - 6.0,
                escape(label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
