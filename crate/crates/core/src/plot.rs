//! Static SVG rendering of a frame: the pooled point cloud, the traced
//! guiding lines, the fitted boundary cubics and the computed driving
//! trajectory, drawn with lateral distance on the horizontal axis and
//! longitudinal distance on the vertical axis.

use crate::aldm::Role;
use crate::scenario::FrameArtifacts;
use std::fmt::Write;

/// Plot window and canvas size. Default window: lateral -15..11 m,
/// longitudinal 0..200 m.
#[derive(Debug, Clone)]
pub struct PlotConfig {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    pub width: f64,
    pub height: f64,
}

impl Default for PlotConfig {
    fn default() -> Self {
        Self {
            lat_min: -15.0,
            lat_max: 11.0,
            lon_min: 0.0,
            lon_max: 200.0,
            width: 520.0,
            height: 760.0,
        }
    }
}

const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 14.0;
const MARGIN_TOP: f64 = 14.0;
const MARGIN_BOTTOM: f64 = 46.0;

struct Canvas<'a> {
    cfg: &'a PlotConfig,
    svg: String,
}

impl<'a> Canvas<'a> {
    fn map(&self, lat: f64, lon: f64) -> (f64, f64) {
        let cfg = self.cfg;
        let px = MARGIN_LEFT
            + (lat - cfg.lat_min) / (cfg.lat_max - cfg.lat_min)
                * (cfg.width - MARGIN_LEFT - MARGIN_RIGHT);
        let py = cfg.height
            - MARGIN_BOTTOM
            - (lon - cfg.lon_min) / (cfg.lon_max - cfg.lon_min)
                * (cfg.height - MARGIN_TOP - MARGIN_BOTTOM);
        (px, py)
    }

    fn in_window(&self, lat: f64, lon: f64) -> bool {
        lat >= self.cfg.lat_min
            && lat <= self.cfg.lat_max
            && lon >= self.cfg.lon_min
            && lon <= self.cfg.lon_max
    }

    fn cross(&mut self, lat: f64, lon: f64, size: f64, color: &str) {
        if !self.in_window(lat, lon) {
            return;
        }
        let (x, y) = self.map(lat, lon);
        let _ = write!(
            self.svg,
            "<path d=\"M{:.2} {:.2}L{:.2} {:.2}M{:.2} {:.2}L{:.2} {:.2}\" stroke=\"{}\" stroke-width=\"1\"/>",
            x - size, y, x + size, y, x, y - size, x, y + size, color
        );
    }

    fn circle(&mut self, lat: f64, lon: f64, r: f64, color: &str) {
        if !self.in_window(lat, lon) {
            return;
        }
        let (x, y) = self.map(lat, lon);
        let _ = write!(
            self.svg,
            "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{r:.1}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1\"/>"
        );
    }

    /// Polyline through (lat, lon) samples; runs leaving the window break
    /// the path instead of clipping against the frame.
    fn path(&mut self, pts: impl Iterator<Item = (f64, f64)>, color: &str, dash: Option<&str>) {
        let mut d = String::new();
        let mut pen_down = false;
        for (lat, lon) in pts {
            if !self.in_window(lat, lon) {
                pen_down = false;
                continue;
            }
            let (x, y) = self.map(lat, lon);
            let _ = write!(d, "{}{:.2} {:.2}", if pen_down { "L" } else { "M" }, x, y);
            pen_down = true;
        }
        if d.is_empty() {
            return;
        }
        let dash_attr = dash
            .map(|p| format!(" stroke-dasharray=\"{p}\""))
            .unwrap_or_default();
        let _ = write!(
            self.svg,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"{dash_attr}/>"
        );
    }
}

fn role_color(role: Role) -> &'static str {
    match role {
        Role::EgoLeft => "#1f77b4",
        Role::EgoRight => "#ff7f0e",
        Role::AdjacentLeft => "#9467bd",
        Role::AdjacentRight => "#bcbd22",
    }
}

/// Renders one frame to an SVG document. Pure function of the artifacts:
/// identical input produces byte-identical output.
pub fn render_frame_svg(art: &FrameArtifacts, cfg: &PlotConfig) -> String {
    let mut canvas = Canvas {
        cfg,
        svg: String::with_capacity(64 * 1024),
    };
    let _ = write!(
        canvas.svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">",
        cfg.width, cfg.height, cfg.width, cfg.height
    );
    let _ = write!(
        canvas.svg,
        "<rect width=\"{:.0}\" height=\"{:.0}\" fill=\"white\"/>",
        cfg.width, cfg.height
    );

    draw_axes(&mut canvas);

    // pooled point cloud (side tags ignored, one color)
    for obj in art.cloud.objects() {
        for p in &obj.points {
            canvas.cross(p.y, p.x, 2.0, "#4444cc");
        }
    }

    // transmitted guiding-line points
    if let Some(tx) = &art.lanes_tx {
        for line in tx.lines() {
            let color = role_color(line.role);
            for p in &line.points {
                match line.role {
                    Role::EgoLeft | Role::EgoRight => canvas.circle(p.y, p.x, 3.0, color),
                    _ => canvas.cross(p.y, p.x, 3.0, color),
                }
            }
        }
    }

    // fitted cubics and the desired driving trajectory
    if let Some(traj) = &art.trajectory {
        let (lo, hi) = traj.x_range;
        let samples = |f: &dyn Fn(f64) -> f64| {
            let n = 100;
            (0..=n)
                .map(|i| {
                    let x = lo + (hi - lo) * i as f64 / n as f64;
                    (f(x), x)
                })
                .collect::<Vec<_>>()
        };
        let left = traj.left;
        let right = traj.right;
        canvas.path(
            samples(&|x| left.eval(x)).into_iter(),
            role_color(Role::EgoLeft),
            Some("6 3"),
        );
        canvas.path(
            samples(&|x| right.eval(x)).into_iter(),
            role_color(Role::EgoRight),
            Some("6 3"),
        );
        canvas.path(
            samples(&|x| traj.center_y(x)).into_iter(),
            "#2ca02c",
            Some("2 4"),
        );
    }

    let _ = write!(canvas.svg, "</svg>");
    canvas.svg
}

fn draw_axes(canvas: &mut Canvas<'_>) {
    let cfg = canvas.cfg;
    let (x0, y0) = canvas.map(cfg.lat_min, cfg.lon_min);
    let (x1, y1) = canvas.map(cfg.lat_max, cfg.lon_max);
    let frame = format!(
        "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"none\" stroke=\"black\"/>",
        x0.min(x1),
        y0.min(y1),
        (x1 - x0).abs(),
        (y0 - y1).abs()
    );
    canvas.svg.push_str(&frame);

    // lateral ticks every 5 m, longitudinal every 25 m
    let mut lat = (cfg.lat_min / 5.0).ceil() * 5.0;
    while lat <= cfg.lat_max + 1e-9 {
        let (px, py) = canvas.map(lat, cfg.lon_min);
        let _ = write!(
            canvas.svg,
            "<line x1=\"{px:.2}\" y1=\"{py:.2}\" x2=\"{px:.2}\" y2=\"{:.2}\" stroke=\"black\"/>\
             <text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">{lat:.0}</text>",
            py + 5.0,
            py + 18.0
        );
        let (gx0, gy0) = canvas.map(lat, cfg.lon_min);
        let (gx1, gy1) = canvas.map(lat, cfg.lon_max);
        let _ = write!(
            canvas.svg,
            "<line x1=\"{gx0:.2}\" y1=\"{gy0:.2}\" x2=\"{gx1:.2}\" y2=\"{gy1:.2}\" stroke=\"#dddddd\"/>"
        );
        lat += 5.0;
    }
    let mut lon = (cfg.lon_min / 25.0).ceil() * 25.0;
    while lon <= cfg.lon_max + 1e-9 {
        let (px, py) = canvas.map(cfg.lat_min, lon);
        let _ = write!(
            canvas.svg,
            "<line x1=\"{:.2}\" y1=\"{py:.2}\" x2=\"{px:.2}\" y2=\"{py:.2}\" stroke=\"black\"/>\
             <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\">{lon:.0}</text>",
            px - 5.0,
            px - 8.0,
            py + 4.0
        );
        let (gx0, gy0) = canvas.map(cfg.lat_min, lon);
        let (gx1, gy1) = canvas.map(cfg.lat_max, lon);
        let _ = write!(
            canvas.svg,
            "<line x1=\"{gx0:.2}\" y1=\"{gy0:.2}\" x2=\"{gx1:.2}\" y2=\"{gy1:.2}\" stroke=\"#dddddd\"/>"
        );
        lon += 25.0;
    }

    let (cx, _) = canvas.map(0.5 * (cfg.lat_min + cfg.lat_max), cfg.lon_min);
    let _ = write!(
        canvas.svg,
        "<text x=\"{cx:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">lateral distance in m</text>",
        cfg.height - 10.0
    );
    let (_, cy) = canvas.map(cfg.lat_min, 0.5 * (cfg.lon_min + cfg.lon_max));
    let _ = write!(
        canvas.svg,
        "<text x=\"14\" y=\"{cy:.2}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {cy:.2})\">longitudinal distance in m</text>"
    );
}
