//! Deterministic SVG rendering of traces.
//!
//! The picture shows every actor's route (dashed), its driven trajectory
//! (solid), the disc footprints at the closest-approach frame, and a marker
//! at the collision point when the run ended in a collision. Output is
//! byte-deterministic: fixed element order, numbers formatted to 6
//! significant digits, no timestamps or environment-dependent content.

use crate::error::Error;
use crate::geometry::Vec2;
use crate::scenario::ResolvedScenario;
use crate::sim::{pairwise_min_distance, Outcome, WorldState};
use std::path::Path;

const CANVAS_WIDTH: f64 = 800.0;
const PADDING: f64 = 24.0;
const EGO_COLOR: &str = "#1f77b4";
const OTHER_COLORS: [&str; 5] = ["#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Formats with 6 significant digits, trailing zeros trimmed.
fn fmt(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".to_string();
    }
    let exponent = v.abs().log10().floor() as i32;
    let decimals = (5 - exponent).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

struct Frame2Svg {
    min: Vec2,
    max: Vec2,
    scale: f64,
    height: f64,
}

impl Frame2Svg {
    fn fit(points: impl Iterator<Item = Vec2>) -> Self {
        let mut min = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut max = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for p in points {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        // Margin in world meters so footprints are not clipped.
        let margin = 4.0;
        min = min - Vec2::new(margin, margin);
        max = max + Vec2::new(margin, margin);
        let scale = (CANVAS_WIDTH - 2.0 * PADDING) / (max.x - min.x);
        let height = (max.y - min.y) * scale + 2.0 * PADDING;
        Frame2Svg {
            min,
            max,
            scale,
            height: height.max(120.0),
        }
    }

    /// World meters to SVG pixels; the y axis flips.
    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            PADDING + (p.x - self.min.x) * self.scale,
            PADDING + (self.max.y - p.y) * self.scale,
        )
    }
}

fn polyline_element(out: &mut String, tf: &Frame2Svg, points: &[Vec2], style: &str) {
    out.push_str("  <polyline points=\"");
    for (i, p) in points.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let (x, y) = tf.map(*p);
        out.push_str(&format!("{},{}", fmt(x), fmt(y)));
    }
    out.push_str(&format!("\" {style}/>\n"));
}

fn circle_element(out: &mut String, tf: &Frame2Svg, center: Vec2, radius_m: f64, style: &str) {
    let (cx, cy) = tf.map(center);
    out.push_str(&format!(
        "  <circle cx=\"{}\" cy=\"{}\" r=\"{}\" {style}/>\n",
        fmt(cx),
        fmt(cy),
        fmt(radius_m * tf.scale)
    ));
}

fn actor_color(index: usize) -> &'static str {
    OTHER_COLORS[index % OTHER_COLORS.len()]
}

/// Renders frames to an SVG document string.
pub fn render_svg(frames: &[WorldState], scenario: &ResolvedScenario, outcome: Outcome) -> String {
    let route_points = std::iter::once(&scenario.ego)
        .chain(&scenario.others)
        .flat_map(|a| a.route.points().iter().copied());
    let trajectory_points = frames
        .iter()
        .flat_map(|f| std::iter::once(f.ego.position).chain(f.others.iter().map(|o| o.position)));
    let tf = Frame2Svg::fit(route_points.chain(trajectory_points));

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" \
         viewBox=\"0 0 {} {}\">\n",
        fmt(CANVAS_WIDTH),
        fmt(tf.height),
        fmt(CANVAS_WIDTH),
        fmt(tf.height)
    ));
    svg.push_str(&format!(
        "  <rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n",
        fmt(CANVAS_WIDTH),
        fmt(tf.height)
    ));

    // Routes, dashed: ego first, then others in template order.
    let route_style =
        "fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"1\" stroke-dasharray=\"6 4\"";
    polyline_element(&mut svg, &tf, scenario.ego.route.points(), route_style);
    for actor in &scenario.others {
        polyline_element(&mut svg, &tf, actor.route.points(), route_style);
    }

    // Driven trajectories.
    if !frames.is_empty() {
        let ego_path: Vec<Vec2> = frames.iter().map(|f| f.ego.position).collect();
        polyline_element(
            &mut svg,
            &tf,
            &ego_path,
            &format!("fill=\"none\" stroke=\"{EGO_COLOR}\" stroke-width=\"2\""),
        );
        for i in 0..scenario.others.len() {
            let path: Vec<Vec2> = frames.iter().map(|f| f.others[i].position).collect();
            polyline_element(
                &mut svg,
                &tf,
                &path,
                &format!(
                    "fill=\"none\" stroke=\"{}\" stroke-width=\"2\"",
                    actor_color(i)
                ),
            );
        }
    }

    // Footprints at the closest-approach frame.
    if !scenario.others.is_empty() && !frames.is_empty() {
        let mut min_frame = 0;
        let mut min_d = f64::INFINITY;
        for (k, frame) in frames.iter().enumerate() {
            let d = pairwise_min_distance(frame, scenario).expect("others present");
            if d < min_d {
                min_d = d;
                min_frame = k;
            }
        }
        let frame = &frames[min_frame];
        circle_element(
            &mut svg,
            &tf,
            frame.ego.position,
            scenario.ego.radius,
            &format!("fill=\"{EGO_COLOR}\" fill-opacity=\"0.25\" stroke=\"{EGO_COLOR}\""),
        );
        for (i, other) in frame.others.iter().enumerate() {
            let color = actor_color(i);
            circle_element(
                &mut svg,
                &tf,
                other.position,
                scenario.others[i].radius,
                &format!("fill=\"{color}\" fill-opacity=\"0.25\" stroke=\"{color}\""),
            );
        }
    }

    // Collision marker at the final frame's closest pair.
    if outcome == Outcome::Collision {
        if let Some(frame) = frames.last() {
            if let Some((i, _)) = frame
                .others
                .iter()
                .enumerate()
                .map(|(i, o)| (i, frame.ego.position.dist(o.position)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
            {
                let mid = (frame.ego.position + frame.others[i].position) * 0.5;
                let (x, y) = tf.map(mid);
                let arm = 6.0;
                svg.push_str(&format!(
                    "  <path d=\"M {} {} L {} {} M {} {} L {} {}\" stroke=\"#d62728\" stroke-width=\"3\"/>\n",
                    fmt(x - arm), fmt(y - arm), fmt(x + arm), fmt(y + arm),
                    fmt(x - arm), fmt(y + arm), fmt(x + arm), fmt(y - arm),
                ));
            }
        }
    }

    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"monospace\" font-size=\"12\" fill=\"#333333\">{} / {}</text>\n",
        fmt(PADDING),
        fmt(16.0),
        scenario.template_id,
        outcome
    ));
    svg.push_str("</svg>\n");
    svg
}

/// Renders and writes frames to `path`.
pub fn render_to_file(
    frames: &[WorldState],
    scenario: &ResolvedScenario,
    outcome: Outcome,
    path: &Path,
) -> Result<(), Error> {
    std::fs::write(path, render_svg(frames, scenario, outcome))?;
    Ok(())
}
