use std::fmt::Write;

use crowdnav::crowd::PEDESTRIAN_RADIUS;
use crowdnav::env::{TraceRecord, TraceSummary};

/// Ego radius used for drawing; traces do not carry it.
const EGO_RADIUS: f64 = 0.3;

pub fn render_text(records: &[TraceRecord], summary: &TraceSummary) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "goal ({:.3}, {:.3})  obstacles {}  pedestrians {}",
        summary.goal[0],
        summary.goal[1],
        summary.obstacles.len(),
        records.first().map_or(0, |r| r.peds.len())
    );
    for r in records {
        let _ = write!(
            s,
            "t={:>3} ego ({:7.3}, {:7.3}, {:6.3}) act ({:.3}, {:6.3}) r {:8.4}",
            r.t, r.ego[0], r.ego[1], r.ego[2], r.action[0], r.action[1], r.reward
        );
        for p in &r.peds {
            let _ = write!(s, " | ({:6.2}, {:6.2})", p[0], p[1]);
        }
        if let Some(t) = r.terminal {
            let _ = write!(s, "  <{t}>");
        }
        s.push('\n');
    }
    let _ = writeln!(
        s,
        "{} after {} steps, {:.1} s, min separation {:.3} m",
        summary.terminal, summary.steps, summary.nav_time_s, summary.min_separation
    );
    s
}

fn polyline(points: impl Iterator<Item = (f64, f64)>, color: &str, width: f64) -> String {
    let pts: Vec<String> = points.map(|(x, y)| format!("{x:.3},{:.3}", -y)).collect();
    format!(
        "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"{width}\"/>\n",
        pts.join(" ")
    )
}

fn circle(x: f64, y: f64, r: f64, fill: &str) -> String {
    format!("<circle cx=\"{x:.3}\" cy=\"{:.3}\" r=\"{r:.3}\" fill=\"{fill}\"/>\n", -y)
}

/// Trajectories of the ego and every pedestrian over the static scene, with
/// final positions drawn as discs. World y points up.
pub fn render_svg(records: &[TraceRecord], summary: &TraceSummary) -> String {
    let mut lo = (summary.goal[0], summary.goal[1]);
    let mut hi = lo;
    let mut grow = |x: f64, y: f64, r: f64| {
        lo = (lo.0.min(x - r), lo.1.min(y - r));
        hi = (hi.0.max(x + r), hi.1.max(y + r));
    };
    for o in &summary.obstacles {
        grow(o[0], o[1], o[2]);
    }
    for r in records {
        grow(r.ego[0], r.ego[1], EGO_RADIUS);
        for p in &r.peds {
            grow(p[0], p[1], PEDESTRIAN_RADIUS);
        }
    }
    let pad = 0.5;
    let (w, h) = (hi.0 - lo.0 + 2.0 * pad, hi.1 - lo.1 + 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"{:.3} {:.3} {w:.3} {h:.3}\" width=\"{:.0}\" height=\"{:.0}\">",
        lo.0 - pad,
        -(hi.1 + pad),
        w * 60.0,
        h * 60.0
    );
    let _ = writeln!(
        s,
        "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"{w:.3}\" height=\"{h:.3}\" fill=\"white\"/>",
        lo.0 - pad,
        -(hi.1 + pad)
    );
    for o in &summary.obstacles {
        s += &circle(o[0], o[1], o[2], "#555555");
    }
    s += &circle(summary.goal[0], summary.goal[1], 0.12, "#2a9d3a");

    let n_peds = records.first().map_or(0, |r| r.peds.len());
    for k in 0..n_peds {
        s += &polyline(records.iter().map(|r| (r.peds[k][0], r.peds[k][1])), "#e07b39", 0.03);
        if let Some(last) = records.last() {
            s += &circle(last.peds[k][0], last.peds[k][1], PEDESTRIAN_RADIUS, "#e07b3988");
        }
    }
    s += &polyline(records.iter().map(|r| (r.ego[0], r.ego[1])), "#1f5fbf", 0.05);
    if let Some(last) = records.last() {
        s += &circle(last.ego[0], last.ego[1], EGO_RADIUS, "#1f5fbf88");
    }
    let _ = writeln!(
        s,
        "<text x=\"{:.3}\" y=\"{:.3}\" font-size=\"0.3\">{} after {} steps</text>",
        lo.0 - pad + 0.1,
        -(hi.1 + pad) + 0.35,
        summary.terminal,
        summary.steps
    );
    s.push_str("</svg>\n");
    s
}
