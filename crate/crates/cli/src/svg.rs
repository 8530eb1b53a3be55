//! Static SVG plot of a sweep.

use std::fmt::Write;

use entex_core::sweep::SweepRow;
use entex_core::LogBase;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 60.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;

/// (legend label, stroke colour, extra stroke attributes, value)
type Series = (&'static str, &'static str, &'static str, fn(&SweepRow) -> f64);

fn polyline(points: impl Iterator<Item = (f64, f64)>) -> String {
    let mut s = String::new();
    for (i, (x, y)) in points.enumerate() {
        if i > 0 {
            s.push(' ');
        }
        let _ = write!(s, "{x:.2},{y:.2}");
    }
    s
}

/// Concurrence (solid), mutual information (dashed) and A;BE concurrence
/// (dotted) against Ωt.
pub fn render(rows: &[SweepRow], omega_t_max: f64, base: LogBase) -> String {
    let y_max = rows.iter().flat_map(|r| [r.c_numeric, r.mi, r.c_abe]).fold(1.0f64, f64::max) * 1.05;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + plot_w * x / omega_t_max;
    let sy = |y: f64| TOP + plot_h * (1.0 - y / y_max);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ =
        writeln!(svg, r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#444"/>"##);
    let x_ticks = (omega_t_max.ceil() as usize).max(1);
    let x_step = if x_ticks > 16 { (x_ticks as f64 / 8.0).ceil() as usize } else { 1 };
    for k in (0..=x_ticks).step_by(x_step) {
        let x = k as f64;
        if x > omega_t_max {
            break;
        }
        let px = sx(x);
        let _ = writeln!(
            svg,
            r##"<line x1="{px:.2}" y1="{0:.2}" x2="{px:.2}" y2="{1:.2}" stroke="#444"/><text x="{px:.2}" y="{2:.2}" text-anchor="middle">{k}</text>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0,
            TOP + plot_h + 18.0
        );
    }
    let mut y = 0.0;
    while y <= y_max + 1e-12 {
        let py = sy(y);
        let _ = writeln!(
            svg,
            r##"<line x1="{0:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="#444"/><text x="{1:.2}" y="{2:.2}" text-anchor="end">{y:.1}</text>"##,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0
        );
        y += 0.2;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{0:.2}" y="{1:.2}" text-anchor="middle">Ωt</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 10.0
    );
    let series: [Series; 3] = [
        ("concurrence", "black", "", |r| r.c_numeric),
        ("mutual information", "red", r#" stroke-dasharray="8 5""#, |r| r.mi),
        ("C(A;BE)", "blue", r#" stroke-dasharray="2 4""#, |r| r.c_abe),
    ];
    for (i, (name, color, dash, value)) in series.iter().enumerate() {
        let pts = polyline(rows.iter().map(|r| (sx(r.omega_t), sy(value(r)))));
        let _ = writeln!(svg, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{pts}"/>"#);
        let ly = TOP + 16.0 + 16.0 * i as f64;
        let label = if *name == "mutual information" { format!("{name} (log base {base})") } else { name.to_string() };
        let _ = writeln!(
            svg,
            r#"<line x1="{0:.2}" y1="{ly:.2}" x2="{1:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="1.5"{dash}/><text x="{2:.2}" y="{3:.2}">{label}</text>"#,
            WIDTH - RIGHT - 230.0,
            WIDTH - RIGHT - 200.0,
            WIDTH - RIGHT - 195.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}
