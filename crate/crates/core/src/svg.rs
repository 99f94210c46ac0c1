//! Static SVG scatter of the realized region in the `(chi_h, c1^2)` plane.

use std::fmt::Write;

use crate::geography::SweepRow;

const MARGIN: f64 = 50.0;

struct Frame {
    width: f64,
    height: f64,
    x_max: f64,
    c_max: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + x / self.x_max * (self.width - 2.0 * MARGIN)
    }

    fn py(&self, c: f64) -> f64 {
        self.height - MARGIN - c / self.c_max * (self.height - 2.0 * MARGIN)
    }
}

/// Label, stroke colour and `c` as a function of `x`.
type ReferenceLine = (&'static str, &'static str, fn(f64) -> f64);

fn color(row: &SweepRow) -> &'static str {
    match (row.status.as_str(), row.alternative.is_empty()) {
        ("pass", true) => "#1f77b4",
        ("pass", false) => "#2ca02c",
        _ => "#d62728",
    }
}

/// Axes, the shaded region `x - 3 <= c <= (5x - 4)/2`, the half-Noether,
/// Noether and `(5/2)x - 2` lines, and one dot per row.
pub fn region_svg(rows: &[SweepRow], width: u32, height: u32) -> String {
    let x_max = rows.iter().map(|r| r.x).max().unwrap_or(4).max(4) as f64 + 1.0;
    let c_max = (2.5 * x_max - 2.0).ceil() + 1.0;
    let fr = Frame {
        width: f64::from(width),
        height: f64::from(height),
        x_max,
        c_max,
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);

    // Region between the half-Noether line and the upper line, from x = 3.
    let (x0, x1) = (3.0, x_max);
    let _ = writeln!(
        s,
        r##"<polygon points="{:.1},{:.1} {:.1},{:.1} {:.1},{:.1} {:.1},{:.1}" fill="#dbe9f6" stroke="none"/>"##,
        fr.px(x0),
        fr.py(x0 - 3.0),
        fr.px(x1),
        fr.py(x1 - 3.0),
        fr.px(x1),
        fr.py(2.5 * x1 - 2.0),
        fr.px(x0),
        fr.py(2.5 * x0 - 2.0),
    );

    let axis = |s: &mut String, x1: f64, y1: f64, x2: f64, y2: f64| {
        let _ = writeln!(
            s,
            r##"<line x1="{x1:.1}" y1="{y1:.1}" x2="{x2:.1}" y2="{y2:.1}" stroke="#333333"/>"##
        );
    };
    axis(&mut s, fr.px(0.0), fr.py(0.0), fr.px(x_max), fr.py(0.0));
    axis(&mut s, fr.px(0.0), fr.py(0.0), fr.px(0.0), fr.py(c_max));
    let step = if x_max > 20.0 { 5 } else { 1 };
    for t in (0..=x_max as i64).step_by(step) {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{t}</text>"#,
            fr.px(t as f64),
            fr.py(0.0) + 16.0
        );
    }
    let cstep = if c_max > 40.0 { 10 } else { 2 };
    for t in (0..=c_max as i64).step_by(cstep) {
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{t}</text>"#,
            fr.px(0.0) - 6.0,
            fr.py(t as f64) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">chi_h</text>"#,
        fr.width / 2.0,
        fr.height - 10.0
    );
    let _ = writeln!(
        s,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">c1^2</text>"#,
        fr.height / 2.0,
        fr.height / 2.0
    );

    let lines: [ReferenceLine; 3] = [
        ("half-Noether c = x - 3", "#ff7f0e", |x| x - 3.0),
        ("Noether c = 2x - 6", "#9467bd", |x| 2.0 * x - 6.0),
        ("c = (5/2)x - 2", "#8c564b", |x| 2.5 * x - 2.0),
    ];
    for (i, (label, col, f)) in lines.iter().enumerate() {
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{col}" stroke-width="1.5"/>"#,
            fr.px(3.0),
            fr.py(f(3.0)),
            fr.px(x_max),
            fr.py(f(x_max))
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" fill="{col}">{label}</text>"#,
            MARGIN + 10.0,
            MARGIN + 14.0 * i as f64
        );
    }
    for r in rows {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{}"><title>({}, {}) {} k={}</title></circle>"#,
            fr.px(r.x as f64),
            fr.py(r.c as f64),
            color(r),
            r.x,
            r.c,
            r.route,
            r.k
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_is_deterministic_and_closed() {
        let rows = crate::geography::geography_sweep(5).unwrap();
        let a = region_svg(&rows, 800, 600);
        assert_eq!(a, region_svg(&rows, 800, 600));
        assert!(a.starts_with("<svg") && a.trim_end().ends_with("</svg>"));
        assert_eq!(a.matches("<circle").count(), rows.len());
        assert!(a.contains("width=\"800\""));
    }
}
