//! Coherence/disturbance scatter as a standalone SVG.

use std::fmt::Write;

use cohdist::SweepRecord;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const TICKS: usize = 5;

/// Scatter of (coherence, disturbance) with the line D = bound − k·C, where bound
/// and k come from the records. With no records only the axes are drawn.
pub fn render(records: &[SweepRecord]) -> String {
    let line = records.first().and_then(|r| {
        let bound = *r.extra_terms.get("bound")?;
        let k = *r.extra_terms.get("coherence_weight")?;
        Some((bound, k))
    });
    let mut x_max = line.map_or(1.0, |(b, k)| b / k);
    let mut y_max = line.map_or(1.0, |(b, _)| b);
    for r in records {
        x_max = x_max.max(r.coherence);
        y_max = y_max.max(r.disturbance);
    }
    x_max *= 1.05;
    y_max *= 1.05;

    let sx = |x: f64| MARGIN + x / x_max * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - y / y_max * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<g id="axes" stroke="black" stroke-width="1"><line x1="{x0:.2}" y1="{y0:.2}" x2="{x1:.2}" y2="{y0:.2}"/><line x1="{x0:.2}" y1="{y0:.2}" x2="{x0:.2}" y2="{y1:.2}"/></g>"#,
        x0 = sx(0.0),
        y0 = sy(0.0),
        x1 = sx(x_max),
        y1 = sy(y_max),
    );
    let _ = writeln!(
        svg,
        r#"<g id="ticks" font-family="sans-serif" font-size="11">"#
    );
    for i in 0..=TICKS {
        let fx = x_max * i as f64 / TICKS as f64;
        let fy = y_max * i as f64 / TICKS as f64;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{fx:.2}</text><text x="{:.2}" y="{:.2}" text-anchor="end">{fy:.2}</text>"#,
            sx(fx),
            sy(0.0) + 16.0,
            sx(0.0) - 6.0,
            sy(fy) + 4.0,
        );
    }
    let _ = writeln!(svg, "</g>");
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13">coherence</text>"#,
        WIDTH / 2.0,
        HEIGHT - 18.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {:.2})">disturbance</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );

    if let Some((bound, k)) = line {
        let _ = writeln!(
            svg,
            r#"<line id="bound" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="crimson" stroke-width="1.5"/>"#,
            sx(0.0),
            sy(bound),
            sx(bound / k),
            sy(0.0)
        );
    }
    if !records.is_empty() {
        let _ = writeln!(
            svg,
            r#"<g id="points" fill="steelblue" fill-opacity="0.5">"#
        );
        for r in records {
            let _ = writeln!(
                svg,
                r#"<circle cx="{:.2}" cy="{:.2}" r="1.5"/>"#,
                sx(r.coherence),
                sy(r.disturbance)
            );
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(c: f64, d: f64) -> SweepRecord {
        SweepRecord {
            sample_id: 0,
            d: 2,
            channel_label: "depolarizing".into(),
            channel_param: 1.0,
            coherence: c,
            disturbance: d,
            extra_terms: [
                ("bound".to_string(), 2.0),
                ("coherence_weight".to_string(), 2.0),
            ]
            .into_iter()
            .collect(),
            residual: 2.0 - 2.0 * c - d,
            seed: 0,
        }
    }

    #[test]
    fn empty_input_draws_axes_only() {
        let svg = render(&[]);
        assert!(svg.contains(r#"id="axes""#));
        assert!(!svg.contains("<circle"));
        assert!(!svg.contains(r#"id="bound""#));
    }

    #[test]
    fn points_and_bound_line() {
        let svg = render(&[rec(0.2, 1.0), rec(0.5, 0.5)]);
        assert_eq!(svg.matches("<circle").count(), 2);
        assert!(svg.contains(r#"id="bound""#));
        assert_eq!(render(&[rec(0.2, 1.0)]), render(&[rec(0.2, 1.0)]));
    }
}
