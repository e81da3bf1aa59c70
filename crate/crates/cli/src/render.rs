//! Deterministic SVG scatter plots with optional decision shading.

use std::fmt::Write;

use narrowcap::{Error, Network, PointCloud, Result};

const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    /// `(xmin, ymin, xmax, ymax)` in data coordinates.
    pub view_box: (f64, f64, f64, f64),
    pub width_px: u32,
    pub height_px: u32,
    /// Colors by class rank; cycled when there are more classes.
    pub class_colors: Vec<String>,
    pub point_radius: f64,
    /// Cells per axis of the decision grid.
    pub grid_resolution: usize,
    pub title: Option<String>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            view_box: (0.0, 0.0, 1.0, 1.0),
            width_px: 400,
            height_px: 400,
            class_colors: PALETTE.iter().map(|c| c.to_string()).collect(),
            point_radius: 2.0,
            grid_resolution: 100,
            title: None,
        }
    }
}

impl RenderSpec {
    /// Default spec with the view box set to the bounding box of `clouds`
    /// plus 5% padding.
    pub fn fitted(clouds: &[(PointCloud, f64)]) -> Self {
        let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
        for p in clouds
            .iter()
            .flat_map(|(c, _)| c.iter())
            .filter(|p| p.len() == 2)
        {
            for i in 0..2 {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        let mut spec = Self::default();
        if lo[0].is_finite() {
            let pad = |i: usize| 0.05 * (hi[i] - lo[i]).max(1e-3);
            spec.view_box = (
                lo[0] - pad(0),
                lo[1] - pad(1),
                hi[0] + pad(0),
                hi[1] + pad(1),
            );
        }
        spec
    }

    pub fn validate(&self) -> Result<()> {
        let (x0, y0, x1, y1) = self.view_box;
        if !(x1 > x0 && y1 > y0 && [x0, y0, x1, y1].iter().all(|v| v.is_finite())) {
            return Err(Error::Precondition(
                "view box must have positive extent".into(),
            ));
        }
        if self.width_px == 0 || self.height_px == 0 || !(self.point_radius > 0.0) {
            return Err(Error::Precondition("sizes must be positive".into()));
        }
        if self.grid_resolution < 2 {
            return Err(Error::Precondition(
                "grid resolution must be at least 2".into(),
            ));
        }
        if self.class_colors.is_empty() {
            return Err(Error::Precondition(
                "at least one class color is needed".into(),
            ));
        }
        Ok(())
    }

    /// Pixel coordinates of a data point; y grows upwards in data space.
    pub fn to_pixels(&self, x: f64, y: f64) -> (f64, f64) {
        let (x0, y0, x1, y1) = self.view_box;
        (
            (x - x0) / (x1 - x0) * f64::from(self.width_px),
            (y1 - y) / (y1 - y0) * f64::from(self.height_px),
        )
    }

    fn color(&self, rank: usize) -> &str {
        &self.class_colors[rank % self.class_colors.len()]
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Renders labelled 2-D clouds as an SVG 1.1 document.
///
/// With a network, each grid cell is shaded with the color of the class
/// value nearest to the network output at the cell centre; for two classes
/// this thresholds at their midpoint.
pub fn render_svg(
    clouds: &[(PointCloud, f64)],
    spec: &RenderSpec,
    net: Option<&Network>,
) -> Result<Vec<u8>> {
    spec.validate()?;
    if clouds.iter().all(|(c, _)| c.is_empty()) {
        return Err(Error::EmptyData);
    }
    for (c, _) in clouds {
        if c.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: c.dim(),
            });
        }
    }
    let mut classes: Vec<f64> = clouds.iter().map(|(_, v)| *v).collect();
    classes.sort_by(f64::total_cmp);
    classes.dedup();
    let rank = |v: f64| classes.iter().position(|c| *c == v).unwrap_or(0);

    let (w, h) = (spec.width_px, spec.height_px);
    let mut out = String::new();
    writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    )
    .unwrap();

    if let Some(net) = net {
        if net.input_dim() != 2 || net.output_dim() != 1 {
            return Err(Error::Precondition(
                "decision shading needs a network from R^2 to R".into(),
            ));
        }
        let mut eval = net.evaluator();
        let n = spec.grid_resolution;
        let (x0, y0, x1, y1) = spec.view_box;
        let (cw, ch) = (f64::from(w) / n as f64, f64::from(h) / n as f64);
        writeln!(out, r#"<g fill-opacity="0.25">"#).unwrap();
        for j in 0..n {
            for i in 0..n {
                let x = x0 + (i as f64 + 0.5) / n as f64 * (x1 - x0);
                let y = y1 - (j as f64 + 0.5) / n as f64 * (y1 - y0);
                let v = eval.eval_scalar(&[x, y]);
                let nearest = (0..classes.len())
                    .min_by(|&a, &b| (classes[a] - v).abs().total_cmp(&(classes[b] - v).abs()))
                    .unwrap_or(0);
                writeln!(
                    out,
                    r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                    i as f64 * cw,
                    j as f64 * ch,
                    cw,
                    ch,
                    spec.color(nearest)
                )
                .unwrap();
            }
        }
        writeln!(out, "</g>").unwrap();
    }

    for (cloud, value) in clouds {
        writeln!(out, r#"<g fill="{}">"#, spec.color(rank(*value))).unwrap();
        for p in cloud {
            let (px, py) = spec.to_pixels(p[0], p[1]);
            writeln!(
                out,
                r#"<circle cx="{px:.3}" cy="{py:.3}" r="{:.3}"/>"#,
                spec.point_radius
            )
            .unwrap();
        }
        writeln!(out, "</g>").unwrap();
    }
    if let Some(title) = &spec.title {
        writeln!(
            out,
            r#"<text x="{:.1}" y="16" text-anchor="middle" font-family="sans-serif" font-size="14">{}</text>"#,
            f64::from(w) / 2.0,
            escape(title)
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out.into_bytes())
}
