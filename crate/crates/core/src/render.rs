//! SVG figures: the amoeba of `P` cut by `L(ℝⁿ)`, and the polytope `Γ_P`
//! with the points of `Λ_f`.
//!
//! The amoeba layer is sampled per pixel and embedded as a grayscale PNG;
//! lines, dots and labels are vector elements. Output depends only on the
//! inputs and the [`FigureSpec`], so re-rendering is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use base64::Engine as _;
use rayon::prelude::*;
use serde::Serialize;

use crate::amoeba::{
    label_grid, MembershipProbe, MembershipStatus, DEFAULT_THETA_GRID, DEFAULT_THRESHOLD,
};
use crate::geometry::{LambdaSet, LatticePolytope};
use crate::lattice::LatticeIso;
use crate::ronkin::{order_at_y, LaurentPoly, DEFAULT_QUADRATURE_NODES, ORDER_TOLERANCE};
use crate::{Error, Result};

pub const MIN_PIXEL_DENSITY: usize = 10;
/// Target size of the longer side of the amoeba figure, in SVG units.
const FIGURE_SIZE: f64 = 600.0;
const POLYTOPE_UNIT: f64 = 60.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Amoeba,
    LLine,
    Polytope,
    LambdaPoints,
    ComponentLabels,
}

impl Layer {
    pub const ALL: [Layer; 5] = [
        Layer::Amoeba,
        Layer::LLine,
        Layer::Polytope,
        Layer::LambdaPoints,
        Layer::ComponentLabels,
    ];
}

/// Rectangle `[x0, x1] × [y0, y1]` in amoeba coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x0 < x1 && y0 < y1;
        if !ok {
            return Err(Error::InvalidSum(format!(
                "degenerate window [{x0}, {x1}] × [{y0}, {y1}]"
            )));
        }
        Ok(Window { x0, x1, y0, y1 })
    }

    pub fn square(half: f64) -> Result<Self> {
        Window::new(-half, half, -half, half)
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FigureSpec {
    pub window: Window,
    /// Samples per unit length.
    pub pixel_density: usize,
    pub layers: Vec<Layer>,
    /// Gray-level heat map of the min-modulus instead of two tones.
    pub heat: bool,
    pub theta_grid: usize,
    pub threshold: f64,
}

impl FigureSpec {
    pub fn new(window: Window, pixel_density: usize) -> Result<Self> {
        if pixel_density < MIN_PIXEL_DENSITY {
            return Err(Error::InvalidSum(format!(
                "pixel density must be at least {MIN_PIXEL_DENSITY}, got {pixel_density}"
            )));
        }
        Ok(FigureSpec {
            window,
            pixel_density,
            layers: Layer::ALL.to_vec(),
            heat: false,
            theta_grid: DEFAULT_THETA_GRID,
            threshold: DEFAULT_THRESHOLD,
        })
    }

    fn has(&self, layer: Layer) -> bool {
        self.layers.contains(&layer)
    }
}

/// A pixel component of the amoeba complement inside the window.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Region {
    pub order_gamma: Vec<i64>,
    pub centroid: [f64; 2],
    pub pixels: usize,
    /// The region meets `L(ℝⁿ)`.
    pub on_l: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmoebaFigure {
    pub svg: String,
    pub regions: Vec<Region>,
}

impl AmoebaFigure {
    /// Regions crossed by `L(ℝⁿ)`; these carry order labels.
    pub fn labeled_regions(&self) -> usize {
        self.regions.iter().filter(|r| r.on_l).count()
    }
}

/// Image of `L` in ℝ²: a line through the origin, or the whole plane.
enum LImage {
    Line([f64; 2]),
    Plane,
}

fn l_image(iso: &LatticeIso) -> LImage {
    let omega = iso.omega();
    let n = iso.generators()[0].len();
    let cols: Vec<[f64; 2]> = (0..n).map(|j| [omega[0][j], omega[1][j]]).collect();
    let scale = cols.iter().map(|c| c[0].hypot(c[1])).fold(0.0, f64::max);
    for a in 0..n {
        for b in (a + 1)..n {
            let det = cols[a][0] * cols[b][1] - cols[a][1] * cols[b][0];
            if det.abs() > 1e-9 * scale * scale {
                return LImage::Plane;
            }
        }
    }
    let dir = *cols
        .iter()
        .max_by(|a, b| a[0].hypot(a[1]).total_cmp(&b[0].hypot(b[1])))
        .expect("n ≥ 1");
    LImage::Line([dir[0] / scale, dir[1] / scale])
}

/// Parameter range of `t ↦ t·dir` inside the window.
fn clip_line(dir: [f64; 2], w: &Window) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (d, a, b) in [(dir[0], w.x0, w.x1), (dir[1], w.y0, w.y1)] {
        if d.abs() < 1e-15 {
            if a > 0.0 || b < 0.0 {
                return None;
            }
            continue;
        }
        let (t0, t1) = if d > 0.0 {
            (a / d, b / d)
        } else {
            (b / d, a / d)
        };
        lo = lo.max(t0);
        hi = hi.min(t1);
    }
    (lo < hi).then_some((lo, hi))
}

fn fmt_order(k: &[i64]) -> String {
    let parts: Vec<String> = k.iter().map(|v| v.to_string()).collect();
    format!("({})", parts.join(","))
}

fn encode_png(width: usize, height: usize, gray: &[u8]) -> Result<String> {
    let mut bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut bytes, width as u32, height as u32);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Eight);
        let mut w = enc
            .write_header()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        w.write_image_data(gray)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    Ok(base64::engine::general_purpose::STANDARD.encode(bytes))
}

/// Renders the amoeba of `p` inside the window with `L(ℝⁿ)` and the
/// complement orders overlaid.
pub fn render_amoeba(p: &LaurentPoly, iso: &LatticeIso, spec: &FigureSpec) -> Result<AmoebaFigure> {
    if p.rank() != 2 || iso.rank() != 2 {
        return Err(Error::UnsupportedRank(p.rank()));
    }
    let w = spec.window;
    let width = (((w.x1 - w.x0) * spec.pixel_density as f64).ceil() as usize).max(2);
    let height = (((w.y1 - w.y0) * spec.pixel_density as f64).ceil() as usize).max(2);
    let px = (w.x1 - w.x0) / width as f64;
    let py = (w.y1 - w.y0) / height as f64;
    // pixel (row, col), row 0 at the top
    let center = |idx: usize| -> [f64; 2] {
        let (row, col) = (idx / width, idx % width);
        [
            w.x0 + (col as f64 + 0.5) * px,
            w.y1 - (row as f64 + 0.5) * py,
        ]
    };
    let probe = MembershipProbe::new(p, spec.theta_grid, spec.threshold)?;
    let samples: Vec<(MembershipStatus, f64, Option<Vec<i64>>)> = (0..width * height)
        .into_par_iter()
        .map(|idx| probe.classify(&center(idx)))
        .collect();

    let gray: Vec<u8> = samples
        .iter()
        .map(|(status, ratio, _)| match status {
            MembershipStatus::CertifiedComplement => 255,
            _ if spec.heat => {
                let v = ((ratio.max(1e-12).log10() + 6.0) / 6.0).clamp(0.0, 1.0);
                (40.0 + 215.0 * v).round() as u8
            }
            MembershipStatus::LikelyAmoeba => 40,
            MembershipStatus::LikelyComplement => 255,
        })
        .collect();

    // Every complement pixel gets an order, and only equal orders are joined:
    // amoeba tentacles thinner than a pixel then still split regions.
    // Pixels whose order does not resolve are left out.
    let statuses: Vec<(MembershipStatus, Option<Vec<i64>>)> = samples
        .par_iter()
        .enumerate()
        .map(|(idx, (status, _, order))| match status {
            MembershipStatus::LikelyAmoeba => (*status, None),
            MembershipStatus::CertifiedComplement => (*status, order.clone()),
            MembershipStatus::LikelyComplement => {
                match order_at_y(p, &center(idx), DEFAULT_QUADRATURE_NODES) {
                    Ok((_, k, res)) if res <= ORDER_TOLERANCE => (*status, Some(k)),
                    _ => (MembershipStatus::LikelyAmoeba, None),
                }
            }
        })
        .collect();
    let (label, groups) = label_grid(&statuses, height, width);

    let image = l_image(iso);
    let mut crossed = vec![false; groups.len()];
    match image {
        LImage::Plane => crossed.iter_mut().for_each(|c| *c = true),
        LImage::Line(dir) => {
            if let Some((t0, t1)) = clip_line(dir, &w) {
                let step = 0.25 * px.min(py);
                let count = ((t1 - t0) / step).ceil() as usize;
                for s in 0..=count {
                    let t = t0 + (t1 - t0) * s as f64 / count as f64;
                    let q = [t * dir[0], t * dir[1]];
                    let col = (((q[0] - w.x0) / px) as usize).min(width - 1);
                    let row = (((w.y1 - q[1]) / py) as usize).min(height - 1);
                    let l = label[row * width + col];
                    if l != usize::MAX {
                        crossed[l] = true;
                    }
                }
            }
        }
    }

    // pixel components, merged by order
    let mut merged: BTreeMap<Vec<i64>, Region> = BTreeMap::new();
    for (g, group) in groups.iter().enumerate() {
        let order = statuses[group[0]]
            .1
            .clone()
            .expect("complement pixels carry orders");
        let region = merged.entry(order.clone()).or_insert(Region {
            order_gamma: order,
            centroid: [0.0, 0.0],
            pixels: 0,
            on_l: false,
        });
        for &a in group {
            let c = center(a);
            region.centroid[0] += c[0];
            region.centroid[1] += c[1];
        }
        region.pixels += group.len();
        region.on_l |= crossed[g];
    }
    for r in merged.values_mut() {
        r.centroid[0] /= r.pixels as f64;
        r.centroid[1] /= r.pixels as f64;
    }
    let regions: Vec<Region> = merged.into_values().collect();

    let sw = FIGURE_SIZE * (w.x1 - w.x0) / (w.x1 - w.x0).max(w.y1 - w.y0);
    let sh = FIGURE_SIZE * (w.y1 - w.y0) / (w.x1 - w.x0).max(w.y1 - w.y0);
    let to_svg = |q: [f64; 2]| -> (f64, f64) {
        (
            (q[0] - w.x0) / (w.x1 - w.x0) * sw,
            (w.y1 - q[1]) / (w.y1 - w.y0) * sh,
        )
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{sw:.0}" height="{sh:.0}" viewBox="0 0 {sw:.3} {sh:.3}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{sw:.3}" height="{sh:.3}" fill="white"/>"#
    );
    if spec.has(Layer::Amoeba) {
        let data = encode_png(width, height, &gray)?;
        let _ = writeln!(
            svg,
            r#"<image x="0" y="0" width="{sw:.3}" height="{sh:.3}" preserveAspectRatio="none" style="image-rendering:pixelated" href="data:image/png;base64,{data}"/>"#
        );
    }
    // coordinate axes
    let (ax, ay) = to_svg([0.0, 0.0]);
    if w.contains([0.0, w.y0]) {
        let _ = writeln!(
            svg,
            r##"<line x1="{ax:.3}" y1="0" x2="{ax:.3}" y2="{sh:.3}" stroke="#999" stroke-width="0.5"/>"##
        );
    }
    if w.contains([w.x0, 0.0]) {
        let _ = writeln!(
            svg,
            r##"<line x1="0" y1="{ay:.3}" x2="{sw:.3}" y2="{ay:.3}" stroke="#999" stroke-width="0.5"/>"##
        );
    }
    if spec.has(Layer::LLine) {
        if let LImage::Line(dir) = image {
            if let Some((t0, t1)) = clip_line(dir, &w) {
                let (x1, y1) = to_svg([t0 * dir[0], t0 * dir[1]]);
                let (x2, y2) = to_svg([t1 * dir[0], t1 * dir[1]]);
                let _ = writeln!(
                    svg,
                    r##"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" stroke="#c00" stroke-width="1.5"/>"##
                );
            }
        }
    }
    if spec.has(Layer::ComponentLabels) {
        for r in regions.iter().filter(|r| r.on_l) {
            let (x, y) = to_svg(r.centroid);
            let _ = writeln!(
                svg,
                r##"<text x="{x:.3}" y="{y:.3}" font-family="sans-serif" font-size="12" text-anchor="middle" fill="#00c">{}</text>"##,
                fmt_order(&r.order_gamma)
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(AmoebaFigure { svg, regions })
}

/// Renders `Γ_P` with an integer grid and the points of `Λ_f`.
pub fn render_polytope(
    poly: &LatticePolytope,
    lambda: &LambdaSet,
    spec: &FigureSpec,
) -> Result<String> {
    if poly.dim() != 2 {
        return Err(Error::UnsupportedRank(poly.dim()));
    }
    for k in &lambda.points_gamma {
        if !poly.contains(k) {
            return Err(Error::InvalidSum(format!(
                "Λ point {k:?} outside the polytope"
            )));
        }
    }
    let vs = poly.vertices();
    let xmin = vs.iter().map(|v| v[0]).min().expect("non-empty") - 1;
    let xmax = vs.iter().map(|v| v[0]).max().expect("non-empty") + 1;
    let ymin = vs.iter().map(|v| v[1]).min().expect("non-empty") - 1;
    let ymax = vs.iter().map(|v| v[1]).max().expect("non-empty") + 1;
    let u = POLYTOPE_UNIT;
    let sw = (xmax - xmin) as f64 * u;
    let sh = (ymax - ymin) as f64 * u;
    let to_svg = |v: &[i64]| -> (f64, f64) { ((v[0] - xmin) as f64 * u, (ymax - v[1]) as f64 * u) };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{sw:.0}" height="{sh:.0}" viewBox="0 0 {sw:.3} {sh:.3}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{sw:.3}" height="{sh:.3}" fill="white"/>"#
    );
    for x in xmin..=xmax {
        let (sx, _) = to_svg(&[x, 0]);
        let stroke = if x == 0 { "#666" } else { "#ddd" };
        let _ = writeln!(
            svg,
            r#"<line x1="{sx:.3}" y1="0" x2="{sx:.3}" y2="{sh:.3}" stroke="{stroke}" stroke-width="1"/>"#
        );
    }
    for y in ymin..=ymax {
        let (_, sy) = to_svg(&[0, y]);
        let stroke = if y == 0 { "#666" } else { "#ddd" };
        let _ = writeln!(
            svg,
            r#"<line x1="0" y1="{sy:.3}" x2="{sw:.3}" y2="{sy:.3}" stroke="{stroke}" stroke-width="1"/>"#
        );
    }
    if spec.has(Layer::Polytope) {
        let pts: Vec<String> = vs
            .iter()
            .map(|v| {
                let (x, y) = to_svg(v);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"<polygon points="{}" fill="none" stroke="black" stroke-width="2"/>"#,
            pts.join(" ")
        );
    }
    if spec.has(Layer::LambdaPoints) {
        for k in &lambda.points_gamma {
            let (x, y) = to_svg(k);
            let _ = writeln!(
                svg,
                r#"<circle cx="{x:.3}" cy="{y:.3}" r="4" fill="black"/>"#
            );
        }
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
