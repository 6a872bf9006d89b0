use std::path::{Path, PathBuf};

use super::document::{InputDocument, ReportDocument};
use crate::amoeba::{analyze_with_iso, auto_box, AmoebaReport, AnalysisConfig};
use crate::geometry::{gamma_polytope, lambda_set};
use crate::lattice::LatticeIso;
use crate::render::{render_amoeba, render_polytope, FigureSpec, Window};
use crate::ronkin::{embed_l, laurent_from};
use crate::{Error, ExponentialSum, Result};

fn load(input: &Path) -> Result<(InputDocument, ExponentialSum, LatticeIso)> {
    let doc = InputDocument::from_path(input)?;
    let f = doc.to_sum()?;
    let iso = doc.lattice_iso(&f)?;
    Ok((doc, f, iso))
}

/// Runs the analysis and returns the serialized report.
pub fn cmd_analyze(input: &Path, config: &AnalysisConfig) -> Result<String> {
    let (doc, f, iso) = load(input)?;
    let report = analyze_with_iso(&f, &iso, config)?;
    ReportDocument::new(&doc, config, report).to_json()
}

pub fn bounds_line(report: &AmoebaReport) -> String {
    format!(
        "{} ≤ ρ≈{} ≤ {} < {:.2}…",
        report.card_vertices, report.rho_estimate, report.card_lambda, report.upsilon
    )
}

pub fn cmd_bounds(input: &Path, config: &AnalysisConfig) -> Result<String> {
    let (_, f, iso) = load(input)?;
    let report = analyze_with_iso(&f, &iso, config)?;
    Ok(bounds_line(&report))
}

/// Square window around the image of the automatic scan box under `L`.
pub fn default_window(f: &ExponentialSum, iso: &LatticeIso) -> Result<Window> {
    let b = auto_box(f)?;
    let n = f.dim();
    let mut half: f64 = 1.0;
    for corner in 0..(1usize << n) {
        let x: Vec<f64> = (0..n)
            .map(|i| {
                if corner >> i & 1 == 1 {
                    b.upper[i]
                } else {
                    b.lower[i]
                }
            })
            .collect();
        for v in embed_l(iso, &x) {
            half = half.max(v.abs());
        }
    }
    Window::square(half.ceil())
}

#[derive(Clone, Debug)]
pub struct RenderOutput {
    pub amoeba: PathBuf,
    pub polytope: PathBuf,
    pub labeled_regions: usize,
}

/// Writes `<stem>-amoeba.svg` and `<stem>-polytope.svg` into `out_dir`.
pub fn cmd_render(
    input: &Path,
    window: Option<Window>,
    density: usize,
    heat: bool,
    theta_grid: usize,
    out_dir: &Path,
) -> Result<RenderOutput> {
    let (_, f, iso) = load(input)?;
    if iso.rank() != 2 {
        return Err(Error::UnsupportedRank(iso.rank()).context("render"));
    }
    let window = match window {
        Some(w) => w,
        None => default_window(&f, &iso)?,
    };
    let mut spec = FigureSpec::new(window, density)?;
    spec.heat = heat;
    spec.theta_grid = theta_grid;
    let p = laurent_from(&f, &iso)?;
    let fig = render_amoeba(&p, &iso, &spec).map_err(|e| e.context("render"))?;
    let poly = gamma_polytope(&iso)?;
    let lambda = lambda_set(&f, &iso)?;
    let poly_svg = render_polytope(&poly, &lambda, &spec).map_err(|e| e.context("render"))?;
    let stem = input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "figure".into());
    std::fs::create_dir_all(out_dir)?;
    let amoeba = out_dir.join(format!("{stem}-amoeba.svg"));
    let polytope = out_dir.join(format!("{stem}-polytope.svg"));
    std::fs::write(&amoeba, &fig.svg)?;
    std::fs::write(&polytope, poly_svg)?;
    Ok(RenderOutput {
        amoeba,
        polytope,
        labeled_regions: fig.labeled_regions(),
    })
}
