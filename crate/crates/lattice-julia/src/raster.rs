//! Dynamical-plane and parameter-plane rasters, their text and JSON-lines
//! serializations, and binary PPM output.

use crate::classify::{classify_parameter, classify_point, BasinTestConfig, BasinVerdict, ParamVerdict, PointOutcome};
use crate::error::{Error, Result};
use crate::family::FamilyParams;
use crate::sphere::SpherePoint;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Version tag for both the text grid format and the image sidecar.
pub const FORMAT_VERSION: u32 = 1;

/// Parameter window that contains all the named sample parameters.
pub const DEFAULT_PARAM_BOUNDS: Bounds = Bounds { re_min: -3.0, re_max: 5.0, im_min: -4.0, im_max: 4.0 };

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Bounds {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        Bounds { re_min, re_max, im_min, im_max }
    }

    fn validate(&self) -> Result<()> {
        let all = [self.re_min, self.re_max, self.im_min, self.im_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("bounds must be finite".into()));
        }
        if !(self.re_min < self.re_max && self.im_min < self.im_max) {
            return Err(Error::InvalidParameter(format!(
                "degenerate bounds [{}, {}] x [{}, {}]",
                self.re_min, self.re_max, self.im_min, self.im_max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RenderMode {
    /// Points `z` in the dynamical plane of a fixed map.
    Dynamical { params: FamilyParams },
    /// Parameters `λ` for the given degree.
    Parameter { d: u32 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterSpec {
    pub bounds: Bounds,
    pub width: usize,
    pub height: usize,
    pub mode: RenderMode,
    pub cfg: BasinTestConfig,
}

impl RasterSpec {
    pub fn new(bounds: Bounds, width: usize, height: usize, mode: RenderMode, cfg: BasinTestConfig) -> Result<Self> {
        let spec = RasterSpec { bounds, width, height, mode, cfg };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width < 16 || self.height < 16 {
            return Err(Error::InvalidParameter(format!(
                "raster must be at least 16x16, got {}x{}",
                self.width, self.height
            )));
        }
        self.bounds.validate()?;
        self.cfg.validate()?;
        if let RenderMode::Parameter { d } = self.mode {
            if d < 2 {
                return Err(Error::InvalidParameter(format!("degree must be >= 2, got {d}")));
            }
        }
        Ok(())
    }

    fn pitch(&self) -> (f64, f64) {
        let b = &self.bounds;
        ((b.re_max - b.re_min) / self.width as f64, (b.im_max - b.im_min) / self.height as f64)
    }

    /// Center of pixel `(col, row)`; row 0 is the top edge.
    pub fn center(&self, col: usize, row: usize) -> Complex64 {
        let (dx, dy) = self.pitch();
        Complex64::new(
            self.bounds.re_min + (col as f64 + 0.5) * dx,
            self.bounds.im_max - (row as f64 + 0.5) * dy,
        )
    }

    /// Pixel containing `c`, if inside the window.
    pub fn locate(&self, c: Complex64) -> Option<(usize, usize)> {
        let (dx, dy) = self.pitch();
        let fx = (c.re - self.bounds.re_min) / dx;
        let fy = (self.bounds.im_max - c.im) / dy;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (col, row) = (fx.floor() as usize, fy.floor() as usize);
        (col < self.width && row < self.height).then_some((col, row))
    }

    /// Spec with half the pixel pitch whose odd-indexed pixel centers
    /// coincide with the centers of `self`.
    pub fn refined(&self) -> RasterSpec {
        let (dx, dy) = self.pitch();
        let b = &self.bounds;
        RasterSpec {
            bounds: Bounds {
                re_min: b.re_min - dx / 4.0,
                re_max: b.re_max + dx / 4.0,
                im_min: b.im_min - dy / 4.0,
                im_max: b.im_max + dy / 4.0,
            },
            width: 2 * self.width + 1,
            height: 2 * self.height + 1,
            ..*self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    AttractedToOne,
    AttractedToInfinity,
    Undetermined,
    CaptureDepth,
    NonEscaping,
    Degenerate,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::AttractedToOne => "one",
            CellKind::AttractedToInfinity => "infinity",
            CellKind::Undetermined => "undetermined",
            CellKind::CaptureDepth => "capture",
            CellKind::NonEscaping => "non_escaping",
            CellKind::Degenerate => "degenerate",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "one" => CellKind::AttractedToOne,
            "infinity" => CellKind::AttractedToInfinity,
            "undetermined" => CellKind::Undetermined,
            "capture" => CellKind::CaptureDepth,
            "non_escaping" => CellKind::NonEscaping,
            "degenerate" => CellKind::Degenerate,
            _ => return None,
        })
    }

    /// Cells drawn black: the non-escaping locus and undecided points.
    pub fn is_dark(self) -> bool {
        matches!(self, CellKind::Undetermined | CellKind::NonEscaping | CellKind::Degenerate)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub kind: CellKind,
    pub depth: Option<u32>,
    pub iterations: u32,
    /// Modulus at escape for dynamical cells, 0 otherwise.
    pub escape_modulus: f64,
}

impl Cell {
    pub fn from_point(o: &PointOutcome) -> Self {
        let kind = match o.verdict {
            BasinVerdict::AttractedToOne => CellKind::AttractedToOne,
            BasinVerdict::AttractedToInfinity => CellKind::AttractedToInfinity,
            BasinVerdict::Undetermined => CellKind::Undetermined,
        };
        Cell { kind, depth: None, iterations: o.iterations, escape_modulus: o.escape_modulus }
    }

    pub fn from_param(v: &ParamVerdict) -> Self {
        let (kind, depth, iterations) = match *v {
            ParamVerdict::CaptureDepth { depth, iterations } => (CellKind::CaptureDepth, Some(depth), iterations),
            ParamVerdict::NonEscapingWithinBudget { iterations } => (CellKind::NonEscaping, None, iterations),
            ParamVerdict::Degenerate => (CellKind::Degenerate, None, 0),
        };
        Cell { kind, depth, iterations, escape_modulus: 0.0 }
    }

    pub fn param_verdict(&self) -> Option<ParamVerdict> {
        match self.kind {
            CellKind::CaptureDepth => {
                Some(ParamVerdict::CaptureDepth { depth: self.depth?, iterations: self.iterations })
            }
            CellKind::NonEscaping => Some(ParamVerdict::NonEscapingWithinBudget { iterations: self.iterations }),
            CellKind::Degenerate => Some(ParamVerdict::Degenerate),
            _ => None,
        }
    }

    pub fn basin_verdict(&self) -> Option<BasinVerdict> {
        match self.kind {
            CellKind::AttractedToOne => Some(BasinVerdict::AttractedToOne),
            CellKind::AttractedToInfinity => Some(BasinVerdict::AttractedToInfinity),
            CellKind::Undetermined => Some(BasinVerdict::Undetermined),
            _ => None,
        }
    }
}

fn classify_cell(spec: &RasterSpec, c: Complex64) -> Cell {
    match spec.mode {
        RenderMode::Dynamical { params } => {
            Cell::from_point(&classify_point(&params, SpherePoint::Finite(c), &spec.cfg))
        }
        RenderMode::Parameter { d } => {
            let p = if c == Complex64::new(0.0, 0.0) {
                FamilyParams::degenerate(d)
            } else {
                FamilyParams::new(d, c)
            };
            match p {
                Ok(p) => Cell::from_param(&classify_parameter(&p, &spec.cfg)),
                Err(_) => Cell::from_param(&ParamVerdict::Degenerate),
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerdictGrid {
    pub spec: RasterSpec,
    /// Row-major, row 0 at the top.
    pub cells: Vec<Cell>,
}

/// Classify every pixel center. Rows are processed in parallel on the
/// current rayon pool; the result does not depend on the pool size.
pub fn render(spec: &RasterSpec) -> Result<VerdictGrid> {
    spec.validate()?;
    let rows: Vec<Vec<Cell>> = (0..spec.height)
        .into_par_iter()
        .map(|row| (0..spec.width).map(|col| classify_cell(spec, spec.center(col, row))).collect())
        .collect();
    Ok(VerdictGrid { spec: *spec, cells: rows.concat() })
}

impl VerdictGrid {
    pub fn get(&self, col: usize, row: usize) -> &Cell {
        &self.cells[row * self.spec.width + col]
    }

    pub fn cell_at(&self, c: Complex64) -> Option<&Cell> {
        self.spec.locate(c).map(|(col, row)| self.get(col, row))
    }

    pub fn count(&self, kind: CellKind) -> usize {
        self.cells.iter().filter(|c| c.kind == kind).count()
    }

    /// Number of connected components of the cells satisfying `pred`.
    pub fn components<F: Fn(&Cell) -> bool>(&self, pred: F, conn: Connectivity) -> usize {
        let (w, h) = (self.spec.width, self.spec.height);
        let inside: Vec<bool> = self.cells.iter().map(&pred).collect();
        let mut seen = vec![false; w * h];
        let mut queue = VecDeque::new();
        let mut count = 0;
        let steps: &[(isize, isize)] = match conn {
            Connectivity::Four => &[(1, 0), (-1, 0), (0, 1), (0, -1)],
            Connectivity::Eight => &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)],
        };
        for start in 0..w * h {
            if !inside[start] || seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                let (x, y) = ((i % w) as isize, (i / w) as isize);
                for &(dx, dy) in steps {
                    let (nx, ny) = (x + dx, y + dy);
                    if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if inside[j] && !seen[j] {
                        seen[j] = true;
                        queue.push_back(j);
                    }
                }
            }
        }
        count
    }

    /// Text form: comment lines carrying the version and spec, a header
    /// row, then one tab-separated record per cell.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let spec = serde_json::to_string(&self.spec).expect("spec serializes");
        let _ = writeln!(out, "# lattice-julia verdict grid v{FORMAT_VERSION}");
        let _ = writeln!(out, "# spec {spec}");
        out.push_str("re\tim\tkind\tdepth\titerations\tescape_modulus\n");
        for row in 0..self.spec.height {
            for col in 0..self.spec.width {
                let c = self.spec.center(col, row);
                let cell = self.get(col, row);
                let depth = cell.depth.map_or("-".to_string(), |d| d.to_string());
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{:e}",
                    c.re,
                    c.im,
                    cell.kind.name(),
                    depth,
                    cell.iterations,
                    cell.escape_modulus
                );
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |msg: String| Error::Domain(format!("verdict grid text: {msg}"));
        let mut spec = None;
        let mut cells = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix("# spec ") {
                let s: RasterSpec = serde_json::from_str(rest).map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
                spec = Some(s);
                continue;
            }
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            if !header_seen {
                header_seen = true;
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 6 {
                return Err(bad(format!("line {}: expected 6 fields, got {}", lineno + 1, f.len())));
            }
            let kind = CellKind::parse(f[2]).ok_or_else(|| bad(format!("line {}: unknown kind {}", lineno + 1, f[2])))?;
            let depth = match f[3] {
                "-" => None,
                s => Some(s.parse().map_err(|_| bad(format!("line {}: bad depth", lineno + 1)))?),
            };
            let iterations = f[4].parse().map_err(|_| bad(format!("line {}: bad iterations", lineno + 1)))?;
            let escape_modulus = f[5].parse().map_err(|_| bad(format!("line {}: bad modulus", lineno + 1)))?;
            cells.push(Cell { kind, depth, iterations, escape_modulus });
        }
        let spec = spec.ok_or_else(|| bad("missing spec line".into()))?;
        if cells.len() != spec.width * spec.height {
            return Err(bad(format!("{} cells for a {}x{} grid", cells.len(), spec.width, spec.height)));
        }
        Ok(VerdictGrid { spec, cells })
    }

    /// One JSON object per cell with its center coordinate.
    pub fn to_jsonl(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            re: f64,
            im: f64,
            kind: &'a str,
            depth: Option<u32>,
            iterations: u32,
        }
        let mut out = String::new();
        for row in 0..self.spec.height {
            for col in 0..self.spec.width {
                let c = self.spec.center(col, row);
                let cell = self.get(col, row);
                let rec = Record { re: c.re, im: c.im, kind: cell.kind.name(), depth: cell.depth, iterations: cell.iterations };
                out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
                out.push('\n');
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Palette {
    #[serde(rename = "paper-bw")]
    PaperBw,
    #[serde(rename = "depth-cycle")]
    DepthCycle,
    #[serde(rename = "smooth-escape")]
    SmoothEscape,
}

impl Palette {
    pub const ALL: [Palette; 3] = [Palette::PaperBw, Palette::DepthCycle, Palette::SmoothEscape];

    pub fn name(self) -> &'static str {
        match self {
            Palette::PaperBw => "paper-bw",
            Palette::DepthCycle => "depth-cycle",
            Palette::SmoothEscape => "smooth-escape",
        }
    }
}

impl FromStr for Palette {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Palette::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown palette {s:?}")))
    }
}

const CYCLE: [[u8; 3]; 8] = [
    [255, 255, 255],
    [230, 97, 1],
    [253, 184, 99],
    [178, 171, 210],
    [94, 60, 153],
    [27, 158, 119],
    [117, 112, 179],
    [231, 41, 138],
];

/// Smooth escape fraction `log_d(log|w| / log R)` clamped to `[0, 1]`.
pub fn smooth_escape_value(escape_modulus: f64, escape_radius: f64, d: u32) -> f64 {
    if !(escape_modulus > escape_radius) {
        return 0.0;
    }
    let ratio = escape_modulus.ln() / escape_radius.ln();
    (ratio.ln() / (d as f64).ln()).clamp(0.0, 1.0)
}

fn shade(base: [u8; 3], t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0);
    base.map(|c| (c as f64 * (0.35 + 0.65 * t)).round() as u8)
}

fn color(cell: &Cell, palette: Palette, spec: &RasterSpec) -> [u8; 3] {
    if cell.kind.is_dark() {
        return [0, 0, 0];
    }
    let d = match spec.mode {
        RenderMode::Dynamical { params } => params.d(),
        RenderMode::Parameter { d } => d,
    };
    let by_count = |k: u32| 1.0 / (1.0 + 0.15 * k as f64);
    match (palette, cell.kind) {
        (Palette::PaperBw, CellKind::AttractedToInfinity) => [190, 190, 190],
        (Palette::PaperBw, _) => [255, 255, 255],
        (Palette::DepthCycle, CellKind::CaptureDepth) => CYCLE[cell.depth.unwrap_or(0) as usize % CYCLE.len()],
        (Palette::DepthCycle, CellKind::AttractedToOne) => CYCLE[0],
        (Palette::DepthCycle, _) => shade(CYCLE[1], by_count(cell.iterations)),
        (Palette::SmoothEscape, CellKind::AttractedToInfinity) => {
            let nu = cell.iterations as f64 + 1.0 - smooth_escape_value(cell.escape_modulus, spec.cfg.escape_radius, d);
            shade([255, 200, 80], 1.0 / (1.0 + 0.15 * nu.max(0.0)))
        }
        (Palette::SmoothEscape, CellKind::AttractedToOne) => shade([90, 140, 255], by_count(cell.iterations)),
        (Palette::SmoothEscape, _) => shade([255, 255, 255], by_count(cell.iterations / 4)),
    }
}

/// Encode the grid as a binary P6 pixmap.
pub fn encode_ppm(grid: &VerdictGrid, palette: Palette) -> Vec<u8> {
    let (w, h) = (grid.spec.width, grid.spec.height);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(3 * w * h);
    for cell in &grid.cells {
        out.extend_from_slice(&color(cell, palette, &grid.spec));
    }
    out
}

#[derive(Serialize)]
struct Sidecar<'a> {
    format_version: u32,
    palette: &'a str,
    spec: &'a RasterSpec,
    classifier: &'a BasinTestConfig,
}

/// `image.ppm` gets `image.ppm.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Write the pixmap to `path` and its metadata next to it.
pub fn write_image(grid: &VerdictGrid, palette: Palette, path: &Path) -> Result<()> {
    let io = |p: &Path, e: std::io::Error| Error::Io(format!("{}: {e}", p.display()));
    std::fs::write(path, encode_ppm(grid, palette)).map_err(|e| io(path, e))?;
    let meta = Sidecar { format_version: FORMAT_VERSION, palette: palette.name(), spec: &grid.spec, classifier: &grid.spec.cfg };
    let side = sidecar_path(path);
    let mut f = std::fs::File::create(&side).map_err(|e| io(&side, e))?;
    let body = serde_json::to_string_pretty(&meta).expect("sidecar serializes");
    f.write_all(body.as_bytes()).and_then(|_| f.write_all(b"\n")).map_err(|e| io(&side, e))?;
    Ok(())
}
