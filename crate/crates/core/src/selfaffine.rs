//! The graph of `f` as the attractor of `q` coordinate-wise affine maps
//!
//! ```text
//! ψ_t(x, y) = (p_t x + β_t, p_{θ(t)} y + β_{θ(t)})
//! ```
//!
//! and export of sampled graph points to CSV or SVG.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::words;
use crate::rational::{from_f64, to_decimal, to_f64, Rational};
use crate::salem::SalemSystem;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap2D {
    pub x_scale: Rational,
    pub x_offset: Rational,
    pub y_scale: Rational,
    pub y_offset: Rational,
}

impl AffineMap2D {
    pub fn apply(&self, (x, y): (&Rational, &Rational)) -> (Rational, Rational) {
        (
            &self.x_offset + &self.x_scale * x,
            &self.y_offset + &self.y_scale * y,
        )
    }

    pub fn apply_f64(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (
            to_f64(&self.x_offset) + to_f64(&self.x_scale) * x,
            to_f64(&self.y_offset) + to_f64(&self.y_scale) * y,
        )
    }
}

/// `ψ_0, ..., ψ_{q-1}`.
pub fn ifs_maps(sys: &SalemSystem) -> Vec<AffineMap2D> {
    let params = sys.params();
    (0..sys.q() as u8)
        .map(|t| AffineMap2D {
            x_scale: params.weight(t).clone(),
            x_offset: params.offset(t).clone(),
            y_scale: sys.image_weight(t).clone(),
            y_offset: sys.image_offset(t).clone(),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Provenance {
    Deterministic {
        depth: usize,
    },
    ChaosGame {
        seed: u64,
        burn_in: usize,
        weighted: bool,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointData {
    Exact(Vec<(Rational, Rational)>),
    Float(Vec<(f64, f64)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphPointSet {
    pub data: PointData,
    pub provenance: Provenance,
}

impl GraphPointSet {
    pub fn len(&self) -> usize {
        match &self.data {
            PointData::Exact(v) => v.len(),
            PointData::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn exact(&self) -> Option<&[(Rational, Rational)]> {
        match &self.data {
            PointData::Exact(v) => Some(v),
            PointData::Float(_) => None,
        }
    }

    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        match &self.data {
            PointData::Exact(v) => v.iter().map(|(x, y)| (to_f64(x), to_f64(y))).collect(),
            PointData::Float(v) => v.clone(),
        }
    }
}

/// Largest point set [`deterministic_points`] will build.
pub const MAX_GRAPH_POINTS: u64 = 1_594_323; // 3^13

/// Images of the seed `(0, 0)` under all `q^depth` compositions
/// `ψ_{t_1} ∘ ... ∘ ψ_{t_depth}`, ordered by increasing `x`.
///
/// `f(0) = 0` when `θ(0) = 0`; for other permutations use
/// [`deterministic_points_from`] with a graph point as seed.
pub fn deterministic_points(sys: &SalemSystem, depth: usize) -> Result<GraphPointSet> {
    let zero = Rational::from_integer(0.into());
    let f0 = sys.image_stream_value(&[], &[]);
    deterministic_points_from(sys, depth, (zero, f0))
}

/// As [`deterministic_points`] from an arbitrary seed, which should lie on
/// the graph for the output to do so.
pub fn deterministic_points_from(
    sys: &SalemSystem,
    depth: usize,
    seed: (Rational, Rational),
) -> Result<GraphPointSet> {
    let q = sys.q() as u64;
    match q.checked_pow(depth as u32) {
        Some(n) if n <= MAX_GRAPH_POINTS => {}
        _ => {
            return Err(Error::ResourceLimit {
                what: format!("{q}^{depth} graph points exceeds {MAX_GRAPH_POINTS}"),
                achievable: format!("{} points", MAX_GRAPH_POINTS),
            })
        }
    }
    let points = words(sys.q(), depth)
        .map(|word| {
            let x = sys.params().word_image(word.iter().copied());
            let y = sys.image_word(&word);
            (x.apply(&seed.0), y.apply(&seed.1))
        })
        .collect();
    Ok(GraphPointSet {
        data: PointData::Exact(points),
        provenance: Provenance::Deterministic { depth },
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChaosConfig {
    pub n: usize,
    pub seed: u64,
    pub burn_in: usize,
    /// Pick `ψ_t` with probability `p_t` instead of uniformly.
    pub weighted: bool,
    pub start: (f64, f64),
}

impl Default for ChaosConfig {
    fn default() -> Self {
        ChaosConfig {
            n: 10_000,
            seed: 0,
            burn_in: 40,
            weighted: false,
            start: (0.0, 0.0),
        }
    }
}

/// The sequence of map indices the chaos game applies, burn-in included.
pub fn chaos_indices(sys: &SalemSystem, cfg: &ChaosConfig) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let total = cfg.burn_in + cfg.n;
    let q = sys.q();
    if cfg.weighted {
        let weights: Vec<f64> = sys.params().weights().iter().map(to_f64).collect();
        let dist = WeightedIndex::new(&weights).expect("weights are positive");
        (0..total).map(|_| dist.sample(&mut rng) as u8).collect()
    } else {
        (0..total).map(|_| rng.random_range(0..q as u8)).collect()
    }
}

/// Random iteration of the maps. After `k` steps the point's `y` differs
/// from `f(x)` by at most `max(p)^k · |y_0 - f(x_0)|`.
pub fn chaos_game(sys: &SalemSystem, cfg: &ChaosConfig) -> GraphPointSet {
    let maps = ifs_maps(sys);
    let float: Vec<[f64; 4]> = maps
        .iter()
        .map(|m| {
            [
                to_f64(&m.x_scale),
                to_f64(&m.x_offset),
                to_f64(&m.y_scale),
                to_f64(&m.y_offset),
            ]
        })
        .collect();
    let mut point = cfg.start;
    let mut out = Vec::with_capacity(cfg.n);
    for (k, t) in chaos_indices(sys, cfg).into_iter().enumerate() {
        let [xs, xo, ys, yo] = float[t as usize];
        point = (xo + xs * point.0, yo + ys * point.1);
        if k >= cfg.burn_in {
            out.push(point);
        }
    }
    GraphPointSet {
        data: PointData::Float(out),
        provenance: chaos_provenance(cfg),
    }
}

/// Exact replay of [`chaos_game`]; `start` must be a finite pair.
pub fn chaos_game_exact(sys: &SalemSystem, cfg: &ChaosConfig) -> Result<GraphPointSet> {
    let maps = ifs_maps(sys);
    let coord = |v: f64| from_f64(v).ok_or_else(|| Error::Domain(format!("start coordinate {v}")));
    let mut point = (coord(cfg.start.0)?, coord(cfg.start.1)?);
    let mut out = Vec::with_capacity(cfg.n);
    for (k, t) in chaos_indices(sys, cfg).into_iter().enumerate() {
        point = maps[t as usize].apply((&point.0, &point.1));
        if k >= cfg.burn_in {
            out.push(point.clone());
        }
    }
    Ok(GraphPointSet {
        data: PointData::Exact(out),
        provenance: chaos_provenance(cfg),
    })
}

fn chaos_provenance(cfg: &ChaosConfig) -> Provenance {
    Provenance::ChaosGame {
        seed: cfg.seed,
        burn_in: cfg.burn_in,
        weighted: cfg.weighted,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Svg,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExportOptions {
    /// Significant digits per CSV coordinate.
    pub precision: usize,
    /// Point radius in SVG user units (the unit square is 1000 × 1000).
    pub radius: f64,
}

impl Default for ExportOptions {
    fn default() -> Self {
        ExportOptions {
            precision: 17,
            radius: 1.5,
        }
    }
}

/// `x,y` header then one decimal row per point.
pub fn write_csv<W: Write>(pts: &GraphPointSet, out: &mut W, precision: usize) -> io::Result<()> {
    writeln!(out, "x,y")?;
    match &pts.data {
        PointData::Exact(v) => {
            for (x, y) in v {
                writeln!(
                    out,
                    "{},{}",
                    to_decimal(x, precision),
                    to_decimal(y, precision)
                )?;
            }
        }
        PointData::Float(v) => {
            for &(x, y) in v {
                let render = |c: f64| {
                    from_f64(c).map_or_else(|| c.to_string(), |r| to_decimal(&r, precision))
                };
                writeln!(out, "{},{}", render(x), render(y))?;
            }
        }
    }
    Ok(())
}

const SVG_SIZE: f64 = 1000.0;

/// Scatter plot over the unit square, `y` pointing up.
pub fn write_svg<W: Write>(pts: &GraphPointSet, out: &mut W, radius: f64) -> io::Result<()> {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {s} {s}" width="{s}" height="{s}">"#,
        s = SVG_SIZE
    )?;
    writeln!(
        out,
        r#"<rect x="0" y="0" width="{s}" height="{s}" fill="white" stroke="black" stroke-width="1"/>"#,
        s = SVG_SIZE
    )?;
    writeln!(out, r#"<g fill="black">"#)?;
    for (x, y) in pts.to_f64() {
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{}"/>"#,
            x * SVG_SIZE,
            (1.0 - y) * SVG_SIZE,
            radius
        )?;
    }
    writeln!(out, "</g>\n</svg>")
}

pub fn export_points(
    pts: &GraphPointSet,
    format: ExportFormat,
    path: &Path,
    opts: &ExportOptions,
) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_owned(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    match format {
        ExportFormat::Csv => write_csv(pts, &mut out, opts.precision),
        ExportFormat::Svg => write_svg(pts, &mut out, opts.radius),
    }
    .and_then(|_| out.flush())
    .map_err(io_err)
}
