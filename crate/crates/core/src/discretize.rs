//! Uniform masked grid on the pair domain and assembly of the discrete
//! quadratic form.
//!
//! The lattice spacing is `h = d / m`, so both Dirichlet lines `y = x` and
//! `y = x + d` run through lattice nodes and are imposed by dropping those
//! nodes. The energy form
//!
//! ```text
//! q[φ] = ∫ |∇φ|² + ∫_{x=0} σ(y) |φ(0, y)|² dy
//! ```
//!
//! is approximated edge by edge: each lattice edge `(a, b)` contributes
//! `w_ab (φ_a − φ_b)²` with `w_ab = 1`, or `1/2` for edges lying on the wire
//! end, and each wire-end node adds `σ(y_j) h φ_j²`. The mass weights are the
//! dual-cell areas `h²` (interior) and `h²/2` (wire end). The generalized
//! problem `S x = λ W x` then reproduces the five-point Laplacian in the
//! interior and the half-cell Neumann/Robin stencil on the wire end, in the
//! energy unit `ħ²/(2 m_e d²)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{classify_boundary, BoundaryTag, DomainSpec, Point, Reduction};
use crate::sparse::CsrMatrix;

/// Smallest admissible number of cells per pair extension.
pub const MIN_CELLS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Node {
    pub i: usize,
    pub j: usize,
    pub tag: BoundaryTag,
}

#[derive(Debug, Clone, Copy)]
struct RowSpan {
    start: usize,
    lo: usize,
    len: usize,
}

/// Degree-of-freedom nodes of the lattice `(i h, j h)`, numbered row by row in `j`.
#[derive(Debug, Clone)]
pub struct Grid {
    spec: DomainSpec,
    m: usize,
    cells: usize,
    h: f64,
    rows: Vec<RowSpan>,
    nodes: Vec<Node>,
}

pub fn build_grid(spec: &DomainSpec, m: usize) -> Result<Grid> {
    Grid::new(spec, m)
}

impl Grid {
    pub fn new(spec: &DomainSpec, m: usize) -> Result<Self> {
        if m < MIN_CELLS {
            return Err(Error::Resolution { m, min: MIN_CELLS });
        }
        let lm = spec.length_ratio() * m as f64;
        let cells = lm.round();
        if (lm - cells).abs() > 1e-9 * lm {
            return Err(Error::Config(format!(
                "L·m = {lm} is not an integer; the truncation line must pass through lattice nodes"
            )));
        }
        let cells = cells as usize;
        let h = spec.extension() / m as f64;
        let tol = 1e-9 * h;

        let mut rows = Vec::with_capacity(cells);
        let mut nodes = Vec::new();
        for j in 0..cells {
            // strict inequalities of the half domain: i < j, j − i < m, j < L·m;
            // the full domain only drops the diagonal restriction
            let lo = (j + 1).saturating_sub(m);
            let hi = match spec.reduction() {
                Reduction::HalfDomain => j.checked_sub(1),
                Reduction::FullDomain => Some((j + m - 1).min(cells - 1)),
            };
            let start = nodes.len();
            let len = match hi {
                Some(hi) if hi >= lo => hi - lo + 1,
                _ => 0,
            };
            for i in lo..lo + len {
                let p = Point::new(i as f64 * h, j as f64 * h);
                let tag = classify_boundary(p, spec, tol)?;
                debug_assert!(!tag.is_dirichlet(), "dof ({i}, {j}) tagged {tag:?}");
                nodes.push(Node { i, j, tag });
            }
            rows.push(RowSpan { start, lo, len });
        }
        Ok(Self {
            spec: *spec,
            m,
            cells,
            h,
            rows,
            nodes,
        })
    }

    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn cells_per_extension(&self) -> usize {
        self.m
    }

    /// Number of cells along the wire, `L·m`.
    pub fn cells_along_wire(&self) -> usize {
        self.cells
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn dof_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn dof_index(&self, i: usize, j: usize) -> Option<usize> {
        let row = self.rows.get(j)?;
        if i >= row.lo && i < row.lo + row.len {
            Some(row.start + i - row.lo)
        } else {
            None
        }
    }

    pub fn point(&self, node: &Node) -> Point {
        Point::new(node.i as f64 * self.h, node.j as f64 * self.h)
    }

    /// Tag of any lattice node in the closed domain, `None` outside it.
    pub fn lattice_tag(&self, i: usize, j: usize) -> Option<BoundaryTag> {
        let p = Point::new(i as f64 * self.h, j as f64 * self.h);
        classify_boundary(p, &self.spec, 1e-9 * self.h).ok()
    }

    /// Mass weight (dual-cell area) of a degree of freedom.
    pub fn mass_weight(&self, node: &Node) -> f64 {
        let h2 = self.h * self.h;
        match node.tag {
            BoundaryTag::RobinWireEnd if node.i == 0 && node.j == 0 => 0.25 * h2,
            BoundaryTag::RobinWireEnd => 0.5 * h2,
            _ => h2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum SigmaKind {
    Zero,
    Constant { value: f64 },
    Step { value: f64, until: f64 },
    Table { values: Vec<f64> },
}

/// Strength `σ(y) = v(0, y) ≥ 0` of the repulsive interaction at the wire end,
/// in units of `ħ²/(2 m_e d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaProfile(SigmaKind);

impl Serialize for SigmaProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SigmaProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn check_strength(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::Validation(format!(
            "{name} must be finite and nonnegative, got {v}"
        )))
    }
}

impl SigmaProfile {
    pub fn zero() -> Self {
        Self(SigmaKind::Zero)
    }

    pub fn constant(value: f64) -> Result<Self> {
        Ok(Self(SigmaKind::Constant {
            value: check_strength("sigma", value)?,
        }))
    }

    /// `σ = value` on `[0, until)` and zero beyond.
    pub fn step(value: f64, until: f64) -> Result<Self> {
        let value = check_strength("sigma", value)?;
        let until = check_strength("step position", until)?;
        if until > 1.0 {
            return Err(Error::Validation(format!(
                "step position {until} lies beyond the pair extension"
            )));
        }
        Ok(Self(SigmaKind::Step { value, until }))
    }

    /// Samples at equal spacing on `[0, 1]`, held constant around each sample.
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Validation(
                "a sigma table needs at least two samples".into(),
            ));
        }
        for &v in &values {
            check_strength("sigma sample", v)?;
        }
        Ok(Self(SigmaKind::Table { values }))
    }

    /// `σ(y)` for `y ∈ [0, 1]` measured in units of the pair extension.
    pub fn eval(&self, y: f64) -> f64 {
        match &self.0 {
            SigmaKind::Zero => 0.0,
            SigmaKind::Constant { value } => *value,
            SigmaKind::Step { value, until } => {
                if y < *until {
                    *value
                } else {
                    0.0
                }
            }
            SigmaKind::Table { values } => {
                let last = values.len() - 1;
                let k = (y.clamp(0.0, 1.0) * last as f64).round() as usize;
                values[k.min(last)]
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match &self.0 {
            SigmaKind::Zero => 0.0,
            SigmaKind::Constant { value } => *value,
            SigmaKind::Step { value, until } => {
                if *until > 0.0 {
                    *value
                } else {
                    0.0
                }
            }
            SigmaKind::Table { values } => values.iter().copied().fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm() == 0.0
    }
}

impl Default for SigmaProfile {
    fn default() -> Self {
        Self::zero()
    }
}

impl fmt::Display for SigmaProfile {
    /// Canonical text form, accepted back by `FromStr`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            SigmaKind::Zero => write!(f, "0"),
            SigmaKind::Constant { value } => write!(f, "const:{value:?}"),
            SigmaKind::Step { value, until } => write!(f, "step:{value:?},{until:?}"),
            SigmaKind::Table { values } => {
                write!(f, "table:")?;
                for (k, v) in values.iter().enumerate() {
                    if k > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v:?}")?;
                }
                Ok(())
            }
        }
    }
}

fn parse_number(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("invalid number {s:?} in sigma profile")))
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_number).collect()
}

impl FromStr for SigmaProfile {
    type Err = Error;

    /// Accepts `0`, `zero`, a bare number, `const:c`, `step:c,y0` or `table:v0,v1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("zero") {
            return Ok(Self::zero());
        }
        let Some((kind, rest)) = s.split_once(':') else {
            let v = parse_number(s)?;
            return if v == 0.0 {
                check_strength("sigma", v).map(|_| Self::zero())
            } else {
                Self::constant(v)
            };
        };
        match kind.trim() {
            "const" => Self::constant(parse_number(rest)?),
            "step" => match parse_numbers(rest)?.as_slice() {
                [value, until] => Self::step(*value, *until),
                _ => Err(Error::Config(format!(
                    "step profile takes two numbers, got {rest:?}"
                ))),
            },
            "table" => Self::table(parse_numbers(rest)?),
            other => Err(Error::Config(format!("unknown sigma profile kind {other:?}"))),
        }
    }
}

/// The discrete form pair `(S, W)` for one grid and interaction profile.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    stiffness: CsrMatrix,
    mass: Vec<f64>,
    grid: Option<Grid>,
    sigma: SigmaProfile,
}

pub fn assemble_operator(grid: &Grid, sigma: &SigmaProfile) -> Result<SparseOperator> {
    SparseOperator::assemble(grid, sigma)
}

impl SparseOperator {
    pub fn assemble(grid: &Grid, sigma: &SigmaProfile) -> Result<Self> {
        let h = grid.spacing();
        let d = grid.spec().extension();
        let mut rows = Vec::with_capacity(grid.dof_count());
        let mut mass = Vec::with_capacity(grid.dof_count());
        let full = grid.spec().reduction() == Reduction::FullDomain;

        for (a, node) in grid.nodes().iter().enumerate() {
            let (i, j) = (node.i as isize, node.j as isize);
            let mut row = Vec::with_capacity(5);
            let mut diag = 0.0;
            for (di, dj) in [(1isize, 0isize), (-1, 0), (0, 1), (0, -1)] {
                let (ni, nj) = (i + di, j + dj);
                if ni < 0 || nj < 0 {
                    continue;
                }
                let (ni, nj) = (ni as usize, nj as usize);
                // edges along x = 0 (and y = 0 on the full domain) carry half weight
                let boundary_edge = (di == 0 && node.i == 0) || (dj == 0 && node.j == 0 && full);
                let w = if boundary_edge { 0.5 } else { 1.0 };
                diag += w;
                if let Some(b) = grid.dof_index(ni, nj) {
                    row.push((b, -w));
                }
            }

            if node.tag == BoundaryTag::RobinWireEnd {
                // σ(y) h per wire-end edge through the node; the full-domain
                // corner sits on two edges of half length each
                let coord = |k: usize| k as f64 * h / d;
                let strength = match (node.i, node.j) {
                    (0, 0) => sigma.eval(0.0),
                    (0, jj) => sigma.eval(coord(jj)),
                    (ii, _) => sigma.eval(coord(ii)),
                };
                // σ is measured in units of ħ²/(2 m_e d)
                let term = strength * h / d;
                if !(term >= 0.0 && term.is_finite()) {
                    return Err(Error::Validation(format!(
                        "interaction strength must be nonnegative, got {term} at node ({}, {})",
                        node.i, node.j
                    )));
                }
                diag += term;
            }
            row.push((a, diag));
            rows.push(row);
            mass.push(grid.mass_weight(node));
        }

        Ok(Self {
            stiffness: CsrMatrix::from_rows(rows),
            mass,
            grid: Some(grid.clone()),
            sigma: sigma.clone(),
        })
    }

    /// A system given directly by its matrices, without an underlying grid.
    pub fn from_parts(stiffness: CsrMatrix, mass: Vec<f64>) -> Result<Self> {
        if stiffness.dim() != mass.len() {
            return Err(Error::Config(format!(
                "stiffness is {n}x{n} but {m} mass weights were given",
                n = stiffness.dim(),
                m = mass.len()
            )));
        }
        if mass.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Validation("mass weights must be positive".into()));
        }
        Ok(Self {
            stiffness,
            mass,
            grid: None,
            sigma: SigmaProfile::zero(),
        })
    }

    pub fn stiffness(&self) -> &CsrMatrix {
        &self.stiffness
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn sigma(&self) -> &SigmaProfile {
        &self.sigma
    }

    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let den: f64 = x.iter().zip(&self.mass).map(|(v, w)| w * v * v).sum();
        self.stiffness.quadratic_form(x) / den
    }

    /// Row of `W⁻¹ S` for degree of freedom `r`: the finite-difference stencil.
    pub fn stencil_row(&self, r: usize) -> Vec<(usize, f64)> {
        self.stiffness.row(r).map(|(c, v)| (c, v / self.mass[r])).collect()
    }
}
