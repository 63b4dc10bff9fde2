//! Spectral quantities of the pair Hamiltonian: continuum threshold, energy
//! gap, bound-state counting, grid/length convergence and the interaction
//! strength that removes the bound state.
//!
//! In the energy unit `ħ²/(2 m_e d²)` the continuum starts at `2π²`: the
//! antisymmetric strip between `y = x` and `y = x + d` has width `d/√2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::discretize::{build_grid, SigmaProfile, SparseOperator};
use crate::eigensolve::{lowest_eigenpairs, EigenOptions, SpectrumResult};
use crate::error::{Error, Result};
use crate::geometry::DomainSpec;

/// Bound states are counted below this fraction of the threshold, so that
/// discretization error of levels sitting at the continuum edge cannot flip a count.
pub const BOUND_STATE_SAFETY: f64 = 0.995;

/// Proven bracket for `E₀` relative to the threshold.
pub const GROUND_STATE_BRACKET: (f64, f64) = (0.25, 0.93);

/// Acceptable band for the ratio of successive grid differences under a clean `h²` law.
pub const SECOND_ORDER_RATIO: (f64, f64) = (3.5, 4.5);

/// Largest constant interaction tried by [`find_gamma`].
pub const SIGMA_CAP: f64 = 1e6;

/// Bottom of the essential spectrum, `2π²`.
pub fn threshold_dimless() -> f64 {
    2.0 * PI * PI
}

/// Energy gap `2π² − E₀` between the bound pair and the continuum.
pub fn gap(e0: f64) -> Result<f64> {
    let t = threshold_dimless();
    if !(e0.is_finite() && e0 >= 0.0) {
        return Err(Error::Domain(format!("ground state energy {e0} is not admissible")));
    }
    if e0 > t {
        return Err(Error::Domain(format!(
            "E0 = {e0} lies above the threshold {t}: no bound state, gap undefined"
        )));
    }
    Ok(t - e0)
}

pub fn count_below(r: &SpectrumResult, bound: f64) -> usize {
    r.eigenvalues.iter().filter(|&&e| e < bound).count()
}

/// The bound used for counting bound states: `0.995 · 2π²`.
pub fn counting_bound() -> f64 {
    BOUND_STATE_SAFETY * threshold_dimless()
}

/// Lowest `k` levels on the half domain of length `length` with `m` cells per `d`.
pub fn solve_levels(
    length: f64,
    m: usize,
    sigma: &SigmaProfile,
    k: usize,
    opts: &EigenOptions,
) -> Result<SpectrumResult> {
    let run = || -> Result<SpectrumResult> {
        let grid = build_grid(&DomainSpec::half(length)?, m)?;
        let op = SparseOperator::assemble(&grid, sigma)?;
        lowest_eigenpairs(&op, k.min(op.dim()), opts)
    };
    run().map_err(|e| Error::AtGrid {
        length,
        m,
        source: Box::new(e),
    })
}

/// Unknowns of the half-domain grid at `(L, m)`.
pub fn grid_size(length: f64, m: usize) -> Result<usize> {
    Ok(build_grid(&DomainSpec::half(length)?, m)?.dof_count())
}

/// `E_fine + (E_fine − E_coarse) / (r² − 1)` for refinement ratio `r`.
pub fn richardson(coarse: f64, fine: f64, refinement: f64) -> f64 {
    fine + (fine - coarse) / (refinement * refinement - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub length: f64,
    pub m: usize,
    pub e0: f64,
    pub e1: f64,
    pub count: usize,
    pub ratio_to_threshold: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub length: f64,
    pub m_coarse: usize,
    pub m_fine: usize,
    pub e0: f64,
    /// `|extrapolated − finest|`
    pub error_estimate: f64,
    pub ratio_to_threshold: f64,
    /// `(E(m₁) − E(m₂)) / (E(m₂) − E(m₃))` over the three finest grids, when available.
    pub order_ratio: Option<f64>,
    /// Set when `order_ratio` falls outside the second-order band.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
    pub extrapolated: Option<Extrapolation>,
}

impl ConvergenceTable {
    pub fn rows_at(&self, length: f64) -> impl Iterator<Item = &ConvergenceRow> {
        self.rows.iter().filter(move |r| r.length == length)
    }

    /// `E₀` at fixed `m` never increases with the wire length.
    pub fn monotone_in_length(&self) -> bool {
        let ms: Vec<usize> = self.rows.iter().map(|r| r.m).collect();
        ms.iter().all(|&m| {
            let col: Vec<f64> = self.rows.iter().filter(|r| r.m == m).map(|r| r.e0).collect();
            col.windows(2).all(|w| w[1] <= w[0])
        })
    }

    pub fn extrapolation_in_bracket(&self) -> Option<bool> {
        self.extrapolated.as_ref().map(|x| {
            let (lo, hi) = GROUND_STATE_BRACKET;
            (lo..=hi).contains(&x.ratio_to_threshold)
        })
    }
}

/// Solves every `(L, m)` pair and extrapolates `E₀` in `h` at the largest `L`.
pub fn convergence_study(
    lengths: &[f64],
    ms: &[usize],
    sigma: &SigmaProfile,
    opts: &EigenOptions,
) -> Result<ConvergenceTable> {
    if lengths.is_empty() || ms.is_empty() {
        return Err(Error::Config("length and resolution lists must be non-empty".into()));
    }
    if !lengths.windows(2).all(|w| w[0] < w[1]) || !ms.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config("length and resolution lists must be strictly ascending".into()));
    }
    let t = threshold_dimless();
    let mut rows = Vec::with_capacity(lengths.len() * ms.len());
    for &length in lengths {
        for &m in ms {
            let r = solve_levels(length, m, sigma, 3, opts)?;
            let e1 = r.eigenvalues.get(1).copied().unwrap_or(f64::NAN);
            rows.push(ConvergenceRow {
                length,
                m,
                e0: r.eigenvalues[0],
                e1,
                count: count_below(&r, counting_bound()),
                ratio_to_threshold: r.eigenvalues[0] / t,
            });
        }
    }

    let largest = *lengths.last().unwrap();
    let finest: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.length == largest).collect();
    let extrapolated = (finest.len() >= 2).then(|| {
        let n = finest.len();
        let (coarse, fine) = (finest[n - 2], finest[n - 1]);
        let e0 = richardson(coarse.e0, fine.e0, fine.m as f64 / coarse.m as f64);
        let order_ratio = (n >= 3).then(|| (finest[n - 3].e0 - coarse.e0) / (coarse.e0 - fine.e0));
        let flagged = order_ratio.map_or(false, |q| {
            let (lo, hi) = SECOND_ORDER_RATIO;
            !(lo..=hi).contains(&q)
        });
        Extrapolation {
            length: largest,
            m_coarse: coarse.m,
            m_fine: fine.m,
            e0,
            error_estimate: (e0 - fine.e0).abs(),
            ratio_to_threshold: e0 / t,
            order_ratio,
            flagged,
        }
    });
    Ok(ConvergenceTable { rows, extrapolated })
}

/// One step of the interaction-strength search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaProbe {
    pub sigma: f64,
    pub e0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaResult {
    pub length: f64,
    pub m: usize,
    pub tol: f64,
    /// `(1 − tol) · 2π²`
    pub target: f64,
    /// Smallest tested constant strength with `E₀ ≥ target`.
    pub sigma_star: f64,
    /// Largest tested strength with `E₀ < target`; together with `sigma_star` this
    /// brackets the crossing.
    pub sigma_below: f64,
    pub e0_at_star: f64,
    pub e0_below: f64,
    pub probes: Vec<GammaProbe>,
}

impl GammaResult {
    pub fn bracket_width(&self) -> f64 {
        self.sigma_star - self.sigma_below
    }
}

/// Bisection over constant wire-end interactions for the strength at which the
/// ground state reaches `(1 − tol) · 2π²`.
///
/// The result depends on the grid and on `L`; it is a numerical counterpart of
/// the existence statement, not an approximation of a known constant.
pub fn find_gamma(length: f64, m: usize, tol: f64, opts: &EigenOptions) -> Result<GammaResult> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Validation(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let target = (1.0 - tol) * threshold_dimless();
    let mut probes = Vec::new();
    let mut e0_of = |sigma: f64| -> Result<f64> {
        let r = solve_levels(length, m, &SigmaProfile::constant(sigma)?, 1, opts)?;
        let e0 = r.eigenvalues[0];
        probes.push(GammaProbe { sigma, e0 });
        Ok(e0)
    };

    let (mut lo, mut e_lo) = (0.0, e0_of(0.0)?);
    if e_lo >= target {
        return Err(Error::Domain(format!(
            "no bound state without interaction at L = {length}, m = {m} (E0 = {e_lo})"
        )));
    }
    let (mut hi, mut e_hi) = (1.0, e0_of(1.0)?);
    while e_hi < target {
        if hi >= SIGMA_CAP {
            return Err(Error::SigmaCap { sigma_max: hi });
        }
        (lo, e_lo) = (hi, e_hi);
        hi *= 2.0;
        e_hi = e0_of(hi)?;
    }
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        let e = e0_of(mid)?;
        if e >= target {
            (hi, e_hi) = (mid, e);
        } else {
            (lo, e_lo) = (mid, e);
        }
    }
    Ok(GammaResult {
        length,
        m,
        tol,
        target,
        sigma_star: hi,
        sigma_below: lo,
        e0_at_star: e_hi,
        e0_below: e_lo,
        probes,
    })
}
