//! Grand-canonical ideal Bose gas of pairs on a wire of length `L`.
//!
//! The pair spectrum is either the bound level `E₀` below the continuum
//! plus the rectangle levels of the strip, the rectangle levels alone, or an
//! explicit list from the eigensolver. Every occupation uses the Bose factor
//! `1/(e^x − 1)`. Levels are stored relative to the lowest one, and the
//! chemical potential is carried as its distance `δ = E_min − μ > 0` so that
//! nearly condensed states keep full precision.

mod polylog;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::threshold_dimless;

pub use polylog::{li_half_exp, zeta, zeta_half_minus};

/// Bound on the truncated tail of every occupation sum (per unit length).
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Relative density tolerance of [`solve_mu`].
pub const DEFAULT_DENSITY_TOL: f64 = 1e-10;
/// Relative accuracy of the infinite-wire excited density.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

const MAX_BISECTIONS: usize = 400;
const MAX_DOUBLINGS: usize = 2000;

/// Mean occupation `1/(e^x − 1)` of a level `x/β` above the chemical potential.
pub fn bose_occupation(x: f64) -> f64 {
    1.0 / x.exp_m1()
}

/// Level `(k, l)` of the rectangle `[0, √2 L] × [0, 1/√2]` with Dirichlet
/// walls across the strip, Neumann at the wire end and Dirichlet at the far end.
pub fn rectangle_eigenvalue(k: usize, l: usize, length: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("k = 0 is not a level of the antisymmetric strip".into()));
    }
    if !(length.is_finite() && length > 0.0) {
        return Err(Error::Domain(format!("length must be positive, got {length}")));
    }
    let (k, l) = (k as f64, l as f64);
    Ok(2.0 * PI * PI * k * k + PI * PI * (2.0 * l + 1.0).powi(2) / (8.0 * length * length))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SpectrumModel {
    /// A single bound level `E₀ < 2π²` (independent of `L`) below the rectangle levels.
    Bound { e0: f64 },
    /// Rectangle levels only.
    NoBound,
    /// A finite list of levels, used as given.
    Explicit { levels: Vec<f64> },
}

impl SpectrumModel {
    pub fn bound(e0: f64) -> Result<Self> {
        if !(e0.is_finite() && e0 >= 0.0 && e0 < threshold_dimless()) {
            return Err(Error::Domain(format!(
                "bound level {e0} must lie in [0, 2π²)"
            )));
        }
        Ok(Self::Bound { e0 })
    }

    pub fn explicit(mut levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::Validation("explicit spectrum is empty".into()));
        }
        if let Some(bad) = levels.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::Validation(format!("level {bad} is not finite and nonnegative")));
        }
        levels.sort_by(f64::total_cmp);
        Ok(Self::Explicit { levels })
    }

    pub fn name(&self) -> &'static str {
        match self {
            SpectrumModel::Bound { .. } => "bound",
            SpectrumModel::NoBound => "nobound",
            SpectrumModel::Explicit { .. } => "explicit",
        }
    }
}

/// Rectangle rows kept in a [`LevelTable`]: `l` runs over `0..=l_max[k − 1]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cutoffs {
    pub k_max: usize,
    pub l_max: Vec<usize>,
}

/// The levels of a model at one `(β, L)`, truncated with a proven tail bound.
#[derive(Debug, Clone)]
pub struct LevelTable {
    beta: f64,
    length: f64,
    lowest: f64,
    /// `E − E_min` for every level except the lowest one.
    offsets: Vec<f64>,
    tail_bound: Option<f64>,
    cutoffs: Option<Cutoffs>,
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() && beta > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("inverse temperature must be positive, got {beta}")))
    }
}

fn check_length(length: f64) -> Result<()> {
    if length.is_finite() && length > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("wire length must be positive, got {length}")))
    }
}

/// Smallest `n` in `lo..` with `ok(n)`, for a predicate that stays true once true.
fn first_true(lo: usize, ok: impl Fn(usize) -> bool) -> usize {
    if ok(lo) {
        return lo;
    }
    let mut step = 1;
    while !ok(lo + step) {
        step *= 2;
    }
    let (mut bad, mut good) = (lo + step / 2, lo + step);
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if ok(mid) {
            good = mid;
        } else {
            bad = mid;
        }
    }
    good
}

/// Rectangle cutoffs such that the omitted occupations, at any `μ < e_min`,
/// sum to at most `tol · L`. Returns the cutoffs and the actual bound.
fn rectangle_cutoffs(beta: f64, length: f64, e_min: f64, tol: f64) -> (Cutoffs, f64) {
    let c = 2.0 * PI * PI;
    let a = PI * PI / (8.0 * length * length);
    let budget = tol * length;

    // rows k > K: Σ_l e^{−βa(2l+1)²} ≤ 1 + ¼√(π/(βa)), rows decay geometrically in k
    let row_mass = 1.0 + 0.25 * (PI / (beta * a)).sqrt();
    let k_tail = |k_max: usize| {
        let k1 = (k_max + 1) as f64;
        let x0 = beta * (c * k1 * k1 - e_min);
        let ratio = (-c * beta * (2.0 * k1 + 1.0)).exp();
        row_mass * (-x0).exp() / ((1.0 - ratio) * -(-x0).exp_m1())
    };
    let k_max = first_true(1, |k| k_tail(k) <= 0.5 * budget);
    let mut total = k_tail(k_max);

    // within row k, l > l_k: ∫ e^{−βa u²} du from u₀ = 2l_k + 1 bounds the sum
    let row_budget = 0.5 * budget / k_max as f64;
    let mut l_max = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let kf = k as f64;
        let l_tail = |l: usize| {
            let u0 = 2.0 * l as f64 + 1.0;
            let x0 = beta * (c * kf * kf + a * (u0 + 2.0).powi(2) - e_min);
            let gauss = (-beta * a * u0 * u0).exp() / (4.0 * beta * a * u0);
            (-beta * (c * kf * kf - e_min)).exp() * gauss / -(-x0).exp_m1()
        };
        let l = first_true(0, |l| l_tail(l) <= row_budget);
        total += l_tail(l);
        l_max.push(l);
    }
    (Cutoffs { k_max, l_max }, total / length)
}

impl LevelTable {
    /// Enumerates the levels of `model` at `(β, L)`. Rectangle families are
    /// cut so that the omitted occupations add at most `tol` to any density.
    pub fn build(model: &SpectrumModel, beta: f64, length: f64, tol: f64) -> Result<Self> {
        check_beta(beta)?;
        check_length(length)?;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Validation(format!("tail tolerance must lie in (0, 1), got {tol}")));
        }
        let rect = |e_min: f64, skip_ground: bool| {
            let (cut, bound) = rectangle_cutoffs(beta, length, e_min, tol);
            let mut offsets = Vec::with_capacity(cut.l_max.iter().map(|l| l + 1).sum());
            for (k, &lk) in (1..).zip(&cut.l_max) {
                for l in 0..=lk {
                    if skip_ground && k == 1 && l == 0 {
                        continue;
                    }
                    // rectangle_eigenvalue cannot fail here: k ≥ 1, L > 0
                    offsets.push(rectangle_eigenvalue(k, l, length).unwrap() - e_min);
                }
            }
            (offsets, cut, bound)
        };
        let (lowest, offsets, cutoffs, tail_bound) = match model {
            SpectrumModel::Bound { e0 } => {
                let (offsets, cut, bound) = rect(*e0, false);
                (*e0, offsets, Some(cut), Some(bound))
            }
            SpectrumModel::NoBound => {
                let e_min = rectangle_eigenvalue(1, 0, length)?;
                let (offsets, cut, bound) = rect(e_min, true);
                (e_min, offsets, Some(cut), Some(bound))
            }
            SpectrumModel::Explicit { levels } => {
                let lowest = levels[0];
                (lowest, levels[1..].iter().map(|e| e - lowest).collect(), None, None)
            }
        };
        Ok(Self {
            beta,
            length,
            lowest,
            offsets,
            tail_bound,
            cutoffs,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn lowest(&self) -> f64 {
        self.lowest
    }

    /// Number of levels kept, the lowest one included.
    pub fn len(&self) -> usize {
        self.offsets.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Proven bound on the omitted density; `None` for an explicit list.
    pub fn tail_bound(&self) -> Option<f64> {
        self.tail_bound
    }

    pub fn cutoffs(&self) -> Option<&Cutoffs> {
        self.cutoffs.as_ref()
    }

    /// Occupation of the lowest level at `δ = E_min − μ`.
    pub fn ground_occupation(&self, delta: f64) -> f64 {
        bose_occupation(self.beta * delta)
    }

    /// Summed occupation of all other levels.
    pub fn excited_occupation(&self, delta: f64) -> f64 {
        // smallest terms first
        self.offsets
            .iter()
            .rev()
            .map(|&off| bose_occupation(self.beta * (off + delta)))
            .sum()
    }

    pub fn density_at_gap(&self, delta: f64) -> f64 {
        (self.ground_occupation(delta) + self.excited_occupation(delta)) / self.length
    }

    pub fn density(&self, mu: f64) -> Result<f64> {
        let delta = self.lowest - mu;
        if !(delta > 0.0) {
            return Err(Error::Domain(format!(
                "chemical potential {mu} is not below the lowest level {}",
                self.lowest
            )));
        }
        Ok(self.density_at_gap(delta))
    }

    /// `δ = E_min − μ` with `|ρ(δ) − ρ| ≤ tol·ρ`, by bisection on `log δ`.
    pub fn solve_gap(&self, rho: f64, tol: f64) -> Result<f64> {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Validation(format!("pair density must be positive, got {rho}")));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Validation(format!("density tolerance must lie in (0, 1), got {tol}")));
        }
        let close = |d: f64| (d - rho).abs() <= tol * rho;

        let mut hi = (10.0 / self.beta).max(10.0);
        let mut doublings = 0;
        let mut d_hi = self.density_at_gap(hi);
        while d_hi >= rho {
            if close(d_hi) {
                return Ok(hi);
            }
            doublings += 1;
            if doublings > MAX_DOUBLINGS {
                return Err(Error::Iteration(format!("no lower bracket for density {rho}")));
            }
            hi *= 2.0;
            d_hi = self.density_at_gap(hi);
        }
        let mut lo = 4.0 * f64::EPSILON * self.lowest.abs().max(1.0);
        let d_lo = self.density_at_gap(lo);
        if d_lo < rho && !close(d_lo) {
            return Err(Error::Iteration(format!(
                "density {rho} exceeds what is reachable at this precision ({d_lo:.6e})"
            )));
        }
        for _ in 0..MAX_BISECTIONS {
            let mid = (lo * hi).sqrt();
            let d = self.density_at_gap(mid);
            if close(d) {
                return Ok(mid);
            }
            if d > rho {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Iteration(format!(
            "density {rho} not matched to {tol:e} within {MAX_BISECTIONS} bisection steps"
        )))
    }
}

/// `(1/L) Σ_n 1/(e^{β(E_n − μ)} − 1)` over the model's levels.
pub fn total_density(beta: f64, mu: f64, length: f64, model: &SpectrumModel) -> Result<f64> {
    LevelTable::build(model, beta, length, DEFAULT_TAIL_TOL)?.density(mu)
}

/// Chemical potential reproducing the density `rho` to relative accuracy `tol`.
pub fn solve_mu(beta: f64, rho: f64, length: f64, model: &SpectrumModel, tol: f64) -> Result<f64> {
    let table = LevelTable::build(model, beta, length, DEFAULT_TAIL_TOL)?;
    Ok(table.lowest() - table.solve_gap(rho, tol)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasSolution {
    pub beta: f64,
    pub rho: f64,
    #[serde(rename = "L")]
    pub length: f64,
    pub mu: f64,
    /// `E_min − μ`, kept separately because `μ` rounds away small gaps.
    pub delta: f64,
    pub lowest_level: f64,
    pub n0: f64,
    #[serde(rename = "n0_per_L")]
    pub n0_per_length: f64,
    pub rho_ex: f64,
    pub levels: usize,
    pub tail_bound: Option<f64>,
}

impl GasSolution {
    /// `|n0/L + ρ_ex − ρ| / ρ`
    pub fn closure_error(&self) -> f64 {
        (self.n0_per_length + self.rho_ex - self.rho).abs() / self.rho
    }
}

fn solve_table(table: &LevelTable, rho: f64, tol: f64) -> Result<GasSolution> {
    let delta = table.solve_gap(rho, tol)?;
    let n0 = table.ground_occupation(delta);
    Ok(GasSolution {
        beta: table.beta,
        rho,
        length: table.length,
        mu: table.lowest - delta,
        delta,
        lowest_level: table.lowest,
        n0,
        n0_per_length: n0 / table.length,
        rho_ex: table.excited_occupation(delta) / table.length,
        levels: table.len(),
        tail_bound: table.tail_bound,
    })
}

pub fn condensate_stats(
    beta: f64,
    rho: f64,
    length: f64,
    model: &SpectrumModel,
    tol: f64,
) -> Result<GasSolution> {
    solve_table(&LevelTable::build(model, beta, length, DEFAULT_TAIL_TOL)?, rho, tol)
}

/// One [`GasSolution`] per wire length; lengths must be strictly ascending.
pub fn thermo_sweep(
    beta: f64,
    rho: f64,
    lengths: &[f64],
    model: &SpectrumModel,
    tol: f64,
) -> Result<Vec<GasSolution>> {
    if lengths.is_empty() || !lengths.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::Config("wire lengths must be non-empty and strictly ascending".into()));
    }
    lengths
        .iter()
        .map(|&l| condensate_stats(beta, rho, l, model, tol))
        .collect()
}

/// Excited pair density of the infinite wire,
/// `(1/√(2πβ)) Σ_{n≥1} Li_{1/2}(e^{−β(2π²n² − μ)})`, to relative accuracy `tol`.
pub fn rho_ex_infinity(beta: f64, mu: f64, tol: f64) -> Result<f64> {
    check_beta(beta)?;
    let c = threshold_dimless();
    if !(mu < c) {
        return Err(Error::Domain(format!(
            "excited density diverges for mu = {mu} ≥ 2π²"
        )));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Validation(format!("series tolerance must lie in (0, 1), got {tol}")));
    }
    let t = |n: usize| beta * (c * (n * n) as f64 - mu);
    let first = li_half_exp(t(1), 0.0);
    let term_tol = 1e-3 * tol * first;
    let mut sum = first;
    let mut n = 1usize;
    loop {
        // for t ≥ 1: Li_{1/2}(e^{-t}) ≤ e^{-t}/(1 − e^{-1}), successive n shrink geometrically
        let t_next = t(n + 1);
        if t_next >= 1.0 {
            let ratio = (-c * beta * (2.0 * n as f64 + 3.0)).exp();
            let tail = (-t_next).exp() / ((1.0 - (-1.0f64).exp()) * (1.0 - ratio));
            if tail <= 0.5 * tol * sum {
                break;
            }
        }
        n += 1;
        sum += li_half_exp(t(n), term_tol);
    }
    Ok(sum / (2.0 * PI * beta).sqrt())
}

/// `ρ_crit(β) = ρ_ex^∞(β, E₀)`; finite only while `E₀` lies below the continuum.
pub fn critical_density(beta: f64, e0: f64) -> Result<f64> {
    if !(e0 < threshold_dimless()) {
        return Err(Error::Domain(format!(
            "E0 = {e0} is not below the threshold: no gap, the critical density is infinite"
        )));
    }
    rho_ex_infinity(beta, e0, DEFAULT_SERIES_TOL)
}
