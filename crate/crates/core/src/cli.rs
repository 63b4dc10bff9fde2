//! Command-line front end: subcommands, run records and the result cache.
//!
//! Every expensive command produces a [`RunRecord`] whose `params_digest`
//! hashes all inputs (solver seed and tolerances included) together with the
//! tool version. Records are cached in one directory per digest and the
//! printed output is always rendered from the record, so a cache hit and a
//! fresh run print the same bytes.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bec::{self, GasSolution, SpectrumModel};
use crate::discretize::SigmaProfile;
use crate::eigensolve::{EigenOptions, SolverMethod, DEFAULT_MAX_ITER, DEFAULT_SEED, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::spectral::{self, ConvergenceTable, GammaResult};
use crate::units::{self, CODATA_2018, QUOTED_EXTENSION_ORDER_M};

pub const SCHEMA: &str = "pencil-bec/run-record";
pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
/// Overrides the cache location.
pub const CACHE_ENV: &str = "PENCIL_BEC_CACHE_DIR";

/// Grid and resolution used to extrapolate `E₀` when `bec` is not given one.
pub const E0_LENGTH: f64 = 8.0;
pub const E0_GRIDS: [usize; 2] = [32, 64];

#[derive(Debug, Parser)]
#[command(name = "pencil-bec", version, about = "Bound electron pairs on a wire: spectrum, gap and pair condensation")]
pub struct Cli {
    /// Cache directory (default: $XDG_CACHE_HOME/pencil-bec or ~/.cache/pencil-bec)
    #[arg(long, global = true, env = CACHE_ENV)]
    pub cache_dir: Option<PathBuf>,

    /// Neither read nor write the cache
    #[arg(long, global = true)]
    pub no_cache: bool,

    /// Write the result to this file instead of stdout
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Lowest eigenvalues of the pair Hamiltonian on one grid
    Spectrum(SpectrumArgs),
    /// E0 and E1 over lists of wire lengths and resolutions, with extrapolation
    Converge(ConvergeArgs),
    /// Constant interaction strength that lifts the ground state to the threshold
    Gamma(GammaArgs),
    /// Condensate fraction of the ideal pair gas over a sequence of wire lengths
    Bec(BecArgs),
    /// Conversions between the pair extension and the energy gap
    Units(UnitsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodArg {
    Auto,
    Lobpcg,
    Dense,
}

impl From<MethodArg> for SolverMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Auto => SolverMethod::Auto,
            MethodArg::Lobpcg => SolverMethod::Lobpcg,
            MethodArg::Dense => SolverMethod::Dense,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
}

#[derive(Debug, Clone, Serialize)]
struct SolverParams {
    tol: f64,
    max_iter: usize,
    seed: u64,
    method: MethodArg,
}

impl SolverArgs {
    fn params(&self, tol: f64) -> SolverParams {
        SolverParams {
            tol,
            max_iter: self.max_iter,
            seed: self.seed,
            method: self.method,
        }
    }

    fn options(&self, tol: f64) -> EigenOptions {
        EigenOptions {
            tol,
            max_iter: self.max_iter,
            seed: self.seed,
            method: self.method.into(),
            guard: None,
            keep_vectors: false,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SpectrumArgs {
    /// Wire length in units of the pair extension
    #[arg(long = "L", default_value_t = 8.0)]
    pub length: f64,
    /// Grid cells per pair extension
    #[arg(long, default_value_t = 64)]
    pub m: usize,
    /// Number of eigenvalues
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Wire-end interaction: 0, a constant, const:c, step:c,y0 or table:v0,v1,...
    #[arg(long, default_value = "0")]
    pub sigma: String,
    /// Residual tolerance of the eigensolver
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Physical pair extension in meters; adds eigenvalues in eV
    #[arg(long)]
    pub d_meters: Option<f64>,
    #[arg(long = "out", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct ConvergeArgs {
    #[arg(long = "L-list", default_value = "4,8,16")]
    pub lengths: String,
    #[arg(long = "m-list", default_value = "16,32,64")]
    pub ms: String,
    #[arg(long, default_value = "0")]
    pub sigma: String,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long = "out", value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GammaArgs {
    #[arg(long = "L", default_value_t = 8.0)]
    pub length: f64,
    /// One or more resolutions, reported side by side
    #[arg(long, default_value = "64")]
    pub m: String,
    /// Relative distance of the target below the threshold, and bisection tolerance
    #[arg(long, default_value_t = 1e-3)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub eig_tol: f64,
    #[arg(long = "out", value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Bound,
    Nobound,
    Explicit,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("density").args(["rho", "rho_mult"]))]
pub struct BecArgs {
    /// Dimensionless inverse temperature
    #[arg(long, default_value_t = 1.0)]
    pub beta: f64,
    /// Pair density per unit pair extension
    #[arg(long)]
    pub rho: Option<f64>,
    /// Pair density as a multiple of the critical density
    #[arg(long)]
    pub rho_mult: Option<f64>,
    #[arg(long = "L-list", default_value = "1e3,1e4,1e5")]
    pub lengths: String,
    #[arg(long, value_enum, default_value_t = ModelArg::Bound)]
    pub model: ModelArg,
    /// Ground-state energy; extrapolated from the eigensolver when omitted
    #[arg(long)]
    pub e0: Option<f64>,
    /// Relative tolerance of the density constraint
    #[arg(long, default_value_t = bec::DEFAULT_DENSITY_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub eig_tol: f64,
    /// Resolution of the eigensolves behind the explicit model
    #[arg(long, default_value_t = 16)]
    pub explicit_m: usize,
    /// Number of eigenvalues kept by the explicit model
    #[arg(long, default_value_t = 40)]
    pub explicit_levels: usize,
    #[arg(long = "out", value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Clone, Args)]
#[command(group = clap::ArgGroup::new("input").args(["gap_ev", "d_meters", "show_constants"]).required(true))]
pub struct UnitsArgs {
    /// Energy gap in eV; reports the pair extension
    #[arg(long)]
    pub gap_ev: Option<f64>,
    /// Pair extension in meters; reports the energy gap
    #[arg(long)]
    pub d_meters: Option<f64>,
    /// Gap as a fraction of the threshold
    #[arg(long, default_value_t = 1.0)]
    pub gap_ratio: f64,
    #[arg(long)]
    pub show_constants: bool,
    #[arg(long = "out", value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Comma-separated list of numbers, e.g. `4,8,16` or `1e3, 1e4`.
pub fn parse_list<T: FromStr>(text: &str) -> Result<Vec<T>> {
    if text.trim().is_empty() {
        return Err(Error::Config("empty list".into()));
    }
    text.split(',')
        .map(|item| {
            let item = item.trim();
            item.parse::<T>()
                .map_err(|_| Error::Config(format!("invalid list item {item:?} in {text:?}")))
        })
        .collect()
}

/// Structured result of one command, the unit of caching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub schema: String,
    pub schema_version: u32,
    pub tool_version: String,
    pub command: String,
    pub params: Value,
    pub params_digest: String,
    pub outputs: Value,
}

/// Written next to a cached record; kept out of the record so that records stay
/// byte-identical across runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunTimestamps {
    pub created_unix: u64,
    pub elapsed_seconds: f64,
}

/// Hex SHA-256 of the canonical JSON of command, parameters and versions.
pub fn params_digest(command: &str, params: &Value) -> String {
    let canonical = json!({
        "command": command,
        "params": params,
        "schema_version": SCHEMA_VERSION,
        "tool_version": TOOL_VERSION,
    });
    // serde_json objects are key-sorted, so this encoding is canonical
    hex::encode(Sha256::digest(canonical.to_string().as_bytes()))
}

impl RunRecord {
    pub fn new(command: &str, params: Value, outputs: Value) -> Self {
        Self {
            schema: SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            tool_version: TOOL_VERSION.into(),
            command: command.into(),
            params_digest: params_digest(command, &params),
            params,
            outputs,
        }
    }

    /// Parses and checks a record: schema, version and digest must match.
    pub fn from_json(text: &str) -> Result<Self> {
        let rec: RunRecord = serde_json::from_str(text)?;
        if rec.schema != SCHEMA {
            return Err(Error::Validation(format!("unknown record schema {:?}", rec.schema)));
        }
        if rec.schema_version != SCHEMA_VERSION {
            return Err(Error::Validation(format!(
                "record schema version {} is not supported",
                rec.schema_version
            )));
        }
        let digest = params_digest(&rec.command, &rec.params);
        if digest != rec.params_digest {
            return Err(Error::Validation("record digest does not match its parameters".into()));
        }
        Ok(rec)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("records serialize");
        s.push('\n');
        s
    }

    pub fn outputs_as<T: DeserializeOwned>(&self) -> Result<T> {
        Ok(serde_json::from_value(self.outputs.clone())?)
    }
}

#[derive(Debug, Clone)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// `dir`, else `$XDG_CACHE_HOME/pencil-bec`, else `~/.cache/pencil-bec`.
    pub fn locate(dir: Option<PathBuf>) -> Self {
        let root = dir
            .or_else(|| std::env::var_os("XDG_CACHE_HOME").map(|d| PathBuf::from(d).join("pencil-bec")))
            .or_else(|| std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache/pencil-bec")))
            .unwrap_or_else(|| PathBuf::from(".pencil-bec-cache"));
        Self::new(root)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entry(&self, digest: &str) -> PathBuf {
        self.root.join(digest)
    }

    /// A stored record, or `None` on a miss. Unreadable entries count as misses.
    pub fn load(&self, digest: &str) -> Option<RunRecord> {
        let text = fs::read_to_string(self.entry(digest).join("record.json")).ok()?;
        RunRecord::from_json(&text).ok().filter(|r| r.params_digest == digest)
    }

    /// Writes into a temporary directory and renames it into place.
    pub fn store(&self, record: &RunRecord, stamps: &RunTimestamps) -> Result<()> {
        fs::create_dir_all(&self.root)?;
        let nonce = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_nanos()).unwrap_or(0);
        let tmp = self
            .root
            .join(format!(".tmp-{}-{}-{nonce}", record.params_digest, std::process::id()));
        fs::create_dir_all(&tmp)?;
        fs::write(tmp.join("record.json"), record.to_json())?;
        fs::write(tmp.join("meta.json"), serde_json::to_string_pretty(stamps)?)?;
        let dest = self.entry(&record.params_digest);
        if let Err(e) = fs::rename(&tmp, &dest) {
            let _ = fs::remove_dir_all(&tmp);
            // another process got there first
            if !dest.join("record.json").exists() {
                return Err(e.into());
            }
        }
        Ok(())
    }
}

/// What a command produced, plus notes for stderr.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub text: String,
    pub warnings: Vec<String>,
    pub cache_hit: bool,
}

fn csv_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        String::new()
    }
}

fn cached_run(
    ctx: &Context,
    command: &str,
    params: Value,
    compute: impl FnOnce() -> Result<Value>,
) -> Result<(RunRecord, bool)> {
    let digest = params_digest(command, &params);
    if let Some(cache) = &ctx.cache {
        if let Some(rec) = cache.load(&digest) {
            return Ok((rec, true));
        }
    }
    let start = Instant::now();
    let outputs = compute()?;
    let record = RunRecord::new(command, params, outputs);
    // one more round trip so fresh and cached output share a code path
    let record = RunRecord::from_json(&record.to_json())?;
    if let Some(cache) = &ctx.cache {
        let stamps = RunTimestamps {
            created_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            elapsed_seconds: start.elapsed().as_secs_f64(),
        };
        cache.store(&record, &stamps)?;
    }
    Ok((record, false))
}

struct Context {
    cache: Option<Cache>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct PhysicalSpectrum {
    d_meters: f64,
    energy_unit_ev: f64,
    eigenvalues_ev: Vec<f64>,
    gap_ev: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpectrumOutput {
    dof: usize,
    method: SolverMethod,
    iterations: usize,
    threshold: f64,
    count_bound: f64,
    count_below: usize,
    eigenvalues: Vec<f64>,
    residuals: Vec<f64>,
    ratio_to_threshold: Vec<f64>,
    gap: Option<f64>,
    physical: Option<PhysicalSpectrum>,
}

fn cmd_spectrum(ctx: &Context, a: &SpectrumArgs) -> Result<Rendered> {
    if a.format == Format::Text {
        return Err(Error::Config("spectrum writes json or csv".into()));
    }
    let sigma: SigmaProfile = a.sigma.parse()?;
    let params = json!({
        "L": a.length,
        "m": a.m,
        "k": a.k,
        "sigma": sigma.to_string(),
        "d_meters": a.d_meters,
        "solver": a.solver.params(a.tol),
    });
    let (rec, hit) = cached_run(ctx, "spectrum", params, || {
        let r = spectral::solve_levels(a.length, a.m, &sigma, a.k, &a.solver.options(a.tol))?;
        let t = spectral::threshold_dimless();
        let gap = spectral::gap(r.eigenvalues[0]).ok();
        let physical = a
            .d_meters
            .map(|d| -> Result<PhysicalSpectrum> {
                let unit = CODATA_2018.to_physical_ev(1.0, d)?;
                Ok(PhysicalSpectrum {
                    d_meters: d,
                    energy_unit_ev: unit,
                    eigenvalues_ev: r.eigenvalues.iter().map(|e| e * unit).collect(),
                    gap_ev: gap.map(|g| g * unit),
                })
            })
            .transpose()?;
        let dof = spectral::grid_size(a.length, a.m)?;
        Ok(serde_json::to_value(SpectrumOutput {
            dof,
            method: r.method,
            iterations: r.iterations,
            threshold: t,
            count_bound: spectral::counting_bound(),
            count_below: spectral::count_below(&r, spectral::counting_bound()),
            ratio_to_threshold: r.eigenvalues.iter().map(|e| e / t).collect(),
            eigenvalues: r.eigenvalues,
            residuals: r.residuals,
            gap,
            physical,
        })?)
    })?;
    let text = match a.format {
        Format::Csv => {
            let out: SpectrumOutput = rec.outputs_as()?;
            let mut s = String::from("index,eigenvalue,residual,ratio_to_threshold");
            if out.physical.is_some() {
                s.push_str(",eigenvalue_ev");
            }
            s.push('\n');
            for (i, e) in out.eigenvalues.iter().enumerate() {
                let _ = write!(
                    s,
                    "{i},{},{},{}",
                    csv_float(*e),
                    csv_float(out.residuals[i]),
                    csv_float(out.ratio_to_threshold[i])
                );
                if let Some(p) = &out.physical {
                    let _ = write!(s, ",{}", csv_float(p.eigenvalues_ev[i]));
                }
                s.push('\n');
            }
            s
        }
        _ => rec.to_json(),
    };
    Ok(Rendered {
        text,
        warnings: vec![],
        cache_hit: hit,
    })
}

fn cmd_converge(ctx: &Context, a: &ConvergeArgs) -> Result<Rendered> {
    if a.format == Format::Text {
        return Err(Error::Config("converge writes json or csv".into()));
    }
    let lengths: Vec<f64> = parse_list(&a.lengths)?;
    let ms: Vec<usize> = parse_list(&a.ms)?;
    let sigma: SigmaProfile = a.sigma.parse()?;
    let params = json!({
        "L_list": lengths,
        "m_list": ms,
        "sigma": sigma.to_string(),
        "solver": a.solver.params(a.tol),
    });
    let (rec, hit) = cached_run(ctx, "converge", params, || {
        let table = spectral::convergence_study(&lengths, &ms, &sigma, &a.solver.options(a.tol))?;
        Ok(serde_json::to_value(table)?)
    })?;
    let table: ConvergenceTable = rec.outputs_as()?;
    let mut warnings = Vec::new();
    if let Some(x) = table.extrapolated.as_ref().filter(|x| x.flagged) {
        warnings.push(format!(
            "observed convergence order ratio {:.4} at L = {} lies outside [3.5, 4.5]; \
             the extrapolated E0 assumes h^2 behaviour",
            x.order_ratio.unwrap_or(f64::NAN),
            x.length
        ));
    }
    let text = match a.format {
        Format::Csv => {
            let mut s = String::from("L,m,E0,E1,count,ratio_to_threshold\n");
            for r in &table.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}",
                    r.length,
                    r.m,
                    csv_float(r.e0),
                    csv_float(r.e1),
                    r.count,
                    csv_float(r.ratio_to_threshold)
                );
            }
            if let Some(x) = &table.extrapolated {
                let _ = writeln!(
                    s,
                    "{},richardson,{},,,{}",
                    x.length,
                    csv_float(x.e0),
                    csv_float(x.ratio_to_threshold)
                );
            }
            s
        }
        _ => rec.to_json(),
    };
    Ok(Rendered {
        text,
        warnings,
        cache_hit: hit,
    })
}

fn cmd_gamma(ctx: &Context, a: &GammaArgs) -> Result<Rendered> {
    if a.format == Format::Text {
        return Err(Error::Config("gamma writes json or csv".into()));
    }
    if !(a.tol > 0.0 && a.tol < 1.0) {
        return Err(Error::Validation(format!("tolerance must lie in (0, 1), got {}", a.tol)));
    }
    let ms: Vec<usize> = parse_list(&a.m)?;
    let params = json!({
        "L": a.length,
        "m_list": ms,
        "tol": a.tol,
        "solver": a.solver.params(a.eig_tol),
    });
    let (rec, hit) = cached_run(ctx, "gamma", params, || {
        let opts = a.solver.options(a.eig_tol);
        let results = ms
            .iter()
            .map(|&m| spectral::find_gamma(a.length, m, a.tol, &opts))
            .collect::<Result<Vec<_>>>()?;
        Ok(serde_json::to_value(results)?)
    })?;
    let text = match a.format {
        Format::Csv => {
            let results: Vec<GammaResult> = rec.outputs_as()?;
            let mut s = String::from("L,m,sigma_below,sigma_star,e0_below,e0_at_star,target\n");
            for g in &results {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    g.length,
                    g.m,
                    csv_float(g.sigma_below),
                    csv_float(g.sigma_star),
                    csv_float(g.e0_below),
                    csv_float(g.e0_at_star),
                    csv_float(g.target)
                );
            }
            s
        }
        _ => rec.to_json(),
    };
    Ok(Rendered {
        text,
        warnings: vec![],
        cache_hit: hit,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct BecOutput {
    model: String,
    beta: f64,
    rho: f64,
    e0: Option<f64>,
    rho_crit: Option<f64>,
    rows: Vec<GasSolution>,
}

/// Richardson-extrapolated `E₀` at `L = 8` from the two default grids.
pub fn default_e0(opts: &EigenOptions) -> Result<f64> {
    let table = spectral::convergence_study(&[E0_LENGTH], &E0_GRIDS, &SigmaProfile::zero(), opts)?;
    Ok(table.extrapolated.expect("two grids give an extrapolation").e0)
}

fn cmd_bec(ctx: &Context, a: &BecArgs) -> Result<Rendered> {
    if a.format == Format::Text {
        return Err(Error::Config("bec writes json or csv".into()));
    }
    let lengths: Vec<f64> = parse_list(&a.lengths)?;
    if let Some(rho) = a.rho {
        if !(rho.is_finite() && rho > 0.0) {
            return Err(Error::Validation(format!("pair density must be positive, got {rho}")));
        }
    }
    if let Some(mult) = a.rho_mult {
        if !(mult.is_finite() && mult > 0.0) {
            return Err(Error::Validation(format!("density multiple must be positive, got {mult}")));
        }
    }
    if a.rho.is_none() && a.rho_mult.is_none() {
        return Err(Error::Config("give either --rho or --rho-mult".into()));
    }
    if !(a.beta.is_finite() && a.beta > 0.0) {
        return Err(Error::Validation(format!("inverse temperature must be positive, got {}", a.beta)));
    }
    let mut params = json!({
        "beta": a.beta,
        "rho": a.rho,
        "rho_mult": a.rho_mult,
        "L_list": lengths,
        "model": a.model,
        "e0": a.e0,
        "tol": a.tol,
        "solver": a.solver.params(a.eig_tol),
    });
    if a.model == ModelArg::Explicit {
        params["explicit"] = json!({ "m": a.explicit_m, "levels": a.explicit_levels });
    }
    let (rec, hit) = cached_run(ctx, "bec", params, || {
        let opts = a.solver.options(a.eig_tol);
        let needs_e0 = a.model == ModelArg::Bound || a.rho_mult.is_some();
        let e0 = match (a.e0, needs_e0) {
            (Some(e), _) => Some(e),
            (None, true) => Some(default_e0(&opts)?),
            (None, false) => None,
        };
        let rho_crit = e0.map(|e| bec::critical_density(a.beta, e)).transpose()?;
        let rho = match (a.rho, a.rho_mult, rho_crit) {
            (Some(r), _, _) => r,
            (None, Some(mult), Some(crit)) => mult * crit,
            _ => unreachable!("density source checked above"),
        };
        let rows = match a.model {
            ModelArg::Bound => {
                let model = SpectrumModel::bound(e0.expect("bound model has E0"))?;
                bec::thermo_sweep(a.beta, rho, &lengths, &model, a.tol)?
            }
            ModelArg::Nobound => bec::thermo_sweep(a.beta, rho, &lengths, &SpectrumModel::NoBound, a.tol)?,
            ModelArg::Explicit => {
                if !lengths.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::Config("wire lengths must be strictly ascending".into()));
                }
                lengths
                    .iter()
                    .map(|&l| {
                        let r = spectral::solve_levels(l, a.explicit_m, &SigmaProfile::zero(), a.explicit_levels, &opts)?;
                        let model = SpectrumModel::explicit(r.eigenvalues)?;
                        bec::condensate_stats(a.beta, rho, l, &model, a.tol)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(serde_json::to_value(BecOutput {
            model: format!("{:?}", a.model).to_lowercase(),
            beta: a.beta,
            rho,
            e0,
            rho_crit,
            rows,
        })?)
    })?;
    let text = match a.format {
        Format::Csv => {
            let out: BecOutput = rec.outputs_as()?;
            let mut s = String::from("L,beta,rho,mu,delta,n0,n0_per_L,rho_ex,rho_crit,levels\n");
            for g in &out.rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{}",
                    g.length,
                    csv_float(g.beta),
                    csv_float(g.rho),
                    csv_float(g.mu),
                    csv_float(g.delta),
                    csv_float(g.n0),
                    csv_float(g.n0_per_length),
                    csv_float(g.rho_ex),
                    out.rho_crit.map(csv_float).unwrap_or_default(),
                    g.levels
                );
            }
            s
        }
        _ => rec.to_json(),
    };
    Ok(Rendered {
        text,
        warnings: vec![],
        cache_hit: hit,
    })
}

#[derive(Debug, Clone, Serialize)]
struct UnitsOutput {
    gap_ratio: f64,
    gap_ev: Option<f64>,
    d_meters: Option<f64>,
    threshold_ev: Option<f64>,
    /// Literature order of `d` for the given gap, for comparison only.
    quoted_d_order_meters: Option<f64>,
    constants: Option<Value>,
}

fn cmd_units(a: &UnitsArgs) -> Result<Rendered> {
    let mut out = UnitsOutput {
        gap_ratio: a.gap_ratio,
        gap_ev: None,
        d_meters: None,
        threshold_ev: None,
        quoted_d_order_meters: None,
        constants: None,
    };
    if let Some(gap) = a.gap_ev {
        let d = units::d_from_gap(gap, a.gap_ratio)?;
        out.gap_ev = Some(gap);
        out.d_meters = Some(d);
        out.threshold_ev = Some(CODATA_2018.threshold_ev(d)?);
        out.quoted_d_order_meters = Some(QUOTED_EXTENSION_ORDER_M);
    } else if let Some(d) = a.d_meters {
        out.d_meters = Some(d);
        out.gap_ev = Some(units::gap_from_d(d, a.gap_ratio)?);
        out.threshold_ev = Some(CODATA_2018.threshold_ev(d)?);
    }
    let table = units::constants_table(&CODATA_2018);
    if a.show_constants {
        out.constants = Some(Value::Array(
            table
                .iter()
                .map(|(sym, v, unit, what)| json!({"symbol": sym, "value": v, "unit": unit, "description": what}))
                .collect(),
        ));
    }
    let text = match a.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&out)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::from("quantity,value,unit\n");
            let mut row = |q: &str, v: Option<f64>, u: &str| {
                if let Some(v) = v {
                    let _ = writeln!(s, "{q},{},{u}", csv_float(v));
                }
            };
            row("gap", out.gap_ev, "eV");
            row("d", out.d_meters, "m");
            row("threshold", out.threshold_ev, "eV");
            row("gap_ratio", Some(out.gap_ratio), "");
            row("quoted_d_order", out.quoted_d_order_meters, "m");
            if a.show_constants {
                for (sym, v, unit, _) in &table {
                    row(sym, Some(*v), unit);
                }
            }
            s
        }
        Format::Text => {
            let mut s = String::new();
            if let (Some(gap), Some(d)) = (out.gap_ev, out.d_meters) {
                let _ = writeln!(s, "gap          {gap:e} eV");
                let _ = writeln!(s, "gap ratio    {}", out.gap_ratio);
                let _ = writeln!(s, "d            {d:.6e} m");
                let _ = writeln!(s, "threshold    {:.6e} eV", out.threshold_ev.unwrap_or(f64::NAN));
                if let Some(q) = out.quoted_d_order_meters {
                    let _ = writeln!(
                        s,
                        "quoted order {q:e} m (computed d is {:.3e} times that)",
                        d / q
                    );
                }
            }
            if a.show_constants {
                for (sym, v, unit, what) in &table {
                    let _ = writeln!(s, "{sym:<16} {v:.10e} {unit:<6} {what}");
                }
            }
            s
        }
    };
    Ok(Rendered {
        text,
        warnings: vec![],
        cache_hit: false,
    })
}

/// Runs a parsed command line and returns what should be printed.
pub fn run(cli: &Cli) -> Result<Rendered> {
    let ctx = Context {
        cache: (!cli.no_cache).then(|| Cache::locate(cli.cache_dir.clone())),
    };
    let rendered = match &cli.command {
        Command::Spectrum(a) => cmd_spectrum(&ctx, a)?,
        Command::Converge(a) => cmd_converge(&ctx, a)?,
        Command::Gamma(a) => cmd_gamma(&ctx, a)?,
        Command::Bec(a) => cmd_bec(&ctx, a)?,
        Command::Units(a) => cmd_units(a)?,
    };
    if let Some(path) = &cli.output {
        fs::write(path, &rendered.text)?;
    }
    Ok(rendered)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list::<f64>("1e3, 1e4,1e5").unwrap(), vec![1e3, 1e4, 1e5]);
        assert_eq!(parse_list::<usize>("16,32").unwrap(), vec![16, 32]);
        assert!(parse_list::<usize>("16,,32").is_err());
        assert!(parse_list::<usize>("").is_err());
        assert!(parse_list::<usize>("1e3").is_err());
    }

    #[test]
    fn digest_is_stable_and_sensitive() {
        let p = json!({"L": 8.0, "m": 64});
        let q = json!({"m": 64, "L": 8.0});
        assert_eq!(params_digest("spectrum", &p), params_digest("spectrum", &q));
        assert_ne!(params_digest("spectrum", &p), params_digest("converge", &p));
        assert_ne!(params_digest("spectrum", &p), params_digest("spectrum", &json!({"L": 8.0, "m": 65})));
        assert_eq!(params_digest("spectrum", &p).len(), 64);
    }

    #[test]
    fn record_round_trip_and_tamper_check() {
        let rec = RunRecord::new("spectrum", json!({"L": 8.0}), json!({"eigenvalues": [0.1, 1.0 / 3.0]}));
        let back = RunRecord::from_json(&rec.to_json()).unwrap();
        assert_eq!(back, rec);
        let tampered = rec.to_json().replace("8.0", "9.0");
        assert!(matches!(RunRecord::from_json(&tampered), Err(Error::Validation(_))));
        assert!(RunRecord::from_json("{}").is_err());
    }

    #[test]
    fn cache_store_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let rec = RunRecord::new("gamma", json!({"L": 4.0}), json!([1, 2]));
        assert!(cache.load(&rec.params_digest).is_none());
        let stamps = RunTimestamps { created_unix: 0, elapsed_seconds: 0.0 };
        cache.store(&rec, &stamps).unwrap();
        assert_eq!(cache.load(&rec.params_digest).unwrap(), rec);
        // a second store of the same digest is harmless
        cache.store(&rec, &stamps).unwrap();
        let leftovers = fs::read_dir(dir.path()).unwrap().count();
        assert_eq!(leftovers, 1);
    }

    #[test]
    fn csv_floats_carry_17_digits() {
        assert_eq!(csv_float(0.1), "1.0000000000000001e-1");
        assert_eq!(csv_float(f64::NAN), "");
    }
}
