//! Oracles shared by the integration tests. Nothing here calls into the
//! series or solvers under test.
#![allow(dead_code)]

use std::f64::consts::PI;

use pencil_bec::discretize::SparseOperator;
use pencil_bec::sparse::CsrMatrix;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let x = r * XGK[k];
        let s = f(c - x) + f(c + x);
        kron += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    (kron * r, (kron - gauss).abs() * r)
}

/// Adaptive Gauss–Kronrod 7-15 on `[a, b]`.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> f64 {
    fn go(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: usize) -> f64 {
        let (v, err) = gk15(f, a, b);
        if err <= tol || depth > 60 {
            return v;
        }
        let m = 0.5 * (a + b);
        go(f, a, m, 0.5 * tol, depth + 1) + go(f, m, b, 0.5 * tol, depth + 1)
    }
    let (rough, _) = gk15(f, a, b);
    go(f, a, b, rel_tol * rough.abs().max(1e-300), 0)
}

/// Excited density of the infinite wire by direct quadrature of
/// `(√2/π) Σ_n ∫_0^∞ dy / (e^{β(2π²n² + y² − μ)} − 1)`.
pub fn rho_ex_quadrature(beta: f64, mu: f64) -> f64 {
    let mut total = 0.0;
    for n in 1.. {
        let t = beta * (2.0 * PI * PI * (n * n) as f64 - mu);
        assert!(t > 0.0);
        let f = move |y: f64| 1.0 / (t + beta * y * y).exp_m1();
        // the integrand is below e^{-60} of its peak past y_max
        let y_max = ((60.0 + t.max(0.0)) / beta).sqrt();
        let knee = (t / beta).sqrt().min(y_max);
        let mut term = 0.0;
        let mut a = 0.0;
        for b in [0.1 * knee, knee, 4.0 * knee, y_max] {
            if b > a {
                term += integrate(&f, a, b.min(y_max), 1e-13);
                a = b.min(y_max);
            }
        }
        total += term;
        if term < 1e-18 * total {
            break;
        }
    }
    2f64.sqrt() / PI * total
}

/// Dirichlet Laplacian on the unit square, `N − 1` interior nodes per side,
/// in the same form/mass convention as the pencil assembly.
pub fn unit_square(n: usize) -> SparseOperator {
    let side = n - 1;
    let h = 1.0 / n as f64;
    let idx = |i: usize, j: usize| j * side + i;
    let mut rows = Vec::new();
    for j in 0..side {
        for i in 0..side {
            let mut row = vec![(idx(i, j), 4.0)];
            if i > 0 {
                row.push((idx(i - 1, j), -1.0));
            }
            if i + 1 < side {
                row.push((idx(i + 1, j), -1.0));
            }
            if j > 0 {
                row.push((idx(i, j - 1), -1.0));
            }
            if j + 1 < side {
                row.push((idx(i, j + 1), -1.0));
            }
            rows.push(row);
        }
    }
    SparseOperator::from_parts(CsrMatrix::from_rows(rows), vec![h * h; side * side]).unwrap()
}

/// Exact discrete eigenvalues of [`unit_square`], ascending.
pub fn unit_square_levels(n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let s = |p: usize| (p as f64 * PI * h / 2.0).sin().powi(2);
    let mut v: Vec<f64> = (1..n)
        .flat_map(|p| (1..n).map(move |q| 4.0 / (h * h) * (s(p) + s(q))))
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Continuum Dirichlet eigenvalues of the unit square, ascending.
pub fn unit_square_continuum(count: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (1..20)
        .flat_map(|p| (1..20).map(move |q| PI * PI * ((p * p + q * q) as f64)))
        .collect();
    v.sort_by(f64::total_cmp);
    v.truncate(count);
    v
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Coarse grids checked against the dense reference: `(L, m, sigma)`.
pub fn coarse_corpus(max_dof: usize) -> Vec<(f64, usize, &'static str)> {
    let profiles = ["0", "2.5", "step:10,0.5", "table:0,1,4,9"];
    let mut out = Vec::new();
    let mut p = 0;
    for &l in &[2.0, 3.0, 4.0, 8.0] {
        for &m in &[4usize, 6, 8, 12, 16] {
            let n = pencil_bec::spectral::grid_size(l, m).unwrap();
            if n <= max_dof {
                out.push((l, m, profiles[p % profiles.len()]));
                p += 1;
            }
        }
    }
    out
}

/// Generalized eigenvalues of the full-domain assembly restricted to
/// functions with `φ(x, y) = −φ(y, x)`, together with the half-domain dense spectrum.
pub fn antisymmetric_pair(length: f64, m: usize, sigma: &str) -> (Vec<f64>, Vec<f64>) {
    use nalgebra::{DMatrix, SymmetricEigen};
    use pencil_bec::discretize::{build_grid, SigmaProfile};
    use pencil_bec::eigensolve::dense_reference;
    use pencil_bec::geometry::DomainSpec;

    let sigma: SigmaProfile = sigma.parse().unwrap();
    let full = build_grid(&DomainSpec::full(length).unwrap(), m).unwrap();
    let half = build_grid(&DomainSpec::half(length).unwrap(), m).unwrap();
    let full_op = SparseOperator::assemble(&full, &sigma).unwrap();
    let half_op = SparseOperator::assemble(&half, &sigma).unwrap();

    let (nf, nh) = (full.dof_count(), half.dof_count());
    let mut q = DMatrix::zeros(nf, nh);
    let r = 0.5f64.sqrt();
    for (c, node) in half.nodes().iter().enumerate() {
        let a = full.dof_index(node.i, node.j).expect("half node in full grid");
        let b = full.dof_index(node.j, node.i).expect("mirror node in full grid");
        q[(a, c)] = r;
        q[(b, c)] = -r;
    }
    let s = full_op.stiffness().to_dense();
    let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(full_op.mass()));
    let sq = q.transpose() * &s * &q;
    let wq = q.transpose() * &w * &q;
    let scale = DMatrix::from_fn(nh, nh, |i, j| {
        sq[(i, j)] / (wq[(i, i)] * wq[(j, j)]).sqrt()
    });
    let mut sector: Vec<f64> = SymmetricEigen::new(scale).eigenvalues.iter().copied().collect();
    sector.sort_by(f64::total_cmp);
    (sector, dense_reference(&half_op).unwrap())
}
