mod support;

use pencil_bec::discretize::{build_grid, SigmaProfile, SparseOperator};
use pencil_bec::eigensolve::{dense_reference, lowest_eigenpairs, EigenOptions};
use pencil_bec::geometry::{DomainSpec, Reduction};
use pencil_bec::spectral::{gap, solve_levels, threshold_dimless};
use pencil_bec::units::{self, CODATA_2018};
use support::rel;

fn levels(extension: f64, length: f64, m: usize, sigma: &SigmaProfile) -> Vec<f64> {
    let spec = DomainSpec::with_extension(extension, extension * length, Reduction::HalfDomain).unwrap();
    let op = SparseOperator::assemble(&build_grid(&spec, m).unwrap(), sigma).unwrap();
    dense_reference(&op).unwrap()
}

#[test]
fn eigenvalues_scale_with_inverse_square_extension() {
    for sigma in [SigmaProfile::zero(), SigmaProfile::constant(3.0).unwrap()] {
        let base = levels(1.0, 3.0, 6, &sigma);
        for s in [0.5, 2.0, 0.3] {
            let scaled = levels(s, 3.0, 6, &sigma);
            for (a, b) in base.iter().zip(&scaled) {
                assert!(rel(b * s * s, *a) < 1e-12, "s = {s}");
            }
        }
    }
}

#[test]
fn physical_gap_times_d_squared_is_invariant() {
    let r = lowest_eigenpairs(
        &SparseOperator::assemble(&build_grid(&DomainSpec::half(4.0).unwrap(), 8).unwrap(), &SigmaProfile::zero()).unwrap(),
        1,
        &EigenOptions::default(),
    )
    .unwrap();
    let g = gap(r.eigenvalues[0]).unwrap();
    let products: Vec<f64> = [0.5e-8, 1e-8, 2e-8]
        .iter()
        .map(|&d| units::to_physical(g, d).unwrap() * d * d)
        .collect();
    for p in &products {
        assert!(rel(*p, products[1]) < 1e-12);
    }
    // the same quantity through the gap-ratio route
    let ratio = g / threshold_dimless();
    let via_ratio = CODATA_2018.gap_from_d(1e-8, ratio).unwrap() * CODATA_2018.electron_volt * 1e-16;
    assert!(rel(via_ratio, products[1]) < 1e-12);
}

#[test]
fn solve_levels_reports_grid_on_failure() {
    let err = solve_levels(2.3, 4, &SigmaProfile::zero(), 1, &EigenOptions::default()).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("L = 2.3"));
}
