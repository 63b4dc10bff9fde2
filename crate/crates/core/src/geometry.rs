//! The pair configuration domain and its boundary segments.
//!
//! The two electrons live on `[0, L]` and may never be farther apart than the
//! pair extension `d`, so the configuration space is the truncated pencil
//!
//! ```text
//! Ω_L = { (x, y) : 0 ≤ x, y ≤ L,  |x − y| ≤ d }
//! ```
//!
//! Antisymmetric wave functions vanish on the diagonal, so the spectral
//! problem is posed on the half domain
//!
//! ```text
//! T_L = { (x, y) : 0 ≤ x ≤ y,  y − x ≤ d,  y ≤ L }
//! ```
//!
//! with a Dirichlet condition on `y = x`. All computations use `d = 1`; a
//! different `d` only appears when checking scaling laws.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    /// Mirror image under exchange of the two electrons.
    pub fn swapped(self) -> Self {
        Self::new(self.y, self.x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// `T_L`, the antisymmetric sector. Used for every production solve.
    HalfDomain,
    /// The whole of `Ω_L`; only used to cross-check the half-domain reduction.
    FullDomain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    extension: f64,
    length: f64,
    reduction: Reduction,
}

impl DomainSpec {
    /// Half domain with `d = 1` and wire length `length` (in units of `d`).
    pub fn half(length: f64) -> Result<Self> {
        Self::with_extension(1.0, length, Reduction::HalfDomain)
    }

    pub fn full(length: f64) -> Result<Self> {
        Self::with_extension(1.0, length, Reduction::FullDomain)
    }

    pub fn with_extension(extension: f64, length: f64, reduction: Reduction) -> Result<Self> {
        if !(extension.is_finite() && extension > 0.0) {
            return Err(Error::Domain(format!(
                "pair extension must be positive, got {extension}"
            )));
        }
        if !(length.is_finite() && length > extension) {
            return Err(Error::Domain(format!(
                "wire length {length} must exceed the pair extension {extension}"
            )));
        }
        Ok(Self {
            extension,
            length,
            reduction,
        })
    }

    /// Same shape with every length multiplied by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        Self::with_extension(self.extension * s, self.length * s, self.reduction)
    }

    pub fn extension(&self) -> f64 {
        self.extension
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Wire length measured in units of the pair extension.
    pub fn length_ratio(&self) -> f64 {
        self.length / self.extension
    }

    pub fn reduction(&self) -> Reduction {
        self.reduction
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundaryTag {
    Interior,
    /// `|y − x| = d`: the pair cannot stretch further.
    DirichletPair,
    /// `y = x`: node of every antisymmetric function (half domain only).
    DirichletDiagonal,
    /// `x = L` or `y = L`: artificial wall of the finite wire.
    DirichletTruncation,
    /// `x = 0` (or `y = 0` on the full domain): one electron at the wire end,
    /// where the pair interaction acts.
    RobinWireEnd,
}

impl BoundaryTag {
    pub fn is_dirichlet(self) -> bool {
        matches!(
            self,
            BoundaryTag::DirichletPair | BoundaryTag::DirichletDiagonal | BoundaryTag::DirichletTruncation
        )
    }
}

/// Membership in the closed domain selected by `spec`.
pub fn contains(p: Point, spec: &DomainSpec) -> bool {
    contains_within(p, spec, 0.0)
}

/// Membership with every defining inequality relaxed by `tol`.
pub fn contains_within(p: Point, spec: &DomainSpec, tol: f64) -> bool {
    let (d, l) = (spec.extension, spec.length);
    match spec.reduction {
        Reduction::HalfDomain => {
            p.x >= -tol && p.x <= p.y + tol && p.y - p.x <= d + tol && p.y <= l + tol
        }
        Reduction::FullDomain => {
            p.x >= -tol
                && p.y >= -tol
                && p.x <= l + tol
                && p.y <= l + tol
                && (p.x - p.y).abs() <= d + tol
        }
    }
}

/// Boundary segment of `p`, with Dirichlet taking precedence over Robin at corners.
///
/// Among Dirichlet segments the order is pair line, diagonal, truncation.
pub fn classify_boundary(p: Point, spec: &DomainSpec, tol: f64) -> Result<BoundaryTag> {
    if !contains_within(p, spec, tol) {
        return Err(Error::Domain(format!(
            "point ({}, {}) lies outside the domain (tol {tol})",
            p.x, p.y
        )));
    }
    let (d, l) = (spec.extension, spec.length);
    let near = |a: f64, b: f64| (a - b).abs() <= tol;

    let tag = match spec.reduction {
        Reduction::HalfDomain => {
            if near(p.y - p.x, d) {
                BoundaryTag::DirichletPair
            } else if near(p.y, p.x) {
                BoundaryTag::DirichletDiagonal
            } else if near(p.y, l) {
                BoundaryTag::DirichletTruncation
            } else if near(p.x, 0.0) {
                BoundaryTag::RobinWireEnd
            } else {
                BoundaryTag::Interior
            }
        }
        Reduction::FullDomain => {
            if near((p.y - p.x).abs(), d) {
                BoundaryTag::DirichletPair
            } else if near(p.x, l) || near(p.y, l) {
                BoundaryTag::DirichletTruncation
            } else if near(p.x, 0.0) || near(p.y, 0.0) {
                BoundaryTag::RobinWireEnd
            } else {
                BoundaryTag::Interior
            }
        }
    };
    Ok(tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn half8() -> DomainSpec {
        DomainSpec::half(8.0).unwrap()
    }

    #[test]
    fn membership_examples() {
        let spec = half8();
        assert!(contains(Point::new(0.2, 0.5), &spec));
        assert!(!contains(Point::new(0.5, 0.2), &spec));
        assert!(!contains(Point::new(0.3, 1.5), &spec));
    }

    #[test]
    fn classification_examples() {
        let spec = half8();
        let tag = |x, y| classify_boundary(Point::new(x, y), &spec, 1e-12).unwrap();
        assert_eq!(tag(0.5, 0.5), BoundaryTag::DirichletDiagonal);
        assert_eq!(tag(0.0, 0.5), BoundaryTag::RobinWireEnd);
        assert_eq!(tag(0.0, 1.0), BoundaryTag::DirichletPair);
        assert_eq!(tag(0.0, 0.0), BoundaryTag::DirichletDiagonal);
        assert_eq!(tag(7.5, 8.0), BoundaryTag::DirichletTruncation);
        assert_eq!(tag(7.0, 8.0), BoundaryTag::DirichletPair);
        assert_eq!(tag(3.0, 3.5), BoundaryTag::Interior);
    }

    #[test]
    fn classification_outside_is_domain_error() {
        let err = classify_boundary(Point::new(0.5, 0.2), &half8(), 1e-9).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
        // within tolerance is accepted
        assert_eq!(
            classify_boundary(Point::new(-1e-10, 0.5), &half8(), 1e-9).unwrap(),
            BoundaryTag::RobinWireEnd
        );
    }

    #[test]
    fn full_domain_tags() {
        let spec = DomainSpec::full(4.0).unwrap();
        let tag = |x, y| classify_boundary(Point::new(x, y), &spec, 1e-12).unwrap();
        assert_eq!(tag(0.5, 0.5), BoundaryTag::Interior);
        assert_eq!(tag(0.5, 0.0), BoundaryTag::RobinWireEnd);
        assert_eq!(tag(0.0, 0.0), BoundaryTag::RobinWireEnd);
        assert_eq!(tag(1.0, 0.0), BoundaryTag::DirichletPair);
        assert_eq!(tag(4.0, 3.5), BoundaryTag::DirichletTruncation);
    }

    #[test]
    fn length_must_exceed_extension() {
        assert!(DomainSpec::half(1.0).is_err());
        assert!(DomainSpec::half(0.5).is_err());
        assert!(DomainSpec::with_extension(0.0, 2.0, Reduction::HalfDomain).is_err());
        assert!(DomainSpec::half(1.25).is_ok());
    }

    proptest! {
        #[test]
        fn half_domain_is_upper_part_of_full(x in -0.5f64..9.0, y in -0.5f64..9.0) {
            let half = half8();
            let full = DomainSpec::full(8.0).unwrap();
            let p = Point::new(x, y);
            prop_assert_eq!(contains(p, &half), contains(p, &full) && x <= y);
        }

        #[test]
        fn tags_survive_exact_rescaling(i in 0usize..=64, off in 0usize..=8, k in 0usize..4) {
            // lattice points of an m = 8 grid on T_8, scaled by powers of two
            let s = [0.25, 0.5, 2.0, 4.0][k];
            let spec = half8();
            let j = (i + off).min(64);
            let p = Point::new(i as f64 / 8.0, j as f64 / 8.0);
            prop_assert!(contains(p, &spec));
            let tag = classify_boundary(p, &spec, 0.0).unwrap();
            let scaled = classify_boundary(p.scaled(s), &spec.scaled(s).unwrap(), 0.0).unwrap();
            prop_assert_eq!(tag, scaled);
        }
    }
}
