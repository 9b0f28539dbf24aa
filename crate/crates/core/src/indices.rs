//! Degree-based topological indices `I = sum over edges {i,j} of f(d_i, d_j)`.

use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::graph_model::SampledGraph;
use crate::numeric::NeumaierSum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndexError {
    #[error("index functions need positive arguments, got ({0}, {1})")]
    NonPositiveArgument(f64, f64),
    #[error("general Randić exponent must be a finite non-zero number, got {0}")]
    InvalidTau(f64),
    #[error("unknown index family {0:?} (expected randic, general-randic:<tau>, hyper-zagreb, forgotten, isi or harmonic)")]
    UnknownFamily(String),
}

/// A user-supplied index function with analytic first partials.
#[derive(Clone, Copy)]
pub struct CustomFamily {
    pub name: &'static str,
    pub f: fn(f64, f64) -> f64,
    pub fx: fn(f64, f64) -> f64,
    pub fy: fn(f64, f64) -> f64,
}

impl fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomFamily").field("name", &self.name).finish()
    }
}

impl PartialEq for CustomFamily {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.f as usize == other.f as usize
            && self.fx as usize == other.fx as usize
            && self.fy as usize == other.fy as usize
    }
}

/// A symmetric function `f(x, y)` of two degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IndexFamily {
    /// `(xy)^tau`, `tau != 0`. `tau = -1/2` is the Randić index.
    GeneralRandic { tau: f64 },
    /// `(x + y)^2`
    HyperZagreb,
    /// `x^2 + y^2`
    Forgotten,
    /// `xy / (x + y)`
    InverseSumIndeg,
    /// `2 / (x + y)`
    Harmonic,
    Custom(CustomFamily),
}

impl IndexFamily {
    pub fn randic() -> Self {
        IndexFamily::GeneralRandic { tau: -0.5 }
    }

    pub fn general_randic(tau: f64) -> Result<Self, IndexError> {
        if tau == 0.0 || !tau.is_finite() {
            return Err(IndexError::InvalidTau(tau));
        }
        Ok(IndexFamily::GeneralRandic { tau })
    }

    pub fn custom(
        name: &'static str,
        f: fn(f64, f64) -> f64,
        fx: fn(f64, f64) -> f64,
        fy: fn(f64, f64) -> f64,
    ) -> Self {
        IndexFamily::Custom(CustomFamily { name, f, fx, fy })
    }

    pub fn name(&self) -> &str {
        match self {
            IndexFamily::GeneralRandic { .. } => "general-randic",
            IndexFamily::HyperZagreb => "hyper-zagreb",
            IndexFamily::Forgotten => "forgotten",
            IndexFamily::InverseSumIndeg => "isi",
            IndexFamily::Harmonic => "harmonic",
            IndexFamily::Custom(c) => c.name,
        }
    }

    /// The family parameter (`tau`), if any.
    pub fn parameter(&self) -> Option<f64> {
        match self {
            IndexFamily::GeneralRandic { tau } => Some(*tau),
            _ => None,
        }
    }

    /// True for `(xy)^tau` with `|tau + 1/2| < tol`.
    pub fn is_randic_near(&self, tol: f64) -> bool {
        matches!(self, IndexFamily::GeneralRandic { tau } if (tau + 0.5).abs() < tol)
    }

    #[inline]
    pub(crate) fn f(&self, x: f64, y: f64) -> f64 {
        match *self {
            IndexFamily::GeneralRandic { tau } => (x * y).powf(tau),
            IndexFamily::HyperZagreb => {
                let s = x + y;
                s * s
            }
            IndexFamily::Forgotten => x * x + y * y,
            IndexFamily::InverseSumIndeg => x * y / (x + y),
            IndexFamily::Harmonic => 2.0 / (x + y),
            IndexFamily::Custom(c) => (c.f)(x, y),
        }
    }

    #[inline]
    pub(crate) fn fx(&self, x: f64, y: f64) -> f64 {
        match *self {
            IndexFamily::GeneralRandic { tau } => tau * x.powf(tau - 1.0) * y.powf(tau),
            IndexFamily::HyperZagreb => 2.0 * (x + y),
            IndexFamily::Forgotten => 2.0 * x,
            IndexFamily::InverseSumIndeg => {
                let s = x + y;
                y * y / (s * s)
            }
            IndexFamily::Harmonic => {
                let s = x + y;
                -2.0 / (s * s)
            }
            IndexFamily::Custom(c) => (c.fx)(x, y),
        }
    }

    #[inline]
    pub(crate) fn fy(&self, x: f64, y: f64) -> f64 {
        match *self {
            IndexFamily::Custom(c) => (c.fy)(x, y),
            // built-ins are symmetric
            _ => self.fx(y, x),
        }
    }

    /// `f(x, y)` for positive arguments.
    pub fn evaluate(&self, x: f64, y: f64) -> Result<f64, IndexError> {
        check_positive(x, y)?;
        Ok(self.f(x, y))
    }

    /// Analytic `df/dx`.
    pub fn partial_x(&self, x: f64, y: f64) -> Result<f64, IndexError> {
        check_positive(x, y)?;
        Ok(self.fx(x, y))
    }

    /// Analytic `df/dy`.
    pub fn partial_y(&self, x: f64, y: f64) -> Result<f64, IndexError> {
        check_positive(x, y)?;
        Ok(self.fy(x, y))
    }
}

fn check_positive(x: f64, y: f64) -> Result<(), IndexError> {
    if x > 0.0 && y > 0.0 {
        Ok(())
    } else {
        Err(IndexError::NonPositiveArgument(x, y))
    }
}

impl fmt::Display for IndexFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexFamily::GeneralRandic { tau } if *tau == -0.5 => write!(f, "randic"),
            IndexFamily::GeneralRandic { tau } => write!(f, "general-randic:{tau}"),
            other => write!(f, "{}", other.name()),
        }
    }
}

impl FromStr for IndexFamily {
    type Err = IndexError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "randic" => Ok(IndexFamily::randic()),
            "hyper-zagreb" => Ok(IndexFamily::HyperZagreb),
            "forgotten" => Ok(IndexFamily::Forgotten),
            "isi" => Ok(IndexFamily::InverseSumIndeg),
            "harmonic" => Ok(IndexFamily::Harmonic),
            _ => {
                let tau = s
                    .strip_prefix("general-randic:")
                    .ok_or_else(|| IndexError::UnknownFamily(s.to_string()))?;
                let tau: f64 = tau
                    .trim()
                    .parse()
                    .map_err(|_| IndexError::UnknownFamily(s.to_string()))?;
                IndexFamily::general_randic(tau)
            }
        }
    }
}

impl Serialize for IndexFamily {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for IndexFamily {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// `I = sum_{ {i,j} in E } f(d_i, d_j)`, using the degrees of the whole graph.
pub fn compute_index(graph: &SampledGraph, family: &IndexFamily) -> f64 {
    let degrees: Vec<f64> = graph.degrees().into_iter().map(|d| d as f64).collect();
    let n = graph.n();
    let mut acc = NeumaierSum::new();
    for i in 0..n {
        let row = graph.row(i);
        let di = degrees[i];
        for j in (i + 1)..n {
            if row[j] {
                acc.add(family.f(di, degrees[j]));
            }
        }
    }
    acc.value()
}

/// Several indices of one graph, sharing a single degree pass.
pub fn compute_indices(graph: &SampledGraph, families: &[IndexFamily]) -> Vec<f64> {
    let degrees: Vec<f64> = graph.degrees().into_iter().map(|d| d as f64).collect();
    let n = graph.n();
    let mut acc = vec![NeumaierSum::new(); families.len()];
    for i in 0..n {
        let row = graph.row(i);
        let di = degrees[i];
        for j in (i + 1)..n {
            if row[j] {
                for (a, fam) in acc.iter_mut().zip(families) {
                    a.add(fam.f(di, degrees[j]));
                }
            }
        }
    }
    acc.iter().map(NeumaierSum::value).collect()
}

/// Largest deviation between analytic and finite-difference partials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiniteDifferenceReport {
    pub max_relative_error: f64,
    pub worst_point: Option<(f64, f64)>,
    pub passed: bool,
}

/// Relative error threshold for [`check_partials_fd`].
pub const FD_PASS_THRESHOLD: f64 = 1e-4;

fn fd_step(v: f64) -> f64 {
    (1e-5 * v).max(1e-7)
}

fn relative_error(approx: f64, exact: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1e-300)
}

/// Compares both analytic partials against central differences on `grid`.
pub fn check_partials_fd(family: &IndexFamily, grid: &[(f64, f64)]) -> FiniteDifferenceReport {
    let mut worst = 0.0f64;
    let mut worst_point = None;
    for &(x, y) in grid {
        let hx = fd_step(x);
        let hy = fd_step(y);
        let dx = (family.f(x + hx, y) - family.f(x - hx, y)) / (2.0 * hx);
        let dy = (family.f(x, y + hy) - family.f(x, y - hy)) / (2.0 * hy);
        let err = relative_error(dx, family.fx(x, y)).max(relative_error(dy, family.fy(x, y)));
        if err > worst || worst_point.is_none() {
            worst = worst.max(err);
            worst_point = Some((x, y));
        }
    }
    FiniteDifferenceReport {
        max_relative_error: worst,
        worst_point,
        passed: worst < FD_PASS_THRESHOLD,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BUILTINS: [IndexFamily; 6] = [
        IndexFamily::GeneralRandic { tau: -0.5 },
        IndexFamily::GeneralRandic { tau: 1.3 },
        IndexFamily::HyperZagreb,
        IndexFamily::Forgotten,
        IndexFamily::InverseSumIndeg,
        IndexFamily::Harmonic,
    ];

    fn grid() -> Vec<(f64, f64)> {
        let axis = [1.0, 2.0, 5.0, 10.0, 100.0, 1000.0];
        axis.iter()
            .flat_map(|&x| axis.iter().map(move |&y| (x, y)))
            .collect()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(IndexFamily::randic().evaluate(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(IndexFamily::HyperZagreb.evaluate(2.0, 2.0).unwrap(), 16.0);
        assert_eq!(IndexFamily::InverseSumIndeg.evaluate(2.0, 2.0).unwrap(), 1.0);
        assert!(matches!(
            IndexFamily::HyperZagreb.evaluate(0.0, 2.0),
            Err(IndexError::NonPositiveArgument(..))
        ));
    }

    #[test]
    fn partial_examples() {
        assert_eq!(IndexFamily::HyperZagreb.partial_x(3.0, 5.0).unwrap(), 16.0);
        let r1 = IndexFamily::general_randic(1.0).unwrap();
        assert_eq!(r1.partial_x(2.0, 3.0).unwrap(), 3.0);
        assert_eq!(IndexFamily::InverseSumIndeg.partial_x(2.0, 2.0).unwrap(), 0.25);
        assert!(IndexFamily::Forgotten.partial_y(-1.0, 2.0).is_err());
    }

    #[test]
    fn symmetry_on_grid() {
        for fam in BUILTINS {
            for (x, y) in grid() {
                assert_eq!(fam.f(x, y), fam.f(y, x), "{fam} at ({x},{y})");
                assert_eq!(fam.fx(x, y), fam.fy(y, x), "{fam} partials at ({x},{y})");
            }
        }
    }

    #[test]
    fn partials_match_finite_differences() {
        for fam in BUILTINS {
            let rep = check_partials_fd(&fam, &grid());
            assert!(rep.passed, "{fam}: {rep:?}");
        }
        let rep = check_partials_fd(&IndexFamily::HyperZagreb, &[(1.0, 1.0), (10.0, 3.0), (100.0, 50.0)]);
        assert!(rep.max_relative_error < 1e-6, "{rep:?}");
        let rep = check_partials_fd(&IndexFamily::randic(), &[(1.0, 1.0)]);
        assert!(rep.max_relative_error < 1e-4);
    }

    #[test]
    fn forgotten_partial_y_ignores_x() {
        let fam = IndexFamily::Forgotten;
        for (x, y) in grid() {
            let h = fd_step(x);
            let d = (fam.fy(x + h, y) - fam.fy(x - h, y)) / (2.0 * h);
            assert!(d.abs() < 1e-9);
        }
    }

    #[test]
    fn fd_catches_wrong_partial() {
        fn f(x: f64, y: f64) -> f64 {
            x * y
        }
        fn bad(_x: f64, y: f64) -> f64 {
            1.01 * y
        }
        fn bad_y(x: f64, _y: f64) -> f64 {
            1.01 * x
        }
        let fam = IndexFamily::custom("bad", f, bad, bad_y);
        assert!(!check_partials_fd(&fam, &[(2.0, 3.0)]).passed);
    }

    #[test]
    fn selector_strings() {
        assert_eq!("randic".parse::<IndexFamily>().unwrap(), IndexFamily::randic());
        assert_eq!(
            "general-randic:1.5".parse::<IndexFamily>().unwrap(),
            IndexFamily::GeneralRandic { tau: 1.5 }
        );
        assert_eq!("isi".parse::<IndexFamily>().unwrap(), IndexFamily::InverseSumIndeg);
        assert_eq!(
            "general-randic:0".parse::<IndexFamily>(),
            Err(IndexError::InvalidTau(0.0))
        );
        assert!("zagreb".parse::<IndexFamily>().is_err());
        for fam in BUILTINS {
            assert_eq!(fam.to_string().parse::<IndexFamily>().unwrap(), fam);
        }
    }

    #[test]
    fn small_graph_indices() {
        let triangle = SampledGraph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let path = SampledGraph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let star = SampledGraph::from_edges(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        let r = IndexFamily::randic();
        for fam in BUILTINS {
            assert_eq!(compute_index(&SampledGraph::empty(5), &fam), 0.0);
        }
        assert!((compute_index(&triangle, &r) - 1.5).abs() < 1e-15);
        assert!((compute_index(&path, &r) - 2f64.sqrt()).abs() < 1e-15);
        assert!((compute_index(&star, &r) - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(compute_index(&triangle, &IndexFamily::HyperZagreb), 48.0);
        let all = compute_indices(&star, &BUILTINS);
        for (v, fam) in all.iter().zip(&BUILTINS) {
            assert_eq!(*v, compute_index(&star, fam));
        }
    }
}
