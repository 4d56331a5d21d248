//! Maximum-entropy ensembles of undirected networks.
//!
//! Every integer-weight model here factorizes over pairs. A pair links with
//! probability `p_ij`; a link carries weight `w >= 1` with probability
//! `R_ij^{w-1} (1 - R_ij)`, where `R_ij = y_i y_j` (zero for the binary model).
//! The continuous gravity baseline instead links every pair and draws an
//! exponential weight with mean `T g_i g_j`.

mod compare;
mod expected;
mod pair;
mod polylog;

use serde::{Deserialize, Serialize};

pub use compare::{compare_probs, ProbComparison};
pub use expected::{
    expected_anns, expected_annd, expected_clustering, expected_wclustering, ExpectedMetrics,
    ExpectedProperties,
};
pub use pair::{
    bcm_link_prob, ecm_pair, ecm_weight_moment, gdp_ts_pair, ts_pair, ts_weight_moment,
    wcm_gravity_weight,
};
pub use polylog::{poly_moment, shifted_moment, MAX_TERMS};

pub(crate) use pair::{ecm_link_prob_from_propensity, fermi, gdp_y, geometric_moment};

use crate::error::{Error, Result};
use crate::graph::GdpVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Bcm,
    Ecm,
    Ts,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Bcm => "bcm",
            ModelKind::Ecm => "ecm",
            ModelKind::Ts => "ts",
        }
    }
}

/// Link probability and expected weight of one pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairPrediction {
    pub p: f64,
    pub expected_w: f64,
}

/// The three scalars of the GDP-driven two-step model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MacroParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl MacroParams {
    /// Requires `a >= 0` (zero for an empty graph), `b > 0` and a finite `c`.
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && a >= 0.0) {
            return Err(Error::Domain(format!("a = {a} must be finite and >= 0")));
        }
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::Domain(format!("b = {b} must be finite and > 0")));
        }
        if !c.is_finite() {
            return Err(Error::Domain(format!("c = {c} must be finite")));
        }
        Ok(Self { a, b, c })
    }
}

/// Fitted hidden variables of one model.
///
/// The ECM is stored through the link propensity `xy_i = x_i y_i` rather than
/// `x_i` itself: a node whose strength equals its degree has `y_i = 0`
/// exactly while `x_i y_i` stays finite, so `x_i` is only defined when
/// `y_i > 0` (see [`FitnessVectors::ecm_x`]).
#[derive(Debug, Clone, PartialEq)]
pub enum FitnessVectors {
    Bcm { z: Vec<f64> },
    Ecm { xy: Vec<f64>, y: Vec<f64> },
    Ts { z: Vec<f64>, y: Vec<f64> },
}

impl FitnessVectors {
    /// ECM fitness from `(x, y)`.
    pub fn ecm_from_xy(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: y.len(),
            });
        }
        let xy = x.iter().zip(y).map(|(a, b)| a * b).collect();
        let fitted = FitnessVectors::Ecm { xy, y: y.to_vec() };
        fitted.validate()?;
        Ok(fitted)
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            FitnessVectors::Bcm { .. } => ModelKind::Bcm,
            FitnessVectors::Ecm { .. } => ModelKind::Ecm,
            FitnessVectors::Ts { .. } => ModelKind::Ts,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            FitnessVectors::Bcm { z } => z.len(),
            FitnessVectors::Ecm { xy, .. } => xy.len(),
            FitnessVectors::Ts { z, .. } => z.len(),
        }
    }

    /// The propensity driving link creation: `z` for BCM and TS, `x y` for
    /// the ECM.
    pub fn link_fitness(&self) -> &[f64] {
        match self {
            FitnessVectors::Bcm { z } | FitnessVectors::Ts { z, .. } => z,
            FitnessVectors::Ecm { xy, .. } => xy,
        }
    }

    pub fn y(&self) -> Option<&[f64]> {
        match self {
            FitnessVectors::Bcm { .. } => None,
            FitnessVectors::Ecm { y, .. } | FitnessVectors::Ts { y, .. } => Some(y),
        }
    }

    /// `x_i = (x_i y_i) / y_i` for an ECM fit; `None` where `y_i = 0` and the
    /// node is linked, zero for isolated nodes.
    pub fn ecm_x(&self) -> Option<Vec<Option<f64>>> {
        match self {
            FitnessVectors::Ecm { xy, y } => Some(
                xy.iter()
                    .zip(y)
                    .map(|(&u, &yi)| match (u == 0.0, yi > 0.0) {
                        (true, _) => Some(0.0),
                        (false, true) => Some(u / yi),
                        (false, false) => None,
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Checks `z, xy >= 0` finite, `y >= 0` finite, and `y_i y_j < 1` for every pair.
    pub fn validate(&self) -> Result<()> {
        for &v in self.link_fitness() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!(
                    "link fitness {v} must be finite and >= 0"
                )));
            }
        }
        if let Some(y) = self.y() {
            if y.len() != self.n() {
                return Err(Error::DimensionMismatch {
                    expected: self.n(),
                    found: y.len(),
                });
            }
            for &v in y {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::Domain(format!("y = {v} must be finite and >= 0")));
                }
            }
            if !crate::solvers::pair_products_below_one(y) {
                return Err(Error::Domain(
                    "every pairwise product y_i y_j must be below 1".into(),
                ));
            }
        }
        Ok(())
    }
}

/// How the weight of a realized link is distributed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightLaw {
    /// Every link has weight 1.
    Binary,
    /// `P(w) = R^{w-1} (1 - R)` for `w >= 1`, carrying the ratio `R`.
    Geometric(f64),
    /// Continuous exponential weights with the given mean.
    Exponential(f64),
}

/// A pairwise-independent network ensemble.
pub trait Ensemble {
    fn n(&self) -> usize;

    /// Short model name used in output tables.
    fn name(&self) -> &'static str;

    fn link_prob(&self, i: usize, j: usize) -> f64;

    fn weight_law(&self, i: usize, j: usize) -> WeightLaw;

    /// Whether the model makes weighted predictions at all.
    fn is_weighted(&self) -> bool {
        true
    }

    fn pair(&self, i: usize, j: usize) -> PairPrediction {
        let p = self.link_prob(i, j);
        let expected_w = match self.weight_law(i, j) {
            WeightLaw::Binary => p,
            WeightLaw::Geometric(r) => p / (1.0 - r),
            WeightLaw::Exponential(mean) => p * mean,
        };
        PairPrediction { p, expected_w }
    }

    /// `<w_ij^gamma>` over the full ensemble (zero weights included).
    fn weight_moment(&self, i: usize, j: usize, gamma: f64) -> Result<f64> {
        let p = self.link_prob(i, j);
        match self.weight_law(i, j) {
            WeightLaw::Binary => Ok(p),
            WeightLaw::Geometric(r) => geometric_moment(p, r, gamma),
            WeightLaw::Exponential(mean) => {
                Ok(p * statrs::function::gamma::gamma(1.0 + gamma) * mean.powf(gamma))
            }
        }
    }
}

impl Ensemble for FitnessVectors {
    fn n(&self) -> usize {
        FitnessVectors::n(self)
    }

    fn name(&self) -> &'static str {
        self.kind().name()
    }

    fn link_prob(&self, i: usize, j: usize) -> f64 {
        match self {
            FitnessVectors::Bcm { z } | FitnessVectors::Ts { z, .. } => fermi(z[i] * z[j]),
            FitnessVectors::Ecm { xy, y } => {
                ecm_link_prob_from_propensity(xy[i], xy[j], y[i] * y[j])
            }
        }
    }

    fn weight_law(&self, i: usize, j: usize) -> WeightLaw {
        match self {
            FitnessVectors::Bcm { .. } => WeightLaw::Binary,
            FitnessVectors::Ecm { y, .. } | FitnessVectors::Ts { y, .. } => {
                WeightLaw::Geometric(y[i] * y[j])
            }
        }
    }

    fn is_weighted(&self) -> bool {
        !matches!(self, FitnessVectors::Bcm { .. })
    }
}

/// The GDP-driven two-step model: `z_i = sqrt(a) g_i` and
/// `y_i = b g_i^c / (1 + b g_i^c)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GdpModel {
    pub params: MacroParams,
    pub gdp: GdpVector,
}

impl GdpModel {
    pub fn new(params: MacroParams, gdp: GdpVector) -> Self {
        Self { params, gdp }
    }
}

impl Ensemble for GdpModel {
    fn n(&self) -> usize {
        self.gdp.len()
    }

    fn name(&self) -> &'static str {
        "gdp_ts"
    }

    fn link_prob(&self, i: usize, j: usize) -> f64 {
        fermi(self.params.a * self.gdp.get(i) * self.gdp.get(j))
    }

    fn weight_law(&self, i: usize, j: usize) -> WeightLaw {
        WeightLaw::Geometric(pair::gdp_ratio(self.gdp.get(i), self.gdp.get(j), &self.params))
    }

    fn pair(&self, i: usize, j: usize) -> PairPrediction {
        gdp_ts_pair(self.gdp.get(i), self.gdp.get(j), &self.params)
    }
}

/// Continuous weighted configuration model reduced to the gravity form
/// `<w_ij> = T g_i g_j`, linking every pair with probability one.
#[derive(Debug, Clone, PartialEq)]
pub struct GravityBaseline {
    pub gdp: GdpVector,
    pub total_strength: f64,
}

impl Ensemble for GravityBaseline {
    fn n(&self) -> usize {
        self.gdp.len()
    }

    fn name(&self) -> &'static str {
        "wcm"
    }

    fn link_prob(&self, _i: usize, _j: usize) -> f64 {
        1.0
    }

    fn weight_law(&self, i: usize, j: usize) -> WeightLaw {
        WeightLaw::Exponential(wcm_gravity_weight(
            self.gdp.get(i),
            self.gdp.get(j),
            self.total_strength,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::rescale_gdp;
    use proptest::prelude::*;

    #[test]
    fn gdp_model_matches_ts_substitution() {
        let params = MacroParams::new(37.0, 2.5, 0.8).unwrap();
        let gdp = rescale_gdp(&[3.0, 1.0, 0.2, 7.5, 0.01]).unwrap();
        let model = GdpModel::new(params, gdp.clone());
        let z: Vec<f64> = gdp.values().iter().map(|g| params.a.sqrt() * g).collect();
        let y: Vec<f64> = gdp
            .values()
            .iter()
            .map(|g| {
                let t = params.b * g.powf(params.c);
                t / (1.0 + t)
            })
            .collect();
        let ts = FitnessVectors::Ts { z, y };
        for i in 0..5 {
            for j in 0..5 {
                if i == j {
                    continue;
                }
                let (a, b) = (model.pair(i, j), ts.pair(i, j));
                assert!((a.p - b.p).abs() <= 1e-14, "{a:?} {b:?}");
                assert!((a.expected_w - b.expected_w).abs() <= 1e-14 * b.expected_w.max(1.0));
                // generic geometric route agrees with the closed form
                let generic = a.p / (1.0 - model_ratio(&model, i, j));
                assert!((generic - a.expected_w).abs() <= 1e-13 * a.expected_w.max(1.0));
            }
        }
    }

    fn model_ratio(m: &GdpModel, i: usize, j: usize) -> f64 {
        match m.weight_law(i, j) {
            WeightLaw::Geometric(r) => r,
            _ => unreachable!(),
        }
    }

    #[test]
    fn ecm_storage_round_trip() {
        let f = FitnessVectors::ecm_from_xy(&[2.0, 0.0, 0.5], &[0.5, 0.0, 0.9]).unwrap();
        assert_eq!(f.ecm_x().unwrap(), vec![Some(2.0), Some(0.0), Some(0.5)]);
        let degenerate = FitnessVectors::Ecm {
            xy: vec![1.0, 1.0],
            y: vec![0.0, 0.3],
        };
        assert_eq!(degenerate.ecm_x().unwrap()[0], None);
        let pair = ecm_pair(2.0, 0.5, 0.5, 0.9).unwrap();
        assert!((f.link_prob(0, 2) - pair.p).abs() < 1e-15);
    }

    #[test]
    fn validate_rejects_bad_vectors() {
        let bad = FitnessVectors::Ts {
            z: vec![1.0, 1.0],
            y: vec![1.0, 1.0],
        };
        assert!(matches!(bad.validate(), Err(Error::Domain(_))));
        let hub = FitnessVectors::Ts {
            z: vec![1.0; 3],
            y: vec![1.2, 0.5, 0.8],
        };
        assert!(hub.validate().is_ok());
        let negative = FitnessVectors::Ts {
            z: vec![1.0],
            y: vec![-0.1],
        };
        assert!(negative.validate().is_err());
        assert!(FitnessVectors::Bcm { z: vec![-1.0] }.validate().is_err());
        assert!(MacroParams::new(1.0, 0.0, 1.0).is_err());
        assert!(MacroParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(MacroParams::new(0.0, 1.0, -0.5).is_ok());
    }

    #[test]
    fn gravity_baseline_is_complete() {
        let gdp = rescale_gdp(&[1.0, 2.0, 3.0]).unwrap();
        let wcm = GravityBaseline {
            gdp,
            total_strength: 60.0,
        };
        let pair = wcm.pair(0, 2);
        assert_eq!(pair.p, 1.0);
        assert!((pair.expected_w - 60.0 / 12.0).abs() < 1e-12);
        // Exponential weights: <w^(1/3)> = Gamma(4/3) <w>^(1/3)
        let m = wcm.weight_moment(0, 2, 1.0 / 3.0).unwrap();
        assert!((m - 0.892_979_511_569_249_2 * 5f64.cbrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn pair_invariants(
            u in 0.0f64..50.0, v in 0.0f64..50.0,
            yi in 0.0f64..0.999, yj in 0.0f64..0.999,
        ) {
            for pred in [
                ecm_pair(u, v, yi, yj).unwrap(),
                ts_pair(u, v, yi, yj).unwrap(),
            ] {
                prop_assert!(pred.p >= 0.0 && pred.p < 1.0 || (pred.p - 1.0).abs() < 1e-12);
                prop_assert!(pred.expected_w >= pred.p);
                if yi * yj == 0.0 {
                    prop_assert_eq!(pred.expected_w, pred.p);
                }
                prop_assert_eq!(pred.expected_w == 0.0, pred.p == 0.0);
            }
            // moment consistency
            let pair = ts_pair(u, v, yi, yj).unwrap();
            let m0 = ts_weight_moment(u, v, yi, yj, 0.0).unwrap();
            let m1 = ts_weight_moment(u, v, yi, yj, 1.0).unwrap();
            prop_assert!((m0 - pair.p).abs() <= 1e-10 * pair.p.max(1.0));
            prop_assert!((m1 - pair.expected_w).abs() <= 1e-10 * pair.expected_w.max(1.0));
        }

        #[test]
        fn gdp_pair_monotone(
            gi in 0.001f64..0.5, gj in 0.001f64..0.5,
            a in 0.1f64..1e3, b in 0.1f64..10.0, c in 0.1f64..2.0,
        ) {
            let base = gdp_ts_pair(gi, gj, &MacroParams::new(a, b, c).unwrap());
            let more_a = gdp_ts_pair(gi, gj, &MacroParams::new(a * 1.01, b, c).unwrap());
            let more_b = gdp_ts_pair(gi, gj, &MacroParams::new(a, b * 1.01, c).unwrap());
            prop_assert!(more_a.p > base.p);
            prop_assert!(more_b.expected_w > base.expected_w);
        }
    }
}
