//! Closed-form competitive-ratio bounds.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::policy::theta_default;

/// Gap between the order-size F-priority upper bound and the multi-FDC lower bound.
pub const MULTI_FDC_VARYING_GAP: f64 = 6.472_135_954_999_579; // 2(1 + sqrt 5)

/// Gap between the better-of-two upper bound and the single-FDC lower bound.
pub fn single_fdc_varying_gap() -> f64 {
    let r2 = 2f64.sqrt();
    4.0 * (9.0 + 4.0 * r2) / ((10.0 + 4.0 * r2).sqrt() - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundId {
    /// Order-size F-priority, time-varying costs. Uses `theta` if given, else the default threshold.
    OrderSizeFPriorityUpper,
    /// Any online policy, time-varying costs, at least two FDCs.
    MultiFdcVaryingLower,
    /// Cost-comparison V-priority, time-invariant costs.
    CostComparisonVPriorityUpper,
    /// Any online policy, time-invariant costs.
    InvariantLower,
    /// Cost-comparison AdjV-priority, one FDC.
    CostComparisonAdjvUpper,
    /// Order-size AdjV-priority with its recommended parameters, one FDC, `f0 >= f1`.
    OrderSizeAdjvUpper,
    /// Better-of-two, minimum of the two guarantees.
    BetterOfTwoUpper,
    /// Better-of-two, simplified maximum form.
    BetterOfTwoUpperSimplified,
    /// Any online policy, time-varying costs, one FDC.
    SingleFdcVaryingLower,
    /// Randomized cost-comparison V-priority, in expectation.
    RandomizedCcVUpper,
    /// Any online policy, time-invariant costs, one FDC.
    SingleFdcInvariantLower,
}

impl BoundId {
    pub const ALL: [BoundId; 11] = [
        BoundId::OrderSizeFPriorityUpper,
        BoundId::MultiFdcVaryingLower,
        BoundId::CostComparisonVPriorityUpper,
        BoundId::InvariantLower,
        BoundId::CostComparisonAdjvUpper,
        BoundId::OrderSizeAdjvUpper,
        BoundId::BetterOfTwoUpper,
        BoundId::BetterOfTwoUpperSimplified,
        BoundId::SingleFdcVaryingLower,
        BoundId::RandomizedCcVUpper,
        BoundId::SingleFdcInvariantLower,
    ];
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub f0: f64,
    /// `f_1..f_K`.
    pub fdc_fixed_costs: Vec<f64>,
    #[serde(default)]
    pub a: Option<f64>,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub theta: Option<f64>,
    /// Treat the item count in the lower-bound constructions as a real number,
    /// which turns `max_{n>=2} min{n, f0/(f+na)}` into its closed form.
    #[serde(default)]
    pub relaxed_item_count: bool,
}

impl BoundInputs {
    pub fn new(f0: f64, fdc_fixed_costs: &[f64]) -> Self {
        BoundInputs { f0, fdc_fixed_costs: fdc_fixed_costs.to_vec(), ..Default::default() }
    }

    pub fn costs(mut self, a: f64, b: f64) -> Self {
        self.a = Some(a);
        self.b = Some(b);
        self
    }

    pub fn theta(mut self, theta: f64) -> Self {
        self.theta = Some(theta);
        self
    }

    pub fn relaxed(mut self) -> Self {
        self.relaxed_item_count = true;
        self
    }

    fn ab(&self) -> Result<(f64, f64)> {
        match (self.a, self.b) {
            (Some(a), Some(b)) if a > 0.0 && b >= a && b.is_finite() => Ok((a, b)),
            (Some(a), Some(b)) => Err(domain(format!("need 0 < a <= b, got a = {a}, b = {b}"))),
            _ => Err(domain("cost bounds a, b are required")),
        }
    }

    fn f_min(&self) -> Result<f64> {
        self.fdc_fixed_costs
            .iter()
            .copied()
            .reduce(f64::min)
            .ok_or_else(|| domain("at least one FDC fixed cost is required"))
    }

    fn positive_f_min(&self) -> Result<f64> {
        let f = self.f_min()?;
        if f > 0.0 {
            Ok(f)
        } else {
            Err(domain(format!("minimum FDC fixed cost must be positive, got {f}")))
        }
    }

    fn single_f1(&self) -> Result<f64> {
        match self.fdc_fixed_costs.as_slice() {
            [f1] => Ok(*f1),
            fs => Err(domain(format!("single-FDC bound given {} FDC fixed costs", fs.len()))),
        }
    }
}

/// `max_{n >= 2} min{n, f0/(f + n a)}` over integers, or its closed form when relaxed.
pub fn item_count_tradeoff(f0: f64, f: f64, a: f64, relaxed: bool) -> f64 {
    let crossing = (f0 / a + f * f / (4.0 * a * a)).sqrt() - f / (2.0 * a);
    if relaxed {
        return crossing;
    }
    let h = |n: f64| n.min(f0 / (f + n * a));
    // min{n, decreasing} is unimodal in n, so the integer maximum sits next to the crossing
    [crossing.floor(), crossing.ceil(), 2.0].iter().map(|&n| h(n.max(2.0))).fold(f64::NEG_INFINITY, f64::max)
}

pub fn bound_value(id: BoundId, x: &BoundInputs) -> Result<f64> {
    let f0 = x.f0;
    if !(f0 >= 0.0 && f0.is_finite()) || x.fdc_fixed_costs.iter().any(|f| !(*f >= 0.0 && f.is_finite())) {
        return Err(domain("fixed costs must be finite and nonnegative"));
    }
    let sum_f: f64 = x.fdc_fixed_costs.iter().sum();
    let r2 = 2f64.sqrt();
    Ok(match id {
        BoundId::OrderSizeFPriorityUpper => {
            let (a, b) = x.ab()?;
            let f = x.f_min()?;
            let theta = match x.theta {
                Some(t) => t,
                None => theta_default(f0, f, a, b)?,
            };
            let denom = f + a * theta;
            if !(denom > 0.0) {
                return Err(domain("f_min + a theta must be positive"));
            }
            theta.max((f0 + b * theta) / denom).max(b / a)
        }
        BoundId::MultiFdcVaryingLower => {
            if x.fdc_fixed_costs.len() < 2 {
                return Err(domain("this lower bound needs at least two FDCs"));
            }
            let (a, b) = x.ab()?;
            let g = item_count_tradeoff(f0, x.f_min()?, a, x.relaxed_item_count);
            1f64.max(b / (4.0 * a)).max(g / 4.0)
        }
        BoundId::CostComparisonVPriorityUpper => ((f0 + sum_f) / x.positive_f_min()?).max(2.0),
        BoundId::InvariantLower => (f0 + sum_f) / x.positive_f_min()?,
        BoundId::CostComparisonAdjvUpper => {
            let f1 = x.single_f1()?;
            let (a, b) = x.ab()?;
            if !(f1 > 0.0) {
                return Err(domain("f1 must be positive"));
            }
            1.0 + (f0 / f1).max((b / a).sqrt())
        }
        BoundId::OrderSizeAdjvUpper => {
            let f1 = x.single_f1()?;
            let (a, b) = x.ab()?;
            if f0 < f1 {
                return Err(domain(format!("needs f0 >= f1, got f0 = {f0}, f1 = {f1}")));
            }
            (4.0 + r2) * ((f0 / 2.0).max(b) / a).sqrt()
        }
        BoundId::BetterOfTwoUpper => {
            let f1 = x.single_f1()?;
            let (a, b) = x.ab()?;
            if !(f1 > 0.0) {
                return Err(domain("f1 must be positive"));
            }
            let cc = 1.0 + (f0 / f1).max((b / a).sqrt());
            let os = if f0 < f1 { f64::INFINITY } else { (4.0 + r2) * ((f0 / 2.0).max(b) / a).sqrt() };
            cc.min(os)
        }
        BoundId::BetterOfTwoUpperSimplified => {
            let f1 = x.single_f1()?;
            let (a, b) = x.ab()?;
            if !(f1 > 0.0) {
                return Err(domain("f1 must be positive"));
            }
            (2.0 * f0 / f1).min((2.0 * r2 + 1.0) * (f0 / a).sqrt()).max((4.0 + r2) * (b / a).sqrt())
        }
        BoundId::SingleFdcVaryingLower => {
            let f1 = x.single_f1()?;
            let (a, b) = x.ab()?;
            let g = item_count_tradeoff(f0, f1, a, x.relaxed_item_count);
            1f64.max((b / a).sqrt() / 3.0).max(g / 4.0)
        }
        BoundId::RandomizedCcVUpper => {
            let f1 = x.single_f1()?;
            if !(f1 > 0.0) {
                return Err(domain("f1 must be positive"));
            }
            let w = f0 / f1;
            if w < (5f64.sqrt() - 1.0) / 2.0 {
                let s = (1.0 - w).sqrt();
                1.0 + 1.0 / (1.0 - w + 2.0 * s)
            } else {
                1.0 + w
            }
        }
        BoundId::SingleFdcInvariantLower => {
            let f1 = x.single_f1()?;
            if !(f1 > 0.0) {
                return Err(domain("f1 must be positive"));
            }
            (1.0 + f0 / f1).max(1.25)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cc_vp_upper_example() {
        let v = bound_value(BoundId::CostComparisonVPriorityUpper, &BoundInputs::new(50.0, &[5.0; 10])).unwrap();
        assert_eq!(v, 20.0);
    }

    #[test]
    fn randomized_upper_example() {
        let v = bound_value(BoundId::RandomizedCcVUpper, &BoundInputs::new(0.5, &[1.0])).unwrap();
        assert!((v - 1.52241).abs() < 1e-5);
        let v = bound_value(BoundId::RandomizedCcVUpper, &BoundInputs::new(2.0, &[1.0])).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn single_invariant_lower_example() {
        let v = bound_value(BoundId::SingleFdcInvariantLower, &BoundInputs::new(3.0, &[3.0])).unwrap();
        assert_eq!(v, 2.0);
    }

    #[test]
    fn os_fp_default_theta_reduces_to_two_terms() {
        let x = BoundInputs::new(50.0, &[5.0, 7.0]).costs(8.0, 30.0);
        let v = bound_value(BoundId::OrderSizeFPriorityUpper, &x).unwrap();
        let theta = theta_default(50.0, 5.0, 8.0, 30.0).unwrap();
        assert!((v - theta.max(30.0 / 8.0)).abs() < 1e-12);
    }

    #[test]
    fn gap_constants() {
        assert!(MULTI_FDC_VARYING_GAP <= 6.473);
        assert!((MULTI_FDC_VARYING_GAP - 2.0 * (1.0 + 5f64.sqrt())).abs() < 1e-15);
        assert!(single_fdc_varying_gap() <= 19.828);
        assert!(single_fdc_varying_gap() > 19.827);
    }

    #[test]
    fn tradeoff_integer_max_matches_scan() {
        for &(f0, f, a) in &[(50.0, 5.0, 8.0), (1000.0, 0.0, 1.0), (3.0, 2.0, 0.5), (1e4, 3.0, 0.01)] {
            let scan = (2..100_000).map(|n| (n as f64).min(f0 / (f + n as f64 * a))).fold(0.0, f64::max);
            assert_eq!(item_count_tradeoff(f0, f, a, false), scan);
            assert!(item_count_tradeoff(f0, f, a, true) >= scan - 1e-12 || scan == f0 / (f + 2.0 * a));
        }
    }

    #[test]
    fn domain_errors() {
        assert!(bound_value(BoundId::InvariantLower, &BoundInputs::new(1.0, &[0.0])).is_err());
        assert!(bound_value(BoundId::CostComparisonAdjvUpper, &BoundInputs::new(1.0, &[1.0]).costs(0.0, 1.0)).is_err());
        assert!(bound_value(BoundId::OrderSizeAdjvUpper, &BoundInputs::new(1.0, &[2.0]).costs(1.0, 1.0)).is_err());
        assert!(bound_value(BoundId::MultiFdcVaryingLower, &BoundInputs::new(1.0, &[2.0]).costs(1.0, 1.0)).is_err());
    }

    #[test]
    fn better_of_two_first_form_is_tighter() {
        for &(f0, f1, a, b) in &[(10.0, 1.0, 1.0, 4.0), (1.0, 5.0, 1.0, 9.0), (1e4, 1.0, 1.0, 1.0)] {
            let x = BoundInputs::new(f0, &[f1]).costs(a, b);
            let tight = bound_value(BoundId::BetterOfTwoUpper, &x).unwrap();
            let loose = bound_value(BoundId::BetterOfTwoUpperSimplified, &x).unwrap();
            assert!(tight <= loose + 1e-9, "{tight} > {loose}");
        }
    }
}
