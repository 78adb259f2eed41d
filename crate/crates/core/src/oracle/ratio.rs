use serde::{Deserialize, Serialize};

use super::{OptMethod, OptResult};
use crate::error::{domain, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RatioKind {
    Exact,
    /// The optimum was an upper bound, so the true ratio is at least `value`.
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ratio {
    /// `f64::INFINITY` when the optimum is zero and the policy paid something.
    pub value: f64,
    pub kind: RatioKind,
}

impl Ratio {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }
}

pub fn competitive_ratio(alg_cost: f64, opt: &OptResult) -> Result<Ratio> {
    let o = opt.opt_cost;
    if !(alg_cost >= 0.0 && o >= 0.0) || alg_cost.is_nan() || o.is_nan() {
        return Err(domain(format!("costs must be nonnegative, got alg = {alg_cost}, opt = {o}")));
    }
    let kind = match opt.method {
        OptMethod::AnalyticUpperBound => RatioKind::LowerBound,
        _ => RatioKind::Exact,
    };
    let value = if o == 0.0 {
        if alg_cost == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        alg_cost / o
    };
    Ok(Ratio { value, kind })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_cases() {
        let r = competitive_ratio(4.0, &OptResult::analytic(3.0, true)).unwrap();
        assert_eq!((r.value, r.kind), (4.0 / 3.0, RatioKind::Exact));
        assert_eq!(competitive_ratio(2.5, &OptResult::analytic(2.5, true)).unwrap().value, 1.0);
        let r = competitive_ratio(5.0, &OptResult::analytic(4.0, false)).unwrap();
        assert_eq!((r.value, r.kind), (1.25, RatioKind::LowerBound));
        assert!(competitive_ratio(1.0, &OptResult::analytic(0.0, true)).unwrap().is_infinite());
        assert_eq!(competitive_ratio(0.0, &OptResult::analytic(0.0, true)).unwrap().value, 1.0);
        assert!(competitive_ratio(-1.0, &OptResult::analytic(1.0, true)).is_err());
    }
}
