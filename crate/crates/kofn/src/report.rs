//! Serialization helpers shared by the check reports.

use num::rational::BigRational;
use num::ToPrimitive;
use serde::Serialize;

/// An exact rational carried losslessly into JSON as numerator/denominator
/// strings, with a float rendering for quick reading.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ExactRatio {
    pub num: String,
    pub den: String,
    pub approx: f64,
}

impl From<&BigRational> for ExactRatio {
    fn from(r: &BigRational) -> Self {
        ExactRatio {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
            approx: r.to_f64().unwrap_or(f64::NAN),
        }
    }
}
