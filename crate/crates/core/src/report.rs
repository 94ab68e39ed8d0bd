//! Fixed-precision JSON numbers so reports compare byte for byte.

use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Number;

pub const ARTIFACT_VERSION: u32 = 1;

fn number(text: String) -> Number {
    Number::from_str(&text).unwrap_or_else(|_| Number::from(0))
}

/// Serializes a float with exactly six decimals; non-finite values become `null`.
pub fn fixed(x: f64) -> serde_json::Value {
    if x.is_finite() {
        serde_json::Value::Number(number(format!("{x:.6}")))
    } else {
        serde_json::Value::Null
    }
}

pub mod fixed6 {
    use super::*;

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        fixed(*x).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
            xs.iter().map(|&x| fixed(x)).collect::<Vec<_>>().serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
            let xs = Vec::<Option<f64>>::deserialize(d)?;
            Ok(xs.into_iter().map(|x| x.unwrap_or(f64::NAN)).collect())
        }
    }

    /// Scientific notation with six significant decimals, for tiny errors.
    pub mod sci {
        use super::*;

        pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
            if x.is_finite() {
                number(format!("{x:.6e}")).serialize(s)
            } else {
                serde_json::Value::Null.serialize(s)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Probe {
        #[serde(with = "fixed6")]
        a: f64,
        #[serde(with = "fixed6::vec")]
        b: Vec<f64>,
    }

    #[test]
    fn six_decimals() {
        let text = serde_json::to_string(&Probe { a: 0.1, b: vec![1.0, 2.0 / 3.0] }).unwrap();
        assert_eq!(text, r#"{"a":0.100000,"b":[1.000000,0.666667]}"#);
        let back: Probe = serde_json::from_str(&text).unwrap();
        assert_eq!(back.a, 0.1);
    }

    #[test]
    fn non_finite_is_null() {
        assert_eq!(fixed(f64::NAN), serde_json::Value::Null);
    }
}
