use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{BoundingBox, ModelError};
use crate::scalar::Scalar;

/// Object class reported by a detector.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub enum ObjectClass {
    Car,
    Truck,
    Bus,
    Motorcycle,
    Bicycle,
    Person,
    Other(String),
}

impl ObjectClass {
    pub fn as_str(&self) -> &str {
        match self {
            ObjectClass::Car => "car",
            ObjectClass::Truck => "truck",
            ObjectClass::Bus => "bus",
            ObjectClass::Motorcycle => "motorcycle",
            ObjectClass::Bicycle => "bicycle",
            ObjectClass::Person => "person",
            ObjectClass::Other(s) => s,
        }
    }
}

impl From<String> for ObjectClass {
    fn from(s: String) -> Self {
        match s.as_str() {
            "car" => ObjectClass::Car,
            "truck" => ObjectClass::Truck,
            "bus" => ObjectClass::Bus,
            "motorcycle" => ObjectClass::Motorcycle,
            "bicycle" => ObjectClass::Bicycle,
            "person" => ObjectClass::Person,
            _ => ObjectClass::Other(s),
        }
    }
}

impl From<ObjectClass> for String {
    fn from(c: ObjectClass) -> Self {
        c.as_str().to_owned()
    }
}

impl FromStr for ObjectClass {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(ObjectClass::from(s.to_owned()))
    }
}

impl fmt::Display for ObjectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One detector output: class, box and confidence in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection<T> {
    #[serde(rename = "box")]
    pub bbox: BoundingBox<T>,
    pub class_label: ObjectClass,
    pub confidence: T,
}

impl<T: Scalar> Detection<T> {
    pub fn new(bbox: BoundingBox<T>, class_label: ObjectClass, confidence: T) -> Result<Self, ModelError> {
        if !bbox.is_valid() {
            return Err(ModelError::InvalidBox(format!("{bbox:?}")));
        }
        if !(confidence >= T::zero() && confidence <= T::one()) {
            return Err(ModelError::InvalidConfidence(confidence.as_f64()));
        }
        Ok(Self {
            bbox,
            class_label,
            confidence,
        })
    }

    pub fn car(bbox: BoundingBox<T>, confidence: T) -> Result<Self, ModelError> {
        Self::new(bbox, ObjectClass::Car, confidence)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_labels_round_trip_through_strings() {
        for name in ["car", "truck", "person", "traffic light"] {
            let c: ObjectClass = name.parse().unwrap();
            assert_eq!(c.to_string(), name);
        }
        assert_eq!("car".parse::<ObjectClass>().unwrap(), ObjectClass::Car);
    }

    #[test]
    fn confidence_outside_unit_interval_is_rejected() {
        let b = BoundingBox::new(0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(Detection::car(b, 1.2).is_err());
        assert!(Detection::car(b, -0.1).is_err());
        assert!(Detection::car(b, f64::NAN).is_err());
        assert!(Detection::car(b, 1.0).is_ok());
    }
}
