//! Serializes `DVector<f64>` as a plain sequence of numbers.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::prelude::*;

pub fn serialize<S: Serializer>(v: &DVector<f64>, s: S) -> core::result::Result<S::Ok, S::Error> {
    v.as_slice().serialize(s)
}

pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> core::result::Result<DVector<f64>, D::Error> {
    let v = Vec::<f64>::deserialize(d)?;
    Ok(DVector::from_vec(v))
}
