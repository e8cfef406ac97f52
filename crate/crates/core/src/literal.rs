//! JSON matrix literals shared by scenario files, process files and reports.
//!
//! A matrix is an array of rows. Complex entries are `[re, im]` pairs and
//! real entries are bare numbers; a complex matrix accepts either form per
//! entry. Complex matrices are always written back as pairs so that output
//! does not depend on which entries happen to be real.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matrix::{CMatrix, RMatrix, C64};

/// A single complex entry in literal form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEntry(pub C64);

#[derive(Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Real(f64),
    Pair([f64; 2]),
}

impl<'de> Deserialize<'de> for ComplexEntry {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        match RawEntry::deserialize(de) {
            Ok(RawEntry::Real(re)) => Ok(Self(C64::new(re, 0.0))),
            Ok(RawEntry::Pair([re, im])) => Ok(Self(C64::new(re, im))),
            Err(_) => Err(D::Error::custom("expected a number or a [re, im] pair")),
        }
    }
}

impl Serialize for ComplexEntry {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        [self.0.re, self.0.im].serialize(ser)
    }
}

/// Unwraps a literal vector.
pub fn entries(v: &[ComplexEntry]) -> Vec<C64> {
    v.iter().map(|e| e.0).collect()
}

/// Wraps a vector for serialization.
pub fn to_entries(v: &[C64]) -> Vec<ComplexEntry> {
    v.iter().copied().map(ComplexEntry).collect()
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<ComplexEntry>> = self.to_rows().iter().map(|r| to_entries(r)).collect();
        rows.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for CMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<ComplexEntry>> = Vec::deserialize(de)?;
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| entries(r)).collect();
        CMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}

impl Serialize for RMatrix {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(ser)
    }
}

impl<'de> Deserialize<'de> for RMatrix {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(de)?;
        RMatrix::from_rows(&rows).map_err(D::Error::custom)
    }
}
