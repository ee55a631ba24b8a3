//! JSON wire formats shared by the library reports and the CLI.
//!
//! * `ZpInt`: `{"p": 5, "prec": 24, "residue": "<decimal>"}`
//! * `QpScalar`: the same plus `"val"`; `residue` holds the unit part.
//! * chart vectors: `{"group": "mult"|"gl:<m>"|"heis", "p", "prec", "coords": [...]}`
//!
//! On input every field except `residue`/`coords` may be omitted and is then
//! taken from the caller's defaults (the CLI flags).

use num_bigint::BigUint;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::group::GroupKind;
use crate::padic::{parse_residue, QpScalar, ZpInt};
use crate::vector::{ChartVector, CoordVector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZpIntJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prec: Option<u32>,
    pub residue: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val: Option<i64>,
}

impl From<&ZpInt> for ZpIntJson {
    fn from(z: &ZpInt) -> Self {
        ZpIntJson { p: Some(z.prime()), prec: Some(z.precision()), residue: z.residue().to_string(), val: None }
    }
}

impl From<&QpScalar> for ZpIntJson {
    fn from(s: &QpScalar) -> Self {
        ZpIntJson {
            p: Some(s.prime()),
            prec: Some(s.rel_precision()),
            residue: s.unit().residue().to_string(),
            val: s.valuation(),
        }
    }
}

impl ZpIntJson {
    /// Resolves to a `ZpInt`, filling `p`/`prec` from the defaults.
    pub fn to_zp(&self, default_p: u64, default_prec: u32) -> Result<ZpInt> {
        let p = self.p.unwrap_or(default_p);
        let prec = self.prec.unwrap_or(default_prec);
        if self.p.is_some() && p != default_p {
            return Err(Error::PrimeMismatch(default_p, p));
        }
        ZpInt::new(p, prec, parse_residue(&self.residue, p, prec)?)
    }

    /// Resolves to a `QpScalar`; without `val` the residue is split into
    /// valuation and unit part.
    pub fn to_qp(&self, default_p: u64, default_prec: u32) -> Result<QpScalar> {
        let z = self.to_zp(default_p, default_prec)?;
        match self.val {
            None => Ok(QpScalar::from_zp(&z)),
            Some(v) => QpScalar::new(v, z),
        }
    }
}

impl Serialize for ZpInt {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ZpIntJson::from(self).serialize(s)
    }
}

impl Serialize for QpScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ZpIntJson::from(self).serialize(s)
    }
}

impl Serialize for CoordVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ChartVectorJson {
            group: None,
            p: Some(self.prime()),
            prec: Some(self.precision()),
            coords: self.residues().iter().map(BigUint::to_string).collect(),
        }
        .serialize(s)
    }
}

impl Serialize for ChartVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.as_coords().serialize(s)
    }
}

/// Accepts either a bare decimal string/number or a full `ZpInt` object.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ScalarInput {
    Object(ZpIntJson),
    Text(String),
    Int(i64),
}

impl ScalarInput {
    pub fn to_zp(&self, default_p: u64, default_prec: u32) -> Result<ZpInt> {
        match self {
            ScalarInput::Object(o) => o.to_zp(default_p, default_prec),
            ScalarInput::Text(s) => {
                ZpInt::new(default_p, default_prec, parse_residue(s, default_p, default_prec)?)
            }
            ScalarInput::Int(i) => ZpInt::from_i64(default_p, default_prec, *i),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartVectorJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prec: Option<u32>,
    pub coords: Vec<String>,
}

impl ChartVectorJson {
    pub fn from_vector(group: GroupKind, v: &CoordVector) -> Self {
        ChartVectorJson {
            group: Some(group.to_string()),
            p: Some(v.prime()),
            prec: Some(v.precision()),
            coords: v.residues().iter().map(BigUint::to_string).collect(),
        }
    }

    /// Parses coordinates without the chart-ball check.
    pub fn to_coords(&self, group: GroupKind, default_p: u64, default_prec: u32) -> Result<CoordVector> {
        if let Some(g) = &self.group {
            let parsed: GroupKind = g.parse()?;
            if parsed != group {
                return Err(Error::Usage(format!("vector is for group {parsed}, expected {group}")));
            }
        }
        let p = self.p.unwrap_or(default_p);
        if p != default_p {
            return Err(Error::PrimeMismatch(default_p, p));
        }
        let prec = self.prec.unwrap_or(default_prec);
        if self.coords.len() != group.dim() {
            return Err(Error::DimensionMismatch { expected: group.dim(), got: self.coords.len() });
        }
        let coords = self
            .coords
            .iter()
            .map(|c| parse_residue(c, p, prec))
            .collect::<Result<Vec<_>>>()?;
        CoordVector::new(p, prec, coords)
    }

    pub fn to_chart(&self, group: GroupKind, default_p: u64, default_prec: u32) -> Result<ChartVector> {
        ChartVector::new(self.to_coords(group, default_p, default_prec)?)
    }
}
