use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Index, IndexMut};

use serde::de::{self, MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ids::{CableId, JointId, CABLE_COUNT, JOINT_COUNT};

/// One value per joint, in [`JointId::ALL`] order. Used for angles (deg)
/// and for joint torques (N·mm).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct JointVector(pub [f64; JOINT_COUNT]);

impl JointVector {
    pub fn zeros() -> Self {
        JointVector([0.0; JOINT_COUNT])
    }

    pub fn iter(&self) -> impl Iterator<Item = (JointId, f64)> + '_ {
        JointId::ALL.iter().copied().zip(self.0.iter().copied())
    }

    pub fn dot(&self, other: &JointVector) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs_diff(&self, other: &JointVector) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Overwrites entries present in `partial`.
    pub fn with_overrides(mut self, partial: &BTreeMap<JointId, f64>) -> Self {
        for (&id, &v) in partial {
            self[id] = v;
        }
        self
    }
}

impl Index<JointId> for JointVector {
    type Output = f64;

    fn index(&self, id: JointId) -> &f64 {
        &self.0[id.index()]
    }
}

impl IndexMut<JointId> for JointVector {
    fn index_mut(&mut self, id: JointId) -> &mut f64 {
        &mut self.0[id.index()]
    }
}

impl Serialize for JointVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(JOINT_COUNT))?;
        for (id, v) in self.iter() {
            map.serialize_entry(&id, &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for JointVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = JointVector;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a map from every joint id to a number")
            }

            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> Result<JointVector, A::Error> {
                let mut seen = [false; JOINT_COUNT];
                let mut out = JointVector::zeros();
                while let Some((id, v)) = access.next_entry::<JointId, f64>()? {
                    if std::mem::replace(&mut seen[id.index()], true) {
                        return Err(de::Error::custom(format!("duplicate joint `{id}`")));
                    }
                    out[id] = v;
                }
                if let Some(i) = seen.iter().position(|s| !s) {
                    return Err(de::Error::custom(format!("missing joint `{}`", JointId::ALL[i])));
                }
                Ok(out)
            }
        }
        deserializer.deserialize_map(V)
    }
}

/// One value per cable, in [`CableId::ALL`] order. Used for commanded
/// displacements (mm) and tensions (N).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CableValues(pub [f64; CABLE_COUNT]);

impl CableValues {
    pub fn zeros() -> Self {
        CableValues([0.0; CABLE_COUNT])
    }

    pub fn iter(&self) -> impl Iterator<Item = (CableId, f64)> + '_ {
        CableId::ALL.iter().copied().zip(self.0.iter().copied())
    }
}

impl Index<CableId> for CableValues {
    type Output = f64;

    fn index(&self, id: CableId) -> &f64 {
        &self.0[id.index()]
    }
}

impl IndexMut<CableId> for CableValues {
    fn index_mut(&mut self, id: CableId) -> &mut f64 {
        &mut self.0[id.index()]
    }
}

impl Serialize for CableValues {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(CABLE_COUNT))?;
        for (id, v) in self.iter() {
            map.serialize_entry(id.name(), &v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for CableValues {
    /// Missing cables default to zero.
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = BTreeMap::<CableId, f64>::deserialize(deserializer)?;
        let mut out = CableValues::zeros();
        for (id, v) in raw {
            out[id] = v;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_vector_json_is_complete_and_ordered() {
        let mut q = JointVector::zeros();
        q[JointId::INDEX_PIP_FLEX] = 45.5;
        let text = serde_json::to_string(&q).unwrap();
        assert!(text.starts_with("{\"Thumb.CMC.FlexExt\":0.0"));
        let back: JointVector = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);

        let err = serde_json::from_str::<JointVector>("{\"Index.PIP.FlexExt\": 1.0}").unwrap_err();
        assert!(err.to_string().contains("missing joint"));
    }

    #[test]
    fn cable_values_default_missing_to_zero() {
        let c: CableValues = serde_json::from_str("{\"IndexPL\": 5.0}").unwrap();
        assert_eq!(c[CableId::IndexPL], 5.0);
        assert_eq!(c[CableId::IndexBL], 0.0);
    }
}
