//! Scalar field selection and the JSON encoding shared by all file formats.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Scalar = Complex64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    #[default]
    Real,
    Complex,
}

impl Field {
    pub fn as_str(self) -> &'static str {
        match self {
            Field::Real => "real",
            Field::Complex => "complex",
        }
    }
}

impl std::str::FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real" => Ok(Field::Real),
            "complex" => Ok(Field::Complex),
            other => Err(format!("unknown field `{other}` (expected real|complex)")),
        }
    }
}

pub fn re(x: f64) -> Scalar {
    Complex64::new(x, 0.0)
}

/// A scalar that serializes as a bare number when real and as `[re, im]`
/// otherwise. Used for matrix entries, vector families and witnesses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JsonScalar(pub Scalar);

impl Serialize for JsonScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.im == 0.0 {
            s.serialize_f64(self.0.re)
        } else {
            [self.0.re, self.0.im].serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for JsonScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Real(f64),
            Pair([f64; 2]),
            Obj { re: f64, #[serde(default)] im: f64 },
        }
        Ok(JsonScalar(match Repr::deserialize(d)? {
            Repr::Real(x) => re(x),
            Repr::Pair([a, b]) => Complex64::new(a, b),
            Repr::Obj { re: a, im: b } => Complex64::new(a, b),
        }))
    }
}

pub(crate) mod vec_of_vec {
    use super::{JsonScalar, Scalar};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Vec<Scalar>], s: S) -> Result<S::Ok, S::Error> {
        let wrapped: Vec<Vec<JsonScalar>> =
            v.iter().map(|row| row.iter().copied().map(JsonScalar).collect()).collect();
        wrapped.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Scalar>>, D::Error> {
        let wrapped = Vec::<Vec<JsonScalar>>::deserialize(d)?;
        Ok(wrapped.into_iter().map(|row| row.into_iter().map(|x| x.0).collect()).collect())
    }
}
