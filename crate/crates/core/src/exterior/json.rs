//! JSON interchange encoding of forms:
//! `{"dim":6,"degree":3,"terms":[{"idx":[1,2,3],"coef":"1"}]}`.
//! Coefficients are strings (`"-2"`, `"0.5"`, `"3/4"`); plain JSON numbers
//! are accepted on input.

use serde::{Deserialize, Serialize};

use super::{ExteriorError, KForm};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormJson {
    pub dim: usize,
    pub degree: usize,
    pub terms: Vec<TermJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermJson {
    pub idx: Vec<usize>,
    #[serde(with = "coef_string")]
    pub coef: String,
}

mod coef_string {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Str(String),
        Num(serde_json::Number),
    }

    pub fn serialize<S: Serializer>(s: &str, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(de: D) -> Result<String, D::Error> {
        Ok(match Raw::deserialize(de)? {
            Raw::Str(s) => s,
            Raw::Num(n) => n.to_string(),
        })
    }
}

impl<S: Scalar> KForm<S> {
    pub fn to_json(&self) -> FormJson {
        FormJson {
            dim: self.dim(),
            degree: self.degree(),
            terms: self
                .terms()
                .map(|(mi, c)| TermJson { idx: mi.indices(), coef: c.to_coef_string() })
                .collect(),
        }
    }

    pub fn from_json(json: &FormJson) -> Result<Self, ExteriorError> {
        let terms = json
            .terms
            .iter()
            .map(|t| Ok((t.idx.clone(), S::parse_coef(&t.coef)?)))
            .collect::<Result<Vec<_>, ExteriorError>>()?;
        KForm::from_terms(json.dim, json.degree, terms)
    }

    pub fn from_json_str(text: &str) -> Result<Self, ExteriorError> {
        let json: FormJson =
            serde_json::from_str(text).map_err(|e| ExteriorError::Json(e.to_string()))?;
        Self::from_json(&json)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("form JSON serialization cannot fail")
    }
}
