use serde::{Deserialize, Serialize};

use super::HomogeneousForm;
use crate::error::Error;

/// Interchange format for forms:
/// `{"n": 3, "degree": 4, "terms": [{"exp": [4,0,0], "coef": 1.0}, ...]}`,
/// with terms in canonical lexicographic order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormJson {
    pub n: usize,
    pub degree: u32,
    pub terms: Vec<TermJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub exp: Vec<u32>,
    pub coef: f64,
}

impl From<&HomogeneousForm> for FormJson {
    fn from(p: &HomogeneousForm) -> Self {
        FormJson {
            n: p.n_vars(),
            degree: p.degree(),
            terms: p.terms().map(|(e, c)| TermJson { exp: e.as_slice().to_vec(), coef: c }).collect(),
        }
    }
}

impl TryFrom<FormJson> for HomogeneousForm {
    type Error = Error;
    fn try_from(j: FormJson) -> Result<Self, Error> {
        HomogeneousForm::new(j.n, j.degree, j.terms.into_iter().map(|t| (t.exp, t.coef)))
    }
}

impl Serialize for HomogeneousForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FormJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HomogeneousForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = FormJson::deserialize(d)?;
        HomogeneousForm::try_from(j).map_err(serde::de::Error::custom)
    }
}
