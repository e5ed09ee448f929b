//! JSON schema shared by states, Hermitian elements and γ-vectors:
//!
//! ```text
//! {"shape": [d1, d2, ...], "blocks": [[[[re, im], ...], ...], ...]}
//! ```
//!
//! Blocks are row-major; complex entries are `[re, im]` pairs. γ-vectors add a
//! `"gamma"` field.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AlgebraShape, Block, HermitianElement, State, C64};
use crate::error::{Error, Result};

pub(crate) type MatrixRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct MatrixJson {
    pub shape: Vec<usize>,
    pub blocks: Vec<MatrixRows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
}

pub(crate) fn block_to_rows(m: &Block) -> MatrixRows {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

pub(crate) fn rows_to_block(rows: &MatrixRows) -> Result<Block> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidShape("ragged matrix rows".into()));
    }
    Ok(Block::from_fn(nrows, ncols, |r, c| {
        C64::new(rows[r][c][0], rows[r][c][1])
    }))
}

impl MatrixJson {
    pub(crate) fn from_element(x: &HermitianElement, gamma: Option<f64>) -> Self {
        Self {
            shape: x.shape().blocks().to_vec(),
            blocks: x.blocks().iter().map(block_to_rows).collect(),
            gamma,
        }
    }

    pub(crate) fn to_element(&self) -> Result<HermitianElement> {
        let shape = AlgebraShape::new(self.shape.clone())?;
        let blocks = self
            .blocks
            .iter()
            .map(rows_to_block)
            .collect::<Result<Vec<_>>>()?;
        HermitianElement::new(shape, blocks)
    }
}

impl Serialize for HermitianElement {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from_element(self, None).serialize(s)
    }
}

impl<'de> Deserialize<'de> for HermitianElement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MatrixJson::deserialize(d)?
            .to_element()
            .map_err(D::Error::custom)
    }
}

impl Serialize for State {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.element().serialize(s)
    }
}

impl<'de> Deserialize<'de> for State {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let element = HermitianElement::deserialize(d)?;
        State::from_element(element).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::random_state;

    #[test]
    fn field_names_are_exact() {
        let s = State::diagonal(&[0.75, 0.25]).unwrap();
        let v = serde_json::to_value(&s).unwrap();
        assert_eq!(v["shape"], serde_json::json!([2]));
        assert_eq!(v["blocks"][0][0][0], serde_json::json!([0.75, 0.0]));
        assert_eq!(v["blocks"][0][1][1], serde_json::json!([0.25, 0.0]));
        assert!(v.get("gamma").is_none());
    }

    #[test]
    fn state_round_trip_is_exact() {
        let s = random_state(&AlgebraShape::new(vec![2, 1]).unwrap(), 4, true);
        let text = serde_json::to_string(&s).unwrap();
        let back: State = serde_json::from_str(&text).unwrap();
        assert_eq!(s.element(), back.element());
    }

    #[test]
    fn rejects_indefinite_state() {
        let text = r#"{"shape":[1],"blocks":[[[[-1.0,0.0]]]]}"#;
        assert!(serde_json::from_str::<State>(text).is_err());
        assert!(serde_json::from_str::<HermitianElement>(text).is_ok());
    }

    #[test]
    fn rejects_wrong_block_size() {
        let text = r#"{"shape":[2],"blocks":[[[[1.0,0.0]]]]}"#;
        assert!(serde_json::from_str::<HermitianElement>(text).is_err());
    }
}
