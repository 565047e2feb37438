// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Pairwise output similarity of the algorithms run on one network.

use std::collections::{BTreeMap, BTreeSet};

use super::AsnError;
use crate::graph::Cover;
use crate::metrics::{onmi, MetricsError, OnmiVariant};

/// Symmetric similarity matrix indexed by algorithm id, ids sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    ids: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl SimilarityMatrix {
    /// Checks shape, symmetry, unit diagonal and the `[0, 1]` range, then
    /// reorders rows and columns by id.
    pub fn new(ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, AsnError> {
        let n = ids.len();
        let bad = |m: String| Err(AsnError::InvalidMatrix(m));
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return bad(format!("expected a {n}x{n} matrix"));
        }
        if ids.iter().collect::<BTreeSet<_>>().len() != n {
            return bad("duplicate algorithm id".into());
        }
        for i in 0..n {
            if values[i][i] != 1.0 {
                return bad(format!("diagonal entry of `{}` is not 1", ids[i]));
            }
            for j in 0..n {
                let v = values[i][j];
                if !(0.0..=1.0).contains(&v) {
                    return bad(format!("value {v} outside [0, 1]"));
                }
                if v != values[j][i] {
                    return bad(format!("asymmetric at `{}`, `{}`", ids[i], ids[j]));
                }
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ids[a].cmp(&ids[b]));
        Ok(SimilarityMatrix {
            ids: order.iter().map(|&i| ids[i].clone()).collect(),
            values: order
                .iter()
                .map(|&i| order.iter().map(|&j| values[i][j]).collect())
                .collect(),
        })
    }

    /// Pairwise oNMI of the given covers.
    pub fn from_covers(covers: &[(String, &Cover)], variant: OnmiVariant) -> Result<Self, AsnError> {
        let mut sorted: Vec<&(String, &Cover)> = covers.iter().collect();
        sorted.sort_by(|a, b| a.0.cmp(&b.0));
        let n = sorted.len();
        let mut values = vec![vec![1.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let s = onmi(sorted[i].1, sorted[j].1, variant).map_err(AsnError::Metrics)?;
                values[i][j] = s;
                values[j][i] = s;
            }
        }
        SimilarityMatrix::new(sorted.iter().map(|c| c.0.clone()).collect(), values)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|x| x.as_str().cmp(id)).ok()
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.values[self.index_of(a)?][self.index_of(b)?])
    }

    /// The matrix restricted to ids other than `id`.
    pub fn without(&self, id: &str) -> SimilarityMatrix {
        self.select(|x| x != id)
    }

    /// The matrix restricted to the ids in `keep`.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> SimilarityMatrix {
        self.select(|x| keep.contains(x))
    }

    fn select(&self, want: impl Fn(&str) -> bool) -> SimilarityMatrix {
        let keep: Vec<usize> = (0..self.len()).filter(|&i| want(&self.ids[i])).collect();
        SimilarityMatrix {
            ids: keep.iter().map(|&i| self.ids[i].clone()).collect(),
            values: keep
                .iter()
                .map(|&i| keep.iter().map(|&j| self.values[i][j]).collect())
                .collect(),
        }
    }

    /// CSV with a header row `id,<ids...>` and one row per algorithm.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["id".to_string()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (i, id) in self.ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend(self.values[i].iter().map(|v| v.to_string()));
            w.write_record(&row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }

    pub fn from_csv(bytes: &[u8]) -> Result<Self, AsnError> {
        let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
        let header = r.headers().map_err(|e| AsnError::Csv(e.to_string()))?.clone();
        if header.get(0) != Some("id") {
            return Err(AsnError::Csv("first header cell must be `id`".into()));
        }
        let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut rows: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for record in r.records() {
            let record = record.map_err(|e| AsnError::Csv(e.to_string()))?;
            let id = record.get(0).unwrap_or_default().to_string();
            let values = record
                .iter()
                .skip(1)
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| AsnError::Csv(format!("row `{id}`: {e}")))?;
            if rows.insert(id.clone(), values).is_some() {
                return Err(AsnError::Csv(format!("duplicate row `{id}`")));
            }
        }
        let values = ids
            .iter()
            .map(|id| {
                rows.remove(id)
                    .ok_or_else(|| AsnError::Csv(format!("missing row `{id}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(extra) = rows.keys().next() {
            return Err(AsnError::Csv(format!("row `{extra}` has no column")));
        }
        SimilarityMatrix::new(ids, values)
    }
}

/// One similarity matrix per network id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SimilarityStore {
    networks: BTreeMap<String, SimilarityMatrix>,
}

impl SimilarityStore {
    pub fn new() -> Self {
        SimilarityStore::default()
    }

    pub fn insert(&mut self, network: &str, matrix: SimilarityMatrix) {
        self.networks.insert(network.to_string(), matrix);
    }

    pub fn get(&self, network: &str) -> Option<&SimilarityMatrix> {
        self.networks.get(network)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &SimilarityMatrix)> {
        self.networks.iter()
    }

    pub fn len(&self) -> usize {
        self.networks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.networks.is_empty()
    }

    /// Every algorithm id seen on any network, sorted.
    pub fn algorithms(&self) -> Vec<String> {
        let ids: BTreeSet<&String> = self.networks.values().flat_map(|m| m.ids.iter()).collect();
        ids.into_iter().cloned().collect()
    }

    /// The store with `id` removed from every matrix.
    pub fn without(&self, id: &str) -> SimilarityStore {
        SimilarityStore {
            networks: self.networks.iter().map(|(k, m)| (k.clone(), m.without(id))).collect(),
        }
    }
}

impl From<MetricsError> for AsnError {
    fn from(e: MetricsError) -> Self {
        AsnError::Metrics(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_malformed_matrices() {
        let ids = vec!["a".to_string(), "b".to_string()];
        assert!(SimilarityMatrix::new(ids.clone(), vec![vec![1.0, 0.2], vec![0.3, 1.0]]).is_err());
        assert!(SimilarityMatrix::new(ids.clone(), vec![vec![0.9, 0.2], vec![0.2, 1.0]]).is_err());
        assert!(SimilarityMatrix::new(ids.clone(), vec![vec![1.0, 1.2], vec![1.2, 1.0]]).is_err());
        assert!(SimilarityMatrix::new(ids, vec![vec![1.0]]).is_err());
    }

    #[test]
    fn covers_give_unit_diagonal_and_symmetry() {
        let a = Cover::from_labels(&[0, 0, 1, 1, 2, 2]);
        let b = Cover::from_labels(&[0, 0, 0, 1, 1, 1]);
        let covers = vec![("z".to_string(), &a), ("b".to_string(), &b), ("a".to_string(), &a)];
        let m = SimilarityMatrix::from_covers(&covers, OnmiVariant::Max).unwrap();
        assert_eq!(m.ids(), &["a", "b", "z"]);
        assert_eq!(m.get("a", "z"), Some(1.0));
        assert_eq!(m.get("a", "b"), m.get("b", "a"));
    }

    #[test]
    fn without_drops_row_and_column() {
        let a = Cover::from_labels(&[0, 0, 1]);
        let covers = vec![("x".to_string(), &a), ("y".to_string(), &a)];
        let m = SimilarityMatrix::from_covers(&covers, OnmiVariant::Sum).unwrap();
        let w = m.without("x");
        assert_eq!(w.ids(), &["y"]);
        assert_eq!(w.value(0, 0), 1.0);
    }

    proptest! {
        #[test]
        fn csv_round_trip(raw in proptest::collection::vec(0.0f64..=1.0, 16)) {
            let ids: Vec<String> = (0..4).map(|i| format!("alg{i}")).collect();
            let mut values = vec![vec![1.0; 4]; 4];
            for i in 0..4 {
                for j in i + 1..4 {
                    values[i][j] = raw[i * 4 + j];
                    values[j][i] = raw[i * 4 + j];
                }
            }
            let m = SimilarityMatrix::new(ids, values).unwrap();
            prop_assert_eq!(SimilarityMatrix::from_csv(m.to_csv().as_bytes()).unwrap(), m);
        }
    }
}
