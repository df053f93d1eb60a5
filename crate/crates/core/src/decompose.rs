//! Greedy extraction of disjoint generalized paths through residue graphs,
//! and the `<C, (L_i)>` model derived from it.

use serde::{Deserialize, Serialize};

use crate::dag::{Dag, VertexId, Work};
use crate::error::{Error, Result};

/// Ordered, pairwise disjoint generalized paths with non-increasing lengths
/// that together cover all of the DAG's work.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PathList {
    pub paths: Vec<Vec<VertexId>>,
    pub lengths: Vec<Work>,
}

impl PathList {
    /// Index of the last path, `None` for an all-zero DAG.
    pub fn k_bar(&self) -> Option<usize> {
        self.paths.len().checked_sub(1)
    }

    pub fn total(&self) -> Work {
        self.lengths.iter().sum()
    }

    pub fn to_json(&self, dag: &Dag) -> PathListJson {
        PathListJson {
            k_bar: self.k_bar().map(|k| k as i64).unwrap_or(-1),
            paths: self
                .paths
                .iter()
                .map(|p| p.iter().map(|&v| dag.name(v).to_owned()).collect())
                .collect(),
            lengths: self.lengths.clone(),
        }
    }
}

/// Output format of the `decompose` command. `k_bar` is -1 for an empty list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathListJson {
    pub k_bar: i64,
    pub paths: Vec<Vec<String>>,
    pub lengths: Vec<Work>,
}

/// WCETs of `dag` with those of `path` zeroed.
pub fn residue_weights(weights: &[Work], path: &[VertexId]) -> Vec<Work> {
    let mut w = weights.to_vec();
    for v in path {
        w[v.index()] = 0;
    }
    w
}

/// The residue graph: same structure, WCETs on `path` set to zero.
pub fn residue(dag: &Dag, path: &[VertexId]) -> Result<Dag> {
    for &v in path {
        dag.check_vertex(v)?;
    }
    dag.with_wcets(residue_weights(dag.wcets(), path))
}

pub fn decompose(dag: &Dag) -> PathList {
    decompose_counted(dag).0
}

/// Like [`decompose`], also returning the number of longest-path passes.
pub fn decompose_counted(dag: &Dag) -> (PathList, usize) {
    let mut weights = dag.wcets().to_vec();
    let mut remaining: Work = weights.iter().sum();
    let mut list = PathList { paths: Vec::new(), lengths: Vec::new() };
    let mut passes = 0;
    while remaining != 0 {
        passes += 1;
        let longest = dag.longest_path_with(&weights);
        let path: Vec<VertexId> = longest.vertices.into_iter().filter(|v| weights[v.index()] != 0).collect();
        for v in &path {
            weights[v.index()] = 0;
        }
        remaining -= longest.length;
        list.paths.push(path);
        list.lengths.push(longest.length);
    }
    (list, passes)
}

/// `<C, (L_i)>`: total work and the lengths of the decomposed paths.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ModelJson")]
pub struct MultiPathModel {
    #[serde(rename = "C")]
    total_work: Work,
    lengths: Vec<Work>,
}

impl MultiPathModel {
    /// Checks `sum(lengths) == total_work`, non-increasing lengths, and no zero entries.
    pub fn new(total_work: Work, lengths: Vec<Work>) -> Result<Self> {
        let sum: Work = lengths.iter().sum();
        if sum != total_work {
            return Err(Error::InvalidParameters(format!(
                "path lengths sum to {sum}, total work is {total_work}"
            )));
        }
        if lengths.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidParameters("path lengths must be non-increasing".into()));
        }
        if lengths.contains(&0) {
            return Err(Error::InvalidParameters("path lengths must be positive".into()));
        }
        Ok(MultiPathModel { total_work, lengths })
    }

    /// A purely sequential task: one path carrying all the work.
    pub fn sequential(work: Work) -> Self {
        let lengths = if work == 0 { Vec::new() } else { vec![work] };
        MultiPathModel { total_work: work, lengths }
    }

    /// `C`.
    pub fn total_work(&self) -> Work {
        self.total_work
    }

    /// `L = L_0`, the longest-path length (0 for an empty model).
    pub fn longest(&self) -> Work {
        self.lengths.first().copied().unwrap_or(0)
    }

    pub fn lengths(&self) -> &[Work] {
        &self.lengths
    }

    pub fn k_bar(&self) -> Option<usize> {
        self.lengths.len().checked_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    /// `k = min(k_bar, m - 1)`.
    pub fn k_for(&self, cores: usize) -> Option<usize> {
        self.k_bar().map(|k| k.min(cores.saturating_sub(1)))
    }

    /// Prefix sums `sum_{i<=j} L_i` for every `j`.
    pub fn prefix_sums(&self) -> Vec<Work> {
        self.lengths
            .iter()
            .scan(0, |acc, &l| {
                *acc += l;
                Some(*acc)
            })
            .collect()
    }
}

#[derive(Deserialize)]
struct ModelJson {
    #[serde(rename = "C")]
    total_work: Work,
    lengths: Vec<Work>,
}

impl TryFrom<ModelJson> for MultiPathModel {
    type Error = Error;

    fn try_from(raw: ModelJson) -> Result<Self> {
        MultiPathModel::new(raw.total_work, raw.lengths)
    }
}

pub fn model_of(dag: &Dag) -> MultiPathModel {
    let list = decompose(dag);
    MultiPathModel { total_work: dag.volume(), lengths: list.lengths }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::example_dag;

    fn ids(v: &[u32]) -> Vec<VertexId> {
        v.iter().map(|&i| VertexId(i)).collect()
    }

    #[test]
    fn residue_examples() {
        let d = example_dag();
        let r = residue(&d, &ids(&[0, 1, 4, 5])).unwrap();
        let p = r.longest_path();
        assert_eq!(p.length, 3);
        assert!(p.vertices.contains(&VertexId(3)));

        assert_eq!(residue(&d, &[]).unwrap(), d);
        let all: Vec<_> = d.vertices().collect();
        assert_eq!(residue(&d, &all).unwrap().volume(), 0);
        assert!(matches!(residue(&d, &ids(&[6])), Err(Error::UnknownVertex(6))));
    }

    #[test]
    fn example_decomposition() {
        let list = decompose(&example_dag());
        assert_eq!(list.paths, vec![ids(&[0, 1, 4, 5]), ids(&[3]), ids(&[2])]);
        assert_eq!(list.lengths, vec![6, 3, 1]);
        assert_eq!(list.k_bar(), Some(2));
    }

    #[test]
    fn chain_is_one_path() {
        let d = Dag::new(vec![2; 4], &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let list = decompose(&d);
        assert_eq!(list.lengths, vec![8]);
        assert_eq!(list.k_bar(), Some(0));
    }

    #[test]
    fn zero_volume_gives_empty_list() {
        let d = Dag::new(vec![0, 0], &[(0, 1)]).unwrap();
        let list = decompose(&d);
        assert!(list.paths.is_empty());
        assert_eq!(list.k_bar(), None);
        assert_eq!(list.to_json(&d).k_bar, -1);
        assert!(model_of(&d).is_empty());
    }

    #[test]
    fn model_examples() {
        let m = model_of(&example_dag());
        assert_eq!((m.total_work(), m.lengths()), (10, &[6, 3, 1][..]));
        assert_eq!(m.longest(), 6);
        assert_eq!(m.prefix_sums(), vec![6, 9, 10]);
        assert_eq!(m.k_for(2), Some(1));
        assert_eq!(m.k_for(8), Some(2));

        assert_eq!(model_of(&Dag::new(vec![7], &[]).unwrap()), MultiPathModel::sequential(7));

        let par = Dag::new(vec![1, 1, 1], &[]).unwrap().normalize();
        let m = model_of(&par);
        assert_eq!((m.total_work(), m.lengths()), (3, &[1, 1, 1][..]));
    }

    #[test]
    fn model_validation() {
        assert!(MultiPathModel::new(10, vec![6, 3, 1]).is_ok());
        assert!(MultiPathModel::new(10, vec![6, 3]).is_err());
        assert!(MultiPathModel::new(10, vec![3, 6, 1]).is_err());
        assert!(MultiPathModel::new(6, vec![6, 0]).is_err());
    }

    #[test]
    fn json_shape() {
        let d = example_dag();
        let j = serde_json::to_string(&decompose(&d).to_json(&d)).unwrap();
        assert_eq!(j, r#"{"k_bar":2,"paths":[["v0","v1","v4","v5"],["v3"],["v2"]],"lengths":[6,3,1]}"#);
    }
}
