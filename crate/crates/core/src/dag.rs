//! The DAG task model: vertices with integer WCETs connected by precedence
//! edges, plus the graph primitives the analyses are built on.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Amount of work or time, in integer units.
pub type Work = u64;

/// Dense vertex index in `[0, |V|)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(i as u32)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

/// Unchecked graph description, as read from a file or assembled by hand.
///
/// WCETs are signed here so that malformed input can be represented and
/// reported by [`DagSpec::validate`]; a [`Dag`] only ever holds validated data.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DagSpec {
    pub names: Vec<String>,
    pub wcets: Vec<i64>,
    pub edges: Vec<(usize, usize)>,
}

/// One problem found by [`DagSpec::validate`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    CycleDetected { vertices: Vec<usize> },
    NegativeWcet { vertex: usize, wcet: i64 },
    EdgeOutOfRange { from: usize, to: usize },
    SelfLoop { vertex: usize },
    NameCountMismatch { names: usize, vertices: usize },
    Empty,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::CycleDetected { vertices } => {
                write!(f, "cycle detected through vertices {vertices:?}")
            }
            Violation::NegativeWcet { vertex, wcet } => {
                write!(f, "negative WCET {wcet} on vertex {vertex}")
            }
            Violation::EdgeOutOfRange { from, to } => {
                write!(f, "edge ({from}, {to}) references a vertex out of range")
            }
            Violation::SelfLoop { vertex } => write!(f, "self loop on vertex {vertex}"),
            Violation::NameCountMismatch { names, vertices } => {
                write!(f, "{names} names given for {vertices} vertices")
            }
            Violation::Empty => write!(f, "graph has no vertices"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub sources: Vec<usize>,
    pub sinks: Vec<usize>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    /// True when the graph is valid and already has exactly one source and one sink.
    pub fn is_normalized(&self) -> bool {
        self.is_ok() && self.sources.len() == 1 && self.sinks.len() == 1
    }
}

impl DagSpec {
    pub fn new(wcets: Vec<i64>, edges: Vec<(usize, usize)>) -> Self {
        let names = (0..wcets.len()).map(|i| format!("v{i}")).collect();
        DagSpec { names, wcets, edges }
    }

    /// Checks acyclicity, index density, WCET sign and naming. Sources and
    /// sinks are reported so callers can tell whether normalization is needed.
    pub fn validate(&self) -> ValidationReport {
        let n = self.wcets.len();
        let mut violations = Vec::new();
        if n == 0 {
            violations.push(Violation::Empty);
        }
        if self.names.len() != n {
            violations.push(Violation::NameCountMismatch { names: self.names.len(), vertices: n });
        }
        for (v, &w) in self.wcets.iter().enumerate() {
            if w < 0 {
                violations.push(Violation::NegativeWcet { vertex: v, wcet: w });
            }
        }
        let mut in_range = Vec::with_capacity(self.edges.len());
        for &(a, b) in &self.edges {
            if a >= n || b >= n {
                violations.push(Violation::EdgeOutOfRange { from: a, to: b });
            } else if a == b {
                violations.push(Violation::SelfLoop { vertex: a });
            } else {
                in_range.push((a, b));
            }
        }

        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        let mut succ = vec![Vec::new(); n];
        let mut seen = BTreeSet::new();
        for &(a, b) in &in_range {
            if seen.insert((a, b)) {
                succ[a].push(b);
                indeg[b] += 1;
                outdeg[a] += 1;
            }
        }
        let sources: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let sinks: Vec<usize> = (0..n).filter(|&v| outdeg[v] == 0).collect();

        // Kahn's algorithm; whatever is left over lies on or behind a cycle.
        let mut remaining = indeg.clone();
        let mut stack = sources.clone();
        let mut visited = 0;
        while let Some(v) = stack.pop() {
            visited += 1;
            for &w in &succ[v] {
                remaining[w] -= 1;
                if remaining[w] == 0 {
                    stack.push(w);
                }
            }
        }
        if visited < n {
            let vertices = (0..n).filter(|&v| remaining[v] > 0).collect();
            violations.push(Violation::CycleDetected { vertices });
        }

        ValidationReport { violations, sources, sinks }
    }
}

/// A validated, immutable DAG with cached adjacency and topological order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    wcets: Vec<Work>,
    succ: Vec<Vec<VertexId>>,
    pred: Vec<Vec<VertexId>>,
    topo: Vec<VertexId>,
}

impl TryFrom<DagSpec> for Dag {
    type Error = Error;

    fn try_from(spec: DagSpec) -> Result<Self> {
        let report = spec.validate();
        if !report.is_ok() {
            return Err(Error::InvalidDag(report.violations));
        }
        let wcets = spec.wcets.iter().map(|&w| w as Work).collect();
        Ok(Dag::assemble(spec.names, wcets, spec.edges))
    }
}

impl Dag {
    /// Builds a DAG from WCETs and index pairs, naming vertices `v0, v1, ...`.
    pub fn new(wcets: Vec<Work>, edges: &[(usize, usize)]) -> Result<Self> {
        let spec = DagSpec::new(wcets.iter().map(|&w| w as i64).collect(), edges.to_vec());
        Dag::try_from(spec)
    }

    pub fn with_names(names: Vec<String>, wcets: Vec<Work>, edges: &[(usize, usize)]) -> Result<Self> {
        let spec = DagSpec { names, wcets: wcets.iter().map(|&w| w as i64).collect(), edges: edges.to_vec() };
        Dag::try_from(spec)
    }

    // Inputs must already be validated.
    fn assemble(names: Vec<String>, wcets: Vec<Work>, edges: Vec<(usize, usize)>) -> Dag {
        let n = wcets.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![Vec::new(); n];
        let uniq: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        for (a, b) in uniq {
            succ[a].push(VertexId::from(b));
            pred[b].push(VertexId::from(a));
        }

        // Kahn's algorithm with a min-heap so the order is canonical.
        let mut indeg: Vec<usize> = pred.iter().map(Vec::len).collect();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<u32>> =
            (0..n).filter(|&v| indeg[v] == 0).map(|v| std::cmp::Reverse(v as u32)).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(v)) = ready.pop() {
            topo.push(VertexId(v));
            for w in &succ[v as usize] {
                indeg[w.index()] -= 1;
                if indeg[w.index()] == 0 {
                    ready.push(std::cmp::Reverse(w.0));
                }
            }
        }
        debug_assert_eq!(topo.len(), n);
        Dag { names, wcets, succ, pred, topo }
    }

    pub fn len(&self) -> usize {
        self.wcets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wcets.is_empty()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.len()).map(VertexId::from)
    }

    pub fn wcet(&self, v: VertexId) -> Work {
        self.wcets[v.index()]
    }

    pub fn wcets(&self) -> &[Work] {
        &self.wcets
    }

    pub fn name(&self, v: VertexId) -> &str {
        &self.names[v.index()]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.names.iter().position(|n| n == name).map(VertexId::from)
    }

    pub fn successors(&self, v: VertexId) -> &[VertexId] {
        &self.succ[v.index()]
    }

    /// Direct predecessors, sorted by id.
    pub fn preds(&self, v: VertexId) -> &[VertexId] {
        &self.pred[v.index()]
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.vertices().flat_map(move |u| self.succ[u.index()].iter().map(move |&v| (u, v)))
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.succ[u.index()].binary_search(&v).is_ok()
    }

    /// Vertices in a fixed topological order (smallest available id first).
    pub fn topological_order(&self) -> &[VertexId] {
        &self.topo
    }

    pub fn sources(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.pred[v.index()].is_empty()).collect()
    }

    pub fn sinks(&self) -> Vec<VertexId> {
        self.vertices().filter(|&v| self.succ[v.index()].is_empty()).collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.sources().len() == 1 && self.sinks().len() == 1
    }

    /// The unique source of a normalized DAG.
    pub fn source(&self) -> Option<VertexId> {
        match self.sources().as_slice() {
            [s] => Some(*s),
            _ => None,
        }
    }

    /// The unique sink of a normalized DAG.
    pub fn sink(&self) -> Option<VertexId> {
        match self.sinks().as_slice() {
            [s] => Some(*s),
            _ => None,
        }
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if v.index() < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownVertex(v.0))
        }
    }

    /// Adds zero-WCET dummy vertices so the result has exactly one source and
    /// one sink. Returns a structurally identical copy when nothing is needed.
    pub fn normalize(&self) -> Dag {
        let mut names = self.names.clone();
        let mut wcets = self.wcets.clone();
        let mut edges: Vec<(usize, usize)> = self.edges().map(|(a, b)| (a.index(), b.index())).collect();
        let sources = self.sources();
        let sinks = self.sinks();
        if sources.len() > 1 {
            let s = wcets.len();
            names.push(fresh_name(&names, "_source"));
            wcets.push(0);
            edges.extend(sources.iter().map(|v| (s, v.index())));
        }
        if sinks.len() > 1 {
            let t = wcets.len();
            names.push(fresh_name(&names, "_sink"));
            wcets.push(0);
            edges.extend(sinks.iter().map(|v| (v.index(), t)));
        }
        Dag::assemble(names, wcets, edges)
    }

    /// `vol(G)`: total WCET.
    pub fn volume(&self) -> Work {
        self.wcets.iter().sum()
    }

    /// `vol(V')` for an arbitrary vertex subset.
    pub fn volume_of(&self, vs: &[VertexId]) -> Result<Work> {
        let set: BTreeSet<VertexId> = vs.iter().copied().collect();
        set.iter().try_fold(0, |acc, &v| {
            self.check_vertex(v)?;
            Ok(acc + self.wcet(v))
        })
    }

    /// Longest source-to-sink path under the DAG's own WCETs.
    pub fn longest_path(&self) -> Path {
        self.longest_path_with(&self.wcets)
    }

    /// Longest maximal path under an overlay of per-vertex weights.
    ///
    /// Among paths of equal length the lexicographically smallest vertex
    /// sequence is returned. All candidates run from a source to a sink, so
    /// the greedy walk over `best` below yields that sequence directly.
    pub fn longest_path_with(&self, weights: &[Work]) -> Path {
        assert_eq!(weights.len(), self.len());
        if self.is_empty() {
            return Path { vertices: Vec::new(), length: 0 };
        }
        // best[v]: heaviest path from v down to some sink.
        let mut best = vec![0 as Work; self.len()];
        for &v in self.topo.iter().rev() {
            let tail = self.succ[v.index()].iter().map(|w| best[w.index()]).max().unwrap_or(0);
            best[v.index()] = weights[v.index()] + tail;
        }
        let start = self
            .vertices()
            .filter(|&v| self.pred[v.index()].is_empty())
            .max_by(|a, b| best[a.index()].cmp(&best[b.index()]).then(b.cmp(a)))
            .expect("a non-empty DAG has a source");
        let length = best[start.index()];
        let mut vertices = vec![start];
        let mut cur = start;
        while !self.succ[cur.index()].is_empty() {
            let need = best[cur.index()] - weights[cur.index()];
            // successors are sorted by id
            cur = *self.succ[cur.index()]
                .iter()
                .find(|w| best[w.index()] == need)
                .expect("some successor attains the suffix maximum");
            vertices.push(cur);
        }
        Path { vertices, length }
    }

    /// `pre(v)`.
    pub fn predecessors(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        Ok(self.pred[v.index()].clone())
    }

    /// `anc(v)`, sorted by id.
    pub fn ancestors(&self, v: VertexId) -> Result<Vec<VertexId>> {
        self.check_vertex(v)?;
        let mut seen = vec![false; self.len()];
        let mut stack = self.pred[v.index()].clone();
        while let Some(u) = stack.pop() {
            if !std::mem::replace(&mut seen[u.index()], true) {
                stack.extend_from_slice(&self.pred[u.index()]);
            }
        }
        Ok(self.vertices().filter(|u| seen[u.index()]).collect())
    }

    /// Whether a directed path (of one or more edges) leads from `u` to `v`.
    pub fn reaches(&self, u: VertexId, v: VertexId) -> bool {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            for &y in &self.succ[x.index()] {
                if y == v {
                    return true;
                }
                if !std::mem::replace(&mut seen[y.index()], true) {
                    stack.push(y);
                }
            }
        }
        false
    }

    /// True iff every consecutive pair in `vs` is connected by a directed path.
    pub fn is_generalized_path(&self, vs: &[VertexId]) -> bool {
        if vs.iter().any(|v| v.index() >= self.len()) {
            return false;
        }
        vs.windows(2).all(|w| self.reaches(w[0], w[1]))
    }

    /// True iff `vs` is a path: consecutive vertices joined by edges, no repeats.
    pub fn is_path(&self, vs: &[VertexId]) -> bool {
        if vs.iter().any(|v| v.index() >= self.len()) {
            return false;
        }
        let distinct: BTreeSet<_> = vs.iter().collect();
        distinct.len() == vs.len() && vs.windows(2).all(|w| self.has_edge(w[0], w[1]))
    }

    pub fn path_length(&self, vs: &[VertexId]) -> Work {
        vs.iter().map(|&v| self.wcet(v)).sum()
    }

    /// Same structure with WCETs replaced.
    pub fn with_wcets(&self, wcets: Vec<Work>) -> Result<Dag> {
        if wcets.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), got: wcets.len() });
        }
        Ok(Dag { wcets, ..self.clone() })
    }

    pub fn to_spec(&self) -> DagSpec {
        DagSpec {
            names: self.names.clone(),
            wcets: self.wcets.iter().map(|&w| w as i64).collect(),
            edges: self.edges().map(|(a, b)| (a.index(), b.index())).collect(),
        }
    }

    pub fn to_json(&self) -> DagJson {
        DagJson {
            vertices: self
                .vertices()
                .map(|v| VertexJson { name: self.name(v).to_owned(), wcet: self.wcet(v) as i64 })
                .collect(),
            edges: self.edges().map(|(a, b)| (self.name(a).to_owned(), self.name(b).to_owned())).collect(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Dag> {
        let json: DagJson = serde_json::from_str(s)?;
        Dag::try_from(json.into_spec()?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("DAG JSON is always serializable")
    }
}

fn fresh_name(names: &[String], base: &str) -> String {
    let mut candidate = base.to_owned();
    let mut i = 1;
    while names.contains(&candidate) {
        candidate = format!("{base}{i}");
        i += 1;
    }
    candidate
}

/// A path together with its length under the weights it was computed with.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Path {
    pub vertices: Vec<VertexId>,
    pub length: Work,
}

/// File format: `{"vertices": [{"name", "wcet"}], "edges": [[from, to]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagJson {
    pub vertices: Vec<VertexJson>,
    #[serde(default)]
    pub edges: Vec<(String, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub name: String,
    pub wcet: i64,
}

impl DagJson {
    /// Maps names to ids in declaration order.
    pub fn into_spec(self) -> Result<DagSpec> {
        let mut ids = HashMap::with_capacity(self.vertices.len());
        for (i, v) in self.vertices.iter().enumerate() {
            if ids.insert(v.name.clone(), i).is_some() {
                return Err(Error::DuplicateName(v.name.clone()));
            }
        }
        let lookup = |name: &String| ids.get(name).copied().ok_or_else(|| Error::UnknownName(name.clone()));
        let edges = self
            .edges
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let (names, wcets) = self.vertices.into_iter().map(|v| (v.name, v.wcet)).unzip();
        Ok(DagSpec { names, wcets, edges })
    }
}

/// The six-vertex DAG of the worked example: WCETs (1, 3, 1, 3, 1, 1),
/// `v0` fans out to `v1, v2, v3`; `v1, v2 -> v4`; `v4, v3 -> v5`.
pub fn example_dag() -> Dag {
    Dag::new(vec![1, 3, 1, 3, 1, 1], &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (4, 5), (3, 5)])
        .expect("example DAG is valid")
}
