//! Simplex trees, simplex cycles, and their exponent bookkeeping.
//!
//! A structure is a list of simplices, each a named set of vertex ids. Shared
//! vertex names encode incidence. Trees must satisfy three axioms: two
//! simplices share at most one vertex, the structure is connected, and there
//! is no closed loop of simplices. Cycles are S_0, …, S_{k−1} with consecutive
//! simplices (cyclically) sharing exactly one vertex and no other sharing.

mod canon;
mod rewrite;
mod threshold;

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

pub use canon::{shape_hash, shape_key};
pub(crate) use canon::fnv1a;
pub use rewrite::{
    branch_shift, canonicalize, canonicalize_traced, cycle_normal_forms, cycle_unbalance,
    simplex_unbalance, CanonicalTrace, RewriteKind, RewriteStep,
};
pub use threshold::{
    exponent_identity_check, predict_all_k, predict_threshold, ExponentBalance,
    ThresholdPrediction,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Tree,
    Cycle,
}

/// A named simplex; vertices are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Simplex {
    pub id: String,
    pub vertices: Vec<String>,
}

impl Simplex {
    pub fn new(id: impl Into<String>, vertices: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let mut vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        vertices.sort();
        Simplex {
            id: id.into(),
            vertices,
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn contains(&self, v: &str) -> bool {
        self.vertices.binary_search_by(|x| x.as_str().cmp(v)).is_ok()
    }
}

/// A simplex tree or cycle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SimplexStructure {
    kind: Kind,
    simplices: Vec<Simplex>,
}

/// The axiom a structure breaks, with witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    /// 1: pairwise sharing, 2: connectivity, 3: closed loop. 0 marks basic
    /// well-formedness (empty structure, short simplex, duplicate ids) and
    /// 4 marks the cycle shape.
    pub axiom: u8,
    pub message: String,
    pub witnesses: Vec<String>,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "axiom {}: {} [{}]",
            self.axiom,
            self.message,
            self.witnesses.join(", ")
        )
    }
}

/// A tree with a root simplex and an optional designated free vertex of the root.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RootedTree {
    structure: SimplexStructure,
    root: String,
    designated_free_vertex: Option<String>,
}

/// Roles of the vertices of one simplex in a rooted tree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct VertexRoles {
    pub parent: Option<String>,
    pub children: Vec<String>,
    pub free: Vec<String>,
}

/// A tree of k-simplices obtained from a graph tree by replacing every edge
/// with a k-simplex containing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeakTree {
    structure: SimplexStructure,
    k: usize,
    root: String,
    edges: Vec<(String, String)>,
}

/// JSON document for a structure.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureDoc {
    pub kind: Kind,
    pub simplices: Vec<Simplex>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub free_vertex: Option<String>,
}

/// How a structure is oriented from a starting simplex or vertex.
#[derive(Clone, Debug)]
pub(crate) struct Orientation {
    pub order: Vec<usize>,
    pub parent_vertex: Vec<Option<String>>,
    pub depth: Vec<usize>,
    /// Child simplices of each simplex grouped by the shared vertex.
    pub children: Vec<BTreeMap<String, Vec<usize>>>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) enum Start<'a> {
    Simplex(usize),
    Vertex(&'a str),
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Exponent of the number of congruence classes of n-simplices in F_q^d.
pub fn c_simplex(n: usize, d: usize) -> usize {
    if n <= d {
        binomial(n + 1, 2)
    } else {
        d * (n + 1) - binomial(d + 1, 2)
    }
}

impl SimplexStructure {
    pub fn new(kind: Kind, simplices: Vec<Simplex>) -> Self {
        SimplexStructure { kind, simplices }
    }

    /// Builds a tree and checks its axioms.
    pub fn tree(simplices: Vec<Simplex>) -> Result<Self> {
        let s = SimplexStructure::new(Kind::Tree, simplices);
        s.validate().map_err(|v| Error::Invalid(v.to_string()))?;
        Ok(s)
    }

    /// Builds a cycle and checks its axioms.
    pub fn cycle(simplices: Vec<Simplex>) -> Result<Self> {
        let s = SimplexStructure::new(Kind::Cycle, simplices);
        s.validate().map_err(|v| Error::Invalid(v.to_string()))?;
        Ok(s)
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplex(&self, id: &str) -> Option<&Simplex> {
        self.simplices.iter().find(|s| s.id == id)
    }

    pub(crate) fn index_of(&self, id: &str) -> Result<usize> {
        self.simplices
            .iter()
            .position(|s| s.id == id)
            .ok_or_else(|| Error::Parameter(format!("no simplex named {id}")))
    }

    pub fn vertices(&self) -> BTreeSet<String> {
        self.simplices
            .iter()
            .flat_map(|s| s.vertices.iter().cloned())
            .collect()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().len()
    }

    /// Edges in key order: by simplex id, then by sorted vertex pair.
    /// An edge lying in two simplices is impossible in a valid structure.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut simplices: Vec<&Simplex> = self.simplices.iter().collect();
        simplices.sort_by(|a, b| a.id.cmp(&b.id));
        let mut out = Vec::new();
        for s in simplices {
            for i in 0..s.vertices.len() {
                for j in i + 1..s.vertices.len() {
                    out.push((s.vertices[i].clone(), s.vertices[j].clone()));
                }
            }
        }
        out
    }

    /// Simplices containing each vertex.
    pub(crate) fn incidence(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut map: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, s) in self.simplices.iter().enumerate() {
            for v in &s.vertices {
                map.entry(v.as_str()).or_default().push(i);
            }
        }
        map
    }

    /// Vertices lying in no other simplex.
    pub fn unshared_vertices(&self, idx: usize) -> Vec<String> {
        let inc = self.incidence();
        self.simplices[idx]
            .vertices
            .iter()
            .filter(|v| inc[v.as_str()].len() == 1)
            .cloned()
            .collect()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.simplices.iter().map(Simplex::dim).collect()
    }

    pub fn max_dim(&self) -> usize {
        self.dims().into_iter().max().unwrap_or(0)
    }

    /// Checks the axioms of the structure's kind.
    pub fn validate(&self) -> std::result::Result<(), Violation> {
        let violation = |axiom: u8, message: &str, witnesses: Vec<String>| Violation {
            axiom,
            message: message.to_string(),
            witnesses,
        };
        if self.simplices.is_empty() {
            return Err(violation(0, "structure has no simplices", vec![]));
        }
        let mut ids = BTreeSet::new();
        for s in &self.simplices {
            if !ids.insert(&s.id) {
                return Err(violation(0, "duplicate simplex id", vec![s.id.clone()]));
            }
            if s.vertices.len() < 2 {
                return Err(violation(0, "simplex has fewer than 2 vertices", vec![s.id.clone()]));
            }
            if s.vertices.windows(2).any(|w| w[0] == w[1]) {
                return Err(violation(0, "simplex repeats a vertex", vec![s.id.clone()]));
            }
        }
        match self.kind {
            Kind::Tree => self.validate_tree(),
            Kind::Cycle => self.validate_cycle(),
        }
        .map_err(|(axiom, message, witnesses)| violation(axiom, &message, witnesses))
    }

    fn shared(&self, i: usize, j: usize) -> Vec<String> {
        self.simplices[i]
            .vertices
            .iter()
            .filter(|v| self.simplices[j].contains(v))
            .cloned()
            .collect()
    }

    fn validate_tree(&self) -> std::result::Result<(), (u8, String, Vec<String>)> {
        let n = self.simplices.len();
        for i in 0..n {
            for j in i + 1..n {
                let shared = self.shared(i, j);
                if shared.len() > 1 {
                    let mut w = vec![self.simplices[i].id.clone(), self.simplices[j].id.clone()];
                    w.extend(shared);
                    return Err((1, "two simplices share more than one vertex".into(), w));
                }
            }
        }
        // Union-find over simplices and vertices; an incidence joining two
        // already-connected nodes closes a loop.
        let inc = self.incidence();
        let vindex: BTreeMap<&str, usize> =
            inc.keys().enumerate().map(|(i, v)| (*v, n + i)).collect();
        let mut parent: Vec<usize> = (0..n + vindex.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (i, s) in self.simplices.iter().enumerate() {
            for v in &s.vertices {
                let (a, b) = (find(&mut parent, i), find(&mut parent, vindex[v.as_str()]));
                if a == b {
                    return Err((
                        3,
                        "simplices form a closed loop".into(),
                        vec![s.id.clone(), v.clone()],
                    ));
                }
                parent[a] = b;
            }
        }
        let root = find(&mut parent, 0);
        if let Some(i) = (1..n).find(|&i| find(&mut parent, i) != root) {
            return Err((
                2,
                "structure is not connected".into(),
                vec![self.simplices[0].id.clone(), self.simplices[i].id.clone()],
            ));
        }
        Ok(())
    }

    fn validate_cycle(&self) -> std::result::Result<(), (u8, String, Vec<String>)> {
        let k = self.simplices.len();
        if k < 3 {
            return Err((4, "a cycle needs at least 3 simplices".into(), vec![]));
        }
        for i in 0..k {
            for j in i + 1..k {
                let shared = self.shared(i, j);
                let consecutive = j == i + 1 || (i == 0 && j == k - 1);
                let ids = vec![self.simplices[i].id.clone(), self.simplices[j].id.clone()];
                if consecutive && shared.len() != 1 {
                    return Err((4, "consecutive simplices must share exactly one vertex".into(), ids));
                }
                if !consecutive && !shared.is_empty() {
                    return Err((4, "non-consecutive simplices share a vertex".into(), ids));
                }
            }
        }
        if let Some((v, _)) = self.incidence().iter().find(|(_, s)| s.len() > 2) {
            return Err((4, "vertex lies in more than two simplices".into(), vec![v.to_string()]));
        }
        Ok(())
    }

    /// Orients a tree from a root simplex or root vertex by breadth-first search.
    pub(crate) fn orient(&self, start: Start<'_>) -> Orientation {
        let n = self.simplices.len();
        let inc = self.incidence();
        let mut seen = vec![false; n];
        let mut parent_vertex = vec![None; n];
        let mut depth = vec![0; n];
        let mut queue = VecDeque::new();
        match start {
            Start::Simplex(i) => {
                seen[i] = true;
                queue.push_back(i);
            }
            Start::Vertex(v) => {
                for &i in inc.get(v).map(Vec::as_slice).unwrap_or(&[]) {
                    seen[i] = true;
                    parent_vertex[i] = Some(v.to_string());
                    queue.push_back(i);
                }
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut children = vec![BTreeMap::new(); n];
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for v in &self.simplices[i].vertices {
                if parent_vertex[i].as_deref() == Some(v.as_str()) {
                    continue;
                }
                let kids: Vec<usize> = inc[v.as_str()]
                    .iter()
                    .copied()
                    .filter(|&j| !seen[j])
                    .collect();
                for &j in &kids {
                    seen[j] = true;
                    parent_vertex[j] = Some(v.clone());
                    depth[j] = depth[i] + 1;
                    queue.push_back(j);
                }
                if !kids.is_empty() {
                    children[i].insert(v.clone(), kids);
                }
            }
        }
        Orientation {
            order,
            parent_vertex,
            depth,
            children,
        }
    }

    /// N_k = k + Σ_{dim S > k} (dim S − k).
    pub fn n_k(&self, k: usize) -> usize {
        k + self
            .dims()
            .into_iter()
            .filter(|&n| n > k)
            .map(|n| n - k)
            .sum::<usize>()
    }

    /// c(T) = Σ_S c_simplex(dim S, d).
    pub fn c(&self, d: usize) -> usize {
        self.dims().into_iter().map(|n| c_simplex(n, d)).sum()
    }

    pub fn to_doc(&self) -> StructureDoc {
        StructureDoc {
            kind: self.kind,
            simplices: self.simplices.clone(),
            root: None,
            free_vertex: None,
        }
    }
}

impl RootedTree {
    pub fn new(
        structure: SimplexStructure,
        root: impl Into<String>,
        designated_free_vertex: Option<String>,
    ) -> Result<Self> {
        let root = root.into();
        if structure.kind != Kind::Tree {
            return param("a rooted tree needs a tree structure");
        }
        structure
            .validate()
            .map_err(|v| Error::Invalid(v.to_string()))?;
        let idx = structure.index_of(&root)?;
        if let Some(v) = &designated_free_vertex {
            if !structure.unshared_vertices(idx).contains(v) {
                return param(format!("{v} is not a free vertex of the root {root}"));
            }
        }
        Ok(RootedTree {
            structure,
            root,
            designated_free_vertex,
        })
    }

    /// Roots a tree at its first simplex.
    pub fn from_structure(structure: SimplexStructure) -> Result<Self> {
        let root = structure
            .simplices
            .first()
            .map(|s| s.id.clone())
            .ok_or_else(|| Error::Invalid("empty structure".into()))?;
        RootedTree::new(structure, root, None)
    }

    pub fn structure(&self) -> &SimplexStructure {
        &self.structure
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn designated_free_vertex(&self) -> Option<&str> {
        self.designated_free_vertex.as_deref()
    }

    pub(crate) fn orientation(&self) -> Orientation {
        let idx = self.structure.index_of(&self.root).expect("root exists");
        self.structure.orient(Start::Simplex(idx))
    }

    /// Parent, child, and free vertices of every simplex, keyed by simplex id.
    pub fn classify_vertices(&self) -> BTreeMap<String, VertexRoles> {
        let o = self.orientation();
        self.structure
            .simplices
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let parent = o.parent_vertex[i].clone();
                let children: Vec<String> = o.children[i].keys().cloned().collect();
                let free = s
                    .vertices
                    .iter()
                    .filter(|v| parent.as_ref() != Some(*v) && !o.children[i].contains_key(*v))
                    .cloned()
                    .collect();
                (
                    s.id.clone(),
                    VertexRoles {
                        parent,
                        children,
                        free,
                    },
                )
            })
            .collect()
    }

    /// Depth of every simplex, keyed by simplex id.
    pub fn depths(&self) -> BTreeMap<String, usize> {
        let o = self.orientation();
        self.structure
            .simplices
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.clone(), o.depth[i]))
            .collect()
    }

    pub fn to_doc(&self) -> StructureDoc {
        StructureDoc {
            kind: Kind::Tree,
            simplices: self.structure.simplices.clone(),
            root: Some(self.root.clone()),
            free_vertex: self.designated_free_vertex.clone(),
        }
    }
}

impl WeakTree {
    /// Replaces every edge (a, b) of a graph tree with a k-simplex on a, b and
    /// k − 1 new vertices.
    pub fn new(edges: &[(&str, &str)], k: usize, root: &str) -> Result<Self> {
        if k == 0 {
            return param("k must be at least 1");
        }
        if edges.is_empty() {
            return param("a weak tree needs at least one edge");
        }
        let simplices = edges
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let mut vs = vec![a.to_string(), b.to_string()];
                vs.extend((1..k).map(|j| format!("{a}-{b}.{j}")));
                Simplex::new(format!("T{i:03}"), vs)
            })
            .collect();
        let structure = SimplexStructure::tree(simplices)?;
        if !structure.vertices().contains(root) {
            return param(format!("root {root} is not a vertex"));
        }
        Ok(WeakTree {
            structure,
            k,
            root: root.to_string(),
            edges: edges
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        })
    }

    /// A path x0 − x1 − … − x_len of k-simplices rooted at x0.
    pub fn path(len: usize, k: usize) -> Result<Self> {
        let names: Vec<String> = (0..=len).map(|i| format!("x{i}")).collect();
        let edges: Vec<(&str, &str)> = names
            .windows(2)
            .map(|w| (w[0].as_str(), w[1].as_str()))
            .collect();
        WeakTree::new(&edges, k, "x0")
    }

    pub fn structure(&self) -> &SimplexStructure {
        &self.structure
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    /// Number of simplices ℓ.
    pub fn ell(&self) -> usize {
        self.edges.len()
    }

    /// Edge count ℓ·C(k+1, 2).
    pub fn edge_count(&self) -> usize {
        self.ell() * binomial(self.k + 1, 2)
    }
}

impl StructureDoc {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// The structure without checking its axioms (for reporting violations).
    pub fn structure_unchecked(&self) -> SimplexStructure {
        SimplexStructure::new(
            self.kind,
            self.simplices
                .iter()
                .map(|s| Simplex::new(s.id.clone(), s.vertices.clone()))
                .collect(),
        )
    }

    pub fn structure(&self) -> Result<SimplexStructure> {
        let s = self.structure_unchecked();
        s.validate().map_err(|v| Error::Invalid(v.to_string()))?;
        Ok(s)
    }

    /// A rooted tree; the root defaults to the first simplex.
    pub fn rooted(&self) -> Result<RootedTree> {
        let s = self.structure()?;
        let root = match &self.root {
            Some(r) => r.clone(),
            None => s.simplices[0].id.clone(),
        };
        RootedTree::new(s, root, self.free_vertex.clone())
    }
}
