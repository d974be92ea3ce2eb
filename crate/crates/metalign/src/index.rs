//! Dense indexing over the vertices of one or two graphs.
//!
//! Numeric stages address vertices by position in one flat array:
//! graph A genes, graph A metabolites, graph B genes, graph B
//! metabolites, each block in graph insertion order. The index also
//! keeps the symmetric adjacency built from structure triples, which
//! the interactive loop extends as transferred triples arrive.

use crate::graph::{Direction, MetabolicGraph, Triple, VertexId, VertexKind};
use std::collections::{HashMap, HashSet};
use std::ops::Range;

/// Triple in dense-index form. Endpoints may belong to different
/// graphs (cross-graph triples from transfer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IdxTriple {
    pub met: u32,
    pub dir: Direction,
    pub gene: u32,
}

#[derive(Debug, Clone)]
pub struct PairIndex {
    vertices: Vec<VertexId>,
    by_id: HashMap<VertexId, usize>,
    /// Block ranges: [A genes, A metabolites, B genes, B metabolites].
    /// Single-graph indexes leave the B blocks empty.
    ranges: [Range<usize>; 4],
    adjacency: Vec<Vec<(u32, Direction)>>,
    edge_set: HashSet<(u32, u32, Direction)>,
}

impl PairIndex {
    pub fn from_pair(a: &MetabolicGraph, b: &MetabolicGraph) -> PairIndex {
        Self::build(&[a, b])
    }

    pub fn from_single(g: &MetabolicGraph) -> PairIndex {
        Self::build(&[g])
    }

    fn build(graphs: &[&MetabolicGraph]) -> PairIndex {
        let mut vertices = Vec::new();
        let mut ranges: Vec<Range<usize>> = Vec::new();
        for g in graphs {
            let start = vertices.len();
            vertices.extend(g.genes().map(|id| g.gene_id(id)));
            ranges.push(start..vertices.len());
            let start = vertices.len();
            vertices.extend(g.metabolites().map(|id| g.metabolite_id(id)));
            ranges.push(start..vertices.len());
        }
        while ranges.len() < 4 {
            let end = vertices.len();
            ranges.push(end..end);
        }
        let by_id: HashMap<VertexId, usize> =
            vertices.iter().cloned().enumerate().map(|(i, v)| (v, i)).collect();
        let mut index = PairIndex {
            vertices,
            by_id,
            ranges: [
                ranges[0].clone(),
                ranges[1].clone(),
                ranges[2].clone(),
                ranges[3].clone(),
            ],
            adjacency: Vec::new(),
            edge_set: HashSet::new(),
        };
        index.adjacency = vec![Vec::new(); index.vertices.len()];
        for g in graphs {
            for t in g.triples() {
                let it = index.to_idx(t).expect("graph triple endpoints must be indexed");
                index.insert_edge(it);
            }
        }
        index
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertex(&self, i: usize) -> &VertexId {
        &self.vertices[i]
    }

    pub fn index_of(&self, v: &VertexId) -> Option<usize> {
        self.by_id.get(v).copied()
    }

    /// Graph slot (0 or 1) of a vertex.
    pub fn graph_of(&self, i: usize) -> usize {
        usize::from(i >= self.ranges[2].start)
    }

    pub fn kind_of(&self, i: usize) -> VertexKind {
        if self.ranges[0].contains(&i) || self.ranges[2].contains(&i) {
            VertexKind::Gene
        } else {
            VertexKind::Metabolite
        }
    }

    /// Dense range of `kind` vertices in graph slot `graph`.
    pub fn block(&self, graph: usize, kind: VertexKind) -> Range<usize> {
        let which = graph * 2 + usize::from(kind == VertexKind::Metabolite);
        self.ranges[which].clone()
    }

    /// Vertices of the same kind in the other graph.
    pub fn counterpart_block(&self, i: usize) -> Range<usize> {
        self.block(1 - self.graph_of(i), self.kind_of(i))
    }

    pub fn adjacency(&self) -> &[Vec<(u32, Direction)>] {
        &self.adjacency
    }

    pub fn to_idx(&self, t: &Triple) -> Option<IdxTriple> {
        Some(IdxTriple {
            met: self.index_of(&t.metabolite)? as u32,
            dir: t.direction,
            gene: self.index_of(&t.gene)? as u32,
        })
    }

    pub fn to_triple(&self, t: IdxTriple) -> Triple {
        Triple::new(
            self.vertex(t.met as usize).clone(),
            t.dir,
            self.vertex(t.gene as usize).clone(),
        )
    }

    fn insert_edge(&mut self, t: IdxTriple) -> bool {
        if !self.edge_set.insert((t.met, t.gene, t.dir)) {
            return false;
        }
        self.adjacency[t.met as usize].push((t.gene, t.dir));
        self.adjacency[t.gene as usize].push((t.met, t.dir));
        true
    }

    /// Add structure edges for (usually transferred) triples; edges
    /// already present are ignored. Returns how many were new.
    pub fn add_edges(&mut self, triples: &[IdxTriple]) -> usize {
        triples.iter().filter(|&&t| self.insert_edge(t)).count()
    }
}
