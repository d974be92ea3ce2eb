//! Data model and ingestion for bipartite metabolic graphs.
//!
//! A graph holds two vertex kinds (genes and metabolites) and a set of
//! triples `(metabolite, direction, gene)` where the direction is
//! `left` for reactants and `right` for products. Triples are ingested
//! from a 3-column TSV, validated, split into train/test/valid pools,
//! and corrupted for negative sampling.
//!
//! File formats:
//! - triple TSV: `metabolite_id <TAB> direction <TAB> gene_id`, UTF-8,
//!   `#`-prefixed comment lines;
//! - inter-link TSV: `left_id <TAB> right_id`.

use indexmap::{IndexMap, IndexSet};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: malformed record (expected `metabolite<TAB>direction<TAB>gene`)")]
    MalformedLine { path: String, line: usize },
    #[error("{path}:{line}: direction `{token}` is not one of `left`, `right`")]
    BadDirection { path: String, line: usize, token: String },
    #[error("graph file {path} contains no triples")]
    EmptyGraph { path: String },
    #[error("split ratios {0:?} do not sum to 1")]
    BadRatios([f64; 3]),
    #[error("cannot split {0} triples into three pools")]
    TooFewTriples(usize),
    #[error("could not draw {wanted} non-colliding negatives (graph too dense or too small)")]
    Exhausted { wanted: usize },
    #[error("{path}:{line}: vertex id `{id}` is ambiguous between kinds")]
    AmbiguousId { path: String, line: usize, id: String },
    #[error("{path}:{line}: vertex id `{id}` is not present in graph `{graph}`")]
    UnknownVertex { path: String, line: usize, id: String, graph: String },
    #[error("graph failed validation with {0} violations")]
    Invalid(usize),
}

/// Vertex kind; triples always connect a metabolite to a gene.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexKind {
    Gene,
    Metabolite,
}

impl fmt::Display for VertexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexKind::Gene => write!(f, "gene"),
            VertexKind::Metabolite => write!(f, "metabolite"),
        }
    }
}

/// Reaction role of the metabolite relative to the gene's enzyme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Left,
    Right,
}

impl Direction {
    pub const ALL: [Direction; 2] = [Direction::Left, Direction::Right];

    pub fn parse(token: &str) -> Option<Direction> {
        match token {
            "left" => Some(Direction::Left),
            "right" => Some(Direction::Right),
            _ => None,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Direction::Left => 0,
            Direction::Right => 1,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::Left => write!(f, "left"),
            Direction::Right => write!(f, "right"),
        }
    }
}

/// Globally unique vertex handle: owning graph, kind, and the local
/// identifier that is unique within `(graph, kind)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId {
    pub graph: String,
    pub kind: VertexKind,
    pub id: String,
}

impl VertexId {
    pub fn gene(graph: &str, id: &str) -> Self {
        VertexId { graph: graph.to_string(), kind: VertexKind::Gene, id: id.to_string() }
    }

    pub fn metabolite(graph: &str, id: &str) -> Self {
        VertexId { graph: graph.to_string(), kind: VertexKind::Metabolite, id: id.to_string() }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.graph, self.kind, self.id)
    }
}

/// One association: the metabolite participates (as reactant or
/// product, per `direction`) in a reaction catalyzed by the gene's
/// enzyme. Triples stored in a graph are intra-graph; transferred
/// triples may straddle graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub metabolite: VertexId,
    pub direction: Direction,
    pub gene: VertexId,
}

impl Triple {
    pub fn new(metabolite: VertexId, direction: Direction, gene: VertexId) -> Self {
        Triple { metabolite, direction, gene }
    }

    /// Both endpoints live in the same graph.
    pub fn is_intra(&self) -> bool {
        self.metabolite.graph == self.gene.graph
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.metabolite, self.direction, self.gene)
    }
}

/// Cross-graph vertex equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Seed,
    Inferred,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct InterLink {
    pub left: VertexId,
    pub right: VertexId,
    pub provenance: Provenance,
}

/// A violation found by [`MetabolicGraph::validate`]. Serialized as one
/// JSON object per line in validation reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// A triple endpoint carries the wrong vertex kind.
    WrongKind { triple: String, endpoint: String, expected: VertexKind, actual: VertexKind },
    /// A triple references a vertex missing from the vertex sets.
    MissingVertex { triple: String, endpoint: String },
    /// A triple endpoint belongs to a different graph.
    ForeignGraph { triple: String, endpoint: String, expected_graph: String },
}

/// Heterogeneous bipartite metabolic graph.
///
/// Vertex sets keep insertion order, which downstream indexing relies
/// on for determinism. The adjacency view is the symmetric closure of
/// the triple set with unit weights; training-time down-weights live
/// outside the graph (see [`crate::dangling`]).
#[derive(Debug, Clone)]
pub struct MetabolicGraph {
    tag: String,
    genes: IndexSet<String>,
    metabolites: IndexSet<String>,
    triples: IndexSet<Triple>,
}

impl MetabolicGraph {
    /// Assemble a graph without validating the bipartite invariants.
    /// Run [`MetabolicGraph::validate`] afterwards; [`load_graph`]
    /// produces valid graphs by construction.
    pub fn from_parts_unchecked(
        tag: &str,
        genes: impl IntoIterator<Item = String>,
        metabolites: impl IntoIterator<Item = String>,
        triples: impl IntoIterator<Item = Triple>,
    ) -> Self {
        MetabolicGraph {
            tag: tag.to_string(),
            genes: genes.into_iter().collect(),
            metabolites: metabolites.into_iter().collect(),
            triples: triples.into_iter().collect(),
        }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn genes(&self) -> impl ExactSizeIterator<Item = &str> {
        self.genes.iter().map(|s| s.as_str())
    }

    pub fn metabolites(&self) -> impl ExactSizeIterator<Item = &str> {
        self.metabolites.iter().map(|s| s.as_str())
    }

    pub fn n_genes(&self) -> usize {
        self.genes.len()
    }

    pub fn n_metabolites(&self) -> usize {
        self.metabolites.len()
    }

    pub fn triples(&self) -> impl ExactSizeIterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn n_triples(&self) -> usize {
        self.triples.len()
    }

    pub fn has_triple(&self, t: &Triple) -> bool {
        self.triples.contains(t)
    }

    pub fn has_gene(&self, id: &str) -> bool {
        self.genes.contains(id)
    }

    pub fn has_metabolite(&self, id: &str) -> bool {
        self.metabolites.contains(id)
    }

    pub fn gene_id(&self, id: &str) -> VertexId {
        VertexId::gene(&self.tag, id)
    }

    pub fn metabolite_id(&self, id: &str) -> VertexId {
        VertexId::metabolite(&self.tag, id)
    }

    /// Resolve a bare identifier against both vertex sets.
    pub fn resolve_id(&self, id: &str) -> ResolvedId {
        match (self.genes.contains(id), self.metabolites.contains(id)) {
            (true, true) => ResolvedId::Ambiguous,
            (true, false) => ResolvedId::Found(self.gene_id(id)),
            (false, true) => ResolvedId::Found(self.metabolite_id(id)),
            (false, false) => ResolvedId::Unknown,
        }
    }

    /// All vertices, genes first, in insertion order.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut out = Vec::with_capacity(self.genes.len() + self.metabolites.len());
        for g in &self.genes {
            out.push(self.gene_id(g));
        }
        for m in &self.metabolites {
            out.push(self.metabolite_id(m));
        }
        out
    }

    /// Symmetric adjacency view with default weight 1.0.
    pub fn adjacency(&self) -> IndexMap<VertexId, Vec<(VertexId, Direction, f64)>> {
        let mut adj: IndexMap<VertexId, Vec<(VertexId, Direction, f64)>> = IndexMap::new();
        for v in self.vertices() {
            adj.insert(v, Vec::new());
        }
        for t in &self.triples {
            adj.entry(t.metabolite.clone())
                .or_default()
                .push((t.gene.clone(), t.direction, 1.0));
            adj.entry(t.gene.clone())
                .or_default()
                .push((t.metabolite.clone(), t.direction, 1.0));
        }
        adj
    }

    /// Report every bipartite or referential violation. Empty iff the
    /// graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for t in &self.triples {
            let ts = t.to_string();
            for (vid, expected) in
                [(&t.metabolite, VertexKind::Metabolite), (&t.gene, VertexKind::Gene)]
            {
                if vid.kind != expected {
                    out.push(Violation::WrongKind {
                        triple: ts.clone(),
                        endpoint: vid.to_string(),
                        expected,
                        actual: vid.kind,
                    });
                    continue;
                }
                if vid.graph != self.tag {
                    out.push(Violation::ForeignGraph {
                        triple: ts.clone(),
                        endpoint: vid.to_string(),
                        expected_graph: self.tag.clone(),
                    });
                    continue;
                }
                let known = match vid.kind {
                    VertexKind::Gene => self.genes.contains(&vid.id),
                    VertexKind::Metabolite => self.metabolites.contains(&vid.id),
                };
                if !known {
                    out.push(Violation::MissingVertex { triple: ts.clone(), endpoint: vid.to_string() });
                }
            }
        }
        out
    }

    /// Same vertex sets, triples restricted to `keep`. Vertices that
    /// lose all their triples stay in the graph.
    pub fn with_triples(&self, keep: impl IntoIterator<Item = Triple>) -> MetabolicGraph {
        MetabolicGraph {
            tag: self.tag.clone(),
            genes: self.genes.clone(),
            metabolites: self.metabolites.clone(),
            triples: keep.into_iter().collect(),
        }
    }

    /// Deterministic uniform split into train/test/valid pools.
    ///
    /// Sizes follow largest-remainder rounding of the ratios, so equal
    /// inputs always produce equal sizes; ties go to the earlier pool.
    pub fn split_triples(&self, ratios: (f64, f64, f64), seed: u64) -> Result<DataSplit, GraphError> {
        let r = [ratios.0, ratios.1, ratios.2];
        if (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 || r.iter().any(|&x| x < 0.0) {
            return Err(GraphError::BadRatios(r));
        }
        let n = self.triples.len();
        if n < 3 {
            return Err(GraphError::TooFewTriples(n));
        }
        let sizes = largest_remainder_sizes(n, &r);
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = crate::rng::stream(seed, &format!("split:{}", self.tag));
        shuffle(&mut order, &mut rng);
        let all: Vec<&Triple> = self.triples.iter().collect();
        let mut pools: [IndexSet<Triple>; 3] = [IndexSet::new(), IndexSet::new(), IndexSet::new()];
        let mut cursor = 0usize;
        for (p, &size) in sizes.iter().enumerate() {
            for _ in 0..size {
                pools[p].insert(all[order[cursor]].clone());
                cursor += 1;
            }
        }
        let [train, test, valid] = pools;
        Ok(DataSplit { train, test, valid, seed })
    }

    /// Corrupt `t` into `rate` negatives, each differing from `t` in
    /// exactly one endpoint and absent from this graph's triple set.
    pub fn sample_negatives(
        &self,
        t: &Triple,
        rate: usize,
        rng: &mut impl Rng,
    ) -> Result<Vec<Triple>, GraphError> {
        assert!(rate >= 1, "negative sampling rate must be at least 1");
        let genes: Vec<&String> = self.genes.iter().collect();
        let mets: Vec<&String> = self.metabolites.iter().collect();
        let mut out = Vec::with_capacity(rate);
        let budget = 200 * rate.max(genes.len() + mets.len());
        let mut attempts = 0usize;
        while out.len() < rate {
            if attempts >= budget {
                return Err(GraphError::Exhausted { wanted: rate });
            }
            attempts += 1;
            let corrupt_gene = rng.gen_bool(0.5);
            let candidate = if corrupt_gene {
                if genes.len() < 2 && mets.len() < 2 {
                    return Err(GraphError::Exhausted { wanted: rate });
                }
                if genes.len() < 2 {
                    continue;
                }
                let pick = genes[rng.gen_range(0..genes.len())];
                if *pick == t.gene.id {
                    continue;
                }
                Triple::new(t.metabolite.clone(), t.direction, self.gene_id(pick))
            } else {
                if mets.len() < 2 && genes.len() < 2 {
                    return Err(GraphError::Exhausted { wanted: rate });
                }
                if mets.len() < 2 {
                    continue;
                }
                let pick = mets[rng.gen_range(0..mets.len())];
                if *pick == t.metabolite.id {
                    continue;
                }
                Triple::new(self.metabolite_id(pick), t.direction, t.gene.clone())
            };
            if !self.triples.contains(&candidate) {
                out.push(candidate);
            }
        }
        Ok(out)
    }

    /// Write the triple TSV format read by [`load_graph`].
    pub fn save(&self, path: &Path) -> Result<(), GraphError> {
        let file = std::fs::File::create(path).map_err(|source| GraphError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut w = BufWriter::new(file);
        let write = |w: &mut BufWriter<std::fs::File>| -> std::io::Result<()> {
            writeln!(w, "# metabolite\tdirection\tgene")?;
            for t in &self.triples {
                writeln!(w, "{}\t{}\t{}", t.metabolite.id, t.direction, t.gene.id)?;
            }
            Ok(())
        };
        write(&mut w).map_err(|source| GraphError::Io { path: path.display().to_string(), source })
    }
}

fn largest_remainder_sizes(n: usize, ratios: &[f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = ratios.iter().map(|r| r * n as f64).collect();
    let mut sizes: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = sizes.iter().sum();
    let mut order: Vec<usize> = (0..3).collect();
    // Stable by pool position on equal remainders.
    order.sort_by(|&a, &b| {
        let ra = exact[a] - exact[a].floor();
        let rb = exact[b] - exact[b].floor();
        rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
    });
    for k in 0..(n - assigned) {
        sizes[order[k % 3]] += 1;
    }
    [sizes[0], sizes[1], sizes[2]]
}

fn shuffle(xs: &mut [usize], rng: &mut impl Rng) {
    for i in (1..xs.len()).rev() {
        let j = rng.gen_range(0..=i);
        xs.swap(i, j);
    }
}

/// Disjoint train/test/valid triple pools.
#[derive(Debug, Clone)]
pub struct DataSplit {
    pub train: IndexSet<Triple>,
    pub test: IndexSet<Triple>,
    pub valid: IndexSet<Triple>,
    pub seed: u64,
}

impl DataSplit {
    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.test.len(), self.valid.len())
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.train.contains(t) || self.test.contains(t) || self.valid.contains(t)
    }
}

/// Load a triple TSV. Duplicate records collapse to one triple with a
/// logged warning; an input without any data lines is an error.
pub fn load_graph(path: &Path, tag: &str) -> Result<MetabolicGraph, GraphError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path)
        .map_err(|source| GraphError::Io { path: display.clone(), source })?;
    let reader = std::io::BufReader::new(file);
    let mut genes = IndexSet::new();
    let mut metabolites = IndexSet::new();
    let mut triples = IndexSet::new();
    let mut duplicates = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| GraphError::Io { path: display.clone(), source })?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let (met, dir_token, gene) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(m), Some(d), Some(g), None) if !m.is_empty() && !g.is_empty() => (m, d, g),
            _ => return Err(GraphError::MalformedLine { path: display, line: lineno + 1 }),
        };
        let direction = Direction::parse(dir_token).ok_or_else(|| GraphError::BadDirection {
            path: display.clone(),
            line: lineno + 1,
            token: dir_token.to_string(),
        })?;
        metabolites.insert(met.to_string());
        genes.insert(gene.to_string());
        let triple = Triple::new(
            VertexId::metabolite(tag, met),
            direction,
            VertexId::gene(tag, gene),
        );
        if !triples.insert(triple) {
            duplicates += 1;
        }
    }
    if triples.is_empty() {
        return Err(GraphError::EmptyGraph { path: display });
    }
    if duplicates > 0 {
        log::warn!("{display}: collapsed {duplicates} duplicate triple records");
    }
    Ok(MetabolicGraph { tag: tag.to_string(), genes, metabolites, triples })
}

/// Load an inter-link TSV (`left_id <TAB> right_id`). Identifiers are
/// resolved against each graph's vertex sets; an id present under both
/// kinds in one graph is rejected as ambiguous.
pub fn load_inter_links(
    path: &Path,
    left_graph: &MetabolicGraph,
    right_graph: &MetabolicGraph,
) -> Result<Vec<InterLink>, GraphError> {
    let display = path.display().to_string();
    let file = std::fs::File::open(path)
        .map_err(|source| GraphError::Io { path: display.clone(), source })?;
    let reader = std::io::BufReader::new(file);
    let mut out = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| GraphError::Io { path: display.clone(), source })?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let (l, r) = match (fields.next(), fields.next(), fields.next()) {
            (Some(l), Some(r), None) if !l.is_empty() && !r.is_empty() => (l, r),
            _ => return Err(GraphError::MalformedLine { path: display, line: lineno + 1 }),
        };
        let left = resolve_vertex(left_graph, l, &display, lineno + 1)?;
        let right = resolve_vertex(right_graph, r, &display, lineno + 1)?;
        out.push(InterLink { left, right, provenance: Provenance::Seed });
    }
    Ok(out)
}

/// Outcome of looking a bare id up in a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ResolvedId {
    Found(VertexId),
    Ambiguous,
    Unknown,
}

fn resolve_vertex(
    g: &MetabolicGraph,
    id: &str,
    path: &str,
    line: usize,
) -> Result<VertexId, GraphError> {
    match g.resolve_id(id) {
        ResolvedId::Found(v) => Ok(v),
        ResolvedId::Ambiguous => {
            Err(GraphError::AmbiguousId { path: path.to_string(), line, id: id.to_string() })
        }
        ResolvedId::Unknown => Err(GraphError::UnknownVertex {
            path: path.to_string(),
            line,
            id: id.to_string(),
            graph: g.tag().to_string(),
        }),
    }
}

/// Write inter-links in the TSV format read by [`load_inter_links`].
pub fn save_inter_links(path: &Path, links: &[InterLink]) -> Result<(), GraphError> {
    let file = std::fs::File::create(path)
        .map_err(|source| GraphError::Io { path: path.display().to_string(), source })?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<std::fs::File>| -> std::io::Result<()> {
        writeln!(w, "# left\tright")?;
        for l in links {
            writeln!(w, "{}\t{}", l.left.id, l.right.id)?;
        }
        Ok(())
    };
    write(&mut w).map_err(|source| GraphError::Io { path: path.display().to_string(), source })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::io::Write as _;

    fn graph_from_tsv(content: &str, tag: &str) -> Result<MetabolicGraph, GraphError> {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        load_graph(f.path(), tag)
    }

    fn toy_graph(tag: &str, n_genes: usize, n_mets: usize, triples: &[(usize, Direction, usize)]) -> MetabolicGraph {
        let genes: Vec<String> = (0..n_genes).map(|i| format!("g{i}")).collect();
        let mets: Vec<String> = (0..n_mets).map(|i| format!("m{i}")).collect();
        let ts: Vec<Triple> = triples
            .iter()
            .map(|&(m, d, g)| {
                Triple::new(
                    VertexId::metabolite(tag, &format!("m{m}")),
                    d,
                    VertexId::gene(tag, &format!("g{g}")),
                )
            })
            .collect();
        MetabolicGraph::from_parts_unchecked(tag, genes, mets, ts)
    }

    #[test]
    fn load_collapses_duplicates() {
        let g = graph_from_tsv("m1\tleft\tg1\nm1\tleft\tg1\nm2\tright\tg1\n", "t").unwrap();
        assert_eq!(g.n_triples(), 2);
        assert_eq!(g.n_genes(), 1);
        assert_eq!(g.n_metabolites(), 2);
    }

    #[test]
    fn load_rejects_empty_and_malformed() {
        match graph_from_tsv("# only comments\n# here\n", "t") {
            Err(GraphError::EmptyGraph { .. }) => {}
            other => panic!("expected EmptyGraph, got {other:?}"),
        }
        match graph_from_tsv("m1\tleft\n", "t") {
            Err(GraphError::MalformedLine { line: 1, .. }) => {}
            other => panic!("expected MalformedLine, got {other:?}"),
        }
        match graph_from_tsv("m1\tup\tg1\n", "t") {
            Err(GraphError::BadDirection { line: 1, ref token, .. }) if token == "up" => {}
            other => panic!("expected BadDirection, got {other:?}"),
        }
    }

    #[test]
    fn validate_accepts_loaded_graphs() {
        let g = graph_from_tsv("m1\tleft\tg1\nm2\tright\tg1\n", "t").unwrap();
        assert!(g.validate().is_empty());
    }

    #[test]
    fn validate_reports_wrong_kind() {
        let bad = Triple::new(VertexId::gene("t", "g1"), Direction::Left, VertexId::gene("t", "g2"));
        let g = MetabolicGraph::from_parts_unchecked(
            "t",
            vec!["g1".into(), "g2".into()],
            vec![],
            vec![bad],
        );
        let report = g.validate();
        assert_eq!(report.len(), 1);
        assert!(matches!(report[0], Violation::WrongKind { .. }));
    }

    #[test]
    fn validate_reports_missing_vertex() {
        let t = Triple::new(
            VertexId::metabolite("t", "mx"),
            Direction::Left,
            VertexId::gene("t", "g1"),
        );
        let g = MetabolicGraph::from_parts_unchecked("t", vec!["g1".into()], vec![], vec![t]);
        let report = g.validate();
        assert_eq!(report.len(), 1);
        assert!(matches!(report[0], Violation::MissingVertex { .. }));
    }

    #[test]
    fn split_exact_ratio_and_determinism() {
        let triples: Vec<(usize, Direction, usize)> =
            (0..10).map(|i| (i % 4, Direction::Left, i % 3)).collect();
        let g = toy_graph("t", 3, 4, &triples);
        let s1 = g.split_triples((0.6, 0.3, 0.1), 7).unwrap();
        assert_eq!(s1.sizes(), (6, 3, 1));
        let s2 = g.split_triples((0.6, 0.3, 0.1), 7).unwrap();
        assert_eq!(s1.train, s2.train);
        assert_eq!(s1.test, s2.test);
        assert_eq!(s1.valid, s2.valid);
    }

    #[test]
    fn split_sizes_at_dataset_scale() {
        // Largest-remainder arithmetic on 7,746 triples at 6:3:1.
        let sizes = largest_remainder_sizes(7746, &[0.6, 0.3, 0.1]);
        assert_eq!(sizes, [4648, 2324, 774]);
    }

    #[test]
    fn split_rejects_bad_inputs() {
        let g = toy_graph("t", 2, 2, &[(0, Direction::Left, 0), (1, Direction::Right, 1)]);
        assert!(matches!(
            g.split_triples((0.5, 0.3, 0.1), 1),
            Err(GraphError::BadRatios(_))
        ));
        assert!(matches!(
            g.split_triples((0.6, 0.3, 0.1), 1),
            Err(GraphError::TooFewTriples(2))
        ));
    }

    #[test]
    fn negatives_avoid_true_triples_and_differ_in_one_endpoint() {
        let triples: Vec<(usize, Direction, usize)> = vec![
            (0, Direction::Left, 0),
            (1, Direction::Left, 1),
            (2, Direction::Right, 2),
        ];
        let g = toy_graph("t", 3, 3, &triples);
        let positive = g.triples().next().unwrap().clone();
        let mut rng = crate::rng::stream(3, "neg-test");
        let negs = g.sample_negatives(&positive, 10, &mut rng).unwrap();
        assert_eq!(negs.len(), 10);
        for n in &negs {
            assert!(!g.has_triple(n));
            let same_gene = n.gene == positive.gene;
            let same_met = n.metabolite == positive.metabolite;
            assert!(same_gene ^ same_met, "exactly one endpoint must change: {n}");
            assert_eq!(n.direction, positive.direction);
        }
    }

    #[test]
    fn negatives_exhaust_on_degenerate_graph() {
        let g = toy_graph("t", 1, 1, &[(0, Direction::Left, 0)]);
        let positive = g.triples().next().unwrap().clone();
        let mut rng = crate::rng::stream(4, "neg-exhaust");
        assert!(matches!(
            g.sample_negatives(&positive, 1, &mut rng),
            Err(GraphError::Exhausted { .. })
        ));
    }

    #[test]
    fn negatives_fall_in_enumerated_complement() {
        // 3-vertex toy graph: enumerate every legal corruption and check
        // membership of sampled negatives.
        let g = toy_graph("t", 2, 1, &[(0, Direction::Left, 0)]);
        let positive = g.triples().next().unwrap().clone();
        let mut complement = IndexSet::new();
        for gid in g.genes() {
            let cand = Triple::new(positive.metabolite.clone(), positive.direction, g.gene_id(gid));
            if !g.has_triple(&cand) && cand != positive {
                complement.insert(cand);
            }
        }
        for mid in g.metabolites() {
            let cand = Triple::new(g.metabolite_id(mid), positive.direction, positive.gene.clone());
            if !g.has_triple(&cand) && cand != positive {
                complement.insert(cand);
            }
        }
        let mut rng = crate::rng::stream(5, "neg-enum");
        let negs = g.sample_negatives(&positive, 1, &mut rng).unwrap();
        assert!(complement.contains(&negs[0]), "{} not in complement", negs[0]);
    }

    #[test]
    fn save_load_round_trip_preserves_triples() {
        let triples: Vec<(usize, Direction, usize)> = vec![
            (0, Direction::Left, 1),
            (2, Direction::Right, 0),
            (1, Direction::Left, 2),
        ];
        let g = toy_graph("t", 3, 3, &triples);
        let f = tempfile::NamedTempFile::new().unwrap();
        g.save(f.path()).unwrap();
        let loaded = load_graph(f.path(), "t").unwrap();
        let a: IndexSet<&Triple> = g.triples().collect();
        let b: IndexSet<&Triple> = loaded.triples().collect();
        assert_eq!(a, b);
    }

    #[test]
    fn inter_link_loading_resolves_kinds() {
        let ga = toy_graph("a", 2, 2, &[(0, Direction::Left, 0)]);
        let gb = toy_graph("b", 2, 2, &[(1, Direction::Right, 1)]);
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "g0\tg1").unwrap();
        writeln!(f, "m1\tm0").unwrap();
        let links = load_inter_links(f.path(), &ga, &gb).unwrap();
        assert_eq!(links.len(), 2);
        assert_eq!(links[0].left, VertexId::gene("a", "g0"));
        assert_eq!(links[0].right, VertexId::gene("b", "g1"));
        assert_eq!(links[1].left.kind, VertexKind::Metabolite);
        assert_eq!(links[0].provenance, Provenance::Seed);
    }

    #[test]
    fn inter_link_loading_rejects_unknown_ids() {
        let ga = toy_graph("a", 1, 1, &[(0, Direction::Left, 0)]);
        let gb = toy_graph("b", 1, 1, &[(0, Direction::Left, 0)]);
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "gX\tg0").unwrap();
        assert!(matches!(
            load_inter_links(f.path(), &ga, &gb),
            Err(GraphError::UnknownVertex { .. })
        ));
    }

    proptest! {
        #[test]
        fn split_partitions_the_triple_set(seed in 0u64..1000) {
            let triples: Vec<(usize, Direction, usize)> = (0..100)
                .map(|i| (i % 10, if i % 2 == 0 { Direction::Left } else { Direction::Right }, i / 10))
                .collect();
            let g = toy_graph("t", 10, 10, &triples);
            let s = g.split_triples((0.6, 0.3, 0.1), seed).unwrap();
            let (tr, te, va) = s.sizes();
            prop_assert_eq!(tr + te + va, 100);
            prop_assert_eq!((tr, te, va), (60, 30, 10));
            for t in g.triples() {
                let hits = s.train.contains(t) as usize
                    + s.test.contains(t) as usize
                    + s.valid.contains(t) as usize;
                prop_assert_eq!(hits, 1);
            }
        }

        #[test]
        fn stored_triples_are_bipartite(n_triples in 1usize..30) {
            let triples: Vec<(usize, Direction, usize)> =
                (0..n_triples).map(|i| (i % 5, Direction::Left, i % 4)).collect();
            let g = toy_graph("t", 4, 5, &triples);
            for t in g.triples() {
                prop_assert_eq!(t.metabolite.kind, VertexKind::Metabolite);
                prop_assert_eq!(t.gene.kind, VertexKind::Gene);
            }
            prop_assert!(g.validate().is_empty());
        }
    }
}
