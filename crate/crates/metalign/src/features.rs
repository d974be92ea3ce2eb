//! Precomputed per-vertex feature vectors and their fusion into initial
//! embeddings.
//!
//! Upstream encoders (text, molecule-string, and sequence models) run
//! outside this artifact; their outputs arrive as a feature table with
//! up to three fields per vertex:
//!
//! - `surface` — embedding of the vertex identifier text,
//! - `description` — embedding of the descriptive text,
//! - `modality` — molecule-string embedding for metabolites, sequence
//!   embedding for genes; may be absent.
//!
//! Fusion projects the modality vector into a shared space, concatenates
//! it with the text embeddings, and applies one shared linear layer.
//!
//! Two on-disk encodings are supported: a little-endian binary format
//! (`MFT1` magic, then `[id_len:u32][id][field_tag:u8][dim:u32][f32*dim]`
//! blocks) and an equivalent TSV debug format
//! (`id <TAB> field <TAB> v0 <TAB> v1 ...`).

use crate::graph::{MetabolicGraph, ResolvedId, VertexId, VertexKind};
use indexmap::IndexMap;
use ndarray::Array2;
use rand::Rng;
use std::io::{BufRead, BufWriter, Read, Write};
use std::path::Path;
use thiserror::Error;

const BINARY_MAGIC: &[u8; 4] = b"MFT1";

const FIELD_SURFACE: u8 = 0;
const FIELD_DESCRIPTION: u8 = 1;
const FIELD_MODALITY: u8 = 2;

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed feature record near byte {offset}")]
    MalformedBinary { path: String, offset: u64 },
    #[error("{path}:{line}: malformed feature record")]
    MalformedTsv { path: String, line: usize },
    #[error("vertex {vertex} field {field}: dimension {actual} does not match table dimension {expected}")]
    DimMismatch { vertex: String, field: String, expected: usize, actual: usize },
    #[error("vertex {vertex} has duplicate field {field}")]
    DuplicateField { vertex: String, field: String },
    #[error("vertex {vertex} is missing its {field} vector")]
    MissingText { vertex: String, field: String },
    #[error("{path}: vertex id `{id}` is ambiguous between kinds")]
    AmbiguousId { path: String, id: String },
}

/// Feature vectors of one vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBundle {
    pub kind: VertexKind,
    pub surface: Vec<f64>,
    pub description: Vec<f64>,
    pub modality: Option<Vec<f64>>,
}

/// Feature bundles for every vertex of one graph, with the field
/// dimensions recorded once for the whole table.
#[derive(Debug, Clone)]
pub struct FeatureTable {
    pub surface_dim: usize,
    pub description_dim: usize,
    /// Modality dimension per kind; `None` when no vertex of the kind
    /// carries a modality vector.
    pub gene_modality_dim: Option<usize>,
    pub metabolite_modality_dim: Option<usize>,
    map: IndexMap<VertexId, FeatureBundle>,
}

impl FeatureTable {
    pub fn get(&self, v: &VertexId) -> Option<&FeatureBundle> {
        self.map.get(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VertexId, &FeatureBundle)> {
        self.map.iter()
    }

    pub fn modality_dim(&self, kind: VertexKind) -> usize {
        match kind {
            VertexKind::Gene => self.gene_modality_dim.unwrap_or(0),
            VertexKind::Metabolite => self.metabolite_modality_dim.unwrap_or(0),
        }
    }

    /// Assemble a table in memory, checking the same dimension and
    /// completeness rules as the file loaders.
    pub fn from_bundles(
        graph: &MetabolicGraph,
        bundles: IndexMap<VertexId, FeatureBundle>,
    ) -> Result<FeatureTable, FeatureError> {
        let mut table = FeatureTable {
            surface_dim: 0,
            description_dim: 0,
            gene_modality_dim: None,
            metabolite_modality_dim: None,
            map: bundles,
        };
        table.check_against(graph)?;
        Ok(table)
    }

    fn check_against(&mut self, graph: &MetabolicGraph) -> Result<(), FeatureError> {
        for v in graph.vertices() {
            let bundle = self.map.get(&v).ok_or_else(|| FeatureError::MissingText {
                vertex: v.to_string(),
                field: "surface".into(),
            })?;
            if bundle.surface.is_empty() {
                return Err(FeatureError::MissingText { vertex: v.to_string(), field: "surface".into() });
            }
            if bundle.description.is_empty() {
                return Err(FeatureError::MissingText {
                    vertex: v.to_string(),
                    field: "description".into(),
                });
            }
            check_dim(&mut self.surface_dim, bundle.surface.len(), &v, "surface")?;
            check_dim(&mut self.description_dim, bundle.description.len(), &v, "description")?;
            if let Some(m) = &bundle.modality {
                let slot = match v.kind {
                    VertexKind::Gene => &mut self.gene_modality_dim,
                    VertexKind::Metabolite => &mut self.metabolite_modality_dim,
                };
                match slot {
                    Some(d) if *d != m.len() => {
                        return Err(FeatureError::DimMismatch {
                            vertex: v.to_string(),
                            field: "modality".into(),
                            expected: *d,
                            actual: m.len(),
                        })
                    }
                    Some(_) => {}
                    None => *slot = Some(m.len()),
                }
            }
        }
        Ok(())
    }
}

fn check_dim(slot: &mut usize, actual: usize, v: &VertexId, field: &str) -> Result<(), FeatureError> {
    if *slot == 0 {
        *slot = actual;
        Ok(())
    } else if *slot != actual {
        Err(FeatureError::DimMismatch {
            vertex: v.to_string(),
            field: field.into(),
            expected: *slot,
            actual,
        })
    } else {
        Ok(())
    }
}

fn field_name(tag: u8) -> &'static str {
    match tag {
        FIELD_SURFACE => "surface",
        FIELD_DESCRIPTION => "description",
        _ => "modality",
    }
}

/// Load a feature table for `graph`. The format is sniffed from the
/// file header: binary tables start with the `MFT1` magic, anything
/// else parses as TSV. Records for ids unknown to the graph are
/// skipped with a warning; a graph vertex without surface or
/// description vectors is an error.
pub fn load_features(path: &Path, graph: &MetabolicGraph) -> Result<FeatureTable, FeatureError> {
    let display = path.display().to_string();
    let bytes = std::fs::read(path)
        .map_err(|source| FeatureError::Io { path: display.clone(), source })?;
    let records = if bytes.starts_with(BINARY_MAGIC) {
        parse_binary(&bytes, &display)?
    } else {
        parse_tsv(&bytes, &display)?
    };
    assemble(records, graph, &display)
}

type RawRecord = (String, u8, Vec<f64>);

fn parse_binary(bytes: &[u8], path: &str) -> Result<Vec<RawRecord>, FeatureError> {
    let mut cursor = std::io::Cursor::new(&bytes[BINARY_MAGIC.len()..]);
    let mut records = Vec::new();
    loop {
        let offset = cursor.position() + BINARY_MAGIC.len() as u64;
        let mut len_buf = [0u8; 4];
        match cursor.read_exact(&mut len_buf) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => break,
            Err(source) => return Err(FeatureError::Io { path: path.to_string(), source }),
        }
        let id_len = u32::from_le_bytes(len_buf) as usize;
        let mut id_buf = vec![0u8; id_len];
        cursor
            .read_exact(&mut id_buf)
            .map_err(|_| FeatureError::MalformedBinary { path: path.to_string(), offset })?;
        let id = String::from_utf8(id_buf)
            .map_err(|_| FeatureError::MalformedBinary { path: path.to_string(), offset })?;
        let mut tag_buf = [0u8; 1];
        cursor
            .read_exact(&mut tag_buf)
            .map_err(|_| FeatureError::MalformedBinary { path: path.to_string(), offset })?;
        let mut dim_buf = [0u8; 4];
        cursor
            .read_exact(&mut dim_buf)
            .map_err(|_| FeatureError::MalformedBinary { path: path.to_string(), offset })?;
        let dim = u32::from_le_bytes(dim_buf) as usize;
        let mut vec_buf = vec![0u8; dim * 4];
        cursor
            .read_exact(&mut vec_buf)
            .map_err(|_| FeatureError::MalformedBinary { path: path.to_string(), offset })?;
        let values: Vec<f64> = vec_buf
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        if tag_buf[0] > FIELD_MODALITY {
            return Err(FeatureError::MalformedBinary { path: path.to_string(), offset });
        }
        records.push((id, tag_buf[0], values));
    }
    Ok(records)
}

fn parse_tsv(bytes: &[u8], path: &str) -> Result<Vec<RawRecord>, FeatureError> {
    let reader = std::io::BufReader::new(bytes);
    let mut records = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| FeatureError::Io { path: path.to_string(), source })?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let id = fields.next().filter(|s| !s.is_empty());
        let field = fields.next();
        let (Some(id), Some(field)) = (id, field) else {
            return Err(FeatureError::MalformedTsv { path: path.to_string(), line: lineno + 1 });
        };
        let tag = match field {
            "surface" => FIELD_SURFACE,
            "description" => FIELD_DESCRIPTION,
            "modality" => FIELD_MODALITY,
            _ => return Err(FeatureError::MalformedTsv { path: path.to_string(), line: lineno + 1 }),
        };
        let mut values = Vec::new();
        for tok in fields {
            let v: f32 = tok
                .parse()
                .map_err(|_| FeatureError::MalformedTsv { path: path.to_string(), line: lineno + 1 })?;
            values.push(v as f64);
        }
        if values.is_empty() {
            return Err(FeatureError::MalformedTsv { path: path.to_string(), line: lineno + 1 });
        }
        records.push((id.to_string(), tag, values));
    }
    Ok(records)
}

fn assemble(
    records: Vec<RawRecord>,
    graph: &MetabolicGraph,
    path: &str,
) -> Result<FeatureTable, FeatureError> {
    let mut map: IndexMap<VertexId, FeatureBundle> = IndexMap::new();
    let mut skipped = 0usize;
    for (id, tag, values) in records {
        let vertex = match graph.resolve_id(&id) {
            ResolvedId::Found(v) => v,
            ResolvedId::Ambiguous => {
                return Err(FeatureError::AmbiguousId { path: path.to_string(), id })
            }
            ResolvedId::Unknown => {
                skipped += 1;
                continue;
            }
        };
        let bundle = map.entry(vertex.clone()).or_insert_with(|| FeatureBundle {
            kind: vertex.kind,
            surface: Vec::new(),
            description: Vec::new(),
            modality: None,
        });
        let slot_taken = match tag {
            FIELD_SURFACE => {
                let taken = !bundle.surface.is_empty();
                if !taken {
                    bundle.surface = values;
                }
                taken
            }
            FIELD_DESCRIPTION => {
                let taken = !bundle.description.is_empty();
                if !taken {
                    bundle.description = values;
                }
                taken
            }
            _ => {
                let taken = bundle.modality.is_some();
                if !taken {
                    bundle.modality = Some(values);
                }
                taken
            }
        };
        if slot_taken {
            return Err(FeatureError::DuplicateField {
                vertex: vertex.to_string(),
                field: field_name(tag).to_string(),
            });
        }
    }
    if skipped > 0 {
        log::warn!("{path}: skipped {skipped} feature records for unknown vertex ids");
    }
    let mut table = FeatureTable {
        surface_dim: 0,
        description_dim: 0,
        gene_modality_dim: None,
        metabolite_modality_dim: None,
        map,
    };
    table.check_against(graph)?;
    Ok(table)
}

/// Write the binary feature format.
pub fn save_features_binary(path: &Path, table: &FeatureTable) -> Result<(), FeatureError> {
    let file = std::fs::File::create(path)
        .map_err(|source| FeatureError::Io { path: path.display().to_string(), source })?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<std::fs::File>| -> std::io::Result<()> {
        w.write_all(BINARY_MAGIC)?;
        for (vertex, bundle) in table.iter() {
            let mut emit = |tag: u8, values: &[f64]| -> std::io::Result<()> {
                w.write_all(&(vertex.id.len() as u32).to_le_bytes())?;
                w.write_all(vertex.id.as_bytes())?;
                w.write_all(&[tag])?;
                w.write_all(&(values.len() as u32).to_le_bytes())?;
                for &v in values {
                    w.write_all(&(v as f32).to_le_bytes())?;
                }
                Ok(())
            };
            emit(FIELD_SURFACE, &bundle.surface)?;
            emit(FIELD_DESCRIPTION, &bundle.description)?;
            if let Some(m) = &bundle.modality {
                emit(FIELD_MODALITY, m)?;
            }
        }
        Ok(())
    };
    write(&mut w).map_err(|source| FeatureError::Io { path: path.display().to_string(), source })
}

/// Write the TSV debug format.
pub fn save_features_tsv(path: &Path, table: &FeatureTable) -> Result<(), FeatureError> {
    let file = std::fs::File::create(path)
        .map_err(|source| FeatureError::Io { path: path.display().to_string(), source })?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<std::fs::File>| -> std::io::Result<()> {
        writeln!(w, "# id\tfield\tvalues...")?;
        for (vertex, bundle) in table.iter() {
            let mut emit = |field: &str, values: &[f64]| -> std::io::Result<()> {
                write!(w, "{}\t{}", vertex.id, field)?;
                for &v in values {
                    write!(w, "\t{}", v as f32)?;
                }
                writeln!(w)
            };
            emit("surface", &bundle.surface)?;
            emit("description", &bundle.description)?;
            if let Some(m) = &bundle.modality {
                emit("modality", m)?;
            }
        }
        Ok(())
    };
    write(&mut w).map_err(|source| FeatureError::Io { path: path.display().to_string(), source })
}

/// Matrix with entries i.i.d. uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`,
/// the same law used for random vertex initialization.
pub fn uniform_entries(rng: &mut impl Rng, rows: usize, cols: usize, fan_in: usize) -> Array2<f64> {
    let bound = 1.0 / (fan_in.max(1) as f64).sqrt();
    Array2::from_shape_fn((rows, cols), |_| rng.gen_range(-bound..=bound))
}

/// Deterministic random initial embeddings for every vertex of a
/// graph, used when multi-modal features are disabled.
pub fn random_init(graph: &MetabolicGraph, dim: usize, seed: u64) -> IndexMap<VertexId, Vec<f64>> {
    assert!(dim >= 1, "embedding dimension must be positive");
    let mut rng = crate::rng::stream(seed, &format!("random-init:{}", graph.tag()));
    let bound = 1.0 / (dim as f64).sqrt();
    let mut out = IndexMap::new();
    for v in graph.vertices() {
        let vec: Vec<f64> = (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect();
        out.insert(v, vec);
    }
    out
}

/// Shape bookkeeping for the fusion projections.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FusionDims {
    pub surface: usize,
    pub description: usize,
    pub gene_modality: usize,
    pub metabolite_modality: usize,
    /// Output dimension of the two modality projections.
    pub proj: usize,
    /// Output dimension of the shared layer (the embedding dimension).
    pub out: usize,
}

impl FusionDims {
    pub fn from_table(table: &FeatureTable, proj: usize, out: usize) -> FusionDims {
        FusionDims {
            surface: table.surface_dim,
            description: table.description_dim,
            gene_modality: table.modality_dim(VertexKind::Gene),
            metabolite_modality: table.modality_dim(VertexKind::Metabolite),
            proj,
            out,
        }
    }

    pub fn text(&self) -> usize {
        self.surface + self.description
    }

    pub fn shared_in(&self) -> usize {
        self.text() + self.proj
    }
}

/// Trainable fusion projections. Row-vector convention: an input row
/// is multiplied on the right by each matrix.
#[derive(Debug, Clone)]
pub struct FusionParams {
    pub dims: FusionDims,
    /// Metabolite modality projection.
    pub proj_modality_met: Array2<f64>,
    /// Gene modality projection; output dimension matches the
    /// metabolite projection.
    pub proj_modality_gene: Array2<f64>,
    /// Shared layer applied to `[surface, description, projected modality]`.
    pub proj_shared: Array2<f64>,
}

impl FusionParams {
    pub fn init(dims: FusionDims, rng: &mut impl Rng) -> FusionParams {
        FusionParams {
            dims,
            proj_modality_met: uniform_entries(rng, dims.metabolite_modality, dims.proj, dims.metabolite_modality),
            proj_modality_gene: uniform_entries(rng, dims.gene_modality, dims.proj, dims.gene_modality),
            proj_shared: uniform_entries(rng, dims.shared_in(), dims.out, dims.shared_in()),
        }
    }

    /// Fuse one bundle into an embedding row. An absent modality
    /// contributes the zero vector of the projected dimension.
    pub fn fuse(&self, bundle: &FeatureBundle) -> Vec<f64> {
        let dims = &self.dims;
        assert_eq!(bundle.surface.len(), dims.surface, "surface dim");
        assert_eq!(bundle.description.len(), dims.description, "description dim");
        let proj = match bundle.kind {
            VertexKind::Metabolite => &self.proj_modality_met,
            VertexKind::Gene => &self.proj_modality_gene,
        };
        let mut projected = vec![0.0; dims.proj];
        if let Some(m) = &bundle.modality {
            assert_eq!(m.len(), proj.nrows(), "modality dim");
            for (j, slot) in projected.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (i, &x) in m.iter().enumerate() {
                    acc += x * proj[(i, j)];
                }
                *slot = acc;
            }
        }
        let mut concat = Vec::with_capacity(dims.shared_in());
        concat.extend_from_slice(&bundle.surface);
        concat.extend_from_slice(&bundle.description);
        concat.extend_from_slice(&projected);
        let mut out = vec![0.0; dims.out];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &x) in concat.iter().enumerate() {
                acc += x * self.proj_shared[(i, j)];
            }
            *slot = acc;
        }
        out
    }
}
