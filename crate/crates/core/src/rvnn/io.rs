//! Model files: an 8-byte magic, a little-endian `u32` format version, a `u64` header
//! length, a JSON header, then every parameter as a little-endian `f64` in the block
//! order the header declares.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::params::{Layout, ModelParams, RuleSig, UNKNOWN_ORIGIN};

pub const MODEL_MAGIC: &[u8; 8] = b"RVNNMODL";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("not a model file (bad magic)")]
    BadMagic,
    #[error("unsupported model version {0} (expected {MODEL_VERSION})")]
    Version(u32),
    #[error("bad model header: {0}")]
    Header(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("rule `{name}` has unsupported arity {arity}")]
    UnknownArity { name: String, arity: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockDecl {
    pub name: String,
    pub len: usize,
}

/// The JSON header of a model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelHeader {
    pub version: u32,
    pub dim: usize,
    pub ln_eps: f64,
    pub threshold: f64,
    pub origins: Vec<String>,
    pub unknown_origin: String,
    pub rules: Vec<RuleSig>,
    pub blocks: Vec<BlockDecl>,
}

impl ModelHeader {
    fn of(params: &ModelParams) -> Self {
        let blocks = params
            .layout()
            .blocks(params.origins(), params.rules())
            .into_iter()
            .map(|(name, len)| BlockDecl { name, len })
            .collect();
        Self {
            version: MODEL_VERSION,
            dim: params.dim(),
            ln_eps: params.ln_eps(),
            threshold: params.threshold(),
            origins: params.origins().to_vec(),
            unknown_origin: UNKNOWN_ORIGIN.to_string(),
            rules: params.rules().to_vec(),
            blocks,
        }
    }
}

pub fn write_model<W: Write>(params: &ModelParams, mut out: W) -> io::Result<()> {
    let header = serde_json::to_vec(&ModelHeader::of(params))?;
    out.write_all(MODEL_MAGIC)?;
    out.write_all(&MODEL_VERSION.to_le_bytes())?;
    out.write_all(&(header.len() as u64).to_le_bytes())?;
    out.write_all(&header)?;
    for x in params.data() {
        out.write_all(&x.to_le_bytes())?;
    }
    out.flush()
}

pub fn save_model(params: &ModelParams, path: impl AsRef<Path>) -> io::Result<()> {
    write_model(params, BufWriter::new(File::create(path)?))
}

fn read_header_only<R: Read>(input: &mut R) -> Result<ModelHeader, ModelIoError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MODEL_MAGIC {
        return Err(ModelIoError::BadMagic);
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != MODEL_VERSION {
        return Err(ModelIoError::Version(version));
    }
    let mut len = [0u8; 8];
    input.read_exact(&mut len)?;
    let mut header = vec![0u8; u64::from_le_bytes(len) as usize];
    input.read_exact(&mut header)?;
    let header: ModelHeader = serde_json::from_slice(&header).map_err(|e| ModelIoError::Header(e.to_string()))?;
    if header.version != version {
        return Err(ModelIoError::Version(header.version));
    }
    Ok(header)
}

pub fn read_model<R: Read>(mut input: R) -> Result<ModelParams, ModelIoError> {
    let header = read_header_only(&mut input)?;
    if let Some(r) = header.rules.iter().find(|r| r.arity != 1 && r.arity != 2) {
        return Err(ModelIoError::UnknownArity { name: r.name.clone(), arity: r.arity });
    }
    if header.dim == 0 {
        return Err(ModelIoError::Dimension("embedding dimension is zero".into()));
    }
    let layout = Layout::new(header.dim, header.origins.len(), header.rules.iter().map(|r| r.arity));
    let expected = layout.blocks(&header.origins, &header.rules);
    let declared: Vec<(String, usize)> = header.blocks.iter().map(|b| (b.name.clone(), b.len)).collect();
    if expected != declared {
        return Err(ModelIoError::Dimension(format!(
            "declared blocks do not match dimension {} and vocabulary",
            header.dim
        )));
    }
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    if bytes.len() != layout.total * 8 {
        return Err(ModelIoError::Dimension(format!(
            "expected {} parameters, found {} bytes",
            layout.total,
            bytes.len()
        )));
    }
    let data = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok(ModelParams::from_parts(header.origins, header.rules, header.ln_eps, header.threshold, layout, data))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<ModelParams, ModelIoError> {
    read_model(BufReader::new(File::open(path)?))
}

/// Reads just the header, e.g. for inspection.
pub fn read_model_header(path: impl AsRef<Path>) -> Result<ModelHeader, ModelIoError> {
    read_header_only(&mut BufReader::new(File::open(path)?))
}
