//! On-disk cache of eigendecompositions.
//!
//! File layout, version 1, all integers and floats little-endian:
//!
//! | bytes      | content                                              |
//! |------------|------------------------------------------------------|
//! | 8          | magic `OTOCLAB\0`                                    |
//! | 4          | `u32` format version                                 |
//! | 4          | `u32` basis: 0 composite, 1 boson-only               |
//! | 8          | `u64` N                                              |
//! | 4 × 8      | `f64` U, J, Jᵃ, W                                    |
//! | 8          | `u64` dimension D                                    |
//! | D × 8      | `f64` energies                                       |
//! | D × D × 8  | `f64` eigenvector matrix, row-major (columns = states)|
//! | D          | `i8` parity: +1, −1, 0 = unclassified                |
//!
//! Files are named by the SHA-256 of the header fields up to and including D.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use ndarray::{Array1, Array2};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{self, BasisTag, EigenDecomposition, Parity};

pub const MAGIC: &[u8; 8] = b"OTOCLAB\0";
pub const FORMAT_VERSION: u32 = 1;
pub const CACHE_ENV: &str = "OTOC_LAB_CACHE";

fn basis_code(b: BasisTag) -> u32 {
    match b {
        BasisTag::Composite => 0,
        BasisTag::BosonOnly => 1,
    }
}

fn header_bytes(p: &ModelParams, basis: BasisTag, dim: usize) -> Vec<u8> {
    let mut h = Vec::with_capacity(72);
    h.extend_from_slice(MAGIC);
    h.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    h.extend_from_slice(&basis_code(basis).to_le_bytes());
    h.extend_from_slice(&(p.n_bosons as u64).to_le_bytes());
    for x in [p.u, p.j, p.j_a, p.w] {
        h.extend_from_slice(&x.to_le_bytes());
    }
    h.extend_from_slice(&(dim as u64).to_le_bytes());
    h
}

fn dimension_of(p: &ModelParams, basis: BasisTag) -> usize {
    match basis {
        BasisTag::Composite => 2 * (p.n_bosons + 1),
        BasisTag::BosonOnly => p.n_bosons + 1,
    }
}

/// Hex SHA-256 of the header; the cache file name without extension.
pub fn cache_key(p: &ModelParams, basis: BasisTag) -> String {
    let digest = Sha256::digest(header_bytes(p, basis, dimension_of(p, basis)));
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_decomposition(path: &Path, decomp: &EigenDecomposition) -> Result<()> {
    let p = decomp
        .source_params()
        .ok_or_else(|| Error::CacheFormat("decomposition has no source parameters".into()))?;
    let mut w = BufWriter::new(fs::File::create(path)?);
    w.write_all(&header_bytes(p, decomp.basis(), decomp.dim()))?;
    for e in decomp.energies() {
        w.write_all(&e.to_le_bytes())?;
    }
    for row in decomp.states().rows() {
        for x in row {
            w.write_all(&x.to_le_bytes())?;
        }
    }
    let parities: Vec<u8> = decomp.parities().iter().map(|p| p.as_f64() as i8 as u8).collect();
    w.write_all(&parities)?;
    w.flush()?;
    Ok(())
}

fn read_exact<const K: usize>(r: &mut impl Read) -> Result<[u8; K]> {
    let mut b = [0u8; K];
    r.read_exact(&mut b).map_err(|e| Error::CacheFormat(format!("truncated file: {e}")))?;
    Ok(b)
}

fn read_f64s(r: &mut impl Read, count: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; count * 8];
    r.read_exact(&mut buf).map_err(|e| Error::CacheFormat(format!("truncated file: {e}")))?;
    Ok(buf.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
}

pub fn read_decomposition(path: &Path) -> Result<EigenDecomposition> {
    let mut r = BufReader::new(fs::File::open(path)?);
    if &read_exact::<8>(&mut r)? != MAGIC {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let version = u32::from_le_bytes(read_exact(&mut r)?);
    if version != FORMAT_VERSION {
        return Err(Error::CacheFormat(format!("unsupported version {version}")));
    }
    let basis = match u32::from_le_bytes(read_exact(&mut r)?) {
        0 => BasisTag::Composite,
        1 => BasisTag::BosonOnly,
        other => return Err(Error::CacheFormat(format!("unknown basis code {other}"))),
    };
    let n = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    let v = read_f64s(&mut r, 4)?;
    let p = ModelParams { n_bosons: n, u: v[0], j: v[1], j_a: v[2], w: v[3] };
    let dim = u64::from_le_bytes(read_exact(&mut r)?) as usize;
    if dim != dimension_of(&p, basis) {
        return Err(Error::CacheFormat(format!("dimension {dim} inconsistent with N = {n}")));
    }
    let energies = Array1::from(read_f64s(&mut r, dim)?);
    let states = Array2::from_shape_vec((dim, dim), read_f64s(&mut r, dim * dim)?)
        .map_err(|e| Error::CacheFormat(e.to_string()))?;
    let mut par = vec![0u8; dim];
    r.read_exact(&mut par).map_err(|e| Error::CacheFormat(format!("truncated file: {e}")))?;
    let parities = par.iter().map(|&b| Parity::from_sign(b as i8 as f64)).collect();
    EigenDecomposition::from_parts(energies, states, parities, Some(p), basis)
}

/// Directory of cached decompositions.
#[derive(Clone, Debug)]
pub struct DecompositionCache {
    dir: PathBuf,
}

impl DecompositionCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(DecompositionCache { dir })
    }

    /// Cache rooted at `$OTOC_LAB_CACHE`, if set and non-empty.
    pub fn from_env() -> Result<Option<Self>> {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Ok(Some(Self::new(PathBuf::from(d))?)),
            _ => Ok(None),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, p: &ModelParams, basis: BasisTag) -> PathBuf {
        self.dir.join(format!("{}.eig", cache_key(p, basis)))
    }

    /// Read a cached decomposition, or compute and store it. Unreadable
    /// entries are recomputed and overwritten.
    pub fn get_or_compute<F>(&self, p: &ModelParams, basis: BasisTag, compute: F) -> Result<EigenDecomposition>
    where
        F: FnOnce() -> Result<EigenDecomposition>,
    {
        let path = self.path_for(p, basis);
        if path.exists() {
            match read_decomposition(&path) {
                Ok(d) => return Ok(d),
                Err(e) => log::warn!("discarding cache entry {}: {e}", path.display()),
            }
        }
        let d = compute()?;
        let tmp = path.with_extension("eig.tmp");
        write_decomposition(&tmp, &d)?;
        fs::rename(&tmp, &path)?;
        Ok(d)
    }
}

/// Full-model decomposition through the cache in `$OTOC_LAB_CACHE`, if configured.
pub fn diagonalize_model_cached(p: &ModelParams) -> Result<EigenDecomposition> {
    match DecompositionCache::from_env()? {
        Some(c) => c.get_or_compute(p, BasisTag::Composite, || spectral::diagonalize_model(p)),
        None => spectral::diagonalize_model(p),
    }
}
