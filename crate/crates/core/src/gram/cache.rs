//! Binary cache for Gram factors.
//!
//! One file per build, named by the SHA-256 of a canonical key string
//! (potential + domain + m + q + n + quadrature). The header repeats the
//! hash; a mismatch between the stored hash and the requested key
//! invalidates the file. A `.lock` sibling provides an advisory
//! single-writer lock.

use super::{BasisSpec, Block, Factor, GramError, GramKernel, QuadratureSpec, WeightKind};
use crate::potential::{C64, DomainSpec, HermitianPotential};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

const MAGIC: &[u8; 8] = b"PBGRAM1\0";

/// Canonical key for a Gram build; hashed into the cache file name.
pub fn cache_key(
    domain: &DomainSpec,
    potential: &HermitianPotential,
    m: f64,
    spec: &BasisSpec,
    quad: &QuadratureSpec,
) -> String {
    let dom = match *domain {
        DomainSpec::Disk { center, radius } => {
            format!("disk({:.17e},{:.17e};{:.17e})", center.0, center.1, radius)
        }
        DomainSpec::Plane { truncation_radius } => format!("plane({truncation_radius:.17e})"),
    };
    format!(
        "v1|{}|{}|m={:.17e}|q={}|n={}|blocking={}|nodes={}|doublings={}|tol={:.3e}|grid={}x{}",
        potential.to_text().replace('\n', ";"),
        dom,
        m,
        spec.q,
        spec.n,
        spec.radial_blocking,
        quad.radial_nodes,
        quad.max_doublings,
        quad.tol,
        quad.grid_2d.0,
        quad.grid_2d.1,
    )
}

fn hash_of(key: &str) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(key.as_bytes());
    h.finalize().into()
}

pub fn cache_path(dir: &Path, key: &str) -> PathBuf {
    let hash = hash_of(key);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    dir.join(format!("{hex}.gram"))
}

/// Serialize a built kernel. Silently skips when another writer holds the
/// advisory lock.
pub fn save(dir: &Path, key: &str, kernel: &GramKernel) -> Result<(), GramError> {
    fs::create_dir_all(dir).map_err(|e| GramError::Cache(e.to_string()))?;
    let path = cache_path(dir, key);
    let lock = path.with_extension("lock");
    match fs::OpenOptions::new().write(true).create_new(true).open(&lock) {
        Ok(_) => {}
        Err(_) => return Ok(()), // another writer is active
    }
    let result = write_file(&path, key, kernel);
    let _ = fs::remove_file(&lock);
    result
}

fn write_file(path: &Path, key: &str, kernel: &GramKernel) -> Result<(), GramError> {
    let io = |e: std::io::Error| GramError::Cache(e.to_string());
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&hash_of(key));
    match kernel.weight {
        WeightKind::ConstantOverPi => {
            buf.push(0);
            buf.extend_from_slice(&0f64.to_le_bytes());
        }
        WeightKind::Power { m } => {
            buf.push(1);
            buf.extend_from_slice(&m.to_le_bytes());
        }
    }
    match kernel.domain {
        DomainSpec::Disk { center, radius } => {
            buf.push(0);
            buf.extend_from_slice(&center.0.to_le_bytes());
            buf.extend_from_slice(&center.1.to_le_bytes());
            buf.extend_from_slice(&radius.to_le_bytes());
        }
        DomainSpec::Plane { truncation_radius } => {
            buf.push(1);
            buf.extend_from_slice(&truncation_radius.to_le_bytes());
            buf.extend_from_slice(&0f64.to_le_bytes());
            buf.extend_from_slice(&0f64.to_le_bytes());
        }
    }
    buf.extend_from_slice(&(kernel.basis.q as u32).to_le_bytes());
    buf.extend_from_slice(&(kernel.basis.n as u32).to_le_bytes());
    buf.push(kernel.basis.radial_blocking as u8);
    buf.extend_from_slice(&kernel.condition_estimate.to_le_bytes());
    buf.extend_from_slice(&(kernel.quadrature_nodes as u64).to_le_bytes());
    buf.extend_from_slice(&(kernel.blocks.len() as u32).to_le_bytes());
    for block in &kernel.blocks {
        match block.ell {
            Some(ell) => {
                buf.push(0);
                buf.extend_from_slice(&ell.to_le_bytes());
            }
            None => {
                buf.push(1);
                buf.extend_from_slice(&0i64.to_le_bytes());
            }
        }
        let dim = block.members.len() as u32;
        buf.extend_from_slice(&dim.to_le_bytes());
        for &(r, j) in &block.members {
            buf.extend_from_slice(&(r as u32).to_le_bytes());
            buf.extend_from_slice(&(j as u32).to_le_bytes());
        }
        for &s in &block.scales {
            buf.extend_from_slice(&s.to_le_bytes());
        }
        match &block.chol {
            Factor::Real(l) => {
                buf.push(0);
                for &v in l {
                    buf.extend_from_slice(&v.to_le_bytes());
                }
            }
            Factor::Complex(l) => {
                buf.push(1);
                for v in l {
                    buf.extend_from_slice(&v.re.to_le_bytes());
                    buf.extend_from_slice(&v.im.to_le_bytes());
                }
            }
        }
    }
    let mut f = fs::File::create(path).map_err(io)?;
    f.write_all(&buf).map_err(io)
}

/// Load a cached kernel if a file for this key exists and its header hash
/// matches.
pub fn load(dir: &Path, key: &str) -> Option<GramKernel> {
    let path = cache_path(dir, key);
    let mut buf = Vec::new();
    fs::File::open(&path).ok()?.read_to_end(&mut buf).ok()?;
    let mut r = Reader { buf: &buf, pos: 0 };
    if r.bytes(8)? != MAGIC {
        return None;
    }
    if r.bytes(32)? != hash_of(key) {
        return None; // stale or renamed file
    }
    let weight = match r.u8()? {
        0 => {
            r.f64()?;
            WeightKind::ConstantOverPi
        }
        _ => WeightKind::Power { m: r.f64()? },
    };
    let domain = match r.u8()? {
        0 => DomainSpec::Disk {
            center: (r.f64()?, r.f64()?),
            radius: r.f64()?,
        },
        _ => {
            let radius = r.f64()?;
            r.f64()?;
            r.f64()?;
            DomainSpec::Plane {
                truncation_radius: radius,
            }
        }
    };
    let q = r.u32()? as usize;
    let n = r.u32()? as usize;
    let radial_blocking = r.u8()? != 0;
    let condition_estimate = r.f64()?;
    let quadrature_nodes = r.u64()? as usize;
    let nblocks = r.u32()? as usize;
    let mut blocks = Vec::with_capacity(nblocks);
    for _ in 0..nblocks {
        let tag = r.u8()?;
        let ell_raw = r.i64()?;
        let ell = (tag == 0).then_some(ell_raw);
        let dim = r.u32()? as usize;
        let mut members = Vec::with_capacity(dim);
        for _ in 0..dim {
            members.push((r.u32()? as usize, r.u32()? as usize));
        }
        let mut scales = Vec::with_capacity(dim);
        for _ in 0..dim {
            scales.push(r.f64()?);
        }
        let chol = match r.u8()? {
            0 => {
                let mut l = Vec::with_capacity(dim * dim);
                for _ in 0..dim * dim {
                    l.push(r.f64()?);
                }
                Factor::Real(l)
            }
            _ => {
                let mut l = Vec::with_capacity(dim * dim);
                for _ in 0..dim * dim {
                    l.push(C64::new(r.f64()?, r.f64()?));
                }
                Factor::Complex(l)
            }
        };
        blocks.push(Block {
            ell,
            members,
            scales,
            chol,
        });
    }
    Some(GramKernel {
        basis: BasisSpec {
            q,
            n,
            radial_blocking,
        },
        domain,
        weight,
        condition_estimate,
        warnings: Vec::new(),
        quadrature_nodes,
        blocks,
    })
}

/// Build through the cache: load on a key hit, otherwise build and store.
/// Returns the kernel and whether it was a cache hit.
pub fn build_cached(
    dir: &Path,
    domain: DomainSpec,
    potential: &HermitianPotential,
    m: f64,
    spec: BasisSpec,
    quad: &QuadratureSpec,
) -> Result<(GramKernel, bool), GramError> {
    let key = cache_key(&domain, potential, m, &spec, quad);
    if let Some(kernel) = load(dir, &key) {
        return Ok((kernel, true));
    }
    let kernel = GramKernel::build(domain, potential, m, spec, quad)?;
    save(dir, &key, &kernel)?;
    Ok((kernel, false))
}

/// Human-readable listing of the cache directory.
pub fn inspect(dir: &Path) -> Vec<(String, u64)> {
    let mut out = Vec::new();
    if let Ok(entries) = fs::read_dir(dir) {
        for e in entries.flatten() {
            let name = e.file_name().to_string_lossy().into_owned();
            if name.ends_with(".gram") {
                out.push((name, e.metadata().map(|m| m.len()).unwrap_or(0)));
            }
        }
    }
    out.sort();
    out
}

/// Remove all cache files; returns how many were deleted.
pub fn clear(dir: &Path) -> usize {
    let mut n = 0;
    if let Ok(entries) = fs::read_dir(dir) {
        for e in entries.flatten() {
            let name = e.file_name().to_string_lossy().into_owned();
            if (name.ends_with(".gram") || name.ends_with(".lock"))
                && fs::remove_file(e.path()).is_ok()
            {
                n += 1;
            }
        }
    }
    n
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn bytes(&mut self, n: usize) -> Option<&'a [u8]> {
        let s = self.buf.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(s)
    }
    fn u8(&mut self) -> Option<u8> {
        Some(self.bytes(1)?[0])
    }
    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.bytes(4)?.try_into().ok()?))
    }
    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.bytes(8)?.try_into().ok()?))
    }
    fn i64(&mut self) -> Option<i64> {
        Some(i64::from_le_bytes(self.bytes(8)?.try_into().ok()?))
    }
    fn f64(&mut self) -> Option<f64> {
        Some(f64::from_le_bytes(self.bytes(8)?.try_into().ok()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::KernelSource;

    #[test]
    fn roundtrip_and_invalidation() {
        let dir = tempfile::tempdir().unwrap();
        let p = HermitianPotential::quadratic(1.0);
        let spec = BasisSpec::new(2, 10);
        let quad = QuadratureSpec::default();
        let domain = DomainSpec::Plane {
            truncation_radius: crate::gram::plane_truncation_radius(&p, 1.0, 2, 10),
        };
        let (cold, hit0) =
            build_cached(dir.path(), domain, &p, 1.0, spec, &quad).unwrap();
        assert!(!hit0);
        let (warm, hit1) =
            build_cached(dir.path(), domain, &p, 1.0, spec, &quad).unwrap();
        assert!(hit1);
        let z = C64::new(0.3, -0.1);
        let w = C64::new(0.1, 0.2);
        // Bitwise identical evaluations from the cached factor.
        let a = cold.eval(z, w);
        let b = warm.eval(z, w);
        assert_eq!(a.re.to_bits(), b.re.to_bits());
        assert_eq!(a.im.to_bits(), b.im.to_bits());

        // A different m misses the cache.
        let (_k, hit2) = build_cached(dir.path(), domain, &p, 2.0, spec, &quad).unwrap();
        assert!(!hit2);

        // Corrupting the stored hash invalidates the entry.
        let key = cache_key(&domain, &p, 1.0, &spec, &quad);
        let path = cache_path(dir.path(), &key);
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[9] ^= 0xff;
        std::fs::write(&path, &bytes).unwrap();
        assert!(load(dir.path(), &key).is_none());

        assert!(clear(dir.path()) >= 1);
    }
}
