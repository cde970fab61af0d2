//! The two-qubit Clifford group as explicit 4×4 unitaries.
//!
//! Elements are stored dense and quotiented by global phase: every matrix is
//! rotated so that its first entry of significant modulus (scanning
//! row-major) is real and positive, and identified by a 64-bit content hash
//! over the entries rounded to a 1e-8 grid. Clifford matrix entries live on a
//! coarse discrete set, so both the phase rule and the rounding are far from
//! any decision boundary.
//!
//! The table is built once by breadth-first closure of the generator set
//! `{H⊗I, I⊗H, S⊗I, I⊗S, CZ}` under matrix product and then treated as
//! immutable shared data.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use rand::Rng;
use thiserror::Error;

use crate::linalg::{ci, cr, kron2, max_abs_diff, unitarity_defect, Mat2, Mat4, Vec4, C64};

/// Order of the two-qubit Clifford group modulo global phase.
pub const GROUP_ORDER: usize = 11_520;

/// Version tag of the on-disk table format.
pub const TABLE_FORMAT_VERSION: u32 = 1;

/// Unitarity tolerance accepted by [`canonicalize`].
pub const UNITARITY_TOL: f64 = 1e-8;

const PHASE_THRESHOLD: f64 = 1e-9;
const HASH_GRID: f64 = 1e-8;
const CLOSURE_SAFETY_BOUND: usize = 20_000;
/// Max-norm tolerance when confirming a hash-indexed match.
const LOOKUP_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum CliffordError {
    #[error("matrix is not unitary (defect {0:.3e})")]
    NotUnitary(f64),
    #[error("generator closure exceeded {CLOSURE_SAFETY_BOUND} elements; canonicalization is broken")]
    ClosureOverflow,
    #[error("generator closure produced {0} elements, expected {GROUP_ORDER}")]
    WrongGroupOrder(usize),
    #[error("table file has format version {found}, expected {expected}")]
    FormatVersion { found: u32, expected: u32 },
    #[error("table file is corrupt: {0}")]
    Corrupt(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
}

/// A unitary with its global phase fixed by the canonical-phase rule and a
/// content hash over the rounded entries.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalUnitary {
    matrix: Mat4,
    hash: u64,
}

impl CanonicalUnitary {
    pub fn matrix(&self) -> &Mat4 {
        &self.matrix
    }

    pub fn content_hash(&self) -> u64 {
        self.hash
    }
}

fn fnv1a64(bytes: impl IntoIterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn content_hash(m: &Mat4) -> u64 {
    let mut bytes = Vec::with_capacity(32 * 8);
    for row in 0..4 {
        for col in 0..4 {
            let z = m[(row, col)];
            for part in [z.re, z.im] {
                let grid = (part / HASH_GRID).round() as i64;
                bytes.extend_from_slice(&grid.to_le_bytes());
            }
        }
    }
    fnv1a64(bytes)
}

/// Quotient a unitary by its global phase.
///
/// Scans row-major for the first entry with modulus above 1e-9 and rotates
/// the matrix so that entry is real and positive. Idempotent, and invariant
/// under `U ↦ e^{iα}U`.
pub fn canonicalize(u: &Mat4) -> Result<CanonicalUnitary, CliffordError> {
    let defect = unitarity_defect(u);
    if defect > UNITARITY_TOL {
        return Err(CliffordError::NotUnitary(defect));
    }
    let mut rotation = cr(1.0);
    'scan: for row in 0..4 {
        for col in 0..4 {
            let z = u[(row, col)];
            if z.norm() > PHASE_THRESHOLD {
                rotation = z.conj() / z.norm();
                break 'scan;
            }
        }
    }
    let matrix = u * rotation;
    let hash = content_hash(&matrix);
    Ok(CanonicalUnitary { matrix, hash })
}

fn hadamard() -> Mat2 {
    let s = cr(1.0 / 2.0_f64.sqrt());
    Mat2::new(s, s, s, -s)
}

fn phase_s() -> Mat2 {
    Mat2::new(cr(1.0), cr(0.0), cr(0.0), ci(1.0))
}

fn cz() -> Mat4 {
    Mat4::from_diagonal(&Vec4::new(cr(1.0), cr(1.0), cr(1.0), cr(-1.0)))
}

fn generators() -> [Mat4; 5] {
    let id = Mat2::identity();
    [
        kron2(&hadamard(), &id),
        kron2(&id, &hadamard()),
        kron2(&phase_s(), &id),
        kron2(&id, &phase_s()),
        cz(),
    ]
}

/// Generation metadata carried alongside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct TableMetadata {
    pub format_version: u32,
    pub generator_set: String,
    pub tolerance: f64,
}

impl Default for TableMetadata {
    fn default() -> Self {
        Self {
            format_version: TABLE_FORMAT_VERSION,
            generator_set: "H1,H2,S1,S2,CZ".to_string(),
            tolerance: HASH_GRID,
        }
    }
}

/// The full two-qubit Clifford group, indexed by content hash.
pub struct CliffordTable {
    elements: Vec<CanonicalUnitary>,
    index: HashMap<u64, usize>,
    metadata: TableMetadata,
}

impl CliffordTable {
    /// Breadth-first closure of the generator set under matrix product.
    pub fn generate() -> Result<Self, CliffordError> {
        let gens = generators();
        let identity = canonicalize(&Mat4::identity())?;
        let mut index = HashMap::with_capacity(GROUP_ORDER * 2);
        index.insert(identity.content_hash(), 0usize);
        let mut elements = vec![identity];
        let mut frontier = vec![0usize];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for &i in &frontier {
                let base = *elements[i].matrix();
                for g in &gens {
                    let cu = canonicalize(&(g * base))?;
                    if let Some(&existing) = index.get(&cu.content_hash()) {
                        if max_abs_diff(elements[existing].matrix(), cu.matrix()) > LOOKUP_TOL {
                            return Err(CliffordError::Corrupt(
                                "content-hash collision between distinct elements".into(),
                            ));
                        }
                        continue;
                    }
                    let id = elements.len();
                    if id >= CLOSURE_SAFETY_BOUND {
                        return Err(CliffordError::ClosureOverflow);
                    }
                    index.insert(cu.content_hash(), id);
                    elements.push(cu);
                    next.push(id);
                }
            }
            frontier = next;
        }
        if elements.len() != GROUP_ORDER {
            return Err(CliffordError::WrongGroupOrder(elements.len()));
        }
        Ok(Self {
            elements,
            index,
            metadata: TableMetadata::default(),
        })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn element(&self, index: usize) -> &CanonicalUnitary {
        &self.elements[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &CanonicalUnitary> {
        self.elements.iter()
    }

    pub fn metadata(&self) -> &TableMetadata {
        &self.metadata
    }

    /// Index of a canonical unitary, confirmed against the stored matrix.
    pub fn lookup(&self, cu: &CanonicalUnitary) -> Option<usize> {
        let &i = self.index.get(&cu.content_hash())?;
        (max_abs_diff(self.elements[i].matrix(), cu.matrix()) <= LOOKUP_TOL).then_some(i)
    }

    pub fn contains(&self, cu: &CanonicalUnitary) -> bool {
        self.lookup(cu).is_some()
    }

    /// Uniform table index drawn from the caller-owned stream.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.elements.len())
    }

    /// Closing element of a benchmarking sequence: the canonicalized inverse
    /// of the ordered ideal product, with `interleaved` inserted after each
    /// element when supplied. The full product including the returned element
    /// is the identity up to global phase.
    pub fn inverse_of_sequence(
        &self,
        indices: &[usize],
        interleaved: Option<&CanonicalUnitary>,
    ) -> CanonicalUnitary {
        assert!(!indices.is_empty(), "sequence must be nonempty");
        let mut acc = Mat4::identity();
        for &i in indices {
            acc = self.elements[i].matrix() * acc;
            if let Some(c) = interleaved {
                acc = c.matrix() * acc;
            }
        }
        canonicalize(&acc.adjoint()).expect("product of unitaries is unitary")
    }

    /// Structural checks beyond what [`Self::load`] enforces: identity
    /// membership, unitarity of every element, and closure under product and
    /// adjoint on a deterministic sample of pairs.
    pub fn verify(&self) -> Result<(), CliffordError> {
        if self.elements.len() != GROUP_ORDER {
            return Err(CliffordError::WrongGroupOrder(self.elements.len()));
        }
        let identity = canonicalize(&Mat4::identity())?;
        if !self.contains(&identity) {
            return Err(CliffordError::Corrupt("identity not in table".into()));
        }
        for (i, e) in self.elements.iter().enumerate() {
            let defect = unitarity_defect(e.matrix());
            if defect > 1e-10 {
                return Err(CliffordError::Corrupt(format!(
                    "element {i} has unitarity defect {defect:.3e}"
                )));
            }
        }
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(0x5eed_7ab1e);
        for _ in 0..500 {
            let a = self.sample_uniform(&mut rng);
            let b = self.sample_uniform(&mut rng);
            let prod = canonicalize(&(self.elements[a].matrix() * self.elements[b].matrix()))?;
            if !self.contains(&prod) {
                return Err(CliffordError::Corrupt(format!(
                    "product of elements {a} and {b} not in table"
                )));
            }
            let inv = canonicalize(&self.elements[a].matrix().adjoint())?;
            if !self.contains(&inv) {
                return Err(CliffordError::Corrupt(format!(
                    "adjoint of element {a} not in table"
                )));
            }
        }
        Ok(())
    }

    /// Write the table: a versioned header `{format_version, group_order,
    /// tolerance}`, then per element 16 complex entries as little-endian f64
    /// pairs in row-major order, then the per-element content hashes.
    pub fn save(&self, path: &Path) -> Result<(), CliffordError> {
        let tmp = path.with_extension("tmp");
        {
            let mut f = io::BufWriter::new(fs::File::create(&tmp)?);
            f.write_all(&self.metadata.format_version.to_le_bytes())?;
            f.write_all(&(self.elements.len() as u32).to_le_bytes())?;
            f.write_all(&self.metadata.tolerance.to_le_bytes())?;
            for e in &self.elements {
                let m = e.matrix();
                for row in 0..4 {
                    for col in 0..4 {
                        let z = m[(row, col)];
                        f.write_all(&z.re.to_le_bytes())?;
                        f.write_all(&z.im.to_le_bytes())?;
                    }
                }
            }
            for e in &self.elements {
                f.write_all(&e.content_hash().to_le_bytes())?;
            }
            f.flush()?;
        }
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Read a table written by [`Self::save`], recomputing and checking every
    /// content hash.
    pub fn load(path: &Path) -> Result<Self, CliffordError> {
        let mut f = io::BufReader::new(fs::File::open(path)?);
        let mut u32buf = [0u8; 4];
        let mut f64buf = [0u8; 8];
        f.read_exact(&mut u32buf)?;
        let format_version = u32::from_le_bytes(u32buf);
        if format_version != TABLE_FORMAT_VERSION {
            return Err(CliffordError::FormatVersion {
                found: format_version,
                expected: TABLE_FORMAT_VERSION,
            });
        }
        f.read_exact(&mut u32buf)?;
        let order = u32::from_le_bytes(u32buf) as usize;
        if order != GROUP_ORDER {
            return Err(CliffordError::WrongGroupOrder(order));
        }
        f.read_exact(&mut f64buf)?;
        let tolerance = f64::from_le_bytes(f64buf);
        let mut elements = Vec::with_capacity(order);
        let mut index = HashMap::with_capacity(order * 2);
        for i in 0..order {
            let mut m = Mat4::zeros();
            for row in 0..4 {
                for col in 0..4 {
                    f.read_exact(&mut f64buf)?;
                    let re = f64::from_le_bytes(f64buf);
                    f.read_exact(&mut f64buf)?;
                    let im = f64::from_le_bytes(f64buf);
                    m[(row, col)] = C64::new(re, im);
                }
            }
            let hash = content_hash(&m);
            index.insert(hash, i);
            elements.push(CanonicalUnitary { matrix: m, hash });
        }
        for (i, e) in elements.iter().enumerate() {
            f.read_exact(&mut f64buf)?;
            let stored = u64::from_le_bytes(f64buf);
            if stored != e.content_hash() {
                return Err(CliffordError::Corrupt(format!(
                    "hash mismatch for element {i}"
                )));
            }
        }
        if f.bytes().next().is_some() {
            return Err(CliffordError::Corrupt("trailing bytes".into()));
        }
        Ok(Self {
            elements,
            index,
            metadata: TableMetadata {
                format_version,
                tolerance,
                ..TableMetadata::default()
            },
        })
    }
}
