//! Rank-metric outer code: linearized-polynomial encoding, erasure-style
//! decoding from any set of evaluations whose points span enough rank over
//! the base field, and the rank-accumulation analysis that certifies how
//! large a message survives collection from a subset of blocks.
//!
//! A codeword is (f(g_1), ..., f(g_N)) for a linearized polynomial
//! f(x) = sum a_i x^(q^i) of q-degree K-1 over GF(q^m), m >= N, evaluated at
//! points linearly independent over GF(q). Because f is additive and
//! commutes with base-field scaling, any K evaluations at points of rank K
//! reconstruct the message, even evaluations formed as base-field linear
//! combinations of codeword positions.

use std::collections::BTreeMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::design::Design;
use crate::field::{Field, FieldElement, FieldError};
use crate::regen::{rank_profile, RegenError, RegenParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GabError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Regen(#[from] RegenError),
    #[error("insufficient rank: accumulated {have}, need {need}")]
    InsufficientRank { have: usize, need: usize },
    #[error("evaluation points are dependent: rank {rank} < count {count}")]
    DependentPoints { rank: usize, count: usize },
    #[error("message length {k} exceeds code length {n}")]
    DimensionTooLarge { k: usize, n: usize },
    #[error("extension degree {m} smaller than code length {n}")]
    DegreeTooSmall { m: usize, n: usize },
    #[error("wrong message length: got {got}, want {want}")]
    WrongMessageLength { got: usize, want: usize },
    #[error("invalid rank query: {0}")]
    InvalidQuery(String),
}

/// f(x) = sum_{i<K} coeffs[i] * x^(q^i); additive over the base field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearizedPoly {
    pub coeffs: Vec<FieldElement>,
}

impl LinearizedPoly {
    pub fn eval(&self, field: &Field, x: &FieldElement) -> Result<FieldElement, GabError> {
        let mut acc = field.zero();
        let mut power = x.clone();
        for c in &self.coeffs {
            if !c.is_zero() {
                acc = field.add(&acc, &field.mul(c, &power)?)?;
            }
            power = field.frobenius(&power, 1)?;
        }
        Ok(acc)
    }
}

/// Gabidulin code of length N and dimension K over an extension field.
pub struct GabidulinCode {
    field: Field,
    length: usize,
    dimension: usize,
    points: Vec<FieldElement>,
}

impl GabidulinCode {
    /// Evaluation points are the first N polynomial-basis elements, which
    /// are independent over the base field by construction.
    pub fn new(field: Field, length: usize, dimension: usize) -> Result<GabidulinCode, GabError> {
        let m = field.degree();
        if !field.is_extension() || m < length {
            return Err(GabError::DegreeTooSmall { m, n: length });
        }
        let mut points = Vec::with_capacity(length);
        for i in 0..length {
            let mut words = vec![0u16; m];
            words[i] = 1;
            points.push(field.from_words(words)?);
        }
        Self::with_points(field, points, dimension)
    }

    /// Explicit evaluation points; their rank over the base field must equal
    /// their count.
    pub fn with_points(
        field: Field,
        points: Vec<FieldElement>,
        dimension: usize,
    ) -> Result<GabidulinCode, GabError> {
        let length = points.len();
        if dimension == 0 || dimension > length {
            return Err(GabError::DimensionTooLarge {
                k: dimension,
                n: length,
            });
        }
        if field.degree() < length {
            return Err(GabError::DegreeTooSmall {
                m: field.degree(),
                n: length,
            });
        }
        let rank = field.rank_over_base(&points)?;
        if rank != length {
            return Err(GabError::DependentPoints {
                rank,
                count: length,
            });
        }
        Ok(GabidulinCode {
            field,
            length,
            dimension,
            points,
        })
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn points(&self) -> &[FieldElement] {
        &self.points
    }

    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<FieldElement>, GabError> {
        if message.len() != self.dimension {
            return Err(GabError::WrongMessageLength {
                got: message.len(),
                want: self.dimension,
            });
        }
        let poly = LinearizedPoly {
            coeffs: message.to_vec(),
        };
        self.points
            .iter()
            .map(|p| poly.eval(&self.field, p))
            .collect()
    }

    /// Decode from any evaluations whose points accumulate rank >= K over
    /// the base field. Points may repeat or be dependent; a greedy
    /// elimination selects an independent subset, then the message is
    /// rebuilt by incremental linearized interpolation.
    pub fn decode(
        &self,
        evals: &[(FieldElement, FieldElement)],
    ) -> Result<Vec<FieldElement>, GabError> {
        let f = &self.field;
        let m = f.degree();
        let k = self.dimension;

        // greedy independent subset by elimination over the base field
        let mut basis: Vec<Vec<u16>> = Vec::with_capacity(k); // echelon rows
        let mut pivots: Vec<usize> = Vec::with_capacity(k);
        let mut sel: Vec<(Vec<u16>, Vec<u16>)> = Vec::with_capacity(k);
        for (point, value) in evals {
            if !f.contains(point) || !f.contains(value) {
                return Err(GabError::Field(FieldError::FieldMismatch));
            }
            if sel.len() == k {
                break;
            }
            let mut row = point.words().to_vec();
            for (b, &p) in basis.iter().zip(&pivots) {
                if row[p] != 0 {
                    let factor = row[p];
                    for (r, &bc) in row.iter_mut().zip(b) {
                        *r ^= f.mul_word(factor, bc);
                    }
                }
            }
            let Some(pivot) = (0..m).find(|&i| row[i] != 0) else {
                continue; // dependent on already-selected points
            };
            let inv = f.inv_word(row[pivot]).expect("nonzero pivot");
            for r in row.iter_mut() {
                *r = f.mul_word(inv, *r);
            }
            basis.push(row);
            pivots.push(pivot);
            sel.push((point.words().to_vec(), value.words().to_vec()));
        }
        if sel.len() < k {
            return Err(GabError::InsufficientRank {
                have: sel.len(),
                need: k,
            });
        }

        // incremental interpolation: maintain f (interpolates processed
        // pairs) and the annihilator V of their points, tracking V and the
        // residual y - f at every pending point.
        let zero = vec![0u16; m];
        let one = {
            let mut w = vec![0u16; m];
            w[0] = 1;
            w
        };
        let mut f_coeffs: Vec<Vec<u16>> = Vec::with_capacity(k);
        let mut v_coeffs: Vec<Vec<u16>> = vec![one];
        let mut residual: Vec<Vec<u16>> = sel.iter().map(|(_, y)| y.clone()).collect();
        let mut v_at: Vec<Vec<u16>> = sel.iter().map(|(x, _)| x.clone()).collect();
        for s in 0..k {
            let vs = v_at[s].clone();
            debug_assert!(vs.iter().any(|&w| w != 0), "independent point");
            let vs_inv = f.inv_words(&vs)?;
            let c = f.mul_words(&residual[s], &vs_inv);
            if f_coeffs.len() < v_coeffs.len() {
                f_coeffs.resize(v_coeffs.len(), zero.clone());
            }
            for (fc, vc) in f_coeffs.iter_mut().zip(&v_coeffs) {
                let t = f.mul_words(&c, vc);
                for (a, b) in fc.iter_mut().zip(&t) {
                    *a ^= b;
                }
            }
            // V <- V^q - (V(x_s))^(q-1) V, evaluated lazily at pending points
            let t = f.mul_words(&f.frob_words(&vs), &vs_inv);
            let mut next_v = vec![zero.clone(); v_coeffs.len() + 1];
            for (i, vc) in v_coeffs.iter().enumerate() {
                next_v[i + 1] = f.frob_words(vc);
                let tv = f.mul_words(&t, vc);
                for (a, b) in next_v[i].iter_mut().zip(&tv) {
                    *a ^= b;
                }
            }
            v_coeffs = next_v;
            for i in s + 1..k {
                let cv = f.mul_words(&c, &v_at[i]);
                for (a, b) in residual[i].iter_mut().zip(&cv) {
                    *a ^= b;
                }
                let tv = f.mul_words(&t, &v_at[i]);
                let mut fv = f.frob_words(&v_at[i]);
                for (a, b) in fv.iter_mut().zip(&tv) {
                    *a ^= b;
                }
                v_at[i] = fv;
            }
        }
        f_coeffs.resize(k, zero);
        f_coeffs.into_iter().map(|w| Ok(f.from_words(w)?)).collect()
    }
}

/// Per-point block-access counts for one collection scenario: entry t is
/// how many accessed blocks contain point t.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfileQuery {
    pub per_point_blocks: Vec<usize>,
    pub nodes_per_block: usize,
}

/// Total rank accumulated by a collection scenario: for each point t the DC
/// sees `nodes_per_block * per_point_blocks[t]` distinct sub-codeword nodes,
/// whose useful-symbol counts follow the sub-code's rank profile.
pub fn accumulated_rank(query: &RankProfileQuery, sub: &RegenParams) -> Result<u64, GabError> {
    if query.nodes_per_block == 0 {
        return Err(GabError::InvalidQuery(
            "nodes_per_block must be >= 1".into(),
        ));
    }
    let mut total = 0u64;
    for (t, &r_t) in query.per_point_blocks.iter().enumerate() {
        let contacted = query.nodes_per_block * r_t;
        if contacted > sub.n {
            return Err(GabError::InvalidQuery(format!(
                "point {t}: {contacted} sub-nodes contacted but the sub-code has {}",
                sub.n
            )));
        }
        for j in 1..=contacted {
            total += rank_profile(sub, j)?;
        }
    }
    Ok(total)
}

/// Accumulated rank for one concrete subset of accessed blocks, with the
/// histogram of per-point access counts (accesses -> number of points).
pub fn rank_of_block_subset(
    plane: &Design,
    sub: &RegenParams,
    nodes_per_block: usize,
    subset: &[usize],
) -> Result<(u64, BTreeMap<usize, usize>), GabError> {
    let mut per_point = vec![0usize; plane.v];
    for &b in subset {
        if b >= plane.block_count() {
            return Err(GabError::InvalidQuery(format!("block {b} out of range")));
        }
        for &t in &plane.blocks[b] {
            per_point[t] += 1;
        }
    }
    let mut histogram = BTreeMap::new();
    for &r_t in &per_point {
        *histogram.entry(r_t).or_insert(0) += 1;
    }
    let rank = accumulated_rank(
        &RankProfileQuery {
            per_point_blocks: per_point,
            nodes_per_block,
        },
        sub,
    )?;
    Ok((rank, histogram))
}

/// The worst collection scenario over all C(b, b-rho) block subsets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionRank {
    pub blocks_accessed: usize,
    pub min_rank: u64,
    pub worst_subset: Vec<usize>,
    /// per-point access count -> number of points, for the worst subset
    pub worst_histogram: BTreeMap<usize, usize>,
}

/// Exact enumeration of all block subsets of size b - rho; the returned
/// minimum bounds the Gabidulin dimension K a system can carry.
pub fn min_rank_over_collections(
    plane: &Design,
    sub: &RegenParams,
    rho: usize,
    nodes_per_block: usize,
) -> Result<CollectionRank, GabError> {
    let b = plane.block_count();
    if rho >= b {
        return Err(GabError::InvalidQuery(format!("rho={rho} >= b={b}")));
    }
    let bc = b - rho;
    let mut best: Option<CollectionRank> = None;
    for subset in (0..b).combinations(bc) {
        let (rank, histogram) = rank_of_block_subset(plane, sub, nodes_per_block, &subset)?;
        let better = match &best {
            None => true,
            Some(cur) => rank < cur.min_rank,
        };
        if better {
            best = Some(CollectionRank {
                blocks_accessed: bc,
                min_rank: rank,
                worst_subset: subset,
                worst_histogram: histogram,
            });
        }
    }
    best.ok_or_else(|| GabError::InvalidQuery("no block subsets".into()))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityEntry {
    pub rho: usize,
    pub blocks_accessed: usize,
    pub min_rank: u64,
    pub k_max: u64,
    pub worst_subset: Vec<usize>,
}

/// Per-rho feasibility table for a plane + sub-code pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub nodes_per_block: usize,
    pub entries: Vec<FeasibilityEntry>,
}

pub fn feasibility_report(
    plane: &Design,
    sub: &RegenParams,
    nodes_per_block: usize,
    max_rho: usize,
) -> Result<FeasibilityReport, GabError> {
    let mut entries = Vec::new();
    for rho in 0..=max_rho {
        let cr = min_rank_over_collections(plane, sub, rho, nodes_per_block)?;
        entries.push(FeasibilityEntry {
            rho,
            blocks_accessed: cr.blocks_accessed,
            min_rank: cr.min_rank,
            k_max: cr.min_rank,
            worst_subset: cr.worst_subset,
        });
    }
    Ok(FeasibilityReport {
        nodes_per_block,
        entries,
    })
}
