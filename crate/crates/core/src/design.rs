//! Combinatorial block designs driving symbol placement: balanced incomplete
//! block designs (BIBDs) and projective planes of prime order.
//!
//! A `(v, kappa, lambda)`-BIBD distributes `v` points into blocks of size
//! `kappa` so that every unordered point pair occurs in exactly `lambda`
//! blocks. Every point then occurs in `r = lambda(v-1)/(kappa-1)` blocks and
//! there are `b = vr/kappa` blocks. A projective plane of order `p` is the
//! `(p^2+p+1, p+1, 1)`-BIBD built from the lines of the projective geometry
//! over the p-element field; any two of its blocks meet in exactly one point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DesignError {
    #[error("order {0} is not prime (prime powers are not supported)")]
    NotPrime(usize),
    #[error("order must be at least 2")]
    OrderTooSmall,
    #[error("point {point} out of range for v={v}")]
    PointOutOfRange { point: usize, v: usize },
    #[error("block index {index} out of range for b={b}")]
    BlockOutOfRange { index: usize, b: usize },
    #[error("block {block} has {size} points, expected {kappa}")]
    WrongBlockSize {
        block: usize,
        size: usize,
        kappa: usize,
    },
    #[error("block {0} contains a duplicate point")]
    DuplicatePoint(usize),
    #[error("blocks {i} and {j} share {count} points, expected exactly 1")]
    NotUniqueIntersection { i: usize, j: usize, count: usize },
    #[error("common point of a block with itself is undefined")]
    SameBlock,
    #[error("replication degree lambda(v-1)/(kappa-1) is not an integer")]
    NonIntegralReplication,
}

/// A block design as an incidence structure. Construction checks only
/// structural sanity (sizes, ranges, duplicates); combinatorial balance is
/// checked by [`validate_bibd`], so deliberately broken designs can be built
/// for mutation tests.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub v: usize,
    pub kappa: usize,
    pub lambda: usize,
    pub blocks: Vec<Vec<usize>>,
}

impl Design {
    pub fn new(
        v: usize,
        kappa: usize,
        lambda: usize,
        blocks: Vec<Vec<usize>>,
    ) -> Result<Design, DesignError> {
        let d = Design {
            v,
            kappa,
            lambda,
            blocks,
        };
        d.check_structure()?;
        Ok(d)
    }

    fn check_structure(&self) -> Result<(), DesignError> {
        for (i, blk) in self.blocks.iter().enumerate() {
            if blk.len() != self.kappa {
                return Err(DesignError::WrongBlockSize {
                    block: i,
                    size: blk.len(),
                    kappa: self.kappa,
                });
            }
            let mut seen = vec![false; self.v];
            for &p in blk {
                if p >= self.v {
                    return Err(DesignError::PointOutOfRange {
                        point: p,
                        v: self.v,
                    });
                }
                if seen[p] {
                    return Err(DesignError::DuplicatePoint(i));
                }
                seen[p] = true;
            }
        }
        Ok(())
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Replication degree r = lambda(v-1)/(kappa-1).
    pub fn replication(&self) -> Result<usize, DesignError> {
        let num = self.lambda * (self.v - 1);
        let den = self.kappa - 1;
        if den == 0 || num % den != 0 {
            return Err(DesignError::NonIntegralReplication);
        }
        Ok(num / den)
    }

    /// Expected block count b = vr/kappa.
    pub fn expected_block_count(&self) -> Result<usize, DesignError> {
        let r = self.replication()?;
        let num = self.v * r;
        if num % self.kappa != 0 {
            return Err(DesignError::NonIntegralReplication);
        }
        Ok(num / self.kappa)
    }

    /// Indices of the blocks containing point t, in block order.
    pub fn blocks_through_point(&self, t: usize) -> Result<Vec<usize>, DesignError> {
        if t >= self.v {
            return Err(DesignError::PointOutOfRange {
                point: t,
                v: self.v,
            });
        }
        Ok(self
            .blocks
            .iter()
            .enumerate()
            .filter(|(_, blk)| blk.contains(&t))
            .map(|(i, _)| i)
            .collect())
    }

    /// The unique point shared by two distinct blocks. Errors unless the
    /// intersection has exactly one point (the projective-plane property).
    pub fn common_point(&self, i: usize, j: usize) -> Result<usize, DesignError> {
        if i == j {
            return Err(DesignError::SameBlock);
        }
        for (idx, b) in [(i, self.block_count()), (j, self.block_count())] {
            if idx >= b {
                return Err(DesignError::BlockOutOfRange { index: idx, b });
            }
        }
        let shared: Vec<usize> = self.blocks[i]
            .iter()
            .filter(|p| self.blocks[j].contains(p))
            .copied()
            .collect();
        if shared.len() != 1 {
            return Err(DesignError::NotUniqueIntersection {
                i,
                j,
                count: shared.len(),
            });
        }
        Ok(shared[0])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum BibdViolation {
    WrongBlockSize {
        block: usize,
        size: usize,
    },
    PointOutOfRange {
        block: usize,
        point: usize,
    },
    PairCoverage {
        p1: usize,
        p2: usize,
        count: usize,
        expected: usize,
    },
    Replication {
        point: usize,
        count: usize,
        expected: usize,
    },
    BlockCount {
        count: usize,
        expected: usize,
    },
    ParameterMismatch {
        field: String,
        declared: usize,
        given: usize,
    },
    NonIntegralInvariant,
}

/// Outcome of exhaustive BIBD validation; the report lists every violation
/// rather than stopping at the first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BibdReport {
    pub violations: Vec<BibdViolation>,
}

impl BibdReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exhaustively check that `d` is a (v, kappa, lambda)-BIBD: block sizes,
/// pair coverage over all v(v-1)/2 pairs, per-point replication, block count.
pub fn validate_bibd(d: &Design, v: usize, kappa: usize, lambda: usize) -> BibdReport {
    let mut violations = Vec::new();
    for (field, declared, given) in [
        ("v", d.v, v),
        ("kappa", d.kappa, kappa),
        ("lambda", d.lambda, lambda),
    ] {
        if declared != given {
            violations.push(BibdViolation::ParameterMismatch {
                field: field.to_string(),
                declared,
                given,
            });
        }
    }
    for (i, blk) in d.blocks.iter().enumerate() {
        if blk.len() != kappa {
            violations.push(BibdViolation::WrongBlockSize {
                block: i,
                size: blk.len(),
            });
        }
        for &p in blk {
            if p >= v {
                violations.push(BibdViolation::PointOutOfRange { block: i, point: p });
            }
        }
    }
    // pair coverage
    let mut pair_count = vec![0usize; v * v];
    for blk in &d.blocks {
        for (a, &p1) in blk.iter().enumerate() {
            for &p2 in &blk[a + 1..] {
                if p1 < v && p2 < v {
                    let (lo, hi) = (p1.min(p2), p1.max(p2));
                    pair_count[lo * v + hi] += 1;
                }
            }
        }
    }
    for p1 in 0..v {
        for p2 in p1 + 1..v {
            let c = pair_count[p1 * v + p2];
            if c != lambda {
                violations.push(BibdViolation::PairCoverage {
                    p1,
                    p2,
                    count: c,
                    expected: lambda,
                });
            }
        }
    }
    // replication and block count identities
    let r_num = lambda * (v - 1);
    let r_den = kappa - 1;
    if r_den == 0 || r_num % r_den != 0 {
        violations.push(BibdViolation::NonIntegralInvariant);
    } else {
        let r = r_num / r_den;
        for point in 0..v {
            let count = d.blocks.iter().filter(|blk| blk.contains(&point)).count();
            if count != r {
                violations.push(BibdViolation::Replication {
                    point,
                    count,
                    expected: r,
                });
            }
        }
        if (v * r) % kappa != 0 {
            violations.push(BibdViolation::NonIntegralInvariant);
        } else if d.block_count() != v * r / kappa {
            violations.push(BibdViolation::BlockCount {
                count: d.block_count(),
                expected: v * r / kappa,
            });
        }
    }
    BibdReport { violations }
}

fn is_prime(p: usize) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// The projective plane of prime order p: points are the normalized
/// homogeneous triples over the p-element field, blocks are the lines.
/// Points and blocks are both ordered lexicographically by coordinates so
/// the construction is canonical.
pub fn projective_plane(p: usize) -> Result<Design, DesignError> {
    if p < 2 {
        return Err(DesignError::OrderTooSmall);
    }
    if !is_prime(p) {
        return Err(DesignError::NotPrime(p));
    }
    // normalized representatives: leftmost nonzero coordinate is 1
    let mut points: Vec<[usize; 3]> = Vec::new();
    for b in 0..p {
        for c in 0..p {
            points.push([1, b, c]);
        }
    }
    for c in 0..p {
        points.push([0, 1, c]);
    }
    points.push([0, 0, 1]);
    points.sort_unstable();

    let v = p * p + p + 1;
    debug_assert_eq!(points.len(), v);

    let lines = points.clone();
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(v);
    for line in &lines {
        let mut blk: Vec<usize> = points
            .iter()
            .enumerate()
            .filter(|(_, pt)| (line[0] * pt[0] + line[1] * pt[1] + line[2] * pt[2]) % p == 0)
            .map(|(i, _)| i)
            .collect();
        blk.sort_unstable();
        blocks.push(blk);
    }

    let d = Design::new(v, p + 1, 1, blocks)?;
    debug_assert!(validate_bibd(&d, v, p + 1, 1).is_valid());
    Ok(d)
}

/// The three-point toy design {{0,1},{0,2},{1,2}}: a (3,2,1)-BIBD with the
/// plane intersection property but too small to be a projective plane.
pub fn triangle_design() -> Design {
    Design::new(3, 2, 1, vec![vec![0, 1], vec![0, 2], vec![1, 2]])
        .expect("static toy design is structurally valid")
}
