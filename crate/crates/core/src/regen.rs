//! The sub-codes plugged into block-failure-resilient constructions: a
//! systematic Reed-Solomon code and exact-repair product-matrix regenerating
//! codes at the minimum-storage (MSR) and minimum-bandwidth (MBR) points.
//!
//! Product-matrix codes store row i of `Psi * Msg`, where `Psi` is a
//! Vandermonde-derived encoding matrix on the points 1, g, g^2, ... and
//! `Msg` packs the message into a structured (symmetric) matrix:
//!
//! * MBR: `Msg = [[S, T], [T', 0]]`, S symmetric k x k, T k x (d-k);
//!   every node stores alpha = d symbols, beta = 1.
//! * MSR (d = 2k-2): `Msg = [[S1], [S2]]`, both symmetric alpha x alpha with
//!   alpha = k-1, and `Psi = [Phi, Lambda*Phi]` with distinct diagonal
//!   Lambda.
//!
//! Repair of a node downloads exactly one symbol from each of any d helpers
//! (the helper's stored row dotted with the failed node's encoding row);
//! data collection recovers the message from any k nodes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Field, FieldElement, FieldError, Matrix};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegenError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("field too small: need {need} distinct evaluation points, have {have}")]
    FieldTooSmall { need: usize, have: usize },
    #[error("wrong message length: got {got}, want {want}")]
    WrongMessageLength { got: usize, want: usize },
    #[error("wrong node count: got {got}, want {want}")]
    WrongNodeCount { got: usize, want: usize },
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("duplicate node index {0}")]
    DuplicateNode(usize),
    #[error("helper {0} is the failed node")]
    HelperIsFailed(usize),
    #[error("node data has {got} symbols, want {want}")]
    WrongSymbolCount { got: usize, want: usize },
    #[error("contact count {j} out of range 1..={n}")]
    ContactOutOfRange { j: usize, n: usize },
    #[error("degenerate encoding matrix: {0}")]
    DegenerateMatrix(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegenCodeKind {
    Mds,
    Msr,
    Mbr,
}

/// Parameters of a regenerating sub-code: n nodes, collection from any k,
/// repair from any d helpers, alpha symbols per node, beta per helper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegenParams {
    pub kind: RegenCodeKind,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    #[serde(rename = "M")]
    pub message_len: usize,
}

impl RegenParams {
    /// Product-matrix MBR: alpha = d*beta, message = kd - k(k-1)/2 (beta = 1).
    pub fn mbr(n: usize, k: usize, d: usize) -> Result<RegenParams, RegenError> {
        if k == 0 || d < k || n <= d {
            return Err(RegenError::InvalidParams(format!(
                "mbr needs n > d >= k >= 1, got n={n} k={k} d={d}"
            )));
        }
        Ok(RegenParams {
            kind: RegenCodeKind::Mbr,
            n,
            k,
            d,
            alpha: d,
            beta: 1,
            message_len: k * d - k * (k - 1) / 2,
        })
    }

    /// Product-matrix MSR in the base regime d = 2k-2, alpha = k-1, beta = 1.
    pub fn msr(n: usize, k: usize) -> Result<RegenParams, RegenError> {
        if k < 2 {
            return Err(RegenError::InvalidParams(format!(
                "msr needs k >= 2, got k={k}"
            )));
        }
        let d = 2 * k - 2;
        if n <= d {
            return Err(RegenError::InvalidParams(format!(
                "msr needs n > d = 2k-2, got n={n} k={k}"
            )));
        }
        Ok(RegenParams {
            kind: RegenCodeKind::Msr,
            n,
            k,
            d,
            alpha: k - 1,
            beta: 1,
            message_len: k * (k - 1),
        })
    }

    /// Scalar MDS code (systematic Reed-Solomon); repair degenerates to
    /// full decode from d = k nodes.
    pub fn mds(n: usize, k: usize) -> Result<RegenParams, RegenError> {
        if k == 0 || n < k {
            return Err(RegenError::InvalidParams(format!(
                "mds needs n >= k >= 1, got n={n} k={k}"
            )));
        }
        Ok(RegenParams {
            kind: RegenCodeKind::Mds,
            n,
            k,
            d: k,
            alpha: 1,
            beta: 1,
            message_len: k,
        })
    }

    pub fn validate(&self) -> Result<(), RegenError> {
        let rebuilt = match self.kind {
            RegenCodeKind::Mbr => RegenParams::mbr(self.n, self.k, self.d)?,
            RegenCodeKind::Msr => RegenParams::msr(self.n, self.k)?,
            RegenCodeKind::Mds => RegenParams::mds(self.n, self.k)?,
        };
        if rebuilt != *self {
            return Err(RegenError::InvalidParams(format!(
                "inconsistent parameters {self:?}, expected {rebuilt:?}"
            )));
        }
        Ok(())
    }
}

/// Useful-symbol count contributed by the j-th node contacted (1-based)
/// within one sub-codeword; zero past k.
pub fn rank_profile(params: &RegenParams, j: usize) -> Result<u64, RegenError> {
    if j == 0 || j > params.n {
        return Err(RegenError::ContactOutOfRange { j, n: params.n });
    }
    if j > params.k {
        return Ok(0);
    }
    Ok(match params.kind {
        RegenCodeKind::Msr | RegenCodeKind::Mds => params.alpha as u64,
        RegenCodeKind::Mbr => (params.alpha - (j - 1) * params.beta) as u64,
    })
}

/// One encoded sub-codeword: n nodes of alpha symbols each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubCodeword {
    pub nodes: Vec<Vec<FieldElement>>,
}

enum CodeMatrices {
    /// Full n x d encoding matrix.
    Mbr { psi: Matrix },
    /// Phi (n x alpha), distinct diagonal lambda, and the assembled
    /// psi = [Phi | Lambda*Phi] (n x d).
    Msr {
        phi: Matrix,
        lambda: Vec<FieldElement>,
        psi: Matrix,
    },
    /// Systematic generator matrix (n x k).
    Mds { gen: Matrix },
}

/// An instantiated sub-code over a concrete field. Immutable after
/// construction; encode/repair/collect are pure.
pub struct SubCode {
    field: Field,
    params: RegenParams,
    generator: u64,
    matrices: CodeMatrices,
    /// Per node: alpha x message_len matrix mapping the message vector to
    /// the node's stored symbols. Single source of truth for encoding.
    coeffs: Vec<Matrix>,
}

fn tri_index(dim: usize, i: usize, j: usize) -> usize {
    let (lo, hi) = (i.min(j), i.max(j));
    lo * (2 * dim - lo + 1) / 2 + (hi - lo)
}

fn tri_count(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Position of Msg[row][col] in the packed MBR message vector, None for the
/// zero block.
fn mbr_msg_index(k: usize, d: usize, row: usize, col: usize) -> Option<usize> {
    let s_count = tri_count(k);
    match (row < k, col < k) {
        (true, true) => Some(tri_index(k, row, col)),
        (true, false) => Some(s_count + row * (d - k) + (col - k)),
        (false, true) => Some(s_count + col * (d - k) + (row - k)),
        (false, false) => None,
    }
}

fn dot(field: &Field, a: &[FieldElement], b: &[FieldElement]) -> Result<FieldElement, FieldError> {
    let mut acc = field.zero();
    for (x, y) in a.iter().zip(b) {
        if x.is_zero() || y.is_zero() {
            continue;
        }
        acc = field.add(&acc, &field.mul(x, y)?)?;
    }
    Ok(acc)
}

impl SubCode {
    /// Build the code with evaluation points 1, g, g^2, ... for the field
    /// generator g (recorded as `generator` in system descriptors).
    pub fn new(field: Field, params: RegenParams, generator: u64) -> Result<SubCode, RegenError> {
        Self::build(field, params, generator, None)
    }

    /// Build with an explicit encoding-matrix override (Psi for MBR, Phi for
    /// MSR, the generator matrix for MDS). Shape is checked, algebraic
    /// health is not: verification catches corrupted matrices.
    pub fn with_matrix(
        field: Field,
        params: RegenParams,
        generator: u64,
        matrix: Matrix,
    ) -> Result<SubCode, RegenError> {
        Self::build(field, params, generator, Some(matrix))
    }

    fn build(
        field: Field,
        params: RegenParams,
        generator: u64,
        override_matrix: Option<Matrix>,
    ) -> Result<SubCode, RegenError> {
        params.validate()?;
        let max_points = (field.base_size() - 1) as usize;
        if params.n > max_points {
            return Err(RegenError::FieldTooSmall {
                need: params.n,
                have: max_points,
            });
        }
        let g = field.element(generator)?;
        let mut points = Vec::with_capacity(params.n);
        let mut cur = field.one();
        for _ in 0..params.n {
            points.push(cur.clone());
            cur = field.mul(&cur, &g)?;
        }
        {
            let mut seen = std::collections::HashSet::new();
            if !points.iter().all(|p| seen.insert(p.clone())) {
                return Err(RegenError::DegenerateMatrix(
                    "evaluation points are not distinct".into(),
                ));
            }
        }

        let check_shape = |m: &Matrix, rows: usize, cols: usize| -> Result<(), RegenError> {
            if m.rows() != rows || m.cols() != cols {
                return Err(RegenError::InvalidParams(format!(
                    "matrix override is {}x{}, want {}x{}",
                    m.rows(),
                    m.cols(),
                    rows,
                    cols
                )));
            }
            Ok(())
        };

        let matrices = match params.kind {
            RegenCodeKind::Mbr => {
                let psi = match override_matrix {
                    Some(m) => {
                        check_shape(&m, params.n, params.d)?;
                        m
                    }
                    None => Matrix::vandermonde(field.clone(), &points, params.d)?,
                };
                CodeMatrices::Mbr { psi }
            }
            RegenCodeKind::Msr => {
                let phi = match override_matrix {
                    Some(m) => {
                        check_shape(&m, params.n, params.alpha)?;
                        m
                    }
                    None => Matrix::vandermonde(field.clone(), &points, params.alpha)?,
                };
                let mut lambda = Vec::with_capacity(params.n);
                for p in &points {
                    lambda.push(field.pow(p, params.alpha as u64)?);
                }
                {
                    let mut seen = std::collections::HashSet::new();
                    if !lambda.iter().all(|l| seen.insert(l.clone())) {
                        return Err(RegenError::DegenerateMatrix(
                            "lambda diagonal entries are not distinct".into(),
                        ));
                    }
                }
                // psi = [Phi | Lambda * Phi]
                let mut data = Vec::with_capacity(params.n * params.d);
                for i in 0..params.n {
                    data.extend_from_slice(phi.row(i));
                    for j in 0..params.alpha {
                        data.push(field.mul(&lambda[i], phi.get(i, j))?);
                    }
                }
                let psi = Matrix::new(field.clone(), params.n, params.d, data)?;
                CodeMatrices::Msr { phi, lambda, psi }
            }
            RegenCodeKind::Mds => {
                let gen = match override_matrix {
                    Some(m) => {
                        check_shape(&m, params.n, params.k)?;
                        m
                    }
                    None => {
                        let v_all = Matrix::vandermonde(field.clone(), &points, params.k)?;
                        let v_first =
                            Matrix::vandermonde(field.clone(), &points[..params.k], params.k)?;
                        v_all.mul(&v_first.inverse()?)?
                    }
                };
                CodeMatrices::Mds { gen }
            }
        };

        let mut code = SubCode {
            field,
            params,
            generator,
            matrices,
            coeffs: Vec::new(),
        };
        code.coeffs = (0..params.n)
            .map(|i| code.node_coeffs(i))
            .collect::<Result<_, _>>()?;
        Ok(code)
    }

    pub fn params(&self) -> &RegenParams {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    /// The kind-specific encoding matrix (Psi / Phi / G), e.g. for
    /// serialization into a descriptor override.
    pub fn encoding_matrix(&self) -> &Matrix {
        match &self.matrices {
            CodeMatrices::Mbr { psi } => psi,
            CodeMatrices::Msr { phi, .. } => phi,
            CodeMatrices::Mds { gen } => gen,
        }
    }

    fn node_coeffs(&self, node: usize) -> Result<Matrix, RegenError> {
        let p = &self.params;
        let f = &self.field;
        let mut c = Matrix::zeros(f.clone(), p.alpha, p.message_len);
        match &self.matrices {
            CodeMatrices::Mbr { psi } => {
                for a in 0..p.alpha {
                    for j in 0..p.d {
                        if let Some(u) = mbr_msg_index(p.k, p.d, j, a) {
                            let sum = f.add(c.get(a, u), psi.get(node, j))?;
                            *c.get_mut(a, u) = sum;
                        }
                    }
                }
            }
            CodeMatrices::Msr { phi, lambda, .. } => {
                let s1_count = tri_count(p.alpha);
                for a in 0..p.alpha {
                    for j in 0..p.alpha {
                        let u1 = tri_index(p.alpha, j, a);
                        let sum = f.add(c.get(a, u1), phi.get(node, j))?;
                        *c.get_mut(a, u1) = sum;
                        let u2 = s1_count + tri_index(p.alpha, j, a);
                        let lam_phi = f.mul(&lambda[node], phi.get(node, j))?;
                        let sum = f.add(c.get(a, u2), &lam_phi)?;
                        *c.get_mut(a, u2) = sum;
                    }
                }
            }
            CodeMatrices::Mds { gen } => {
                for u in 0..p.k {
                    *c.get_mut(0, u) = gen.get(node, u).clone();
                }
            }
        }
        Ok(c)
    }

    /// The alpha x message_len map from message symbols to a node's stored
    /// symbols; coefficients live in the base subfield.
    pub fn encode_coeffs(&self, node: usize) -> Result<&Matrix, RegenError> {
        self.coeffs
            .get(node)
            .ok_or(RegenError::NodeOutOfRange(node))
    }

    pub fn encode(&self, message: &[FieldElement]) -> Result<SubCodeword, RegenError> {
        if message.len() != self.params.message_len {
            return Err(RegenError::WrongMessageLength {
                got: message.len(),
                want: self.params.message_len,
            });
        }
        let nodes = self
            .coeffs
            .iter()
            .map(|c| c.mul_vec(message))
            .collect::<Result<_, _>>()?;
        Ok(SubCodeword { nodes })
    }

    /// The row a helper dots its stored symbols with to produce its single
    /// repair symbol for `failed`.
    fn repair_vector(&self, failed: usize) -> Vec<FieldElement> {
        match &self.matrices {
            CodeMatrices::Mbr { psi } => psi.row(failed).to_vec(),
            CodeMatrices::Msr { phi, .. } => phi.row(failed).to_vec(),
            CodeMatrices::Mds { .. } => vec![self.field.one()],
        }
    }

    /// The beta = 1 symbol `helper` sends toward the repair of `failed`.
    pub fn repair_symbol(
        &self,
        failed: usize,
        helper: usize,
        helper_data: &[FieldElement],
    ) -> Result<FieldElement, RegenError> {
        if failed >= self.params.n {
            return Err(RegenError::NodeOutOfRange(failed));
        }
        if helper >= self.params.n {
            return Err(RegenError::NodeOutOfRange(helper));
        }
        if helper == failed {
            return Err(RegenError::HelperIsFailed(helper));
        }
        if helper_data.len() != self.params.alpha {
            return Err(RegenError::WrongSymbolCount {
                got: helper_data.len(),
                want: self.params.alpha,
            });
        }
        Ok(dot(&self.field, helper_data, &self.repair_vector(failed))?)
    }

    /// Exact repair from the beta-symbol contributions of exactly d distinct
    /// helpers. Output is bit-identical to the lost node content.
    pub fn repair_from_symbols(
        &self,
        failed: usize,
        contributions: &[(usize, FieldElement)],
    ) -> Result<Vec<FieldElement>, RegenError> {
        let p = &self.params;
        if failed >= p.n {
            return Err(RegenError::NodeOutOfRange(failed));
        }
        if contributions.len() != p.d {
            return Err(RegenError::WrongNodeCount {
                got: contributions.len(),
                want: p.d,
            });
        }
        let mut seen = vec![false; p.n];
        for &(h, _) in contributions {
            if h >= p.n {
                return Err(RegenError::NodeOutOfRange(h));
            }
            if h == failed {
                return Err(RegenError::HelperIsFailed(h));
            }
            if seen[h] {
                return Err(RegenError::DuplicateNode(h));
            }
            seen[h] = true;
        }
        let indices: Vec<usize> = contributions.iter().map(|&(h, _)| h).collect();
        let values: Vec<FieldElement> = contributions.iter().map(|(_, v)| v.clone()).collect();
        match &self.matrices {
            CodeMatrices::Mbr { psi } => {
                // helpers gave Psi_H * (Msg psi_f); Msg symmetric, so the
                // failed row is the transpose of the solved vector
                let sys = psi.select_rows(&indices);
                Ok(sys.solve(&values)?)
            }
            CodeMatrices::Msr { psi, lambda, .. } => {
                let sys = psi.select_rows(&indices);
                let u = sys.solve(&values)?;
                let f = &self.field;
                let mut out = Vec::with_capacity(p.alpha);
                for a in 0..p.alpha {
                    let t = f.mul(&lambda[failed], &u[p.alpha + a])?;
                    out.push(f.add(&u[a], &t)?);
                }
                Ok(out)
            }
            CodeMatrices::Mds { gen } => {
                let msg = self.collect_internal(
                    &indices,
                    &values.iter().map(std::slice::from_ref).collect::<Vec<_>>(),
                )?;
                let row = gen.select_rows(&[failed]);
                Ok(row.mul_vec(&msg)?)
            }
        }
    }

    /// Convenience wrapper: compute every helper's repair symbol from its
    /// full stored vector, then finish the repair.
    pub fn repair(
        &self,
        failed: usize,
        helpers: &[(usize, &[FieldElement])],
    ) -> Result<Vec<FieldElement>, RegenError> {
        let contributions = helpers
            .iter()
            .map(|&(h, data)| Ok((h, self.repair_symbol(failed, h, data)?)))
            .collect::<Result<Vec<_>, RegenError>>()?;
        self.repair_from_symbols(failed, &contributions)
    }

    /// Recover the message from any k distinct nodes' stored vectors.
    pub fn collect(
        &self,
        nodes: &[(usize, &[FieldElement])],
    ) -> Result<Vec<FieldElement>, RegenError> {
        let p = &self.params;
        if nodes.len() != p.k {
            return Err(RegenError::WrongNodeCount {
                got: nodes.len(),
                want: p.k,
            });
        }
        let mut seen = vec![false; p.n];
        for &(i, data) in nodes {
            if i >= p.n {
                return Err(RegenError::NodeOutOfRange(i));
            }
            if seen[i] {
                return Err(RegenError::DuplicateNode(i));
            }
            seen[i] = true;
            if data.len() != p.alpha {
                return Err(RegenError::WrongSymbolCount {
                    got: data.len(),
                    want: p.alpha,
                });
            }
        }
        let indices: Vec<usize> = nodes.iter().map(|&(i, _)| i).collect();
        let data: Vec<&[FieldElement]> = nodes.iter().map(|&(_, d)| d).collect();
        self.collect_internal(&indices, &data)
    }

    fn collect_internal(
        &self,
        indices: &[usize],
        data: &[&[FieldElement]],
    ) -> Result<Vec<FieldElement>, RegenError> {
        let p = &self.params;
        let f = &self.field;
        match &self.matrices {
            CodeMatrices::Mds { gen } => {
                let sys = gen.select_rows(indices);
                let values: Vec<FieldElement> = data.iter().map(|d| d[0].clone()).collect();
                Ok(sys.solve(&values)?)
            }
            CodeMatrices::Mbr { psi } => {
                let psi_dc = psi.select_rows(indices);
                let phi_dc = psi_dc.select_cols(0, p.k);
                let delta_dc = psi_dc.select_cols(p.k, p.d);
                let phi_inv = phi_dc.inverse()?;
                let mut r_data = Vec::with_capacity(p.k * p.d);
                for row in data {
                    r_data.extend_from_slice(row);
                }
                let r = Matrix::new(f.clone(), p.k, p.d, r_data)?;
                let r_right = r.select_cols(p.k, p.d);
                let r_left = r.select_cols(0, p.k);
                // T from the right block, then S from the left block
                let t = if p.d > p.k {
                    phi_inv.mul(&r_right)?
                } else {
                    Matrix::zeros(f.clone(), p.k, 0)
                };
                let s = {
                    let correction = if p.d > p.k {
                        delta_dc.mul(&t.transpose())?
                    } else {
                        Matrix::zeros(f.clone(), p.k, p.k)
                    };
                    let mut adjusted = Vec::with_capacity(p.k * p.k);
                    for i in 0..p.k {
                        for j in 0..p.k {
                            adjusted.push(f.add(r_left.get(i, j), correction.get(i, j))?);
                        }
                    }
                    phi_inv.mul(&Matrix::new(f.clone(), p.k, p.k, adjusted)?)?
                };
                let mut msg = vec![f.zero(); p.message_len];
                for i in 0..p.k {
                    for j in i..p.k {
                        msg[tri_index(p.k, i, j)] = s.get(i, j).clone();
                    }
                    for c in 0..p.d - p.k {
                        msg[tri_count(p.k) + i * (p.d - p.k) + c] = t.get(i, c).clone();
                    }
                }
                Ok(msg)
            }
            CodeMatrices::Msr { phi, lambda, .. } => {
                let phi_dc = phi.select_rows(indices);
                let lam_dc: Vec<&FieldElement> = indices.iter().map(|&i| &lambda[i]).collect();
                let mut r_data = Vec::with_capacity(p.k * p.alpha);
                for row in data {
                    r_data.extend_from_slice(row);
                }
                let r = Matrix::new(f.clone(), p.k, p.alpha, r_data)?;
                let c = r.mul(&phi_dc.transpose())?;
                // split C = P + Lambda Q on off-diagonal entries
                let mut p_mat = Matrix::zeros(f.clone(), p.k, p.k);
                let mut q_mat = Matrix::zeros(f.clone(), p.k, p.k);
                for i in 0..p.k {
                    for j in i + 1..p.k {
                        let denom = f.add(lam_dc[i], lam_dc[j])?;
                        let num = f.add(c.get(i, j), c.get(j, i))?;
                        let q = f.div(&num, &denom)?;
                        let pij = f.add(c.get(i, j), &f.mul(lam_dc[i], &q)?)?;
                        *q_mat.get_mut(i, j) = q.clone();
                        *q_mat.get_mut(j, i) = q;
                        *p_mat.get_mut(i, j) = pij.clone();
                        *p_mat.get_mut(j, i) = pij;
                    }
                }
                // per accessed node i: solve B_i x = offdiag row for
                // x = S phi_i, with B_i the other nodes' phi rows
                let recover = |mat: &Matrix| -> Result<Matrix, RegenError> {
                    let mut cols = Vec::with_capacity(p.alpha);
                    for i in 0..p.alpha {
                        let others: Vec<usize> = (0..p.k).filter(|&j| j != i).collect();
                        let b = phi_dc.select_rows(&others);
                        let rhs: Vec<FieldElement> =
                            others.iter().map(|&j| mat.get(i, j).clone()).collect();
                        cols.push(b.solve(&rhs)?);
                    }
                    // columns are S*phi_i for i < alpha: S = cols * (Phi_sub^T)^-1
                    let mut col_data = Vec::with_capacity(p.alpha * p.alpha);
                    for r_i in 0..p.alpha {
                        for col in cols.iter() {
                            col_data.push(col[r_i].clone());
                        }
                    }
                    let col_mat = Matrix::new(f.clone(), p.alpha, p.alpha, col_data)?;
                    let phi_sub = phi_dc.select_rows(&(0..p.alpha).collect::<Vec<_>>());
                    Ok(col_mat.mul(&phi_sub.transpose().inverse()?)?)
                };
                let s1 = recover(&p_mat)?;
                let s2 = recover(&q_mat)?;
                let mut msg = vec![f.zero(); p.message_len];
                let s1_count = tri_count(p.alpha);
                for i in 0..p.alpha {
                    for j in i..p.alpha {
                        msg[tri_index(p.alpha, i, j)] = s1.get(i, j).clone();
                        msg[s1_count + tri_index(p.alpha, i, j)] = s2.get(i, j).clone();
                    }
                }
                Ok(msg)
            }
        }
    }
}

/// Systematic Reed-Solomon over evaluation points 1, g, g^2, ...; any k
/// coordinates determine the message.
pub struct RsCode {
    field: Field,
    n: usize,
    k: usize,
    points: Vec<FieldElement>,
}

impl RsCode {
    pub fn new(field: Field, n: usize, k: usize, generator: u64) -> Result<RsCode, RegenError> {
        if k == 0 || k > n {
            return Err(RegenError::InvalidParams(format!(
                "rs needs 1 <= k <= n, got n={n} k={k}"
            )));
        }
        let max_points = (field.base_size() - 1) as usize;
        if n > max_points {
            return Err(RegenError::FieldTooSmall {
                need: n,
                have: max_points,
            });
        }
        let g = field.element(generator)?;
        let mut points = Vec::with_capacity(n);
        let mut cur = field.one();
        for _ in 0..n {
            points.push(cur.clone());
            cur = field.mul(&cur, &g)?;
        }
        Ok(RsCode {
            field,
            n,
            k,
            points,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Systematic encode: the first k codeword symbols are the message.
    pub fn encode(&self, message: &[FieldElement]) -> Result<Vec<FieldElement>, RegenError> {
        if message.len() != self.k {
            return Err(RegenError::WrongMessageLength {
                got: message.len(),
                want: self.k,
            });
        }
        let v_first = Matrix::vandermonde(self.field.clone(), &self.points[..self.k], self.k)?;
        let coeffs = v_first.solve(message)?;
        let v_all = Matrix::vandermonde(self.field.clone(), &self.points, self.k)?;
        Ok(v_all.mul_vec(&coeffs)?)
    }

    /// Decode the message from any k (position, symbol) pairs.
    pub fn decode(
        &self,
        symbols: &[(usize, FieldElement)],
    ) -> Result<Vec<FieldElement>, RegenError> {
        if symbols.len() < self.k {
            return Err(RegenError::WrongNodeCount {
                got: symbols.len(),
                want: self.k,
            });
        }
        let mut seen = vec![false; self.n];
        let mut used_points = Vec::with_capacity(self.k);
        let mut used_values = Vec::with_capacity(self.k);
        for &(pos, ref val) in symbols {
            if pos >= self.n {
                return Err(RegenError::NodeOutOfRange(pos));
            }
            if seen[pos] {
                return Err(RegenError::DuplicateNode(pos));
            }
            seen[pos] = true;
            if used_points.len() < self.k {
                used_points.push(self.points[pos].clone());
                used_values.push(val.clone());
            }
        }
        if used_points.len() < self.k {
            return Err(RegenError::WrongNodeCount {
                got: used_points.len(),
                want: self.k,
            });
        }
        let v = Matrix::vandermonde(self.field.clone(), &used_points, self.k)?;
        let coeffs = v.solve(&used_values)?;
        let v_first = Matrix::vandermonde(self.field.clone(), &self.points[..self.k], self.k)?;
        Ok(v_first.mul_vec(&coeffs)?)
    }
}
