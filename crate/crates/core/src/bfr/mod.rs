//! Full block-failure-resilient systems: the two-block transpose code, the
//! projective-plane placement of regenerating sub-codes, and the
//! rank-metric-precoded plane variant for collection resilience rho > 0.
//! Provides file encoding, load-balanced collection, and cross-block node
//! repair with per-symbol bandwidth accounting.

mod descriptor;
mod placement;
pub mod shard;

pub use descriptor::{Descriptor, DescriptorParams, GabSpec, SubSpec};
pub use placement::Placement;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{self, rat, TradeoffPoint};
use crate::design::{projective_plane, validate_bibd, Design, DesignError};
use crate::field::{Field, FieldElement, FieldError, FieldId};
use crate::gabidulin::{min_rank_over_collections, GabError, GabidulinCode};
use crate::regen::{RegenCodeKind, RegenError, RegenParams, RsCode, SubCode};

/// Evaluation-point generator recorded in descriptors; powers of the field
/// element 2 (= x) give the deterministic point sequences.
pub const DEFAULT_GENERATOR: u64 = 2;

#[derive(Debug, Error)]
pub enum BfrError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Regen(#[from] RegenError),
    #[error(transparent)]
    Gabidulin(#[from] GabError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("degenerate system: file size would be zero")]
    DegenerateFileSize,
    #[error("wrong file length: got {got}, want {want} symbols")]
    WrongFileLength { got: usize, want: usize },
    #[error("block {0} out of range")]
    BlockOutOfRange(usize),
    #[error("node {node} out of range for block capacity {capacity}")]
    NodeOutOfRange { node: usize, capacity: usize },
    #[error("block {0} is dead")]
    BlockDead(usize),
    #[error("block {0} is alive")]
    BlockAlive(usize),
    #[error("at most one block may be failed at a time (sigma = 1)")]
    OverlappingFailure,
    #[error("invalid collection choice: {0}")]
    BadCollectChoice(String),
    #[error("invalid helper choice: {0}")]
    BadHelperChoice(String),
    #[error("design fails validation: {0}")]
    InvalidDesign(String),
    #[error("descriptor inconsistent: {0}")]
    DescriptorMismatch(String),
    #[error("no feasible outer-code dimension for rho={0}")]
    NoFeasibleDimension(usize),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed shard: {0}")]
    ShardFormat(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Transpose,
    PlanePlacement,
    GabidulinPlane,
}

/// System parameters: n nodes in b blocks; collection reads k/(b-rho) nodes
/// from each of b-rho blocks; repair reads d/(b-1) nodes from each other
/// block, beta symbols per helper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BfrParams {
    pub construction: Construction,
    pub n: usize,
    pub b: usize,
    pub k: usize,
    pub d: usize,
    pub alpha: usize,
    pub beta: usize,
    pub rho: usize,
    pub sigma: usize,
    /// File size in symbols (extension symbols for the precoded variant).
    pub file_len: usize,
}

impl BfrParams {
    /// Nodes per block, c = n/b.
    pub fn block_capacity(&self) -> usize {
        self.n / self.b
    }

    /// Blocks contacted at collection, b_c = b - rho.
    pub fn collect_block_count(&self) -> usize {
        self.b - self.rho
    }

    /// Nodes read per contacted block, k_c = k/(b - rho).
    pub fn collect_per_block(&self) -> usize {
        self.k / self.collect_block_count()
    }

    /// Blocks contacted at repair, b_r = b - sigma.
    pub fn repair_block_count(&self) -> usize {
        self.b - self.sigma
    }

    /// Helpers per block at repair, d_r = d/(b - sigma).
    pub fn repair_per_block(&self) -> usize {
        self.d / self.repair_block_count()
    }

    /// Repair bandwidth gamma = d * beta in symbols.
    pub fn gamma(&self) -> usize {
        self.d * self.beta
    }

    pub fn validate(&self) -> Result<(), BfrError> {
        let fail = |msg: String| Err(BfrError::InvalidParams(msg));
        if self.b < 2 {
            return fail(format!("need at least 2 blocks, got {}", self.b));
        }
        if self.sigma != 1 {
            return fail(format!("sigma is fixed to 1, got {}", self.sigma));
        }
        if self.rho >= self.b {
            return fail(format!("rho={} must be below b={}", self.rho, self.b));
        }
        if self.n % self.b != 0 {
            return fail(format!("b={} must divide n={}", self.b, self.n));
        }
        if self.file_len == 0 {
            return Err(BfrError::DegenerateFileSize);
        }
        let bc = self.collect_block_count();
        if self.k == 0 || self.k % bc != 0 {
            return fail(format!("b_c={bc} must divide k={}", self.k));
        }
        let br = self.repair_block_count();
        if self.d == 0 || self.d % br != 0 {
            return fail(format!("b_r={br} must divide d={}", self.d));
        }
        let c = self.block_capacity();
        if self.collect_per_block() > c {
            return fail(format!(
                "k_c={} exceeds block capacity c={c}",
                self.collect_per_block()
            ));
        }
        if self.repair_per_block() > c {
            return fail(format!(
                "d_r={} exceeds block capacity c={c}",
                self.repair_per_block()
            ));
        }
        if self.repair_per_block() < self.collect_per_block() {
            return fail(format!(
                "d_r={} below k_c={}",
                self.repair_per_block(),
                self.collect_per_block()
            ));
        }
        Ok(())
    }
}

/// d_r helper nodes drawn from one live block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelperSet {
    pub block: usize,
    pub nodes: Vec<usize>,
}

/// Result of a node repair: the rebuilt content and the number of symbols
/// actually downloaded from helpers (counted, not assumed).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Repair {
    pub content: Vec<FieldElement>,
    pub downloaded: u64,
}

/// Stored state of a deployed system: b blocks of c nodes of alpha symbols,
/// plus per-block liveness. Mutations are single-writer; reads are free.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystemState {
    field: FieldId,
    blocks: Vec<Vec<Vec<FieldElement>>>,
    alive: Vec<bool>,
}

impl SystemState {
    fn new(field: FieldId, blocks: Vec<Vec<Vec<FieldElement>>>) -> SystemState {
        let alive = vec![true; blocks.len()];
        SystemState {
            field,
            blocks,
            alive,
        }
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn nodes_in_block(&self, block: usize) -> usize {
        self.blocks[block].len()
    }

    pub fn is_alive(&self, block: usize) -> bool {
        self.alive[block]
    }

    pub fn live_blocks(&self) -> Vec<usize> {
        (0..self.block_count()).filter(|&b| self.alive[b]).collect()
    }

    pub fn node(&self, block: usize, node: usize) -> Result<&[FieldElement], BfrError> {
        let blk = self
            .blocks
            .get(block)
            .ok_or(BfrError::BlockOutOfRange(block))?;
        let capacity = blk.len();
        blk.get(node)
            .map(|v| v.as_slice())
            .ok_or(BfrError::NodeOutOfRange { node, capacity })
    }

    /// Mark a block failed. At most one block may be down at a time.
    pub fn fail_block(&mut self, block: usize) -> Result<(), BfrError> {
        if block >= self.block_count() {
            return Err(BfrError::BlockOutOfRange(block));
        }
        if !self.alive[block] {
            return Err(BfrError::BlockDead(block));
        }
        if self.alive.iter().any(|&a| !a) {
            return Err(BfrError::OverlappingFailure);
        }
        self.alive[block] = false;
        Ok(())
    }

    pub fn revive_block(&mut self, block: usize) -> Result<(), BfrError> {
        if block >= self.block_count() {
            return Err(BfrError::BlockOutOfRange(block));
        }
        if self.alive[block] {
            return Err(BfrError::BlockAlive(block));
        }
        self.alive[block] = true;
        Ok(())
    }

    /// Overwrite a node's content (e.g. with freshly repaired symbols).
    pub fn set_node(
        &mut self,
        block: usize,
        node: usize,
        content: Vec<FieldElement>,
    ) -> Result<(), BfrError> {
        let want = self.node(block, node)?.len();
        if content.len() != want {
            return Err(BfrError::InvalidParams(format!(
                "node content has {} symbols, want {want}",
                content.len()
            )));
        }
        self.blocks[block][node] = content;
        Ok(())
    }
}

struct PlaneCore {
    design: Design,
    sub: SubCode,
    placement: Placement,
}

enum SystemKind {
    Transpose {
        rs: RsCode,
    },
    Plane {
        core: PlaneCore,
    },
    GabPlane {
        core: PlaneCore,
        gab: GabidulinCode,
        node_points: Vec<Vec<Vec<FieldElement>>>,
    },
}

/// An immutable, fully-determined code instance: build once, then encode,
/// collect and repair are pure functions of a [`SystemState`].
pub struct BfrSystem {
    params: BfrParams,
    field: Field,
    generator: u64,
    kind: SystemKind,
}

impl BfrSystem {
    // ---- constructors ----

    /// Two-block code: an [N = alpha^2, K = M] systematic Reed-Solomon
    /// codeword laid out as an alpha x alpha grid, rows in block 0 and
    /// columns in block 1. alpha = d = n/2, M = kd - (k/2)^2, beta = 1.
    pub fn transpose(field: Field, n: usize, k: usize) -> Result<BfrSystem, BfrError> {
        if field.is_extension() {
            return Err(BfrError::InvalidParams(
                "transpose systems use a base field".into(),
            ));
        }
        if n == 0 || n % 2 != 0 || k == 0 || k % 2 != 0 {
            return Err(BfrError::InvalidParams(format!(
                "transpose needs even n and k, got n={n} k={k}"
            )));
        }
        if k > n {
            return Err(BfrError::InvalidParams(format!("k={k} exceeds n={n}")));
        }
        let alpha = n / 2;
        // a 1x1 grid leaves nothing to transpose: both blocks replicate a
        // single cell and the code carries no file worth the name
        if alpha < 2 {
            return Err(BfrError::DegenerateFileSize);
        }
        let file_len = k * alpha - (k / 2) * (k / 2);
        if file_len == 0 {
            return Err(BfrError::DegenerateFileSize);
        }
        let rs = RsCode::new(field.clone(), alpha * alpha, file_len, DEFAULT_GENERATOR)?;
        let params = BfrParams {
            construction: Construction::Transpose,
            n,
            b: 2,
            k,
            d: alpha,
            alpha,
            beta: 1,
            rho: 0,
            sigma: 1,
            file_len,
        };
        params.validate()?;
        Ok(BfrSystem {
            params,
            field,
            generator: DEFAULT_GENERATOR,
            kind: SystemKind::Transpose { rs },
        })
    }

    /// Plane placement over the projective plane of prime order p.
    pub fn plane_placement(
        field: Field,
        p: usize,
        sub: RegenParams,
    ) -> Result<BfrSystem, BfrError> {
        Self::plane_with_design(field, projective_plane(p)?, sub)
    }

    /// Plane placement over an explicit design. The design must be a valid
    /// lambda = 1 BIBD in which any two blocks share exactly one point (the
    /// repair procedure routes one sub-symbol per helper block through that
    /// shared point).
    pub fn plane_with_design(
        field: Field,
        design: Design,
        sub: RegenParams,
    ) -> Result<BfrSystem, BfrError> {
        let sub_code = SubCode::new(field.clone(), sub, DEFAULT_GENERATOR)?;
        Self::assemble_plane(field, design, sub_code)
    }

    fn check_plane_design(design: &Design) -> Result<(), BfrError> {
        // pair-coverage validation is quadratic in v; cap it well above any
        // realistic block count before trusting descriptor-supplied designs
        if design.v > 4096 {
            return Err(BfrError::InvalidDesign(format!(
                "{} points exceeds the supported design size",
                design.v
            )));
        }
        let report = validate_bibd(design, design.v, design.kappa, design.lambda);
        if !report.is_valid() {
            return Err(BfrError::InvalidDesign(format!("{:?}", report.violations)));
        }
        if design.lambda != 1 {
            return Err(BfrError::InvalidDesign(format!(
                "placement needs lambda = 1, got {}",
                design.lambda
            )));
        }
        for i in 0..design.block_count() {
            for j in i + 1..design.block_count() {
                design.common_point(i, j)?;
            }
        }
        Ok(())
    }

    fn assemble_plane(
        field: Field,
        design: Design,
        sub_code: SubCode,
    ) -> Result<BfrSystem, BfrError> {
        Self::check_plane_design(&design)?;
        let sub = *sub_code.params();
        let r = design.replication()?;
        let kappa = design.kappa;
        let b = design.block_count();
        if sub.n % r != 0 || sub.k % r != 0 {
            return Err(BfrError::InvalidParams(format!(
                "replication degree {r} must divide the sub-code n={} and k={}",
                sub.n, sub.k
            )));
        }
        if r < 2 || sub.d % (r - 1) != 0 {
            return Err(BfrError::InvalidParams(format!(
                "r-1={} must divide the sub-code d={}",
                r - 1,
                sub.d
            )));
        }
        let placement = Placement::build(&design, sub.n)?;
        let c = placement.nodes_per_block();
        let params = BfrParams {
            construction: Construction::PlanePlacement,
            n: b * c,
            b,
            k: b * (sub.k / r),
            d: kappa * sub.d,
            alpha: kappa * sub.alpha,
            beta: sub.beta,
            rho: 0,
            sigma: 1,
            file_len: design.v * sub.message_len,
        };
        params.validate()?;
        let generator = sub_code.generator();
        Ok(BfrSystem {
            params,
            field,
            generator,
            kind: SystemKind::Plane {
                core: PlaneCore {
                    design,
                    sub: sub_code,
                    placement,
                },
            },
        })
    }

    /// Plane placement behind a rank-metric outer code so collection
    /// tolerates rho missing blocks. The file (K extension symbols, K the
    /// certified minimum rank accumulation) is outer-encoded first, the
    /// codeword partitioned into v parts and placed as usual. rho = 0
    /// delegates to the plain plane construction.
    pub fn gabidulin_plane(
        base: Field,
        p: usize,
        sub: RegenParams,
        rho: usize,
    ) -> Result<BfrSystem, BfrError> {
        Self::gabidulin_plane_with_design(base, projective_plane(p)?, sub, rho)
    }

    pub fn gabidulin_plane_with_design(
        base: Field,
        design: Design,
        sub: RegenParams,
        rho: usize,
    ) -> Result<BfrSystem, BfrError> {
        if base.is_extension() {
            return Err(BfrError::InvalidParams(
                "pass the base field; the extension is derived".into(),
            ));
        }
        if rho == 0 {
            return Self::plane_with_design(base, design, sub);
        }
        let b = design.block_count();
        if rho >= b {
            return Err(BfrError::InvalidParams(format!(
                "rho={rho} must be below b={b}"
            )));
        }
        Self::check_plane_design(&design)?;
        let r = design.replication()?;
        if sub.k % r != 0 {
            return Err(BfrError::InvalidParams(format!(
                "replication degree {r} must divide the sub-code k={}",
                sub.k
            )));
        }
        let k_c = sub.k / r;
        let collection = min_rank_over_collections(&design, &sub, rho, k_c)?;
        let dimension = collection.min_rank as usize;
        if dimension == 0 {
            return Err(BfrError::NoFeasibleDimension(rho));
        }
        let length = design.v * sub.message_len;
        let ext = Field::extension(base.w(), base.poly(), length)?;
        let gab = GabidulinCode::new(ext.clone(), length, dimension)?;
        let sub_code = SubCode::new(ext.clone(), sub, DEFAULT_GENERATOR)?;
        Self::assemble_gab_plane(ext, design, sub_code, gab, rho)
    }

    fn assemble_gab_plane(
        ext: Field,
        design: Design,
        sub_code: SubCode,
        gab: GabidulinCode,
        rho: usize,
    ) -> Result<BfrSystem, BfrError> {
        let sub = *sub_code.params();
        let r = design.replication()?;
        let kappa = design.kappa;
        let b = design.block_count();
        if sub.n % r != 0 || sub.k % r != 0 {
            return Err(BfrError::InvalidParams(format!(
                "replication degree {r} must divide the sub-code n={} and k={}",
                sub.n, sub.k
            )));
        }
        if r < 2 || sub.d % (r - 1) != 0 {
            return Err(BfrError::InvalidParams(format!(
                "r-1={} must divide the sub-code d={}",
                r - 1,
                sub.d
            )));
        }
        if gab.length() != design.v * sub.message_len {
            return Err(BfrError::DescriptorMismatch(format!(
                "outer code length {} != v * sub message length {}",
                gab.length(),
                design.v * sub.message_len
            )));
        }
        let placement = Placement::build(&design, sub.n)?;
        let c = placement.nodes_per_block();
        let k_c = sub.k / r;
        let params = BfrParams {
            construction: Construction::GabidulinPlane,
            n: b * c,
            b,
            k: k_c * (b - rho),
            d: kappa * sub.d,
            alpha: kappa * sub.alpha,
            beta: sub.beta,
            rho,
            sigma: 1,
            file_len: gab.dimension(),
        };
        params.validate()?;
        // derived evaluation point of every stored symbol: the same
        // base-field combination of the part's outer-codeword points that
        // the sub-code applies to the part's symbols
        let mut node_points = vec![vec![Vec::new(); c]; b];
        for blk in 0..b {
            for u in 0..c {
                let mut pts = Vec::with_capacity(params.alpha);
                for &(t, sub_idx) in placement.slots(blk, u) {
                    let coeffs = sub_code.encode_coeffs(sub_idx)?;
                    let part_points = &gab.points()[t * sub.message_len..(t + 1) * sub.message_len];
                    for a in 0..sub.alpha {
                        let mut acc = ext.zero();
                        for (cf, gp) in coeffs.row(a).iter().zip(part_points) {
                            if cf.is_zero() {
                                continue;
                            }
                            acc = ext.add(&acc, &ext.mul(cf, gp)?)?;
                        }
                        pts.push(acc);
                    }
                }
                node_points[blk][u] = pts;
            }
        }
        let generator = sub_code.generator();
        Ok(BfrSystem {
            params,
            field: ext,
            generator,
            kind: SystemKind::GabPlane {
                core: PlaneCore {
                    design,
                    sub: sub_code,
                    placement,
                },
                gab,
                node_points,
            },
        })
    }

    // ---- accessors ----

    pub fn params(&self) -> &BfrParams {
        &self.params
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn generator(&self) -> u64 {
        self.generator
    }

    pub fn design(&self) -> Option<&Design> {
        match &self.kind {
            SystemKind::Transpose { .. } => None,
            SystemKind::Plane { core } | SystemKind::GabPlane { core, .. } => Some(&core.design),
        }
    }

    pub fn sub_params(&self) -> Option<&RegenParams> {
        match &self.kind {
            SystemKind::Transpose { .. } => None,
            SystemKind::Plane { core } | SystemKind::GabPlane { core, .. } => {
                Some(core.sub.params())
            }
        }
    }

    pub fn outer_code(&self) -> Option<&GabidulinCode> {
        match &self.kind {
            SystemKind::GabPlane { gab, .. } => Some(gab),
            _ => None,
        }
    }

    /// Measured operating point (alpha, gamma, M) of this construction.
    pub fn operating_point(&self) -> TradeoffPoint {
        TradeoffPoint {
            alpha: rat(self.params.alpha as i128),
            gamma: rat(self.params.gamma() as i128),
            file_size: rat(self.params.file_len as i128),
        }
    }

    /// The bound point this construction targets: the two-block
    /// minimum-bandwidth point for the transpose code, the general
    /// minimum-storage/bandwidth point for plane placements (with b
    /// replaced by b - rho when rho > 0).
    pub fn bound_point(&self) -> Result<TradeoffPoint, BfrError> {
        let p = &self.params;
        let m = rat(p.file_len as i128);
        let point = match (&self.kind, self.sub_params().map(|s| s.kind)) {
            (SystemKind::Transpose { .. }, _) => bounds::mbr_point_b2(p.k as u64, p.d as u64, m),
            (_, Some(RegenCodeKind::Mbr)) => {
                bounds::mbr_point_resilient(p.b as u64, p.k as u64, p.d as u64, m, p.rho as u64)
            }
            _ => bounds::msr_point_resilient(p.b as u64, p.k as u64, p.d as u64, m, p.rho as u64),
        };
        point.map_err(|e| BfrError::InvalidParams(e.to_string()))
    }

    // ---- operations ----

    /// Encode a file of exactly `file_len` symbols into a fresh state.
    pub fn encode(&self, file: &[FieldElement]) -> Result<SystemState, BfrError> {
        if file.len() != self.params.file_len {
            return Err(BfrError::WrongFileLength {
                got: file.len(),
                want: self.params.file_len,
            });
        }
        for s in file {
            if !self.field.contains(s) {
                return Err(BfrError::Field(FieldError::FieldMismatch));
            }
        }
        let blocks = match &self.kind {
            SystemKind::Transpose { rs } => {
                let alpha = self.params.alpha;
                let cw = rs.encode(file)?;
                let rows: Vec<Vec<FieldElement>> = (0..alpha)
                    .map(|i| cw[i * alpha..(i + 1) * alpha].to_vec())
                    .collect();
                let cols: Vec<Vec<FieldElement>> = (0..alpha)
                    .map(|j| (0..alpha).map(|i| cw[i * alpha + j].clone()).collect())
                    .collect();
                vec![rows, cols]
            }
            SystemKind::Plane { core } => {
                let parts = split_parts(file, core.sub.params().message_len);
                core.encode_parts(&parts)?
            }
            SystemKind::GabPlane { core, gab, .. } => {
                let cw = gab.encode(file)?;
                let parts = split_parts(&cw, core.sub.params().message_len);
                core.encode_parts(&parts)?
            }
        };
        Ok(SystemState::new(self.field.id(), blocks))
    }

    fn validate_collect_choice(
        &self,
        state: &SystemState,
        blocks: &[usize],
        nodes: &[Vec<usize>],
    ) -> Result<(), BfrError> {
        let p = &self.params;
        if state.block_count() != p.b || state.field != self.field.id() {
            return Err(BfrError::DescriptorMismatch(
                "state does not belong to this system".into(),
            ));
        }
        if blocks.len() != p.collect_block_count() || nodes.len() != blocks.len() {
            return Err(BfrError::BadCollectChoice(format!(
                "need {} blocks with node choices, got {} and {}",
                p.collect_block_count(),
                blocks.len(),
                nodes.len()
            )));
        }
        let mut seen = vec![false; p.b];
        for &blk in blocks {
            if blk >= p.b {
                return Err(BfrError::BlockOutOfRange(blk));
            }
            if seen[blk] {
                return Err(BfrError::BadCollectChoice(format!(
                    "block {blk} chosen twice"
                )));
            }
            seen[blk] = true;
            if !state.is_alive(blk) {
                return Err(BfrError::BlockDead(blk));
            }
        }
        let c = p.block_capacity();
        for (i, choice) in nodes.iter().enumerate() {
            if choice.len() != p.collect_per_block() {
                return Err(BfrError::BadCollectChoice(format!(
                    "block {} needs exactly {} nodes, got {}",
                    blocks[i],
                    p.collect_per_block(),
                    choice.len()
                )));
            }
            let mut seen_nodes = vec![false; c];
            for &u in choice {
                if u >= c {
                    return Err(BfrError::NodeOutOfRange {
                        node: u,
                        capacity: c,
                    });
                }
                if seen_nodes[u] {
                    return Err(BfrError::BadCollectChoice(format!(
                        "node {u} chosen twice in block {}",
                        blocks[i]
                    )));
                }
                seen_nodes[u] = true;
            }
        }
        Ok(())
    }

    /// Reconstruct the file from k_c nodes of each of b_c chosen live
    /// blocks. Every admissible choice returns the identical file.
    pub fn collect(
        &self,
        state: &SystemState,
        blocks: &[usize],
        nodes: &[Vec<usize>],
    ) -> Result<Vec<FieldElement>, BfrError> {
        self.validate_collect_choice(state, blocks, nodes)?;
        match &self.kind {
            SystemKind::Transpose { rs } => {
                let alpha = self.params.alpha;
                let mut symbols: Vec<Option<FieldElement>> = vec![None; alpha * alpha];
                for (bi, &blk) in blocks.iter().enumerate() {
                    for &u in &nodes[bi] {
                        let data = state.node(blk, u)?;
                        for (j, val) in data.iter().enumerate() {
                            let pos = if blk == 0 {
                                u * alpha + j
                            } else {
                                j * alpha + u
                            };
                            symbols[pos] = Some(val.clone());
                        }
                    }
                }
                let pairs: Vec<(usize, FieldElement)> = symbols
                    .into_iter()
                    .enumerate()
                    .filter_map(|(pos, v)| v.map(|v| (pos, v)))
                    .collect();
                Ok(rs.decode(&pairs)?)
            }
            SystemKind::Plane { core } => core.collect(&self.params, state, blocks, nodes),
            SystemKind::GabPlane {
                gab, node_points, ..
            } => {
                let mut evals = Vec::new();
                for (bi, &blk) in blocks.iter().enumerate() {
                    for &u in &nodes[bi] {
                        let data = state.node(blk, u)?;
                        for (pt, val) in node_points[blk][u].iter().zip(data) {
                            evals.push((pt.clone(), val.clone()));
                        }
                    }
                }
                Ok(gab.decode(&evals)?)
            }
        }
    }

    /// Lowest-indexed defaults: the first b_c live blocks and the first k_c
    /// nodes of each.
    pub fn default_collect_choice(
        &self,
        state: &SystemState,
    ) -> Result<(Vec<usize>, Vec<Vec<usize>>), BfrError> {
        let p = &self.params;
        let live = state.live_blocks();
        if live.len() < p.collect_block_count() {
            return Err(BfrError::BadCollectChoice(format!(
                "only {} live blocks, need {}",
                live.len(),
                p.collect_block_count()
            )));
        }
        let blocks: Vec<usize> = live[..p.collect_block_count()].to_vec();
        let nodes = vec![(0..p.collect_per_block()).collect(); blocks.len()];
        Ok((blocks, nodes))
    }

    /// Lowest-indexed live helpers: d_r nodes from each block other than
    /// the failed one.
    pub fn default_helper_choice(&self, failed_block: usize) -> Vec<HelperSet> {
        let p = &self.params;
        (0..p.b)
            .filter(|&blk| blk != failed_block)
            .map(|blk| HelperSet {
                block: blk,
                nodes: (0..p.repair_per_block()).collect(),
            })
            .collect()
    }

    fn validate_helper_choice(
        &self,
        state: &SystemState,
        failed_block: usize,
        helpers: &[HelperSet],
    ) -> Result<(), BfrError> {
        let p = &self.params;
        if helpers.len() != p.repair_block_count() {
            return Err(BfrError::BadHelperChoice(format!(
                "need {} helper blocks, got {}",
                p.repair_block_count(),
                helpers.len()
            )));
        }
        let mut seen = vec![false; p.b];
        for hs in helpers {
            if hs.block >= p.b {
                return Err(BfrError::BlockOutOfRange(hs.block));
            }
            if hs.block == failed_block {
                return Err(BfrError::BadHelperChoice(
                    "helpers cannot come from the failed block".into(),
                ));
            }
            if seen[hs.block] {
                return Err(BfrError::BadHelperChoice(format!(
                    "helper block {} listed twice",
                    hs.block
                )));
            }
            seen[hs.block] = true;
            if !state.is_alive(hs.block) {
                return Err(BfrError::BlockDead(hs.block));
            }
            if hs.nodes.len() != p.repair_per_block() {
                return Err(BfrError::BadHelperChoice(format!(
                    "block {} needs exactly {} helper nodes, got {}",
                    hs.block,
                    p.repair_per_block(),
                    hs.nodes.len()
                )));
            }
            let c = p.block_capacity();
            let mut seen_nodes = vec![false; c];
            for &u in &hs.nodes {
                if u >= c {
                    return Err(BfrError::NodeOutOfRange {
                        node: u,
                        capacity: c,
                    });
                }
                if seen_nodes[u] {
                    return Err(BfrError::BadHelperChoice(format!(
                        "helper node {u} listed twice in block {}",
                        hs.block
                    )));
                }
                seen_nodes[u] = true;
            }
        }
        Ok(())
    }

    /// Rebuild one node of the failed block from d_r helpers in each other
    /// block, downloading beta symbols per helper (d * beta total, counted).
    pub fn repair_node(
        &self,
        state: &SystemState,
        failed_block: usize,
        failed_node: usize,
        helpers: &[HelperSet],
    ) -> Result<Repair, BfrError> {
        let p = &self.params;
        if failed_block >= p.b {
            return Err(BfrError::BlockOutOfRange(failed_block));
        }
        if state.is_alive(failed_block) {
            return Err(BfrError::BlockAlive(failed_block));
        }
        let c = p.block_capacity();
        if failed_node >= c {
            return Err(BfrError::NodeOutOfRange {
                node: failed_node,
                capacity: c,
            });
        }
        self.validate_helper_choice(state, failed_block, helpers)?;
        match &self.kind {
            SystemKind::Transpose { .. } => {
                let alpha = self.params.alpha;
                let hs = &helpers[0];
                // d_r = c: the full other block, one symbol per helper
                let mut sorted = hs.nodes.clone();
                sorted.sort_unstable();
                let mut content = Vec::with_capacity(alpha);
                let mut downloaded = 0u64;
                for &u in &sorted {
                    let sym = state.node(hs.block, u)?[failed_node].clone();
                    downloaded += 1;
                    content.push(sym);
                }
                Ok(Repair {
                    content,
                    downloaded,
                })
            }
            SystemKind::Plane { core } | SystemKind::GabPlane { core, .. } => {
                core.repair(&self.params, state, failed_block, failed_node, helpers)
            }
        }
    }
}

fn split_parts(symbols: &[FieldElement], part_len: usize) -> Vec<Vec<FieldElement>> {
    symbols
        .chunks(part_len)
        .map(|chunk| chunk.to_vec())
        .collect()
}

impl PlaneCore {
    fn encode_parts(
        &self,
        parts: &[Vec<FieldElement>],
    ) -> Result<Vec<Vec<Vec<FieldElement>>>, BfrError> {
        let sub = self.sub.params();
        let codewords: Vec<_> = parts
            .iter()
            .map(|p| self.sub.encode(p))
            .collect::<Result<_, _>>()?;
        let b = self.design.block_count();
        let c = self.placement.nodes_per_block();
        let mut blocks = vec![vec![Vec::new(); c]; b];
        for blk in 0..b {
            for u in 0..c {
                let mut content = Vec::with_capacity(self.design.kappa * sub.alpha);
                for &(t, sub_idx) in self.placement.slots(blk, u) {
                    content.extend_from_slice(&codewords[t].nodes[sub_idx]);
                }
                blocks[blk][u] = content;
            }
        }
        Ok(blocks)
    }

    fn collect(
        &self,
        params: &BfrParams,
        state: &SystemState,
        blocks: &[usize],
        nodes: &[Vec<usize>],
    ) -> Result<Vec<FieldElement>, BfrError> {
        let sub = self.sub.params();
        let mut per_point: Vec<Vec<(usize, &[FieldElement])>> = vec![Vec::new(); self.design.v];
        for (bi, &blk) in blocks.iter().enumerate() {
            for &u in &nodes[bi] {
                let data = state.node(blk, u)?;
                for (slot, &(t, sub_idx)) in self.placement.slots(blk, u).iter().enumerate() {
                    per_point[t].push((sub_idx, &data[slot * sub.alpha..(slot + 1) * sub.alpha]));
                }
            }
        }
        let mut file = Vec::with_capacity(params.file_len);
        for (t, gathered) in per_point.iter().enumerate() {
            if gathered.len() != sub.k {
                return Err(BfrError::BadCollectChoice(format!(
                    "part {t} received {} sub-nodes, needs {}",
                    gathered.len(),
                    sub.k
                )));
            }
            file.extend(self.sub.collect(gathered)?);
        }
        Ok(file)
    }

    fn repair(
        &self,
        params: &BfrParams,
        state: &SystemState,
        failed_block: usize,
        failed_node: usize,
        helpers: &[HelperSet],
    ) -> Result<Repair, BfrError> {
        let sub = self.sub.params();
        let d_r = params.repair_per_block();
        let mut helper_nodes: Vec<Option<&[usize]>> = vec![None; params.b];
        for hs in helpers {
            helper_nodes[hs.block] = Some(&hs.nodes);
        }
        let mut content = Vec::with_capacity(params.alpha);
        let mut downloaded = 0u64;
        for &(point, failed_sub) in self.placement.slots(failed_block, failed_node) {
            // the other blocks through this point each contribute
            // d_r = d_sub/(r-1) single-symbol helpers
            let mut contributions = Vec::with_capacity(sub.d);
            for &blk in self
                .placement
                .incident_blocks(point)
                .iter()
                .filter(|&&b| b != failed_block)
            {
                let nodes = helper_nodes[blk].ok_or_else(|| {
                    BfrError::BadHelperChoice(format!("missing helper set for block {blk}"))
                })?;
                debug_assert_eq!(nodes.len(), d_r);
                let slot = self.design.blocks[blk]
                    .iter()
                    .position(|&t| t == point)
                    .expect("incident block contains the point");
                for &u in nodes {
                    let sub_idx = self
                        .placement
                        .sub_index(point, blk, u)
                        .expect("incident block holds a sub-node of the point");
                    let data = state.node(blk, u)?;
                    let piece = &data[slot * sub.alpha..(slot + 1) * sub.alpha];
                    let symbol = self.sub.repair_symbol(failed_sub, sub_idx, piece)?;
                    downloaded += sub.beta as u64;
                    contributions.push((sub_idx, symbol));
                }
            }
            content.extend(self.sub.repair_from_symbols(failed_sub, &contributions)?);
        }
        Ok(Repair {
            content,
            downloaded,
        })
    }
}
