//! Closed-form file-size bounds and operating points for block-failure-
//! resilient regenerating codes, plus an independent information-flow-graph
//! max-flow oracle that validates the closed forms.
//!
//! All outputs are exact rationals. The flow-graph oracle models k
//! successive single-node failures (the per-block failure order given by a
//! [`FailureSequence`]), repairs each from `d/(b-1)` helpers per live block
//! preferring previously repaired nodes, attaches a data collector to the k
//! repaired nodes, and computes the exact max-flow from the source.

use num::rational::Ratio;
use num::{One, Signed, Zero};
use thiserror::Error;

pub type Rational = Ratio<i128>;

pub fn rat(n: i128) -> Rational {
    Rational::from_integer(n)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("k must be even for the two-block closed form, got {0}")]
    OddK(u64),
    #[error("b must divide k: b={b}, k={k}")]
    Divisibility { b: u64, k: u64 },
    #[error("d={d} too small for b={b}, k={k}")]
    RepairDegreeTooSmall { b: u64, k: u64, d: u64 },
    #[error("degenerate denominator in operating point")]
    DegenerateDenominator,
    #[error("parameters out of range: {0}")]
    OutOfRange(String),
    #[error("file size {0} not supported by any alpha at this gamma")]
    Infeasible(Rational),
    #[error("malformed failure sequence: {0}")]
    BadSequence(String),
    #[error("classical points need d >= k, got k={k}, d={d}")]
    ClassicalRange { k: u64, d: u64 },
}

/// A storage/repair-bandwidth operating point and the file size it supports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub alpha: Rational,
    pub gamma: Rational,
    pub file_size: Rational,
}

fn check_positive(v: Rational) -> Result<Rational, BoundsError> {
    if v <= Rational::zero() {
        return Err(BoundsError::DegenerateDenominator);
    }
    Ok(v)
}

/// Two-block file-size bound for even k:
/// sum_{i=0}^{k/2-1} min(alpha, (d-i) beta) + sum_{i=1}^{k/2} min(alpha, (d-i) beta).
pub fn filesize_bound_b2(
    k: u64,
    d: u64,
    alpha: Rational,
    beta: Rational,
) -> Result<Rational, BoundsError> {
    if k == 0 || k % 2 != 0 {
        return Err(BoundsError::OddK(k));
    }
    if d < k / 2 {
        return Err(BoundsError::RepairDegreeTooSmall { b: 2, k, d });
    }
    let mut total = Rational::zero();
    for i in 0..k / 2 {
        total += alpha.min((rat(d as i128) - rat(i as i128)) * beta);
    }
    for i in 1..=k / 2 {
        total += alpha.min((rat(d as i128) - rat(i as i128)) * beta);
    }
    Ok(total)
}

/// General-b file-size bound (b | k):
/// sum_{j=0}^{b-1} sum_{i=0}^{k/b-1} min(alpha, (d - j - (b-1)i) beta).
pub fn filesize_bound_general(
    b: u64,
    k: u64,
    d: u64,
    alpha: Rational,
    beta: Rational,
) -> Result<Rational, BoundsError> {
    if b < 2 || k == 0 || k % b != 0 {
        return Err(BoundsError::Divisibility { b, k });
    }
    let per_block = k / b;
    // smallest term must be nonnegative
    if d < (b - 1) + (b - 1) * (per_block - 1) {
        return Err(BoundsError::RepairDegreeTooSmall { b, k, d });
    }
    let mut total = Rational::zero();
    for j in 0..b {
        for i in 0..per_block {
            let remaining = rat(d as i128 - j as i128 - ((b - 1) * i) as i128);
            total += alpha.min(remaining * beta);
        }
    }
    Ok(total)
}

/// Minimum-storage point: alpha = M/k, gamma = M d / (kd - k^2 (b-1)/b).
pub fn msr_point(
    b: u64,
    k: u64,
    d: u64,
    file_size: Rational,
) -> Result<TradeoffPoint, BoundsError> {
    if b < 2 || k == 0 || k % b != 0 {
        return Err(BoundsError::Divisibility { b, k });
    }
    let (bq, kq, dq) = (rat(b as i128), rat(k as i128), rat(d as i128));
    let denom = check_positive(kq * dq - kq * kq * (bq - Rational::one()) / bq)?;
    Ok(TradeoffPoint {
        alpha: file_size / kq,
        gamma: file_size * dq / denom,
        file_size,
    })
}

/// Minimum-bandwidth point: alpha = gamma = M d / (kd - k^2 (b-1)/(2b)).
pub fn mbr_point(
    b: u64,
    k: u64,
    d: u64,
    file_size: Rational,
) -> Result<TradeoffPoint, BoundsError> {
    if b < 2 || k == 0 || k % b != 0 {
        return Err(BoundsError::Divisibility { b, k });
    }
    let (bq, kq, dq) = (rat(b as i128), rat(k as i128), rat(d as i128));
    let denom = check_positive(kq * dq - kq * kq * (bq - Rational::one()) / (rat(2) * bq))?;
    let gamma = file_size * dq / denom;
    Ok(TradeoffPoint {
        alpha: gamma,
        gamma,
        file_size,
    })
}

/// Resilience variant: the rho > 0 points are the rho = 0 formulas with b
/// replaced by b_c = b - rho on every appearance.
pub fn msr_point_resilient(
    b: u64,
    k: u64,
    d: u64,
    file_size: Rational,
    rho: u64,
) -> Result<TradeoffPoint, BoundsError> {
    if rho >= b {
        return Err(BoundsError::OutOfRange(format!("rho={rho} >= b={b}")));
    }
    msr_point(b - rho, k, d, file_size)
}

pub fn mbr_point_resilient(
    b: u64,
    k: u64,
    d: u64,
    file_size: Rational,
    rho: u64,
) -> Result<TradeoffPoint, BoundsError> {
    if rho >= b {
        return Err(BoundsError::OutOfRange(format!("rho={rho} >= b={b}")));
    }
    mbr_point(b - rho, k, d, file_size)
}

/// Two-block minimum-storage point with the odd-k branch:
/// gamma = 2Md/(2kd - k^2 - k) odd, 2Md/(2kd - k^2) even.
pub fn msr_point_b2(k: u64, d: u64, file_size: Rational) -> Result<TradeoffPoint, BoundsError> {
    if k == 0 || d < k.div_ceil(2) {
        return Err(BoundsError::OutOfRange(format!("k={k}, d={d}")));
    }
    let (kq, dq) = (rat(k as i128), rat(d as i128));
    let denom = if k % 2 == 1 {
        rat(2) * kq * dq - kq * kq - kq
    } else {
        rat(2) * kq * dq - kq * kq
    };
    let denom = check_positive(denom)?;
    Ok(TradeoffPoint {
        alpha: file_size / kq,
        gamma: rat(2) * file_size * dq / denom,
        file_size,
    })
}

/// Two-block minimum-bandwidth point with the odd-k branch:
/// alpha = gamma = 4Md/(4dk - k^2 + 1) odd, 4Md/(4dk - k^2) even.
pub fn mbr_point_b2(k: u64, d: u64, file_size: Rational) -> Result<TradeoffPoint, BoundsError> {
    if k == 0 || d < k.div_ceil(2) {
        return Err(BoundsError::OutOfRange(format!("k={k}, d={d}")));
    }
    let (kq, dq) = (rat(k as i128), rat(d as i128));
    let denom = if k % 2 == 1 {
        rat(4) * dq * kq - kq * kq + Rational::one()
    } else {
        rat(4) * dq * kq - kq * kq
    };
    let denom = check_positive(denom)?;
    let gamma = rat(4) * file_size * dq / denom;
    Ok(TradeoffPoint {
        alpha: gamma,
        gamma,
        file_size,
    })
}

/// Classical regenerating-code bandwidths for comparison:
/// gamma_MSR = Md/(k(d-k+1)), gamma_MBR = 2Md/(k(2d-k+1)).
pub fn classical_points(
    k: u64,
    d: u64,
    file_size: Rational,
) -> Result<(Rational, Rational), BoundsError> {
    if k == 0 || d < k {
        return Err(BoundsError::ClassicalRange { k, d });
    }
    let (kq, dq) = (rat(k as i128), rat(d as i128));
    let msr = file_size * dq / check_positive(kq * (dq - kq + Rational::one()))?;
    let mbr = rat(2) * file_size * dq / check_positive(kq * (rat(2) * dq - kq + Rational::one()))?;
    Ok((msr, mbr))
}

/// Block assignment of each successive failed-and-repaired node; exactly
/// k/b entries per block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FailureSequence(pub Vec<usize>);

impl FailureSequence {
    /// Canonical round-robin order 0, 1, ..., b-1, 0, 1, ...
    pub fn round_robin(b: u64, k: u64) -> FailureSequence {
        FailureSequence((0..k).map(|i| (i % b) as usize).collect())
    }

    fn validate(&self, b: u64, k: u64) -> Result<(), BoundsError> {
        if self.0.len() != k as usize {
            return Err(BoundsError::BadSequence(format!(
                "sequence has {} entries, want k={k}",
                self.0.len()
            )));
        }
        let mut counts = vec![0u64; b as usize];
        for &blk in &self.0 {
            if blk >= b as usize {
                return Err(BoundsError::BadSequence(format!(
                    "block {blk} out of range for b={b}"
                )));
            }
            counts[blk] += 1;
        }
        if counts.iter().any(|&c| c != k / b) {
            return Err(BoundsError::BadSequence(format!(
                "unbalanced sequence {counts:?}, want {} per block",
                k / b
            )));
        }
        Ok(())
    }
}

// ---- integer max-flow (Edmonds-Karp) on a small arena graph ----

struct FlowGraph {
    adj: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<i128>,
}

impl FlowGraph {
    fn new(nodes: usize) -> FlowGraph {
        FlowGraph {
            adj: vec![Vec::new(); nodes],
            to: Vec::new(),
            cap: Vec::new(),
        }
    }

    fn add_node(&mut self) -> usize {
        self.adj.push(Vec::new());
        self.adj.len() - 1
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i128) {
        self.adj[from].push(self.to.len());
        self.to.push(to);
        self.cap.push(cap);
        self.adj[to].push(self.to.len());
        self.to.push(from);
        self.cap.push(0);
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i128 {
        let mut flow = 0i128;
        loop {
            // BFS for a shortest augmenting path
            let mut prev_edge = vec![usize::MAX; self.adj.len()];
            let mut visited = vec![false; self.adj.len()];
            let mut queue = std::collections::VecDeque::new();
            visited[s] = true;
            queue.push_back(s);
            while let Some(u) = queue.pop_front() {
                if u == t {
                    break;
                }
                for &e in &self.adj[u] {
                    let v = self.to[e];
                    if !visited[v] && self.cap[e] > 0 {
                        visited[v] = true;
                        prev_edge[v] = e;
                        queue.push_back(v);
                    }
                }
            }
            if !visited[t] {
                return flow;
            }
            let mut bottleneck = i128::MAX;
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                bottleneck = bottleneck.min(self.cap[e]);
                v = self.to[e ^ 1];
            }
            let mut v = t;
            while v != s {
                let e = prev_edge[v];
                self.cap[e] -= bottleneck;
                self.cap[e ^ 1] += bottleneck;
                v = self.to[e ^ 1];
            }
            flow += bottleneck;
        }
    }
}

/// Exact max-flow of the information-flow graph for one failure order.
/// Helpers per repair: all previously repaired live nodes of each other
/// block, topped up with fresh originals to d/(b-1) per block. The data
/// collector reads the k repaired nodes.
pub fn flowgraph_mincut(
    b: u64,
    k: u64,
    d: u64,
    alpha: Rational,
    beta: Rational,
    sequence: &FailureSequence,
) -> Result<Rational, BoundsError> {
    if b < 2 || k == 0 || k % b != 0 {
        return Err(BoundsError::Divisibility { b, k });
    }
    if d % (b - 1) != 0 {
        return Err(BoundsError::OutOfRange(format!(
            "d={d} not divisible by b-1={}",
            b - 1
        )));
    }
    if alpha.is_negative() || beta.is_negative() {
        return Err(BoundsError::OutOfRange("negative capacity".into()));
    }
    sequence.validate(b, k)?;
    let d_r = (d / (b - 1)) as usize;

    // clear rationals to integers
    let scale = num::integer::lcm(*alpha.denom(), *beta.denom());
    let alpha_i = *alpha.numer() * (scale / *alpha.denom());
    let beta_i = *beta.numer() * (scale / *beta.denom());
    let inf = (alpha_i + beta_i + 1) * (k as i128) * (d as i128 + 1) + 1;

    let mut g = FlowGraph::new(2);
    let (source, sink) = (0usize, 1usize);
    // per block: stack of fresh original nodes, created on demand
    let mut fresh: Vec<Vec<(usize, usize)>> = vec![Vec::new(); b as usize]; // (x_in, x_out)
    let mut repaired: Vec<Vec<usize>> = vec![Vec::new(); b as usize]; // x_out ids
    let make_original = |g: &mut FlowGraph, blk: usize, fresh: &mut Vec<Vec<(usize, usize)>>| {
        let x_in = g.add_node();
        let x_out = g.add_node();
        g.add_edge(source, x_in, inf);
        g.add_edge(x_in, x_out, alpha_i);
        fresh[blk].push((x_in, x_out));
    };

    let mut dc_inputs = Vec::with_capacity(k as usize);
    for &blk in &sequence.0 {
        let x_in = g.add_node();
        let x_out = g.add_node();
        g.add_edge(x_in, x_out, alpha_i);
        for other in 0..b as usize {
            if other == blk {
                continue;
            }
            let from_repaired: Vec<usize> = repaired[other].iter().copied().take(d_r).collect();
            for &h in &from_repaired {
                g.add_edge(h, x_in, beta_i);
            }
            let need_fresh = d_r - from_repaired.len();
            for _ in 0..need_fresh {
                make_original(&mut g, other, &mut fresh);
                let (_, h_out) = *fresh[other].last().unwrap();
                g.add_edge(h_out, x_in, beta_i);
            }
        }
        repaired[blk].push(x_out);
        dc_inputs.push(x_out);
    }
    for out in dc_inputs {
        g.add_edge(out, sink, inf);
    }
    let flow = g.max_flow(source, sink);
    Ok(Rational::new(flow, scale))
}

fn multiset_orders(b: u64, k: u64) -> Vec<FailureSequence> {
    let per_block = (k / b) as usize;
    let mut out = Vec::new();
    let mut counts = vec![per_block; b as usize];
    let mut cur = Vec::with_capacity(k as usize);
    fn rec(
        counts: &mut Vec<usize>,
        cur: &mut Vec<usize>,
        total: usize,
        out: &mut Vec<FailureSequence>,
    ) {
        if cur.len() == total {
            out.push(FailureSequence(cur.clone()));
            return;
        }
        for blk in 0..counts.len() {
            if counts[blk] > 0 {
                counts[blk] -= 1;
                cur.push(blk);
                rec(counts, cur, total, out);
                cur.pop();
                counts[blk] += 1;
            }
        }
    }
    rec(&mut counts, &mut cur, k as usize, &mut out);
    out
}

/// Minimum of [`flowgraph_mincut`] over failure orders: all distinct orders
/// for k <= 8, the canonical round-robin order beyond that.
pub fn min_mincut_over_orders(
    b: u64,
    k: u64,
    d: u64,
    alpha: Rational,
    beta: Rational,
) -> Result<Rational, BoundsError> {
    if k <= 8 {
        let mut best: Option<Rational> = None;
        for seq in multiset_orders(b, k) {
            let v = flowgraph_mincut(b, k, d, alpha, beta, &seq)?;
            best = Some(match best {
                None => v,
                Some(cur) => cur.min(v),
            });
        }
        best.ok_or_else(|| BoundsError::BadSequence("no failure orders".into()))
    } else {
        flowgraph_mincut(b, k, d, alpha, beta, &FailureSequence::round_robin(b, k))
    }
}

/// Sampled storage/bandwidth trade-off: for each gamma from the MBR
/// endpoint (smallest bandwidth, largest storage) up to the MSR endpoint,
/// the minimal alpha whose bound supports the file size.
pub fn tradeoff_curve(
    b: u64,
    k: u64,
    d: u64,
    file_size: Rational,
    samples: usize,
) -> Result<Vec<TradeoffPoint>, BoundsError> {
    if samples < 2 {
        return Err(BoundsError::OutOfRange("samples must be >= 2".into()));
    }
    let msr = msr_point(b, k, d, file_size)?;
    let mbr = mbr_point(b, k, d, file_size)?;
    let mut out = Vec::with_capacity(samples);
    let steps = rat(samples as i128 - 1);
    for s in 0..samples {
        let gamma = mbr.gamma + (msr.gamma - mbr.gamma) * rat(s as i128) / steps;
        let beta = gamma / rat(d as i128);
        let alpha = min_alpha_for(b, k, d, file_size, beta)?;
        out.push(TradeoffPoint {
            alpha,
            gamma,
            file_size,
        });
    }
    Ok(out)
}

/// Minimal alpha with filesize_bound_general(alpha, beta) >= file size,
/// solved region by region on the piecewise-linear bound.
fn min_alpha_for(
    b: u64,
    k: u64,
    d: u64,
    file_size: Rational,
    beta: Rational,
) -> Result<Rational, BoundsError> {
    let per_block = k / b;
    let mut caps: Vec<Rational> = Vec::with_capacity(k as usize);
    for j in 0..b {
        for i in 0..per_block {
            caps.push(rat(d as i128 - j as i128 - ((b - 1) * i) as i128) * beta);
        }
    }
    caps.sort();
    let total: Rational = caps.iter().cloned().sum();
    if total < file_size {
        return Err(BoundsError::Infeasible(file_size));
    }
    // below caps[idx], the bound is prefix + alpha * (k - idx)
    let mut prefix = Rational::zero();
    for idx in 0..caps.len() {
        let active = rat((caps.len() - idx) as i128);
        let candidate = (file_size - prefix) / active;
        if candidate <= caps[idx] {
            return Ok(candidate);
        }
        prefix += caps[idx];
    }
    Ok(*caps.last().expect("k >= 1 terms"))
}
