//! Incidence-driven symbol placement: each design point owns one
//! sub-codeword whose n sub-nodes are spread evenly over the r blocks
//! containing the point; each storage node in a block holds exactly one
//! sub-node from each of the block's kappa points.

use crate::design::Design;

use super::BfrError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    /// [block][node] -> (point, sub-node index) per slot, in the block's
    /// sorted point order.
    assignments: Vec<Vec<Vec<(usize, usize)>>>,
    /// [point] -> blocks containing it, ascending.
    incident: Vec<Vec<usize>>,
    nodes_per_block: usize,
}

impl Placement {
    pub fn build(design: &Design, sub_nodes: usize) -> Result<Placement, BfrError> {
        let r = design.replication()?;
        if r == 0 || sub_nodes % r != 0 {
            return Err(BfrError::InvalidParams(format!(
                "replication degree {r} must divide the sub-code length {sub_nodes}"
            )));
        }
        let c = sub_nodes / r;
        let b = design.block_count();
        let mut incident = Vec::with_capacity(design.v);
        for t in 0..design.v {
            incident.push(design.blocks_through_point(t)?);
        }
        let mut assignments = vec![vec![Vec::new(); c]; b];
        for (blk, points) in design.blocks.iter().enumerate() {
            for u in 0..c {
                let mut slots = Vec::with_capacity(points.len());
                for &t in points {
                    let l = incident[t]
                        .iter()
                        .position(|&bb| bb == blk)
                        .expect("block contains the point");
                    slots.push((t, l * c + u));
                }
                assignments[blk][u] = slots;
            }
        }
        Ok(Placement {
            assignments,
            incident,
            nodes_per_block: c,
        })
    }

    pub fn nodes_per_block(&self) -> usize {
        self.nodes_per_block
    }

    /// The (point, sub-node) slots of one storage node.
    pub fn slots(&self, block: usize, node: usize) -> &[(usize, usize)] {
        &self.assignments[block][node]
    }

    /// Blocks containing a point, ascending.
    pub fn incident_blocks(&self, point: usize) -> &[usize] {
        &self.incident[point]
    }

    /// Sub-node of `point` held by storage node (block, node).
    pub fn sub_index(&self, point: usize, block: usize, node: usize) -> Option<usize> {
        let l = self.incident[point].iter().position(|&b| b == block)?;
        Some(l * self.nodes_per_block + node)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{projective_plane, triangle_design};

    #[test]
    fn order2_plane_placement_shape() {
        let d = projective_plane(2).unwrap();
        let p = Placement::build(&d, 6).unwrap();
        assert_eq!(p.nodes_per_block(), 2);
        // every node holds one sub-node per incident point
        for blk in 0..7 {
            for u in 0..2 {
                let slots = p.slots(blk, u);
                assert_eq!(slots.len(), 3);
                let points: Vec<usize> = slots.iter().map(|&(t, _)| t).collect();
                assert_eq!(points, d.blocks[blk]);
            }
        }
        // each point's 6 sub-nodes appear exactly once across the system
        let mut seen = vec![vec![false; 6]; 7];
        for blk in 0..7 {
            for u in 0..2 {
                for &(t, idx) in p.slots(blk, u) {
                    assert!(!seen[t][idx], "sub-node ({t},{idx}) placed twice");
                    seen[t][idx] = true;
                }
            }
        }
        assert!(seen.iter().flatten().all(|&s| s));
        // and they spread evenly: n/r = 2 per incident block
        for t in 0..7 {
            assert_eq!(p.incident_blocks(t).len(), 3);
        }
    }

    #[test]
    fn toy_design_placement() {
        let d = triangle_design();
        let p = Placement::build(&d, 10).unwrap();
        assert_eq!(p.nodes_per_block(), 5);
        for blk in 0..3 {
            for u in 0..5 {
                assert_eq!(p.slots(blk, u).len(), 2);
            }
        }
    }

    #[test]
    fn divisibility_enforced() {
        let d = projective_plane(2).unwrap();
        assert!(Placement::build(&d, 7).is_err());
    }

    #[test]
    fn sub_index_round_trip() {
        let d = projective_plane(2).unwrap();
        let p = Placement::build(&d, 6).unwrap();
        for blk in 0..7 {
            for u in 0..2 {
                for &(t, idx) in p.slots(blk, u) {
                    assert_eq!(p.sub_index(t, blk, u), Some(idx));
                }
            }
        }
        // block not containing the point
        let t = d.blocks[0][0];
        let non_incident = (0..7).find(|&b| !d.blocks[b].contains(&t)).unwrap();
        assert_eq!(p.sub_index(t, non_incident, 0), None);
    }
}
