//! Effective distance and schedule-cost metrics.
//!
//! The effective distance of an adapted patch is the shortest
//! terminal-to-terminal path in its constraint graph. Every live data qubit
//! has exactly two opposite-type coverage slots (native check sites, or the
//! exterior past a terminal boundary). Slots map to the retained row covering
//! them, so super-stabilizer products act as single contracted vertices; sites
//! with no retained image, together with defective qubits, form gap regions
//! that chains traverse for free, and a gap region connected to a terminal
//! boundary extends that terminal. Validated against an exhaustive coset
//! oracle at small distances.
//!
//! The round model is a model, not a reproduction: base 5d rounds, +2 per
//! gauge-inferred seam row selected by the certificate (alternating cycles),
//! +1 per Strategy-B enlarged check.

use crate::adapt::{AdaptOutcome, PatchAdaptation, RetainedRow};
use crate::gf2::BitVec;
use crate::lattice::{CheckDef, CheckId, MergeLayout, PatchId, Pauli, QubitId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

pub const BASE_ROUNDS_PER_DISTANCE: usize = 5;
pub const ROUNDS_PER_INFERRED_ROW: usize = 2;
pub const ROUNDS_PER_ENLARGED_CHECK: usize = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricsSnapshot {
    pub d_eff: usize,
    pub d_eff_ratio: f64,
    pub rounds: usize,
    pub extra_rounds: i64,
    pub inferred_rows: usize,
    pub enlarged_checks: usize,
}

/// Exterior slot past a terminal boundary, in the XX pipeline frame:
/// X-type logicals terminate on rows 1/d, Z-type on columns 1/d.
fn exterior_slot(q: QubitId, d: usize, logical: Pauli) -> Option<bool> {
    match logical {
        Pauli::X => match q.row {
            1 => Some(false),
            r if r == d => Some(true),
            _ => None,
        },
        Pauli::Z => match q.col {
            1 => Some(false),
            c if c == d => Some(true),
            _ => None,
        },
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Shortest terminal-to-terminal path length, counting one per qubit edge.
/// `sites` is the native opposite-type inventory the rows were adapted from;
/// `rows` the retained constraint rows over those sites.
fn graph_distance(
    layout: &MergeLayout,
    sites: &[&CheckDef],
    rows: &[RetainedRow],
    qubits: &[QubitId],
    dead: &BitVec,
    logical: Pauli,
) -> Option<usize> {
    let d = layout.d;
    // Map each native site to its retained row, if any.
    let mut site_image: BTreeMap<CheckId, usize> = BTreeMap::new();
    for (ri, row) in rows.iter().enumerate() {
        for id in &row.constituents {
            site_image.insert(*id, ri);
        }
    }
    // Gap universe: TOP, BOTTOM, lost sites, dead qubits.
    let mut gap_ids: BTreeMap<CheckId, usize> = BTreeMap::new();
    let mut next = 2usize;
    for s in sites {
        if !site_image.contains_key(&s.id) {
            gap_ids.insert(s.id, next);
            next += 1;
        }
    }
    let dead_qubits: Vec<QubitId> = qubits
        .iter()
        .copied()
        .filter(|&q| dead.get(layout.col_of(q)))
        .collect();
    let mut dead_gap: BTreeMap<QubitId, usize> = BTreeMap::new();
    for &q in &dead_qubits {
        dead_gap.insert(q, next);
        next += 1;
    }
    let mut uf = UnionFind::new(next);
    let mut sites_of: BTreeMap<QubitId, Vec<CheckId>> = BTreeMap::new();
    for s in sites {
        for &q in &s.support {
            sites_of.entry(q).or_default().push(s.id);
        }
    }
    for &q in &dead_qubits {
        let g = dead_gap[&q];
        if let Some(ids) = sites_of.get(&q) {
            for id in ids {
                if let Some(&lost) = gap_ids.get(id) {
                    uf.union(g, lost);
                }
            }
        }
        if let Some(end) = exterior_slot(q, d, logical) {
            uf.union(g, if end { 1 } else { 0 });
        }
    }

    // Vertices: retained rows, then one per gap component.
    let n_rows = rows.len();
    let mut gap_vertex: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertex_count = n_rows;
    let mut vertex_of_gap = |uf: &mut UnionFind, g: usize, gap_vertex: &mut BTreeMap<usize, usize>| {
        let root = uf.find(g);
        *gap_vertex.entry(root).or_insert_with(|| {
            let v = vertex_count;
            vertex_count += 1;
            v
        })
    };
    let start = vertex_of_gap(&mut uf, 0, &mut gap_vertex);
    let end = vertex_of_gap(&mut uf, 1, &mut gap_vertex);
    if start == end {
        return Some(0);
    }
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &q in qubits {
        if dead.get(layout.col_of(q)) {
            continue;
        }
        let mut slots: Vec<usize> = Vec::with_capacity(2);
        if let Some(ids) = sites_of.get(&q) {
            for id in ids {
                if let Some(&ri) = site_image.get(id) {
                    slots.push(ri);
                } else {
                    let g = gap_ids[id];
                    slots.push(vertex_of_gap(&mut uf, g, &mut gap_vertex));
                }
            }
        }
        if let Some(endside) = exterior_slot(q, d, logical) {
            slots.push(if endside { end } else { start });
        }
        debug_assert_eq!(slots.len(), 2, "qubit {q:?} has {} slots", slots.len());
        if slots.len() == 2 && slots[0] != slots[1] {
            edges.push((slots[0], slots[1]));
        }
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); vertex_count];
    for (a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    // Unit-weight BFS.
    let mut dist = vec![usize::MAX; vertex_count];
    dist[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if v == end {
            return Some(dist[end]);
        }
        for &w in &adjacency[v] {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    None
}

fn patch_qubits(d: usize, patch: PatchId) -> Vec<QubitId> {
    (1..=d)
        .flat_map(move |r| (1..=d).map(move |c| QubitId::new(patch, r, c)))
        .collect()
}

/// Effective distance for `logical`-type operators on one adapted patch.
pub fn effective_distance(
    layout: &MergeLayout,
    patch: &PatchAdaptation,
    dead: &BitVec,
    logical: Pauli,
) -> Option<usize> {
    let opp = logical.opposite();
    let rows = match logical {
        Pauli::X => &patch.opp_rows,
        Pauli::Z => &patch.same_rows,
    };
    let sites: Vec<&CheckDef> = layout
        .patch_checks_of(patch.patch)
        .filter(|c| c.pauli == opp)
        .collect();
    graph_distance(
        layout,
        &sites,
        rows,
        &patch_qubits(layout.d, patch.patch),
        dead,
        logical,
    )
}

/// Merge-relevant effective distance: minimum over the two patches.
pub fn merge_effective_distance(layout: &MergeLayout, adapted: &AdaptOutcome) -> Option<usize> {
    let a = effective_distance(layout, &adapted.patch_a, &adapted.dead, Pauli::X)?;
    let b = effective_distance(layout, &adapted.patch_b, &adapted.dead, Pauli::X)?;
    Some(a.min(b))
}

/// Alternative single-graph variant over the merged configuration.
pub fn merged_configuration_distance(
    layout: &MergeLayout,
    adapted: &AdaptOutcome,
) -> Option<usize> {
    let mut qubits = patch_qubits(layout.d, PatchId::A);
    qubits.extend(patch_qubits(layout.d, PatchId::B));
    let sites: Vec<&CheckDef> = layout
        .merged_checks()
        .filter(|c| c.pauli == Pauli::Z)
        .collect();
    graph_distance(
        layout,
        &sites,
        &adapted.merged_opp_rows,
        &qubits,
        &adapted.dead,
        Pauli::X,
    )
}

/// Both logical classes survive on both patches with nonzero distance.
pub fn patches_viable(layout: &MergeLayout, adapted: &AdaptOutcome) -> bool {
    for patch in [&adapted.patch_a, &adapted.patch_b] {
        for logical in [Pauli::X, Pauli::Z] {
            match effective_distance(layout, patch, &adapted.dead, logical) {
                Some(d) if d > 0 => {}
                _ => return false,
            }
        }
    }
    true
}

/// Schedule length under the declared round model.
pub fn schedule_rounds(d: usize, inferred_rows: usize, enlarged_checks: usize) -> usize {
    BASE_ROUNDS_PER_DISTANCE * d
        + ROUNDS_PER_INFERRED_ROW * inferred_rows
        + ROUNDS_PER_ENLARGED_CHECK * enlarged_checks
}
