//! Effective seam family construction.
//!
//! Walks the seam windows of an adapted merge and assembles the admissible
//! seam rows: native rows for intact checks, gauge-inferred rows for
//! ancilla-defective checks, and fused super-checks for windows broken by
//! data defects. Every candidate must decompose into weight-2 gauge
//! primitives with live adjacent ancillas (source admissibility), overlap
//! every retained opposite-type constraint evenly, and clear the distance
//! filter carried by the orientation selection.

use crate::adapt::{AdaptOutcome, MethodToggles, Orientation, SeamStatus};
use crate::defects::DefectInstance;
use crate::gf2::{BitMatrix, BitVec};
use crate::lattice::{CheckId, MergeLayout, QubitId};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Debug)]
pub struct GaugePrimitive {
    pub qubits: Vec<QubitId>,
    pub host: CheckId,
}

#[derive(Clone, Debug)]
pub enum SeamProvenance {
    Native {
        seam_index: usize,
    },
    Fused {
        windows: Vec<usize>,
        corrections: Vec<CheckId>,
    },
    Inferred {
        seam_index: usize,
        orientation: Orientation,
    },
}

#[derive(Clone, Debug)]
pub struct SeamRow {
    pub support: BitVec,
    pub provenance: SeamProvenance,
    /// Weight-2 gauge realization; empty for native rows.
    pub gauges: Vec<GaugePrimitive>,
}

impl SeamRow {
    pub fn display_label(&self) -> String {
        match &self.provenance {
            SeamProvenance::Native { seam_index } => format!("e{seam_index}"),
            SeamProvenance::Inferred { seam_index, .. } => format!("inferred(e{seam_index})"),
            SeamProvenance::Fused { windows, .. } => {
                let names: Vec<String> = windows.iter().map(|k| format!("e{k}")).collect();
                format!("fused({})", names.join(","))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RejectReason {
    SupportDirty,
    SourceInadmissible,
    OppAnticommute,
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            RejectReason::SupportDirty => "SUPPORT_DIRTY",
            RejectReason::SourceInadmissible => "SOURCE_INADMISSIBLE",
            RejectReason::OppAnticommute => "OPP_ANTICOMMUTE",
        }
    }
}

#[derive(Clone, Debug)]
pub struct RejectedCandidate {
    pub windows: Vec<usize>,
    pub corrections: Vec<CheckId>,
    pub reason: RejectReason,
}

/// Raw measured bit: a native seam bit or one gauge outcome.
#[derive(Clone, Debug)]
pub struct RawLabel {
    pub name: String,
    pub row: usize,
    pub support: BitVec,
}

#[derive(Clone, Debug)]
pub struct SeamFamily {
    pub rows: Vec<SeamRow>,
    pub raw_labels: Vec<RawLabel>,
    /// Inference map: one row per seam row, one column per raw label.
    pub inference: BitMatrix,
    pub rejections: Vec<RejectedCandidate>,
    /// Seam windows that ended up with no row at all.
    pub dropped_windows: Vec<usize>,
}

impl SeamFamily {
    pub fn row_matrix(&self, ncols: usize) -> BitMatrix {
        BitMatrix::from_rows(ncols, self.rows.iter().map(|r| r.support.clone()).collect())
    }
}

fn pair_sort_key(pair: &[QubitId]) -> (usize, usize, usize) {
    use crate::lattice::PatchId;
    let min_row = pair.iter().map(|q| q.row).min().unwrap();
    let min_col = pair.iter().map(|q| q.col).min().unwrap();
    let patches: BTreeSet<PatchId> = pair.iter().map(|q| q.patch).collect();
    let patch_key = if patches.len() == 2 {
        2
    } else if patches.contains(&PatchId::A) {
        0
    } else {
        1
    };
    (min_row, patch_key, min_col)
}

/// First live ancilla site adjacent to both qubits, in inventory order.
fn find_host(
    layout: &MergeLayout,
    dead_anc: &BTreeSet<CheckId>,
    a: QubitId,
    b: QubitId,
) -> Option<CheckId> {
    layout
        .sites_containing_pair(a, b)
        .into_iter()
        .map(|c| c.id)
        .find(|id| !dead_anc.contains(id))
}

/// Decomposes a same-type row support into weight-2 gauge primitives, each
/// measurable by a live adjacent ancilla. Deterministic backtracking: the
/// lowest unmatched qubit is paired preferentially with its cross-seam
/// partner, then its vertical neighbor, then any other host-sharing qubit.
pub fn decompose_to_gauges(
    layout: &MergeLayout,
    dead_anc: &BTreeSet<CheckId>,
    support: &BitVec,
) -> Option<Vec<GaugePrimitive>> {
    let d = layout.d;
    let qubits: Vec<QubitId> = support.iter_ones().map(|c| layout.qubit_at(c)).collect();
    if !qubits.len().is_multiple_of(2) {
        return None;
    }
    fn backtrack(
        layout: &MergeLayout,
        dead_anc: &BTreeSet<CheckId>,
        d: usize,
        remaining: &[QubitId],
        pairs: &mut Vec<(QubitId, QubitId, CheckId)>,
    ) -> bool {
        let Some(&q) = remaining.first() else {
            return true;
        };
        use crate::lattice::PatchId;
        // Partner priority: cross-seam row mate, vertical neighbor, rest.
        let mut candidates: Vec<QubitId> = Vec::new();
        let cross = match q.patch {
            PatchId::A if q.col == d => Some(QubitId::new(PatchId::B, q.row, 1)),
            PatchId::B if q.col == 1 => Some(QubitId::new(PatchId::A, q.row, d)),
            _ => None,
        };
        if let Some(c) = cross {
            if remaining.contains(&c) {
                candidates.push(c);
            }
        }
        let vertical = QubitId::new(q.patch, q.row + 1, q.col);
        if q.row < d && remaining.contains(&vertical) && !candidates.contains(&vertical) {
            candidates.push(vertical);
        }
        for &other in remaining.iter().skip(1) {
            if !candidates.contains(&other) {
                candidates.push(other);
            }
        }
        for p in candidates {
            let Some(host) = find_host(layout, dead_anc, q, p) else {
                continue;
            };
            let next: Vec<QubitId> = remaining
                .iter()
                .copied()
                .filter(|&x| x != q && x != p)
                .collect();
            pairs.push((q, p, host));
            if backtrack(layout, dead_anc, d, &next, pairs) {
                return true;
            }
            pairs.pop();
        }
        false
    }
    let mut pairs = Vec::new();
    if !backtrack(layout, dead_anc, d, &qubits, &mut pairs) {
        return None;
    }
    let mut prims: Vec<GaugePrimitive> = pairs
        .into_iter()
        .map(|(a, b, host)| GaugePrimitive { qubits: vec![a, b], host })
        .collect();
    prims.sort_by_key(|p| pair_sort_key(&p.qubits));
    Some(prims)
}

/// Builds the effective seam family for an adapted merge.
pub fn build_seam_family(
    layout: &MergeLayout,
    adapted: &AdaptOutcome,
    defects: &DefectInstance,
    toggles: MethodToggles,
) -> SeamFamily {
    let dead_anc: BTreeSet<CheckId> = defects.defective_ancillas.iter().copied().collect();
    let n = layout.n_qubits();

    // Broken windows grouped by connected clusters.
    let mut window_clusters: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for (i, status) in adapted.seam_status.iter().enumerate() {
        if let SeamStatus::Broken { .. } = status {
            let clusters: BTreeSet<usize> = layout.seam_checks[i]
                .support
                .iter()
                .filter_map(|q| adapted.clusters.iter().position(|cl| cl.contains(q)))
                .collect();
            window_clusters.insert(i + 1, clusters);
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    {
        let keys: Vec<usize> = window_clusters.keys().copied().collect();
        let mut seen: BTreeSet<usize> = BTreeSet::new();
        for &w in &keys {
            if seen.contains(&w) {
                continue;
            }
            let mut group = vec![w];
            let mut frontier = vec![w];
            seen.insert(w);
            while let Some(cur) = frontier.pop() {
                let cur_clusters = window_clusters[&cur].clone();
                for &other in &keys {
                    if !seen.contains(&other) && !window_clusters[&other].is_disjoint(&cur_clusters)
                    {
                        seen.insert(other);
                        group.push(other);
                        frontier.push(other);
                    }
                }
            }
            group.sort_unstable();
            groups.push(group);
        }
    }

    let mut rejections = Vec::new();
    let mut dropped = Vec::new();
    let mut fused_by_first_window: BTreeMap<usize, SeamRow> = BTreeMap::new();

    for group in &groups {
        if !toggles.fused {
            dropped.extend(group.iter().copied());
            continue;
        }
        match fuse_group(layout, adapted, &dead_anc, group, &mut rejections) {
            Some(row) => {
                fused_by_first_window.insert(group[0], row);
            }
            None => dropped.extend(group.iter().copied()),
        }
    }

    // Assemble rows in window order.
    let mut rows: Vec<SeamRow> = Vec::new();
    for (i, status) in adapted.seam_status.iter().enumerate() {
        let k = i + 1;
        match status {
            SeamStatus::Intact => rows.push(SeamRow {
                support: layout.support_vec(&layout.seam_checks[i].support),
                provenance: SeamProvenance::Native { seam_index: k },
                gauges: Vec::new(),
            }),
            SeamStatus::Inferred(rep) => {
                let mut gauges = Vec::new();
                let mut ok = true;
                for half in &rep.halves {
                    match find_host(layout, &dead_anc, half[0], *half.last().unwrap()) {
                        Some(host) => gauges.push(GaugePrimitive {
                            qubits: half.clone(),
                            host,
                        }),
                        None => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    gauges.sort_by_key(|p| pair_sort_key(&p.qubits));
                    rows.push(SeamRow {
                        support: layout.support_vec(&layout.seam_checks[i].support),
                        provenance: SeamProvenance::Inferred {
                            seam_index: k,
                            orientation: rep.orientation,
                        },
                        gauges,
                    });
                } else {
                    dropped.push(k);
                }
            }
            SeamStatus::Broken { .. } => {
                if let Some(row) = fused_by_first_window.remove(&k) {
                    rows.push(row);
                }
            }
            SeamStatus::Unrecoverable { .. } => dropped.push(k),
        }
    }

    // Raw labels in row order: native bits keep their seam name, gauge bits
    // are numbered globally in order of appearance.
    let mut raw_labels: Vec<RawLabel> = Vec::new();
    let mut gauge_counter = 0usize;
    for (ri, row) in rows.iter().enumerate() {
        match &row.provenance {
            SeamProvenance::Native { seam_index } => raw_labels.push(RawLabel {
                name: format!("e{seam_index}"),
                row: ri,
                support: row.support.clone(),
            }),
            _ => {
                for g in &row.gauges {
                    gauge_counter += 1;
                    raw_labels.push(RawLabel {
                        name: format!("g{gauge_counter}"),
                        row: ri,
                        support: layout.support_vec(&g.qubits),
                    });
                }
            }
        }
    }
    let inference = assemble_inference_map(&rows, &raw_labels);
    debug_assert!(inference_consistent(&rows, &raw_labels, &inference, n));

    dropped.sort_unstable();
    dropped.dedup();
    SeamFamily {
        rows,
        raw_labels,
        inference,
        rejections,
        dropped_windows: dropped,
    }
}

/// One inference row per seam row, selecting exactly the raw labels whose
/// product realizes it. Native rows map to unit vectors.
pub fn assemble_inference_map(rows: &[SeamRow], raw_labels: &[RawLabel]) -> BitMatrix {
    let mut m = BitMatrix::new(raw_labels.len());
    for ri in 0..rows.len() {
        let mut row = BitVec::zeros(raw_labels.len());
        for (li, label) in raw_labels.iter().enumerate() {
            if label.row == ri {
                row.set(li, true);
            }
        }
        m.push_row(row);
    }
    m
}

fn inference_consistent(
    rows: &[SeamRow],
    raw_labels: &[RawLabel],
    inference: &BitMatrix,
    n: usize,
) -> bool {
    for (ri, row) in rows.iter().enumerate() {
        let mut acc = BitVec::zeros(n);
        for li in inference.row(ri).iter_ones() {
            acc.xor_assign(&raw_labels[li].support);
        }
        if acc != row.support {
            return false;
        }
    }
    true
}

/// Subset combinations of 0..n, size ascending then lexicographic.
fn combinations(n: usize, size: usize) -> Vec<Vec<usize>> {
    if size > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..size).collect();
    loop {
        out.push(cur.clone());
        // Advance.
        let mut i = size;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - size + i {
                cur[i] += 1;
                for j in i + 1..size {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn fuse_group(
    layout: &MergeLayout,
    adapted: &AdaptOutcome,
    dead_anc: &BTreeSet<CheckId>,
    group: &[usize],
    rejections: &mut Vec<RejectedCandidate>,
) -> Option<SeamRow> {
    let n = layout.n_qubits();
    let mut base = BitVec::zeros(n);
    for &k in group {
        base.xor_assign(&layout.support_vec(&layout.seam_checks[k - 1].support));
    }
    // Correction pool: damaged same-type rows touching the group's clusters.
    let group_qubits: BTreeSet<QubitId> = group
        .iter()
        .flat_map(|&k| layout.seam_checks[k - 1].support.iter().copied())
        .filter(|q| adapted.dead.get(layout.col_of(*q)))
        .flat_map(|q| {
            adapted
                .clusters
                .iter()
                .find(|cl| cl.contains(&q))
                .into_iter()
                .flatten()
                .copied()
        })
        .collect();
    let pool: Vec<CheckId> = adapted
        .damaged_same
        .iter()
        .copied()
        .filter(|id| {
            layout
                .check(id)
                .is_some_and(|c| c.support.iter().any(|q| group_qubits.contains(q)))
        })
        .collect();
    let pool_vecs: Vec<BitVec> = pool
        .iter()
        .map(|id| layout.support_vec(&layout.check(id).unwrap().support))
        .collect();

    let max_extra = 8usize.saturating_sub(group.len()).min(pool.len());
    for size in 0..=max_extra {
        for combo in combinations(pool.len(), size) {
            let mut candidate = base.clone();
            for &i in &combo {
                candidate.xor_assign(&pool_vecs[i]);
            }
            let corrections: Vec<CheckId> = combo.iter().map(|&i| pool[i]).collect();
            if let Some(row) = try_candidate(
                layout,
                adapted,
                dead_anc,
                group,
                &corrections,
                candidate,
                rejections,
            ) {
                return Some(row);
            }
        }
    }
    None
}

fn try_candidate(
    layout: &MergeLayout,
    adapted: &AdaptOutcome,
    dead_anc: &BTreeSet<CheckId>,
    group: &[usize],
    corrections: &[CheckId],
    candidate: BitVec,
    rejections: &mut Vec<RejectedCandidate>,
) -> Option<SeamRow> {
    let mut reject = |reason| {
        rejections.push(RejectedCandidate {
            windows: group.to_vec(),
            corrections: corrections.to_vec(),
            reason,
        });
    };
    if candidate.is_zero() {
        reject(RejectReason::SupportDirty);
        return None;
    }
    let mut cleaned = candidate.clone();
    cleaned.and_not_assign(&adapted.dead);
    if cleaned != candidate {
        reject(RejectReason::SupportDirty);
        return None;
    }
    // Source admissibility: a gauge decomposition with live hosts must exist.
    let Some(gauges) = decompose_to_gauges(layout, dead_anc, &candidate) else {
        reject(RejectReason::SourceInadmissible);
        return None;
    };
    // Even overlap with every retained opposite-type constraint.
    if adapted
        .merged_opp_rows
        .iter()
        .any(|opp| candidate.overlap_parity(&opp.support))
    {
        reject(RejectReason::OppAnticommute);
        return None;
    }
    Some(SeamRow {
        support: candidate,
        provenance: SeamProvenance::Fused {
            windows: group.to_vec(),
            corrections: corrections.to_vec(),
        },
        gauges,
    })
}
