//! Defect-adapted patch construction.
//!
//! Turns a merge layout plus a defect instance into the retained constraint
//! structure the rest of the pipeline runs on: disabled checks, cluster-reduced
//! opposite-type super-stabilizers, Strategy-B fragment absorptions, and
//! ancilla-repurposing orientations for defective seam checks.
//!
//! Two views are maintained. The merged view (facing boundary halves fused
//! into weight-4 seam rows) carries the opposite-type constraints that seam
//! candidates are validated against. The per-patch view (separated
//! inventories) carries the same-type rows inherited by H_sep and the
//! opposite-type rows the effective-distance graph is built from.

use crate::defects::DefectInstance;
use crate::gf2::BitVec;
use crate::lattice::{CheckDef, CheckId, CheckKind, MergeLayout, PatchId, Pauli, QubitId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AdaptError {
    #[error("patch failure: {0}")]
    PatchFailure(String),
    #[error("instance does not match layout: {0}")]
    InstanceMismatch(String),
}

/// The three method components, individually toggleable. The standard preset
/// turns all of them off; the proposed preset turns all of them on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodToggles {
    /// Fused seam-super-check reconstruction for broken seam windows.
    pub fused: bool,
    /// Boundary fragment absorption into an adjacent interior plaquette.
    pub strategy_b: bool,
    /// Distance-preserving (horizontal) repurposing orientation preference.
    pub orient: bool,
    /// Probe B column 1 (the literal reading) instead of column 3.
    pub probe_literal: bool,
}

impl MethodToggles {
    pub fn standard() -> Self {
        MethodToggles {
            fused: false,
            strategy_b: false,
            orient: false,
            probe_literal: false,
        }
    }

    pub fn proposed() -> Self {
        MethodToggles {
            fused: true,
            strategy_b: true,
            orient: true,
            probe_literal: false,
        }
    }

    pub fn method_name(&self) -> &'static str {
        if *self == MethodToggles::standard() {
            "standard"
        } else if *self == MethodToggles::proposed() {
            "proposed"
        } else {
            "custom"
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowKind {
    /// Intact native check.
    Active,
    /// Exact GF(2) product of two or more damaged checks.
    Super,
    /// Product with residual defective qubits deleted (boundary reduction).
    Reduced,
    /// Interior plaquette carrying an absorbed boundary fragment.
    Enlarged,
    /// Product of checks promoted to gauges by an ancilla repurposing.
    InducedSuper,
}

/// One retained stabilizer-level constraint row.
#[derive(Clone, Debug)]
pub struct RetainedRow {
    pub support: BitVec,
    pub pauli: Pauli,
    pub kind: RowKind,
    pub constituents: Vec<CheckId>,
    /// Whether defective qubits were deleted from the raw product.
    pub deleted: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Horizontal,
    Vertical,
}

/// Reconstruction of one ancilla-defective seam check.
#[derive(Clone, Debug)]
pub struct Repurposing {
    pub seam_index: usize,
    pub orientation: Orientation,
    /// Same-type gauge halves whose product equals the lost seam support.
    pub halves: Vec<Vec<QubitId>>,
    /// Opposite-type rows promoted to gauges.
    pub promoted: Vec<CheckId>,
    /// Product of the promoted rows, when more than one exists.
    pub induced_super: Option<BitVec>,
}

#[derive(Clone, Debug)]
pub enum SeamStatus {
    Intact,
    /// Ancilla defective, support intact: value inferred from gauge halves.
    Inferred(Repurposing),
    /// Support hits defective data; candidate for fusion.
    Broken { cluster: usize },
    /// Neither orientation feasible; the check is lost.
    Unrecoverable { reason: String },
}

/// Strategy-B absorption record.
#[derive(Clone, Debug)]
pub struct Absorption {
    pub half: CheckId,
    pub plaquette: CheckId,
    pub fragment: QubitId,
}

#[derive(Clone, Debug)]
pub struct PatchAdaptation {
    pub patch: PatchId,
    /// Merge-type rows of the separated adapted patch (feeds H_sep).
    pub same_rows: Vec<RetainedRow>,
    /// Opposite-type rows (feeds the effective-distance graph).
    pub opp_rows: Vec<RetainedRow>,
    pub absorptions: Vec<Absorption>,
}

#[derive(Clone, Debug)]
pub struct AdaptOutcome {
    pub seam_pauli: Pauli,
    pub patch_a: PatchAdaptation,
    pub patch_b: PatchAdaptation,
    /// Opposite-type constraints of the merged configuration.
    pub merged_opp_rows: Vec<RetainedRow>,
    pub seam_status: Vec<SeamStatus>,
    /// Merged-view defect clusters.
    pub clusters: Vec<Vec<QubitId>>,
    /// Damaged merge-type patch rows; the fusion correction pool.
    pub damaged_same: Vec<CheckId>,
    /// Merged-view Strategy-B absorptions (the metrics count).
    pub absorptions: Vec<Absorption>,
    pub dead: BitVec,
}

impl AdaptOutcome {
    pub fn patch(&self, p: PatchId) -> &PatchAdaptation {
        match p {
            PatchId::A => &self.patch_a,
            PatchId::B => &self.patch_b,
        }
    }
}

struct Ctx<'a> {
    layout: &'a MergeLayout,
    dead: BitVec,
    dead_set: BTreeSet<QubitId>,
    dead_anc: BTreeSet<CheckId>,
    toggles: MethodToggles,
}

impl<'a> Ctx<'a> {
    fn is_damaged(&self, c: &CheckDef) -> bool {
        c.support.iter().any(|q| self.dead_set.contains(q))
    }

    fn ancilla_alive(&self, id: &CheckId) -> bool {
        !self.dead_anc.contains(id)
    }

    fn support_vec(&self, c: &CheckDef) -> BitVec {
        self.layout.support_vec(&c.support)
    }
}

/// Union-find clustering of defective qubits; adjacency = sharing a check in
/// the given inventory.
fn clusters_of(dead: &[QubitId], inventory: &[&CheckDef]) -> Vec<Vec<QubitId>> {
    let idx: BTreeMap<QubitId, usize> = dead.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut parent: Vec<usize> = (0..dead.len()).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for c in inventory {
        let members: Vec<usize> = c
            .support
            .iter()
            .filter_map(|q| idx.get(q).copied())
            .collect();
        for w in members.windows(2) {
            let (a, b) = (find(&mut parent, w[0]), find(&mut parent, w[1]));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<QubitId>> = BTreeMap::new();
    for (i, &q) in dead.iter().enumerate() {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(q);
    }
    groups.into_values().collect()
}

/// The unique interior opposite-type plaquette containing a qubit, if any.
fn interior_opp_plaquette(
    layout: &MergeLayout,
    q: QubitId,
    opp: Pauli,
) -> Option<&CheckDef> {
    layout
        .patch_checks_of(q.patch)
        .find(|c| c.kind == CheckKind::Interior && c.pauli == opp && c.support.contains(&q))
}

/// Strategy-B pass over the weight-2 opposite-type boundary halves of one
/// inventory. Eligible: exactly one defective qubit forming an isolated
/// cluster, with an undamaged live-ancilla interior plaquette through the
/// surviving qubit. Returns absorptions; each plaquette absorbs at most one
/// fragment.
fn strategy_b_pass(
    ctx: &Ctx,
    halves: &[&CheckDef],
    cluster_of_qubit: &BTreeMap<QubitId, usize>,
    clusters: &[Vec<QubitId>],
    skip: &BTreeSet<CheckId>,
    opp: Pauli,
) -> Vec<Absorption> {
    let mut used_plaquettes = BTreeSet::new();
    let mut out = Vec::new();
    if !ctx.toggles.strategy_b {
        return out;
    }
    for half in halves {
        if skip.contains(&half.id) || !ctx.ancilla_alive(&half.id) {
            continue;
        }
        let dead_in: Vec<QubitId> = half
            .support
            .iter()
            .copied()
            .filter(|q| ctx.dead_set.contains(q))
            .collect();
        if dead_in.len() != 1 {
            continue;
        }
        let q_dead = dead_in[0];
        let cluster = &clusters[cluster_of_qubit[&q_dead]];
        if cluster.len() != 1 {
            continue;
        }
        let q_live = *half
            .support
            .iter()
            .find(|&&q| q != q_dead)
            .expect("weight-2 half has a live qubit");
        let Some(p) = interior_opp_plaquette(ctx.layout, q_live, opp) else {
            continue;
        };
        if ctx.is_damaged(p) || !ctx.ancilla_alive(&p.id) || used_plaquettes.contains(&p.id) {
            continue;
        }
        used_plaquettes.insert(p.id);
        out.push(Absorption {
            half: half.id,
            plaquette: p.id,
            fragment: q_live,
        });
    }
    out
}

/// Cluster products: XOR of all damaged opposite-type rows touching each
/// cluster (minus absorbed halves), with residual defective qubits deleted.
fn cluster_products(
    ctx: &Ctx,
    inventory: &[&CheckDef],
    clusters: &[Vec<QubitId>],
    cluster_of_qubit: &BTreeMap<QubitId, usize>,
    pauli: Pauli,
    absorbed: &BTreeSet<CheckId>,
) -> Vec<RetainedRow> {
    let mut rows = Vec::new();
    for (ci, _members) in clusters.iter().enumerate() {
        let mut support = BitVec::zeros(ctx.layout.n_qubits());
        let mut constituents = Vec::new();
        for c in inventory {
            if c.pauli != pauli || !ctx.is_damaged(c) || absorbed.contains(&c.id) {
                continue;
            }
            let touches = c
                .support
                .iter()
                .any(|q| cluster_of_qubit.get(q) == Some(&ci));
            if touches {
                support.xor_assign(&ctx.support_vec(c));
                constituents.push(c.id);
            }
        }
        if constituents.is_empty() {
            continue;
        }
        let pre = support.clone();
        support.and_not_assign(&ctx.dead);
        let deleted = pre != support;
        if support.is_zero() {
            continue;
        }
        rows.push(RetainedRow {
            support,
            pauli,
            kind: if constituents.len() >= 2 {
                RowKind::Super
            } else {
                RowKind::Reduced
            },
            constituents,
            deleted,
        });
    }
    rows
}

/// Classifies the repurposing of one ancilla-defective non-terminal seam
/// check, returning the chosen orientation. `plain_active` must hold the
/// opposite-type rows still untouched by clusters and absorptions.
fn classify_repurposing(
    ctx: &Ctx,
    seam_index: usize,
    plain_active: &BTreeSet<CheckId>,
) -> Result<Repurposing, String> {
    let layout = ctx.layout;
    let d = layout.d;
    let opp = Pauli::Z; // pipeline frame is XX
    let k_max = d.div_ceil(2);
    if seam_index == k_max {
        // Terminal weight-2 check: reconstructed as a single cross-seam gauge
        // hosted by the adjacent merged seam row's site. No promotion.
        return Ok(Repurposing {
            seam_index,
            orientation: Orientation::Horizontal,
            halves: vec![vec![
                QubitId::new(PatchId::A, d, d),
                QubitId::new(PatchId::B, d, 1),
            ]],
            promoted: Vec::new(),
            induced_super: None,
        });
    }
    let r = 2 * seam_index - 1;
    let flank_a = CheckId::Patch { patch: PatchId::A, pauli: opp, row: r, col: d - 1 };
    let flank_b = CheckId::Patch { patch: PatchId::B, pauli: opp, row: r, col: 1 };

    let horizontal = || -> Result<Repurposing, String> {
        if r < 3 {
            return Err("no seam row above the top window".into());
        }
        let probe_col_b = if ctx.toggles.probe_literal { 1 } else { 3 };
        let probes = [
            QubitId::new(PatchId::A, r, d - 2),
            QubitId::new(PatchId::A, r + 1, d - 2),
            QubitId::new(PatchId::B, r, probe_col_b),
            QubitId::new(PatchId::B, r + 1, probe_col_b),
        ];
        if probes.iter().any(|q| ctx.dead_set.contains(q)) {
            return Err("probe qubit defective".into());
        }
        for id in [flank_a, flank_b] {
            let c = layout.check(&id).ok_or("flank plaquette missing")?;
            if ctx.is_damaged(c) || !ctx.ancilla_alive(&id) || !plain_active.contains(&id) {
                return Err(format!("flank {} unavailable", id.label()));
            }
        }
        for s in [r - 1, r + 1] {
            if !plain_active.contains(&CheckId::SeamOpp { index: s }) {
                return Err(format!("seam-opp row {s} unavailable as gauge host"));
            }
        }
        let promoted = vec![flank_a, flank_b];
        let mut induced = BitVec::zeros(layout.n_qubits());
        for id in &promoted {
            induced.xor_assign(&ctx.support_vec(layout.check(id).unwrap()));
        }
        Ok(Repurposing {
            seam_index,
            orientation: Orientation::Horizontal,
            halves: vec![
                vec![QubitId::new(PatchId::A, r, d), QubitId::new(PatchId::B, r, 1)],
                vec![
                    QubitId::new(PatchId::A, r + 1, d),
                    QubitId::new(PatchId::B, r + 1, 1),
                ],
            ],
            promoted,
            induced_super: Some(induced),
        })
    };

    let vertical = || -> Result<Repurposing, String> {
        for id in [flank_a, flank_b] {
            if !ctx.ancilla_alive(&id) {
                return Err(format!("gauge host {} defective", id.label()));
            }
        }
        let mut promoted = Vec::new();
        for s in [r.checked_sub(1), Some(r + 1)] {
            let Some(s) = s else { continue };
            if s < 2 || s > d - 1 {
                continue;
            }
            let id = CheckId::SeamOpp { index: s };
            if !plain_active.contains(&id) {
                return Err(format!("seam-opp row {s} unavailable for promotion"));
            }
            promoted.push(id);
        }
        let induced = if promoted.len() >= 2 {
            let mut v = BitVec::zeros(layout.n_qubits());
            for id in &promoted {
                v.xor_assign(&ctx.support_vec(layout.check(id).unwrap()));
            }
            Some(v)
        } else {
            None
        };
        Ok(Repurposing {
            seam_index,
            orientation: Orientation::Vertical,
            halves: vec![
                vec![QubitId::new(PatchId::A, r, d), QubitId::new(PatchId::A, r + 1, d)],
                vec![QubitId::new(PatchId::B, r, 1), QubitId::new(PatchId::B, r + 1, 1)],
            ],
            promoted,
            induced_super: induced,
        })
    };

    if ctx.toggles.orient {
        if let Ok(r) = horizontal() { return Ok(r) }
    }
    vertical().map_err(|e| format!("vertical orientation infeasible: {e}"))
}

/// Adapts both patches and the merged configuration to a defect instance.
///
/// The layout must be in the XX frame; ZZ requests are transposed by the
/// harness before reaching this point.
pub fn adapt_patches(
    layout: &MergeLayout,
    defects: &DefectInstance,
    toggles: MethodToggles,
) -> Result<AdaptOutcome, AdaptError> {
    if defects.d != layout.d {
        return Err(AdaptError::InstanceMismatch(format!(
            "instance d={} vs layout d={}",
            defects.d, layout.d
        )));
    }
    for q in &defects.defective_data {
        if q.row < 1 || q.row > layout.d || q.col < 1 || q.col > layout.d {
            return Err(AdaptError::InstanceMismatch(format!(
                "defective qubit {} out of range",
                q.label(layout.d)
            )));
        }
    }
    let dead_set: BTreeSet<QubitId> = defects.defective_data.iter().copied().collect();
    let dead = BitVec::from_indices(
        layout.n_qubits(),
        dead_set.iter().map(|&q| layout.col_of(q)),
    );
    let ctx = Ctx {
        layout,
        dead,
        dead_set,
        dead_anc: defects.defective_ancillas.iter().copied().collect(),
        toggles,
    };
    let opp = Pauli::Z;
    let same = Pauli::X;

    // ---- merged view ----
    let merged: Vec<&CheckDef> = layout.merged_checks().collect();
    let dead_list: Vec<QubitId> = ctx.dead_set.iter().copied().collect();
    let clusters = clusters_of(&dead_list, &merged);
    let mut cluster_of_qubit = BTreeMap::new();
    for (ci, members) in clusters.iter().enumerate() {
        for &q in members {
            cluster_of_qubit.insert(q, ci);
        }
    }

    let merged_opp_halves: Vec<&CheckDef> = merged
        .iter()
        .copied()
        .filter(|c| c.pauli == opp && c.kind == CheckKind::Boundary)
        .collect();
    let merged_absorptions = strategy_b_pass(
        &ctx,
        &merged_opp_halves,
        &cluster_of_qubit,
        &clusters,
        &BTreeSet::new(),
        opp,
    );
    let absorbed_ids: BTreeSet<CheckId> = merged_absorptions.iter().map(|a| a.half).collect();
    let enlarged_ids: BTreeMap<CheckId, QubitId> = merged_absorptions
        .iter()
        .map(|a| (a.plaquette, a.fragment))
        .collect();

    let merged_supers = cluster_products(
        &ctx,
        &merged,
        &clusters,
        &cluster_of_qubit,
        opp,
        &absorbed_ids,
    );

    // Plain-active opposite rows: undamaged, live ancilla, untouched by
    // absorption; enlarged plaquettes stay measurable and remain eligible
    // hosts, but are tracked under their own kind.
    let mut merged_opp_rows: Vec<RetainedRow> = Vec::new();
    let mut plain_active: BTreeSet<CheckId> = BTreeSet::new();
    for c in merged.iter().filter(|c| c.pauli == opp) {
        if ctx.is_damaged(c) || !ctx.ancilla_alive(&c.id) || absorbed_ids.contains(&c.id) {
            continue;
        }
        if let Some(&fragment) = enlarged_ids.get(&c.id) {
            debug_assert!(c.support.contains(&fragment));
            merged_opp_rows.push(RetainedRow {
                support: ctx.support_vec(c),
                pauli: opp,
                kind: RowKind::Enlarged,
                constituents: vec![c.id],
                deleted: false,
            });
        } else {
            plain_active.insert(c.id);
            merged_opp_rows.push(RetainedRow {
                support: ctx.support_vec(c),
                pauli: opp,
                kind: RowKind::Active,
                constituents: vec![c.id],
                deleted: false,
            });
        }
    }
    merged_opp_rows.extend(merged_supers);

    // ---- seam status and repurposings ----
    let mut seam_status = Vec::new();
    let mut all_promoted: BTreeSet<CheckId> = BTreeSet::new();
    let mut repurposings: Vec<Repurposing> = Vec::new();
    for check in &layout.seam_checks {
        let CheckId::Seam { index } = check.id else { unreachable!() };
        if ctx.is_damaged(check) {
            let ci = check
                .support
                .iter()
                .find_map(|q| cluster_of_qubit.get(q))
                .copied()
                .expect("damaged seam check touches a cluster");
            seam_status.push(SeamStatus::Broken { cluster: ci });
            continue;
        }
        if ctx.ancilla_alive(&check.id) {
            seam_status.push(SeamStatus::Intact);
            continue;
        }
        match classify_repurposing(&ctx, index, &plain_active) {
            Ok(rep) => {
                for id in &rep.promoted {
                    plain_active.remove(id);
                    all_promoted.insert(*id);
                }
                // Replace promoted rows by their product.
                merged_opp_rows.retain(|r| {
                    !(r.kind == RowKind::Active && rep.promoted.contains(&r.constituents[0]))
                });
                if let Some(sup) = &rep.induced_super {
                    merged_opp_rows.push(RetainedRow {
                        support: sup.clone(),
                        pauli: opp,
                        kind: RowKind::InducedSuper,
                        constituents: rep.promoted.clone(),
                        deleted: false,
                    });
                }
                repurposings.push(rep.clone());
                seam_status.push(SeamStatus::Inferred(rep));
            }
            Err(reason) => {
                seam_status.push(SeamStatus::Unrecoverable { reason });
            }
        }
    }

    // ---- per-patch view ----
    let mut patches = Vec::new();
    for patch in [PatchId::A, PatchId::B] {
        patches.push(adapt_single_patch(
            &ctx,
            patch,
            same,
            opp,
            &repurposings,
            &merged_opp_rows,
        ));
    }
    let patch_b = patches.pop().unwrap();
    let patch_a = patches.pop().unwrap();

    // Fusion pool: damaged merge-type patch rows.
    let damaged_same: Vec<CheckId> = layout
        .patch_checks
        .iter()
        .filter(|c| c.pauli == same && ctx.is_damaged(c))
        .map(|c| c.id)
        .collect();

    Ok(AdaptOutcome {
        seam_pauli: same,
        patch_a,
        patch_b,
        merged_opp_rows,
        seam_status,
        clusters,
        damaged_same,
        absorptions: merged_absorptions,
        dead: ctx.dead.clone(),
    })
}

fn adapt_single_patch(
    ctx: &Ctx,
    patch: PatchId,
    same: Pauli,
    opp: Pauli,
    repurposings: &[Repurposing],
    merged_opp_rows: &[RetainedRow],
) -> PatchAdaptation {
    let layout = ctx.layout;
    let d = layout.d;
    let inventory: Vec<&CheckDef> = layout.patch_checks_of(patch).collect();
    let dead_here: Vec<QubitId> = ctx
        .dead_set
        .iter()
        .copied()
        .filter(|q| q.patch == patch)
        .collect();
    let clusters = clusters_of(&dead_here, &inventory);
    let mut cluster_of_qubit = BTreeMap::new();
    for (ci, members) in clusters.iter().enumerate() {
        for &q in members {
            cluster_of_qubit.insert(q, ci);
        }
    }

    // Per-patch promotions induced by vertical/horizontal repurposings,
    // restricted to this patch's separated rows.
    let mut promoted_here: Vec<CheckId> = Vec::new();
    let mut promotion_products: Vec<RetainedRow> = Vec::new();
    for rep in repurposings {
        let r = 2 * rep.seam_index - 1;
        match rep.orientation {
            Orientation::Horizontal => {
                if rep.promoted.is_empty() {
                    continue; // terminal direct reconstruction
                }
                let flank = match patch {
                    PatchId::A => CheckId::Patch { patch, pauli: opp, row: r, col: d - 1 },
                    PatchId::B => CheckId::Patch { patch, pauli: opp, row: r, col: 1 },
                };
                promoted_here.push(flank);
            }
            Orientation::Vertical => {
                let col_marker = match patch {
                    PatchId::A => d,
                    PatchId::B => 0,
                };
                let mut ids = Vec::new();
                for s in [r.checked_sub(1), Some(r + 1)] {
                    let Some(s) = s else { continue };
                    if s < 2 || s > d - 1 {
                        continue;
                    }
                    ids.push(CheckId::Patch { patch, pauli: opp, row: s, col: col_marker });
                }
                if ids.len() >= 2 {
                    let mut sup = BitVec::zeros(layout.n_qubits());
                    for id in &ids {
                        sup.xor_assign(&ctx.support_vec(layout.check(id).expect("half exists")));
                    }
                    promotion_products.push(RetainedRow {
                        support: sup,
                        pauli: opp,
                        kind: RowKind::InducedSuper,
                        constituents: ids.clone(),
                        deleted: false,
                    });
                }
                promoted_here.extend(ids);
            }
        }
    }
    let promoted_set: BTreeSet<CheckId> = promoted_here.iter().copied().collect();

    let opp_halves: Vec<&CheckDef> = inventory
        .iter()
        .copied()
        .filter(|c| c.pauli == opp && c.kind == CheckKind::Boundary)
        .collect();
    let absorptions = strategy_b_pass(
        ctx,
        &opp_halves,
        &cluster_of_qubit,
        &clusters,
        &promoted_set,
        opp,
    );
    let absorbed_ids: BTreeSet<CheckId> = absorptions.iter().map(|a| a.half).collect();
    let enlarged_ids: BTreeMap<CheckId, QubitId> = absorptions
        .iter()
        .map(|a| (a.plaquette, a.fragment))
        .collect();

    let mut opp_rows: Vec<RetainedRow> = Vec::new();
    for c in inventory.iter().filter(|c| c.pauli == opp) {
        if ctx.is_damaged(c)
            || !ctx.ancilla_alive(&c.id)
            || absorbed_ids.contains(&c.id)
            || promoted_set.contains(&c.id)
        {
            continue;
        }
        opp_rows.push(RetainedRow {
            support: ctx.support_vec(c),
            pauli: opp,
            kind: if enlarged_ids.contains_key(&c.id) {
                RowKind::Enlarged
            } else {
                RowKind::Active
            },
            constituents: vec![c.id],
            deleted: false,
        });
    }
    opp_rows.extend(cluster_products(
        ctx,
        &inventory,
        &clusters,
        &cluster_of_qubit,
        opp,
        &absorbed_ids,
    ));
    opp_rows.extend(promotion_products);

    let mut same_rows: Vec<RetainedRow> = Vec::new();
    for c in inventory.iter().filter(|c| c.pauli == same) {
        if ctx.is_damaged(c) || !ctx.ancilla_alive(&c.id) {
            continue;
        }
        same_rows.push(RetainedRow {
            support: ctx.support_vec(c),
            pauli: same,
            kind: RowKind::Active,
            constituents: vec![c.id],
            deleted: false,
        });
    }
    same_rows.extend(cluster_products(
        ctx,
        &inventory,
        &clusters,
        &cluster_of_qubit,
        same,
        &BTreeSet::new(),
    ));

    // Commutation filter: a same-type row that went through deletion may
    // anticommute with a retained opposite row; such reductions are dropped
    // (opposite rows are load-bearing for admissibility and distance).
    same_rows.retain(|s| {
        if !s.deleted {
            return true;
        }
        let ok_patch = opp_rows.iter().all(|o| !s.support.overlap_parity(&o.support));
        let ok_merged = merged_opp_rows
            .iter()
            .all(|o| !s.support.overlap_parity(&o.support));
        ok_patch && ok_merged
    });
    // Deleted opposite rows that anticommute with accepted gauge halves are
    // gauge-promoted by the measurement schedule; remove them.
    let half_vecs: Vec<BitVec> = repurposings
        .iter()
        .flat_map(|rep| rep.halves.iter())
        .map(|h| layout.support_vec(h))
        .collect();
    opp_rows.retain(|o| {
        if !o.deleted {
            return true;
        }
        half_vecs.iter().all(|h| !o.support.overlap_parity(h))
    });

    PatchAdaptation {
        patch,
        same_rows,
        opp_rows,
        absorptions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::defects::DefectInstance;
    use crate::lattice::{build_layout, MergeType};

    fn q(patch: PatchId, r: usize, c: usize) -> QubitId {
        QubitId::new(patch, r, c)
    }

    fn appendix_instance() -> DefectInstance {
        DefectInstance::from_labels(7, MergeType::Xx, &["A47", "A57", "B41"], &[]).unwrap()
    }

    fn support_labels(layout: &MergeLayout, v: &BitVec) -> Vec<String> {
        v.iter_ones()
            .map(|c| layout.qubit_at(c).label(layout.d))
            .collect()
    }

    #[test]
    fn defect_free_instance_is_a_no_op() {
        let layout = build_layout(7, MergeType::Xx).unwrap();
        let inst = DefectInstance::defect_free(7, MergeType::Xx);
        let out = adapt_patches(&layout, &inst, MethodToggles::proposed()).unwrap();
        assert!(out.clusters.is_empty());
        assert!(out.absorptions.is_empty());
        assert!(out.seam_status.iter().all(|s| matches!(s, SeamStatus::Intact)));
        assert!(out
            .merged_opp_rows
            .iter()
            .all(|r| r.kind == RowKind::Active));
        let n_active_same = out.patch_a.same_rows.len();
        assert_eq!(n_active_same, (7 * 7 - 1) / 2);
    }

    #[test]
    fn appendix_cluster_produces_the_reduced_super_stabilizer() {
        let layout = build_layout(7, MergeType::Xx).unwrap();
        let out = adapt_patches(&layout, &appendix_instance(), MethodToggles::proposed()).unwrap();
        assert_eq!(out.clusters.len(), 1);
        assert_eq!(out.clusters[0].len(), 3);
        let supers: Vec<&RetainedRow> = out
            .merged_opp_rows
            .iter()
            .filter(|r| r.kind == RowKind::Super)
            .collect();
        assert_eq!(supers.len(), 1, "exactly one merged cluster super");
        let mut got = support_labels(&layout, &supers[0].support);
        got.sort();
        let mut want = vec![
            "A36", "A37", "A46", "A56", "A66", "A67", "B32", "B31", "B42", "B51",
        ];
        want.sort();
        assert_eq!(got, want);
        assert!(!supers[0].deleted, "the worked-example product cancels exactly");
    }

    #[test]
    fn appendix_seam_status_marks_windows_two_and_three_broken() {
        let layout = build_layout(7, MergeType::Xx).unwrap();
        let out = adapt_patches(&layout, &appendix_instance(), MethodToggles::proposed()).unwrap();
        assert!(matches!(out.seam_status[0], SeamStatus::Intact));
        assert!(matches!(out.seam_status[1], SeamStatus::Broken { .. }));
        assert!(matches!(out.seam_status[2], SeamStatus::Broken { .. }));
        assert!(matches!(out.seam_status[3], SeamStatus::Intact));
        // x_A and x_B are in the fusion pool.
        assert!(out.damaged_same.contains(&CheckId::Patch {
            patch: PatchId::A,
            pauli: Pauli::X,
            row: 4,
            col: 6
        }));
        assert!(out.damaged_same.contains(&CheckId::Patch {
            patch: PatchId::B,
            pauli: Pauli::X,
            row: 4,
            col: 1
        }));
    }

    #[test]
    fn commutation_invariant_on_random_instances() {
        // Every retained merge-type row overlaps every retained opposite row
        // evenly, in both views.
        let layout = build_layout(9, MergeType::Xx).unwrap();
        for seed in 0..150u64 {
            let inst = crate::defects::sample_instance(&layout, 0.02, 0.02, seed).unwrap();
            for toggles in [MethodToggles::standard(), MethodToggles::proposed()] {
                let Ok(out) = adapt_patches(&layout, &inst, toggles) else {
                    continue;
                };
                for pa in [&out.patch_a, &out.patch_b] {
                    for s in &pa.same_rows {
                        for o in pa.opp_rows.iter().chain(out.merged_opp_rows.iter()) {
                            assert!(
                                !s.support.overlap_parity(&o.support),
                                "seed {seed}: same row {:?} anticommutes with {:?}",
                                s.constituents,
                                o.constituents
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn no_retained_row_touches_a_defective_qubit() {
        let layout = build_layout(9, MergeType::Xx).unwrap();
        for seed in 200..320u64 {
            let inst = crate::defects::sample_instance(&layout, 0.02, 0.02, seed).unwrap();
            let Ok(out) = adapt_patches(&layout, &inst, MethodToggles::proposed()) else {
                continue;
            };
            let all = out
                .merged_opp_rows
                .iter()
                .chain(out.patch_a.same_rows.iter())
                .chain(out.patch_a.opp_rows.iter())
                .chain(out.patch_b.same_rows.iter())
                .chain(out.patch_b.opp_rows.iter());
            for row in all {
                let mut v = row.support.clone();
                v.and_not_assign(&out.dead);
                assert_eq!(v, row.support, "row touches defective qubit");
            }
        }
    }

    #[test]
    fn isolated_ancilla_defect_orientations() {
        let layout = build_layout(7, MergeType::Xx).unwrap();
        let inst = DefectInstance::from_labels(7, MergeType::Xx, &[], &["seam:2"]).unwrap();
        // Proposed toggles: horizontal selected, flanks promoted.
        let out = adapt_patches(&layout, &inst, MethodToggles::proposed()).unwrap();
        let SeamStatus::Inferred(rep) = &out.seam_status[1] else {
            panic!("expected inferred row");
        };
        assert_eq!(rep.orientation, Orientation::Horizontal);
        assert_eq!(rep.halves.len(), 2);
        assert_eq!(rep.halves[0], vec![q(PatchId::A, 3, 7), q(PatchId::B, 3, 1)]);
        let induced = rep.induced_super.as_ref().unwrap();
        assert_eq!(induced.weight(), 8);
        // Standard toggles: vertical always.
        let out = adapt_patches(&layout, &inst, MethodToggles::standard()).unwrap();
        let SeamStatus::Inferred(rep) = &out.seam_status[1] else {
            panic!("expected inferred row");
        };
        assert_eq!(rep.orientation, Orientation::Vertical);
        assert_eq!(rep.halves[0], vec![q(PatchId::A, 3, 7), q(PatchId::A, 4, 7)]);
        assert_eq!(rep.halves[1], vec![q(PatchId::B, 3, 1), q(PatchId::B, 4, 1)]);
        assert_eq!(rep.induced_super.as_ref().unwrap().weight(), 8);
    }

    #[test]
    fn gauge_half_products_equal_the_lost_support() {
        let layout = build_layout(7, MergeType::Xx).unwrap();
        for k in 1..=4usize {
            let inst =
                DefectInstance::from_labels(7, MergeType::Xx, &[], &[&format!("seam:{k}")]).unwrap();
            for toggles in [MethodToggles::standard(), MethodToggles::proposed()] {
                let out = adapt_patches(&layout, &inst, toggles).unwrap();
                let SeamStatus::Inferred(rep) = &out.seam_status[k - 1] else {
                    panic!("seam {k} should be inferred");
                };
                let mut product = BitVec::zeros(layout.n_qubits());
                for h in &rep.halves {
                    product.xor_assign(&layout.support_vec(h));
                }
                let native = layout.support_vec(&layout.seam_checks[k - 1].support);
                assert_eq!(product, native, "seam {k} halves product mismatch");
            }
        }
    }

    #[test]
    fn terminal_seam_check_reconstructs_directly() {
        let layout = build_layout(7, MergeType::Xx).unwrap();
        let inst = DefectInstance::from_labels(7, MergeType::Xx, &[], &["seam:4"]).unwrap();
        let out = adapt_patches(&layout, &inst, MethodToggles::standard()).unwrap();
        let SeamStatus::Inferred(rep) = &out.seam_status[3] else {
            panic!("expected inferred row");
        };
        assert_eq!(rep.halves.len(), 1);
        assert!(rep.promoted.is_empty());
        assert!(rep.induced_super.is_none());
    }

    #[test]
    fn strategy_b_fires_on_isolated_boundary_fragment() {
        // Outer-edge defect A31 at d=7: the left half {A31,A41} loses A31; the
        // fragment A41 is absorbed into the interior plaquette through it.
        let layout = build_layout(7, MergeType::Xx).unwrap();
        let inst = DefectInstance::from_labels(7, MergeType::Xx, &["A31"], &[]).unwrap();
        let out = adapt_patches(&layout, &inst, MethodToggles::proposed()).unwrap();
        assert_eq!(out.absorptions.len(), 1);
        let a = &out.absorptions[0];
        assert_eq!(a.half, CheckId::Patch { patch: PatchId::A, pauli: Pauli::Z, row: 3, col: 0 });
        assert_eq!(a.fragment, q(PatchId::A, 4, 1));
        assert_eq!(
            a.plaquette,
            CheckId::Patch { patch: PatchId::A, pauli: Pauli::Z, row: 4, col: 1 }
        );
        // Standard: no absorption, one cluster super instead.
        let out_std = adapt_patches(&layout, &inst, MethodToggles::standard()).unwrap();
        assert!(out_std.absorptions.is_empty());
        assert!(out_std
            .merged_opp_rows
            .iter()
            .any(|r| r.kind == RowKind::Super));
    }

    #[test]
    fn appendix_instance_has_no_merged_absorption() {
        // B41's cluster has size 3, so z_B^bd stays in the cluster product and
        // the worked example's reduced super-stabilizer is preserved verbatim.
        let layout = build_layout(7, MergeType::Xx).unwrap();
        let out = adapt_patches(&layout, &appendix_instance(), MethodToggles::proposed()).unwrap();
        assert!(out.absorptions.is_empty());
    }

    #[test]
    fn toggle_monotonicity_of_live_seam_resources() {
        // Proposed never loses a seam row that standard keeps.
        let layout = build_layout(9, MergeType::Xx).unwrap();
        for seed in 400..520u64 {
            let inst = crate::defects::sample_instance(&layout, 0.02, 0.02, seed).unwrap();
            let std = adapt_patches(&layout, &inst, MethodToggles::standard()).unwrap();
            let prop = adapt_patches(&layout, &inst, MethodToggles::proposed()).unwrap();
            for (s, p) in std.seam_status.iter().zip(prop.seam_status.iter()) {
                let std_live = matches!(s, SeamStatus::Intact | SeamStatus::Inferred(_));
                let prop_live = matches!(p, SeamStatus::Intact | SeamStatus::Inferred(_));
                assert!(
                    !std_live || prop_live,
                    "seed {seed}: standard keeps a row proposed loses"
                );
            }
        }
    }
}
