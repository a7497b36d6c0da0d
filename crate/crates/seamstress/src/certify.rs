//! Certified seam-parity synthesis.
//!
//! Assembles the effective seam family E, the separated same-type constraints
//! H_sep and the target representative, solves the stacked GF(2) system for
//! the selectors, and descends to the executable raw-outcome rule through the
//! inference map. Failures are classified into the patch / compile / schedule
//! layers, assigned in that order of precedence.

use crate::adapt::AdaptOutcome;
use crate::gf2::{solve_affine, BitMatrix, BitVec};
use crate::lattice::{MergeLayout, Pauli};
use crate::metrics::MetricsSnapshot;
use crate::seam::{SeamFamily, SeamProvenance};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Same-type rows inherited from the two separated adapted patches.
#[derive(Clone, Debug)]
pub struct ConstraintSet {
    pub h_sep: BitMatrix,
}

impl ConstraintSet {
    pub fn from_adapted(layout: &MergeLayout, adapted: &AdaptOutcome) -> Self {
        let mut m = BitMatrix::new(layout.n_qubits());
        for patch in [&adapted.patch_a, &adapted.patch_b] {
            for row in &patch.same_rows {
                m.push_row(row.support.clone());
            }
        }
        ConstraintSet { h_sep: m }
    }
}

/// Target joint logical parity representative.
#[derive(Clone, Debug)]
pub struct TargetParity {
    pub ell: BitVec,
    /// Defect-free seam product the representative is derived from.
    pub ell0: BitVec,
    /// Correction selector over the full native same-type rows.
    pub gamma0: BitVec,
}

/// Derives the target representative: the defect-free seam product, corrected
/// off defective qubits by full-group same-type rows. `Err` means no valid
/// representative exists (a patch-layer failure).
pub fn derive_target(layout: &MergeLayout, adapted: &AdaptOutcome) -> Result<TargetParity, String> {
    let n = layout.n_qubits();
    let mut ell0 = BitVec::zeros(n);
    for c in &layout.seam_checks {
        ell0.xor_assign(&layout.support_vec(&c.support));
    }
    // Full separated same-type group, damaged rows included: they are formal
    // algebra rows here, not measurements.
    let same = adapted.seam_pauli;
    let full_rows: Vec<BitVec> = layout
        .patch_checks
        .iter()
        .filter(|c| c.pauli == same)
        .map(|c| layout.support_vec(&c.support))
        .collect();
    let dead_cols: Vec<usize> = adapted.dead.iter_ones().collect();
    if dead_cols.is_empty() || {
        let mut t = ell0.clone();
        t.and_not_assign(&adapted.dead);
        t == ell0
    } {
        return Ok(TargetParity {
            ell: ell0.clone(),
            ell0,
            gamma0: BitVec::zeros(full_rows.len()),
        });
    }
    let restrict = |v: &BitVec| {
        BitVec::from_indices(
            dead_cols.len(),
            dead_cols
                .iter()
                .enumerate()
                .filter(|(_, &dc)| v.get(dc))
                .map(|(i, _)| i),
        )
    };
    let m_dead = BitMatrix::from_rows(dead_cols.len(), full_rows.iter().map(restrict).collect());
    let gamma0 = solve_affine(&m_dead, &restrict(&ell0))
        .expect("restriction dimensions agree")
        .ok_or_else(|| {
            "no valid joint logical representative avoids the defective qubits".to_string()
        })?;
    let mut ell = ell0.clone();
    for i in gamma0.iter_ones() {
        ell.xor_assign(&full_rows[i]);
    }
    debug_assert!({
        let mut t = ell.clone();
        t.and_not_assign(&adapted.dead);
        t == ell
    });
    Ok(TargetParity { ell, ell0, gamma0 })
}

/// Realizability certificate for one merge.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub success: bool,
    /// Selector over the seam rows.
    pub alpha: BitVec,
    /// Selector over the H_sep rows.
    pub gamma: BitVec,
    /// Selector over the raw labels.
    pub beta: BitVec,
    /// Raw labels whose XOR is the merge parity, in label order.
    pub rule: Vec<String>,
}

/// Solves alpha^T E + gamma^T H_sep = ell on the stacked system, seam rows
/// first so the elimination prefers them, then maps alpha through the
/// inference transpose to the raw-outcome selector.
pub fn certify(
    layout: &MergeLayout,
    family: &SeamFamily,
    constraints: &ConstraintSet,
    target: &TargetParity,
) -> Result<Certificate, CertifyError> {
    let n = layout.n_qubits();
    if target.ell.len() != n || constraints.h_sep.ncols() != n {
        return Err(CertifyError::Dimension(
            "seam family, constraints and target must share the merged column set".into(),
        ));
    }
    let e = family.row_matrix(n);
    let stacked = e.vstack(&constraints.h_sep);
    let Some(x) = solve_affine(&stacked, &target.ell).map_err(|e| CertifyError::Dimension(e.to_string()))? else {
        return Ok(Certificate {
            success: false,
            alpha: BitVec::zeros(e.nrows()),
            gamma: BitVec::zeros(constraints.h_sep.nrows()),
            beta: BitVec::zeros(family.raw_labels.len()),
            rule: Vec::new(),
        });
    };
    let mut alpha = BitVec::zeros(e.nrows());
    for i in 0..e.nrows() {
        alpha.set(i, x.get(i));
    }
    let mut gamma = BitVec::zeros(constraints.h_sep.nrows());
    for i in 0..constraints.h_sep.nrows() {
        gamma.set(i, x.get(e.nrows() + i));
    }
    // Soundness: the selected rows reproduce the target exactly.
    let mut acc = e.combine_rows(&alpha);
    acc.xor_assign(&constraints.h_sep.combine_rows(&gamma));
    assert_eq!(acc, target.ell, "certificate soundness violated");

    let beta = family.inference.combine_rows(&alpha);
    let rule: Vec<String> = beta
        .iter_ones()
        .map(|i| family.raw_labels[i].name.clone())
        .collect();
    Ok(Certificate {
        success: true,
        alpha,
        gamma,
        beta,
        rule,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureLayer {
    None,
    PatchFailure,
    CompileFailure,
    ScheduleInadmissible,
}

impl FailureLayer {
    pub fn as_str(&self) -> &'static str {
        match self {
            FailureLayer::None => "none",
            FailureLayer::PatchFailure => "patch_failure",
            FailureLayer::CompileFailure => "compile_failure",
            FailureLayer::ScheduleInadmissible => "schedule_inadmissible",
        }
    }
}

/// Post-selection re-validation: every selected gauge-realized row must still
/// have live hosts for all its primitives. Folding admissibility into family
/// construction makes this a no-op in practice; it implements the third
/// failure layer defensively.
pub fn schedule_recheck(
    family: &SeamFamily,
    certificate: &Certificate,
    dead_ancillas: &BTreeSet<crate::lattice::CheckId>,
) -> bool {
    for (ri, row) in family.rows.iter().enumerate() {
        if !certificate.alpha.get(ri) {
            continue;
        }
        if matches!(row.provenance, SeamProvenance::Native { .. }) {
            continue;
        }
        for g in &row.gauges {
            if dead_ancillas.contains(&g.host) {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SeamRowReport {
    pub label: String,
    pub provenance: String,
    pub support: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub gauges: Vec<Vec<String>>,
    pub selected: bool,
}

/// Full per-instance compile output.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CompileReport {
    pub d: usize,
    pub merge: String,
    pub method: String,
    pub toggles: crate::adapt::MethodToggles,
    pub failure_layer: FailureLayer,
    pub success: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure_reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub rule: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub seam_rows: Vec<SeamRowReport>,
    /// Seam windows that ended up with no row, with the rejection reasons
    /// their fusion candidates hit.
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub dropped_windows: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub rejected_candidates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<MetricsSnapshot>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub defective_data: Vec<String>,
    pub defective_ancillas: Vec<String>,
}

impl CompileReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization is infallible")
    }
}

/// Exact-parity sanity for the opposite merge type: nothing here depends on
/// X vs Z because the pipeline always runs in the XX frame.
pub fn seam_pauli_of_frame() -> Pauli {
    Pauli::X
}
