//! Defect instances: independent Bernoulli sampling of data-qubit and
//! seam-check-ancilla defects, plus the instance JSON format.
//!
//! Sampling is counter-based: each site draws its own bit from a hash of
//! (seed, site index), so the result is independent of iteration order and
//! instances can be generated in parallel.

use crate::lattice::{CheckId, LatticeError, MergeLayout, MergeType, QubitId};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DefectError {
    #[error("defect rate {0} out of range [0, 0.05]")]
    RateOutOfRange(f64),
    #[error("instance parse error: {field}: {msg}")]
    Parse { field: String, msg: String },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("instance JSON malformed: {0}")]
    Json(#[from] serde_json::Error),
}

pub const MAX_DEFECT_RATE: f64 = 0.05;

/// One sampled or loaded defect configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectInstance {
    pub d: usize,
    pub merge_type: MergeType,
    pub defective_data: BTreeSet<QubitId>,
    pub defective_ancillas: BTreeSet<CheckId>,
    pub seed: Option<u64>,
    pub q_data: Option<f64>,
    pub q_anc: Option<f64>,
}

impl DefectInstance {
    pub fn defect_free(d: usize, merge_type: MergeType) -> Self {
        DefectInstance {
            d,
            merge_type,
            defective_data: BTreeSet::new(),
            defective_ancillas: BTreeSet::new(),
            seed: None,
            q_data: None,
            q_anc: None,
        }
    }

    pub fn from_labels(
        d: usize,
        merge_type: MergeType,
        data: &[&str],
        ancillas: &[&str],
    ) -> Result<Self, DefectError> {
        let mut inst = DefectInstance::defect_free(d, merge_type);
        for s in data {
            inst.defective_data.insert(QubitId::parse(s, d)?);
        }
        for s in ancillas {
            inst.defective_ancillas.insert(CheckId::parse(s)?);
        }
        Ok(inst)
    }

    /// Coordinate transposition; pairs with `transpose_layout`.
    pub fn transposed(&self) -> DefectInstance {
        DefectInstance {
            d: self.d,
            merge_type: match self.merge_type {
                MergeType::Xx => MergeType::Zz,
                MergeType::Zz => MergeType::Xx,
            },
            defective_data: self.defective_data.iter().map(|q| q.transposed()).collect(),
            defective_ancillas: self
                .defective_ancillas
                .iter()
                .map(|c| c.transposed())
                .collect(),
            seed: self.seed,
            q_data: self.q_data,
            q_anc: self.q_anc,
        }
    }
}

/// splitmix64 finalizer; the whole counter-based RNG.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e3779b97f4a7c15);
    z ^= z >> 30;
    z = z.wrapping_mul(0xbf58476d1ce4e5b9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94d049bb133111eb);
    z ^= z >> 31;
    z
}

/// Deterministic per-site draw: true with probability p.
fn site_draw(seed: u64, domain: u64, site: u64, p: f64) -> bool {
    let h = mix(mix(seed ^ domain.wrapping_mul(0xd1342543de82ef95)) ^ site);
    // 53-bit mantissa uniform in [0, 1).
    let u = (h >> 11) as f64 / (1u64 << 53) as f64;
    u < p
}

/// Uniform u64 from a counter stream; used by the outcome simulator.
pub fn counter_u64(seed: u64, domain: u64, counter: u64) -> u64 {
    mix(mix(seed ^ domain.wrapping_mul(0xd1342543de82ef95)) ^ counter)
}

/// Chains seeds for derived streams (per-cell, per-instance, per-shot).
pub fn derive_seed(parts: &[u64]) -> u64 {
    let mut acc = 0x243f6a8885a308d3u64;
    for &p in parts {
        acc = mix(acc ^ p);
    }
    acc
}

/// Samples data-qubit and seam-check-ancilla defects independently.
pub fn sample_instance(
    layout: &MergeLayout,
    q_data: f64,
    q_anc: f64,
    seed: u64,
) -> Result<DefectInstance, DefectError> {
    for q in [q_data, q_anc] {
        if !(0.0..=MAX_DEFECT_RATE).contains(&q) {
            return Err(DefectError::RateOutOfRange(q));
        }
    }
    let mut inst = DefectInstance::defect_free(layout.d, layout.merge_type);
    inst.seed = Some(seed);
    inst.q_data = Some(q_data);
    inst.q_anc = Some(q_anc);
    for col in 0..layout.n_qubits() {
        if site_draw(seed, 0, col as u64, q_data) {
            inst.defective_data.insert(layout.qubit_at(col));
        }
    }
    for check in &layout.seam_checks {
        let CheckId::Seam { index } = check.id else { continue };
        if site_draw(seed, 1, index as u64, q_anc) {
            inst.defective_ancillas.insert(check.id);
        }
    }
    Ok(inst)
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    d: usize,
    merge: String,
    defective_data: Vec<String>,
    defective_ancillas: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_data: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_anc: Option<f64>,
}

pub fn save_instance(inst: &DefectInstance) -> String {
    let doc = InstanceDoc {
        d: inst.d,
        merge: inst.merge_type.as_str().to_string(),
        defective_data: inst
            .defective_data
            .iter()
            .map(|q| q.label(inst.d))
            .collect(),
        defective_ancillas: inst
            .defective_ancillas
            .iter()
            .map(|c| c.label())
            .collect(),
        seed: inst.seed,
        q_data: inst.q_data,
        q_anc: inst.q_anc,
    };
    serde_json::to_string_pretty(&doc).expect("instance serialization is infallible")
}

pub fn load_instance(text: &str) -> Result<DefectInstance, DefectError> {
    let doc: InstanceDoc = serde_json::from_str(text)?;
    if doc.d < 3 || doc.d.is_multiple_of(2) {
        return Err(DefectError::Parse {
            field: "d".into(),
            msg: format!("distance must be an odd integer >= 3, got {}", doc.d),
        });
    }
    let merge_type = match doc.merge.as_str() {
        "xx" => MergeType::Xx,
        "zz" => MergeType::Zz,
        other => {
            return Err(DefectError::Parse {
                field: "merge".into(),
                msg: format!("expected \"xx\" or \"zz\", got \"{other}\""),
            })
        }
    };
    let mut inst = DefectInstance::defect_free(doc.d, merge_type);
    inst.seed = doc.seed;
    inst.q_data = doc.q_data;
    inst.q_anc = doc.q_anc;
    for s in &doc.defective_data {
        let q = QubitId::parse(s, doc.d).map_err(|e| DefectError::Parse {
            field: "defective_data".into(),
            msg: e.to_string(),
        })?;
        inst.defective_data.insert(q);
    }
    let k_max = doc.d.div_ceil(2);
    for s in &doc.defective_ancillas {
        let id = CheckId::parse(s).map_err(|e| DefectError::Parse {
            field: "defective_ancillas".into(),
            msg: e.to_string(),
        })?;
        match id {
            CheckId::Seam { index } if index < 1 || index > k_max => {
                return Err(DefectError::Parse {
                    field: "defective_ancillas".into(),
                    msg: format!("seam index {index} out of range 1..={k_max}"),
                });
            }
            CheckId::Patch { row, col, .. } if row > doc.d || col > doc.d => {
                return Err(DefectError::Parse {
                    field: "defective_ancillas".into(),
                    msg: format!("anchor ({row},{col}) out of range for d={}", doc.d),
                });
            }
            _ => {}
        }
        inst.defective_ancillas.insert(id);
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_layout;
    use proptest::prelude::*;

    #[test]
    fn zero_rates_give_empty_sets() {
        let layout = build_layout(7, MergeType::Xx).unwrap();
        let inst = sample_instance(&layout, 0.0, 0.0, 42).unwrap();
        assert!(inst.defective_data.is_empty());
        assert!(inst.defective_ancillas.is_empty());
    }

    #[test]
    fn sampling_is_deterministic() {
        let layout = build_layout(9, MergeType::Xx).unwrap();
        let a = sample_instance(&layout, 0.01, 0.005, 12345).unwrap();
        let b = sample_instance(&layout, 0.01, 0.005, 12345).unwrap();
        assert_eq!(a, b);
        let c = sample_instance(&layout, 0.01, 0.005, 12346).unwrap();
        assert!(a != c || a.defective_data.is_empty());
    }

    #[test]
    fn empirical_rates_within_binomial_bounds() {
        // 10^5 instances at d=9: checks the marginal defect fraction against
        // 3-sigma binomial bounds.
        let layout = build_layout(9, MergeType::Xx).unwrap();
        let (q_data, q_anc) = (0.01, 0.005);
        let n_inst = 100_000usize;
        let mut data_hits = 0usize;
        let mut anc_hits = 0usize;
        for i in 0..n_inst {
            let inst = sample_instance(&layout, q_data, q_anc, derive_seed(&[7, i as u64])).unwrap();
            data_hits += inst.defective_data.len();
            anc_hits += inst.defective_ancillas.len();
        }
        let data_trials = (n_inst * layout.n_qubits()) as f64;
        let anc_trials = (n_inst * layout.seam_checks.len()) as f64;
        for (hits, trials, p) in [
            (data_hits as f64, data_trials, q_data),
            (anc_hits as f64, anc_trials, q_anc),
        ] {
            let sigma = (trials * p * (1.0 - p)).sqrt();
            assert!(
                (hits - trials * p).abs() < 3.0 * sigma,
                "rate off: {hits} hits vs {} expected (sigma {sigma})",
                trials * p
            );
        }
    }

    #[test]
    fn rejects_out_of_range_rates() {
        let layout = build_layout(5, MergeType::Xx).unwrap();
        assert!(sample_instance(&layout, 0.06, 0.0, 1).is_err());
        assert!(sample_instance(&layout, 0.0, -0.1, 1).is_err());
    }

    #[test]
    fn appendix_cluster_loads() {
        let text = r#"{"d":7,"merge":"xx","defective_data":["A47","A57","B41"],"defective_ancillas":[]}"#;
        let inst = load_instance(text).unwrap();
        assert_eq!(inst.d, 7);
        assert_eq!(inst.merge_type, MergeType::Xx);
        let labels: Vec<String> = inst.defective_data.iter().map(|q| q.label(7)).collect();
        assert_eq!(labels, vec!["A47", "A57", "B41"]);
    }

    #[test]
    fn out_of_range_label_names_the_field() {
        let text = r#"{"d":7,"merge":"xx","defective_data":["A99"],"defective_ancillas":[]}"#;
        let err = load_instance(text).unwrap_err().to_string();
        assert!(err.contains("defective_data"), "{err}");
        assert!(err.contains("range"), "{err}");
    }

    #[test]
    fn bad_merge_type_is_reported() {
        let text = r#"{"d":7,"merge":"xy","defective_data":[],"defective_ancillas":[]}"#;
        let err = load_instance(text).unwrap_err().to_string();
        assert!(err.contains("merge"), "{err}");
    }

    proptest! {
        #[test]
        fn save_load_round_trip(seed in 0u64..10_000, d_idx in 0usize..3) {
            let d = [5, 7, 11][d_idx];
            let layout = build_layout(d, MergeType::Xx).unwrap();
            let inst = sample_instance(&layout, 0.03, 0.05, seed).unwrap();
            let loaded = load_instance(&save_instance(&inst)).unwrap();
            prop_assert_eq!(inst, loaded);
        }
    }
}
