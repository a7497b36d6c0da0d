//! Compile orchestration, the ensemble scan engine, and the worked-example
//! witness.
//!
//! `run_compile` drives adapt -> seam -> certify -> metrics for one instance
//! and renders the report; ZZ requests run the identical pipeline on the
//! transposed geometry and transpose labels back. `run_scan` sweeps (d, q)
//! grids with position-based seeds so adding grid cells never perturbs
//! existing cells, and shares instances between methods so dominance is
//! checkable pairwise. `run_golden` replays the three-defect worked example
//! bit for bit.

use crate::adapt::{adapt_patches, MethodToggles};
use crate::certify::{
    certify, derive_target, schedule_recheck, CompileReport, ConstraintSet, FailureLayer,
    SeamRowReport,
};
use crate::defects::{derive_seed, sample_instance, DefectInstance};
use crate::gf2::BitVec;
use crate::lattice::{build_layout, MergeLayout, MergeType, PatchId, QubitId};
use crate::metrics::{
    merge_effective_distance, merged_configuration_distance, patches_viable, schedule_rounds,
    MetricsSnapshot,
};
use crate::seam::{build_seam_family, SeamProvenance};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeSet;

pub const CSV_HEADER: &str = "d,q_data,q_anc,method,instances,patch_yield,compile_yield,mean_deff_ratio,se_deff_ratio,mean_extra_rounds,mean_inferred_rows,mean_enlarged_checks";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodSelection {
    Standard,
    Proposed,
    Both,
}

impl MethodSelection {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standard" => Some(MethodSelection::Standard),
            "proposed" => Some(MethodSelection::Proposed),
            "both" => Some(MethodSelection::Both),
            _ => None,
        }
    }
}

/// Parses "standard", "proposed", or a comma list of fused,strategy-b,orient.
pub fn parse_toggles(s: &str, probe_literal: bool) -> Result<MethodToggles, String> {
    let mut t = match s {
        "standard" => MethodToggles::standard(),
        "proposed" => MethodToggles::proposed(),
        _ => {
            let mut t = MethodToggles::standard();
            for part in s.split(',').filter(|p| !p.is_empty()) {
                match part.trim() {
                    "fused" => t.fused = true,
                    "strategy-b" => t.strategy_b = true,
                    "orient" => t.orient = true,
                    other => return Err(format!("unknown toggle '{other}'")),
                }
            }
            t
        }
    };
    t.probe_literal = probe_literal;
    Ok(t)
}

/// Slim per-instance outcome used by the scan accumulator.
#[derive(Clone, Debug)]
pub struct CompileOutcome {
    pub failure_layer: FailureLayer,
    pub success: bool,
    pub failure_reason: Option<String>,
    pub d_eff: Option<usize>,
    pub inferred_rows: usize,
    pub enlarged_checks: usize,
    pub rounds: usize,
}

impl CompileOutcome {
    fn failed(layer: FailureLayer, reason: String) -> Self {
        CompileOutcome {
            failure_layer: layer,
            success: false,
            failure_reason: Some(reason),
            d_eff: None,
            inferred_rows: 0,
            enlarged_checks: 0,
            rounds: 0,
        }
    }
}

/// Runs the pipeline on an XX-frame instance. The layout must match.
pub fn compile_outcome(
    layout: &MergeLayout,
    instance: &DefectInstance,
    toggles: MethodToggles,
    merged_deff: bool,
) -> (CompileOutcome, Option<PipelineArtifacts>) {
    debug_assert_eq!(layout.merge_type, MergeType::Xx);
    let adapted = match adapt_patches(layout, instance, toggles) {
        Ok(a) => a,
        Err(e) => {
            return (
                CompileOutcome::failed(FailureLayer::PatchFailure, e.to_string()),
                None,
            )
        }
    };
    if !patches_viable(layout, &adapted) {
        return (
            CompileOutcome::failed(
                FailureLayer::PatchFailure,
                "no boundary-to-boundary logical representative survives".into(),
            ),
            None,
        );
    }
    let target = match derive_target(layout, &adapted) {
        Ok(t) => t,
        Err(reason) => {
            return (
                CompileOutcome::failed(FailureLayer::PatchFailure, reason),
                None,
            )
        }
    };
    let family = build_seam_family(layout, &adapted, instance, toggles);
    let constraints = ConstraintSet::from_adapted(layout, &adapted);
    let cert = certify(layout, &family, &constraints, &target).expect("dimensions agree");
    let artifacts = PipelineArtifacts {
        adapted,
        family,
        constraints,
        target,
        certificate: cert,
    };
    if !artifacts.certificate.success {
        let out = CompileOutcome::failed(
            FailureLayer::CompileFailure,
            "target parity outside the seam/constraint row space".into(),
        );
        return (out, Some(artifacts));
    }
    let dead_anc: BTreeSet<_> = instance.defective_ancillas.iter().copied().collect();
    if !schedule_recheck(&artifacts.family, &artifacts.certificate, &dead_anc) {
        let out = CompileOutcome::failed(
            FailureLayer::ScheduleInadmissible,
            "selected row lost its gauge hosts".into(),
        );
        return (out, Some(artifacts));
    }
    let d_eff = if merged_deff {
        merged_configuration_distance(layout, &artifacts.adapted)
    } else {
        merge_effective_distance(layout, &artifacts.adapted)
    };
    let inferred_rows = artifacts
        .family
        .rows
        .iter()
        .enumerate()
        .filter(|(ri, row)| {
            artifacts.certificate.alpha.get(*ri)
                && !matches!(row.provenance, SeamProvenance::Native { .. })
        })
        .count();
    let enlarged_checks = artifacts.adapted.absorptions.len();
    let rounds = schedule_rounds(layout.d, inferred_rows, enlarged_checks);
    (
        CompileOutcome {
            failure_layer: FailureLayer::None,
            success: true,
            failure_reason: None,
            d_eff,
            inferred_rows,
            enlarged_checks,
            rounds,
        },
        Some(artifacts),
    )
}

/// Full pipeline state for report rendering and the outcome simulator.
pub struct PipelineArtifacts {
    pub adapted: crate::adapt::AdaptOutcome,
    pub family: crate::seam::SeamFamily,
    pub constraints: ConstraintSet,
    pub target: crate::certify::TargetParity,
    pub certificate: crate::certify::Certificate,
}

fn render_support(layout: &MergeLayout, v: &BitVec, transpose: bool) -> Vec<String> {
    v.iter_ones()
        .map(|c| {
            let q = layout.qubit_at(c);
            if transpose {
                q.transposed().label(layout.d)
            } else {
                q.label(layout.d)
            }
        })
        .collect()
}

/// Compiles one instance end to end and renders the report. ZZ instances are
/// transposed into the XX frame and labels transposed back on the way out.
pub fn run_compile(
    instance: &DefectInstance,
    toggles: MethodToggles,
    merged_deff: bool,
) -> CompileReport {
    let transpose = instance.merge_type == MergeType::Zz;
    let work = if transpose {
        instance.transposed()
    } else {
        instance.clone()
    };
    let layout = build_layout(work.d, MergeType::Xx).expect("instance distance validated on load");
    let (outcome, artifacts) = compile_outcome(&layout, &work, toggles, merged_deff);

    // Extra rounds against the standard method on the same instance.
    let extra_rounds = if outcome.success {
        let std_rounds = if toggles == MethodToggles::standard() {
            Some(outcome.rounds)
        } else {
            let (std_out, _) =
                compile_outcome(&layout, &work, MethodToggles::standard(), merged_deff);
            std_out.success.then_some(std_out.rounds)
        };
        outcome.rounds as i64 - std_rounds.unwrap_or(schedule_rounds(layout.d, 0, 0)) as i64
    } else {
        0
    };

    let metrics = outcome.success.then(|| MetricsSnapshot {
        d_eff: outcome.d_eff.unwrap_or(0),
        d_eff_ratio: outcome.d_eff.unwrap_or(0) as f64 / layout.d as f64,
        rounds: outcome.rounds,
        extra_rounds,
        inferred_rows: outcome.inferred_rows,
        enlarged_checks: outcome.enlarged_checks,
    });

    let mut report = CompileReport {
        d: instance.d,
        merge: instance.merge_type.as_str().to_string(),
        method: toggles.method_name().to_string(),
        toggles,
        failure_layer: outcome.failure_layer,
        success: outcome.success,
        failure_reason: outcome.failure_reason,
        alpha: None,
        gamma: None,
        beta: None,
        rule: Vec::new(),
        seam_rows: Vec::new(),
        dropped_windows: Vec::new(),
        rejected_candidates: Vec::new(),
        metrics,
        seed: instance.seed,
        defective_data: instance
            .defective_data
            .iter()
            .map(|q| q.label(instance.d))
            .collect(),
        defective_ancillas: instance
            .defective_ancillas
            .iter()
            .map(|c| c.label())
            .collect(),
    };
    if let Some(art) = artifacts {
        report.alpha = Some(art.certificate.alpha.to_bitstring());
        report.gamma = Some(art.certificate.gamma.to_bitstring());
        report.beta = Some(art.certificate.beta.to_bitstring());
        report.rule = art.certificate.rule.clone();
        report.dropped_windows = art.family.dropped_windows.clone();
        report.rejected_candidates = art
            .family
            .rejections
            .iter()
            .map(|r| {
                let windows: Vec<String> = r.windows.iter().map(|k| format!("e{k}")).collect();
                let corrections: Vec<String> =
                    r.corrections.iter().map(|c| c.label()).collect();
                format!(
                    "{}+[{}]: {}",
                    windows.join(","),
                    corrections.join(","),
                    r.reason.code()
                )
            })
            .collect();
        report.seam_rows = art
            .family
            .rows
            .iter()
            .enumerate()
            .map(|(ri, row)| SeamRowReport {
                label: row.display_label(),
                provenance: match &row.provenance {
                    SeamProvenance::Native { .. } => "native".to_string(),
                    SeamProvenance::Fused { .. } => "fused".to_string(),
                    SeamProvenance::Inferred { orientation, .. } => {
                        format!("inferred/{orientation:?}").to_lowercase()
                    }
                },
                support: render_support(&layout, &row.support, transpose),
                gauges: row
                    .gauges
                    .iter()
                    .map(|g| {
                        g.qubits
                            .iter()
                            .map(|q| {
                                if transpose {
                                    q.transposed().label(layout.d)
                                } else {
                                    q.label(layout.d)
                                }
                            })
                            .collect()
                    })
                    .collect(),
                selected: art.certificate.success && art.certificate.alpha.get(ri),
            })
            .collect();
    }
    report
}

/// Recompiles an instance and returns the pipeline state; used by the stream
/// subcommand and the bindings.
pub fn compile_artifacts(
    instance: &DefectInstance,
    toggles: MethodToggles,
) -> Result<PipelineArtifacts, String> {
    let work = if instance.merge_type == MergeType::Zz {
        instance.transposed()
    } else {
        instance.clone()
    };
    let layout = build_layout(work.d, MergeType::Xx).map_err(|e| e.to_string())?;
    let (outcome, artifacts) = compile_outcome(&layout, &work, toggles, false);
    let artifacts = artifacts.ok_or_else(|| {
        outcome
            .failure_reason
            .clone()
            .unwrap_or_else(|| "adaptation failed".into())
    })?;
    if !outcome.success {
        return Err(outcome
            .failure_reason
            .unwrap_or_else(|| "compile failed".into()));
    }
    Ok(artifacts)
}

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub d_list: Vec<usize>,
    pub q_data_list: Vec<f64>,
    pub q_anc_list: Vec<f64>,
    pub instances: usize,
    pub master_seed: u64,
    pub methods: MethodSelection,
    pub merge_type: MergeType,
    pub probe_literal: bool,
    pub merged_deff: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanRow {
    pub d: usize,
    pub q_data: f64,
    pub q_anc: f64,
    pub method: String,
    pub instances: usize,
    pub patch_yield: f64,
    pub compile_yield: f64,
    pub mean_deff_ratio: f64,
    pub se_deff_ratio: f64,
    pub mean_extra_rounds: f64,
    pub mean_inferred_rows: f64,
    pub mean_enlarged_checks: f64,
}

impl ScanRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            self.d,
            self.q_data,
            self.q_anc,
            self.method,
            self.instances,
            self.patch_yield,
            self.compile_yield,
            self.mean_deff_ratio,
            self.se_deff_ratio,
            self.mean_extra_rounds,
            self.mean_inferred_rows,
            self.mean_enlarged_checks,
        )
    }
}

#[derive(Default, Clone)]
struct CellAccumulator {
    n: usize,
    patch_ok: usize,
    compile_ok: usize,
    deff_sum: f64,
    deff_sq_sum: f64,
    extra_sum: f64,
    inferred_sum: f64,
    enlarged_sum: f64,
}

impl CellAccumulator {
    fn add(&mut self, outcome: &CompileOutcome, d: usize, extra: i64) {
        self.n += 1;
        if outcome.failure_layer != FailureLayer::PatchFailure {
            self.patch_ok += 1;
        }
        if outcome.success {
            self.compile_ok += 1;
            let ratio = outcome.d_eff.unwrap_or(0) as f64 / d as f64;
            self.deff_sum += ratio;
            self.deff_sq_sum += ratio * ratio;
            self.extra_sum += extra as f64;
            self.inferred_sum += outcome.inferred_rows as f64;
            self.enlarged_sum += outcome.enlarged_checks as f64;
        }
    }

    fn merge(mut self, other: &CellAccumulator) -> CellAccumulator {
        self.n += other.n;
        self.patch_ok += other.patch_ok;
        self.compile_ok += other.compile_ok;
        self.deff_sum += other.deff_sum;
        self.deff_sq_sum += other.deff_sq_sum;
        self.extra_sum += other.extra_sum;
        self.inferred_sum += other.inferred_sum;
        self.enlarged_sum += other.enlarged_sum;
        self
    }

    fn row(&self, d: usize, q_data: f64, q_anc: f64, method: &str) -> ScanRow {
        let n = self.n as f64;
        let ns = self.compile_ok.max(1) as f64;
        let mean = self.deff_sum / ns;
        let var = (self.deff_sq_sum / ns - mean * mean).max(0.0);
        let se = if self.compile_ok > 1 {
            (var / (ns - 1.0)).sqrt()
        } else {
            0.0
        };
        ScanRow {
            d,
            q_data,
            q_anc,
            method: method.to_string(),
            instances: self.n,
            patch_yield: self.patch_ok as f64 / n,
            compile_yield: self.compile_ok as f64 / n,
            mean_deff_ratio: if self.compile_ok > 0 { mean } else { 0.0 },
            se_deff_ratio: se,
            mean_extra_rounds: if self.compile_ok > 0 {
                self.extra_sum / ns
            } else {
                0.0
            },
            mean_inferred_rows: if self.compile_ok > 0 {
                self.inferred_sum / ns
            } else {
                0.0
            },
            mean_enlarged_checks: if self.compile_ok > 0 {
                self.enlarged_sum / ns
            } else {
                0.0
            },
        }
    }
}

/// Position-based per-instance seed: depends only on the cell values and the
/// index, never on grid enumeration order.
pub fn cell_instance_seed(master: u64, d: usize, q_data: f64, q_anc: f64, index: usize) -> u64 {
    derive_seed(&[
        master,
        d as u64,
        (q_data * 1e9).round() as u64,
        (q_anc * 1e9).round() as u64,
        index as u64,
    ])
}

/// Runs the grid scan; returns CSV rows in grid order.
pub fn run_scan(config: &ScanConfig) -> Vec<ScanRow> {
    let mut rows = Vec::new();
    let methods: &[&str] = match config.methods {
        MethodSelection::Standard => &["standard"],
        MethodSelection::Proposed => &["proposed"],
        MethodSelection::Both => &["standard", "proposed"],
    };
    for &d in &config.d_list {
        let layout = build_layout(d, MergeType::Xx).expect("odd d validated upstream");
        for &q_data in &config.q_data_list {
            for &q_anc in &config.q_anc_list {
                let accs: Vec<(CellAccumulator, CellAccumulator)> = (0..config.instances)
                    .into_par_iter()
                    .map(|i| {
                        let seed = cell_instance_seed(config.master_seed, d, q_data, q_anc, i);
                        let sample_layout = if config.merge_type == MergeType::Zz {
                            // Sampled in the ZZ frame, compiled transposed.
                            build_layout(d, MergeType::Zz).unwrap()
                        } else {
                            layout.clone()
                        };
                        let inst = sample_instance(&sample_layout, q_data, q_anc, seed)
                            .expect("rates validated upstream");
                        let work = if config.merge_type == MergeType::Zz {
                            inst.transposed()
                        } else {
                            inst
                        };
                        let mut t_std = MethodToggles::standard();
                        t_std.probe_literal = config.probe_literal;
                        let mut t_prop = MethodToggles::proposed();
                        t_prop.probe_literal = config.probe_literal;
                        let (std_out, _) =
                            compile_outcome(&layout, &work, t_std, config.merged_deff);
                        let (prop_out, _) =
                            compile_outcome(&layout, &work, t_prop, config.merged_deff);
                        let std_ref = if std_out.success {
                            std_out.rounds as i64
                        } else {
                            schedule_rounds(d, 0, 0) as i64
                        };
                        let mut acc_std = CellAccumulator::default();
                        let mut acc_prop = CellAccumulator::default();
                        acc_std.add(&std_out, d, 0);
                        acc_prop.add(&prop_out, d, prop_out.rounds as i64 - std_ref);
                        (acc_std, acc_prop)
                    })
                    .collect();
                let (acc_std, acc_prop) = accs.into_iter().fold(
                    (CellAccumulator::default(), CellAccumulator::default()),
                    |(s, p), (ns, np)| (s.merge(&ns), p.merge(&np)),
                );
                for &m in methods {
                    let acc = if m == "standard" { &acc_std } else { &acc_prop };
                    rows.push(acc.row(d, q_data, q_anc, m));
                }
            }
        }
    }
    rows
}

pub fn scan_csv(rows: &[ScanRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct ScanSummary<'a> {
    master_seed: u64,
    merge: &'a str,
    instances_per_cell: usize,
    rows: &'a [ScanRow],
}

pub fn scan_summary_json(config: &ScanConfig, rows: &[ScanRow]) -> String {
    serde_json::to_string_pretty(&ScanSummary {
        master_seed: config.master_seed,
        merge: config.merge_type.as_str(),
        instances_per_cell: config.instances,
        rows,
    })
    .expect("summary serialization is infallible")
}

// ---------------------------------------------------------------------------
// Golden witness: the three-defect worked example.
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct GoldenCheck {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diff: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GoldenReport {
    pub passed: bool,
    pub checks: Vec<GoldenCheck>,
}

impl GoldenReport {
    pub fn print(&self) {
        for c in &self.checks {
            if c.passed {
                println!("PASS {}", c.name);
            } else {
                println!(
                    "FAIL {}: {}",
                    c.name,
                    c.diff.as_deref().unwrap_or("mismatch")
                );
            }
        }
        println!(
            "golden witness: {}",
            if self.passed { "PASS" } else { "FAIL" }
        );
    }
}

/// The local witness basis for the merge-type rows, as printed.
pub const GOLDEN_QX: [&str; 14] = [
    "A17", "A27", "B11", "B21", "A37", "A46", "A56", "A67", "B31", "B42", "B52", "B61", "A77",
    "B71",
];
/// The local opposite-type basis, as printed.
pub const GOLDEN_QZ: [&str; 10] = [
    "A36", "A37", "A46", "A56", "A66", "A67", "B32", "B31", "B42", "B51",
];

/// Replays the d=7 three-defect witness and checks every printed artifact
/// bit-exactly. `perturb_fusion` deliberately corrupts the fused row (drops
/// the B-side correction) as a negative control.
pub fn run_golden(perturb_fusion: bool) -> GoldenReport {
    let mut checks: Vec<GoldenCheck> = Vec::new();
    let mut check = |name: &str, passed: bool, diff: String| {
        checks.push(GoldenCheck {
            name: name.to_string(),
            passed,
            diff: if passed { None } else { Some(diff) },
        });
    };

    let d = 7;
    let layout = build_layout(d, MergeType::Xx).unwrap();
    let inst = DefectInstance::from_labels(d, MergeType::Xx, &["A47", "A57", "B41"], &[]).unwrap();
    let toggles = MethodToggles::proposed();
    let adapted = adapt_patches(&layout, &inst, toggles).unwrap();
    let mut family = build_seam_family(&layout, &adapted, &inst, toggles);
    if perturb_fusion {
        // Negative control: corrupt the fused row by the B-side plaquette.
        let x_b = layout
            .check(&crate::lattice::CheckId::Patch {
                patch: PatchId::B,
                pauli: crate::lattice::Pauli::X,
                row: 4,
                col: 1,
            })
            .unwrap();
        let v = layout.support_vec(&x_b.support);
        family.rows[1].support.xor_assign(&v);
    }

    let qx: Vec<usize> = GOLDEN_QX
        .iter()
        .map(|s| layout.col_of(QubitId::parse(s, d).unwrap()))
        .collect();
    let qz: Vec<usize> = GOLDEN_QZ
        .iter()
        .map(|s| layout.col_of(QubitId::parse(s, d).unwrap()))
        .collect();
    let labels_of = |v: &BitVec| -> Vec<String> { render_support(&layout, v, false) };

    // 1. Fused seam row support.
    let fused_want: BTreeSet<&str> = ["A37", "A46", "A56", "A67", "B31", "B42", "B52", "B61"]
        .into_iter()
        .collect();
    let fused_got: BTreeSet<String> = if family.rows.len() == 3 {
        labels_of(&family.rows[1].support).into_iter().collect()
    } else {
        BTreeSet::new()
    };
    check(
        "fused-seam-row-support",
        fused_got.iter().map(|s| s.as_str()).collect::<BTreeSet<_>>() == fused_want,
        format!("got {fused_got:?}, want {fused_want:?}"),
    );

    // 2. Reduced opposite-type super-stabilizer support.
    let red_want: BTreeSet<&str> = GOLDEN_QZ.into_iter().collect();
    let red_row = adapted
        .merged_opp_rows
        .iter()
        .find(|r| r.kind == crate::adapt::RowKind::Super);
    let red_got: BTreeSet<String> = red_row
        .map(|r| labels_of(&r.support).into_iter().collect())
        .unwrap_or_default();
    check(
        "reduced-super-stabilizer-support",
        red_got.iter().map(|s| s.as_str()).collect::<BTreeSet<_>>() == red_want,
        format!("got {red_got:?}, want {red_want:?}"),
    );

    // 3. Fused row restricted to the opposite basis, and the overlap parity.
    if family.rows.len() == 3 {
        let fused = &family.rows[1].support;
        let restriction: Vec<u8> = qz.iter().map(|&c| fused.get(c) as u8).collect();
        let want = vec![0u8, 1, 1, 1, 0, 1, 0, 1, 1, 0];
        check(
            "fused-row-restriction-to-opposite-basis",
            restriction == want,
            format!("got {restriction:?}, want {want:?}"),
        );
        let parity = red_row
            .map(|r| fused.overlap_parity(&r.support))
            .unwrap_or(true);
        check(
            "overlap-parity-zero",
            !parity,
            "fused row anticommutes with the reduced super-stabilizer".into(),
        );
    } else {
        check("fused-row-restriction-to-opposite-basis", false, "no fused row".into());
        check("overlap-parity-zero", false, "no fused row".into());
    }

    // 4. The seam family matrix on the witness basis.
    let e_want: [[u8; 14]; 3] = [
        [1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
        [0, 0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0],
        [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1],
    ];
    let mut e_ok = family.rows.len() == 3;
    let mut e_diff = String::new();
    if e_ok {
        for (ri, row) in family.rows.iter().enumerate() {
            let got: Vec<u8> = qx.iter().map(|&c| row.support.get(c) as u8).collect();
            if got != e_want[ri] {
                e_ok = false;
                e_diff = format!("row {ri}: got {got:?}, want {:?}", e_want[ri]);
                break;
            }
            // The row must also vanish outside the witness basis.
            if row.support.weight() != got.iter().filter(|&&b| b == 1).count() {
                e_ok = false;
                e_diff = format!("row {ri} has support outside the witness basis");
                break;
            }
        }
    } else {
        e_diff = format!("family has {} rows, want 3", family.rows.len());
    }
    check("seam-family-matrix", e_ok, e_diff);

    // 5. Target representative: all-ones on the witness basis, zero outside.
    let target = derive_target(&layout, &adapted).unwrap();
    let ell_on_basis: Vec<u8> = qx.iter().map(|&c| target.ell.get(c) as u8).collect();
    check(
        "target-representative-all-ones",
        ell_on_basis.iter().all(|&b| b == 1) && target.ell.weight() == 14,
        format!(
            "restriction {ell_on_basis:?}, total weight {}",
            target.ell.weight()
        ),
    );

    // 6/7. Selectors, inference map and the executable rule from the full
    // certification.
    let constraints = ConstraintSet::from_adapted(&layout, &adapted);
    let cert = certify(&layout, &family, &constraints, &target).unwrap();
    check(
        "seam-selector-all-ones",
        cert.success && cert.alpha.to_bitstring() == "111",
        format!("success={}, alpha={}", cert.success, cert.alpha.to_bitstring()),
    );
    let o_want: [[u8; 6]; 3] = [
        [1, 0, 0, 0, 0, 0],
        [0, 1, 1, 1, 1, 0],
        [0, 0, 0, 0, 0, 1],
    ];
    let mut o_ok = family.raw_labels.len() == 6 && family.rows.len() == 3;
    let mut o_diff = String::new();
    if o_ok {
        for (ri, want) in o_want.iter().enumerate() {
            let got: Vec<u8> = (0..6).map(|ci| family.inference.get(ri, ci) as u8).collect();
            if got != *want {
                o_ok = false;
                o_diff = format!("row {ri}: got {got:?}, want {want:?}");
                break;
            }
        }
    } else {
        o_diff = format!("{} raw labels, want 6", family.raw_labels.len());
    }
    check("inference-map", o_ok, o_diff);
    check(
        "raw-selector-all-ones",
        cert.beta.to_bitstring() == "111111",
        format!("beta={}", cert.beta.to_bitstring()),
    );
    check(
        "executable-rule",
        cert.rule == ["e1", "g1", "g2", "g3", "g4", "e4"],
        format!("rule={:?}", cert.rule),
    );

    let passed = checks.iter().all(|c| c.passed);
    GoldenReport { passed, checks }
}

/// The golden witness under ZZ transposition: identical structure with every
/// coordinate transposed.
pub fn run_golden_zz() -> GoldenReport {
    let mut checks = Vec::new();
    let inst =
        DefectInstance::from_labels(7, MergeType::Xx, &["A47", "A57", "B41"], &[]).unwrap();
    let zz_inst = inst.transposed();
    let report = run_compile(&zz_inst, MethodToggles::proposed(), false);
    let tr = |s: &str| -> String {
        QubitId::parse(s, 7).unwrap().transposed().label(7)
    };
    let fused_want: BTreeSet<String> = ["A37", "A46", "A56", "A67", "B31", "B42", "B52", "B61"]
        .into_iter()
        .map(tr)
        .collect();
    let fused_got: BTreeSet<String> = report
        .seam_rows
        .get(1)
        .map(|r| r.support.iter().cloned().collect())
        .unwrap_or_default();
    checks.push(GoldenCheck {
        name: "zz-fused-row-transposed-support".into(),
        passed: fused_got == fused_want,
        diff: (fused_got != fused_want).then(|| format!("got {fused_got:?}, want {fused_want:?}")),
    });
    checks.push(GoldenCheck {
        name: "zz-rule".into(),
        passed: report.success && report.rule == ["e1", "g1", "g2", "g3", "g4", "e4"],
        diff: (!report.success || report.rule != ["e1", "g1", "g2", "g3", "g4", "e4"])
            .then(|| format!("success={}, rule={:?}", report.success, report.rule)),
    });
    let passed = checks.iter().all(|c| c.passed);
    GoldenReport { passed, checks }
}
