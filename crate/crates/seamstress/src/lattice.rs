//! Two-patch rotated surface-code merge geometry.
//!
//! Builds the full check inventory for a pair of distance-d rotated patches
//! joined along a zero-width seam, in the XX orientation: X-boundaries on
//! columns 1 and d of each patch, seam between A column d and B column 1.
//! The plaquette coloring is pinned so that the seam family comes out as
//! e_k = X on A rows (2k-1, 2k) at column d paired with the same B rows at
//! column 1, with a weight-2 terminal check at row d, and the interior and
//! boundary checks around the seam carry the expected supports (e.g. the
//! A-patch interior X plaquette on rows 4-5, columns 6-7 at d=7).
//!
//! ZZ layouts are obtained purely by transposition.

use crate::gf2::BitVec;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LatticeError {
    #[error("distance must be an odd integer >= 3, got {0}")]
    BadDistance(usize),
    #[error("label parse error in {field}: {msg}")]
    Label { field: String, msg: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PatchId {
    A,
    B,
}

impl PatchId {
    pub fn letter(self) -> char {
        match self {
            PatchId::A => 'A',
            PatchId::B => 'B',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Z,
}

impl Pauli {
    pub fn opposite(self) -> Pauli {
        match self {
            Pauli::X => Pauli::Z,
            Pauli::Z => Pauli::X,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum MergeType {
    Xx,
    Zz,
}

impl MergeType {
    pub fn seam_pauli(self) -> Pauli {
        match self {
            MergeType::Xx => Pauli::X,
            MergeType::Zz => Pauli::Z,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MergeType::Xx => "xx",
            MergeType::Zz => "zz",
        }
    }
}

/// Data qubit, 1-based row/col within its patch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct QubitId {
    pub patch: PatchId,
    pub row: usize,
    pub col: usize,
}

impl QubitId {
    pub fn new(patch: PatchId, row: usize, col: usize) -> Self {
        QubitId { patch, row, col }
    }

    pub fn transposed(self) -> Self {
        QubitId {
            patch: self.patch,
            row: self.col,
            col: self.row,
        }
    }

    /// "A47" for d <= 9, "A:4:7" otherwise.
    pub fn label(self, d: usize) -> String {
        if d <= 9 {
            format!("{}{}{}", self.patch.letter(), self.row, self.col)
        } else {
            format!("{}:{}:{}", self.patch.letter(), self.row, self.col)
        }
    }

    pub fn parse(s: &str, d: usize) -> Result<Self, LatticeError> {
        let err = |msg: &str| LatticeError::Label {
            field: format!("qubit label '{s}'"),
            msg: msg.to_string(),
        };
        let mut chars = s.chars();
        let patch = match chars.next() {
            Some('A') => PatchId::A,
            Some('B') => PatchId::B,
            _ => return Err(err("must start with patch letter A or B")),
        };
        let rest: String = chars.collect();
        let (row, col) = if let Some(stripped) = rest.strip_prefix(':') {
            let mut parts = stripped.split(':');
            let r = parts
                .next()
                .and_then(|p| p.parse::<usize>().ok())
                .ok_or_else(|| err("expected <patch>:<row>:<col>"))?;
            let c = parts
                .next()
                .and_then(|p| p.parse::<usize>().ok())
                .ok_or_else(|| err("expected <patch>:<row>:<col>"))?;
            if parts.next().is_some() {
                return Err(err("trailing fields"));
            }
            (r, c)
        } else {
            let digits: Vec<u32> = rest.chars().map(|c| c.to_digit(10)).collect::<Option<_>>()
                .ok_or_else(|| err("expected two digits after the patch letter"))?;
            if digits.len() != 2 {
                return Err(err("compact form needs exactly two digits"));
            }
            (digits[0] as usize, digits[1] as usize)
        };
        if row < 1 || row > d || col < 1 || col > d {
            return Err(LatticeError::Label {
                field: format!("qubit label '{s}'"),
                msg: format!("row/col out of range 1..={d}"),
            });
        }
        Ok(QubitId::new(patch, row, col))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckKind {
    Interior,
    Boundary,
    Seam,
    /// Merged opposite-type seam row formed by the two facing boundary halves.
    SeamOpp,
}

/// Stable check/ancilla identity. Ancilla sites are 1:1 with checks.
///
/// Patch anchors: interior plaquette (r, c) with r, c in 1..d-1; boundary
/// halves use 0/d markers (top (0,c), bottom (d,c), left (s,0), right (s,d)).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum CheckId {
    Patch {
        patch: PatchId,
        pauli: Pauli,
        row: usize,
        col: usize,
    },
    Seam {
        index: usize,
    },
    SeamOpp {
        index: usize,
    },
}

impl CheckId {
    pub fn label(&self) -> String {
        match self {
            CheckId::Patch { patch, pauli, row, col } => format!(
                "{}:{}:{}:{}",
                patch.letter(),
                match pauli {
                    Pauli::X => 'X',
                    Pauli::Z => 'Z',
                },
                row,
                col
            ),
            CheckId::Seam { index } => format!("seam:{index}"),
            CheckId::SeamOpp { index } => format!("seam-opp:{index}"),
        }
    }

    /// Parses the instance-JSON ancilla id forms: "seam:<k>" or
    /// "<patch>:<X|Z>:<row>:<col>". Merged seam-opposite sites are not
    /// addressable.
    pub fn parse(s: &str) -> Result<Self, LatticeError> {
        let err = |msg: String| LatticeError::Label {
            field: format!("ancilla id '{s}'"),
            msg,
        };
        if let Some(k) = s.strip_prefix("seam:") {
            let index = k
                .parse::<usize>()
                .map_err(|_| err("seam index must be an integer".into()))?;
            return Ok(CheckId::Seam { index });
        }
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(err("expected seam:<k> or <patch>:<X|Z>:<row>:<col>".into()));
        }
        let patch = match parts[0] {
            "A" => PatchId::A,
            "B" => PatchId::B,
            other => return Err(err(format!("unknown patch '{other}'"))),
        };
        let pauli = match parts[1] {
            "X" => Pauli::X,
            "Z" => Pauli::Z,
            other => return Err(err(format!("unknown pauli '{other}'"))),
        };
        let row = parts[2]
            .parse::<usize>()
            .map_err(|_| err("row must be an integer".into()))?;
        let col = parts[3]
            .parse::<usize>()
            .map_err(|_| err("col must be an integer".into()))?;
        Ok(CheckId::Patch { patch, pauli, row, col })
    }

    pub fn transposed(&self) -> CheckId {
        match *self {
            CheckId::Patch { patch, pauli, row, col } => CheckId::Patch {
                patch,
                pauli: pauli.opposite(),
                row: col,
                col: row,
            },
            CheckId::Seam { index } => CheckId::Seam { index },
            CheckId::SeamOpp { index } => CheckId::SeamOpp { index },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckDef {
    pub id: CheckId,
    pub pauli: Pauli,
    pub kind: CheckKind,
    pub support: Vec<QubitId>,
}

impl CheckDef {
    pub fn patch(&self) -> Option<PatchId> {
        match self.id {
            CheckId::Patch { patch, .. } => Some(patch),
            _ => None,
        }
    }
}

/// Two equal-distance patches merged along one seam.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MergeLayout {
    pub d: usize,
    pub merge_type: MergeType,
    /// Separated inventory of both patches (A first), interior then boundary.
    pub patch_checks: Vec<CheckDef>,
    /// Seam checks e_1..e_k activated by the merge, k = (d+1)/2.
    pub seam_checks: Vec<CheckDef>,
    /// Merged opposite-type seam rows (facing boundary halves fused pairwise).
    pub seam_opp: Vec<CheckDef>,
    /// Ids of the separated boundary halves consumed by the seam_opp fusion.
    pub facing_half_ids: Vec<CheckId>,
    by_id: HashMap<CheckId, (CheckKind, usize)>,
}

impl MergeLayout {
    pub fn n_qubits(&self) -> usize {
        2 * self.d * self.d
    }

    /// Canonical dense column index: all of A row-major, then all of B.
    pub fn col_of(&self, q: QubitId) -> usize {
        let base = match q.patch {
            PatchId::A => 0,
            PatchId::B => self.d * self.d,
        };
        base + (q.row - 1) * self.d + (q.col - 1)
    }

    pub fn qubit_at(&self, col: usize) -> QubitId {
        let d = self.d;
        let (patch, rem) = if col < d * d {
            (PatchId::A, col)
        } else {
            (PatchId::B, col - d * d)
        };
        QubitId::new(patch, rem / d + 1, rem % d + 1)
    }

    pub fn support_vec(&self, support: &[QubitId]) -> BitVec {
        BitVec::from_indices(self.n_qubits(), support.iter().map(|&q| self.col_of(q)))
    }

    pub fn check(&self, id: &CheckId) -> Option<&CheckDef> {
        self.by_id.get(id).map(|&(kind, i)| match kind {
            CheckKind::Seam => &self.seam_checks[i],
            CheckKind::SeamOpp => &self.seam_opp[i],
            _ => &self.patch_checks[i],
        })
    }

    /// Separated checks of one patch.
    pub fn patch_checks_of(&self, patch: PatchId) -> impl Iterator<Item = &CheckDef> {
        self.patch_checks.iter().filter(move |c| c.patch() == Some(patch))
    }

    /// Merged check inventory: patch checks with the facing halves replaced by
    /// the fused seam-opposite rows, plus the seam checks.
    pub fn merged_checks(&self) -> impl Iterator<Item = &CheckDef> {
        self.patch_checks
            .iter()
            .filter(move |c| !self.facing_half_ids.contains(&c.id))
            .chain(self.seam_opp.iter())
            .chain(self.seam_checks.iter())
    }

    /// All check sites whose native support contains both qubits; candidate
    /// gauge hosts.
    pub fn sites_containing_pair(&self, a: QubitId, b: QubitId) -> Vec<&CheckDef> {
        self.patch_checks
            .iter()
            .chain(self.seam_opp.iter())
            .chain(self.seam_checks.iter())
            .filter(|c| c.support.contains(&a) && c.support.contains(&b))
            .collect()
    }

    pub fn all_checks(&self) -> impl Iterator<Item = &CheckDef> {
        self.patch_checks
            .iter()
            .chain(self.seam_opp.iter())
            .chain(self.seam_checks.iter())
    }
}

fn interior_pauli(patch: PatchId, r: usize, c: usize) -> Pauli {
    let even = (r + c).is_multiple_of(2);
    match patch {
        PatchId::A => {
            if even {
                Pauli::X
            } else {
                Pauli::Z
            }
        }
        // B continues the merged checkerboard across the seam (column offset d, d odd).
        PatchId::B => {
            if even {
                Pauli::Z
            } else {
                Pauli::X
            }
        }
    }
}

/// Builds the merged two-patch layout.
pub fn build_layout(d: usize, merge_type: MergeType) -> Result<MergeLayout, LatticeError> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(LatticeError::BadDistance(d));
    }
    let layout = build_layout_xx(d);
    Ok(match merge_type {
        MergeType::Xx => layout,
        MergeType::Zz => transpose_layout(&layout),
    })
}

fn build_layout_xx(d: usize) -> MergeLayout {
    let mut patch_checks = Vec::new();
    let mut facing_half_ids = Vec::new();

    for patch in [PatchId::A, PatchId::B] {
        // Interior plaquettes.
        for r in 1..d {
            for c in 1..d {
                let pauli = interior_pauli(patch, r, c);
                patch_checks.push(CheckDef {
                    id: CheckId::Patch { patch, pauli, row: r, col: c },
                    pauli,
                    kind: CheckKind::Interior,
                    support: vec![
                        QubitId::new(patch, r, c),
                        QubitId::new(patch, r, c + 1),
                        QubitId::new(patch, r + 1, c),
                        QubitId::new(patch, r + 1, c + 1),
                    ],
                });
            }
        }
        // Boundary halves continue the checkerboard past the edge: horizontal
        // edges host X halves, vertical edges host Z halves.
        for c in 1..d {
            if interior_pauli(patch, 0, c) == Pauli::X {
                patch_checks.push(CheckDef {
                    id: CheckId::Patch { patch, pauli: Pauli::X, row: 0, col: c },
                    pauli: Pauli::X,
                    kind: CheckKind::Boundary,
                    support: vec![QubitId::new(patch, 1, c), QubitId::new(patch, 1, c + 1)],
                });
            }
            if interior_pauli(patch, d, c) == Pauli::X {
                patch_checks.push(CheckDef {
                    id: CheckId::Patch { patch, pauli: Pauli::X, row: d, col: c },
                    pauli: Pauli::X,
                    kind: CheckKind::Boundary,
                    support: vec![QubitId::new(patch, d, c), QubitId::new(patch, d, c + 1)],
                });
            }
        }
        for s in 1..d {
            if interior_pauli(patch, s, 0) == Pauli::Z {
                patch_checks.push(CheckDef {
                    id: CheckId::Patch { patch, pauli: Pauli::Z, row: s, col: 0 },
                    pauli: Pauli::Z,
                    kind: CheckKind::Boundary,
                    support: vec![QubitId::new(patch, s, 1), QubitId::new(patch, s + 1, 1)],
                });
            }
            if interior_pauli(patch, s, d) == Pauli::Z {
                let id = CheckId::Patch { patch, pauli: Pauli::Z, row: s, col: d };
                patch_checks.push(CheckDef {
                    id,
                    pauli: Pauli::Z,
                    kind: CheckKind::Boundary,
                    support: vec![QubitId::new(patch, s, d), QubitId::new(patch, s + 1, d)],
                });
            }
        }
    }

    // Facing halves: A right edge and B left edge, both at even row pairs.
    for s in (2..d).step_by(2) {
        facing_half_ids.push(CheckId::Patch { patch: PatchId::A, pauli: Pauli::Z, row: s, col: d });
        facing_half_ids.push(CheckId::Patch { patch: PatchId::B, pauli: Pauli::Z, row: s, col: 0 });
    }

    // Seam checks: X plaquettes bridging A column d and B column 1 at odd row
    // pairs, with the weight-2 terminal at row d.
    let mut seam_checks = Vec::new();
    let k_max = d.div_ceil(2);
    for k in 1..=k_max {
        let r = 2 * k - 1;
        let support = if k < k_max {
            vec![
                QubitId::new(PatchId::A, r, d),
                QubitId::new(PatchId::A, r + 1, d),
                QubitId::new(PatchId::B, r, 1),
                QubitId::new(PatchId::B, r + 1, 1),
            ]
        } else {
            vec![QubitId::new(PatchId::A, d, d), QubitId::new(PatchId::B, d, 1)]
        };
        seam_checks.push(CheckDef {
            id: CheckId::Seam { index: k },
            pauli: Pauli::X,
            kind: CheckKind::Seam,
            support,
        });
    }

    // Merged opposite-type seam rows: facing halves fused pairwise.
    let mut seam_opp = Vec::new();
    for s in (2..d).step_by(2) {
        seam_opp.push(CheckDef {
            id: CheckId::SeamOpp { index: s },
            pauli: Pauli::Z,
            kind: CheckKind::SeamOpp,
            support: vec![
                QubitId::new(PatchId::A, s, d),
                QubitId::new(PatchId::A, s + 1, d),
                QubitId::new(PatchId::B, s, 1),
                QubitId::new(PatchId::B, s + 1, 1),
            ],
        });
    }

    finish_layout(d, MergeType::Xx, patch_checks, seam_checks, seam_opp, facing_half_ids)
}

fn finish_layout(
    d: usize,
    merge_type: MergeType,
    patch_checks: Vec<CheckDef>,
    seam_checks: Vec<CheckDef>,
    seam_opp: Vec<CheckDef>,
    facing_half_ids: Vec<CheckId>,
) -> MergeLayout {
    let mut by_id = HashMap::new();
    for (i, c) in patch_checks.iter().enumerate() {
        by_id.insert(c.id, (c.kind, i));
    }
    for (i, c) in seam_checks.iter().enumerate() {
        by_id.insert(c.id, (CheckKind::Seam, i));
    }
    for (i, c) in seam_opp.iter().enumerate() {
        by_id.insert(c.id, (CheckKind::SeamOpp, i));
    }
    MergeLayout {
        d,
        merge_type,
        patch_checks,
        seam_checks,
        seam_opp,
        facing_half_ids,
        by_id,
    }
}

/// Swaps X and Z on every check, transposes every coordinate, and flips the
/// merge type. An involution.
pub fn transpose_layout(layout: &MergeLayout) -> MergeLayout {
    let tr_check = |c: &CheckDef| CheckDef {
        id: c.id.transposed(),
        pauli: c.pauli.opposite(),
        kind: c.kind,
        support: c.support.iter().map(|q| q.transposed()).collect(),
    };
    finish_layout(
        layout.d,
        match layout.merge_type {
            MergeType::Xx => MergeType::Zz,
            MergeType::Zz => MergeType::Xx,
        },
        layout.patch_checks.iter().map(tr_check).collect(),
        layout.seam_checks.iter().map(tr_check).collect(),
        layout.seam_opp.iter().map(tr_check).collect(),
        layout.facing_half_ids.iter().map(|id| id.transposed()).collect(),
    )
}
