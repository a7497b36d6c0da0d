//! Raw-outcome stream simulator.
//!
//! Generates gauge/seam outcome streams consistent with a compiled family,
//! applies independent measurement flips, and extracts the per-round parity
//! through the certified raw-outcome selector. This exercises exactly the
//! executable observable the compiler emits; data errors and decoding are out
//! of scope.

use crate::certify::Certificate;
use crate::defects::counter_u64;
use crate::gf2::BitVec;
use crate::seam::{SeamFamily, SeamProvenance};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StreamError {
    #[error("round count must be >= 1, got {0}")]
    BadRounds(usize),
    #[error("majority vote needs an odd round count, got {0}")]
    EvenRounds(usize),
}

#[derive(Clone, Debug)]
pub struct OutcomeStream {
    pub rounds: usize,
    pub flip_probability: f64,
    /// Raw bits per round, over the family's raw labels.
    pub bits: Vec<BitVec>,
    /// Extracted parity per round: beta^T s_r.
    pub parities: Vec<bool>,
}

/// Samples a T-round raw-outcome stream. Round 1 assigns every effective row
/// an independent uniform bit; gauge bits within a row are uniform
/// conditioned on their product equaling the row bit; later rounds repeat the
/// noiseless values; every raw bit then flips independently with probability
/// `p_m`.
pub fn generate_stream(
    family: &SeamFamily,
    certificate: &Certificate,
    rounds: usize,
    p_m: f64,
    seed: u64,
) -> Result<OutcomeStream, StreamError> {
    if rounds == 0 {
        return Err(StreamError::BadRounds(rounds));
    }
    let n_labels = family.raw_labels.len();
    let mut base = BitVec::zeros(n_labels);
    let mut counter = 0u64;
    let mut draw_bit = |seed, domain| {
        counter += 1;
        counter_u64(seed, domain, counter) & 1 == 1
    };
    for (ri, row) in family.rows.iter().enumerate() {
        let row_bit = draw_bit(seed, 0);
        let labels: Vec<usize> = (0..n_labels)
            .filter(|&li| family.raw_labels[li].row == ri)
            .collect();
        match row.provenance {
            SeamProvenance::Native { .. } => {
                debug_assert_eq!(labels.len(), 1);
                base.set(labels[0], row_bit);
            }
            _ => {
                let mut acc = false;
                for &li in &labels[..labels.len() - 1] {
                    let b = draw_bit(seed, 1);
                    base.set(li, b);
                    acc ^= b;
                }
                base.set(labels[labels.len() - 1], row_bit ^ acc);
            }
        }
    }
    let mut bits = Vec::with_capacity(rounds);
    let mut parities = Vec::with_capacity(rounds);
    for r in 0..rounds {
        let mut round_bits = base.clone();
        for li in 0..n_labels {
            let h = counter_u64(seed, 2, (r * n_labels + li) as u64);
            let u = (h >> 11) as f64 / (1u64 << 53) as f64;
            if u < p_m {
                round_bits.set(li, !round_bits.get(li));
            }
        }
        parities.push(certificate.beta.overlap_parity(&round_bits));
        bits.push(round_bits);
    }
    Ok(OutcomeStream {
        rounds,
        flip_probability: p_m,
        bits,
        parities,
    })
}

/// Majority vote over per-round parities; requires an odd round count.
pub fn majority_extract(parities: &[bool]) -> Result<bool, StreamError> {
    if parities.len().is_multiple_of(2) {
        return Err(StreamError::EvenRounds(parities.len()));
    }
    let ones = parities.iter().filter(|&&p| p).count();
    Ok(ones * 2 > parities.len())
}

/// Closed-form per-round parity flip rate for a weight-k selector.
pub fn expected_flip_rate(p_m: f64, k: usize) -> f64 {
    (1.0 - (1.0 - 2.0 * p_m).powi(k as i32)) / 2.0
}
