//! Execution of one networking cell A—C—B with real symmetric cryptography
//! over consumable key pools, plus an audit of what each channel and the
//! relay can observe.
//!
//! A send encrypts the message with AES-256-CTR under a fresh session key
//! drawn from the A↔B (MDI) pool, then one-time-pads the ciphertext per hop
//! with the A↔C and C↔B (BB84) pools. The relay only ever handles the inner
//! ciphertext. A hop-by-hop baseline without the inner cipher exposes the
//! plaintext at the relay and serves as the contrast fixture.

pub mod aes;

pub use aes::{ctr_transform, Aes256, Aes256Ctr};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, thiserror::Error)]
pub enum RelayError {
    #[error("pool {label:?} depleted: need {needed} bytes, {available} available")]
    PoolDepleted {
        label: PoolLabel,
        needed: usize,
        available: usize,
    },
    #[error("pool {0:?} requested with zero size")]
    ZeroSize(PoolLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolLabel {
    /// End-to-end key shared by A and B across the relay.
    MdiAb,
    /// Hop key shared by A and the relay C.
    Bb84Ac,
    /// Hop key shared by the relay C and B.
    Bb84Cb,
}

/// Consumable one-time key material; reads never revisit consumed bytes.
#[derive(Debug, Clone)]
pub struct KeyPool {
    label: PoolLabel,
    bytes: Vec<u8>,
    consumed_offset: usize,
}

impl KeyPool {
    pub fn label(&self) -> PoolLabel {
        self.label
    }

    pub fn consumed(&self) -> usize {
        self.consumed_offset
    }

    pub fn remaining(&self) -> usize {
        self.bytes.len() - self.consumed_offset
    }

    fn take(&mut self, n: usize) -> Result<KeyRange, RelayError> {
        if self.remaining() < n {
            return Err(RelayError::PoolDepleted {
                label: self.label,
                needed: n,
                available: self.remaining(),
            });
        }
        let range = KeyRange {
            label: self.label,
            offset: self.consumed_offset,
            len: n,
        };
        self.consumed_offset += n;
        Ok(range)
    }

    /// Read previously drawn key bytes (auditing; does not consume).
    pub fn bytes_at(&self, range: &KeyRange) -> &[u8] {
        &self.bytes[range.offset..range.offset + range.len]
    }
}

/// A consumed span of one pool, recorded in the trace for audit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KeyRange {
    pub label: PoolLabel,
    pub offset: usize,
    pub len: usize,
}

/// The three pools backing one cell.
#[derive(Debug, Clone)]
pub struct Pools {
    pub mdi_ab: KeyPool,
    pub bb84_ac: KeyPool,
    pub bb84_cb: KeyPool,
}

/// Fill the three pools from independent deterministic streams.
pub fn establish_pools(
    seed: u64,
    sizes: (usize, usize, usize),
) -> Result<Pools, RelayError> {
    let fill = |label: PoolLabel, stream: u64, size: usize| -> Result<KeyPool, RelayError> {
        if size == 0 {
            return Err(RelayError::ZeroSize(label));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ stream);
        let mut bytes = vec![0u8; size];
        rng.fill_bytes(&mut bytes);
        Ok(KeyPool {
            label,
            bytes,
            consumed_offset: 0,
        })
    };
    Ok(Pools {
        mdi_ab: fill(PoolLabel::MdiAb, 0x6d64_695f_6162, sizes.0)?,
        bb84_ac: fill(PoolLabel::Bb84Ac, 0x6262_3834_5f61_63, sizes.1)?,
        bb84_cb: fill(PoolLabel::Bb84Cb, 0x6262_3834_5f63_62, sizes.2)?,
    })
}

/// Everything produced by one send, hop by hop.
#[derive(Debug, Clone)]
pub struct TransmissionTrace {
    pub plaintext: Vec<u8>,
    /// AES-256-CTR(session key, plaintext); equals the plaintext for the
    /// hop-by-hop baseline.
    pub inner_ct: Vec<u8>,
    pub wire_ac: Vec<u8>,
    /// What the relay holds between the hops.
    pub relay_view: Vec<u8>,
    pub wire_cb: Vec<u8>,
    pub recovered: Vec<u8>,
    pub key_ids: Vec<KeyRange>,
    pub nonce: [u8; 16],
}

fn xor(a: &[u8], b: &[u8]) -> Vec<u8> {
    a.iter().zip(b).map(|(x, y)| x ^ y).collect()
}

/// Run the full cell workflow: inner AES under a fresh 32-byte session key,
/// then per-hop one-time pads. Fails transactionally: on depletion no pool
/// offset moves.
pub fn mpc_send(text: &[u8], pools: &mut Pools) -> Result<TransmissionTrace, RelayError> {
    // Reserve everything up front so a later depletion cannot leave a
    // partially consumed state.
    if pools.mdi_ab.remaining() < 32 {
        return Err(RelayError::PoolDepleted {
            label: PoolLabel::MdiAb,
            needed: 32,
            available: pools.mdi_ab.remaining(),
        });
    }
    for pool in [&pools.bb84_ac, &pools.bb84_cb] {
        if pool.remaining() < text.len() {
            return Err(RelayError::PoolDepleted {
                label: pool.label,
                needed: text.len(),
                available: pool.remaining(),
            });
        }
    }
    let key_range = pools.mdi_ab.take(32).expect("reserved");
    let k1_range = pools.bb84_ac.take(text.len()).expect("reserved");
    let k2_range = pools.bb84_cb.take(text.len()).expect("reserved");

    let session_key: [u8; 32] = pools.mdi_ab.bytes_at(&key_range).try_into().unwrap();
    // The session key is fresh per send, so a fixed counter start is safe.
    let nonce = [0u8; 16];
    let inner_ct = ctr_transform(&session_key, &nonce, text);

    let k1 = pools.bb84_ac.bytes_at(&k1_range);
    let k2 = pools.bb84_cb.bytes_at(&k2_range);
    let wire_ac = xor(&inner_ct, k1);
    let relay_view = xor(&wire_ac, k1);
    let wire_cb = xor(&relay_view, k2);
    let at_b = xor(&wire_cb, k2);
    let recovered = ctr_transform(&session_key, &nonce, &at_b);

    Ok(TransmissionTrace {
        plaintext: text.to_vec(),
        inner_ct,
        wire_ac,
        relay_view,
        wire_cb,
        recovered,
        key_ids: vec![key_range, k1_range, k2_range],
        nonce,
    })
}

/// Hop-by-hop OTP relay without the inner cipher: the relay decrypts to the
/// plaintext before re-encrypting toward B.
pub fn bb84_baseline_send(
    text: &[u8],
    pools: &mut Pools,
) -> Result<TransmissionTrace, RelayError> {
    for pool in [&pools.bb84_ac, &pools.bb84_cb] {
        if pool.remaining() < text.len() {
            return Err(RelayError::PoolDepleted {
                label: pool.label,
                needed: text.len(),
                available: pool.remaining(),
            });
        }
    }
    let k1_range = pools.bb84_ac.take(text.len()).expect("reserved");
    let k2_range = pools.bb84_cb.take(text.len()).expect("reserved");
    let k1 = pools.bb84_ac.bytes_at(&k1_range);
    let k2 = pools.bb84_cb.bytes_at(&k2_range);
    let wire_ac = xor(text, k1);
    let relay_view = xor(&wire_ac, k1);
    let wire_cb = xor(&relay_view, k2);
    let recovered = xor(&wire_cb, k2);
    Ok(TransmissionTrace {
        plaintext: text.to_vec(),
        inner_ct: text.to_vec(),
        wire_ac,
        relay_view,
        wire_cb,
        recovered,
        key_ids: vec![k1_range, k2_range],
        nonce: [0; 16],
    })
}

/// What one observer held and which secrets show up in it verbatim.
#[derive(Debug, Clone)]
pub struct ObserverReport {
    pub observed: Vec<u8>,
    pub saw_plaintext: bool,
    pub saw_mdi_key: bool,
    /// True when the observation is exactly the inner ciphertext and free of
    /// both secrets.
    pub inner_ct_only: bool,
}

#[derive(Debug, Clone)]
pub struct ExposureReport {
    pub channel_ac: ObserverReport,
    pub relay: ObserverReport,
    pub channel_cb: ObserverReport,
}

fn contains(haystack: &[u8], needle: &[u8]) -> bool {
    !needle.is_empty() && haystack.windows(needle.len()).any(|w| w == needle)
}

/// Byte-exact exposure audit of a finished trace.
pub fn audit_exposure(trace: &TransmissionTrace, pools: &Pools) -> ExposureReport {
    let session_key: Vec<u8> = trace
        .key_ids
        .iter()
        .find(|r| r.label == PoolLabel::MdiAb)
        .map(|r| pools.mdi_ab.bytes_at(r).to_vec())
        .unwrap_or_default();
    let observe = |observed: &[u8]| {
        let saw_plaintext = contains(observed, &trace.plaintext);
        let saw_mdi_key = contains(observed, &session_key);
        ObserverReport {
            observed: observed.to_vec(),
            saw_plaintext,
            saw_mdi_key,
            inner_ct_only: observed == trace.inner_ct.as_slice()
                && !saw_plaintext
                && !saw_mdi_key,
        }
    };
    ExposureReport {
        channel_ac: observe(&trace.wire_ac),
        relay: observe(&trace.relay_view),
        channel_cb: observe(&trace.wire_cb),
    }
}
