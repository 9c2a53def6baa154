// SPDX-License-Identifier: Apache-2.0

//! Independent RNG streams split from one master seed.

use sha2::{Digest, Sha256};

/// Seed for the stream labelled `path` under `master`. Distinct labels give
/// unrelated streams; the same label always gives the same seed.
pub fn derive_seed(master: u64, path: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_be_bytes());
    for part in path {
        h.update((part.len() as u64).to_be_bytes());
        h.update(part.as_bytes());
    }
    let d = h.finalize();
    u64::from_be_bytes(d[..8].try_into().expect("32-byte digest"))
}
