//! Binds trained encoders to the exact context configuration they were
//! trained under, so stale or mismatched artifacts are rejected instead of
//! silently producing garbage vectors.

use sha2::{Digest, Sha256};

use crate::corpus::{ContextScenario, Vocabulary, WindowSpec};

/// 16-byte digest of (vocabulary, context scenario, window).
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Hash)]
pub struct Fingerprint([u8; 16]);

impl Fingerprint {
    pub fn compute(vocab: &Vocabulary, scenario: &ContextScenario, window: WindowSpec) -> Self {
        let mut hasher = Sha256::new();
        for (word, count) in vocab.iter() {
            hasher.update(word.as_bytes());
            hasher.update(b"\t");
            hasher.update(count.to_le_bytes());
            hasher.update(b"\n");
        }
        hasher.update(vocab.total_tokens().to_le_bytes());
        hasher.update(scenario.canonical_string().as_bytes());
        hasher.update((window.size as u64).to_le_bytes());
        hasher.update([window.symmetric as u8]);
        let digest = hasher.finalize();
        let mut bytes = [0u8; 16];
        bytes.copy_from_slice(&digest[..16]);
        Fingerprint(bytes)
    }

    pub fn as_bytes(&self) -> &[u8; 16] {
        &self.0
    }

    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        Fingerprint(bytes)
    }
}

impl std::fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}
