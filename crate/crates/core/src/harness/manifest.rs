use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const SEED_RULE: &str = "path i draws from ChaCha8 with stream number i; the 256-bit key is four \
consecutive SplitMix64 outputs seeded with master_seed, little-endian; block counter starts at 0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

impl FileEntry {
    pub fn new(name: &str, contents: &[u8]) -> Self {
        Self {
            name: name.to_string(),
            sha256: hex::encode(Sha256::digest(contents)),
            bytes: contents.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub version: String,
    /// Effective configuration after command-line overrides, as TOML.
    pub config: String,
    pub master_seed: Option<u64>,
    pub seed_rule: String,
    pub wall_clock_seconds: f64,
    pub files: Vec<FileEntry>,
}
