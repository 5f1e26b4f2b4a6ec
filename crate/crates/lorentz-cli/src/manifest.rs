use serde::Serialize;
use std::collections::BTreeMap;

/// Reproducibility record written next to every data file. The command,
/// parameter set and seed are sufficient to regenerate the output
/// bit-exactly on one platform; results never depend on the thread count.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub schema: &'static str,
    pub command: String,
    pub version: &'static str,
    /// Full flag set, stringified, in sorted order.
    pub params: BTreeMap<String, String>,
    pub seed: u64,
    pub threads: usize,
    pub rng: RngLayout,
    pub wall_time_s: f64,
    pub output: String,
}

/// How sample indices map onto RNG streams and work units.
#[derive(Debug, Serialize)]
pub struct RngLayout {
    pub algorithm: &'static str,
    pub streams: &'static str,
    pub chunk_size: u64,
}

impl RunManifest {
    pub fn new(command: &str, seed: u64, threads: usize, output: &str) -> Self {
        RunManifest {
            schema: "lorentz-manifest-v1",
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            params: BTreeMap::new(),
            seed,
            threads,
            rng: RngLayout {
                algorithm: "chacha8",
                streams: "one-stream-per-sample-index",
                chunk_size: 4096,
            },
            wall_time_s: 0.0,
            output: output.to_string(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.params.insert(key.to_string(), value.to_string());
        self
    }
}
