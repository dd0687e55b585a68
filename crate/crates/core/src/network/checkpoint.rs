//! Plain-text checkpoints: a short header followed by one parameter per line
//! in layer order (row-major weights, then biases).

use std::io::{BufRead, BufReader, Read, Write};

use super::{Architecture, NetworkParams};
use crate::error::{Error, Result};

const MAGIC: &str = "frontfix-checkpoint v1";

impl NetworkParams {
    pub fn write_checkpoint<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{MAGIC}")?;
        let hidden: Vec<String> = self.arch.hidden.iter().map(|h| h.to_string()).collect();
        writeln!(w, "hidden {}", hidden.join(" "))?;
        writeln!(w, "seed {}", self.seed)?;
        writeln!(w, "init_std {:e}", self.init_std)?;
        writeln!(w, "count {}", self.values.len())?;
        for v in &self.values {
            writeln!(w, "{v:e}")?;
        }
        Ok(())
    }

    pub fn read_checkpoint<R: Read>(r: R) -> Result<Self> {
        let mut lines = BufReader::new(r).lines();
        let mut next = |what: &str| -> Result<String> {
            lines
                .next()
                .transpose()?
                .ok_or_else(|| Error::Checkpoint(format!("unexpected end of file, expected {what}")))
        };
        if next("header")?.trim() != MAGIC {
            return Err(Error::Checkpoint("missing header line".into()));
        }
        let field = |line: String, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .map(|s| s.trim().to_string())
                .ok_or_else(|| Error::Checkpoint(format!("expected `{key}` line, got `{line}`")))
        };
        let bad = |what: &str, e: &dyn std::fmt::Display| Error::Checkpoint(format!("{what}: {e}"));
        let hidden = field(next("hidden")?, "hidden")?
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| bad("hidden", &e)))
            .collect::<Result<Vec<_>>>()?;
        let seed = field(next("seed")?, "seed")?.parse::<u64>().map_err(|e| bad("seed", &e))?;
        let init_std = field(next("init_std")?, "init_std")?
            .parse::<f64>()
            .map_err(|e| bad("init_std", &e))?;
        let count = field(next("count")?, "count")?
            .parse::<usize>()
            .map_err(|e| bad("count", &e))?;
        let arch = Architecture::new(hidden)?;
        let mut values = Vec::with_capacity(count);
        for i in 0..count {
            let line = next("parameter")?;
            values.push(line.trim().parse::<f64>().map_err(|e| bad(&format!("value {i}"), &e))?);
        }
        let mut params = NetworkParams::from_values(arch, values)?;
        params.seed = seed;
        params.init_std = init_std;
        Ok(params)
    }
}
