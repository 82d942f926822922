use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use ap3d_core::models::ParamSet;
use ap3d_core::thermal::LayerStack;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const PARAMS_DIR_VAR: &str = "AP3D_PARAMS_DIR";

const DEFAULT_PARAMS: &str = include_str!("../params/params.json");
const DEFAULT_STACK: &str = include_str!("../params/stack.json");

/// Options shared by every command.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub params: Option<PathBuf>,
    pub stack: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
}

/// Explicit path, else `$AP3D_PARAMS_DIR/<file>`, else the built-in text.
fn source(explicit: &Option<PathBuf>, file: &str, builtin: &'static str) -> Result<(String, String)> {
    let path = match (explicit, std::env::var_os(PARAMS_DIR_VAR)) {
        (Some(p), _) => p.clone(),
        (None, Some(dir)) => Path::new(&dir).join(file),
        (None, None) => return Ok((builtin.to_string(), "built-in".into())),
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    Ok((text, path.display().to_string()))
}

impl Inputs {
    pub fn param_set(&self) -> Result<ParamSet> {
        let (text, from) = source(&self.params, "params.json", DEFAULT_PARAMS)?;
        ParamSet::from_json(&text).with_context(|| format!("parameter set from {from}"))
    }

    pub fn layer_stack(&self) -> Result<LayerStack> {
        let (text, from) = source(&self.stack, "stack.json", DEFAULT_STACK)?;
        LayerStack::from_json(&text).with_context(|| format!("layer stack from {from}"))
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Creates the output directory and returns the path of `name` in it.
    pub fn out_file(&self, name: &str) -> Result<PathBuf> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(self.out.join(name))
    }

    pub fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.out_file(name)?;
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text)
    }
}
