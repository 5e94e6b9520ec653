//! Model directories: `space.bin`, optional `matrices.bin` and `model.conf`.

use std::fs;
use std::path::{Path, PathBuf};

use depfsl_core::spaces::{DependencyMatrixSet, EmbeddingSpace};
use depfsl_core::training::{TrainedModel, TrainerConfig};

use crate::config::parse_key_values;
use crate::error::{Error, Result};
use crate::formats::{read_matrices, read_space, write_matrices, write_space};

pub const SPACE_FILE: &str = "space.bin";
pub const MATRICES_FILE: &str = "matrices.bin";
pub const CONFIG_FILE: &str = "model.conf";

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedModel {
    pub space: EmbeddingSpace,
    pub matrices: Option<DependencyMatrixSet>,
    /// Training settings as recorded in `model.conf`, if present.
    pub settings: Vec<(String, String)>,
}

impl LoadedModel {
    pub fn setting(&self, key: &str) -> Option<&str> {
        self.settings.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn config_lines(config: &TrainerConfig) -> String {
    format!(
        "model = {}\ndim = {}\nnegatives = {}\nbatch = {}\nlr = {}\nwindow = {}\ntau = {}\nepochs = {}\nseed = {}\n",
        config.model,
        config.dim,
        config.negatives,
        config.batch_size,
        config.learning_rate,
        config.window,
        config.subsample_tau,
        config.epochs,
        config.seed
    )
}

pub fn save_model(dir: &Path, model: &TrainedModel, config: &TrainerConfig) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_space(&dir.join(SPACE_FILE), &model.space)?;
    let mpath = dir.join(MATRICES_FILE);
    match &model.matrices {
        Some(m) => write_matrices(&mpath, m)?,
        None if mpath.exists() => fs::remove_file(&mpath).map_err(|e| Error::io(&mpath, e))?,
        None => {}
    }
    let cpath = dir.join(CONFIG_FILE);
    fs::write(&cpath, config_lines(config)).map_err(|e| Error::io(&cpath, e))
}

/// Loads a model directory, or a bare `space.bin`-format file.
pub fn load_model(path: &Path) -> Result<LoadedModel> {
    if !path.is_dir() {
        return Ok(LoadedModel {
            space: read_space(path)?,
            matrices: None,
            settings: Vec::new(),
        });
    }
    let space = read_space(&path.join(SPACE_FILE))?;
    let mpath: PathBuf = path.join(MATRICES_FILE);
    let matrices = if mpath.exists() { Some(read_matrices(&mpath)?) } else { None };
    let cpath = path.join(CONFIG_FILE);
    let settings = if cpath.exists() {
        let text = fs::read_to_string(&cpath).map_err(|e| Error::io(&cpath, e))?;
        parse_key_values(&text, &cpath)?
    } else {
        Vec::new()
    };
    Ok(LoadedModel {
        space,
        matrices,
        settings,
    })
}
