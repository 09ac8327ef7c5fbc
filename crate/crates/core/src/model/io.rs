//! Model files are pretty-printed JSON of [`LinearModel`].

use std::path::Path;

use super::LinearModel;

pub fn to_json(model: &LinearModel) -> String {
    serde_json::to_string_pretty(model).expect("model is always serializable")
}

pub fn from_json(text: &str) -> Result<LinearModel, String> {
    let m: LinearModel = serde_json::from_str(text).map_err(|e| e.to_string())?;
    if !(m.threshold > 0.0 && m.threshold < 1.0) {
        return Err(format!("threshold {} outside (0, 1)", m.threshold));
    }
    if !m.bias.is_finite() || m.weights.values().any(|w| !w.is_finite()) {
        return Err("non-finite parameter".into());
    }
    if let Some(p) = &m.standardization {
        for id in m.weights.keys() {
            if !p.columns.contains_key(id) {
                return Err(format!("standardization lacks feature {id}"));
            }
        }
    }
    Ok(m)
}

pub fn write(path: &Path, model: &LinearModel) -> std::io::Result<()> {
    std::fs::write(path, to_json(model) + "\n")
}

pub fn read(path: &Path) -> Result<LinearModel, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    from_json(&text).map_err(|e| format!("{}: {e}", path.display()))
}
