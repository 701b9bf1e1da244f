use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Forest, ForestConfig, IsolationTree, TreeNode};
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize)]
struct ModelFileRef<'a> {
    version: u32,
    config: &'a ForestConfig,
    psi: usize,
    n_features: usize,
    max_depth: usize,
    fitted_on: &'a str,
    trees: &'a [IsolationTree],
}

#[derive(Deserialize)]
struct ModelFile {
    config: ForestConfig,
    psi: usize,
    n_features: usize,
    max_depth: usize,
    fitted_on: String,
    trees: Vec<IsolationTree>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: Option<u32>,
}

impl Forest {
    pub fn to_json_writer<W: Write>(&self, w: W) -> Result<()> {
        let file = ModelFileRef {
            version: MODEL_FORMAT_VERSION,
            config: &self.config,
            psi: self.psi,
            n_features: self.n_features,
            max_depth: self.max_depth,
            fitted_on: &self.fitted_on,
            trees: &self.trees,
        };
        serde_json::to_writer(w, &file)?;
        Ok(())
    }

    /// Parses and validates a serialized model.
    pub fn from_json_slice(bytes: &[u8]) -> Result<Self> {
        let probe: VersionProbe = serde_json::from_slice(bytes)?;
        match probe.version {
            Some(MODEL_FORMAT_VERSION) => {}
            Some(found) => {
                return Err(Error::VersionMismatch {
                    found,
                    expected: MODEL_FORMAT_VERSION,
                })
            }
            None => return Err(Error::MalformedModel("missing 'version' field".into())),
        }
        let file: ModelFile = serde_json::from_slice(bytes)?;
        let forest = Forest {
            config: file.config,
            psi: file.psi,
            n_features: file.n_features,
            max_depth: file.max_depth,
            trees: file.trees,
            fitted_on: file.fitted_on,
        };
        forest.validate()?;
        Ok(forest)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::MalformedModel(msg));
        self.config
            .validate()
            .map_err(|e| Error::MalformedModel(format!("config: {e}")))?;
        if self.trees.is_empty() {
            return bad("model has no trees".into());
        }
        if self.n_features == 0 {
            return bad("n_features must be positive".into());
        }
        if self.psi < 2 {
            return bad(format!("psi {} is below 2", self.psi));
        }
        for (t, tree) in self.trees.iter().enumerate() {
            validate_tree(tree, self.n_features)
                .map_err(|msg| Error::MalformedModel(format!("tree {t}: {msg}")))?;
        }
        Ok(())
    }
}

fn validate_tree(tree: &IsolationTree, p: usize) -> std::result::Result<(), String> {
    let nodes = &tree.nodes;
    if nodes.is_empty() {
        return Err("no nodes".into());
    }
    if nodes[0].size() != tree.psi {
        return Err(format!(
            "root size {} differs from psi {}",
            nodes[0].size(),
            tree.psi
        ));
    }
    if nodes[0].depth() != 0 {
        return Err("root depth must be 0".into());
    }
    let mut seen = vec![false; nodes.len()];
    seen[0] = true;
    for (i, node) in nodes.iter().enumerate() {
        let TreeNode::Internal(n) = node else {
            continue;
        };
        if n.plane.normal.len() != p {
            return Err(format!(
                "node {i}: normal has {} entries, expected {p}",
                n.plane.normal.len()
            ));
        }
        if !n.plane.intercept.is_finite() || n.plane.normal.iter().any(|v| !v.is_finite()) {
            return Err(format!("node {i}: non-finite split"));
        }
        if n.left_size.checked_add(n.right_size) != Some(n.size) {
            return Err(format!(
                "node {i}: child counts do not add up to {}",
                n.size
            ));
        }
        for (child, count) in [(n.left, n.left_size), (n.right, n.right_size)] {
            if child <= i || child >= nodes.len() {
                return Err(format!("node {i}: child index {child} out of order"));
            }
            if std::mem::replace(&mut seen[child], true) {
                return Err(format!("node {child} has more than one parent"));
            }
            if nodes[child].size() != count {
                return Err(format!("node {child}: size does not match parent count"));
            }
            if nodes[child].depth() != n.depth + 1 {
                return Err(format!("node {child}: depth does not follow parent"));
            }
        }
    }
    if let Some(orphan) = seen.iter().position(|s| !s) {
        return Err(format!("node {orphan} is unreachable"));
    }
    Ok(())
}

pub fn save_model(forest: &Forest, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    forest.to_json_writer(&mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<Forest> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    Forest::from_json_slice(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{make_preset, Preset};
    use crate::forest::ModelKind;

    fn small_forest(model: ModelKind) -> (Forest, crate::data::Dataset) {
        let ds = make_preset(Preset::Bisect, 1).unwrap();
        let cfg = ForestConfig::new(model).with_trees(8).with_seed(5);
        (Forest::fit(&ds, &cfg).unwrap(), ds)
    }

    fn to_bytes(f: &Forest) -> Vec<u8> {
        let mut out = Vec::new();
        f.to_json_writer(&mut out).unwrap();
        out
    }

    #[test]
    fn round_trip_preserves_scores_bitwise() {
        for model in ModelKind::ALL {
            let (f, ds) = small_forest(model);
            let back = Forest::from_json_slice(&to_bytes(&f)).unwrap();
            assert_eq!(back, f);
            let a = f.score_dataset(&ds).unwrap();
            let b = back.score_dataset(&ds).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
    }

    #[test]
    fn save_and_load_file() {
        let (f, _) = small_forest(ModelKind::If);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_model(&f, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), f);
    }

    #[test]
    fn version_is_checked_first() {
        let (f, _) = small_forest(ModelKind::Eif);
        let mut v: serde_json::Value = serde_json::from_slice(&to_bytes(&f)).unwrap();
        v["version"] = 99.into();
        v["trees"] = serde_json::Value::Null;
        let err = Forest::from_json_slice(v.to_string().as_bytes()).unwrap_err();
        assert!(matches!(
            err,
            Error::VersionMismatch {
                found: 99,
                expected: 1
            }
        ));
    }

    #[test]
    fn rejects_corrupted_structure() {
        let (f, _) = small_forest(ModelKind::EifPlus);
        let base: serde_json::Value = serde_json::from_slice(&to_bytes(&f)).unwrap();

        let mut v = base.clone();
        v["trees"][0]["nodes"][0]["left"] = 0.into();
        assert!(matches!(
            Forest::from_json_slice(v.to_string().as_bytes()),
            Err(Error::MalformedModel(_))
        ));

        let mut v = base.clone();
        v["trees"][0]["nodes"][0]["plane"]["normal"] = serde_json::json!([1.0]);
        assert!(matches!(
            Forest::from_json_slice(v.to_string().as_bytes()),
            Err(Error::MalformedModel(_))
        ));

        let mut v = base.clone();
        v["trees"][0]["nodes"][0]["size"] = 3.into();
        assert!(Forest::from_json_slice(v.to_string().as_bytes()).is_err());

        let mut v = base;
        v.as_object_mut().unwrap().remove("version");
        assert!(matches!(
            Forest::from_json_slice(v.to_string().as_bytes()),
            Err(Error::MalformedModel(_))
        ));

        assert!(Forest::from_json_slice(b"not json").is_err());
    }
}
