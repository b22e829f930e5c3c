//! A directory holding a `manifest` of `key=value` lines and one
//! `<role>.<scope>.model` file per cell.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use super::{DepMode, PipelineError, Scope};
use crate::classifier::{read_model, write_model, Model};
use crate::corpus::Role;
use crate::features::FeatureConfig;
use crate::scalar::Scalar;

pub const MANIFEST_HEADER: &str = "pasakit-modelset v1";

/// One model per (role, scope), with the configuration they were trained
/// under.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelSet<F> {
    pub features: FeatureConfig,
    pub dep_mode: DepMode,
    pub roles: Vec<Role>,
    pub candidate_pos: Option<BTreeSet<String>>,
    models: BTreeMap<(Role, Scope), Model<F>>,
}

fn join<T: AsRef<str>>(items: impl IntoIterator<Item = T>) -> String {
    items
        .into_iter()
        .map(|s| s.as_ref().to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl<F: Scalar> ModelSet<F> {
    pub fn new(
        features: FeatureConfig,
        dep_mode: DepMode,
        roles: Vec<Role>,
        candidate_pos: Option<BTreeSet<String>>,
        models: impl IntoIterator<Item = ((Role, Scope), Model<F>)>,
    ) -> Result<Self, PipelineError> {
        let models: BTreeMap<_, _> = models.into_iter().collect();
        let complete = models.len() == roles.len() * 2
            && roles
                .iter()
                .all(|r| Scope::ALL.iter().all(|&s| models.contains_key(&(r.clone(), s))));
        if !complete {
            return Err(PipelineError::Manifest(format!(
                "expected {} models for roles {}, got {}",
                roles.len() * 2,
                join(roles.iter().map(Role::as_str)),
                models.len()
            )));
        }
        Ok(ModelSet {
            features,
            dep_mode,
            roles,
            candidate_pos,
            models,
        })
    }

    pub fn model(&self, role: &Role, scope: Scope) -> &Model<F> {
        &self.models[&(role.clone(), scope)]
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(Role, Scope), &Model<F>)> {
        self.models.iter()
    }

    pub fn manifest(&self) -> String {
        let f = &self.features;
        let pos = match &self.candidate_pos {
            Some(set) => join(set),
            None => "*".to_string(),
        };
        let mut out = String::new();
        out.push_str(MANIFEST_HEADER);
        out.push('\n');
        for (k, v) in [
            ("roles", join(self.roles.iter().map(Role::as_str))),
            ("features", f.groups()),
            ("case_frame", f.use_case_frame.to_string()),
            ("dep", self.dep_mode.name().to_string()),
            ("markers", join(&f.marker_set)),
            ("divisors", join(f.distance_divisors.iter().map(|d| d.to_string()))),
            ("dep_max_steps", f.dep_max_steps.to_string()),
            ("window_unigram", f.window_unigram.to_string()),
            ("window_ngram", f.window_ngram.to_string()),
            ("pair_window", f.pair_window.to_string()),
            ("candidate_pos", pos),
        ] {
            out.push_str(&format!("{k}={v}\n"));
        }
        out
    }

    pub fn save(&self, dir: &Path) -> Result<(), PipelineError> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("manifest"), self.manifest())?;
        for ((role, scope), model) in &self.models {
            let file = fs::File::create(dir.join(format!("{role}.{scope}.model")))?;
            let mut w = BufWriter::new(file);
            write_model(model, &mut w)?;
            w.flush()?;
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(dir.join("manifest"))?;
        let mut lines = text.lines();
        if lines.next() != Some(MANIFEST_HEADER) {
            return Err(PipelineError::Manifest(format!("expected `{MANIFEST_HEADER}` header")));
        }
        let mut kv = BTreeMap::new();
        for line in lines.filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| PipelineError::Manifest(format!("malformed line `{line}`")))?;
            kv.insert(k.to_string(), v.to_string());
        }
        let get = |k: &str| {
            kv.get(k)
                .map(String::as_str)
                .ok_or_else(|| PipelineError::Manifest(format!("missing key `{k}`")))
        };
        let num = |k: &str| -> Result<usize, PipelineError> {
            get(k)?
                .parse()
                .map_err(|_| PipelineError::Manifest(format!("malformed `{k}`")))
        };
        let list = |v: &str| -> Vec<String> {
            if v.is_empty() {
                Vec::new()
            } else {
                v.split(',').map(str::to_string).collect()
            }
        };
        let mut features = FeatureConfig::with_groups(get("features")?)?;
        features.use_case_frame = get("case_frame")? == "true";
        features.marker_set = list(get("markers")?);
        features.distance_divisors = list(get("divisors")?)
            .iter()
            .map(|d| d.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| PipelineError::Manifest("malformed `divisors`".into()))?;
        features.dep_max_steps = num("dep_max_steps")?;
        features.window_unigram = num("window_unigram")?;
        features.window_ngram = num("window_ngram")?;
        features.pair_window = num("pair_window")?;
        features.validate()?;
        let dep_mode: DepMode = get("dep")?.parse().map_err(PipelineError::Manifest)?;
        let roles: Vec<Role> = list(get("roles")?).into_iter().map(Role::new).collect();
        let candidate_pos = match get("candidate_pos")? {
            "*" => None,
            v => Some(list(v).into_iter().collect()),
        };
        let mut models = Vec::new();
        for role in &roles {
            for scope in Scope::ALL {
                let path = dir.join(format!("{role}.{scope}.model"));
                let file = fs::File::open(&path)?;
                let model = read_model::<F, _>(BufReader::new(file))?;
                models.push(((role.clone(), scope), model));
            }
        }
        ModelSet::new(features, dep_mode, roles, candidate_pos, models)
    }
}
