//! Flat `key = value` configuration with `#` comments.
//!
//! Later sources override earlier ones: built-in defaults, then a config
//! file, then command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::adversary::{AttackKind, BlockPlacement, EveStrategy};
use crate::analytics::{CascadeTable, GainModel, Protocol, QberModel};
use crate::source::LinkParams;
use crate::{Error, Result};

/// Every key the reports understand.
pub const KNOWN_KEYS: &[&str] = &[
    "mu",
    "alpha",
    "l",
    "gamma_c",
    "eta_b",
    "d_b",
    "c",
    "rep_rate",
    "e",
    "e_det",
    "t_link",
    "protocol",
    "attack",
    "blocking",
    "forward_fraction",
    "n_pulses",
    "gamma_split",
    "seed",
    "cascade_table",
    "eta_in_gamma",
    "account_cm",
    "start",
    "stop",
    "points",
    "scale",
    "distances",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut s = Self::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: origin.to_string(),
                line: i + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
            s.set(key.trim(), value.trim())
                .map_err(|e| err(e.to_string()))?;
        }
        Ok(s)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let key = key.trim().replace('-', "_");
        let key = if key == "distance" {
            "l".to_string()
        } else {
            key
        };
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(Error::Config(format!("unknown key {key:?}")));
        }
        self.values.insert(key, value.into());
        Ok(())
    }

    /// Applies `other` on top of `self`.
    pub fn overlay(&mut self, other: &Settings) {
        for (k, v) in &other.values {
            self.values.insert(k.clone(), v.clone());
        }
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.raw(key)
            .map(|v| {
                v.parse::<T>()
                    .map_err(|e| Error::Config(format!("{key} = {v:?}: {e}")))
            })
            .transpose()
    }

    pub fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }

    /// Comma-separated list of reals.
    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|x| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Config(format!("{key}: {x:?}: {e}")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Overrides the link fields present in these settings.
    pub fn apply_link(&self, mut p: LinkParams) -> Result<LinkParams> {
        let fields: [(&str, &mut f64); 8] = [
            ("mu", &mut p.mu),
            ("alpha", &mut p.alpha),
            ("l", &mut p.l),
            ("gamma_c", &mut p.gamma_c),
            ("eta_b", &mut p.eta_b),
            ("d_b", &mut p.d_b),
            ("c", &mut p.c),
            ("rep_rate", &mut p.rep_rate),
        ];
        for (key, slot) in fields {
            if let Some(v) = self.get::<f64>(key)? {
                *slot = v;
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub fn gain_model(&self) -> Result<GainModel> {
        let cascade = match self.raw("cascade_table") {
            Some(path) => CascadeTable::from_file(path)?,
            None => CascadeTable::default(),
        };
        Ok(GainModel {
            cascade,
            eta_in_gamma: self.flag("eta_in_gamma")?,
            account_cm: self.flag("account_cm")?,
        })
    }

    /// `e` pins a constant QBER; otherwise the detector model with `e_det`.
    pub fn qber_model(&self) -> Result<QberModel> {
        if let Some(e) = self.get::<f64>("e")? {
            return Ok(QberModel::Constant(e));
        }
        let e_det = self.get::<f64>("e_det")?.unwrap_or(0.0248);
        Ok(QberModel::Detector { e_det })
    }

    pub fn protocol(&self, default: Protocol) -> Result<Protocol> {
        Ok(self.get::<Protocol>("protocol")?.unwrap_or(default))
    }

    pub fn strategy(&self) -> Result<EveStrategy> {
        let kind = self.get::<AttackKind>("attack")?.unwrap_or_default();
        let forward_fraction = self.get::<f64>("forward_fraction")?.unwrap_or(0.5);
        let blocking = match self.raw("blocking").unwrap_or("forward") {
            "forward" | "forward-only" | "forward_only" => BlockPlacement::ForwardOnly,
            "split" | "split-both-paths" | "split_both_paths" => {
                BlockPlacement::SplitBothPaths { forward_fraction }
            }
            other => return Err(Error::Config(format!("unknown blocking {other:?}"))),
        };
        let s = EveStrategy { kind, blocking };
        s.validate()?;
        Ok(s)
    }
}
