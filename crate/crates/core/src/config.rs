//! Flat `key=value` config strings shared by kernels, flows and observables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parsed `key=value` pairs; every key must be consumed before [`Kv::finish`].
#[derive(Debug, Clone)]
pub struct Kv {
    source: String,
    map: BTreeMap<String, String>,
}

impl Kv {
    pub fn parse(s: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for tok in s.split_whitespace() {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("`{tok}` is not key=value")))?;
            if k.is_empty() || v.is_empty() {
                return Err(Error::Config(format!("`{tok}` has an empty key or value")));
            }
            if map.insert(k.to_string(), v.to_string()).is_some() {
                return Err(Error::Config(format!("duplicate key `{k}`")));
            }
        }
        Ok(Self {
            source: s.trim().to_string(),
            map,
        })
    }

    pub fn take(&mut self, key: &str) -> Result<String> {
        self.map
            .remove(key)
            .ok_or_else(|| Error::Config(format!("missing `{key}` in `{}`", self.source)))
    }

    pub fn take_opt(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    pub fn take_f64(&mut self, key: &str) -> Result<f64> {
        let v = self.take(key)?;
        parse_f64(key, &v)
    }

    pub fn take_f64_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take_opt(key) {
            Some(v) => parse_f64(key, &v),
            None => Ok(default),
        }
    }

    /// A comma-separated vector, e.g. `v=1,0.5`.
    pub fn take_vec(&mut self, key: &str) -> Result<Vec<f64>> {
        let v = self.take(key)?;
        v.split(',').map(|x| parse_f64(key, x)).collect()
    }

    pub fn take_vec_or(&mut self, key: &str, default: Vec<f64>) -> Result<Vec<f64>> {
        match self.take_opt(key) {
            Some(v) => v.split(',').map(|x| parse_f64(key, x)).collect(),
            None => Ok(default),
        }
    }

    pub fn finish(self) -> Result<()> {
        if let Some(k) = self.map.keys().next() {
            return Err(Error::Config(format!("unknown key `{k}` in `{}`", self.source)));
        }
        Ok(())
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("`{key}={v}` is not a number")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_rejects_leftovers() {
        let mut kv = Kv::parse("family=stable alpha=0.5").unwrap();
        assert_eq!(kv.take("family").unwrap(), "stable");
        assert_eq!(kv.take_f64("alpha").unwrap(), 0.5);
        kv.finish().unwrap();

        let mut kv = Kv::parse("family=stable alpha=0.5 colour=red").unwrap();
        kv.take("family").unwrap();
        kv.take_f64("alpha").unwrap();
        assert!(matches!(kv.finish(), Err(Error::Config(_))));
    }

    #[test]
    fn malformed_tokens() {
        assert!(Kv::parse("alpha").is_err());
        assert!(Kv::parse("alpha=").is_err());
        assert!(Kv::parse("a=1 a=2").is_err());
        let mut kv = Kv::parse("alpha=x").unwrap();
        assert!(kv.take_f64("alpha").is_err());
    }

    #[test]
    fn vectors() {
        let mut kv = Kv::parse("v=1,-2.5").unwrap();
        assert_eq!(kv.take_vec("v").unwrap(), vec![1.0, -2.5]);
    }
}
