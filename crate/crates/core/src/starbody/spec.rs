//! The `name:key=value{,key=value}` mini-format for naming bodies.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use super::{make_ball, make_body_k, make_cube, make_example2_body, make_lp_ball};
use super::{BodyKSpec, PBallSpec, StarBody};
use crate::error::{invalid, Error, Result};

/// A named body from the mini-format: `lp:p=0.5,n=3`, `cube:n=4`,
/// `ball:n=3`, `bodyK:p=0.5,n=4`, `ex2:p=0.5,n=3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BodySpec {
    Ball { n: usize },
    Lp { p: f64, n: usize },
    Cube { n: usize },
    BodyK { p: f64, n: usize },
    Example2 { p: f64, n: usize },
}

impl BodySpec {
    pub fn build(&self) -> Result<StarBody> {
        match *self {
            BodySpec::Ball { n } => make_ball(n),
            BodySpec::Lp { p, n } => make_lp_ball(&PBallSpec::new(p, n)?),
            BodySpec::Cube { n } => make_cube(n),
            BodySpec::BodyK { p, n } => make_body_k(&BodyKSpec::new(p, n)?),
            BodySpec::Example2 { p, n } => make_example2_body(p, n),
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            BodySpec::Ball { n }
            | BodySpec::Lp { n, .. }
            | BodySpec::Cube { n }
            | BodySpec::BodyK { n, .. }
            | BodySpec::Example2 { n, .. } => n,
        }
    }

    /// The convexity exponent the construction is known to have.
    pub fn known_exponent(&self) -> f64 {
        match *self {
            BodySpec::Ball { .. } | BodySpec::Cube { .. } => 1.0,
            BodySpec::Lp { p, .. } | BodySpec::BodyK { p, .. } | BodySpec::Example2 { p, .. } => p,
        }
    }
}

impl fmt::Display for BodySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodySpec::Ball { n } => write!(f, "ball:n={n}"),
            BodySpec::Lp { p, n } => write!(f, "lp:p={p},n={n}"),
            BodySpec::Cube { n } => write!(f, "cube:n={n}"),
            BodySpec::BodyK { p, n } => write!(f, "bodyK:p={p},n={n}"),
            BodySpec::Example2 { p, n } => write!(f, "ex2:p={p},n={n}"),
        }
    }
}

impl FromStr for BodySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(s, &["p", "n"])?;
        let spec = match kv.name.as_str() {
            "ball" => BodySpec::Ball { n: kv.int("n")? },
            "cube" => BodySpec::Cube { n: kv.int("n")? },
            "lp" => BodySpec::Lp { p: kv.real("p")?, n: kv.int("n")? },
            "bodyK" => BodySpec::BodyK { p: kv.real("p")?, n: kv.int("n")? },
            "ex2" => BodySpec::Example2 { p: kv.real("p")?, n: kv.int("n")? },
            other => return invalid(format!("unknown body `{other}`")),
        };
        kv.finish()?;
        Ok(spec)
    }
}

/// Parsed `name:key=value{,key=value}`; keys are consumed as they are read so
/// leftovers can be reported.
pub(crate) struct KeyValues {
    pub name: String,
    values: BTreeMap<String, String>,
}

impl KeyValues {
    pub fn parse(s: &str, allowed: &[&str]) -> Result<Self> {
        let (name, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("expected `name:key=value`, got `{s}`")))?;
        if name.is_empty() {
            return invalid(format!("missing name in `{s}`"));
        }
        let mut values = BTreeMap::new();
        for item in rest.split(',') {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("expected `key=value`, got `{item}`")))?;
            if !allowed.contains(&k) {
                return invalid(format!("unknown key `{k}` in `{s}`"));
            }
            if values.insert(k.to_string(), v.to_string()).is_some() {
                return invalid(format!("duplicate key `{k}` in `{s}`"));
            }
        }
        Ok(Self { name: name.to_string(), values })
    }

    fn take(&mut self, key: &str) -> Result<String> {
        self.values
            .remove(key)
            .ok_or_else(|| Error::InvalidInput(format!("`{}` needs key `{key}`", self.name)))
    }

    pub fn real(&mut self, key: &str) -> Result<f64> {
        let v = self.take(key)?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::InvalidInput(format!("bad value `{v}` for `{key}`")))
    }

    pub fn int(&mut self, key: &str) -> Result<usize> {
        let v = self.take(key)?;
        v.parse::<usize>()
            .map_err(|_| Error::InvalidInput(format!("bad value `{v}` for `{key}`")))
    }

    pub fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            Some(k) => invalid(format!("key `{k}` not used by `{}`", self.name)),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_body() {
        assert_eq!("ball:n=3".parse::<BodySpec>().unwrap(), BodySpec::Ball { n: 3 });
        assert_eq!("cube:n=4".parse::<BodySpec>().unwrap(), BodySpec::Cube { n: 4 });
        assert_eq!(
            "lp:p=0.5,n=3".parse::<BodySpec>().unwrap(),
            BodySpec::Lp { p: 0.5, n: 3 }
        );
        assert_eq!(
            "bodyK:n=4,p=0.5".parse::<BodySpec>().unwrap(),
            BodySpec::BodyK { p: 0.5, n: 4 }
        );
        assert_eq!(
            "ex2:p=0.5,n=3".parse::<BodySpec>().unwrap(),
            BodySpec::Example2 { p: 0.5, n: 3 }
        );
    }

    #[test]
    fn display_round_trips() {
        for s in ["ball:n=3", "lp:p=0.5,n=3", "bodyK:p=0.25,n=5", "ex2:p=0.5,n=3"] {
            assert_eq!(s.parse::<BodySpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn errors_name_the_bad_token() {
        let msg = |s: &str| s.parse::<BodySpec>().unwrap_err().to_string();
        assert!(msg("sphere:n=3").contains("sphere"));
        assert!(msg("lp:p=0.5,q=3").contains("`q`"));
        assert!(msg("lp:p=abc,n=3").contains("abc"));
        assert!(msg("lp:p=0.5").contains("`n`"));
        assert!(msg("ball:n=3,p=1").contains("`p`"));
        assert!(msg("ball").contains("ball"));
    }
}
