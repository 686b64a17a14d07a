use std::fmt;
use std::str::FromStr;

use super::{make_example1_density, make_example2_density, make_gaussian, Density};
use crate::error::{invalid, Error, Result};
use crate::starbody::spec::KeyValues;

/// A named density: `gaussian:n=3`, `uniform:n=3`, `ex1:p=0.5,n=3`,
/// `ex2:s=0.25,n=3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySpec {
    Gaussian { n: usize },
    Uniform { n: usize },
    Example1 { p: f64, n: usize },
    Example2 { s: f64, n: usize },
}

impl DensitySpec {
    pub fn build(&self) -> Result<Density> {
        match *self {
            DensitySpec::Gaussian { n } => make_gaussian(n),
            DensitySpec::Uniform { n } => Density::uniform(n),
            DensitySpec::Example1 { p, n } => make_example1_density(p, n),
            DensitySpec::Example2 { s, n } => make_example2_density(s, n),
        }
    }
}

impl fmt::Display for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensitySpec::Gaussian { n } => write!(f, "gaussian:n={n}"),
            DensitySpec::Uniform { n } => write!(f, "uniform:n={n}"),
            DensitySpec::Example1 { p, n } => write!(f, "ex1:p={p},n={n}"),
            DensitySpec::Example2 { s, n } => write!(f, "ex2:s={s},n={n}"),
        }
    }
}

impl FromStr for DensitySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut kv = KeyValues::parse(s, &["p", "s", "n"])?;
        let spec = match kv.name.as_str() {
            "gaussian" => DensitySpec::Gaussian { n: kv.int("n")? },
            "uniform" => DensitySpec::Uniform { n: kv.int("n")? },
            "ex1" => DensitySpec::Example1 { p: kv.real("p")?, n: kv.int("n")? },
            "ex2" => DensitySpec::Example2 { s: kv.real("s")?, n: kv.int("n")? },
            other => return invalid(format!("unknown density `{other}`")),
        };
        kv.finish()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        for s in ["gaussian:n=3", "uniform:n=3", "ex1:p=0.5,n=3", "ex2:s=0.25,n=3"] {
            let d: DensitySpec = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
            assert!(d.build().is_ok());
        }
    }

    #[test]
    fn rejects_unknown() {
        let e = "poisson:n=3".parse::<DensitySpec>().unwrap_err();
        assert!(e.to_string().contains("poisson"));
        assert!("gaussian:n=3,s=0.1".parse::<DensitySpec>().is_err());
    }
}
