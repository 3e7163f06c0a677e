//! Compact `kind:key=value,...` syntax for targets and kernels, as accepted
//! on the command line alongside the JSON forms.
//!
//! ```text
//! gaussian:d=3            mixture:d=1,delta=1.5      pseudo_huber:d=2
//! logistic:csv=data.csv   imq:c=1,beta=-0.5          gaussian:h=median
//! matern32                imq:h=median
//! ```

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernels::{Bandwidth, KernelSpec};
use crate::targets::TargetSpec;

struct Compact<'a> {
    kind: &'a str,
    params: BTreeMap<&'a str, &'a str>,
}

impl<'a> Compact<'a> {
    fn parse(s: &'a str) -> Result<Self> {
        let s = s.trim();
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
            if params.insert(k.trim(), v.trim()).is_some() {
                return Err(Error::Parse(format!("duplicate key {k:?}")));
            }
        }
        Ok(Self {
            kind: kind.trim(),
            params,
        })
    }

    fn take(&mut self, keys: &[&str]) -> Option<&'a str> {
        keys.iter().find_map(|k| self.params.remove(*k))
    }

    fn num(&mut self, keys: &[&str]) -> Result<Option<f64>> {
        self.take(keys)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("{}: not a number: {v:?}", keys[0])))
            })
            .transpose()
    }

    fn dim(&mut self) -> Result<usize> {
        let v = self
            .take(&["d", "dim"])
            .ok_or_else(|| Error::Parse(format!("{}: missing d=<dimension>", self.kind)))?;
        v.parse()
            .map_err(|_| Error::Parse(format!("dimension must be a positive integer, got {v:?}")))
    }

    fn finish(self) -> Result<()> {
        match self.params.keys().next() {
            Some(k) => Err(Error::Parse(format!("{}: unknown parameter {k:?}", self.kind))),
            None => Ok(()),
        }
    }
}

impl FromStr for TargetSpec {
    type Err = Error;

    /// Accepts the compact syntax or a JSON object.
    fn from_str(s: &str) -> Result<Self> {
        if s.trim_start().starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let mut c = Compact::parse(s)?;
        let spec = match c.kind {
            "gaussian" | "normal" => {
                let dim = c.dim()?;
                let mean = c
                    .take(&["mean"])
                    .map(|m| {
                        m.split(';')
                            .map(|v| v.trim().parse::<f64>())
                            .collect::<std::result::Result<Vec<_>, _>>()
                            .map_err(|_| Error::Parse(format!("mean must be ';'-separated numbers, got {m:?}")))
                    })
                    .transpose()?;
                TargetSpec::Gaussian { dim, mean }
            }
            "mixture" => TargetSpec::Mixture {
                dim: c.dim()?,
                delta: c.num(&["delta"])?.unwrap_or(1.5),
            },
            "pseudo_huber" | "pseudohuber" => TargetSpec::PseudoHuber { dim: c.dim()? },
            "logistic" => TargetSpec::Logistic {
                covariates: None,
                labels: None,
                csv: Some(PathBuf::from(
                    c.take(&["csv"])
                        .ok_or_else(|| Error::Parse("logistic: missing csv=<path>".into()))?,
                )),
            },
            other => return Err(Error::Parse(format!("unknown target kind {other:?}"))),
        };
        c.finish()?;
        Ok(spec)
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim_start().starts_with('{') {
            return Ok(serde_json::from_str(s)?);
        }
        let mut c = Compact::parse(s)?;
        let spec = match c.kind {
            "imq" => KernelSpec::Imq {
                c: c.num(&["c"])?.unwrap_or(1.0),
                beta: c.num(&["beta"])?.unwrap_or(-0.5),
                h: c.take(&["h"]).map(str::parse::<Bandwidth>).transpose()?,
            },
            "gaussian" | "rbf" => KernelSpec::Gaussian {
                h: c.take(&["h"])
                    .ok_or_else(|| Error::Parse("gaussian kernel: missing h=<bandwidth|median>".into()))?
                    .parse()?,
            },
            "matern32" | "matern" => KernelSpec::Matern32,
            other => return Err(Error::Parse(format!("unknown kernel kind {other:?}"))),
        };
        c.finish()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_targets() {
        assert_eq!(
            "gaussian:d=1".parse::<TargetSpec>().unwrap(),
            TargetSpec::Gaussian { dim: 1, mean: None }
        );
        assert_eq!(
            "gaussian:d=2,mean=1;-1".parse::<TargetSpec>().unwrap(),
            TargetSpec::Gaussian {
                dim: 2,
                mean: Some(vec![1.0, -1.0])
            }
        );
        assert_eq!(
            "mixture:d=2,delta=2".parse::<TargetSpec>().unwrap(),
            TargetSpec::Mixture { dim: 2, delta: 2.0 }
        );
        assert_eq!(
            r#"{"kind":"pseudo_huber","dim":3}"#.parse::<TargetSpec>().unwrap(),
            TargetSpec::PseudoHuber { dim: 3 }
        );
        assert!("gaussian".parse::<TargetSpec>().is_err());
        assert!("gaussian:d=1,foo=2".parse::<TargetSpec>().is_err());
        assert!("cauchy:d=1".parse::<TargetSpec>().is_err());
    }

    #[test]
    fn parses_kernels() {
        assert_eq!(
            "imq:c=1,beta=-0.5".parse::<KernelSpec>().unwrap(),
            KernelSpec::Imq {
                c: 1.0,
                beta: -0.5,
                h: None
            }
        );
        assert_eq!(
            "gaussian:h=median".parse::<KernelSpec>().unwrap(),
            KernelSpec::Gaussian { h: Bandwidth::Median }
        );
        assert_eq!(
            "gaussian:h=2".parse::<KernelSpec>().unwrap(),
            KernelSpec::Gaussian {
                h: Bandwidth::Fixed(2.0)
            }
        );
        assert_eq!("matern32".parse::<KernelSpec>().unwrap(), KernelSpec::Matern32);
        assert!("gaussian".parse::<KernelSpec>().is_err());
        assert!("imq:beta=x".parse::<KernelSpec>().is_err());
    }
}
