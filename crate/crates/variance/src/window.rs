use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Default relative enlargement of I into I'.
pub const DEFAULT_MARGIN: f64 = 0.1;

/// J ⊂ (1/4, ∞) in ν, its λ-image I and the enlarged I'.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralWindow {
    pub j: (f64, f64),
    pub i: (f64, f64),
    pub i_prime: (f64, f64),
}

impl SpectralWindow {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        Self::with_margin(lo, hi, DEFAULT_MARGIN)
    }

    pub fn with_margin(lo: f64, hi: f64, margin: f64) -> Result<Self> {
        if !(lo > 0.25 + 1e-9 && hi >= lo && hi.is_finite()) {
            return Err(Error::InvalidInput(format!("window [{lo}, {hi}] must lie in (1/4, ∞)")));
        }
        let i = ((lo - 0.25).sqrt(), (hi - 0.25).sqrt());
        let w = i.1 - i.0;
        let i_prime = ((i.0 - margin * w).max(0.0), i.1 + margin * w);
        Ok(Self { j: (lo, hi), i, i_prime })
    }

    pub fn contains(&self, nu: f64) -> bool {
        nu >= self.j.0 && nu <= self.j.1
    }

    /// Parses "lo:hi".
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s.split_once(':').ok_or_else(|| Error::InvalidInput(format!("window {s:?} is not lo:hi")))?;
        let p = |x: &str| x.trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("window bound {x:?}: {e}")));
        Self::new(p(a)?, p(b)?)
    }
}
