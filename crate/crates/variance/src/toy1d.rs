use crate::error::{Error, Result};
use hqe_core::quad::gl;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Gauss–Legendre orders of the primary and check rules.
const ORDER: usize = 20;
const CHECK_ORDER: usize = 30;

/// Bounded test functions on [0, L] with their discontinuities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "shape")]
pub enum ToyObservable {
    Constant { value: f64 },
    /// (−1)^⌊x/width⌋.
    AlternatingStep { width: f64 },
    Cosine { frequency: f64 },
    /// 2·frac(x/period) − 1.
    Sawtooth { period: f64 },
}

impl ToyObservable {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Self::Constant { value } => value,
            Self::AlternatingStep { width } => {
                if (x / width).floor().rem_euclid(2.0) == 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
            Self::Cosine { frequency } => (frequency * x).cos(),
            Self::Sawtooth { period } => 2.0 * (x / period).fract() - 1.0,
        }
    }

    pub fn sup(&self) -> f64 {
        match *self {
            Self::Constant { value } => value.abs(),
            _ => 1.0,
        }
    }

    fn period(&self) -> Option<f64> {
        match *self {
            Self::AlternatingStep { width } => Some(width),
            Self::Sawtooth { period } => Some(period),
            _ => None,
        }
    }

    /// Spatial frequency used to size the quadrature panels.
    fn frequency(&self) -> f64 {
        match *self {
            Self::Cosine { frequency } => frequency.abs(),
            _ => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Constant { value } => value.is_finite(),
            Self::AlternatingStep { width } => width > 0.0,
            Self::Cosine { frequency } => frequency.is_finite(),
            Self::Sawtooth { period } => period > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("bad toy observable {self:?}")))
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Constant { value } => format!("constant_{value}"),
            Self::AlternatingStep { width } => format!("alternating_step_{width}"),
            Self::Cosine { frequency } => format!("cosine_{frequency}"),
            Self::Sawtooth { period } => format!("sawtooth_{period}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyMode {
    pub k: usize,
    pub nu: f64,
    pub matrix_element: f64,
    pub term: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToyVariance {
    pub length: f64,
    pub window: (f64, f64),
    pub observable: ToyObservable,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    /// M²/N.
    pub bound: f64,
    pub sup: f64,
    /// Largest change of any integral between the primary and check rules.
    pub quadrature_error: f64,
    pub modes: Vec<ToyMode>,
}

/// Integral of f over [0, L] split at the observable's jumps, with panels short enough
/// to resolve oscillation at wavenumber `omega`.
fn integrate(a: &ToyObservable, length: f64, omega: f64, order: usize, f: impl Fn(f64) -> f64) -> f64 {
    let mut cuts = vec![0.0];
    if let Some(p) = a.period() {
        let mut x = p;
        while x < length {
            cuts.push(x);
            x += p;
        }
    }
    cuts.push(length);
    let per_unit = (omega + a.frequency()) / PI + 0.5;
    cuts.windows(2)
        .map(|s| {
            let panels = ((s[1] - s[0]) * per_unit).ceil().max(1.0) as usize;
            let h = (s[1] - s[0]) / panels as f64;
            (0..panels).map(|j| gl(&f, s[0] + j as f64 * h, s[0] + (j + 1) as f64 * h, order)).sum::<f64>()
        })
        .sum()
}

/// Modes k with ν_k = (kπ/L)² in [lo, hi].
pub fn window_modes(length: f64, lo: f64, hi: f64) -> std::ops::RangeInclusive<usize> {
    let k0 = (length * lo.max(0.0).sqrt() / PI).ceil().max(1.0) as usize;
    let k1 = (length * hi.max(0.0).sqrt() / PI).floor() as usize;
    k0..=k1
}

/// (1/N)Σ_k |⟨ψ_k, aψ_k⟩ − ā|² over the Dirichlet modes ψ_k = √(2/L) sin(kπx/L) with ν_k in the window.
pub fn toy1d_variance(length: f64, window: (f64, f64), a: ToyObservable) -> Result<ToyVariance> {
    if !(length > 0.0 && length.is_finite()) || !(window.0 <= window.1) {
        return Err(Error::InvalidInput(format!("need L > 0 and lo ≤ hi, got L = {length}, window {window:?}")));
    }
    a.validate()?;
    let ks = window_modes(length, window.0, window.1);
    if ks.is_empty() {
        return Err(Error::EmptyWindow { lo: window.0, hi: window.1 });
    }
    let mean_at = |order| integrate(&a, length, 0.0, order, |x| a.eval(x)) / length;
    let (mean, mean_check) = (mean_at(ORDER), mean_at(CHECK_ORDER));
    let mut qerr = (mean - mean_check).abs();
    let mut modes = Vec::with_capacity(ks.clone().count());
    for k in ks {
        let w = k as f64 * PI / length;
        let elem = |order| integrate(&a, length, 2.0 * w, order, |x| a.eval(x) * (w * x).sin().powi(2)) * 2.0 / length;
        let (me, me_check) = (elem(ORDER), elem(CHECK_ORDER));
        qerr = qerr.max((me - me_check).abs());
        modes.push(ToyMode { k, nu: w * w, matrix_element: me, term: (me - mean).powi(2) });
    }
    let count = modes.len();
    let variance = modes.iter().map(|m| m.term).sum::<f64>() / count as f64;
    let sup = a.sup();
    Ok(ToyVariance {
        length,
        window,
        observable: a,
        count,
        mean,
        variance,
        bound: sup * sup / count as f64,
        sup,
        quadrature_error: qerr,
        modes,
    })
}

/// The three bounded test functions with M = 1 used for the inequality check.
pub fn standard_observables() -> [ToyObservable; 3] {
    [
        ToyObservable::AlternatingStep { width: 0.7 },
        ToyObservable::Cosine { frequency: 2.0 },
        ToyObservable::Sawtooth { period: 3.0 },
    ]
}
