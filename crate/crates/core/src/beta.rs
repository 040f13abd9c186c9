//! The fixed `q × d` matrix that maps the ensemble's `q` output columns onto
//! the `d` label columns before the loss is applied.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Construction variant.
///
/// `I` stacks the `d × d` identity over `q − d` rows of Uniform(0,1) draws,
/// `R` fills every entry with Uniform(0,1) draws. The `*N` variants then
/// divide every column by its sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BetaKind {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "I_n")]
    IN,
    #[serde(rename = "R")]
    R,
    #[serde(rename = "R_n")]
    RN,
}

impl BetaKind {
    pub const ALL: [BetaKind; 4] = [BetaKind::I, BetaKind::IN, BetaKind::R, BetaKind::RN];

    pub fn is_identity_based(self) -> bool {
        matches!(self, BetaKind::I | BetaKind::IN)
    }

    pub fn is_normalized(self) -> bool {
        matches!(self, BetaKind::IN | BetaKind::RN)
    }
}

impl fmt::Display for BetaKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BetaKind::I => "I",
            BetaKind::IN => "I_n",
            BetaKind::R => "R",
            BetaKind::RN => "R_n",
        })
    }
}

impl FromStr for BetaKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" => Ok(BetaKind::I),
            "I_n" | "In" | "i_n" | "in" => Ok(BetaKind::IN),
            "R" | "r" => Ok(BetaKind::R),
            "R_n" | "Rn" | "r_n" | "rn" => Ok(BetaKind::RN),
            other => Err(Error::InvalidBeta(format!("unknown beta kind '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BetaSpec {
    pub kind: BetaKind,
    pub q: usize,
    pub d: usize,
    pub seed: u64,
}

impl BetaSpec {
    pub fn new(kind: BetaKind, q: usize, d: usize, seed: u64) -> Self {
        BetaSpec { kind, q, d, seed }
    }

    /// `β = I_d`: the standard boosting configuration.
    pub fn identity(d: usize) -> Self {
        BetaSpec::new(BetaKind::I, d, d, 0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.d == 0 {
            return Err(Error::InvalidBeta(format!(
                "q and d must be positive (q={}, d={})",
                self.q, self.d
            )));
        }
        if self.kind.is_identity_based() && self.q < self.d {
            return Err(Error::InvalidBeta(format!(
                "kind {} needs q >= d (q={}, d={})",
                self.kind, self.q, self.d
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaMatrix {
    values: Array2<f64>,
    spec: BetaSpec,
}

impl BetaMatrix {
    /// Builds β from its spec. Draws are taken row-major from the seeded
    /// generator: only the rows below the identity block for `I`/`I_n`,
    /// every entry for `R`/`R_n`.
    pub fn build(spec: BetaSpec) -> Result<Self> {
        spec.validate()?;
        let BetaSpec { kind, q, d, seed } = spec;
        let mut gen = rng::seeded(seed);
        let mut values = Array2::zeros((q, d));
        let first_random_row = if kind.is_identity_based() {
            for k in 0..d {
                values[[k, k]] = 1.0;
            }
            d
        } else {
            0
        };
        for i in first_random_row..q {
            for j in 0..d {
                values[[i, j]] = rng::unit_uniform(&mut gen);
            }
        }
        if kind.is_normalized() {
            for (j, mut col) in values.columns_mut().into_iter().enumerate() {
                let sum = col.sum();
                if sum == 0.0 {
                    return Err(Error::InvalidBeta(format!("column {j} sums to zero")));
                }
                col.mapv_inplace(|v| v / sum);
            }
        }
        Ok(BetaMatrix { values, spec })
    }

    /// Reassembles a stored β, checking that its shape agrees with the spec.
    pub fn from_parts(spec: BetaSpec, values: Array2<f64>) -> Result<Self> {
        spec.validate()?;
        if values.dim() != (spec.q, spec.d) {
            return Err(Error::Dimension(format!(
                "beta values are {:?}, spec says ({}, {})",
                values.dim(),
                spec.q,
                spec.d
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBeta("non-finite beta entry".into()));
        }
        Ok(BetaMatrix { values, spec })
    }

    pub fn values(&self) -> ArrayView2<'_, f64> {
        self.values.view()
    }

    pub fn spec(&self) -> &BetaSpec {
        &self.spec
    }

    pub fn q(&self) -> usize {
        self.spec.q
    }

    pub fn d(&self) -> usize {
        self.spec.d
    }

    /// `F · β`.
    pub fn widen(&self, f: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        widen(f, self)
    }
}

/// Maps an `n × q` ensemble output to `n × d` label space.
pub fn widen(f: ArrayView2<'_, f64>, beta: &BetaMatrix) -> Result<Array2<f64>> {
    if f.ncols() != beta.q() {
        return Err(Error::Dimension(format!(
            "F has {} columns, beta has {} rows",
            f.ncols(),
            beta.q()
        )));
    }
    Ok(matmul(f, beta.values.view()))
}

/// Row-by-row product with a fixed summation order, so a given row of `a`
/// always produces bit-identical output whatever the other rows are.
pub(crate) fn matmul(a: ArrayView2<'_, f64>, b: ArrayView2<'_, f64>) -> Array2<f64> {
    debug_assert_eq!(a.ncols(), b.nrows());
    let (n, k) = a.dim();
    let m = b.ncols();
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        for j in 0..m {
            let mut acc = 0.0;
            for t in 0..k {
                acc += a[[i, t]] * b[[t, j]];
            }
            out[[i, j]] = acc;
        }
    }
    out
}
