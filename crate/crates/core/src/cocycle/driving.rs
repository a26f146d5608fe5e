//! The driving system: a two-sided i.i.d. or Markov shift over `S` symbols,
//! realized through seeded finite orbit windows.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ROW_SUM_TOL: f64 = 1e-12;
const STATIONARY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DrivingKind {
    Iid {
        probabilities: Vec<f64>,
    },
    Markov {
        transition: Vec<Vec<f64>>,
        stationary: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DrivingKind", into = "DrivingKind")]
pub struct DrivingSystem {
    kind: DrivingKind,
}

impl TryFrom<DrivingKind> for DrivingSystem {
    type Error = Error;

    fn try_from(kind: DrivingKind) -> Result<Self> {
        DrivingSystem::new(kind)
    }
}

impl From<DrivingSystem> for DrivingKind {
    fn from(d: DrivingSystem) -> Self {
        d.kind
    }
}

fn check_distribution(p: &[f64], field: &str) -> Result<()> {
    if p.is_empty() {
        return Err(Error::config(field, "empty probability vector"));
    }
    if p.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::config(
            field,
            "probabilities must be finite and nonnegative",
        ));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > ROW_SUM_TOL {
        return Err(Error::config(
            field,
            format!("probabilities sum to {s}, not 1"),
        ));
    }
    Ok(())
}

impl DrivingSystem {
    pub fn new(kind: DrivingKind) -> Result<Self> {
        match &kind {
            DrivingKind::Iid { probabilities } => {
                check_distribution(probabilities, "driving.probabilities")?
            }
            DrivingKind::Markov {
                transition,
                stationary,
            } => {
                let s = transition.len();
                check_distribution(stationary, "driving.stationary")?;
                if stationary.len() != s {
                    return Err(Error::config(
                        "driving.stationary",
                        "length does not match the transition matrix",
                    ));
                }
                for (i, row) in transition.iter().enumerate() {
                    if row.len() != s {
                        return Err(Error::config(
                            format!("driving.transition[{i}]"),
                            "transition matrix is not square",
                        ));
                    }
                    check_distribution(row, &format!("driving.transition[{i}]"))?;
                }
                for j in 0..s {
                    let pj: f64 = (0..s).map(|i| stationary[i] * transition[i][j]).sum();
                    if (pj - stationary[j]).abs() > STATIONARY_TOL {
                        return Err(Error::config(
                            "driving.stationary",
                            format!("not invariant: component {j} maps to {pj}"),
                        ));
                    }
                }
            }
        }
        Ok(DrivingSystem { kind })
    }

    pub fn iid(probabilities: Vec<f64>) -> Result<Self> {
        DrivingSystem::new(DrivingKind::Iid { probabilities })
    }

    pub fn markov(transition: Vec<Vec<f64>>, stationary: Vec<f64>) -> Result<Self> {
        DrivingSystem::new(DrivingKind::Markov {
            transition,
            stationary,
        })
    }

    /// Single symbol driven with probability one.
    pub fn constant() -> Self {
        DrivingSystem {
            kind: DrivingKind::Iid {
                probabilities: vec![1.0],
            },
        }
    }

    pub fn kind(&self) -> &DrivingKind {
        &self.kind
    }

    pub fn alphabet_size(&self) -> usize {
        match &self.kind {
            DrivingKind::Iid { probabilities } => probabilities.len(),
            DrivingKind::Markov { stationary, .. } => stationary.len(),
        }
    }

    /// One-dimensional marginal `m` of the shift-invariant measure.
    pub fn marginal(&self) -> &[f64] {
        match &self.kind {
            DrivingKind::Iid { probabilities } => probabilities,
            DrivingKind::Markov { stationary, .. } => stationary,
        }
    }

    /// Probability of a finite forward word under the stationary measure.
    pub fn word_probability(&self, word: &[usize]) -> f64 {
        let Some((&first, rest)) = word.split_first() else {
            return 1.0;
        };
        match &self.kind {
            DrivingKind::Iid { probabilities } => word.iter().map(|&s| probabilities[s]).product(),
            DrivingKind::Markov {
                transition,
                stationary,
            } => {
                let mut p = stationary[first];
                let mut prev = first;
                for &s in rest {
                    p *= transition[prev][s];
                    prev = s;
                }
                p
            }
        }
    }

    /// Samples a two-sided orbit window `[-n_back, n_fwd]`.
    ///
    /// The symbol at index 0 is drawn from the marginal, forward symbols from
    /// the chain, and backward symbols from the time-reversed chain
    /// `P̂_ij = π_j P_ji / π_i`.
    pub fn sample_orbit(&self, seed: u64, n_back: usize, n_fwd: usize) -> Orbit {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut symbols = vec![0usize; n_back + n_fwd + 1];
        let zero = n_back;
        match &self.kind {
            DrivingKind::Iid { probabilities } => {
                symbols[zero] = draw(&mut rng, probabilities.iter().copied());
                for k in 1..=n_fwd {
                    symbols[zero + k] = draw(&mut rng, probabilities.iter().copied());
                }
                for k in 1..=n_back {
                    symbols[zero - k] = draw(&mut rng, probabilities.iter().copied());
                }
            }
            DrivingKind::Markov {
                transition,
                stationary,
            } => {
                symbols[zero] = draw(&mut rng, stationary.iter().copied());
                for k in 1..=n_fwd {
                    let prev = symbols[zero + k - 1];
                    symbols[zero + k] = draw(&mut rng, transition[prev].iter().copied());
                }
                for k in 1..=n_back {
                    let next = symbols[zero - k + 1];
                    let reversed = (0..stationary.len()).map(|j| {
                        if stationary[next] > 0.0 {
                            stationary[j] * transition[j][next] / stationary[next]
                        } else {
                            0.0
                        }
                    });
                    symbols[zero - k] = draw(&mut rng, reversed);
                }
            }
        }
        Orbit {
            symbols,
            origin: zero as i64,
            seed,
            window: (n_back, n_fwd),
        }
    }
}

/// Seed of the `index`-th independent work unit under a base seed
/// (splitmix64 finalizer, so neighbouring indices decorrelate).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn draw(rng: &mut ChaCha8Rng, weights: impl Iterator<Item = f64> + Clone) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, w) in weights.enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_positive
}

/// A finite window of a two-sided symbol sequence, indexed by `p ∈ [-n_back, n_fwd]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Orbit {
    symbols: Vec<usize>,
    /// Storage index of position 0.
    origin: i64,
    pub seed: u64,
    pub window: (usize, usize),
}

impl Orbit {
    /// Builds an orbit from an explicit forward word starting at position 0.
    pub fn from_forward(word: Vec<usize>) -> Self {
        let n = word.len().saturating_sub(1);
        Orbit {
            symbols: word,
            origin: 0,
            seed: 0,
            window: (0, n),
        }
    }

    /// Builds an orbit with `back` symbols at negative positions followed by
    /// `fwd` at positions `0..`.
    pub fn from_parts(back: &[usize], fwd: &[usize]) -> Self {
        let mut symbols = back.to_vec();
        symbols.extend_from_slice(fwd);
        Orbit {
            symbols,
            origin: back.len() as i64,
            seed: 0,
            window: (back.len(), fwd.len().saturating_sub(1)),
        }
    }

    /// Periodic orbit repeating `pattern` on `[-n_back, n_fwd]`, with
    /// `pattern[0]` at position 0.
    pub fn periodic(pattern: &[usize], n_back: usize, n_fwd: usize) -> Self {
        let period = pattern.len() as i64;
        let symbols = (-(n_back as i64)..=n_fwd as i64)
            .map(|p| pattern[p.rem_euclid(period) as usize])
            .collect();
        Orbit {
            symbols,
            origin: n_back as i64,
            seed: 0,
            window: (n_back, n_fwd),
        }
    }

    pub fn min_index(&self) -> i64 {
        -self.origin
    }

    pub fn max_index(&self) -> i64 {
        self.symbols.len() as i64 - 1 - self.origin
    }

    pub fn try_symbol(&self, p: i64) -> Option<usize> {
        let idx = p + self.origin;
        (idx >= 0)
            .then(|| self.symbols.get(idx as usize).copied())
            .flatten()
    }

    pub fn symbol(&self, p: i64) -> Result<usize> {
        self.try_symbol(p).ok_or_else(|| {
            Error::Orbit(format!(
                "position {p} outside window [{}, {}]",
                self.min_index(),
                self.max_index()
            ))
        })
    }

    /// Symbols at positions `p, p+1, …, p+n-1`.
    pub fn word(&self, p: i64, n: usize) -> Result<Vec<usize>> {
        (0..n as i64).map(|k| self.symbol(p + k)).collect()
    }

    /// Re-indexes so that old position `p` becomes position 0 (the orbit of `σ^p(ω)`).
    pub fn shift(&self, p: i64) -> Orbit {
        Orbit {
            symbols: self.symbols.clone(),
            origin: self.origin + p,
            seed: self.seed,
            window: (
                (self.origin + p).max(0) as usize,
                (self.max_index() - p).max(0) as usize,
            ),
        }
    }

    pub fn check_range(&self, from: i64, to: i64) -> Result<()> {
        if from < self.min_index() || to > self.max_index() {
            return Err(Error::Orbit(format!(
                "range [{from}, {to}] exceeds orbit window [{}, {}]",
                self.min_index(),
                self.max_index()
            )));
        }
        Ok(())
    }
}
