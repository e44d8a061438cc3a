//! Monotonic scheduling functions.
//!
//! `g(t)` is the number of input chunks the spectrogram of unit `t` may
//! condition on, `h(t)` the number of unit spectrograms the waveform of unit
//! `t` may condition on. Unit indices are 1-based at this boundary; callers
//! holding 0-based vectors index with `t - 1`.

use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolicyError {
    #[error("unit index must be at least 1")]
    ZeroIndex,
    #[error("total unit count must be at least 1")]
    ZeroTotal,
    #[error("policy {name} is not monotone or leaves [0, {total}]")]
    Invalid { name: &'static str, total: usize },
}

fn check(t: usize, m: usize) -> Result<(), PolicyError> {
    if t == 0 {
        return Err(PolicyError::ZeroIndex);
    }
    if m == 0 {
        return Err(PolicyError::ZeroTotal);
    }
    Ok(())
}

/// Wait-k from simultaneous translation: `min(k + t - 1, m)`.
pub fn g_wait_k(k: usize, t: usize, m: usize) -> Result<usize, PolicyError> {
    check(t, m)?;
    Ok(k.saturating_add(t - 1).min(m))
}

/// Spectrogram lookahead: `min(k1 + t, m)`. Equal to wait-(k1 + 1).
pub fn g_lookahead(k1: usize, t: usize, m: usize) -> Result<usize, PolicyError> {
    check(t, m)?;
    Ok(k1.saturating_add(t).min(m))
}

/// Waveform lookahead: `min(k2 + t, m)`.
pub fn h_lookahead(k2: usize, t: usize, m: usize) -> Result<usize, PolicyError> {
    g_lookahead(k2, t, m)
}

/// True iff `p` is non-decreasing over `1..=m` and stays within `[0, m]`.
pub fn validate_policy<F: Fn(usize) -> usize>(p: F, m: usize) -> bool {
    let mut prev = 0;
    for t in 1..=m {
        let v = p(t);
        if v > m || v < prev {
            return false;
        }
        prev = v;
    }
    true
}

/// Per-stage lookahead counts; the whole system is lookahead-(k1 + k2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LookaheadPolicy {
    pub k1: usize,
    pub k2: usize,
}

impl LookaheadPolicy {
    pub const fn new(k1: usize, k2: usize) -> Self {
        Self { k1, k2 }
    }

    pub fn total(&self) -> usize {
        self.k1 + self.k2
    }
}

impl Default for LookaheadPolicy {
    fn default() -> Self {
        Self::new(1, 0)
    }
}

type CustomFn = Arc<dyn Fn(usize, usize) -> usize + Send + Sync>;

/// One stage's schedule as a function of `(t, m)`.
#[derive(Clone)]
pub enum Schedule {
    Lookahead(usize),
    /// Every unit conditions on the whole sentence.
    Full,
    /// User-supplied; checked with [`validate_policy`] before a session runs.
    Custom(CustomFn),
}

impl Schedule {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(usize, usize) -> usize + Send + Sync + 'static,
    {
        Self::Custom(Arc::new(f))
    }

    pub fn eval(&self, t: usize, m: usize) -> Result<usize, PolicyError> {
        check(t, m)?;
        Ok(match self {
            Schedule::Lookahead(k) => g_lookahead(*k, t, m)?,
            Schedule::Full => m,
            Schedule::Custom(f) => f(t, m),
        })
    }
}

impl fmt::Debug for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Lookahead(k) => write!(f, "Lookahead({k})"),
            Schedule::Full => f.write_str("Full"),
            Schedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// The pair `(g, h)` driving an incremental session.
#[derive(Debug, Clone)]
pub struct Policy {
    pub spectrogram: Schedule,
    pub wave: Schedule,
}

impl Policy {
    pub fn lookahead(p: LookaheadPolicy) -> Self {
        Self {
            spectrogram: Schedule::Lookahead(p.k1),
            wave: Schedule::Lookahead(p.k2),
        }
    }

    /// `g(t) = h(t) = m`: full-sentence conditioning expressed as a policy.
    pub fn full_sentence() -> Self {
        Self {
            spectrogram: Schedule::Full,
            wave: Schedule::Full,
        }
    }

    pub fn g(&self, t: usize, m: usize) -> Result<usize, PolicyError> {
        self.spectrogram.eval(t, m)
    }

    pub fn h(&self, t: usize, m: usize) -> Result<usize, PolicyError> {
        self.wave.eval(t, m)
    }

    /// Beyond [`validate_policy`], a usable policy must let unit `t` see its
    /// own input: `g(t) >= t` and `h(t) >= t`.
    pub fn validate(&self, m: usize) -> Result<(), PolicyError> {
        if m == 0 {
            return Err(PolicyError::ZeroTotal);
        }
        for (name, sched) in [("g", &self.spectrogram), ("h", &self.wave)] {
            let f = |t| sched.eval(t, m).unwrap_or(usize::MAX);
            if !validate_policy(f, m) || (1..=m).any(|t| f(t) < t) {
                return Err(PolicyError::Invalid { name, total: m });
            }
        }
        Ok(())
    }

    /// `(k1, k2)` when both stages use a lookahead schedule.
    pub fn as_lookahead(&self) -> Option<LookaheadPolicy> {
        match (&self.spectrogram, &self.wave) {
            (Schedule::Lookahead(k1), Schedule::Lookahead(k2)) => Some(LookaheadPolicy::new(*k1, *k2)),
            _ => None,
        }
    }
}

impl From<LookaheadPolicy> for Policy {
    fn from(p: LookaheadPolicy) -> Self {
        Self::lookahead(p)
    }
}
