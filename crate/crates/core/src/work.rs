use crate::error::{Error, Result};

/// Default ceiling on elementary steps for the expensive exact routines.
pub const DEFAULT_WORK_LIMIT: u64 = 1_000_000_000;

/// Environment variable consulted by [`WorkLimit::from_env`].
pub const WORK_LIMIT_ENV: &str = "STARCOUNT_WORK_LIMIT";

/// Upper bound on the number of elementary steps an operation may take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkLimit(pub u64);

impl Default for WorkLimit {
    fn default() -> Self {
        WorkLimit(DEFAULT_WORK_LIMIT)
    }
}

impl WorkLimit {
    pub const UNLIMITED: WorkLimit = WorkLimit(u64::MAX);

    /// Reads the limit from `STARCOUNT_WORK_LIMIT`, falling back to the default.
    pub fn from_env() -> Result<Self> {
        match std::env::var(WORK_LIMIT_ENV) {
            Ok(s) => parse_count(&s)
                .map(WorkLimit)
                .ok_or_else(|| Error::Parse(format!("{WORK_LIMIT_ENV}={s} is not a count"))),
            Err(_) => Ok(WorkLimit::default()),
        }
    }

    /// Fails up front when a known step count exceeds the limit.
    pub fn check(self, what: &'static str, steps: f64) -> Result<()> {
        if steps > self.0 as f64 {
            Err(Error::Budget { what, limit: self.0 })
        } else {
            Ok(())
        }
    }
}

/// Accepts plain integers, `1e9` and `10^9`.
pub fn parse_count(s: &str) -> Option<u64> {
    let s = s.trim();
    if let Ok(v) = s.parse::<u64>() {
        return Some(v);
    }
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b.trim().parse().ok()?;
        let e: u32 = e.trim().parse().ok()?;
        return b.checked_pow(e);
    }
    let v: f64 = s.parse().ok()?;
    (v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64).then_some(v as u64)
}

/// Running step counter charged against a [`WorkLimit`].
#[derive(Debug)]
pub(crate) struct Meter {
    used: u64,
    limit: u64,
    what: &'static str,
}

impl Meter {
    pub(crate) fn new(limit: WorkLimit, what: &'static str) -> Self {
        Meter { used: 0, limit: limit.0, what }
    }

    #[inline]
    pub(crate) fn charge(&mut self, steps: u64) -> Result<()> {
        self.used = self.used.saturating_add(steps);
        if self.used > self.limit {
            Err(Error::Budget { what: self.what, limit: self.limit })
        } else {
            Ok(())
        }
    }
}
