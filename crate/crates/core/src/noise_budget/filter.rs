use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ripple at which the passband floor itself sits at −3 dB.
const MAX_RIPPLE_DB: f64 = 3.010_299_956_639_812;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterKind {
    Chebyshev1,
    CascadedRc,
}

/// Low-pass filter between a voltage source and an electrode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub order: u32,
    /// Hz
    pub f_3db: f64,
    /// Passband ripple, Chebyshev only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ripple_db: Option<f64>,
}

impl FilterSpec {
    pub const DEFAULT_RIPPLE_DB: f64 = 0.5;

    pub fn cascaded_rc(order: u32, f_3db: f64) -> Self {
        Self {
            kind: FilterKind::CascadedRc,
            order,
            f_3db,
            ripple_db: None,
        }
    }

    pub fn chebyshev1(order: u32, f_3db: f64, ripple_db: f64) -> Self {
        Self {
            kind: FilterKind::Chebyshev1,
            order,
            f_3db,
            ripple_db: Some(ripple_db),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.order < 1 {
            return Err(Error::validation("filter.order", "must be >= 1"));
        }
        if !(self.f_3db > 0.0) || !self.f_3db.is_finite() {
            return Err(Error::validation(
                "filter.f_3db",
                format!("must be > 0, got {}", self.f_3db),
            ));
        }
        if self.kind == FilterKind::Chebyshev1 {
            let r = self.ripple();
            if !(r > 0.0 && r < MAX_RIPPLE_DB) {
                return Err(Error::validation(
                    "filter.ripple_db",
                    format!("must lie in (0, {MAX_RIPPLE_DB:.4}) dB, got {r}"),
                ));
            }
        }
        Ok(())
    }

    pub fn ripple(&self) -> f64 {
        self.ripple_db.unwrap_or(Self::DEFAULT_RIPPLE_DB)
    }

    /// Chebyshev ripple factor ε.
    pub fn epsilon(&self) -> f64 {
        (10f64.powf(self.ripple() / 10.0) - 1.0).sqrt()
    }

    /// Corner frequency of the underlying prototype: per-stage pole for the
    /// RC cascade, ripple-band edge for Chebyshev.
    pub fn corner_frequency(&self) -> f64 {
        let n = f64::from(self.order);
        match self.kind {
            FilterKind::CascadedRc => self.f_3db / (2f64.powf(1.0 / n) - 1.0).sqrt(),
            FilterKind::Chebyshev1 => {
                let x3 = ((1.0 / self.epsilon()).acosh() / n).cosh();
                self.f_3db / x3
            }
        }
    }
}

/// Chebyshev polynomial of the first kind; recurrence inside [-1, 1],
/// hyperbolic form outside.
pub fn chebyshev_t(order: u32, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        let (mut prev, mut cur) = (1.0, x);
        if order == 0 {
            return prev;
        }
        for _ in 1..order {
            let next = 2.0 * x * cur - prev;
            prev = cur;
            cur = next;
        }
        cur
    } else {
        let sign = if x < 0.0 && order % 2 == 1 { -1.0 } else { 1.0 };
        sign * (f64::from(order) * x.abs().acosh()).cosh()
    }
}

/// Power gain |H(f)|².
pub fn filter_gain_sq(filter: &FilterSpec, frequency: f64) -> f64 {
    let x = frequency / filter.corner_frequency();
    match filter.kind {
        FilterKind::CascadedRc => (1.0 + x * x).powi(-(filter.order as i32)),
        FilterKind::Chebyshev1 => {
            let e = filter.epsilon();
            let t = chebyshev_t(filter.order, x);
            1.0 / (1.0 + e * e * t * t)
        }
    }
}
