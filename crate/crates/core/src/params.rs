//! Scale parameters: T and every threshold written as a power of log T, each overridable.

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};

fn ln_ln(x: f64) -> f64 {
    x.max(std::f64::consts::E).ln().ln()
}

/// Where a resolved Y-range came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum YRangeSource {
    /// (log log γ)³ ≤ log Y ≤ log γ / log log γ
    Formula,
    /// [e², √T], used when the formula range is empty
    Desk,
    Override,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct YRange {
    pub y_min: f64,
    pub y_max: f64,
    pub source: YRangeSource,
}

/// `None` fields fall back to their formula default at the current T.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScaleParams {
    pub t: f64,
    /// default (log T)³
    pub cluster_gap: Option<f64>,
    /// default (log γ₀)² around each zero
    pub neighborhood_radius: Option<f64>,
    /// real-part gap is `real_gap_coeff / log Y`
    pub real_gap_coeff: f64,
    /// left gap is `numerator / log Y`; default numerator (log log γ₀)²
    pub left_gap_numerator: Option<f64>,
    pub y_range: Option<(f64, f64)>,
    pub u_grid_ratio: f64,
    /// default 1/(3 log T)
    pub detector_threshold: Option<f64>,
    /// Hypothesis F line separation; taken from the zero set when absent.
    pub c_f: Option<f64>,
    /// overrides `(log T)^{-tau_exponent}`
    pub zero_sum_tau: Option<f64>,
    pub tau_exponent: f64,
    /// Type C needs at least |C| / (log T)^{type_c_exponent} zeros to the right
    pub type_c_exponent: f64,
    /// R_{N,H} needs H (log T)^{-rnh_exponent} detected members
    pub rnh_exponent: f64,
    /// R_{N,H} looks for a half-isolated zero within |C| (log T)^{rnh_radius_exponent}
    pub rnh_radius_exponent: f64,
    /// default 2 T^{1/100}
    pub mollifier_length: Option<f64>,
    /// damping length in exp(-n/Y); default T^{1/2}
    pub damping: Option<f64>,
    /// explicit-formula truncation half-width in Im
    pub window: f64,
    /// flexible detector stopping scale; default exp((log log T)⁴)
    pub stop_scale: Option<f64>,
    /// default 2 log(stop_scale)
    pub flex_lower_exponent: Option<f64>,
    /// default (log log T)²
    pub flex_upper_exponent: Option<f64>,
}

impl Default for ScaleParams {
    fn default() -> Self {
        ScaleParams {
            t: 1000.0,
            cluster_gap: None,
            neighborhood_radius: None,
            real_gap_coeff: 0.1,
            left_gap_numerator: None,
            y_range: None,
            u_grid_ratio: 1.01,
            detector_threshold: None,
            c_f: None,
            zero_sum_tau: None,
            tau_exponent: 100.0,
            type_c_exponent: 100.0,
            rnh_exponent: 4.0,
            rnh_radius_exponent: 5.0,
            mollifier_length: None,
            damping: None,
            window: 50.0,
            stop_scale: None,
            flex_lower_exponent: None,
            flex_upper_exponent: None,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

impl ScaleParams {
    pub fn new(t: f64) -> Result<Self> {
        let p = ScaleParams {
            t,
            ..Default::default()
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("t", self.t)?;
        if self.t <= 1.0 {
            return Err(Error::Config(format!("t must exceed 1, got {}", self.t)));
        }
        positive("real_gap_coeff", self.real_gap_coeff)?;
        positive("window", self.window)?;
        positive("tau_exponent", self.tau_exponent)?;
        positive("type_c_exponent", self.type_c_exponent)?;
        positive("rnh_exponent", self.rnh_exponent)?;
        positive("rnh_radius_exponent", self.rnh_radius_exponent)?;
        if !(self.u_grid_ratio > 1.0 && self.u_grid_ratio.is_finite()) {
            return Err(Error::Config(format!(
                "u_grid_ratio must exceed 1, got {}",
                self.u_grid_ratio
            )));
        }
        let opts = [
            ("cluster_gap", self.cluster_gap),
            ("neighborhood_radius", self.neighborhood_radius),
            ("left_gap_numerator", self.left_gap_numerator),
            ("detector_threshold", self.detector_threshold),
            ("c_f", self.c_f),
            ("zero_sum_tau", self.zero_sum_tau),
            ("mollifier_length", self.mollifier_length),
            ("damping", self.damping),
            ("stop_scale", self.stop_scale),
            ("flex_lower_exponent", self.flex_lower_exponent),
            ("flex_upper_exponent", self.flex_upper_exponent),
        ];
        for (name, v) in opts {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if let Some(m) = self.mollifier_length {
            if m < 1.0 {
                return Err(Error::Config(format!(
                    "mollifier_length must be >= 1, got {m}"
                )));
            }
        }
        if let Some((lo, hi)) = self.y_range {
            positive("y_range.0", lo)?;
            positive("y_range.1", hi)?;
            if lo <= 1.0 || lo > hi {
                return Err(Error::Config(format!(
                    "y_range ({lo}, {hi}) must satisfy 1 < Y_min <= Y_max"
                )));
            }
        }
        if let Some(s) = self.stop_scale {
            if s <= 1.0 {
                return Err(Error::Config(format!("stop_scale must exceed 1, got {s}")));
            }
        }
        Ok(())
    }

    /// Same overrides, formulas re-evaluated at a different T.
    pub fn with_t(&self, t: f64) -> Result<Self> {
        let p = ScaleParams { t, ..self.clone() };
        p.validate()?;
        Ok(p)
    }

    pub fn log_t(&self) -> f64 {
        self.t.ln()
    }

    pub fn log_log_t(&self) -> f64 {
        ln_ln(self.t)
    }

    pub fn cluster_gap(&self) -> f64 {
        self.cluster_gap.unwrap_or_else(|| self.log_t().powi(3))
    }

    pub fn neighborhood_radius(&self, gamma0: f64) -> f64 {
        self.neighborhood_radius
            .unwrap_or_else(|| gamma0.max(std::f64::consts::E).ln().powi(2))
    }

    pub fn real_gap(&self, y: f64) -> f64 {
        self.real_gap_coeff / y.ln()
    }

    pub fn left_gap(&self, gamma0: f64, y: f64) -> f64 {
        self.left_gap_numerator
            .unwrap_or_else(|| ln_ln(gamma0).powi(2))
            / y.ln()
    }

    /// Y-range for a zero at height `gamma0`.
    pub fn y_range_for(&self, gamma0: f64) -> YRange {
        self.y_range_for_log(gamma0.max(std::f64::consts::E).ln())
    }

    /// As [`Self::y_range_for`], taking log γ₀ so that formula-scale heights are expressible.
    ///
    /// The formula range is empty unless (log log γ)⁴ ≤ log γ, i.e. log γ ≳ 5500; every
    /// height representable as an f64 therefore falls back to the desk range.
    pub fn y_range_for_log(&self, log_gamma: f64) -> YRange {
        if let Some((lo, hi)) = self.y_range {
            return YRange {
                y_min: lo,
                y_max: hi,
                source: YRangeSource::Override,
            };
        }
        let ll = log_gamma.max(1.0).ln();
        let lo = ll.powi(3);
        let hi = if ll > 0.0 { log_gamma / ll } else { 0.0 };
        if lo <= hi && lo > 0.0 {
            YRange {
                y_min: lo.exp(),
                y_max: hi.exp(),
                source: YRangeSource::Formula,
            }
        } else {
            YRange {
                y_min: std::f64::consts::E.powi(2),
                y_max: self.t.sqrt(),
                source: YRangeSource::Desk,
            }
        }
    }

    pub fn detector_threshold(&self) -> f64 {
        self.detector_threshold
            .unwrap_or_else(|| 1.0 / (3.0 * self.log_t()))
    }

    pub fn zero_sum_tau(&self) -> f64 {
        self.zero_sum_tau
            .unwrap_or_else(|| self.log_t().powf(-self.tau_exponent))
    }

    pub fn mollifier_length(&self) -> f64 {
        self.mollifier_length
            .unwrap_or_else(|| 2.0 * self.t.powf(0.01))
    }

    pub fn damping(&self) -> f64 {
        self.damping.unwrap_or_else(|| self.t.sqrt())
    }

    pub fn stop_scale(&self) -> f64 {
        self.stop_scale
            .unwrap_or_else(|| self.log_log_t().powi(4).exp())
    }

    pub fn flex_lower_exponent(&self) -> f64 {
        self.flex_lower_exponent
            .unwrap_or_else(|| 2.0 * self.stop_scale().ln())
    }

    pub fn flex_upper_exponent(&self) -> f64 {
        self.flex_upper_exponent
            .unwrap_or_else(|| self.log_log_t().powi(2))
    }

    /// Gaps chosen so that Hypothesis F separation `c_f` alone certifies half-isolation for Y ≥ `y_min`.
    pub fn with_hypothesis_f_gaps(&self, c_f: f64, y_min: f64) -> Result<Self> {
        if !(y_min > 1.0) {
            return Err(Error::Config(format!("y_min must exceed 1, got {y_min}")));
        }
        let p = ScaleParams {
            c_f: Some(c_f),
            left_gap_numerator: Some(c_f * y_min.ln()),
            neighborhood_radius: Some(
                self.neighborhood_radius
                    .unwrap_or(2.0 * self.log_t().powi(2)),
            ),
            ..self.clone()
        };
        p.validate()?;
        Ok(p)
    }

    /// Raw settings plus every resolved threshold, for report headers.
    pub fn snapshot(&self) -> serde_json::Value {
        let yr = self.y_range_for(self.t);
        json!({
            "settings": self,
            "resolved": {
                "log_t": self.log_t(),
                "cluster_gap": self.cluster_gap(),
                "neighborhood_radius_at_t": self.neighborhood_radius(self.t),
                "detector_threshold": self.detector_threshold(),
                "zero_sum_tau": self.zero_sum_tau(),
                "mollifier_length": self.mollifier_length(),
                "damping": self.damping(),
                "stop_scale": self.stop_scale(),
                "flex_lower_exponent": self.flex_lower_exponent(),
                "flex_upper_exponent": self.flex_upper_exponent(),
                "y_range_at_t": yr,
            }
        })
    }
}
