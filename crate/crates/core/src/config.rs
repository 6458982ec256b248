//! Scenario parameters for the symmetric interference channel.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Modulation alphabet used by every transmitter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Encoding {
    /// One complex stream per antenna, MMSE reception.
    Complex,
    /// One real stream per antenna, widely linear MMSE reception.
    Real,
    /// The first `m` antennas carry independent I and Q real streams, the
    /// rest carry one real stream each. Widely linear MMSE reception.
    Mixed(usize),
}

impl Encoding {
    pub fn is_widely_linear(self) -> bool {
        !matches!(self, Encoding::Complex)
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Encoding::Complex => f.write_str("complex"),
            Encoding::Real => f.write_str("real"),
            Encoding::Mixed(m) => write!(f, "mixed:{m}"),
        }
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "complex" => Ok(Encoding::Complex),
            "real" => Ok(Encoding::Real),
            _ => {
                let m = t
                    .strip_prefix("mixed:")
                    .or_else(|| t.strip_prefix("mixed(").and_then(|r| r.strip_suffix(')')))
                    .ok_or_else(|| Error::config(format!("unknown encoding '{s}'")))?;
                m.trim()
                    .parse()
                    .map(Encoding::Mixed)
                    .map_err(|_| Error::config(format!("bad mixed encoding count in '{s}'")))
            }
        }
    }
}

impl TryFrom<String> for Encoding {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Encoding> for String {
    fn from(e: Encoding) -> Self {
        e.to_string()
    }
}

/// Full scenario parameterisation. Powers are linear.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Transmitters (one desired plus `k - 1` equal-power interferers).
    #[serde(rename = "K")]
    pub k: usize,
    /// Transmit antennas per transmitter.
    #[serde(rename = "Nt")]
    pub nt: usize,
    /// Receive antennas per user.
    #[serde(rename = "Nr")]
    pub nr: usize,
    /// Active users per transmitter.
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "S")]
    pub s: f64,
    #[serde(rename = "I0")]
    pub i0: f64,
    #[serde(rename = "N0")]
    pub n0: f64,
    pub encoding: Encoding,
    pub trials: usize,
    pub seed: u64,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

impl SystemConfig {
    /// Single-antenna transmitters, `S = I0 = 1` at 20 dB SNR, 1000 trials.
    pub fn new(k: usize, nr: usize, l: usize) -> Self {
        Self {
            k,
            nt: 1,
            nr,
            l,
            s: 1.0,
            i0: 1.0,
            n0: db_to_linear(-20.0),
            encoding: Encoding::Complex,
            trials: 1000,
            seed: 1,
        }
    }

    pub fn with_nt(mut self, nt: usize) -> Self {
        self.nt = nt;
        self
    }

    pub fn with_encoding(mut self, encoding: Encoding) -> Self {
        self.encoding = encoding;
        self
    }

    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Sets `S = I0 = 1` and `N0 = 10^{-snr_db/10}`.
    pub fn with_snr_db(mut self, snr_db: f64) -> Self {
        self.s = 1.0;
        self.i0 = 1.0;
        self.n0 = db_to_linear(-snr_db);
        self
    }

    pub fn snr(&self) -> f64 {
        self.s / self.n0
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr())
    }

    /// Streams per transmitter.
    pub fn streams(&self) -> usize {
        match self.encoding {
            Encoding::Complex | Encoding::Real => self.nt,
            Encoding::Mixed(m) => self.nt + m,
        }
    }

    /// Spatial multiplexing rate (pre-log per transmitter).
    pub fn sm_rate(&self) -> f64 {
        match self.encoding {
            Encoding::Complex => self.nt as f64,
            Encoding::Real | Encoding::Mixed(_) => self.streams() as f64 / 2.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.nt == 0 || self.nr == 0 {
            return Err(Error::config("K, Nt and Nr must all be at least 1"));
        }
        if self.l < self.nt {
            return Err(Error::config(format!(
                "L={} must be at least Nt={}",
                self.l, self.nt
            )));
        }
        if !(self.s.is_finite() && self.s > 0.0) {
            return Err(Error::config(format!("S must be positive, got {}", self.s)));
        }
        if !(self.n0.is_finite() && self.n0 > 0.0) {
            return Err(Error::config(format!("N0 must be positive, got {}", self.n0)));
        }
        if !(self.i0.is_finite() && self.i0 >= 0.0) {
            return Err(Error::config(format!("I0 must be non-negative, got {}", self.i0)));
        }
        if let Encoding::Mixed(m) = self.encoding {
            if m > self.nt {
                return Err(Error::config(format!("mixed:{m} exceeds Nt={}", self.nt)));
            }
        }
        if self.trials == 0 {
            return Err(Error::config("trials must be at least 1"));
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: SystemConfig = toml::from_str(s).map_err(|e| Error::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("SystemConfig always serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_round_trip() {
        for e in [Encoding::Complex, Encoding::Real, Encoding::Mixed(2)] {
            assert_eq!(e.to_string().parse::<Encoding>().unwrap(), e);
        }
        assert_eq!("mixed(3)".parse::<Encoding>().unwrap(), Encoding::Mixed(3));
        assert!("quaternion".parse::<Encoding>().is_err());
    }

    #[test]
    fn stream_counts_and_rates() {
        let c = SystemConfig::new(3, 2, 10).with_nt(2);
        assert_eq!((c.streams(), c.sm_rate()), (2, 2.0));
        let r = SystemConfig::new(3, 2, 10).with_nt(5).with_encoding(Encoding::Real);
        assert_eq!((r.streams(), r.sm_rate()), (5, 2.5));
        let m = SystemConfig::new(3, 2, 10).with_nt(3).with_encoding(Encoding::Mixed(2));
        assert_eq!((m.streams(), m.sm_rate()), (5, 2.5));
    }

    #[test]
    fn validation() {
        assert!(SystemConfig::new(3, 2, 10).validate().is_ok());
        assert!(SystemConfig::new(3, 2, 1).with_nt(2).validate().is_err());
        assert!(SystemConfig::new(3, 2, 10)
            .with_nt(2)
            .with_encoding(Encoding::Mixed(3))
            .validate()
            .is_err());
        let mut c = SystemConfig::new(3, 2, 10);
        c.i0 = 0.0;
        assert!(c.validate().is_ok());
        c.n0 = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = SystemConfig::new(5, 2, 50)
            .with_encoding(Encoding::Mixed(1))
            .with_nt(2)
            .with_seed(99);
        let text = c.to_toml_string();
        assert!(text.contains("encoding = \"mixed:1\""));
        assert_eq!(SystemConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn toml_rejects_unknown_keys() {
        let text = "K=3\nNt=1\nNr=2\nL=10\nS=1.0\nI0=1.0\nN0=0.01\nencoding=\"real\"\ntrials=10\nseed=1\nbogus=2\n";
        assert!(SystemConfig::from_toml_str(text).is_err());
    }

    #[test]
    fn snr_helpers() {
        let c = SystemConfig::new(3, 2, 10).with_snr_db(30.0);
        assert!((c.snr_db() - 30.0).abs() < 1e-12);
        assert!((db_to_linear(linear_to_db(7.0)) - 7.0).abs() < 1e-12);
    }
}
