//! Pipeline settings and their `key=value` form.

use super::PrognosticsError;
use crate::cnn::{CnnGeometry, TrainConfig};
use crate::hht::HhtConfig;
use crate::kv::KvMap;
use crate::svr::{KernelWidth, SvrParams};

/// Which DEI series the forecaster is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvrSource {
    /// One model from the training bearing's estimated DEI, shared by every
    /// test bearing.
    TrainingBearing,
    /// A separate model per test bearing from its own estimated DEI.
    TestBearing,
}

impl std::fmt::Display for SvrSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SvrSource::TrainingBearing => "train",
            SvrSource::TestBearing => "test",
        })
    }
}

impl std::str::FromStr for SvrSource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(SvrSource::TrainingBearing),
            "test" => Ok(SvrSource::TestBearing),
            other => Err(format!("svr source must be `train` or `test`, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub hht: HhtConfig,
    /// Clamp margin of the min/max normalization.
    pub normalize_eps: f64,
    pub cnn: TrainConfig,
    pub window: usize,
    pub slide: usize,
    pub svr: SvrParams,
    pub forecast_cap: usize,
    pub svr_source: SvrSource,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            hht: HhtConfig::default(),
            normalize_eps: 1e-6,
            cnn: TrainConfig::default(),
            window: 50,
            slide: 1,
            svr: SvrParams::default(),
            forecast_cap: 100_000,
            svr_source: SvrSource::TrainingBearing,
        }
    }
}

/// Keys accepted by [`PipelineConfig::from_kv`].
pub const CONFIG_KEYS: &[&str] = &[
    "band_half_width",
    "sd_threshold",
    "max_sifts",
    "max_imfs",
    "normalize_eps",
    "learning_rate",
    "iterations",
    "batch_size",
    "cnn_seed",
    "cnn_input_length",
    "cnn_filters",
    "cnn_kernel",
    "cnn_stride",
    "cnn_hidden",
    "window",
    "slide",
    "c",
    "epsilon",
    "sigma",
    "smo_tolerance",
    "smo_max_iterations",
    "forecast_cap",
    "svr_source",
];

impl PipelineConfig {
    /// Overrides defaults with the entries of `kv`; unknown keys are errors.
    pub fn from_kv(kv: &KvMap) -> Result<Self, PrognosticsError> {
        kv.check_keys(CONFIG_KEYS)?;
        let d = Self::default();
        let g = d.cnn.geometry;
        let geometry = CnnGeometry::with_sizes(
            kv.get_or("cnn_input_length", g.input_length)?,
            kv.get_or("cnn_filters", g.conv1.out_channels)?,
            kv.get_or("cnn_kernel", g.conv1.kernel)?,
            kv.get_or("cnn_stride", g.conv1.stride)?,
            kv.get_or("cnn_hidden", g.hidden)?,
        );
        let batch_size = match kv.raw("batch_size") {
            None | Some("full") => None,
            Some(_) => Some(kv.require::<usize>("batch_size")?),
        };
        let sigma = match kv.raw("sigma") {
            None => d.svr.width,
            Some(s) => s
                .parse::<KernelWidth>()
                .map_err(|e| PrognosticsError::Config(e.to_string()))?,
        };
        let svr_source = match kv.raw("svr_source") {
            None => d.svr_source,
            Some(s) => s.parse().map_err(PrognosticsError::Config)?,
        };
        let cfg = Self {
            hht: HhtConfig {
                band_half_width: kv.get_or("band_half_width", d.hht.band_half_width)?,
                sift: crate::hht::SiftConfig {
                    sd_threshold: kv.get_or("sd_threshold", d.hht.sift.sd_threshold)?,
                    max_sifts: kv.get_or("max_sifts", d.hht.sift.max_sifts)?,
                    max_imfs: kv.get_or("max_imfs", d.hht.sift.max_imfs)?,
                },
            },
            normalize_eps: kv.get_or("normalize_eps", d.normalize_eps)?,
            cnn: TrainConfig {
                geometry,
                learning_rate: kv.get_or("learning_rate", d.cnn.learning_rate)?,
                iterations: kv.get_or("iterations", d.cnn.iterations)?,
                batch_size,
                seed: kv.get_or("cnn_seed", d.cnn.seed)?,
                ..d.cnn
            },
            window: kv.get_or("window", d.window)?,
            slide: kv.get_or("slide", d.slide)?,
            svr: SvrParams {
                c: kv.get_or("c", d.svr.c)?,
                epsilon: kv.get_or("epsilon", d.svr.epsilon)?,
                width: sigma,
                smo: crate::svr::SmoConfig {
                    tolerance: kv.get_or("smo_tolerance", d.svr.smo.tolerance)?,
                    max_iterations: kv.get_or("smo_max_iterations", d.svr.smo.max_iterations)?,
                },
            },
            forecast_cap: kv.get_or("forecast_cap", d.forecast_cap)?,
            svr_source,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, PrognosticsError> {
        Self::from_kv(&KvMap::parse(text)?)
    }

    /// Every setting as `key=value` lines; parsing the result gives back
    /// the same configuration.
    pub fn to_kv(&self) -> KvMap {
        let mut kv = KvMap::default();
        let g = self.cnn.geometry;
        kv.insert("band_half_width", self.hht.band_half_width);
        kv.insert("sd_threshold", self.hht.sift.sd_threshold);
        kv.insert("max_sifts", self.hht.sift.max_sifts);
        kv.insert("max_imfs", self.hht.sift.max_imfs);
        kv.insert("normalize_eps", self.normalize_eps);
        kv.insert("learning_rate", self.cnn.learning_rate);
        kv.insert("iterations", self.cnn.iterations);
        kv.insert(
            "batch_size",
            self.cnn
                .batch_size
                .map_or_else(|| "full".to_string(), |b| b.to_string()),
        );
        kv.insert("cnn_seed", self.cnn.seed);
        kv.insert("cnn_input_length", g.input_length);
        kv.insert("cnn_filters", g.conv1.out_channels);
        kv.insert("cnn_kernel", g.conv1.kernel);
        kv.insert("cnn_stride", g.conv1.stride);
        kv.insert("cnn_hidden", g.hidden);
        kv.insert("window", self.window);
        kv.insert("slide", self.slide);
        kv.insert("c", self.svr.c);
        kv.insert("epsilon", self.svr.epsilon);
        kv.insert("sigma", self.svr.width);
        kv.insert("smo_tolerance", self.svr.smo.tolerance);
        kv.insert("smo_max_iterations", self.svr.smo.max_iterations);
        kv.insert("forecast_cap", self.forecast_cap);
        kv.insert("svr_source", self.svr_source);
        kv
    }

    pub fn validate(&self) -> Result<(), PrognosticsError> {
        let bad = |m: String| Err(PrognosticsError::Config(m));
        self.cnn
            .validate()
            .map_err(|e| PrognosticsError::Config(e.to_string()))?;
        if !(self.normalize_eps > 0.0 && self.normalize_eps < 0.5) {
            return bad(format!("normalize_eps must lie in (0, 0.5), got {}", self.normalize_eps));
        }
        if self.window < 2 || self.slide == 0 {
            return bad(format!(
                "window must be at least 2 and slide at least 1 (got {}, {})",
                self.window, self.slide
            ));
        }
        if !(self.svr.c > 0.0 && self.svr.c.is_finite()) || !(self.svr.epsilon >= 0.0) {
            return bad(format!(
                "need c > 0 and epsilon >= 0 (got {}, {})",
                self.svr.c, self.svr.epsilon
            ));
        }
        if !(self.svr.smo.tolerance > 0.0) || self.svr.smo.max_iterations == 0 {
            return bad("SMO tolerance and iteration cap must be positive".into());
        }
        if self.forecast_cap == 0 {
            return bad("forecast_cap must be at least 1".into());
        }
        if self.hht.sift.max_sifts == 0 || self.hht.sift.max_imfs == 0 || !(self.hht.sift.sd_threshold > 0.0) {
            return bad("sifting limits must be positive".into());
        }
        Ok(())
    }
}
