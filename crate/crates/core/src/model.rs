//! A trained model of any of the three kinds.

use std::fmt;
use std::str::FromStr;

use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};
use crate::grnn::GrnnModel;
use crate::mlfn::MlfnModel;
use crate::svr::SvrModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Grnn,
    Svr,
    Mlfn,
}

impl ModelKind {
    pub fn tag(self) -> &'static str {
        match self {
            ModelKind::Grnn => "GRNN",
            ModelKind::Svr => "SVR",
            ModelKind::Mlfn => "MLFN",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "grnn" => Ok(ModelKind::Grnn),
            "svr" | "svm" => Ok(ModelKind::Svr),
            "mlfn" => Ok(ModelKind::Mlfn),
            other => Err(Error::InvalidParameter(format!("unknown model kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrainedModel {
    Grnn(GrnnModel),
    Mlfn(MlfnModel),
    Svr(SvrModel),
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            TrainedModel::Grnn(_) => ModelKind::Grnn,
            TrainedModel::Mlfn(_) => ModelKind::Mlfn,
            TrainedModel::Svr(_) => ModelKind::Svr,
        }
    }

    pub fn dim(&self) -> usize {
        self.normalizer().dim()
    }

    pub fn normalizer(&self) -> &Normalizer {
        match self {
            TrainedModel::Grnn(m) => m.normalizer(),
            TrainedModel::Mlfn(m) => m.normalizer(),
            TrainedModel::Svr(m) => m.normalizer(),
        }
    }

    /// Prediction for one raw (unnormalized) feature vector.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            TrainedModel::Grnn(m) => m.predict(x),
            TrainedModel::Mlfn(m) => m.predict(x),
            TrainedModel::Svr(m) => m.predict(x),
        }
    }

    pub fn predict_all(&self, ds: &Dataset) -> Result<Vec<f64>> {
        ds.features().iter().map(|x| self.predict(x)).collect()
    }
}

impl From<GrnnModel> for TrainedModel {
    fn from(m: GrnnModel) -> Self {
        TrainedModel::Grnn(m)
    }
}

impl From<MlfnModel> for TrainedModel {
    fn from(m: MlfnModel) -> Self {
        TrainedModel::Mlfn(m)
    }
}

impl From<SvrModel> for TrainedModel {
    fn from(m: SvrModel) -> Self {
        TrainedModel::Svr(m)
    }
}
