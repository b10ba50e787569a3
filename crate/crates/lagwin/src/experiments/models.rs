use lagwin_core::chains::{
    adaptive_rwm, ar1_chain, logistic_posterior, poisson_re_gibbs, synth_logistic_data, synth_poisson_data,
    toy_adaptive_rwm, LogisticPosterior, PoissonData, PoissonTruth, SamplerConfig,
};
use lagwin_core::seed::{derive_seed, label};
use lagwin_core::stats::mean;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A chain whose `h` path feeds the replication studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum ModelSpec {
    /// i.i.d. N(0, 1), `π(h) = 0`.
    Iid,
    /// Stationary Gaussian AR(1), `π(h) = 0`.
    Ar1 { rho: f64 },
    /// Adaptive RWM on the bimodal uniform target, `π(h) = 0`.
    Toy { target_rate: f64 },
    /// Adaptive RWM on a synthetic logistic posterior; `h = β_coordinate`.
    Logistic { n_obs: usize, dim: usize, prior_scale: f64, data_seed: u64, coordinate: usize },
    /// Adaptive Metropolis-within-Gibbs on synthetic Poisson data; `h = α₁`.
    Poisson { n_e: usize, n_p: usize, data_seed: u64 },
}

impl ModelSpec {
    pub fn id(&self) -> &'static str {
        match self {
            ModelSpec::Iid => "iid",
            ModelSpec::Ar1 { .. } => "ar1",
            ModelSpec::Toy { .. } => "toy",
            ModelSpec::Logistic { .. } => "logistic",
            ModelSpec::Poisson { .. } => "poisson",
        }
    }

    /// The logistic setting of the coverage study: `n = 50`, `d = 4`,
    /// `s = 20`.
    pub fn logistic_default() -> Self {
        ModelSpec::Logistic { n_obs: 50, dim: 4, prior_scale: 20.0, data_seed: 1, coordinate: 0 }
    }

    /// Builds data and the reference value `π(h)`.
    ///
    /// Posterior models have no closed-form truth; it is the mean of one
    /// reference run ten times the kept length of a study chain.
    pub fn prepare(&self, n_total: usize, burn_in: usize, base_seed: u64) -> Result<PreparedModel> {
        if burn_in >= n_total {
            return Err(Error::Config(format!("burn-in {burn_in} must be below the run length {n_total}")));
        }
        let data = match *self {
            ModelSpec::Iid => ModelData::None,
            ModelSpec::Ar1 { rho } => {
                lagwin_core::chains::ar1_variance(rho)?;
                ModelData::None
            }
            ModelSpec::Toy { target_rate } => {
                let mut c = SamplerConfig::toy(n_total, burn_in);
                c.target_rate = target_rate;
                c.trace_every = n_total;
                c.validate()?;
                ModelData::None
            }
            ModelSpec::Logistic { n_obs, dim, prior_scale, data_seed, coordinate } => {
                if coordinate >= dim {
                    return Err(Error::Config(format!("coordinate {coordinate} out of range for d = {dim}")));
                }
                let d = synth_logistic_data(n_obs, dim, data_seed)?;
                ModelData::Logistic(logistic_posterior(&d.y, &d.x, dim, prior_scale)?)
            }
            ModelSpec::Poisson { n_e, n_p, data_seed } => {
                ModelData::Poisson(synth_poisson_data(n_e, n_p, &PoissonTruth::reference(n_e), data_seed)?)
            }
        };
        let mut prepared = PreparedModel {
            spec: self.clone(),
            n_total,
            burn_in,
            truth: 0.0,
            truth_source: TruthSource::Analytic,
            data,
        };
        if matches!(self, ModelSpec::Logistic { .. } | ModelSpec::Poisson { .. }) {
            let kept = n_total - burn_in;
            let seed = derive_seed(base_seed, &[label(self.id()), label("truth")]);
            let reference = PreparedModel { n_total: burn_in + 10 * kept, ..prepared.clone() };
            prepared.truth = mean(&reference.run(seed)?);
            prepared.truth_source = TruthSource::Reference { length: 10 * kept, burn_in, seed };
        }
        Ok(prepared)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TruthSource {
    Analytic,
    Reference { length: usize, burn_in: usize, seed: u64 },
}

#[derive(Debug, Clone)]
pub enum ModelData {
    None,
    Logistic(LogisticPosterior),
    Poisson(PoissonData),
}

#[derive(Debug, Clone)]
pub struct PreparedModel {
    pub spec: ModelSpec,
    pub n_total: usize,
    pub burn_in: usize,
    pub truth: f64,
    pub truth_source: TruthSource,
    pub data: ModelData,
}

impl PreparedModel {
    pub fn kept(&self) -> usize {
        self.n_total - self.burn_in
    }

    /// Post-burn-in `h` path of one run.
    pub fn run(&self, seed: u64) -> Result<Vec<f64>> {
        let (n_total, burn_in) = (self.n_total, self.burn_in);
        Ok(match (&self.spec, &self.data) {
            // AR(1) with ρ = 0 is an i.i.d. N(0, 1) sequence.
            (ModelSpec::Iid, _) => ar1_chain(0.0, n_total, seed)?.h_path.split_off(burn_in),
            (ModelSpec::Ar1 { rho }, _) => ar1_chain(*rho, n_total, seed)?.h_path.split_off(burn_in),
            (ModelSpec::Toy { target_rate }, _) => {
                let mut c = SamplerConfig::toy(n_total, burn_in);
                c.target_rate = *target_rate;
                c.trace_every = n_total;
                toy_adaptive_rwm(&c, seed)?.h_path
            }
            (ModelSpec::Logistic { coordinate, .. }, ModelData::Logistic(post)) => {
                let mut c = SamplerConfig::rwm(n_total, burn_in);
                c.h_coordinate = *coordinate;
                c.trace_every = n_total;
                adaptive_rwm(|b: &[f64]| post.log_density(b), post.dim(), &c, seed)?.chain.h_path
            }
            (ModelSpec::Poisson { .. }, ModelData::Poisson(data)) => {
                let mut c = SamplerConfig::gibbs(n_total, burn_in);
                c.trace_every = n_total;
                poisson_re_gibbs(data, &c, seed)?.h_path
            }
            _ => unreachable!("model data is built by ModelSpec::prepare"),
        })
    }
}
