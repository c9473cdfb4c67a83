use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DocumentSet, TopicError};
use crate::control::JobControl;
use crate::time::{Level, PeriodRange};

const MIN_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdaParams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl LdaParams {
    /// Defaults for `k` topics: `alpha = 50 / k`, `beta = 0.01`, 500 sweeps.
    pub fn with_k(k: usize) -> Self {
        LdaParams { k, alpha: 50.0 / k.max(1) as f64, beta: 0.01, iterations: 500, seed: 0 }
    }

    pub fn validate(&self) -> Result<(), TopicError> {
        if self.k == 0 {
            return Err(TopicError::InvalidHyperparameter("k"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(TopicError::InvalidHyperparameter("alpha"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(TopicError::InvalidHyperparameter("beta"));
        }
        if self.iterations < MIN_ITERATIONS {
            return Err(TopicError::InvalidHyperparameter("iterations"));
        }
        Ok(())
    }
}

impl Default for LdaParams {
    fn default() -> Self {
        LdaParams::with_k(20)
    }
}

/// Fitted model. `phi` is `K x V` (topic-word), `theta` is `D x K`
/// (document-topic); both are row-stochastic with strictly positive
/// entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    pub params: LdaParams,
    pub level: Level,
    pub window: Option<PeriodRange>,
    pub account_ids: Vec<String>,
    pub vocabulary: Vec<String>,
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
}

impl TopicModel {
    pub fn k(&self) -> usize {
        self.phi.len()
    }

    pub fn n_docs(&self) -> usize {
        self.theta.len()
    }
}

pub fn fit_lda(docs: &DocumentSet, params: &LdaParams) -> Result<TopicModel, TopicError> {
    fit_lda_with(docs, params, &JobControl::new())
}

/// Collapsed Gibbs sampling from seeded uniform topic assignments. The
/// control is polled before every sweep.
pub fn fit_lda_with(docs: &DocumentSet, params: &LdaParams, control: &JobControl) -> Result<TopicModel, TopicError> {
    params.validate()?;
    if docs.is_empty() || docs.token_count() == 0 {
        return Err(TopicError::EmptyDocuments);
    }
    let k = params.k;
    let v = docs.vocabulary.len();
    let index: HashMap<&str, usize> = docs.vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let words: Vec<Vec<usize>> = docs.documents.iter().map(|(_, toks)| toks.iter().map(|t| index[t.as_str()]).collect()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut n_dk = vec![vec![0u32; k]; words.len()];
    let mut n_kw = vec![vec![0u32; v]; k];
    let mut n_k = vec![0u32; k];
    let mut z: Vec<Vec<usize>> = words
        .iter()
        .enumerate()
        .map(|(d, ws)| {
            ws.iter()
                .map(|&w| {
                    let t = rng.gen_range(0..k);
                    n_dk[d][t] += 1;
                    n_kw[t][w] += 1;
                    n_k[t] += 1;
                    t
                })
                .collect()
        })
        .collect();

    let vbeta = v as f64 * params.beta;
    let mut weights = vec![0.0f64; k];
    for sweep in 0..params.iterations {
        if control.is_cancelled() {
            return Err(TopicError::Cancelled);
        }
        for (d, ws) in words.iter().enumerate() {
            for (i, &w) in ws.iter().enumerate() {
                let old = z[d][i];
                n_dk[d][old] -= 1;
                n_kw[old][w] -= 1;
                n_k[old] -= 1;

                let mut total = 0.0;
                for t in 0..k {
                    total += (n_dk[d][t] as f64 + params.alpha) * (n_kw[t][w] as f64 + params.beta) / (n_k[t] as f64 + vbeta);
                    weights[t] = total;
                }
                let u = rng.gen::<f64>() * total;
                let new = weights.partition_point(|&c| c <= u).min(k - 1);

                z[d][i] = new;
                n_dk[d][new] += 1;
                n_kw[new][w] += 1;
                n_k[new] += 1;
            }
        }
        control.report((sweep + 1) as f64 / params.iterations as f64);
    }

    let phi = (0..k)
        .map(|t| {
            let denom = n_k[t] as f64 + vbeta;
            (0..v).map(|w| (n_kw[t][w] as f64 + params.beta) / denom).collect()
        })
        .collect();
    let kalpha = k as f64 * params.alpha;
    let theta = words
        .iter()
        .enumerate()
        .map(|(d, ws)| {
            let denom = ws.len() as f64 + kalpha;
            (0..k).map(|t| (n_dk[d][t] as f64 + params.alpha) / denom).collect()
        })
        .collect();

    Ok(TopicModel {
        params: *params,
        level: docs.level,
        window: docs.window,
        account_ids: docs.documents.iter().map(|(id, _)| id.clone()).collect(),
        vocabulary: docs.vocabulary.clone(),
        phi,
        theta,
    })
}
