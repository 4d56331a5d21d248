//! Drawing whole weighted graphs from a fitted ensemble.
//!
//! Pairs are visited in lexicographic order `(0,1), (0,2), ..., (N-2,N-1)`
//! and each consumes one uniform for the link decision plus one more for the
//! weight when a link with a geometric tail is created. A sequence of
//! samples shares a single ChaCha8 stream seeded from `SampleConfig::seed`,
//! so the whole sequence is fixed by the seed and the model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{Ensemble, WeightLaw};
use crate::error::{Error, Result};
use crate::graph::{index_labels, WeightedGraph};
use crate::metrics::property_table;

/// Models the sampler accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampledModel {
    Ecm,
    Ts,
    GdpTs,
}

impl SampledModel {
    /// Matches [`Ensemble::name`].
    pub fn name(self) -> &'static str {
        match self {
            SampledModel::Ecm => "ecm",
            SampledModel::Ts => "ts",
            SampledModel::GdpTs => "gdp_ts",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub model: SampledModel,
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Domain("n_samples must be >= 1".into()));
        }
        Ok(())
    }
}

/// Draws one pair: `0` for no link, otherwise the weight.
///
/// The link appears with probability `p`; its weight is
/// `1 + floor(ln U / ln R)` with `U` uniform on `(0, 1]`, which is geometric
/// with `P(w) = R^{w-1} (1 - R)`.
pub fn sample_pair_weight<R: Rng + ?Sized>(rng: &mut R, p: f64, ratio: f64) -> u64 {
    if rng.random::<f64>() >= p {
        return 0;
    }
    if ratio <= 0.0 {
        return 1;
    }
    let u = 1.0 - rng.random::<f64>();
    1 + (u.ln() / ratio.ln()).floor() as u64
}

/// Per-pair `(p, R)` in lexicographic pair order.
fn pair_laws<M: Ensemble + ?Sized>(model: &M, cfg: &SampleConfig) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    if model.name() != cfg.model.name() {
        return Err(Error::Domain(format!(
            "sample config is for {} but the model is {}",
            cfg.model.name(),
            model.name()
        )));
    }
    let n = model.n();
    let mut laws = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let p = model.link_prob(i, j);
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Domain(format!("p[{i},{j}] = {p} outside [0, 1]")));
            }
            let ratio = match model.weight_law(i, j) {
                WeightLaw::Binary => 0.0,
                WeightLaw::Geometric(r) if (0.0..1.0).contains(&r) => r,
                WeightLaw::Geometric(r) => {
                    return Err(Error::Domain(format!(
                        "y_i y_j = {r} at pair ({i}, {j}) must lie in [0, 1)"
                    )))
                }
                WeightLaw::Exponential(_) => {
                    return Err(Error::Domain("continuous weights cannot be sampled".into()))
                }
            };
            laws.push((p, ratio));
        }
    }
    Ok(laws)
}

/// A stream of independent graphs from one model.
#[derive(Debug, Clone)]
pub struct EnsembleSampler {
    n: usize,
    labels: Vec<String>,
    laws: Vec<(f64, f64)>,
    rng: ChaCha8Rng,
}

impl EnsembleSampler {
    pub fn new<M: Ensemble + ?Sized>(model: &M, cfg: &SampleConfig) -> Result<Self> {
        Ok(Self {
            n: model.n(),
            labels: index_labels(model.n()),
            laws: pair_laws(model, cfg)?,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
        })
    }

    /// Node labels of the drawn graphs; index labels by default.
    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn draw(&mut self) -> WeightedGraph {
        let mut edges = Vec::new();
        let mut laws = self.laws.iter();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let &(p, ratio) = laws.next().expect("one law per pair");
                let w = sample_pair_weight(&mut self.rng, p, ratio);
                if w > 0 {
                    edges.push((i, j, w));
                }
            }
        }
        WeightedGraph::from_weights(self.labels.clone(), edges).expect("pairs are distinct")
    }
}

/// One graph drawn with `cfg.seed`; the first graph of the matching
/// [`EnsembleSampler`] sequence.
pub fn sample_graph<M: Ensemble + ?Sized>(model: &M, cfg: &SampleConfig) -> Result<WeightedGraph> {
    Ok(EnsembleSampler::new(model, cfg)?.draw())
}

/// Running mean and unbiased variance.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Zero for a single observation.
    fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    fn mean(&self) -> Option<f64> {
        (self.count > 0).then_some(self.mean)
    }
}

/// Sample mean of a metric over the samples where it is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampledMetric {
    pub mean: Option<f64>,
    /// Number of samples in which the metric was defined.
    pub defined: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeStatistics {
    pub mean_k: f64,
    pub var_k: f64,
    pub mean_s: f64,
    pub var_s: f64,
    pub annd: SampledMetric,
    pub clustering: SampledMetric,
    pub anns: SampledMetric,
    pub wclustering: SampledMetric,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStatistics {
    pub n_samples: usize,
    pub nodes: Vec<NodeStatistics>,
}

/// Monte Carlo means and variances of degrees and strengths, plus mean
/// observed metrics, over `cfg.n_samples` draws. Variances use the `n - 1`
/// denominator and are zero for a single sample.
pub fn ensemble_statistics<M: Ensemble + ?Sized>(
    model: &M,
    cfg: &SampleConfig,
) -> Result<EnsembleStatistics> {
    let mut sampler = EnsembleSampler::new(model, cfg)?;
    let n = model.n();
    let mut acc = vec![[Moments::default(); 6]; n];
    for _ in 0..cfg.n_samples {
        let table = property_table(&sampler.draw());
        for (slots, row) in acc.iter_mut().zip(&table.rows) {
            slots[0].push(row.k as f64);
            slots[1].push(row.s as f64);
            for (slot, value) in slots[2..]
                .iter_mut()
                .zip([row.annd, row.clustering, row.anns, row.wclustering])
            {
                if let Some(v) = value {
                    slot.push(v);
                }
            }
        }
    }
    let metric = |m: &Moments| SampledMetric {
        mean: m.mean(),
        defined: m.count,
    };
    Ok(EnsembleStatistics {
        n_samples: cfg.n_samples,
        nodes: acc
            .iter()
            .map(|s| NodeStatistics {
                mean_k: s[0].mean,
                var_k: s[0].variance(),
                mean_s: s[1].mean,
                var_s: s[1].variance(),
                annd: metric(&s[2]),
                clustering: metric(&s[3]),
                anns: metric(&s[4]),
                wclustering: metric(&s[5]),
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::FitnessVectors;

    fn ts_config(seed: u64, n_samples: usize) -> SampleConfig {
        SampleConfig {
            seed,
            n_samples,
            model: SampledModel::Ts,
        }
    }

    /// Bernoulli link, then extra units with probability `R` until a stop.
    fn loop_weight<R: Rng>(rng: &mut R, p: f64, ratio: f64) -> u64 {
        if rng.random::<f64>() >= p {
            return 0;
        }
        let mut w = 1;
        while rng.random::<f64>() < ratio {
            w += 1;
        }
        w
    }

    #[test]
    fn zero_y_gives_unit_weights() {
        let model = FitnessVectors::Ts {
            z: vec![1.0, 2.0, 0.5, 3.0, 1.5],
            y: vec![0.0; 5],
        };
        let mut sampler = EnsembleSampler::new(&model, &ts_config(1, 1)).unwrap();
        for _ in 0..200 {
            assert!(sampler.draw().edges().all(|(_, _, w)| w == 1));
        }
    }

    #[test]
    fn zero_probability_never_links() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1_000_000).all(|_| sample_pair_weight(&mut rng, 0.0, 0.5) == 0));
    }

    #[test]
    fn pair_frequencies_at_half_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let draws = 1_000_000;
        let mut counts = [0u64; 3];
        for _ in 0..draws {
            let w = sample_pair_weight(&mut rng, 0.5, 0.5) as usize;
            if w < 3 {
                counts[w] += 1;
            }
        }
        for (w, expected) in [(0, 0.5), (1, 0.25), (2, 0.125)] {
            let sd = (draws as f64 * expected * (1.0 - expected)).sqrt();
            let dev = (counts[w] as f64 - draws as f64 * expected).abs();
            assert!(dev < 3.0 * sd, "w = {w}: {} vs {expected}", counts[w]);
        }
    }

    #[test]
    fn inversion_matches_loop_oracle_in_mean() {
        let (p, r) = (0.7, 0.8);
        let draws = 400_000;
        let mut a = ChaCha8Rng::seed_from_u64(8);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let mean_inv = (0..draws).map(|_| sample_pair_weight(&mut a, p, r)).sum::<u64>() as f64
            / draws as f64;
        let mean_loop =
            (0..draws).map(|_| loop_weight(&mut b, p, r)).sum::<u64>() as f64 / draws as f64;
        let expected = p / (1.0 - r);
        // Var(w) = p (1 + R) / (1 - R)^2 - <w>^2
        let sd = ((p * (1.0 + r) / (1.0 - r).powi(2) - expected * expected) / draws as f64).sqrt();
        assert!((mean_inv - expected).abs() < 4.0 * sd);
        assert!((mean_loop - expected).abs() < 4.0 * sd);
    }

    #[test]
    fn seeded_draws_are_reproducible() {
        let model = FitnessVectors::Ts {
            z: vec![1.0, 2.0, 0.5, 3.0],
            y: vec![0.3, 0.6, 0.1, 0.8],
        };
        let a = sample_graph(&model, &ts_config(42, 1)).unwrap();
        let b = sample_graph(&model, &ts_config(42, 1)).unwrap();
        assert_eq!(a, b);
        let stats_a = ensemble_statistics(&model, &ts_config(42, 20)).unwrap();
        let stats_b = ensemble_statistics(&model, &ts_config(42, 20)).unwrap();
        assert_eq!(stats_a, stats_b);
    }

    #[test]
    fn single_sample_statistics_equal_the_sample() {
        let model = FitnessVectors::Ts {
            z: vec![1.0, 2.0, 0.5, 3.0, 0.9],
            y: vec![0.3, 0.6, 0.1, 0.8, 0.5],
        };
        let cfg = ts_config(5, 1);
        let graph = sample_graph(&model, &cfg).unwrap();
        let stats = ensemble_statistics(&model, &cfg).unwrap();
        let table = property_table(&graph);
        for (node, row) in stats.nodes.iter().zip(&table.rows) {
            assert_eq!(node.mean_k, row.k as f64);
            assert_eq!(node.mean_s, row.s as f64);
            assert_eq!(node.var_k, 0.0);
            assert_eq!(node.annd.mean, row.annd);
            assert_eq!(node.wclustering.mean, row.wclustering);
        }
    }

    #[test]
    fn rejects_bad_models_and_configs() {
        let model = FitnessVectors::Ts {
            z: vec![1.0, 1.0],
            y: vec![0.5, 0.5],
        };
        let mut cfg = ts_config(0, 0);
        assert!(sample_graph(&model, &cfg).is_err());
        cfg.n_samples = 1;
        cfg.model = SampledModel::Ecm;
        assert!(matches!(sample_graph(&model, &cfg), Err(Error::Domain(_))));
        let saturated = FitnessVectors::Ts {
            z: vec![1.0, 1.0],
            y: vec![1.0, 1.0],
        };
        assert!(sample_graph(&saturated, &ts_config(0, 1)).is_err());
    }
}
