//! Trait-structured community dynamics: a fixed-size population evolving by
//! death and replacement, where competitive ability ties reproduction and
//! immigration to a Gaussian fitness profile over a discrete trait grid.

use std::sync::Arc;

use crate::bounds::Bounds;
use crate::error::{Error, Result};
use crate::mathkit::stats::{gini, quantile};
use crate::models::{summary_quantile_levels, BenchmarkModel};
use crate::sampling::RngStream;
use crate::simulator::Simulator;

const POPULATION: usize = 500;
const STEPS: usize = 5000;
const GRID_SIZE: usize = 1001;

pub struct TraitModel {
    bounds: Bounds,
}

impl TraitModel {
    pub fn new() -> Self {
        Self { bounds: Bounds::new(vec![0.0; 4], vec![1.0; 4]).unwrap() }
    }

    pub fn theta_true() -> Vec<f64> {
        vec![0.2, 0.7, 0.1, 0.7]
    }
}

impl Default for TraitModel {
    fn default() -> Self {
        Self::new()
    }
}

fn normal_pdf(u: f64, mu: f64, sigma: f64) -> f64 {
    let z = (u - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// Competitive ability on the trait grid. Fails when the profile vanishes
/// everywhere (only reachable at the degenerate corner sigma = 0 with
/// positive weight).
fn fitness_profile(mu: f64, sigma: f64, omega: f64) -> Result<Vec<f64>> {
    if omega == 0.0 {
        return Ok(vec![1.0; GRID_SIZE]);
    }
    if sigma <= 0.0 {
        return Err(Error::Model {
            message: "degenerate fitness: sigma = 0 with positive omega".into(),
            theta: Vec::new(),
        });
    }
    let profile: Vec<f64> = (0..GRID_SIZE)
        .map(|k| {
            let u = k as f64 / (GRID_SIZE - 1) as f64;
            1.0 - omega + omega * normal_pdf(u, mu, sigma)
        })
        .collect();
    if profile.iter().sum::<f64>() <= 0.0 || profile.iter().any(|&f| f < 0.0) {
        return Err(Error::Model {
            message: "degenerate fitness: profile vanished on the trait grid".into(),
            theta: Vec::new(),
        });
    }
    Ok(profile)
}

/// Draw a grid index with probability proportional to the cumulative weights.
fn draw_from_cumulative(cumulative: &[f64], rng: &mut RngStream) -> usize {
    let total = *cumulative.last().unwrap();
    let r = rng.uniform() * total;
    match cumulative.binary_search_by(|probe| probe.total_cmp(&r)) {
        Ok(i) => (i + 1).min(cumulative.len() - 1),
        Err(i) => i.min(cumulative.len() - 1),
    }
}

impl Simulator for TraitModel {
    fn dim_theta(&self) -> usize {
        4
    }

    fn dim_stat(&self) -> usize {
        23
    }

    fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    fn simulate(&self, theta: &[f64], rng: &mut RngStream) -> Result<Vec<f64>> {
        let (gamma, mu, sigma, omega) = (theta[0], theta[1], theta[2], theta[3]);
        let fitness = fitness_profile(mu, sigma, omega)?;
        let cumulative: Vec<f64> = fitness
            .iter()
            .scan(0.0, |acc, &f| {
                *acc += f;
                Some(*acc)
            })
            .collect();

        // Initial traits proportional to fitness.
        let mut traits: Vec<u16> = (0..POPULATION)
            .map(|_| draw_from_cumulative(&cumulative, rng) as u16)
            .collect();
        let mut weights: Vec<f64> = traits.iter().map(|&t| fitness[t as usize]).collect();
        let mut total_weight: f64 = weights.iter().sum();

        for step in 0..STEPS {
            let victim = rng.index(POPULATION);
            let new_trait = if rng.uniform() < gamma {
                draw_from_cumulative(&cumulative, rng) as u16
            } else {
                // Descendant of an existing individual, chosen proportionally
                // to abundance times fitness; the dying individual is out.
                let victim_weight = weights[victim];
                let remaining = total_weight - victim_weight;
                let mut r = rng.uniform() * remaining;
                let mut chosen = usize::MAX;
                for (i, &w) in weights.iter().enumerate() {
                    if i == victim {
                        continue;
                    }
                    r -= w;
                    if r <= 0.0 {
                        chosen = i;
                        break;
                    }
                }
                if chosen == usize::MAX {
                    chosen = if victim == POPULATION - 1 { POPULATION - 2 } else { POPULATION - 1 };
                }
                traits[chosen]
            };
            total_weight += fitness[new_trait as usize] - weights[victim];
            traits[victim] = new_trait;
            weights[victim] = fitness[new_trait as usize];
            if step % 1024 == 1023 {
                total_weight = weights.iter().sum();
            }
        }

        // Summaries of the final population.
        let mut counts = std::collections::BTreeMap::new();
        for &t in &traits {
            *counts.entry(t).or_insert(0usize) += 1;
        }
        let richness = counts.len() as f64;
        let abundances: Vec<f64> = counts.values().map(|&c| c as f64).collect();
        let gini_index = gini(&abundances)?;

        let values: Vec<f64> =
            traits.iter().map(|&t| t as f64 / (GRID_SIZE - 1) as f64).collect();
        let quantiles = quantile(&values, &summary_quantile_levels())?;

        let mut out = Vec::with_capacity(23);
        out.push(richness);
        out.push(gini_index);
        out.extend(quantiles);
        Ok(out)
    }
}

pub struct TraitBenchmark;

impl BenchmarkModel for TraitBenchmark {
    fn name(&self) -> &'static str {
        "trait"
    }

    fn theta_true(&self) -> Vec<f64> {
        TraitModel::theta_true()
    }

    fn generate(&self, rng: &mut RngStream) -> Result<(Arc<dyn Simulator>, Vec<f64>)> {
        let model = TraitModel::new();
        let t_obs = model.simulate(&TraitModel::theta_true(), rng)?;
        Ok((Arc::new(model), t_obs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_has_23_components() {
        let model = TraitModel::new();
        let t = model
            .simulate(&TraitModel::theta_true(), &mut RngStream::new(200, 0))
            .unwrap();
        assert_eq!(t.len(), 23);
        let richness = t[0];
        assert!(richness >= 1.0 && richness <= POPULATION as f64);
        assert!((0.0..=1.0).contains(&t[1]), "gini {}", t[1]);
        // Quantiles are sorted and live on the trait grid.
        for w in t[2..].windows(2) {
            assert!(w[0] <= w[1] + 1e-12);
        }
        assert!(t[2] >= 0.0 && t[22] <= 1.0);
    }

    #[test]
    fn neutral_immigration_gives_uniform_traits() {
        // gamma = 1, omega = 0: every replacement is an immigrant with a flat
        // profile, so final traits are i.i.d. uniform on the grid and the
        // median statistic concentrates at one half.
        let model = TraitModel::new();
        let mut acc = 0.0;
        let seeds = 500;
        for s in 0..seeds {
            let t = model
                .simulate(&[1.0, 0.5, 0.5, 0.0], &mut RngStream::new(201, s))
                .unwrap();
            acc += t[12]; // the 0.50 quantile: index 2 + 10
        }
        let mean_median = acc / seeds as f64;
        assert!((mean_median - 0.5).abs() < 0.05, "mean median {mean_median}");
    }

    #[test]
    fn degenerate_sigma_with_positive_omega_is_a_model_error() {
        let model = TraitModel::new();
        match model.simulate(&[0.2, 0.7, 0.0, 0.7], &mut RngStream::new(202, 0)) {
            Err(Error::Model { message, .. }) => assert!(message.contains("sigma")),
            other => panic!("expected model error, got {other:?}"),
        }
    }

    #[test]
    fn sigma_zero_with_zero_omega_is_fine() {
        let model = TraitModel::new();
        let t = model.simulate(&[0.5, 0.7, 0.0, 0.0], &mut RngStream::new(203, 0)).unwrap();
        assert_eq!(t.len(), 23);
    }

    #[test]
    fn strong_selection_concentrates_traits() {
        let model = TraitModel::new();
        let selective = model
            .simulate(&[0.9, 0.7, 0.02, 0.999], &mut RngStream::new(204, 0))
            .unwrap();
        // With sharp fitness around mu = 0.7 the interquartile spread of the
        // trait distribution collapses toward zero.
        let iqr = selective[17] - selective[7]; // 0.75 and 0.25 quantiles
        assert!(iqr < 0.2, "iqr {iqr}");
        let median = selective[12];
        assert!((median - 0.7).abs() < 0.1, "median {median}");
    }

    #[test]
    fn deterministic_per_stream() {
        let model = TraitModel::new();
        let a = model.simulate(&[0.3, 0.5, 0.2, 0.5], &mut RngStream::new(205, 5)).unwrap();
        let b = model.simulate(&[0.3, 0.5, 0.2, 0.5], &mut RngStream::new(205, 5)).unwrap();
        assert_eq!(a, b);
    }
}
