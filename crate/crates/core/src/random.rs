//! Seeded random finite models for tests, benchmarks and the CLI.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ext::ExtNonnegReal;
use crate::model::{Action, MdpModel, StateWindow, TransitionRow};

#[derive(Clone, Debug, PartialEq)]
pub struct RandomModelSpec {
    pub states: usize,
    pub actions: usize,
    /// Draw each state's action count uniformly from `1..=actions`.
    pub variable_actions: bool,
    pub cost_max: f64,
    /// Put at least 20% of every row on state 0, so that every stationary
    /// policy has a single recurrent class.
    pub unichain: bool,
    /// Maximum number of destinations per row.
    pub support: usize,
}

impl RandomModelSpec {
    pub fn new(states: usize, actions: usize) -> Self {
        assert!(states >= 1 && actions >= 1);
        Self { states, actions, variable_actions: false, cost_max: 10.0, unichain: false, support: states }
    }

    pub fn unichain(mut self) -> Self {
        self.unichain = true;
        self
    }

    pub fn variable_actions(mut self) -> Self {
        self.variable_actions = true;
        self
    }

    pub fn generate(&self, seed: u64) -> MdpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.states;
        let labels = (0..n).map(|i| format!("s{i}")).collect();
        let actions = (0..n)
            .map(|_| {
                let k = if self.variable_actions { rng.random_range(1..=self.actions) } else { self.actions };
                (0..k)
                    .map(|a| {
                        let cost = ExtNonnegReal::finite(rng.random_range(0.0..=self.cost_max));
                        Action::new(format!("a{a}"), cost, self.row(&mut rng))
                    })
                    .collect()
            })
            .collect();
        MdpModel::from_parts(labels, actions, StateWindow::Complete)
    }

    fn row(&self, rng: &mut ChaCha8Rng) -> TransitionRow {
        let n = self.states;
        let size = rng.random_range(1..=self.support.clamp(1, n));
        let mut dests: Vec<usize> = sample(rng, n, size).into_iter().collect();
        dests.sort_unstable();
        let weights: Vec<f64> = dests.iter().map(|_| rng.random_range(0.05..1.0)).collect();
        let total: f64 = weights.iter().sum();
        let mut entries: Vec<(usize, f64)> = dests.into_iter().zip(weights.iter().map(|w| w / total)).collect();
        if self.unichain {
            let hub = rng.random_range(0.2..0.6);
            for e in &mut entries {
                e.1 *= 1.0 - hub;
            }
            match entries.iter_mut().find(|e| e.0 == 0) {
                Some(e) => e.1 += hub,
                None => entries.insert(0, (0, hub)),
            }
        }
        TransitionRow::new(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::InducedChain;
    use crate::model::{validate_model, StationaryPolicy};

    #[test]
    fn generated_models_validate() {
        for seed in 0..50 {
            let m = RandomModelSpec::new(6, 4).variable_actions().generate(seed);
            assert!(validate_model(&m).is_empty(), "seed {seed}: {}", validate_model(&m));
            let u = RandomModelSpec::new(5, 3).unichain().generate(seed);
            assert!(validate_model(&u).is_empty());
        }
    }

    #[test]
    fn same_seed_same_model() {
        let spec = RandomModelSpec::new(4, 2);
        assert_eq!(spec.generate(7), spec.generate(7));
        assert_ne!(spec.generate(7), spec.generate(8));
    }

    #[test]
    fn unichain_models_have_one_recurrent_class_per_policy() {
        for seed in 0..10 {
            let m = RandomModelSpec::new(4, 2).unichain().generate(seed);
            for policy in StationaryPolicy::enumerate(&m) {
                assert_eq!(InducedChain::new(&m, &policy).unwrap().recurrent_classes().len(), 1);
            }
        }
    }
}
