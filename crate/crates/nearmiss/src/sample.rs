//! Parameter samplers: uniform random and genetic-algorithm search.
//!
//! Both samplers draw every value from a seeded [`Rng64`], so the entire
//! sequence of generated bindings is a function of (seed, parameter specs,
//! fitness feedback). The genetic sampler works on genomes normalized to
//! [0, 1] per gene and maps them to parameter space with [`denormalize`].
//!
//! Generation scheme (all randomness in a fixed draw order, ties broken by
//! the lower index):
//! - elitism: the top `elitism` genomes by fitness are copied unchanged;
//! - selection: tournaments of `tournament` members drawn with replacement;
//! - crossover: per gene pair, swap with probability `crossover_prob`;
//! - mutation: per gene, add a Gaussian of sigma `mutation_sigma` with
//!   probability `mutation_prob` (default 1/gene count), then clamp to [0, 1].

use crate::error::Error;
use crate::rng::Rng64;
use crate::scenario::{ParamKind, ParameterSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type Bindings = BTreeMap<String, f64>;

/// One candidate: genes normalized to [0, 1], one per parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct Genome {
    pub genes: Vec<f64>,
    pub fitness: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    pub generation: u32,
    pub members: Vec<Genome>,
}

/// Genetic-sampler hyperparameters, exposed through campaign configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    #[serde(default = "defaults::population_size")]
    pub population_size: usize,
    #[serde(default = "defaults::elitism")]
    pub elitism: usize,
    #[serde(default = "defaults::tournament")]
    pub tournament: usize,
    #[serde(default = "defaults::crossover_prob")]
    pub crossover_prob: f64,
    /// Per-gene mutation probability; `None` means 1 / gene count.
    #[serde(default)]
    pub mutation_prob: Option<f64>,
    #[serde(default = "defaults::mutation_sigma")]
    pub mutation_sigma: f64,
}

mod defaults {
    pub fn population_size() -> usize {
        24
    }
    pub fn elitism() -> usize {
        2
    }
    pub fn tournament() -> usize {
        3
    }
    pub fn crossover_prob() -> f64 {
        0.9
    }
    pub fn mutation_sigma() -> f64 {
        0.1
    }
}

impl Default for GaParams {
    fn default() -> Self {
        GaParams {
            population_size: defaults::population_size(),
            elitism: defaults::elitism(),
            tournament: defaults::tournament(),
            crossover_prob: defaults::crossover_prob(),
            mutation_prob: None,
            mutation_sigma: defaults::mutation_sigma(),
        }
    }
}

/// Maps a normalized genome to parameter bindings: gene `g` on `[lo, hi]`
/// becomes `lo + g * (hi - lo)`; stepped parameters snap to the nearest
/// lattice point with ties toward the lower one.
pub fn denormalize(genes: &[f64], specs: &[ParameterSpec]) -> Bindings {
    debug_assert_eq!(genes.len(), specs.len());
    genes
        .iter()
        .zip(specs)
        .map(|(&g, spec)| {
            let raw = spec.lower + g * (spec.upper - spec.lower);
            let value = match spec.kind {
                ParamKind::Continuous => raw,
                ParamKind::Stepped { step } => {
                    let t = (raw - spec.lower) / step;
                    // Round half down: ties toward the lower lattice point.
                    let k = (t - 0.5).ceil();
                    let steps = ((spec.upper - spec.lower) / step).round();
                    spec.lower + k.clamp(0.0, steps) * step
                }
            };
            (spec.name.clone(), value)
        })
        .collect()
}

/// Draws one value uniformly from a parameter's domain.
fn draw_uniform(rng: &mut Rng64, spec: &ParameterSpec) -> f64 {
    match spec.kind {
        ParamKind::Continuous => rng.uniform(spec.lower, spec.upper),
        ParamKind::Stepped { step } => {
            let points = ((spec.upper - spec.lower) / step).round() as u64 + 1;
            spec.lower + rng.below(points) as f64 * step
        }
    }
}

/// Uniform sampler: every parameter drawn independently, uniformly over its
/// range (stepped: uniformly over the lattice).
#[derive(Clone, Debug)]
pub struct UniformSampler {
    specs: Vec<ParameterSpec>,
    rng: Rng64,
}

impl UniformSampler {
    pub fn new(specs: Vec<ParameterSpec>, seed: u64) -> Self {
        UniformSampler {
            specs,
            rng: Rng64::new(seed),
        }
    }

    pub fn sample(&mut self) -> Bindings {
        self.specs
            .iter()
            .map(|spec| (spec.name.clone(), draw_uniform(&mut self.rng, spec)))
            .collect()
    }
}

/// Genetic sampler state: specs, hyperparameters, RNG, current population.
#[derive(Clone, Debug)]
pub struct GeneticSampler {
    specs: Vec<ParameterSpec>,
    params: GaParams,
    rng: Rng64,
    pub population: Population,
}

impl GeneticSampler {
    /// Generation 0 is filled with uniform random genomes.
    pub fn new(specs: Vec<ParameterSpec>, params: GaParams, seed: u64) -> Result<Self, Error> {
        if params.population_size < 2 {
            return Err(Error::BadPopulationSize(params.population_size));
        }
        let mut rng = Rng64::new(seed);
        let members = (0..params.population_size)
            .map(|_| Genome {
                genes: (0..specs.len()).map(|_| rng.next_f64()).collect(),
                fitness: None,
            })
            .collect();
        Ok(GeneticSampler {
            specs,
            params,
            rng,
            population: Population {
                generation: 0,
                members,
            },
        })
    }

    pub fn params(&self) -> &GaParams {
        &self.params
    }

    pub fn bindings_of(&self, member: usize) -> Bindings {
        denormalize(&self.population.members[member].genes, &self.specs)
    }

    pub fn set_fitness(&mut self, member: usize, fitness: f64) {
        self.population.members[member].fitness = Some(fitness);
    }

    fn mutation_prob(&self) -> f64 {
        self.params
            .mutation_prob
            .unwrap_or(1.0 / self.specs.len().max(1) as f64)
    }

    /// Indices sorted by fitness descending, ties toward the lower index.
    fn ranked(&self) -> Result<Vec<usize>, Error> {
        for (i, member) in self.population.members.iter().enumerate() {
            if member.fitness.is_none() {
                return Err(Error::UnevaluatedMember(i));
            }
        }
        let mut order: Vec<usize> = (0..self.population.members.len()).collect();
        order.sort_by(|&a, &b| {
            let fa = self.population.members[a].fitness.unwrap();
            let fb = self.population.members[b].fitness.unwrap();
            fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
        });
        Ok(order)
    }

    fn tournament_pick(&mut self) -> usize {
        let size = self.population.members.len() as u64;
        let mut best: Option<usize> = None;
        for _ in 0..self.params.tournament.max(1) {
            let candidate = self.rng.below(size) as usize;
            best = Some(match best {
                None => candidate,
                Some(current) => {
                    let fc = self.population.members[candidate].fitness.unwrap();
                    let fb = self.population.members[current].fitness.unwrap();
                    if fc > fb || (fc == fb && candidate < current) {
                        candidate
                    } else {
                        current
                    }
                }
            });
        }
        best.unwrap()
    }

    /// Builds the next generation. Requires every member to carry a fitness.
    pub fn next_generation(&mut self) -> Result<(), Error> {
        let order = self.ranked()?;
        let size = self.params.population_size;
        let elites = self.params.elitism.min(size);
        let mutation_prob = self.mutation_prob();

        let mut next: Vec<Genome> = order[..elites]
            .iter()
            .map(|&i| Genome {
                genes: self.population.members[i].genes.clone(),
                fitness: None,
            })
            .collect();

        while next.len() < size {
            let a = self.tournament_pick();
            let b = self.tournament_pick();
            let mut child_a = self.population.members[a].genes.clone();
            let mut child_b = self.population.members[b].genes.clone();
            for g in 0..child_a.len() {
                if self.rng.bernoulli(self.params.crossover_prob) {
                    std::mem::swap(&mut child_a[g], &mut child_b[g]);
                }
            }
            for child in [&mut child_a, &mut child_b] {
                for gene in child.iter_mut() {
                    if self.rng.bernoulli(mutation_prob) {
                        *gene = (*gene + self.params.mutation_sigma * self.rng.gaussian())
                            .clamp(0.0, 1.0);
                    }
                }
            }
            next.push(Genome {
                genes: child_a,
                fitness: None,
            });
            if next.len() < size {
                next.push(Genome {
                    genes: child_b,
                    fitness: None,
                });
            }
        }

        self.population = Population {
            generation: self.population.generation + 1,
            members: next,
        };
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn specs() -> Vec<ParameterSpec> {
        vec![
            ParameterSpec::continuous("a", "m", 0.0, 1.0),
            ParameterSpec::continuous("b", "m/s", 10.0, 30.0),
        ]
    }

    #[test]
    fn uniform_degenerate_range_yields_the_point() {
        let mut sampler =
            UniformSampler::new(vec![ParameterSpec::continuous("a", "m", 5.0, 5.0)], 1);
        for _ in 0..5 {
            assert_eq!(sampler.sample()["a"], 5.0);
        }
    }

    #[test]
    fn uniform_marginals_pass_decile_test() {
        let mut sampler =
            UniformSampler::new(vec![ParameterSpec::continuous("a", "m", 0.0, 1.0)], 17);
        let n = 10_000;
        let mut counts = [0usize; 10];
        let mut sum = 0.0;
        for _ in 0..n {
            let x = sampler.sample()["a"];
            sum += x;
            counts[((x * 10.0) as usize).min(9)] += 1;
        }
        assert!((0.48..=0.52).contains(&(sum / n as f64)));
        for &c in &counts {
            let f = c as f64 / n as f64;
            assert!((0.08..=0.12).contains(&f), "decile {f}");
        }
    }

    #[test]
    fn uniform_same_seed_same_sequence() {
        let mut a = UniformSampler::new(specs(), 9);
        let mut b = UniformSampler::new(specs(), 9);
        for _ in 0..100 {
            assert_eq!(a.sample(), b.sample());
        }
    }

    #[test]
    fn uniform_stepped_draws_stay_on_lattice() {
        let spec = ParameterSpec::stepped("n", "", 0.0, 10.0, 2.0);
        let mut sampler = UniformSampler::new(vec![spec.clone()], 4);
        let mut seen = std::collections::BTreeSet::new();
        for _ in 0..200 {
            let v = sampler.sample()["n"];
            assert!(spec.on_step(v) && (0.0..=10.0).contains(&v));
            seen.insert(v as i64);
        }
        assert_eq!(seen.len(), 6, "all lattice points reachable");
    }

    #[test]
    fn denormalize_endpoints_and_midpoint() {
        let s = specs();
        let b = denormalize(&[0.0, 0.0], &s);
        assert_eq!(b["a"], 0.0);
        assert_eq!(b["b"], 10.0);
        let b = denormalize(&[1.0, 1.0], &s);
        assert_eq!(b["a"], 1.0);
        assert_eq!(b["b"], 30.0);
        let b = denormalize(&[0.5, 0.5], &s);
        assert_eq!(b["b"], 20.0);
    }

    #[test]
    fn denormalize_snaps_to_nearest_lattice_ties_down() {
        let spec = vec![ParameterSpec::stepped("n", "", 0.0, 10.0, 1.0)];
        // Independent oracle: nearest lattice point by scanning.
        let nearest = |raw: f64| -> f64 {
            let mut best = 0.0;
            let mut best_d = f64::INFINITY;
            for k in 0..=10 {
                let v = k as f64;
                let d = (raw - v).abs();
                if d < best_d {
                    best_d = d;
                    best = v;
                }
            }
            best
        };
        for i in 0..=100 {
            let g = i as f64 / 100.0;
            let raw = g * 10.0;
            let got = denormalize(&[g], &spec)["n"];
            if (raw - raw.floor() - 0.5).abs() < 1e-12 {
                // Exact tie: lower point wins.
                assert_eq!(got, raw.floor(), "tie at {raw}");
            } else {
                assert_eq!(got, nearest(raw), "raw {raw}");
            }
        }
        // 0.49 maps to 4.9 which snaps up to 5.
        assert_eq!(denormalize(&[0.49], &spec)["n"], 5.0);
    }

    #[test]
    fn ga_init_shape_and_determinism() {
        let ga = GeneticSampler::new(specs(), GaParams::default(), 1).unwrap();
        assert_eq!(ga.population.members.len(), 24);
        assert_eq!(ga.population.generation, 0);
        for m in &ga.population.members {
            assert_eq!(m.genes.len(), 2);
            assert!(m.genes.iter().all(|g| (0.0..1.0).contains(g)));
            assert!(m.fitness.is_none());
        }
        let gb = GeneticSampler::new(specs(), GaParams::default(), 1).unwrap();
        assert_eq!(ga.population, gb.population);

        assert!(matches!(
            GeneticSampler::new(
                specs(),
                GaParams {
                    population_size: 1,
                    ..GaParams::default()
                },
                1
            ),
            Err(Error::BadPopulationSize(1))
        ));
    }

    #[test]
    fn next_generation_requires_fitness() {
        let mut ga = GeneticSampler::new(specs(), GaParams::default(), 2).unwrap();
        ga.set_fitness(0, 1.0);
        match ga.next_generation() {
            Err(Error::UnevaluatedMember(i)) => assert_eq!(i, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn elite_genome_survives_unchanged() {
        let mut ga = GeneticSampler::new(specs(), GaParams::default(), 3).unwrap();
        let star = ga.population.members[7].genes.clone();
        for i in 0..24 {
            ga.set_fitness(i, if i == 7 { 10.0 } else { 0.0 });
        }
        ga.next_generation().unwrap();
        assert_eq!(ga.population.generation, 1);
        assert_eq!(ga.population.members[0].genes, star);
    }

    #[test]
    fn no_variation_means_children_copy_parents() {
        let params = GaParams {
            crossover_prob: 0.0,
            mutation_prob: Some(0.0),
            ..GaParams::default()
        };
        let mut ga = GeneticSampler::new(specs(), params, 5).unwrap();
        let parents: Vec<Vec<f64>> = ga
            .population
            .members
            .iter()
            .map(|m| m.genes.clone())
            .collect();
        for i in 0..24 {
            ga.set_fitness(i, i as f64);
        }
        ga.next_generation().unwrap();
        for child in &ga.population.members {
            assert!(
                parents.contains(&child.genes),
                "child is a copy of some parent"
            );
        }
    }

    #[test]
    fn generation_preserves_size_count_and_bounds() {
        let mut ga = GeneticSampler::new(specs(), GaParams::default(), 8).unwrap();
        for generation in 0..10 {
            for i in 0..24 {
                // Any deterministic fitness will do.
                let f = ga.bindings_of(i)["a"] + generation as f64;
                ga.set_fitness(i, f);
            }
            ga.next_generation().unwrap();
            assert_eq!(ga.population.members.len(), 24);
            for m in &ga.population.members {
                assert_eq!(m.genes.len(), 2);
                assert!(m.genes.iter().all(|g| (0.0..=1.0).contains(g)));
                assert!(m.fitness.is_none());
            }
        }
        assert_eq!(ga.population.generation, 10);
    }

    #[test]
    fn elitism_keeps_max_fitness_non_decreasing() {
        // Deterministic fitness of the bindings: the elitism guarantee makes
        // the per-generation maximum non-decreasing.
        let fitness = |b: &Bindings| -(b["a"] - 0.8).abs() - (b["b"] - 25.0).abs() / 20.0;
        for seed in 0..20 {
            let mut ga = GeneticSampler::new(specs(), GaParams::default(), seed).unwrap();
            let mut previous_best = f64::NEG_INFINITY;
            for _ in 0..8 {
                let mut best = f64::NEG_INFINITY;
                for i in 0..24 {
                    let f = fitness(&ga.bindings_of(i));
                    ga.set_fitness(i, f);
                    best = best.max(f);
                }
                assert!(best >= previous_best, "seed {seed}: best fitness decreased");
                previous_best = best;
                ga.next_generation().unwrap();
            }
        }
    }

    #[test]
    fn one_generation_improves_mean_on_monotone_fitness() {
        // Statistical oracle: selection pressure on a monotone fitness should
        // raise the population mean in at least 16 of 20 seeded runs.
        let fitness = |b: &Bindings| -((1.0 - b["a"]) + (30.0 - b["b"]) / 20.0);
        let mut improved = 0;
        for seed in 100..120 {
            let mut ga = GeneticSampler::new(specs(), GaParams::default(), seed).unwrap();
            let mut mean0 = 0.0;
            for i in 0..24 {
                let f = fitness(&ga.bindings_of(i));
                ga.set_fitness(i, f);
                mean0 += f;
            }
            mean0 /= 24.0;
            ga.next_generation().unwrap();
            let mut mean1 = 0.0;
            for i in 0..24 {
                mean1 += fitness(&ga.bindings_of(i));
            }
            mean1 /= 24.0;
            if mean1 >= mean0 {
                improved += 1;
            }
        }
        assert!(improved >= 16, "only {improved}/20 runs improved");
    }

    #[test]
    fn full_sampler_determinism() {
        let run = |seed: u64| -> Vec<Bindings> {
            let mut ga = GeneticSampler::new(specs(), GaParams::default(), seed).unwrap();
            let mut sequence = Vec::new();
            for _ in 0..4 {
                for i in 0..24 {
                    let b = ga.bindings_of(i);
                    let f = b["a"] * 2.0 - b["b"] / 30.0;
                    ga.set_fitness(i, f);
                    sequence.push(b);
                }
                ga.next_generation().unwrap();
            }
            sequence
        };
        assert_eq!(run(42), run(42));
        assert_ne!(run(42), run(43));
    }
}
