//! Real-coded genetic algorithm for PD gains and fuzzy membership vertices.
//!
//! Generational scheme with elitism, tournament selection, BLX-0.5 crossover
//! and Gaussian mutation. Fitness is the weighted absolute-error integral of
//! a closed-loop step simulation; lower is better.
//!
//! Every random decision draws from a ChaCha stream keyed by
//! `(seed, generation, slot)`, so results do not depend on the order in
//! which fitness evaluations complete.

use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::controllers::{Controller, PdGains};
use crate::error::{Error, Result};
use crate::fuzzy::{FuzzyController, FuzzyVariable};
use crate::integrator::{simulate, SimConfig, SimTrace};
use crate::metrics::itae;
use crate::plant::{PlantParams, Vec2};

/// Base penalty for individuals whose simulation diverges.
pub const PENALTY: f64 = 1e9;

pub const KP_BOUNDS: (f64, f64) = (1.0, 400.0);
pub const KD_BOUNDS: (f64, f64) = (0.1, 60.0);

/// Relative offset used to push a right vertex off its peak.
const ORDER_REPAIR: f64 = 1e-3;

/// What the chromosome encodes.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)] // built once per run
pub enum Task {
    /// Genes `(kp1, kd1, kp2, kd2)`.
    Pd,
    /// Right vertices of every label, ordered error, rate, output and NL to PL
    /// within each variable. Left vertices, peaks, universes, rules and scaling
    /// come from `base`.
    Flc { base: FuzzyController },
}

impl Task {
    pub fn flc_default() -> Self {
        Task::Flc {
            base: FuzzyController::default(),
        }
    }

    pub fn gene_count(&self) -> usize {
        match self {
            Task::Pd => 4,
            Task::Flc { .. } => 15,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Task::Pd => "ga-pd",
            Task::Flc { .. } => "ga-flc",
        }
    }

    /// Chromosome reproducing an existing controller of this task's family.
    pub fn encode(&self, controller: &Controller) -> Option<Chromosome> {
        match (self, controller) {
            (Task::Pd, Controller::Pd(g) | Controller::GaPd(g)) => Some(Chromosome::new(vec![
                g.kp()[0],
                g.kd()[0],
                g.kp()[1],
                g.kd()[1],
            ])),
            (Task::Flc { .. }, Controller::Flc(f) | Controller::GaFlc(f)) => Some(Chromosome::new(
                f.variables()
                    .iter()
                    .flat_map(|(_, v)| v.mfs().map(|m| m.right()))
                    .collect(),
            )),
            _ => None,
        }
    }

    pub fn decode(&self, chromosome: &Chromosome) -> Result<Controller> {
        let g = &chromosome.genes;
        if g.len() != self.gene_count() {
            return Err(Error::Config(format!(
                "{} expects {} genes, got {}",
                self.name(),
                self.gene_count(),
                g.len()
            )));
        }
        match self {
            Task::Pd => Ok(Controller::GaPd(PdGains::new(
                Vec2::new(g[0], g[2]),
                Vec2::new(g[1], g[3]),
            )?)),
            Task::Flc { base } => {
                let mut f = base.clone();
                f.error = base.error.with_rights(&g[0..5])?;
                f.rate = base.rate.with_rights(&g[5..10])?;
                f.output = base.output.with_rights(&g[10..15])?;
                Ok(Controller::GaFlc(f))
            }
        }
    }

    fn peaks(&self) -> Option<Vec<f64>> {
        match self {
            Task::Pd => None,
            Task::Flc { base } => Some(
                base.variables()
                    .iter()
                    .flat_map(|(_, v)| v.mfs().map(|m| m.peak()))
                    .collect(),
            ),
        }
    }
}

/// Per-gene `(low, high)` intervals.
///
/// Fuzzy genes range over `(peak, peak + 2·half_width]` of the base
/// geometry, and the output PL vertex may not exceed its base value.
pub fn encode_bounds(task: &Task) -> Vec<(f64, f64)> {
    match task {
        Task::Pd => vec![KP_BOUNDS, KD_BOUNDS, KP_BOUNDS, KD_BOUNDS],
        Task::Flc { base } => {
            let var_bounds = |v: &FuzzyVariable, cap_last: bool| {
                v.mfs()
                    .iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let hw = m.right() - m.peak();
                        let hi = if cap_last && k == 4 { m.right() } else { m.peak() + 2.0 * hw };
                        (m.peak(), hi)
                    })
                    .collect::<Vec<_>>()
            };
            let mut b = var_bounds(&base.error, false);
            b.extend(var_bounds(&base.rate, false));
            b.extend(var_bounds(&base.output, true));
            b
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    pub genes: Vec<f64>,
}

impl Chromosome {
    pub fn new(genes: Vec<f64>) -> Self {
        Self { genes }
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// True if every gene is inside its bounds and, for fuzzy tasks, every
    /// right vertex lies strictly beyond its peak.
    pub fn is_valid(&self, task: &Task, bounds: &[(f64, f64)]) -> bool {
        let in_bounds = self
            .genes
            .iter()
            .zip(bounds)
            .all(|(g, (lo, hi))| g.is_finite() && g >= lo && g <= hi);
        let ordered = task
            .peaks()
            .is_none_or(|p| self.genes.iter().zip(&p).all(|(g, pk)| g > pk));
        self.genes.len() == bounds.len() && in_bounds && ordered
    }
}

/// Clamps genes into bounds and pushes fuzzy right vertices off their peaks.
pub fn repair(chromosome: &mut Chromosome, task: &Task, bounds: &[(f64, f64)]) {
    for (g, &(lo, hi)) in chromosome.genes.iter_mut().zip(bounds) {
        *g = if g.is_nan() { lo } else { g.clamp(lo, hi) };
    }
    if let Some(peaks) = task.peaks() {
        for ((g, pk), &(lo, hi)) in chromosome.genes.iter_mut().zip(peaks).zip(bounds) {
            if *g <= pk {
                *g = pk + ORDER_REPAIR * (hi - lo);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub mutation_sigma: f64,
    pub tournament_size: usize,
    pub elite_count: usize,
    pub seed: u64,
    /// Integration step used inside fitness simulations; `None` keeps the
    /// experiment's step size.
    pub fitness_step_size: Option<f64>,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            generations: 100,
            crossover_rate: 0.8,
            mutation_rate: 0.1,
            mutation_sigma: 0.1,
            tournament_size: 3,
            elite_count: 2,
            seed: 42,
            fitness_step_size: None,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.population_size < 2 {
            return bad(format!("population_size must be >= 2, got {}", self.population_size));
        }
        if self.elite_count >= self.population_size {
            return bad("elite_count must be smaller than population_size".into());
        }
        for (name, p) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if !(self.mutation_sigma.is_finite() && self.mutation_sigma >= 0.0) {
            return bad(format!("mutation_sigma must be non-negative, got {}", self.mutation_sigma));
        }
        if self.tournament_size < 1 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament_size must lie in [1, {}], got {}",
                self.population_size, self.tournament_size
            ));
        }
        if let Some(h) = self.fitness_step_size {
            if !(h.is_finite() && h > 0.0) {
                return bad(format!("fitness_step_size must be positive, got {h}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitnessReport {
    pub value: f64,
    pub trace: Option<SimTrace>,
    pub feasible: bool,
}

impl FitnessReport {
    fn infeasible(tiebreak: f64) -> Self {
        Self {
            value: PENALTY + tiebreak,
            trace: None,
            feasible: false,
        }
    }
}

/// Decodes, simulates and scores one chromosome.
///
/// Divergence at step `k` of `n` scores `PENALTY + (n + 1 - k)`, so earlier
/// failures rank worse. Chromosomes are repaired before decoding.
pub fn evaluate_fitness(chromosome: &Chromosome, task: &Task, plant: &PlantParams, sim_cfg: &SimConfig) -> FitnessReport {
    let bounds = encode_bounds(task);
    let mut c = chromosome.clone();
    if !c.is_valid(task, &bounds) {
        repair(&mut c, task, &bounds);
    }
    let steps = sim_cfg.steps() as f64;
    let Ok(controller) = task.decode(&c) else {
        return FitnessReport::infeasible(steps + 1.0);
    };
    match simulate(plant, &controller, sim_cfg) {
        Ok(trace) => {
            let value = itae(&trace, &sim_cfg.reference());
            if value.is_finite() && value < PENALTY {
                FitnessReport {
                    value,
                    trace: Some(trace),
                    feasible: true,
                }
            } else {
                FitnessReport::infeasible(0.0)
            }
        }
        Err(Error::Diverged { step }) => FitnessReport::infeasible(steps + 1.0 - step as f64),
        Err(_) => FitnessReport::infeasible(steps + 1.0),
    }
}

/// Random stream for one `(generation, slot)` pair.
pub fn substream(seed: u64, generation: usize, slot: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((generation as u64) << 32) | slot as u64);
    rng
}

/// Index of the best of `tournament_size` distinct random contestants;
/// ties go to the lowest index.
pub fn select_tournament<R: Rng + ?Sized>(fitnesses: &[f64], tournament_size: usize, rng: &mut R) -> usize {
    let n = fitnesses.len();
    assert!(n > 0, "tournament over an empty population");
    let k = tournament_size.clamp(1, n);
    index::sample(rng, n, k)
        .into_iter()
        .min_by(|&a, &b| fitnesses[a].total_cmp(&fitnesses[b]).then(a.cmp(&b)))
        .expect("non-empty sample")
}

/// BLX-0.5: each child gene is uniform on `[min - d/2, max + d/2]`, `d = |x - y|`,
/// then clamped into bounds. With probability `1 - rate` the parents are copied.
pub fn crossover_blx<R: Rng + ?Sized>(
    parent_a: &Chromosome,
    parent_b: &Chromosome,
    rate: f64,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    assert_eq!(parent_a.len(), parent_b.len(), "parents differ in length");
    if rng.random::<f64>() >= rate {
        return (parent_a.clone(), parent_b.clone());
    }
    let mut a = parent_a.clone();
    let mut b = parent_b.clone();
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let (x, y) = (parent_a.genes[i], parent_b.genes[i]);
        let d = (x - y).abs();
        if d == 0.0 {
            continue;
        }
        let (min, max) = (x.min(y) - 0.5 * d, x.max(y) + 0.5 * d);
        a.genes[i] = rng.random_range(min..=max).clamp(lo, hi);
        b.genes[i] = rng.random_range(min..=max).clamp(lo, hi);
    }
    (a, b)
}

/// Perturbs each gene with probability `rate` by `N(0, (sigma_fraction·width)²)`,
/// then clamps and repairs.
pub fn mutate_gaussian<R: Rng + ?Sized>(
    chromosome: &Chromosome,
    rate: f64,
    sigma_fraction: f64,
    task: &Task,
    bounds: &[(f64, f64)],
    rng: &mut R,
) -> Chromosome {
    let mut out = chromosome.clone();
    for (g, &(lo, hi)) in out.genes.iter_mut().zip(bounds) {
        if rng.random::<f64>() < rate {
            let sigma = sigma_fraction * (hi - lo);
            if sigma > 0.0 {
                *g += Normal::new(0.0, sigma).expect("finite sigma").sample(rng);
            }
        }
    }
    repair(&mut out, task, bounds);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    /// Mean over feasible individuals; `None` if all diverged.
    pub mean_fitness: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best: Chromosome,
    pub best_fitness: f64,
    /// All-time best fitness after each generation, starting with the initial population.
    pub history: Vec<GenerationStats>,
}

impl OptimizeResult {
    pub fn best_history(&self) -> Vec<f64> {
        self.history.iter().map(|g| g.best_fitness).collect()
    }

    /// Generation log as CSV: `generation,best_fitness,mean_fitness`.
    pub fn log_csv(&self) -> String {
        let mut s = String::from("generation,best_fitness,mean_fitness\n");
        for g in &self.history {
            let mean = g.mean_fitness.map_or_else(|| "NA".to_string(), |m| format!("{m:?}"));
            let _ = writeln!(s, "{},{:?},{mean}", g.generation, g.best_fitness);
        }
        s
    }

    pub fn parse_log_csv(text: &str) -> Result<Vec<GenerationStats>> {
        let mut lines = text.lines().enumerate();
        if lines.next().map(|(_, l)| l) != Some("generation,best_fitness,mean_fitness") {
            return Err(Error::Parse {
                line: 1,
                msg: "expected header 'generation,best_fitness,mean_fitness'".into(),
            });
        }
        lines
            .map(|(idx, line)| {
                let err = |msg: &str| Error::Parse {
                    line: idx + 1,
                    msg: msg.to_string(),
                };
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 3 {
                    return Err(err("expected 3 fields"));
                }
                Ok(GenerationStats {
                    generation: f[0].parse().map_err(|_| err("bad generation"))?,
                    best_fitness: f[1].parse().map_err(|_| err("bad best_fitness"))?,
                    mean_fitness: match f[2] {
                        "NA" => None,
                        v => Some(v.parse().map_err(|_| err("bad mean_fitness"))?),
                    },
                })
            })
            .collect()
    }
}

fn stats(generation: usize, fitness: &[f64], best_so_far: f64) -> GenerationStats {
    let feasible: Vec<f64> = fitness.iter().copied().filter(|f| *f < PENALTY).collect();
    GenerationStats {
        generation,
        best_fitness: best_so_far,
        mean_fitness: (!feasible.is_empty()).then(|| feasible.iter().sum::<f64>() / feasible.len() as f64),
    }
}

fn argmin(fitness: &[f64]) -> usize {
    (0..fitness.len())
        .min_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)))
        .expect("non-empty population")
}

/// Runs the generational GA and returns the all-time best individual.
pub fn optimize(task: &Task, plant: &PlantParams, sim_cfg: &SimConfig, ga_cfg: &GaConfig) -> Result<OptimizeResult> {
    ga_cfg.validate()?;
    let mut fit_cfg = *sim_cfg;
    if let Some(h) = ga_cfg.fitness_step_size {
        fit_cfg.step_size = h;
    }
    fit_cfg.validate()?;
    let bounds = encode_bounds(task);
    let n = ga_cfg.population_size;
    let evaluate = |pop: &[Chromosome]| -> Vec<f64> {
        pop.par_iter()
            .map(|c| evaluate_fitness(c, task, plant, &fit_cfg).value)
            .collect()
    };

    let mut population: Vec<Chromosome> = (0..n)
        .map(|i| {
            let mut rng = substream(ga_cfg.seed, 0, i);
            let mut c = Chromosome::new(bounds.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect());
            repair(&mut c, task, &bounds);
            c
        })
        .collect();
    let mut fitness = evaluate(&population);
    let mut best_idx = argmin(&fitness);
    let mut best = population[best_idx].clone();
    let mut best_fitness = fitness[best_idx];
    let mut history = vec![stats(0, &fitness, best_fitness)];

    for generation in 1..=ga_cfg.generations {
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| fitness[a].total_cmp(&fitness[b]).then(a.cmp(&b)));
        let mut next: Vec<Chromosome> = order[..ga_cfg.elite_count].iter().map(|&i| population[i].clone()).collect();
        let mut next_fitness: Vec<f64> = order[..ga_cfg.elite_count].iter().map(|&i| fitness[i]).collect();

        let mut children = Vec::with_capacity(n - next.len());
        let mut slot = next.len();
        while next.len() + children.len() < n {
            let mut rng = substream(ga_cfg.seed, generation, slot);
            let pa = select_tournament(&fitness, ga_cfg.tournament_size, &mut rng);
            let pb = select_tournament(&fitness, ga_cfg.tournament_size, &mut rng);
            let (ca, cb) = crossover_blx(&population[pa], &population[pb], ga_cfg.crossover_rate, &bounds, &mut rng);
            for child in [ca, cb] {
                if next.len() + children.len() < n {
                    children.push(mutate_gaussian(
                        &child,
                        ga_cfg.mutation_rate,
                        ga_cfg.mutation_sigma,
                        task,
                        &bounds,
                        &mut rng,
                    ));
                }
            }
            slot += 2;
        }
        next_fitness.extend(evaluate(&children));
        next.extend(children);
        population = next;
        fitness = next_fitness;

        best_idx = argmin(&fitness);
        if fitness[best_idx] < best_fitness {
            best_fitness = fitness[best_idx];
            best = population[best_idx].clone();
        }
        history.push(stats(generation, &fitness, best_fitness));
    }

    Ok(OptimizeResult {
        best,
        best_fitness,
        history,
    })
}
