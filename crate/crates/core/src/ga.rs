//! Binary-encoded genetic algorithm over the quantized analog precoder set.
//!
//! Every phase-shifter setting of the analog precoder is encoded as B bits,
//! so a candidate precoder is a chromosome of `N_T·N_RF·B` bits. The search
//! loop is the classic generational GA: fitness-proportional (roulette)
//! selection with replacement, single-point crossover, per-bit mutation, and
//! full generational replacement with a small elite carried over unchanged.
//!
//! The GA never sees a true channel matrix: callers hand [`evolve`] an
//! evaluation callback from decoded precoders to fitness values, and only
//! that callback touches the channel (through the distorted effective
//! channel it can measure). Within one run the channel is assumed
//! quasi-static, so fitness values are memoized per bit pattern.
//!
//! [`exhaustive_oracle`] enumerates the whole precoder set for small
//! genomes, which is the ground truth the GA is judged against in tests.

use crate::error::{Error, Result};
use crate::precoding::AnalogPrecoder;
use crate::rng::RngStream;
use crate::{approx_f64, Scalar};
use rand::Rng;
use std::collections::HashMap;
use std::fmt;

/// Hard cap on the genome length [`exhaustive_oracle`] will enumerate.
pub const EXHAUSTIVE_CAP_BITS: usize = 24;

/// Genome dimensions: analog precoder shape and phase resolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrecoderShape {
    pub n_tx: usize,
    pub n_rf: usize,
    pub bits: u32,
}

impl PrecoderShape {
    pub fn new(n_tx: usize, n_rf: usize, bits: u32) -> Self {
        PrecoderShape { n_tx, n_rf, bits }
    }

    pub fn genome_len(&self) -> usize {
        self.n_tx * self.n_rf * self.bits as usize
    }
}

/// Binary genome with an optional cached fitness.
///
/// The cache, when present, always equals the fitness of the decoded
/// precoder under the current channel realization; the variation operators
/// clear it.
#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome<T> {
    bits: Vec<bool>,
    fitness: Option<T>,
}

impl<T: Scalar> Chromosome<T> {
    pub fn new(bits: Vec<bool>) -> Self {
        Chromosome {
            bits,
            fitness: None,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn fitness(&self) -> Option<T> {
        self.fitness
    }

    /// Integer value of the genome read MSB-first; only defined for genomes
    /// of at most 64 bits.
    pub fn binary_value(&self) -> u64 {
        assert!(self.bits.len() <= 64);
        self.bits
            .iter()
            .fold(0u64, |acc, &b| (acc << 1) | u64::from(b))
    }
}

/// Fixed-size population with a generation counter.
#[derive(Debug, Clone)]
pub struct Population<T> {
    members: Vec<Chromosome<T>>,
    generation: usize,
}

impl<T: Scalar> Population<T> {
    pub fn members(&self) -> &[Chromosome<T>] {
        &self.members
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// GA knobs with the customary defaults: population 50, 200 generations,
/// crossover probability 0.7, mutation probability 0.001, one elite.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub max_generations: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    pub elitism_count: usize,
    pub resolution_bits: u32,
    /// Stream seed used by callers that do not supply their own stream.
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            max_generations: 200,
            crossover_prob: 0.7,
            mutation_prob: 0.001,
            elitism_count: 1,
            resolution_bits: 1,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            return Err(Error::InvalidInput(format!(
                "population size must be even and at least 2, got {}",
                self.population_size
            )));
        }
        if self.max_generations == 0 {
            return Err(Error::InvalidInput("need at least one generation".into()));
        }
        for (name, p) in [
            ("crossover probability", self.crossover_prob),
            ("mutation probability", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidInput(format!("{name} {p} outside [0, 1]")));
            }
        }
        if self.elitism_count >= self.population_size {
            return Err(Error::InvalidInput(format!(
                "elitism count {} must be below the population size {}",
                self.elitism_count, self.population_size
            )));
        }
        if self.resolution_bits == 0 || self.resolution_bits > 16 {
            return Err(Error::InvalidInput(format!(
                "phase resolution must be between 1 and 16 bits, got {}",
                self.resolution_bits
            )));
        }
        Ok(())
    }
}

/// One generation's summary in a GA run.
#[derive(Debug, Clone)]
pub struct GaTraceRecord<T> {
    pub generation: usize,
    pub best_fitness: T,
    pub mean_fitness: T,
    pub best_bits: Vec<bool>,
}

/// Per-generation trace of a run. Generation 0 is the evaluated initial
/// population; with at least one elite the best-fitness column is
/// nondecreasing.
#[derive(Debug, Clone)]
pub struct GaTrace<T> {
    pub records: Vec<GaTraceRecord<T>>,
}

impl<T> Default for GaTrace<T> {
    fn default() -> Self {
        GaTrace {
            records: Vec::new(),
        }
    }
}

/// Result of a completed GA run: the highest-fitness precoder ever
/// evaluated, its fitness, and the per-generation trace.
#[derive(Debug, Clone)]
pub struct GaOutcome<T> {
    pub best: AnalogPrecoder<T>,
    pub best_fitness: T,
    pub trace: GaTrace<T>,
}

/// A GA run that stopped early; carries the trace recorded so far.
#[derive(Debug, Clone)]
pub struct EvolveAborted<T> {
    pub source: Error,
    pub generation: usize,
    pub partial: GaTrace<T>,
}

impl<T: fmt::Debug> fmt::Display for EvolveAborted<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "GA aborted at generation {}: {}",
            self.generation, self.source
        )
    }
}

impl<T: fmt::Debug> std::error::Error for EvolveAborted<T> {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.source)
    }
}

/// Decodes a chromosome into an analog precoder: bits are grouped B at a
/// time in row-major order over the `n_tx` x `n_rf` matrix, each group read
/// MSB-first as a phase index.
pub fn decode<T: Scalar>(c: &Chromosome<T>, shape: &PrecoderShape) -> Result<AnalogPrecoder<T>> {
    decode_bits(c.bits(), shape)
}

fn decode_bits<T: Scalar>(bits: &[bool], shape: &PrecoderShape) -> Result<AnalogPrecoder<T>> {
    if bits.len() != shape.genome_len() {
        return Err(Error::DimensionMismatch {
            context: "chromosome decode",
            expected: format!("{} bits", shape.genome_len()),
            found: format!("{}", bits.len()),
        });
    }
    let b = shape.bits as usize;
    let indices: Vec<u32> = bits
        .chunks(b)
        .map(|group| {
            group
                .iter()
                .fold(0u32, |acc, &bit| (acc << 1) | u32::from(bit))
        })
        .collect();
    AnalogPrecoder::from_indices(shape.n_tx, shape.n_rf, shape.bits, indices)
}

/// Inverse of [`decode`].
pub fn encode<T: Scalar>(a: &AnalogPrecoder<T>) -> Chromosome<T> {
    let b = a.bits();
    let mut bits = Vec::with_capacity(a.n_tx() * a.n_rf() * b as usize);
    for &index in a.phase_indices() {
        for shift in (0..b).rev() {
            bits.push((index >> shift) & 1 == 1);
        }
    }
    Chromosome::new(bits)
}

/// Uniform random population of `config.population_size` genomes, each bit a
/// fair coin; generation counter 0, fitness caches empty.
pub fn init_population<T: Scalar>(
    config: &GaConfig,
    genome_length: usize,
    rng: &mut RngStream,
) -> Population<T> {
    assert!(genome_length > 0, "genome length must be positive");
    let members = (0..config.population_size)
        .map(|_| Chromosome::new((0..genome_length).map(|_| rng.gen::<bool>()).collect()))
        .collect();
    Population {
        members,
        generation: 0,
    }
}

/// Roulette-wheel selection: two independent draws with replacement, each
/// member picked with probability `fitness / Σ fitness`. A population whose
/// total fitness is zero falls back to uniform selection.
pub fn roulette_select<'a, T: Scalar>(
    pop: &'a Population<T>,
    rng: &mut RngStream,
) -> Result<(&'a Chromosome<T>, &'a Chromosome<T>)> {
    let fitnesses: Vec<T> = pop
        .members
        .iter()
        .map(|m| {
            m.fitness().ok_or_else(|| {
                Error::InvalidInput("roulette selection needs every fitness evaluated".into())
            })
        })
        .collect::<Result<_>>()?;
    for &f in &fitnesses {
        if !crate::is_valid_fitness(f) {
            return Err(Error::InvalidFitness(approx_f64(f)));
        }
    }
    let total: T = fitnesses.iter().copied().fold(T::zero(), |a, b| a + b);
    let mut draw = || -> usize {
        if total.is_zero() {
            rng.gen_range(0..pop.size())
        } else {
            let target = T::uniform_01(rng) * total;
            let mut acc = T::zero();
            for (i, &f) in fitnesses.iter().enumerate() {
                acc += f;
                if target < acc {
                    return i;
                }
            }
            pop.size() - 1
        }
    };
    let a = draw();
    let b = draw();
    Ok((&pop.members[a], &pop.members[b]))
}

/// Single-point crossover: with probability `p_c` a cut point is drawn
/// uniformly from `{1, .., L-1}` and the tails are swapped; otherwise the
/// children are verbatim copies. Children always start with cleared fitness
/// caches.
pub fn crossover<T: Scalar>(
    parent_a: &Chromosome<T>,
    parent_b: &Chromosome<T>,
    p_c: f64,
    rng: &mut RngStream,
) -> (Chromosome<T>, Chromosome<T>) {
    assert_eq!(
        parent_a.len(),
        parent_b.len(),
        "crossover needs equal genome lengths"
    );
    let len = parent_a.len();
    let crossing = f64::uniform_01(rng) < p_c && len >= 2;
    if !crossing {
        return (
            Chromosome::new(parent_a.bits.clone()),
            Chromosome::new(parent_b.bits.clone()),
        );
    }
    let cut = rng.gen_range(1..len);
    (
        single_point_at(parent_a, parent_b, cut),
        single_point_at(parent_b, parent_a, cut),
    )
}

fn single_point_at<T: Scalar>(
    head: &Chromosome<T>,
    tail: &Chromosome<T>,
    cut: usize,
) -> Chromosome<T> {
    let mut bits = head.bits[..cut].to_vec();
    bits.extend_from_slice(&tail.bits[cut..]);
    Chromosome::new(bits)
}

/// Flips each bit independently with probability `p_m`; the fitness cache
/// survives only if nothing flipped.
pub fn mutate<T: Scalar>(c: &Chromosome<T>, p_m: f64, rng: &mut RngStream) -> Chromosome<T> {
    let mut bits = c.bits.clone();
    let mut flipped = false;
    for bit in bits.iter_mut() {
        if f64::uniform_01(rng) < p_m {
            *bit = !*bit;
            flipped = true;
        }
    }
    Chromosome {
        bits,
        fitness: if flipped { None } else { c.fitness },
    }
}

/// Runs the generational GA and returns the highest-fitness precoder ever
/// evaluated together with the per-generation trace.
///
/// `eval` is the only channel access: it maps a candidate analog precoder to
/// a nonnegative fitness, internally measuring whatever distorted effective
/// channel the candidate induces. Fitness values are memoized per bit
/// pattern, which is sound because the channel is quasi-static during a run.
///
/// Each new generation keeps the `elitism_count` best members unchanged and
/// fills the rest with selected, crossed, and mutated children two at a
/// time (the final pair contributes a single child when the remainder is
/// odd). A callback failure aborts the run and hands back the partial trace.
///
/// Callers that do not manage their own stream tree can use
/// [`evolve_seeded`], which builds the stream from `config.seed`.
pub fn evolve<T, F>(
    mut eval: F,
    config: &GaConfig,
    dims: (usize, usize),
    rng: &mut RngStream,
) -> std::result::Result<GaOutcome<T>, EvolveAborted<T>>
where
    T: Scalar,
    F: FnMut(&AnalogPrecoder<T>) -> Result<T>,
{
    let shape = PrecoderShape::new(dims.0, dims.1, config.resolution_bits);
    let abort = |source: Error, generation: usize, partial: &GaTrace<T>| EvolveAborted {
        source,
        generation,
        partial: partial.clone(),
    };

    let mut trace = GaTrace::default();
    config.validate().map_err(|e| abort(e, 0, &trace))?;
    if shape.genome_len() == 0 {
        return Err(abort(
            Error::InvalidInput("genome length must be positive".into()),
            0,
            &trace,
        ));
    }

    let mut pop = init_population::<T>(config, shape.genome_len(), rng);
    let mut memo: HashMap<Vec<bool>, T> = HashMap::new();
    let mut best_ever: Option<(T, Vec<bool>)> = None;

    for generation in 0..=config.max_generations {
        // evaluate everyone missing a cached fitness
        for member in &mut pop.members {
            if member.fitness.is_some() {
                continue;
            }
            let f = match memo.get(member.bits()) {
                Some(&f) => f,
                None => {
                    let precoder =
                        decode(member, &shape).map_err(|e| abort(e, generation, &trace))?;
                    let f = eval(&precoder).map_err(|e| abort(e, generation, &trace))?;
                    if !crate::is_valid_fitness(f) {
                        return Err(abort(
                            Error::InvalidFitness(approx_f64(f)),
                            generation,
                            &trace,
                        ));
                    }
                    memo.insert(member.bits().to_vec(), f);
                    f
                }
            };
            member.fitness = Some(f);
        }

        let mut best_idx = 0usize;
        let mut sum = T::zero();
        for (i, member) in pop.members.iter().enumerate() {
            let f = member.fitness.expect("evaluated above");
            sum += f;
            if f > pop.members[best_idx].fitness.expect("evaluated above") {
                best_idx = i;
            }
        }
        let pop_best = pop.members[best_idx].fitness.expect("evaluated above");
        if best_ever.as_ref().is_none_or(|(f, _)| pop_best > *f) {
            best_ever = Some((pop_best, pop.members[best_idx].bits.clone()));
        }
        trace.records.push(GaTraceRecord {
            generation,
            best_fitness: pop_best,
            mean_fitness: sum / T::from_usize(pop.size()).expect("population size fits scalar"),
            best_bits: pop.members[best_idx].bits.clone(),
        });

        if generation == config.max_generations {
            break;
        }

        // elite carry-over: stable sort keeps the earliest member on ties
        let mut order: Vec<usize> = (0..pop.size()).collect();
        order.sort_by(|&i, &j| {
            let fi = pop.members[i].fitness.expect("evaluated above");
            let fj = pop.members[j].fitness.expect("evaluated above");
            fj.partial_cmp(&fi).expect("finite fitness")
        });
        let mut next: Vec<Chromosome<T>> = order
            .iter()
            .take(config.elitism_count)
            .map(|&i| pop.members[i].clone())
            .collect();

        while next.len() < config.population_size {
            let (pa, pb) = roulette_select(&pop, rng).map_err(|e| abort(e, generation, &trace))?;
            let (ca, cb) = crossover(pa, pb, config.crossover_prob, rng);
            next.push(mutate(&ca, config.mutation_prob, rng));
            if next.len() < config.population_size {
                next.push(mutate(&cb, config.mutation_prob, rng));
            }
        }
        pop = Population {
            members: next,
            generation: generation + 1,
        };
    }

    let (best_fitness, best_bits) = best_ever.expect("at least one generation evaluated");
    let best =
        decode_bits(&best_bits, &shape).map_err(|e| abort(e, config.max_generations, &trace))?;
    Ok(GaOutcome {
        best,
        best_fitness,
        trace,
    })
}

/// Enumerates every analog precoder of the given shape (refusing genomes
/// beyond [`EXHAUSTIVE_CAP_BITS`]) and returns the callback's argmax, ties
/// broken towards the lowest binary value.
pub fn exhaustive_oracle<T, F>(mut eval: F, shape: &PrecoderShape) -> Result<(AnalogPrecoder<T>, T)>
where
    T: Scalar,
    F: FnMut(&AnalogPrecoder<T>) -> Result<T>,
{
    let len = shape.genome_len();
    if len == 0 {
        return Err(Error::InvalidInput("genome length must be positive".into()));
    }
    if len > EXHAUSTIVE_CAP_BITS {
        return Err(Error::SearchSpaceTooLarge {
            bits: len,
            cap: EXHAUSTIVE_CAP_BITS,
        });
    }
    let mut best: Option<(T, AnalogPrecoder<T>)> = None;
    for value in 0..(1u64 << len) {
        let bits: Vec<bool> = (0..len)
            .map(|i| (value >> (len - 1 - i)) & 1 == 1)
            .collect();
        let precoder = decode_bits(&bits, shape)?;
        let f = eval(&precoder)?;
        if !crate::is_valid_fitness(f) {
            return Err(Error::InvalidFitness(approx_f64(f)));
        }
        if best.as_ref().is_none_or(|(bf, _)| f > *bf) {
            best = Some((f, precoder));
        }
    }
    let (fitness, precoder) = best.expect("nonempty search space");
    Ok((precoder, fitness))
}

/// [`evolve`] with a fresh stream seeded from `config.seed`.
pub fn evolve_seeded<T, F>(
    eval: F,
    config: &GaConfig,
    dims: (usize, usize),
) -> std::result::Result<GaOutcome<T>, EvolveAborted<T>>
where
    T: Scalar,
    F: FnMut(&AnalogPrecoder<T>) -> Result<T>,
{
    let mut rng = RngStream::from_seed(config.seed);
    evolve(eval, config, dims, &mut rng)
}
