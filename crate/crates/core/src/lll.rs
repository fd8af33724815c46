//! Constructive local lemma: independent discrete variables, bad events over variable scopes,
//! and a resample-until-clean loop in the style of Moser and Tardos.
//!
//! The loop samples every variable once, then repeatedly takes the violated event with the
//! lowest id and resamples exactly the variables in its scope. Only events whose scope meets
//! the resampled variables are re-evaluated; an event's truth value depends on its scope
//! alone, so the others cannot have changed.

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::generate::rng_from_seed;

pub type Value = u32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// Takes value 1 with probability `p`, else 0.
    Bernoulli(f64),
    /// Uniform over `0..k`.
    Uniform(u32),
}

impl Domain {
    fn sample(&self, rng: &mut ChaCha8Rng) -> Value {
        match *self {
            Domain::Bernoulli(p) => (rng.gen::<f64>() < p) as Value,
            Domain::Uniform(k) => rng.gen_range(0..k),
        }
    }

    pub fn contains(&self, v: Value) -> bool {
        match *self {
            Domain::Bernoulli(_) => v <= 1,
            Domain::Uniform(k) => v < k,
        }
    }
}

/// Indexed family of independent variables with their current values.
#[derive(Clone, Debug)]
pub struct VariableSpace {
    domains: Vec<Domain>,
    current: Vec<Value>,
}

impl VariableSpace {
    pub fn new(domains: Vec<Domain>) -> Self {
        for d in &domains {
            match *d {
                Domain::Bernoulli(p) => assert!((0.0..=1.0).contains(&p), "Bernoulli p outside [0, 1]"),
                Domain::Uniform(k) => assert!(k >= 1, "uniform domain must be nonempty"),
            }
        }
        let current = vec![0; domains.len()];
        VariableSpace { domains, current }
    }

    pub fn uniform(count: usize, k: u32) -> Self {
        Self::new(vec![Domain::Uniform(k); count])
    }

    pub fn bernoulli(count: usize, p: f64) -> Self {
        Self::new(vec![Domain::Bernoulli(p); count])
    }

    pub fn len(&self) -> usize {
        self.domains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.domains.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.current
    }

    pub fn domain(&self, i: usize) -> Domain {
        self.domains[i]
    }

    pub fn sample_all(&mut self, rng: &mut ChaCha8Rng) {
        for i in 0..self.domains.len() {
            self.current[i] = self.domains[i].sample(rng);
        }
    }

    /// Redraws variable `i`; every other value is left untouched.
    pub fn resample(&mut self, i: usize, rng: &mut ChaCha8Rng) {
        self.current[i] = self.domains[i].sample(rng);
    }

    pub fn into_values(self) -> Vec<Value> {
        self.current
    }
}

/// A bad event. `holds` may read only the variables listed in `scope`.
pub trait BadEvent {
    fn scope(&self) -> &[usize];
    fn holds(&self, values: &[Value]) -> bool;
}

/// Event given by a closure; convenient for tests and small instances.
pub struct FnEvent<F> {
    scope: Vec<usize>,
    predicate: F,
}

impl<F: Fn(&[Value]) -> bool> FnEvent<F> {
    pub fn new(scope: Vec<usize>, predicate: F) -> Self {
        FnEvent { scope, predicate }
    }
}

impl<F: Fn(&[Value]) -> bool> BadEvent for FnEvent<F> {
    fn scope(&self) -> &[usize] {
        &self.scope
    }

    fn holds(&self, values: &[Value]) -> bool {
        (self.predicate)(values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Clean,
    Timeout,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleLog {
    /// Number of resampling steps performed.
    pub rounds: u64,
    pub resamples_per_event: Vec<u64>,
    /// Number of violated events after the initial sample and after each step.
    pub violated_trace: Vec<usize>,
    pub outcome: Outcome,
}

impl ResampleLog {
    pub fn is_clean(&self) -> bool {
        self.outcome == Outcome::Clean
    }
}

pub fn default_max_rounds(event_count: usize) -> u64 {
    100 * event_count.max(1) as u64
}

/// Runs the resampler. The result is a pure function of `(space, events, max_rounds, seed)`.
pub fn run_resampler<E: BadEvent>(
    mut space: VariableSpace,
    events: &[E],
    max_rounds: u64,
    seed: u64,
) -> (Vec<Value>, ResampleLog) {
    assert!(max_rounds >= 1, "max_rounds must be at least 1");
    let nvars = space.len();
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); nvars];
    for (id, e) in events.iter().enumerate() {
        for &x in e.scope() {
            assert!(x < nvars, "event {id} scope names variable {x} of {nvars}");
            touching[x].push(id);
        }
    }
    for list in &mut touching {
        list.dedup();
    }

    let mut rng = rng_from_seed(seed);
    space.sample_all(&mut rng);
    let mut violated: BTreeSet<usize> = (0..events.len())
        .filter(|&id| events[id].holds(space.values()))
        .collect();
    let mut log = ResampleLog {
        rounds: 0,
        resamples_per_event: vec![0; events.len()],
        violated_trace: vec![violated.len()],
        outcome: Outcome::Clean,
    };
    // events sharing a variable with each event, built on first resample of that event
    let mut dependents: Vec<Option<Vec<usize>>> = vec![None; events.len()];
    let mut stamp = vec![usize::MAX; events.len()];
    while let Some(&id) = violated.iter().next() {
        if log.rounds >= max_rounds {
            log.outcome = Outcome::Timeout;
            break;
        }
        log.rounds += 1;
        log.resamples_per_event[id] += 1;
        for &x in events[id].scope() {
            space.resample(x, &mut rng);
        }
        let deps = dependents[id].get_or_insert_with(|| {
            let mut list = Vec::new();
            for &x in events[id].scope() {
                for &other in &touching[x] {
                    if stamp[other] != id {
                        stamp[other] = id;
                        list.push(other);
                    }
                }
            }
            list
        });
        for &other in deps.iter() {
            if events[other].holds(space.values()) {
                violated.insert(other);
            } else {
                violated.remove(&other);
            }
        }
        log.violated_trace.push(violated.len());
    }
    (space.into_values(), log)
}

/// Maximum over events of the number of other events sharing a scope variable.
pub fn check_dependency_degree<E: BadEvent>(events: &[E]) -> usize {
    let nvars = events.iter().flat_map(|e| e.scope().iter().copied()).max().map_or(0, |m| m + 1);
    let mut touching: Vec<Vec<usize>> = vec![Vec::new(); nvars];
    for (id, e) in events.iter().enumerate() {
        for &x in e.scope() {
            touching[x].push(id);
        }
    }
    let mut mark = vec![usize::MAX; events.len()];
    let mut best = 0;
    for (id, e) in events.iter().enumerate() {
        let mut count = 0;
        mark[id] = id;
        for &x in e.scope() {
            for &other in &touching[x] {
                if mark[other] != id {
                    mark[other] = id;
                    count += 1;
                }
            }
        }
        best = best.max(count);
    }
    best
}

/// Per-kind roll-up of a [`ResampleLog`] for diagnostics output.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KindStats {
    pub kind: String,
    pub events: usize,
    pub resamples: u64,
    pub max_resamples_single_event: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleSummary {
    pub outcome: Outcome,
    pub rounds: u64,
    pub violated_trace: Vec<usize>,
    pub by_kind: Vec<KindStats>,
}

impl ResampleLog {
    /// Groups per-event counts by `kind_of(event id)`; kinds appear in first-seen order.
    pub fn summarize(&self, kind_of: impl Fn(usize) -> &'static str) -> ResampleSummary {
        let mut by_kind: Vec<KindStats> = Vec::new();
        for (id, &r) in self.resamples_per_event.iter().enumerate() {
            let kind = kind_of(id);
            let idx = match by_kind.iter().position(|k| k.kind == kind) {
                Some(i) => i,
                None => {
                    by_kind.push(KindStats {
                        kind: kind.to_string(),
                        events: 0,
                        resamples: 0,
                        max_resamples_single_event: 0,
                    });
                    by_kind.len() - 1
                }
            };
            let k = &mut by_kind[idx];
            k.events += 1;
            k.resamples += r;
            k.max_resamples_single_event = k.max_resamples_single_event.max(r);
        }
        ResampleSummary {
            outcome: self.outcome,
            rounds: self.rounds,
            violated_trace: self.violated_trace.clone(),
            by_kind,
        }
    }
}

/// Full re-scan: ids of every event that holds on `values`.
pub fn violated_events<E: BadEvent>(events: &[E], values: &[Value]) -> Vec<usize> {
    (0..events.len()).filter(|&id| events[id].holds(values)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    type Pred = Box<dyn Fn(&[Value]) -> bool>;

    fn triples(count: usize) -> Vec<FnEvent<Pred>> {
        (0..count)
            .map(|i| {
                let scope = vec![3 * i, 3 * i + 1, 3 * i + 2];
                let pred: Pred = Box::new(move |v: &[Value]| {
                    v[3 * i] == v[3 * i + 1] && v[3 * i + 1] == v[3 * i + 2]
                });
                FnEvent::new(scope, pred)
            })
            .collect()
    }

    #[test]
    fn no_events_is_clean_immediately() {
        let events: Vec<FnEvent<Pred>> = Vec::new();
        let (values, log) = run_resampler(VariableSpace::uniform(5, 3), &events, 1, 9);
        assert_eq!(values.len(), 5);
        assert!(log.is_clean());
        assert_eq!(log.rounds, 0);
    }

    #[test]
    fn forced_fixed_point() {
        let mut total = 0;
        for seed in 0..2000 {
            let events = [FnEvent::new(vec![0], |v: &[Value]| v[0] == 1)];
            let (values, log) = run_resampler(VariableSpace::bernoulli(1, 0.5), &events, 1000, seed);
            assert!(log.is_clean());
            assert_eq!(values, vec![0]);
            total += log.rounds;
        }
        let mean = total as f64 / 2000.0;
        assert!((mean - 1.0).abs() < 0.1, "mean resamples {mean}");
    }

    #[test]
    fn disjoint_monochromatic_triples() {
        for seed in 0..100 {
            let events = triples(10);
            let (values, log) = run_resampler(VariableSpace::uniform(30, 2), &events, 10_000, seed);
            assert!(log.is_clean());
            assert!(violated_events(&events, &values).is_empty());
            assert!(log.resamples_per_event.iter().all(|&r| r <= 20));
        }
    }

    #[test]
    fn timeout_is_reported() {
        let events = [FnEvent::new(vec![0], |_: &[Value]| true)];
        let (_, log) = run_resampler(VariableSpace::bernoulli(1, 0.5), &events, 7, 1);
        assert_eq!(log.outcome, Outcome::Timeout);
        assert_eq!(log.rounds, 7);
        assert_eq!(log.violated_trace.len(), 8);
    }

    #[test]
    fn deterministic_per_seed() {
        let run = |seed| run_resampler(VariableSpace::uniform(30, 2), &triples(10), 1000, seed);
        assert_eq!(run(4), run(4));
    }

    #[test]
    fn dependency_degree_examples() {
        assert_eq!(check_dependency_degree(&triples(4)), 0);
        let never = |_: &[Value]| false;
        let pair = [FnEvent::new(vec![0, 1], never), FnEvent::new(vec![1, 2], never)];
        assert_eq!(check_dependency_degree(&pair), 1);
        let star: Vec<_> = (0..6).map(|i| FnEvent::new(vec![0, i + 1], |_: &[Value]| false)).collect();
        assert_eq!(check_dependency_degree(&star), 5);
    }
}
