//! Random deterministic strongly connected state machines and the harness
//! comparing the reachability-graph method against the structural search.

use std::io::Write;
use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::limits::Deadline;
use crate::net::{token_distributions, Marking, PlaceId, SynchronizedNet};
use crate::reachability::DEFAULT_NODE_BUDGET;
use crate::rg_sync::solve_on_rg;
use crate::sm_structure::decompose;
use crate::sts::{find_sts_until, k_ss_from_sts, SearchMode};
use crate::sync::verify_from;

pub const GENERATION_RETRIES: usize = 1000;

pub const GENERATION_RECIPE: &str = "random Hamiltonian cycle over the places, then q-m extra arcs \
with a uniform source among places below the alphabet size in out-degree and a uniform target \
different from the source; labels assigned per source place round-robin over a shuffled alphabet; \
transition order shuffled; alphabet size uniform in [ceil(q/m), q]; target place uniform";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GenParams {
    pub m: usize,
    pub q: usize,
    pub alphabet_size: usize,
    pub seed: u64,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(Error::Generation { retries: 0, reason });
        if self.m == 0 {
            return fail("at least one place is required".into());
        }
        if self.q < self.m {
            return fail(format!(
                "q = {} < m = {}: strong connectivity needs a cycle through every place",
                self.q, self.m
            ));
        }
        let min_alphabet = self.q.div_ceil(self.m);
        if self.alphabet_size < min_alphabet || self.alphabet_size > self.q {
            return fail(format!(
                "alphabet size {} outside [{min_alphabet}, {}]",
                self.alphabet_size, self.q
            ));
        }
        Ok(())
    }
}

/// Same parameters, same net.
pub fn random_sm(p: GenParams) -> Result<SynchronizedNet> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut last = String::new();
    for _ in 0..GENERATION_RETRIES {
        match draw_sm(&p, &mut rng) {
            Ok(net) => return Ok(net),
            Err(reason) => last = reason,
        }
    }
    Err(Error::Generation {
        retries: GENERATION_RETRIES,
        reason: last,
    })
}

fn draw_sm(p: &GenParams, rng: &mut ChaCha8Rng) -> std::result::Result<SynchronizedNet, String> {
    let m = p.m;
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut arcs: Vec<(usize, usize)> = (0..m).map(|i| (order[i], order[(i + 1) % m])).collect();
    let mut out_degree = vec![1usize; m];
    for _ in m..p.q {
        let open: Vec<usize> = (0..m).filter(|&s| out_degree[s] < p.alphabet_size).collect();
        let &source = open.choose(rng).ok_or("no place has spare output capacity")?;
        let target = if m == 1 {
            source
        } else {
            let t = rng.random_range(0..m - 1);
            if t >= source {
                t + 1
            } else {
                t
            }
        };
        out_degree[source] += 1;
        arcs.push((source, target));
    }
    arcs.shuffle(rng);

    let alphabets: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let mut a: Vec<usize> = (0..p.alphabet_size).collect();
            a.shuffle(rng);
            a
        })
        .collect();
    let mut used = vec![0usize; m];
    let places: Vec<String> = (1..=m).map(|i| format!("p{i}")).collect();
    let events: Vec<String> = (1..=p.alphabet_size).map(|i| format!("e{i}")).collect();
    let mut builder = SynchronizedNet::builder().places(places.iter()).events(events.iter());
    for (i, &(s, t)) in arcs.iter().enumerate() {
        let label = alphabets[s][used[s]];
        used[s] += 1;
        builder = builder.arc(&format!("t{}", i + 1), &events[label], &places[s], &places[t]);
    }
    let net = builder.build().map_err(|e| e.to_string())?;

    if !net.check_determinism().is_deterministic() {
        return Err("labeling is not deterministic".into());
    }
    let parts = decompose(net.net()).map_err(|e| e.to_string())?;
    if !parts.is_strongly_connected() {
        return Err("net is not strongly connected".into());
    }
    Ok(net)
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MethodOutcome {
    pub found: bool,
    pub elapsed: Duration,
    pub length: usize,
    pub timed_out: bool,
    /// A reported sequence failed its replay; never counted as found.
    pub unsound: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceOutcome {
    pub rg: MethodOutcome,
    pub sts: MethodOutcome,
    /// Reachability set size when the graph was built.
    pub rg_nodes: Option<usize>,
}

/// Runs both methods for `k` tokens towards `target`; the uncertainty is every
/// `k`-token marking. Each reported sequence is replayed from every one of
/// them before it counts.
pub fn run_instance(
    net: &SynchronizedNet,
    target: PlaceId,
    k: u32,
    node_budget: usize,
    time_budget: Option<Duration>,
) -> InstanceOutcome {
    let m = net.place_count();
    let goal = Marking::concentrated(m, target, k);
    let deadline = || time_budget.map_or(Deadline::none(), Deadline::after);

    let mut rg = MethodOutcome::default();
    let mut rg_nodes = None;
    let start = Instant::now();
    let uncertainty: Vec<Marking> = token_distributions(m, k).collect();
    match solve_on_rg(net, &uncertainty, &goal, node_budget, deadline()) {
        Ok(sol) => {
            rg_nodes = Some(sol.graph.node_count());
            if let Some(w) = sol.sequence {
                match verify_from(net, sol.graph.nodes().iter().cloned(), &w, &goal) {
                    Ok(_) => {
                        rg.found = true;
                        rg.length = w.len();
                    }
                    Err(_) => rg.unsound = true,
                }
            }
        }
        Err(Error::Timeout) => rg.timed_out = true,
        Err(e) => log::debug!("reachability method failed: {e}"),
    }
    rg.elapsed = start.elapsed();

    let mut sts = MethodOutcome::default();
    let start = Instant::now();
    match find_sts_until(net, target, SearchMode::DepthFirst, deadline()) {
        Ok(Some(found)) => match k_ss_from_sts(net, &found, k) {
            Ok(res) => {
                // the gate is exhaustive even when the library would sample
                let all = token_distributions(m, k);
                if verify_from(net, all, &res.sequence, &goal).is_ok() {
                    sts.found = true;
                    sts.length = res.sequence.len();
                } else {
                    sts.unsound = true;
                }
            }
            Err(Error::Consistency(msg)) => {
                log::error!("structural sequence failed replay: {msg}");
                sts.unsound = true;
            }
            Err(e) => log::debug!("structural method failed: {e}"),
        },
        Ok(None) => {}
        Err(Error::Timeout) => sts.timed_out = true,
        Err(e) => log::debug!("structural search failed: {e}"),
    }
    sts.elapsed = start.elapsed();

    InstanceOutcome { rg, sts, rg_nodes }
}

/// A net evaluated alongside the random grid.
#[derive(Clone, Debug)]
pub struct FixedInstance {
    pub name: String,
    pub net: SynchronizedNet,
    pub target: PlaceId,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub m: RangeInclusive<usize>,
    pub q: RangeInclusive<usize>,
    pub k: RangeInclusive<u32>,
    pub trials: usize,
    pub seed: u64,
    /// Per instance and per method.
    pub time_budget: Option<Duration>,
    pub node_budget: usize,
    pub fixtures: Vec<FixedInstance>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            m: 2..=4,
            q: 2..=8,
            k: 1..=1,
            trials: 20,
            seed: 0,
            time_budget: Some(Duration::from_secs(10)),
            node_budget: DEFAULT_NODE_BUDGET,
            fixtures: Vec::new(),
        }
    }
}

/// Aggregate indexes of one `(m, q, k)` cell or one fixed instance.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub m: usize,
    pub q: usize,
    pub k: u32,
    pub trials: usize,
    pub seed: u64,
    /// `None` for fixed instances.
    pub fixture: Option<String>,
    /// `m > q`: no strongly connected net exists; no indexes.
    pub feasible: bool,
    pub n_rg: usize,
    pub n_sts: usize,
    /// Mean wall time over all runs, in milliseconds.
    pub that_rg_ms: Option<f64>,
    pub that_sts_ms: Option<f64>,
    /// Mean sequence length over successful runs.
    pub lhat_rg: Option<f64>,
    pub lhat_sts: Option<f64>,
    pub rg_nodes: Vec<Option<usize>>,
    pub unsound: usize,
    pub timeouts: usize,
}

impl BenchRecord {
    pub fn n_ratio(&self) -> Option<f64> {
        ratio(Some(self.n_sts as f64), Some(self.n_rg as f64))
    }

    pub fn t_ratio(&self) -> Option<f64> {
        ratio(self.that_sts_ms, self.that_rg_ms)
    }

    pub fn l_ratio(&self) -> Option<f64> {
        ratio(self.lhat_sts, self.lhat_rg)
    }

    fn aggregate(
        (m, q, k, trials, seed): (usize, usize, u32, usize, u64),
        fixture: Option<String>,
        outcomes: &[InstanceOutcome],
    ) -> Self {
        let mean = |xs: Vec<f64>| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        let ms = |d: Duration| d.as_secs_f64() * 1000.0;
        BenchRecord {
            m,
            q,
            k,
            trials,
            seed,
            fixture,
            feasible: true,
            n_rg: outcomes.iter().filter(|o| o.rg.found).count(),
            n_sts: outcomes.iter().filter(|o| o.sts.found).count(),
            that_rg_ms: mean(outcomes.iter().map(|o| ms(o.rg.elapsed)).collect()),
            that_sts_ms: mean(outcomes.iter().map(|o| ms(o.sts.elapsed)).collect()),
            lhat_rg: mean(
                outcomes
                    .iter()
                    .filter(|o| o.rg.found)
                    .map(|o| o.rg.length as f64)
                    .collect(),
            ),
            lhat_sts: mean(
                outcomes
                    .iter()
                    .filter(|o| o.sts.found)
                    .map(|o| o.sts.length as f64)
                    .collect(),
            ),
            rg_nodes: outcomes.iter().map(|o| o.rg_nodes).collect(),
            unsound: outcomes
                .iter()
                .filter(|o| o.rg.unsound || o.sts.unsound)
                .count(),
            timeouts: outcomes
                .iter()
                .filter(|o| o.rg.timed_out || o.sts.timed_out)
                .count(),
        }
    }

    fn infeasible(m: usize, q: usize, k: u32, trials: usize, seed: u64) -> Self {
        BenchRecord {
            m,
            q,
            k,
            trials,
            seed,
            fixture: None,
            feasible: false,
            n_rg: 0,
            n_sts: 0,
            that_rg_ms: None,
            that_sts_ms: None,
            lhat_rg: None,
            lhat_sts: None,
            rg_nodes: Vec::new(),
            unsound: 0,
            timeouts: 0,
        }
    }
}

fn ratio(num: Option<f64>, den: Option<f64>) -> Option<f64> {
    match (num, den) {
        (Some(n), Some(d)) if d != 0.0 => Some(n / d),
        _ => None,
    }
}

/// Seed of trial `trial` in cell `(m, q)`; independent of `k` so every token
/// count sees the same nets.
pub fn instance_seed(seed: u64, m: usize, q: usize, trial: usize) -> u64 {
    let mut x = seed;
    for v in [m as u64, q as u64, trial as u64] {
        x = splitmix(x ^ splitmix(v));
    }
    x
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// The net and target place of one random trial.
pub fn instance(seed: u64, m: usize, q: usize, trial: usize) -> Result<(SynchronizedNet, PlaceId)> {
    let s = instance_seed(seed, m, q, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(s);
    let alphabet_size = rng.random_range(q.div_ceil(m)..=q);
    let target = PlaceId(rng.random_range(0..m));
    let net = random_sm(GenParams {
        m,
        q,
        alphabet_size,
        seed: rng.random(),
    })?;
    Ok((net, target))
}

/// One record per grid cell in `(m, q, k)` order, then one per fixed
/// instance and token count. Instances run in parallel; results do not
/// depend on the thread count.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<Vec<BenchRecord>> {
    if cfg.m.is_empty() || cfg.q.is_empty() || cfg.k.is_empty() || (cfg.trials == 0 && cfg.fixtures.is_empty()) {
        return Err(Error::Input("empty benchmark grid".into()));
    }
    let mut records = Vec::new();
    for m in cfg.m.clone() {
        for q in cfg.q.clone() {
            if m == 0 || m > q {
                for k in cfg.k.clone() {
                    records.push(BenchRecord::infeasible(m, q, k, cfg.trials, cfg.seed));
                }
                continue;
            }
            let nets: Vec<(SynchronizedNet, PlaceId)> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| instance(cfg.seed, m, q, trial))
                .collect::<Result<_>>()?;
            for k in cfg.k.clone() {
                let outcomes: Vec<InstanceOutcome> = nets
                    .par_iter()
                    .map(|(net, target)| run_instance(net, *target, k, cfg.node_budget, cfg.time_budget))
                    .collect();
                records.push(BenchRecord::aggregate((m, q, k, cfg.trials, cfg.seed), None, &outcomes));
            }
        }
    }
    for f in &cfg.fixtures {
        for k in cfg.k.clone() {
            let outcome = run_instance(&f.net, f.target, k, cfg.node_budget, cfg.time_budget);
            records.push(BenchRecord::aggregate(
                (f.net.place_count(), f.net.transition_count(), k, 1, cfg.seed),
                Some(f.name.clone()),
                &[outcome],
            ));
        }
    }
    Ok(records)
}

pub const CSV_HEADER: [&str; 11] = [
    "m",
    "q",
    "k",
    "trials",
    "seed",
    "N_RG",
    "N_STS",
    "That_RG_ms",
    "That_STS_ms",
    "Lhat_RG",
    "Lhat_STS",
];

/// `#` comment lines with the run metadata, then the header and one row per
/// record. Infeasible cells leave the index fields empty; fixed instances
/// are announced by a comment line just before their row.
pub fn write_csv<W: Write>(mut out: W, cfg: &BenchConfig, records: &[BenchRecord]) -> Result<()> {
    let io = |e: std::io::Error| Error::Input(format!("cannot write CSV: {e}"));
    writeln!(out, "# generator: {GENERATION_RECIPE}").map_err(io)?;
    writeln!(
        out,
        "# grid: m={}..{} q={}..{} k={}..{} trials={} seed={} time_budget_ms={}",
        cfg.m.start(),
        cfg.m.end(),
        cfg.q.start(),
        cfg.q.end(),
        cfg.k.start(),
        cfg.k.end(),
        cfg.trials,
        cfg.seed,
        cfg.time_budget.map_or("none".to_string(), |d| d.as_millis().to_string())
    )
    .map_err(io)?;
    writeln!(out, "# That: mean wall time over all runs; Lhat: mean length over successful runs").map_err(io)?;

    let line = |fields: &[String]| -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(fields)
            .map_err(|e| Error::Input(format!("cannot write CSV: {e}")))?;
        w.into_inner()
            .map_err(|e| Error::Input(format!("cannot write CSV: {e}")))
    };
    let header: Vec<String> = CSV_HEADER.iter().map(|s| s.to_string()).collect();
    out.write_all(&line(&header)?).map_err(io)?;
    let num = |x: Option<f64>| x.map_or(String::new(), |v| format!("{v:.4}"));
    for r in records {
        if let Some(name) = &r.fixture {
            writeln!(out, "# fixture {name}").map_err(io)?;
        }
        let mut row = vec![
            r.m.to_string(),
            r.q.to_string(),
            r.k.to_string(),
            r.trials.to_string(),
            r.seed.to_string(),
        ];
        if r.feasible {
            row.extend([
                r.n_rg.to_string(),
                r.n_sts.to_string(),
                num(r.that_rg_ms),
                num(r.that_sts_ms),
                num(r.lhat_rg),
                num(r.lhat_sts),
            ]);
        } else {
            row.extend(std::iter::repeat_n(String::new(), 6));
        }
        out.write_all(&line(&row)?).map_err(io)?;
    }
    out.flush().map_err(io)?;
    Ok(())
}
