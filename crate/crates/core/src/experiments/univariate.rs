//! Paired TC / random-walk MH chains on the multimodal univariate target.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SamplerChoice};
use super::output::{prepare_dir, write_csv, write_ndjson};
use crate::distributions::MultimodalTarget;
use crate::error::{Error, Result};
use crate::metrics::{conditional_distance, distance, Distance, EmpiricalPmf, Parity, Pmf};
use crate::sampler::{mh_rw_step, tc_step_1d};
use crate::tree::mean_sd;

/// Distances of one chain's cumulative visit frequencies to the target.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnivariateRow {
    pub sampler: SamplerChoice,
    pub chain: usize,
    pub start: i64,
    pub iteration: u64,
    pub tv: f64,
    pub hellinger: f64,
    /// Parity-conditional distances; empty when the chain has not visited
    /// the class yet.
    pub tv_even: Option<f64>,
    pub tv_odd: Option<f64>,
    pub hellinger_even: Option<f64>,
    pub hellinger_odd: Option<f64>,
    pub max_state: i64,
    pub acceptance: f64,
}

pub const TRACE_HEADER: [&str; 12] = [
    "sampler",
    "chain",
    "start",
    "iteration",
    "tv",
    "hellinger",
    "tv_even",
    "tv_odd",
    "hellinger_even",
    "hellinger_odd",
    "max_state",
    "acceptance",
];

/// Means over chains (standard errors for the overall distances).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnivariateSummary {
    pub sampler: SamplerChoice,
    pub iteration: u64,
    pub n_chains: usize,
    pub tv_mean: f64,
    pub tv_se: f64,
    pub hellinger_mean: f64,
    pub hellinger_se: f64,
    pub tv_even_mean: Option<f64>,
    pub tv_odd_mean: Option<f64>,
    pub hellinger_even_mean: Option<f64>,
    pub hellinger_odd_mean: Option<f64>,
    pub max_state_mean: f64,
}

pub const SUMMARY_HEADER: [&str; 12] = [
    "sampler",
    "iteration",
    "n_chains",
    "tv_mean",
    "tv_se",
    "hellinger_mean",
    "hellinger_se",
    "tv_even_mean",
    "tv_odd_mean",
    "hellinger_even_mean",
    "hellinger_odd_mean",
    "max_state_mean",
];

/// Final visit counts of one chain, as one NDJSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitRecord {
    pub sampler: SamplerChoice,
    pub chain: usize,
    /// `(state, count)` in increasing state order.
    pub counts: Vec<(i64, u64)>,
}

#[derive(Debug, Clone)]
pub struct UnivariateResult {
    pub target: MultimodalTarget,
    /// Every chain at every checkpoint, TC rows then MH rows per chain.
    pub rows: Vec<UnivariateRow>,
    pub summary: Vec<UnivariateSummary>,
    /// Final visit counts per `(sampler, chain)`.
    pub final_pmfs: Vec<(SamplerChoice, usize, EmpiricalPmf)>,
}

impl UnivariateResult {
    /// `(tc, mh)` rows of each chain pair at the last checkpoint.
    pub fn final_pairs(&self) -> Vec<(&UnivariateRow, &UnivariateRow)> {
        let Some(last) = self.rows.iter().map(|r| r.iteration).max() else {
            return Vec::new();
        };
        let at = |s: SamplerChoice| -> Vec<&UnivariateRow> {
            self.rows
                .iter()
                .filter(|r| r.iteration == last && r.sampler == s)
                .collect()
        };
        at(SamplerChoice::Tc)
            .into_iter()
            .zip(at(SamplerChoice::Mh))
            .collect()
    }

    pub fn final_summary(&self, sampler: SamplerChoice) -> Option<&UnivariateSummary> {
        self.summary
            .iter()
            .filter(|s| s.sampler == sampler)
            .max_by_key(|s| s.iteration)
    }

    /// Writes `summary.csv`, `trace.csv` (every checkpoint row) and
    /// `posterior.ndjson` (final visit counts per chain).
    pub fn write_outputs(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let [summary, trace, posterior] = prepare_dir(dir)?;
        write_csv(&summary, &SUMMARY_HEADER, &self.summary)?;
        write_csv(&trace, &TRACE_HEADER, &self.rows)?;
        write_ndjson(
            &posterior,
            self.final_pmfs
                .iter()
                .map(|(sampler, chain, pmf)| VisitRecord {
                    sampler: *sampler,
                    chain: *chain,
                    counts: pmf.iter().collect(),
                }),
        )?;
        Ok(vec![summary, trace, posterior])
    }

    /// Mean over pairs of (TC − MH) largest state visited.
    pub fn mean_max_state_gap(&self) -> f64 {
        let pairs = self.final_pairs();
        if pairs.is_empty() {
            return 0.0;
        }
        pairs
            .iter()
            .map(|(t, m)| (t.max_state - m.max_state) as f64)
            .sum::<f64>()
            / pairs.len() as f64
    }
}

/// One scalar chain with dense cumulative visit counts.
struct Visits {
    counts: Vec<u64>,
    max_state: i64,
}

impl Visits {
    fn new() -> Self {
        Self {
            counts: Vec::new(),
            max_state: i64::MIN,
        }
    }

    fn add(&mut self, x: i64) {
        let i = usize::try_from(x).expect("target support is nonnegative");
        if i >= self.counts.len() {
            self.counts.resize(i + 1, 0);
        }
        self.counts[i] += 1;
        self.max_state = self.max_state.max(x);
    }

    fn to_empirical(&self) -> EmpiricalPmf {
        let mut e = EmpiricalPmf::new();
        for (x, &c) in self.counts.iter().enumerate().filter(|(_, &c)| c > 0) {
            e.add_count(x as i64, c);
        }
        e
    }
}

/// Iterations of the configured grid that fit in the chain, always ending
/// with the final iteration.
pub fn checkpoints(grid: &[u64], n_iters: u64) -> Vec<u64> {
    let mut out: Vec<u64> = grid
        .iter()
        .copied()
        .filter(|&c| c >= 1 && c <= n_iters)
        .collect();
    if out.last() != Some(&n_iters) && n_iters > 0 {
        out.push(n_iters);
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Seeds of chain pair `c`: `(start, tc, mh)` streams of one ChaCha key.
fn chain_rngs(base_seed: u64, c: usize) -> [ChaCha8Rng; 3] {
    let seed = base_seed.wrapping_add(c as u64);
    std::array::from_fn(|s| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(s as u64);
        rng
    })
}

fn conditional(p: &Pmf, truth: &Pmf, parity: Parity, kind: Distance) -> Result<Option<f64>> {
    match conditional_distance(p, truth, parity, kind) {
        Ok(d) => Ok(Some(d)),
        Err(Error::UndefinedDistance(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    sampler: SamplerChoice,
    chain: usize,
    start: i64,
    mut rng: ChaCha8Rng,
    target: MultimodalTarget,
    radius: u32,
    marks: &[u64],
    truth: &Pmf,
) -> Result<(Vec<UnivariateRow>, EmpiricalPmf)> {
    let log_target = |x: i64| target.log_unnorm(x);
    let mut x = start;
    let mut visits = Visits::new();
    let mut accepted = 0u64;
    let mut rows = Vec::with_capacity(marks.len());
    let mut next = 0;
    let n_iters = marks.last().copied().unwrap_or(0);
    for it in 1..=n_iters {
        match sampler {
            SamplerChoice::Tc => x = tc_step_1d(&mut rng, x, radius, log_target)?.0,
            SamplerChoice::Mh => {
                let out = mh_rw_step(&mut rng, &[x], radius, &|v: &[i64]| log_target(v[0]));
                accepted += out.accepted as u64;
                x = out.state[0];
            }
        }
        visits.add(x);
        if marks[next] == it {
            next += 1;
            let pmf = visits.to_empirical().to_pmf()?;
            rows.push(UnivariateRow {
                sampler,
                chain,
                start,
                iteration: it,
                tv: distance(&pmf, truth, Distance::TotalVariation)?,
                hellinger: distance(&pmf, truth, Distance::Hellinger)?,
                tv_even: conditional(&pmf, truth, Parity::Even, Distance::TotalVariation)?,
                tv_odd: conditional(&pmf, truth, Parity::Odd, Distance::TotalVariation)?,
                hellinger_even: conditional(&pmf, truth, Parity::Even, Distance::Hellinger)?,
                hellinger_odd: conditional(&pmf, truth, Parity::Odd, Distance::Hellinger)?,
                max_state: visits.max_state,
                acceptance: match sampler {
                    SamplerChoice::Tc => 1.0,
                    SamplerChoice::Mh => accepted as f64 / it as f64,
                },
            });
        }
    }
    Ok((rows, visits.to_empirical()))
}

fn option_mean<'a>(values: impl Iterator<Item = &'a Option<f64>>) -> Option<f64> {
    let defined: Vec<f64> = values.flatten().copied().collect();
    (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64)
}

fn summarize(rows: &[UnivariateRow], marks: &[u64]) -> Vec<UnivariateSummary> {
    let mut out = Vec::new();
    for sampler in [SamplerChoice::Tc, SamplerChoice::Mh] {
        for &it in marks {
            let sel: Vec<&UnivariateRow> = rows
                .iter()
                .filter(|r| r.sampler == sampler && r.iteration == it)
                .collect();
            if sel.is_empty() {
                continue;
            }
            let n = sel.len();
            let se = |v: Vec<f64>| {
                let (m, sd) = mean_sd(&v);
                (m, sd / (n as f64).sqrt())
            };
            let (tv_mean, tv_se) = se(sel.iter().map(|r| r.tv).collect());
            let (hellinger_mean, hellinger_se) = se(sel.iter().map(|r| r.hellinger).collect());
            out.push(UnivariateSummary {
                sampler,
                iteration: it,
                n_chains: n,
                tv_mean,
                tv_se,
                hellinger_mean,
                hellinger_se,
                tv_even_mean: option_mean(sel.iter().map(|r| &r.tv_even)),
                tv_odd_mean: option_mean(sel.iter().map(|r| &r.tv_odd)),
                hellinger_even_mean: option_mean(sel.iter().map(|r| &r.hellinger_even)),
                hellinger_odd_mean: option_mean(sel.iter().map(|r| &r.hellinger_odd)),
                max_state_mean: sel.iter().map(|r| r.max_state as f64).sum::<f64>() / n as f64,
            });
        }
    }
    out
}

/// Runs `n_chains` TC/MH pairs; both chains of a pair start from the same
/// state, uniform on `{0..start_max}`. Distances use cumulative visit counts
/// from the first iteration (no burn-in is discarded).
pub fn run_univariate(cfg: &ExperimentConfig) -> Result<UnivariateResult> {
    let uni = &cfg.univariate;
    let target = MultimodalTarget::new(uni.w, uni.rate)?;
    let truth = Pmf::truncated(0, |x| target.log_pmf(x))?;
    let marks = checkpoints(&uni.checkpoints, cfg.chains.n_iters);
    if marks.is_empty() {
        return Err(Error::Config(
            "univariate run needs at least one iteration".into(),
        ));
    }
    let pair = |c: usize| -> Result<Vec<(Vec<UnivariateRow>, SamplerChoice, EmpiricalPmf)>> {
        let [mut start_rng, tc_rng, mh_rng] = chain_rngs(cfg.base_seed, c);
        let start = start_rng.random_range(0..=uni.start_max);
        let mut out = Vec::with_capacity(2);
        for (sampler, rng) in [(SamplerChoice::Tc, tc_rng), (SamplerChoice::Mh, mh_rng)] {
            let (rows, pmf) = run_one(sampler, c, start, rng, target, uni.radius, &marks, &truth)?;
            out.push((rows, sampler, pmf));
        }
        Ok(out)
    };
    let n = cfg.chains.n_chains;
    let pairs: Vec<_> = if cfg.chains.workers > 1 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.chains.workers)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(|| (0..n).into_par_iter().map(pair).collect::<Result<Vec<_>>>())?
    } else {
        (0..n).map(pair).collect::<Result<Vec<_>>>()?
    };
    let mut rows = Vec::new();
    let mut final_pmfs = Vec::new();
    for (c, runs) in pairs.into_iter().enumerate() {
        for (r, sampler, pmf) in runs {
            rows.extend(r);
            final_pmfs.push((sampler, c, pmf));
        }
    }
    let summary = summarize(&rows, &marks);
    Ok(UnivariateResult {
        target,
        rows,
        summary,
        final_pmfs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::ExperimentKind;

    fn small(iters: u64, chains: usize) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::defaults(ExperimentKind::Univariate);
        cfg.chains.n_iters = iters;
        cfg.chains.n_chains = chains;
        cfg
    }

    #[test]
    fn checkpoint_grid_is_clipped() {
        let grid = [100, 1_000, 10_000, 100_000, 1_000_000];
        assert_eq!(checkpoints(&grid, 5_000), vec![100, 1_000, 5_000]);
        assert_eq!(checkpoints(&grid, 1_000), vec![100, 1_000]);
        assert_eq!(checkpoints(&grid, 50), vec![50]);
    }

    #[test]
    fn pairs_share_starts_and_are_reproducible() {
        let cfg = small(2_000, 3);
        let a = run_univariate(&cfg).unwrap();
        let b = run_univariate(&cfg).unwrap();
        assert_eq!(a.rows, b.rows);
        for (t, m) in a.final_pairs() {
            assert_eq!((t.chain, t.start), (m.chain, m.start));
            assert!((0..=20).contains(&t.start));
        }
        assert_eq!(a.summary.len(), 2 * 3);
    }

    #[test]
    fn headers_match_row_types() {
        let res = run_univariate(&small(200, 1)).unwrap();
        assert_eq!(
            crate::experiments::output::derived_header(&res.rows[0]),
            TRACE_HEADER
        );
        assert_eq!(
            crate::experiments::output::derived_header(&res.summary[0]),
            SUMMARY_HEADER
        );
        let dir = tempfile::tempdir().unwrap();
        let files = res.write_outputs(dir.path()).unwrap();
        let first = std::fs::read(&files[1]).unwrap();
        run_univariate(&small(200, 1))
            .unwrap()
            .write_outputs(dir.path())
            .unwrap();
        assert_eq!(std::fs::read(&files[1]).unwrap(), first);
    }

    #[test]
    fn tc_approaches_the_target() {
        let res = run_univariate(&small(20_000, 4)).unwrap();
        let tc = res.final_summary(SamplerChoice::Tc).unwrap();
        assert!(tc.tv_mean < 0.1, "{tc:?}");
        assert!(res
            .rows
            .iter()
            .all(|r| (0.0..=1.0).contains(&r.tv) && (0.0..=1.0).contains(&r.hellinger)));
    }
}
