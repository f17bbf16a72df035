//! Thread-pool versions of the core experiment drivers.
//!
//! Items are seeded exactly as in the sequential drivers and collected in
//! input order, so results do not depend on the number of threads.

use anyhow::{bail, Context, Result};
use heiskakeya_core::dimest::{self, DimEstimate, Metric, PackingParams, ScaleLadder};
use heiskakeya_core::experiments::{self, CoareaResult, PipelineReport};
use heiskakeya_core::rng::child_seed;
use heiskakeya_core::setgen::SetSampler;
use heiskakeya_core::CodeFamily;
use rayon::prelude::*;

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "HEISKAKEYA_THREADS";

/// Worker count from `HEISKAKEYA_THREADS`; `None` lets rayon decide.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => bail!("{THREADS_ENV}: {e}"),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .with_context(|| format!("{THREADS_ENV}={v:?} is not a positive integer"))?;
            if n == 0 {
                bail!("{THREADS_ENV} must be at least 1");
            }
            Ok(Some(n))
        }
    }
}

pub fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    Ok(b.build()?)
}

pub fn marstrand<S: SetSampler>(
    k: &S,
    thetas: &[f64],
    ladder: &ScaleLadder,
    params: &PackingParams,
) -> Result<Vec<(f64, DimEstimate)>> {
    if thetas.is_empty() {
        bail!("marstrand_experiment: no angles given");
    }
    thetas
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let est = experiments::marstrand_theta(k, t, ladder, params.stop_k, child_seed(params.seed, i as u64))
                .with_context(|| format!("marstrand_experiment at theta={t}"))?;
            Ok((t, est))
        })
        .collect()
}

/// Same result as [`experiments::coarea_check`].
pub fn coarea<S: SetSampler>(
    f: &S,
    alpha: f64,
    delta: f64,
    slab: (f64, f64),
    n_slices: usize,
    params: &PackingParams,
) -> Result<CoareaResult> {
    // argument errors come out of the sequential path
    if n_slices < 2 || !(slab.0 < slab.1) || !(delta > 0.0) || !(alpha >= 0.0) {
        return Ok(experiments::coarea_check(f, alpha, delta, slab, n_slices, params)?);
    }
    let (slices, bulk) = rayon::join(
        || {
            (0..n_slices)
                .into_par_iter()
                .map(|j| {
                    let y = experiments::slab_centre(slab, n_slices, j);
                    experiments::coarea_slice_count(f, y, delta, params.stop_k, child_seed(params.seed, j as u64))
                })
                .collect::<heiskakeya_core::Result<Vec<_>>>()
        },
        || {
            dimest::greedy_packing_count(
                f,
                delta,
                Metric::Heisenberg,
                params.stop_k,
                child_seed(params.seed, n_slices as u64),
                None,
            )
        },
    );
    let slices = slices.context("coarea_check slab packing")?;
    let bulk = bulk.context("coarea_check bulk packing")?.count();
    Ok(experiments::coarea_assemble(alpha, delta, slab, slices, bulk))
}

/// Same result as [`experiments::kakeya_dimension_pipeline`].
pub fn pipeline(
    family: &CodeFamily,
    c_grid: usize,
    ladder: &ScaleLadder,
    params: &PackingParams,
) -> Result<PipelineReport> {
    let plan = experiments::pipeline_plan(family, c_grid).context("kakeya_dimension_pipeline")?;
    let per_c = plan
        .cs
        .par_iter()
        .enumerate()
        .map(|(j, &c)| {
            experiments::pipeline_slice(&plan.code_set, c, ladder, params.stop_k, child_seed(params.seed, j as u64))
                .with_context(|| format!("kakeya_dimension_pipeline at c={c}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(experiments::pipeline_assemble(plan, per_c, ladder, params))
}

/// Independent dimension estimates, one per sampler.
pub fn estimate_many<S: SetSampler>(
    jobs: &[(S, Metric)],
    ladder: &ScaleLadder,
    params: &PackingParams,
) -> Result<Vec<DimEstimate>> {
    jobs.par_iter()
        .map(|(s, m)| {
            dimest::estimate_dimension(s, ladder, *m, params)
                .with_context(|| format!("estimate_dimension on {}", s.label()))
        })
        .collect()
}
