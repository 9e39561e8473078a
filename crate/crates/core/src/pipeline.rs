//! End-to-end factorization: poles, basis, fit, split, normalization and
//! analytic densities for one model and stopping time.

use alloc::vec::Vec;
use core::fmt;

use log::{debug, info, warn};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::levy::{denominator, stopped_cf, LevyModel, StoppingTime};
use crate::rational::{
    basis_from_poles, find_poles, fit_coefficients, fit_error, BasisTerm, Class, Fit, PoleCount, PoleSearch, PoleSet,
    RationalApproximant,
};
use crate::transforms::{phase_excursion, Grid, GridFunction, NormOrder};
use crate::whf::{
    carlemann_split, density_from_factor, error_bound_factorization, normalize_factors, ExtremaDensity, HalfPlaneFactor,
    NormalizedFactors,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Sample,
    Poles,
    Basis,
    Fit,
    Split,
    Normalize,
    Density,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Sample => "sample",
            Stage::Poles => "poles",
            Stage::Basis => "basis",
            Stage::Fit => "fit",
            Stage::Split => "split",
            Stage::Normalize => "normalize",
            Stage::Density => "density",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A numerical error tagged with the stage that raised it.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{stage} stage failed: {source}")]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> core::result::Result<T, StageError>;
}

impl<T> AtStage<T> for Result<T> {
    fn at(self, stage: Stage) -> core::result::Result<T, StageError> {
        self.map_err(|source| StageError { stage, source })
    }
}

/// Coefficients imposed instead of fitted, in basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedCoefficients {
    pub a0: f64,
    pub coefficients: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub poles: PoleCount,
    pub search: PoleSearch,
    pub class: Class,
    pub grid: Grid,
    pub order: NormOrder,
    pub fixed: Option<FixedCoefficients>,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            poles: PoleCount::Smallest(3),
            search: PoleSearch::default(),
            class: Class::Full,
            grid: Grid::default(),
            order: NormOrder::two(),
            fixed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub poles: PoleSet,
    pub basis: Vec<BasisTerm>,
    pub fit: Fit,
    /// Factorization error bound evaluated at the fit error.
    pub bound: f64,
    pub raw_plus: HalfPlaneFactor,
    pub raw_minus: HalfPlaneFactor,
    pub factors: NormalizedFactors,
    pub supremum: ExtremaDensity,
    pub infimum: ExtremaDensity,
}

/// Samples `h` on the grid of `opts`.
pub fn sample_stopped_cf(model: &LevyModel, stop: &StoppingTime, grid: &Grid) -> Result<GridFunction> {
    GridFunction::try_from_fn(grid, |x| stopped_cf(model, stop, Complex64::new(x, 0.0)))
}

pub fn factorize(model: &LevyModel, stop: &StoppingTime, opts: &Options) -> core::result::Result<Factorization, StageError> {
    let h = sample_stopped_cf(model, stop, &opts.grid).at(Stage::Sample)?;
    let excursion = phase_excursion(&h);
    if excursion > core::f64::consts::PI * (1.0 + 1e-9) {
        warn!("phase of h varies by {excursion:.3} rad on the grid; its index may not be zero");
    }
    let den = |w: Complex64| denominator(model, stop, w);
    let poles = find_poles(&den, &opts.search, opts.poles).at(Stage::Poles)?;
    if poles.is_empty() {
        return Err(StageError { stage: Stage::Poles, source: Error::Empty("poles inside the search region") });
    }
    debug!("poles: {:?}", poles.all().map(|p| p.at).collect::<Vec<_>>());
    let basis = basis_from_poles(&poles, opts.class).at(Stage::Basis)?;

    let fit = match &opts.fixed {
        None => fit_coefficients(&h, &basis, opts.class, opts.order).at(Stage::Fit)?,
        Some(fixed) => {
            if fixed.coefficients.len() != basis.len() {
                return Err(StageError {
                    stage: Stage::Fit,
                    source: Error::InvalidParameter(alloc::format!(
                        "{} fixed coefficients for a basis of {} terms",
                        fixed.coefficients.len(),
                        basis.len()
                    )),
                });
            }
            let terms = basis.iter().copied().zip(fixed.coefficients.iter().copied()).collect();
            let approximant = RationalApproximant::new(fixed.a0, terms, opts.class).at(Stage::Fit)?;
            let error = fit_error(&h, &approximant, opts.order).at(Stage::Fit)?;
            Fit { approximant, error, rank: basis.len(), iterations: 0 }
        }
    };
    info!("fit error {:.6e} with {} terms", fit.error, basis.len());
    let bound = error_bound_factorization(fit.error, opts.order);

    let (raw_plus, raw_minus) = carlemann_split(&fit.approximant).at(Stage::Split)?;
    let factors = normalize_factors(&raw_plus, &raw_minus).at(Stage::Normalize)?;
    let supremum = density_from_factor(&factors.plus).at(Stage::Density)?;
    let infimum = density_from_factor(&factors.minus).at(Stage::Density)?;
    Ok(Factorization { poles, basis, fit, bound, raw_plus, raw_minus, factors, supremum, infimum })
}
