//! Bayesian mixture prediction over a finite class of computable measures,
//! and an enumeration-based lower bound on the universal a priori mass.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::BitString;
use crate::chaos::Predictor;
use crate::complexity::Enumeration;
use crate::dyadic::DyadicRational;
use crate::error::{Error, Result};
use crate::machine::{Machine, Mode};
use crate::measure::{check_additivity, RecursiveMeasure};

pub fn dyadic_to_rational(d: &DyadicRational) -> BigRational {
    BigRational::new(BigInt::from(d.numerator().clone()), BigInt::from(BigUint::one() << d.exponent()))
}

#[derive(Clone, Debug)]
pub struct Model {
    pub measure: Arc<dyn RecursiveMeasure>,
    pub weight: BigRational,
}

#[derive(Clone, Debug)]
pub struct ModelClass {
    models: Vec<Model>,
}

impl ModelClass {
    /// Weights must be positive with sum at most 1; each measure is checked
    /// for additivity on cylinders of up to 8 bits.
    pub fn new(models: Vec<(Arc<dyn RecursiveMeasure>, BigRational)>) -> Result<Self> {
        let mut total = BigRational::zero();
        for (mu, w) in &models {
            if !w.is_positive() {
                return Err(Error::Precondition(format!("weight of {} must be positive", mu.name())));
            }
            if !check_additivity(mu.as_ref(), 8) {
                return Err(Error::Precondition(format!("{} is not additive", mu.name())));
            }
            total += w;
        }
        if total > BigRational::one() {
            return Err(Error::Precondition("prior weights sum to more than 1".into()));
        }
        Ok(Self { models: models.into_iter().map(|(measure, weight)| Model { measure, weight }).collect() })
    }

    /// Equal weights `1/k`.
    pub fn uniform(measures: Vec<Arc<dyn RecursiveMeasure>>) -> Result<Self> {
        let k = measures.len() as i64;
        Self::new(measures.into_iter().map(|m| (m, BigRational::new(1.into(), k.into()))).collect())
    }

    pub fn models(&self) -> &[Model] {
        &self.models
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }

    /// `Σ wᵢ µᵢ(Γ_x)`.
    pub fn mixture_mass(&self, x: &BitString) -> BigRational {
        self.models
            .iter()
            .map(|m| &m.weight * dyadic_to_rational(&m.measure.cylinder_mass(x)))
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// Posterior weights `wᵢ µᵢ(Γ_x) / Σ wⱼ µⱼ(Γ_x)`.
    pub fn posterior(&self, x: &BitString) -> Result<Vec<BigRational>> {
        let total = self.mixture_mass(x);
        if total.is_zero() {
            return Err(Error::ZeroMass(x.to_string()));
        }
        Ok(self
            .models
            .iter()
            .map(|m| &m.weight * dyadic_to_rational(&m.measure.cylinder_mass(x)) / &total)
            .collect())
    }
}

/// Probability that the bit after `x` is 0 under the mixture.
pub fn mixture_next(class: &ModelClass, x: &BitString) -> Result<BigRational> {
    let total = class.mixture_mass(x);
    if total.is_zero() {
        return Err(Error::ZeroMass(x.to_string()));
    }
    let mut x0 = x.clone();
    x0.push(false);
    Ok(class.mixture_mass(&x0) / total)
}

/// Posterior tracking in log space, for long horizons.
#[derive(Clone, Debug)]
pub struct MixtureState<'c> {
    class: &'c ModelClass,
    log_post: Vec<f64>,
    history: BitString,
}

impl<'c> MixtureState<'c> {
    pub fn new(class: &'c ModelClass) -> Self {
        let log_post = class.models.iter().map(|m| m.weight.to_f64().unwrap_or(0.0).ln()).collect();
        Self { class, log_post, history: BitString::new() }
    }

    pub fn history(&self) -> &BitString {
        &self.history
    }

    /// Mixture probability of a 0 next.
    pub fn p_zero(&self) -> f64 {
        let top = self.log_post.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut num = 0.0;
        let mut den = 0.0;
        for (m, &lp) in self.class.models.iter().zip(&self.log_post) {
            let w = (lp - top).exp();
            num += w * m.measure.next_prob(&self.history, false);
            den += w;
        }
        num / den
    }

    pub fn observe(&mut self, bit: bool) {
        for (m, lp) in self.class.models.iter().zip(self.log_post.iter_mut()) {
            *lp += m.measure.next_prob(&self.history, bit).ln();
        }
        self.history.push(bit);
    }
}

impl Predictor for MixtureState<'_> {
    fn name(&self) -> String {
        format!("mixture({})", self.class.len())
    }

    fn guess(&self) -> bool {
        self.p_zero() < 0.5
    }

    fn update(&mut self, observed: bool) {
        self.observe(observed);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorTrace {
    pub seed: u64,
    pub truth: String,
    /// Cumulative `Σ (M(0|x_{<t}) − µ*(0|x_{<t}))²` after each step.
    pub cumulative: Vec<f64>,
    /// `ln(1/w_{µ*})`.
    pub reference: f64,
}

impl ErrorTrace {
    pub fn total(&self) -> f64 {
        self.cumulative.last().copied().unwrap_or(0.0)
    }
}

/// Samples a path of length `horizon` from model `truth` of the class and
/// accumulates the squared error of the mixture's next-bit probability.
pub fn squared_error_trace(class: &ModelClass, truth: usize, seed: u64, horizon: usize) -> Result<ErrorTrace> {
    let model = class
        .models
        .get(truth)
        .ok_or(Error::OutOfRange { index: truth, len: class.len() })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = MixtureState::new(class);
    let mut acc = 0.0;
    let mut cumulative = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let p_true = model.measure.next_prob(state.history(), false);
        let d = state.p_zero() - p_true;
        acc += d * d;
        cumulative.push(acc);
        let bit = !rng.gen_bool(p_true.clamp(0.0, 1.0));
        state.observe(bit);
    }
    Ok(ErrorTrace {
        seed,
        truth: model.measure.name(),
        cumulative,
        reference: -model.weight.to_f64().unwrap_or(0.0).ln(),
    })
}

pub fn error_traces(class: &ModelClass, truth: usize, seeds: std::ops::Range<u64>, horizon: usize) -> Result<Vec<ErrorTrace>> {
    seeds.into_par_iter().map(|s| squared_error_trace(class, truth, s, horizon)).collect()
}

/// `Σ 2^{−l(p)}` over halting prefix programs of at most `max_len` bits
/// whose output begins with `x`: a lower bound on the a priori mass of `x`.
pub fn m_lower(machine: &Machine, x: &BitString, max_len: usize, budget: u64) -> DyadicRational {
    let en = Enumeration::new(machine, Mode::Prefix, BitString::new(), budget);
    let mut mass = DyadicRational::zero();
    for h in en.halting_up_to(max_len) {
        if x.is_prefix_of(&h.output) {
            mass += &DyadicRational::pow2_neg(h.code.len() as u32);
        }
    }
    mass
}
