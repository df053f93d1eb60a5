//! Closed-form response-time bounds and federated core allocations.
//!
//! Everything here is exact: bounds are returned as reduced fractions so the
//! dominance relations between the two analyses can be checked without any
//! tolerance.

use num_rational::Ratio;
use num_traits::ToPrimitive;

use crate::dag::Work;
use crate::decompose::MultiPathModel;
use crate::error::{Error, Result};

pub type Rational = Ratio<u64>;

pub fn to_f64(r: Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Graham's bound `L + (C - L) / m`.
pub fn graham_bound(total: Work, longest: Work, cores: usize) -> Result<Rational> {
    if cores == 0 {
        return Err(Error::ZeroCores);
    }
    if longest > total {
        return Err(Error::InvalidParameters(format!("L = {longest} exceeds C = {total}")));
    }
    Ok(Rational::from_integer(longest) + Rational::new(total - longest, cores as u64))
}

/// Multi-path bound: `min_{j in [0, k]} L + (C - sum_{i<=j} L_i) / (m - j)`
/// with `k = min(k_bar, m - 1)`. An empty model has bound 0.
pub fn multipath_bound(model: &MultiPathModel, cores: usize) -> Result<Rational> {
    Ok(multipath_terms(model, cores)?.into_iter().min().unwrap_or_else(|| Rational::from_integer(0)))
}

/// Every candidate term of the multi-path bound, indexed by `j`.
pub fn multipath_terms(model: &MultiPathModel, cores: usize) -> Result<Vec<Rational>> {
    if cores == 0 {
        return Err(Error::ZeroCores);
    }
    let Some(k) = model.k_for(cores) else {
        return Ok(Vec::new());
    };
    let c = model.total_work();
    let l = Rational::from_integer(model.longest());
    Ok(model
        .prefix_sums()
        .into_iter()
        .take(k + 1)
        .enumerate()
        .map(|(j, covered)| l + Rational::new(c - covered, (cores - j) as u64))
        .collect())
}

fn check_heavy(total: Work, longest: Work, deadline: Work) -> Result<()> {
    if deadline > total {
        return Err(Error::InvalidParameters(format!("D = {deadline} exceeds C = {total}; task is not heavy")));
    }
    if deadline < longest {
        return Err(Error::InvalidParameters(format!("D = {deadline} is below L = {longest}")));
    }
    Ok(())
}

/// Federated allocation from Graham's bound: `ceil((C - L) / (D - L))`.
/// Requires `C >= D > L`.
pub fn cores_graham(total: Work, longest: Work, deadline: Work) -> Result<u64> {
    Ok(fractional_cores_graham(total, longest, deadline)?.ceil().to_integer())
}

/// Federated allocation from the multi-path bound, minimised over `j in [0, k_bar]`.
/// Requires `C >= D >= L`; for `D = L` the answer is `k_bar + 1`.
pub fn cores_multipath(model: &MultiPathModel, deadline: Work) -> Result<u64> {
    Ok(multipath_core_terms(model, deadline, true)?.into_iter().min().expect("non-empty").to_integer())
}

pub fn fractional_cores_graham(total: Work, longest: Work, deadline: Work) -> Result<Rational> {
    check_heavy(total, longest, deadline)?;
    if deadline == longest {
        return Err(Error::InvalidParameters("D = L leaves no slack for interference".into()));
    }
    Ok(Rational::new(total - longest, deadline - longest))
}

/// [`cores_multipath`] without the ceiling. Requires `D > L`.
pub fn fractional_cores_multipath(model: &MultiPathModel, deadline: Work) -> Result<Rational> {
    if deadline <= model.longest() {
        return Err(Error::InvalidParameters("D = L leaves no slack for interference".into()));
    }
    Ok(multipath_core_terms(model, deadline, false)?.into_iter().min().expect("non-empty"))
}

/// `m(j)` for each `j in [0, k_bar]`, with or without the ceiling.
pub fn multipath_core_terms(model: &MultiPathModel, deadline: Work, ceil: bool) -> Result<Vec<Rational>> {
    let (c, l) = (model.total_work(), model.longest());
    check_heavy(c, l, deadline)?;
    let k_bar = model
        .k_bar()
        .ok_or_else(|| Error::InvalidParameters("model carries no work".into()))?;
    let mut terms = Vec::with_capacity(k_bar + 1);
    if deadline > l {
        let slack = deadline - l;
        for (j, covered) in model.prefix_sums().into_iter().take(k_bar).enumerate() {
            let share = Rational::new(c - covered, slack);
            let share = if ceil { share.ceil() } else { share };
            terms.push(share + Rational::from_integer(j as u64));
        }
    }
    terms.push(Rational::from_integer(k_bar as u64 + 1));
    Ok(terms)
}
