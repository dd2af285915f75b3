use std::collections::HashMap;

use serde::Serialize;

use crate::dist::{DiscreteDistribution, MASS_TOL};
use crate::error::{Error, Result};
use crate::util::compensated_sum;

/// One value profile with its prior probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Profile {
    pub values: Vec<f64>,
    pub mass: f64,
}

/// A prior over value profiles.
#[derive(Debug, Clone)]
pub enum Prior {
    Independent(Vec<DiscreteDistribution>),
    Joint(JointPrior),
}

/// An explicit probability table over profiles, indexed for posterior lookups.
#[derive(Debug, Clone)]
pub struct JointPrior {
    profiles: Vec<Profile>,
    // posteriors[i][bits of v_{-i}] = law of v_i given the other values
    posteriors: Vec<HashMap<Vec<u64>, DiscreteDistribution>>,
    marginals: Vec<DiscreteDistribution>,
}

fn others_key(values: &[f64], i: usize) -> Vec<u64> {
    values
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, v)| v.to_bits())
        .collect()
}

impl JointPrior {
    pub fn new(n: usize, table: Vec<Profile>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInstance("no bidders".into()));
        }
        let table: Vec<Profile> = table.into_iter().filter(|p| p.mass != 0.0).collect();
        if table.is_empty() {
            return Err(Error::InvalidInstance("empty joint table".into()));
        }
        for p in &table {
            if p.values.len() != n {
                return Err(Error::InvalidInstance(format!(
                    "profile {:?} has {} values, expected {n}",
                    p.values,
                    p.values.len()
                )));
            }
            if p.values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "profile {:?} has a value outside [0, inf)",
                    p.values
                )));
            }
            if !p.mass.is_finite() || p.mass < 0.0 {
                return Err(Error::InvalidInstance(format!("negative mass {}", p.mass)));
            }
        }
        let total = compensated_sum(table.iter().map(|p| p.mass));
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidInstance(format!(
                "joint masses sum to {total}, expected 1"
            )));
        }
        let mut seen = HashMap::with_capacity(table.len());
        for p in &table {
            let key: Vec<u64> = p.values.iter().map(|v| v.to_bits()).collect();
            if seen.insert(key, ()).is_some() {
                return Err(Error::InvalidInstance(format!(
                    "duplicate profile {:?}",
                    p.values
                )));
            }
        }

        let mut posteriors = Vec::with_capacity(n);
        let mut marginals = Vec::with_capacity(n);
        for i in 0..n {
            let mut groups: HashMap<Vec<u64>, Vec<(f64, f64)>> = HashMap::new();
            let mut marginal: HashMap<u64, f64> = HashMap::new();
            for p in &table {
                groups
                    .entry(others_key(&p.values, i))
                    .or_default()
                    .push((p.values[i], p.mass));
                *marginal.entry(p.values[i].to_bits()).or_default() += p.mass;
            }
            let mut index = HashMap::with_capacity(groups.len());
            for (key, pairs) in groups {
                index.insert(key, DiscreteDistribution::from_weights(pairs)?);
            }
            posteriors.push(index);
            marginals.push(DiscreteDistribution::from_weights(
                marginal
                    .into_iter()
                    .map(|(b, m)| (f64::from_bits(b), m))
                    .collect(),
            )?);
        }
        Ok(Self {
            profiles: table,
            posteriors,
            marginals,
        })
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn marginal(&self, i: usize) -> &DiscreteDistribution {
        &self.marginals[i]
    }

    /// Law of `v_i` given that the others' values equal `bids_{-i}` exactly.
    pub fn posterior(&self, i: usize, bids: &[f64]) -> Option<&DiscreteDistribution> {
        self.posteriors[i].get(&others_key(bids, i))
    }
}

/// `n` bidders and a prior over their values.
#[derive(Debug, Clone)]
pub struct AuctionInstance {
    bidders: usize,
    prior: Prior,
}

impl AuctionInstance {
    pub fn independent(dists: Vec<DiscreteDistribution>) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::InvalidInstance("no bidders".into()));
        }
        Ok(Self {
            bidders: dists.len(),
            prior: Prior::Independent(dists),
        })
    }

    pub fn joint(n: usize, table: Vec<Profile>) -> Result<Self> {
        Ok(Self {
            bidders: n,
            prior: Prior::Joint(JointPrior::new(n, table)?),
        })
    }

    pub fn bidders(&self) -> usize {
        self.bidders
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn is_independent(&self) -> bool {
        matches!(self.prior, Prior::Independent(_))
    }

    pub fn marginals(&self) -> Result<&[DiscreteDistribution]> {
        match &self.prior {
            Prior::Independent(d) => Ok(d),
            Prior::Joint(_) => Err(Error::RequiresIndependence),
        }
    }

    /// Marginal law of bidder `i`'s value.
    pub fn marginal(&self, i: usize) -> &DiscreteDistribution {
        match &self.prior {
            Prior::Independent(d) => &d[i],
            Prior::Joint(j) => j.marginal(i),
        }
    }

    /// The seller's belief about `v_i` given the other bids (before conditioning on a floor).
    pub fn posterior(&self, i: usize, bids: &[f64]) -> Option<&DiscreteDistribution> {
        match &self.prior {
            Prior::Independent(d) => Some(&d[i]),
            Prior::Joint(j) => j.posterior(i, bids),
        }
    }

    /// Optimal take-it-or-leave-it price `>= floor` for bidder `i`, given the other bids.
    /// `None` when the posterior puts no mass at or above the floor.
    pub fn posted_price(&self, i: usize, bids: &[f64], floor: f64) -> Option<f64> {
        self.posterior(i, bids)
            .and_then(|d| d.posted_price(floor).ok())
            .map(|(p, _)| p)
    }

    pub fn profile_count(&self) -> usize {
        match &self.prior {
            Prior::Independent(d) => d.iter().map(|x| x.len()).product(),
            Prior::Joint(j) => j.profiles().len(),
        }
    }

    /// All profiles with positive mass. Independent priors enumerate in row-major
    /// order (bidder 0 varies slowest).
    pub fn profiles(&self) -> Vec<Profile> {
        match &self.prior {
            Prior::Joint(j) => j.profiles().to_vec(),
            Prior::Independent(dists) => {
                let mut out = vec![Profile {
                    values: Vec::with_capacity(dists.len()),
                    mass: 1.0,
                }];
                for d in dists {
                    out = out
                        .into_iter()
                        .flat_map(|p| {
                            d.pairs().map(move |(v, m)| {
                                let mut values = p.values.clone();
                                values.push(v);
                                Profile {
                                    values,
                                    mass: p.mass * m,
                                }
                            })
                        })
                        .collect();
                }
                out
            }
        }
    }

    /// Sorted distinct values appearing for any bidder.
    pub fn all_values(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = (0..self.bidders)
            .flat_map(|i| self.marginal(i).support().to_vec())
            .collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        vals
    }

    pub fn max_value(&self) -> f64 {
        (0..self.bidders)
            .map(|i| self.marginal(i).max_value())
            .fold(0.0, f64::max)
    }
}
