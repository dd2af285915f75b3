//! Instance files (JSON) and per-profile outcome dumps (CSV).

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::DiscreteDistribution;
use crate::error::{Error, Result};
use crate::mech::{profile_outcomes, AuctionInstance, Mechanism, PoolSchedule, Prior, Profile};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorSpec {
    /// One `[[value, mass], ...]` list per bidder.
    Independent(Vec<DiscreteDistribution>),
    Joint(Vec<JointRow>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointRow {
    pub values: Vec<f64>,
    pub mass: f64,
}

/// The on-disk instance format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub bidders: usize,
    pub prior: PriorSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_schedule: Option<PoolSchedule>,
}

impl InstanceFile {
    pub fn from_instance(inst: &AuctionInstance, schedule: Option<PoolSchedule>) -> Self {
        let prior = match inst.prior() {
            Prior::Independent(d) => PriorSpec::Independent(d.clone()),
            Prior::Joint(j) => PriorSpec::Joint(
                j.profiles()
                    .iter()
                    .map(|p| JointRow {
                        values: p.values.clone(),
                        mass: p.mass,
                    })
                    .collect(),
            ),
        };
        Self {
            bidders: inst.bidders(),
            prior,
            pool_schedule: schedule,
        }
    }

    pub fn to_instance(&self) -> Result<AuctionInstance> {
        match &self.prior {
            PriorSpec::Independent(d) => {
                if d.len() != self.bidders {
                    return Err(Error::InvalidInstance(format!(
                        "bidders = {} but {} distributions given",
                        self.bidders,
                        d.len()
                    )));
                }
                AuctionInstance::independent(d.clone())
            }
            PriorSpec::Joint(rows) => AuctionInstance::joint(
                self.bidders,
                rows.iter()
                    .map(|r| Profile {
                        values: r.values.clone(),
                        mass: r.mass,
                    })
                    .collect(),
            ),
        }
    }
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn load_instance(path: &Path) -> Result<InstanceFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_instance(&text)
}

/// One row per profile: `v_0.., mass, alloc_0.., pay_0..`.
pub fn write_outcomes_csv(
    out: impl Write,
    inst: &AuctionInstance,
    mech: &impl Mechanism,
) -> Result<()> {
    let n = inst.bidders();
    let mut w = csv::Writer::from_writer(out);
    let io_err = |e: csv::Error| Error::Parse(e.to_string());
    let mut header: Vec<String> = (0..n).map(|i| format!("v_{i}")).collect();
    header.push("mass".into());
    header.extend((0..n).map(|i| format!("alloc_{i}")));
    header.extend((0..n).map(|i| format!("pay_{i}")));
    w.write_record(&header).map_err(io_err)?;
    for (p, o) in profile_outcomes(inst, mech) {
        let mut row: Vec<String> = p.values.iter().map(f64::to_string).collect();
        row.push(p.mass.to_string());
        row.extend(o.alloc.iter().map(f64::to_string));
        row.extend(o.pay.iter().map(f64::to_string));
        w.write_record(&row).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Parse(e.to_string()))
}
