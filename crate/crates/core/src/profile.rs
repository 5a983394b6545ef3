//! Block-partitioned decision vectors.
//!
//! A [`DecisionProfile`] stacks the decisions of all agents into one vector
//! `col(x_1, ..., x_N)` and remembers where each agent's block starts.

use std::ops::Range;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Agent block sizes `n_1..n_N`, stored as prefix offsets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    offsets: Arc<[usize]>,
}

impl Partition {
    pub fn new(sizes: &[usize]) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidPartition("no agents".into()));
        }
        let mut offsets = Vec::with_capacity(sizes.len() + 1);
        offsets.push(0);
        let mut acc = 0usize;
        for (i, &n) in sizes.iter().enumerate() {
            if n == 0 {
                return Err(Error::InvalidPartition(format!("agent {i} has an empty block")));
            }
            acc += n;
            offsets.push(acc);
        }
        Ok(Self { offsets: offsets.into() })
    }

    /// One scalar agent per coordinate.
    pub fn scalar_agents(n: usize) -> Result<Self> {
        Self::new(&vec![1; n])
    }

    pub fn n_agents(&self) -> usize {
        self.offsets.len() - 1
    }

    /// Total dimension `n`.
    pub fn dim(&self) -> usize {
        self.offsets[self.offsets.len() - 1]
    }

    pub fn range(&self, agent: usize) -> Range<usize> {
        self.offsets[agent]..self.offsets[agent + 1]
    }

    pub fn block_size(&self, agent: usize) -> usize {
        self.offsets[agent + 1] - self.offsets[agent]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// The stacked decision vector of all agents.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionProfile {
    values: Vec<f64>,
    partition: Partition,
}

/// Builds a profile from a flat vector and agent block sizes.
pub fn make_profile(values: Vec<f64>, sizes: &[usize]) -> Result<DecisionProfile> {
    DecisionProfile::new(values, Partition::new(sizes)?)
}

impl DecisionProfile {
    pub fn new(values: Vec<f64>, partition: Partition) -> Result<Self> {
        if values.len() != partition.dim() {
            return Err(Error::DimensionMismatch { expected: partition.dim(), found: values.len() });
        }
        Ok(Self { values, partition })
    }

    pub fn zeros(partition: Partition) -> Self {
        Self { values: vec![0.0; partition.dim()], partition }
    }

    /// Re-stacks per-agent blocks into one profile.
    pub fn from_blocks<B: AsRef<[f64]>>(blocks: &[B]) -> Result<Self> {
        let sizes: Vec<usize> = blocks.iter().map(|b| b.as_ref().len()).collect();
        let values = blocks.iter().flat_map(|b| b.as_ref().iter().copied()).collect();
        make_profile(values, &sizes)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn n_agents(&self) -> usize {
        self.partition.n_agents()
    }

    pub fn block(&self, agent: usize) -> &[f64] {
        &self.values[self.partition.range(agent)]
    }

    pub fn blocks(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.n_agents()).map(move |i| self.block(i))
    }

    /// Same partition, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(values, self.partition.clone())
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn distance(&self, other: &DecisionProfile) -> f64 {
        distance(&self.values, &other.values)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
