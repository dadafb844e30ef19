// SPDX-License-Identifier: Apache-2.0

//! Time-ordered output of an evolution run.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::Error;
use crate::geometry::{GraphInterface, ParamCurve};

/// Interface at one sample time, in the formulation that produced it.
#[derive(Debug, Clone, PartialEq)]
pub enum Snapshot {
    Graph(GraphInterface),
    Curve(ParamCurve),
}

impl Snapshot {
    pub fn m(&self) -> usize {
        match self {
            Snapshot::Graph(g) => g.m(),
            Snapshot::Curve(c) => c.m(),
        }
    }

    pub fn as_graph(&self) -> Option<&GraphInterface> {
        match self {
            Snapshot::Graph(g) => Some(g),
            Snapshot::Curve(_) => None,
        }
    }

    pub fn as_curve(&self) -> Option<&ParamCurve> {
        match self {
            Snapshot::Curve(c) => Some(c),
            Snapshot::Graph(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub snapshot: Snapshot,
    pub record: DiagnosticsRecord,
}

/// Samples reached by a run. `failure` holds the error that stopped it early.
#[derive(Debug, Default)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub failure: Option<Error>,
}

impl Trajectory {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.record.energy).collect()
    }

    pub fn records(&self) -> impl Iterator<Item = &DiagnosticsRecord> {
        self.samples.iter().map(|s| &s.record)
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    /// The samples if the run completed, the stopping error otherwise.
    pub fn into_result(self) -> Result<Vec<Sample>, Error> {
        match self.failure {
            None => Ok(self.samples),
            Some(e) => Err(e),
        }
    }
}
