use std::cmp::Ordering;

use crate::graph::Cycle4;

use super::layout::Coords;

/// Step A: "is `(mj, mi)` an edge, and what would the cycle gain?"
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ARequest {
    pub mj: usize,
    pub mi: usize,
    pub w_ij: f64,
}

/// A completed cycle travelling through Steps B and C. Carries both
/// unmatched edge weights so the final owner can broadcast new mates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRequest {
    pub i: usize,
    pub j: usize,
    pub mj: usize,
    pub mi: usize,
    pub gain: f64,
    pub w_ij: f64,
    pub w_close: f64,
}

impl CycleRequest {
    pub fn cycle(&self) -> Cycle4 {
        Cycle4 { i: self.i, j: self.j, mj: self.mj, mi: self.mi, gain: self.gain }
    }

    /// Selection order: higher gain, then lower `i`, then lower `j`.
    pub fn beats(&self, other: &CycleRequest) -> bool {
        match self.gain.total_cmp(&other.gain) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => (self.i, self.j) < (other.i, other.j),
        }
    }
}

/// Step D broadcast: new mate of one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MateUpdate {
    Row { row: usize, mate: usize, weight: f64 },
    Col { col: usize, mate: usize, weight: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepMessage {
    A(ARequest),
    B(CycleRequest),
    C(CycleRequest),
    D(MateUpdate),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    pub src: Coords,
    pub dst: Coords,
    pub msg: StepMessage,
}
