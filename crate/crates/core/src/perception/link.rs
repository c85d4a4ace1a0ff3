//! V2X link: fixed delay, Bernoulli loss and zero-order hold.

use alloc::collections::{BTreeMap, VecDeque};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::PerceivedLead;
use crate::error::{Error, Result};

/// Link parameters. The loss stream is ChaCha8 seeded from `seed`; the
/// stream is a cipher output and does not change between releases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkConfig {
    pub delay_steps: usize,
    pub drop_probability: f64,
    pub seed: u64,
}

impl LinkConfig {
    pub fn transparent() -> Self {
        Self {
            delay_steps: 0,
            drop_probability: 0.0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.drop_probability) {
            return Err(Error::invalid("drop_probability", "must lie in [0, 1]"));
        }
        Ok(())
    }
}

impl Default for LinkConfig {
    /// 100 ms latency at a 0.1 s step, no loss.
    fn default() -> Self {
        Self {
            delay_steps: 1,
            drop_probability: 0.0,
            seed: 0,
        }
    }
}

/// Delivery counters and the run-length distribution of consecutive drops.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LinkStats {
    pub packets_sent: u64,
    pub packets_delivered: u64,
    pub consecutive_drop_histogram: BTreeMap<u64, u64>,
}

impl LinkStats {
    /// `None` until at least one packet has left the delay line.
    pub fn delivery_ratio(&self) -> Option<f64> {
        (self.packets_sent > 0).then(|| self.packets_delivered as f64 / self.packets_sent as f64)
    }

    pub fn packets_dropped(&self) -> u64 {
        self.packets_sent - self.packets_delivered
    }
}

/// One directed link from a predecessor to its follower.
///
/// A packet counts as sent when it reaches the end of the delay line and
/// its fate is drawn; packets still in flight are not counted.
#[derive(Debug, Clone)]
pub struct Link {
    config: LinkConfig,
    rng: ChaCha8Rng,
    in_flight: VecDeque<PerceivedLead>,
    held: PerceivedLead,
    sent: u64,
    delivered: u64,
    histogram: BTreeMap<u64, u64>,
    current_run: u64,
}

impl Link {
    /// `initial` is returned until the first packet is delivered.
    pub fn new(config: LinkConfig, initial: PerceivedLead) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            in_flight: VecDeque::with_capacity(config.delay_steps + 1),
            held: initial,
            sent: 0,
            delivered: 0,
            histogram: BTreeMap::new(),
            current_run: 0,
        })
    }

    pub fn config(&self) -> &LinkConfig {
        &self.config
    }

    /// Pushes this step's message and returns what the receiver holds.
    pub fn step(&mut self, fresh: PerceivedLead) -> PerceivedLead {
        self.in_flight.push_back(fresh);
        if self.in_flight.len() > self.config.delay_steps {
            if let Some(packet) = self.in_flight.pop_front() {
                self.sent += 1;
                if self.draw_drop() {
                    self.current_run += 1;
                } else {
                    self.delivered += 1;
                    self.close_run();
                    self.held = packet;
                }
            }
        }
        self.held
    }

    /// Snapshot of the counters. A drop run still open at the time of the
    /// call is included in the histogram.
    pub fn stats(&self) -> LinkStats {
        let mut histogram = self.histogram.clone();
        if self.current_run > 0 {
            *histogram.entry(self.current_run).or_insert(0) += 1;
        }
        LinkStats {
            packets_sent: self.sent,
            packets_delivered: self.delivered,
            consecutive_drop_histogram: histogram,
        }
    }

    fn close_run(&mut self) {
        if self.current_run > 0 {
            *self.histogram.entry(self.current_run).or_insert(0) += 1;
            self.current_run = 0;
        }
    }

    // One draw per packet regardless of the probability, so a given seed
    // always consumes the stream at the same rate.
    fn draw_drop(&mut self) -> bool {
        let unit = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        unit < self.config.drop_probability
    }
}
