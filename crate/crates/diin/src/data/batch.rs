//! Deterministic shuffled batching.
//!
//! The example order of an epoch is a pure function of (seed, epoch), so a
//! run is reproducible regardless of how featurization was parallelized.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::features::PairFeatures;
use crate::error::{Error, Result};

/// Indices into the featurized corpus for one batch.
#[derive(Debug, Clone)]
pub struct Batch {
    pub indices: Vec<usize>,
}

/// Shuffled order for one epoch.
pub fn epoch_order(n: usize, seed: u64, epoch: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x1000_0003).wrapping_add(epoch));
    order.shuffle(&mut rng);
    order
}

/// Batches for one epoch; the final batch carries the remainder.
pub fn epoch_batches(
    examples: &[PairFeatures],
    batch_size: usize,
    seed: u64,
    epoch: u64,
) -> Result<Vec<Batch>> {
    if batch_size < 1 {
        return Err(Error::Config("batch_size must be at least 1".into()));
    }
    let order = epoch_order(examples.len(), seed, epoch);
    Ok(order
        .chunks(batch_size)
        .map(|c| Batch {
            indices: c.to_vec(),
        })
        .collect())
}

/// Endless batch stream cycling over epochs.
pub struct BatchStream<'a> {
    examples: &'a [PairFeatures],
    batch_size: usize,
    seed: u64,
    epoch: u64,
    queue: std::vec::IntoIter<Batch>,
}

impl<'a> BatchStream<'a> {
    pub fn new(examples: &'a [PairFeatures], batch_size: usize, seed: u64) -> Result<Self> {
        if batch_size < 1 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if examples.is_empty() {
            return Err(Error::Config("cannot batch an empty corpus".into()));
        }
        let queue = epoch_batches(examples, batch_size, seed, 0)?.into_iter();
        Ok(BatchStream {
            examples,
            batch_size,
            seed,
            epoch: 0,
            queue,
        })
    }

    pub fn next_batch(&mut self) -> Batch {
        loop {
            if let Some(b) = self.queue.next() {
                return b;
            }
            self.epoch += 1;
            self.queue = epoch_batches(self.examples, self.batch_size, self.seed, self.epoch)
                .expect("validated at construction")
                .into_iter();
        }
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ModelConfig;
    use crate::data::features::featurize;
    use crate::data::synth::synthetic_pairs;
    use crate::data::vocab::Vocabulary;

    fn toy_features(n: usize) -> Vec<PairFeatures> {
        let pairs = synthetic_pairs(n, 5);
        let streams: Vec<&[String]> = pairs
            .iter()
            .flat_map(|p| [p.premise_tokens.as_slice(), p.hypothesis_tokens.as_slice()])
            .collect();
        let vocab = Vocabulary::build(streams, 4, 3, 5);
        let cfg = ModelConfig::tiny_test();
        featurize(&pairs, &vocab, &cfg).unwrap()
    }

    #[test]
    fn same_seed_same_epoch_same_order() {
        assert_eq!(epoch_order(100, 9, 3), epoch_order(100, 9, 3));
        assert_ne!(epoch_order(100, 9, 3), epoch_order(100, 9, 4));
        assert_ne!(epoch_order(100, 9, 3), epoch_order(100, 10, 3));
    }

    #[test]
    fn remainder_batch() {
        let ex = toy_features(71);
        let batches = epoch_batches(&ex, 70, 1, 0).unwrap();
        assert_eq!(batches.len(), 2);
        assert_eq!(batches[0].indices.len(), 70);
        assert_eq!(batches[1].indices.len(), 1);
    }

    #[test]
    fn zero_batch_size_rejected() {
        let ex = toy_features(4);
        assert!(epoch_batches(&ex, 0, 1, 0).is_err());
        assert!(BatchStream::new(&ex, 0, 1).is_err());
    }

    #[test]
    fn stream_advances_epochs() {
        let ex = toy_features(8);
        let mut stream = BatchStream::new(&ex, 8, 2).unwrap();
        let first = stream.next_batch();
        assert_eq!(first.indices.len(), 8);
        let _second = stream.next_batch();
        assert_eq!(stream.epoch(), 1);
    }
}
