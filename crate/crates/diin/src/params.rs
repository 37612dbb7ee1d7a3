//! Named trainable parameters and their initialization.

use std::sync::Arc;

use indexmap::IndexMap;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{NodeId, Real, Tape};

/// Initialization recipe for a parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Zeros,
    Uniform { lo: Real, hi: Real },
    /// Fan-based uniform on [-sqrt(6/(fan_in+fan_out)), +..].
    GlorotUniform { fan_in: usize, fan_out: usize },
}

impl InitSpec {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Real> {
        match *self {
            InitSpec::Zeros => vec![0.0; n],
            InitSpec::Uniform { lo, hi } => (0..n).map(|_| rng.gen_range(lo..hi)).collect(),
            InitSpec::GlorotUniform { fan_in, fan_out } => {
                let limit = (6.0 / (fan_in + fan_out) as Real).sqrt();
                (0..n).map(|_| rng.gen_range(-limit..limit)).collect()
            }
        }
    }
}

/// One named tensor of trainable (or frozen) state.
#[derive(Debug, Clone)]
pub struct Param {
    pub values: Arc<Vec<Real>>,
    pub shape: Vec<usize>,
    pub trainable: bool,
    /// Row 0 is the PAD entry of an embedding table: kept at zero, its
    /// gradient is dropped before every optimizer update.
    pub freeze_row0: bool,
    pub init: InitSpec,
}

impl Param {
    pub fn numel(&self) -> usize {
        self.values.len()
    }
}

/// Ordered map of model parameters. Insertion order is the canonical
/// iteration order everywhere (loss terms, optimizer, checkpoints), which
/// keeps floating-point accumulation reproducible.
#[derive(Default)]
pub struct ParamStore {
    params: IndexMap<String, Param>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Create and register a parameter. Names must be unique.
    pub fn insert(
        &mut self,
        name: &str,
        shape: Vec<usize>,
        init: InitSpec,
        trainable: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        if self.params.contains_key(name) {
            return Err(Error::Param(format!("duplicate parameter name `{name}`")));
        }
        let n: usize = shape.iter().product();
        let values = init.sample(n, rng);
        self.params.insert(
            name.to_string(),
            Param {
                values: Arc::new(values),
                shape,
                trainable,
                freeze_row0: false,
                init,
            },
        );
        Ok(())
    }

    /// Register a parameter with explicit contents (embedding tables).
    pub fn insert_values(
        &mut self,
        name: &str,
        shape: Vec<usize>,
        values: Vec<Real>,
        trainable: bool,
        freeze_row0: bool,
    ) -> Result<()> {
        if self.params.contains_key(name) {
            return Err(Error::Param(format!("duplicate parameter name `{name}`")));
        }
        let n: usize = shape.iter().product();
        if n != values.len() {
            return Err(Error::Param(format!(
                "`{name}`: {} values for shape {shape:?}",
                values.len()
            )));
        }
        self.params.insert(
            name.to_string(),
            Param {
                values: Arc::new(values),
                shape,
                trainable,
                freeze_row0,
                init: InitSpec::Zeros,
            },
        );
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Param> {
        self.params
            .get(name)
            .ok_or_else(|| Error::Param(format!("unknown parameter `{name}`")))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.params.contains_key(name)
    }

    /// Mutable view of a parameter's values (clones shared storage on demand).
    pub fn values_mut(&mut self, name: &str) -> Result<&mut Vec<Real>> {
        let p = self
            .params
            .get_mut(name)
            .ok_or_else(|| Error::Param(format!("unknown parameter `{name}`")))?;
        Ok(Arc::make_mut(&mut p.values))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Param)> {
        self.params.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &String> {
        self.params.keys()
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    /// Total trainable scalars, with embedding tables (names under `emb/`)
    /// reported separately from model weights.
    pub fn count_trainable(&self) -> (usize, usize) {
        let mut model = 0usize;
        let mut emb = 0usize;
        for (name, p) in &self.params {
            if !p.trainable {
                continue;
            }
            if name.starts_with("emb/") {
                emb += p.numel();
            } else {
                model += p.numel();
            }
        }
        (model, emb)
    }
}

/// Binds store parameters to leaf nodes on one tape, one leaf per name.
/// Requesting the same name twice returns the same node, which is how
/// weight sharing (e.g. the character convolution across the two sentence
/// sides) is expressed.
pub struct Binder<'a> {
    store: &'a ParamStore,
    bound: IndexMap<String, NodeId>,
}

impl<'a> Binder<'a> {
    pub fn new(store: &'a ParamStore) -> Self {
        Binder {
            store,
            bound: IndexMap::new(),
        }
    }

    pub fn param(&mut self, tape: &mut Tape, name: &str) -> Result<NodeId> {
        if let Some(&id) = self.bound.get(name) {
            return Ok(id);
        }
        let p = self.store.get(name)?;
        let id = tape.leaf(Arc::clone(&p.values), p.shape.clone());
        self.bound.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn bound(&self) -> impl Iterator<Item = (&String, NodeId)> {
        self.bound.iter().map(|(k, &v)| (k, v))
    }

    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.bound.get(name).copied()
    }

    pub fn store(&self) -> &ParamStore {
        self.store
    }

    /// Gradients per trainable parameter after a backward pass. Parameters
    /// never bound or unreachable from the loss map to zeros.
    pub fn param_grads(
        &self,
        grads: &crate::tensor::Gradients,
    ) -> IndexMap<String, Vec<Real>> {
        let mut out = IndexMap::new();
        for (name, p) in self.store.iter() {
            if !p.trainable {
                continue;
            }
            let g = self
                .bound
                .get(name)
                .and_then(|&id| grads.get(id))
                .map(|s| s.to_vec())
                .unwrap_or_else(|| vec![0.0; p.numel()]);
            out.insert(name.clone(), g);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn duplicate_names_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut store = ParamStore::new();
        store
            .insert("w", vec![2, 2], InitSpec::Zeros, true, &mut rng)
            .unwrap();
        assert!(store
            .insert("w", vec![2, 2], InitSpec::Zeros, true, &mut rng)
            .is_err());
    }

    #[test]
    fn trainable_flag_controls_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut store = ParamStore::new();
        store
            .insert("a/w", vec![3, 4], InitSpec::Zeros, true, &mut rng)
            .unwrap();
        store
            .insert("b/w", vec![5], InitSpec::Zeros, false, &mut rng)
            .unwrap();
        store
            .insert_values("emb/word", vec![2, 3], vec![0.0; 6], true, true)
            .unwrap();
        let (model, emb) = store.count_trainable();
        assert_eq!(model, 12);
        assert_eq!(emb, 6);
    }

    #[test]
    fn binder_shares_nodes_per_name() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut store = ParamStore::new();
        store
            .insert("shared/w", vec![2], InitSpec::Uniform { lo: -0.1, hi: 0.1 }, true, &mut rng)
            .unwrap();
        let mut tape = Tape::new();
        let mut binder = Binder::new(&store);
        let a = binder.param(&mut tape, "shared/w").unwrap();
        let b = binder.param(&mut tape, "shared/w").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unbound_params_get_zero_grads() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut store = ParamStore::new();
        store
            .insert("used/w", vec![2], InitSpec::Uniform { lo: -1.0, hi: 1.0 }, true, &mut rng)
            .unwrap();
        store
            .insert("unused/w", vec![3], InitSpec::Uniform { lo: -1.0, hi: 1.0 }, true, &mut rng)
            .unwrap();
        let mut tape = Tape::new();
        let mut binder = Binder::new(&store);
        let w = binder.param(&mut tape, "used/w").unwrap();
        let sq = tape.mul(w, w).unwrap();
        let loss = tape.sum_all(sq).unwrap();
        let grads = tape.backward(loss).unwrap();
        let by_name = binder.param_grads(&grads);
        assert!(by_name["used/w"].iter().any(|&g| g != 0.0));
        assert_eq!(by_name["unused/w"], vec![0.0; 3]);
    }
}
