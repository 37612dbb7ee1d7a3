//! Central finite-difference oracle for the backward pass.
//!
//! The oracle re-runs the (deterministic, dropout-free) forward builder with
//! each trainable parameter element perturbed by ±h and compares the central
//! difference against the analytic gradient. Failures are report entries,
//! never panics; asserting on the report is the caller's job.

use crate::error::Result;
use crate::params::{Binder, ParamStore};
use crate::tensor::{NodeId, Real, Tape};

pub const DEFAULT_STEP: Real = 1e-5;

/// Per-parameter worst-case comparison.
#[derive(Debug, Clone)]
pub struct FdEntry {
    pub name: String,
    pub elements: usize,
    pub max_rel_err: Real,
    /// Flat index, analytic and numeric gradient at the worst element.
    pub worst: (usize, Real, Real),
}

#[derive(Debug, Clone, Default)]
pub struct FdReport {
    pub entries: Vec<FdEntry>,
}

impl FdReport {
    pub fn max_rel_err(&self) -> Real {
        self.entries
            .iter()
            .map(|e| e.max_rel_err)
            .fold(0.0, Real::max)
    }

    pub fn passes(&self, tolerance: Real) -> bool {
        self.max_rel_err() <= tolerance
    }
}

impl std::fmt::Display for FdReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for e in &self.entries {
            writeln!(
                f,
                "{:40} n={:<6} max_rel_err={:.3e} (elem {} analytic {:.6e} numeric {:.6e})",
                e.name, e.elements, e.max_rel_err, e.worst.0, e.worst.1, e.worst.2
            )?;
        }
        Ok(())
    }
}

/// Relative error with the documented floor on the denominator.
fn rel_err(analytic: Real, numeric: Real) -> Real {
    (analytic - numeric).abs() / numeric.abs().max(1e-8)
}

/// Check every trainable parameter of `store` against central differences
/// through `build`, which must construct a scalar loss deterministically
/// from the current store contents.
pub fn finite_difference_check<F>(store: &mut ParamStore, build: F, h: Real) -> Result<FdReport>
where
    F: Fn(&mut Tape, &mut Binder) -> Result<NodeId>,
{
    // Analytic gradients once.
    let analytic = {
        let mut tape = Tape::new();
        let mut binder = Binder::new(store);
        let loss = build(&mut tape, &mut binder)?;
        let grads = tape.backward(loss)?;
        binder.param_grads(&grads)
    };

    let eval_loss = |store: &ParamStore| -> Result<Real> {
        let mut tape = Tape::new();
        let mut binder = Binder::new(store);
        let loss = build(&mut tape, &mut binder)?;
        Ok(tape.scalar(loss))
    };

    let names: Vec<String> = store
        .iter()
        .filter(|(_, p)| p.trainable)
        .map(|(n, _)| n.clone())
        .collect();

    let mut report = FdReport::default();
    for name in names {
        let n = store.get(&name)?.numel();
        let mut entry = FdEntry {
            name: name.clone(),
            elements: n,
            max_rel_err: 0.0,
            worst: (0, 0.0, 0.0),
        };
        for i in 0..n {
            let orig = store.get(&name)?.values[i];
            store.values_mut(&name)?[i] = orig + h;
            let up = eval_loss(store)?;
            store.values_mut(&name)?[i] = orig - h;
            let down = eval_loss(store)?;
            store.values_mut(&name)?[i] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[&name][i];
            let err = rel_err(a, numeric);
            if err > entry.max_rel_err {
                entry.max_rel_err = err;
                entry.worst = (i, a, numeric);
            }
        }
        report.entries.push(entry);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::InitSpec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_matmul_layer_under_1e6() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut store = ParamStore::new();
        store
            .insert(
                "w",
                vec![4, 3],
                InitSpec::GlorotUniform { fan_in: 4, fan_out: 3 },
                true,
                &mut rng,
            )
            .unwrap();
        store
            .insert("b", vec![3], InitSpec::Uniform { lo: -0.3, hi: 0.3 }, true, &mut rng)
            .unwrap();
        let x: Vec<f64> = (0..8).map(|i| (i as f64) * 0.17 - 0.6).collect();
        let report = finite_difference_check(
            &mut store,
            move |tape, binder| {
                let w = binder.param(tape, "w")?;
                let b = binder.param(tape, "b")?;
                let input = tape.constant(x.clone(), vec![2, 4]);
                let y = tape.matmul(input, w)?;
                let y = tape.add_row(y, b)?;
                let t = tape.tanh(y)?;
                tape.sum_all(t)
            },
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(report.passes(1e-6), "{report}");
    }

    #[test]
    fn failures_are_entries_not_panics() {
        // A parameter that never reaches the loss: analytic and numeric are
        // both zero, so the entry passes with error 0, and nothing panics.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut store = ParamStore::new();
        store
            .insert("orphan", vec![2], InitSpec::Uniform { lo: -1.0, hi: 1.0 }, true, &mut rng)
            .unwrap();
        let report = finite_difference_check(
            &mut store,
            |tape, _| {
                let c = tape.constant(vec![2.0], vec![1]);
                tape.sum_all(c)
            },
            DEFAULT_STEP,
        )
        .unwrap();
        assert_eq!(report.entries.len(), 1);
        assert_eq!(report.max_rel_err(), 0.0);
    }
}
