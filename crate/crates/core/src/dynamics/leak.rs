//! Fock-truncation leak monitor.
//!
//! A retained state at the cutoff of a mode is *leaky* when the Hamiltonian,
//! rebuilt on a basis with one extra Fock level, couples it to occupation
//! `cutoff + 1`. The leak is the population carried by leaky states; it bounds
//! the amplitude rate that the truncated dynamics drops.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::models::{assemble, BuiltModel, ModelSpec};
use crate::statespace::{Basis, FactorKind};
use crate::C64;

struct ModeLeak {
    label: String,
    cutoff: usize,
    leaky: Vec<usize>,
}

pub(crate) struct LeakMonitor {
    modes: Vec<ModeLeak>,
    threshold: f64,
    pub(crate) max_leak: f64,
}

impl LeakMonitor {
    pub(crate) fn new(spec: &ModelSpec, basis: &Arc<Basis>, threshold: f64) -> Result<Self> {
        let mut modes = Vec::new();
        for (fi, factor) in basis.factors().iter().enumerate() {
            let FactorKind::Mode { fock_cutoff } = factor.kind else {
                continue;
            };
            let mut ext_spec = basis.spec().clone();
            for m in &mut ext_spec.modes {
                if m.label == factor.label {
                    m.fock_cutoff += 1;
                }
            }
            let ext = Arc::new(Basis::with_cap(ext_spec, usize::MAX)?);
            let model = assemble(spec, &ext)?;
            let mut couplers = model.static_part.to_csr();
            if let Some(d) = &model.drive {
                couplers = couplers.add(&d.operator.to_csr());
            }
            let mut is_leaky = vec![false; ext.dim()];
            for (r, c, v) in couplers.iter() {
                if v != C64::new(0.0, 0.0) && ext.digit(r, fi) == fock_cutoff + 1 && ext.digit(c, fi) == fock_cutoff {
                    is_leaky[c] = true;
                }
            }
            let leaky = (0..basis.dim())
                .filter(|&i| {
                    let j = basis
                        .factors()
                        .iter()
                        .enumerate()
                        .map(|(k, _)| basis.digit(i, k) * ext.factors()[k].stride)
                        .sum::<usize>();
                    is_leaky[j]
                })
                .collect();
            modes.push(ModeLeak {
                label: factor.label.clone(),
                cutoff: fock_cutoff,
                leaky,
            });
        }
        Ok(Self {
            modes,
            threshold,
            max_leak: 0.0,
        })
    }

    fn record(&mut self, t: f64, pop: impl Fn(usize) -> f64) -> Result<()> {
        for m in &self.modes {
            let leak: f64 = m.leaky.iter().map(|&i| pop(i)).sum();
            self.max_leak = self.max_leak.max(leak);
            if leak > self.threshold {
                return Err(Error::TruncationLeak {
                    mode: m.label.clone(),
                    leak,
                    threshold: self.threshold,
                    cutoff: m.cutoff,
                    time: t,
                });
            }
        }
        Ok(())
    }

    pub(crate) fn check_pure(&mut self, t: f64, psi: &DVector<C64>) -> Result<()> {
        self.record(t, |i| psi[i].norm_sqr())
    }

    pub(crate) fn check_mixed(&mut self, t: f64, rho: &DMatrix<C64>) -> Result<()> {
        self.record(t, |i| rho[(i, i)].re)
    }
}

/// Leaky-state indices per mode, exposed for inspection.
pub fn leaky_states(spec: &ModelSpec, model: &BuiltModel) -> Result<Vec<(String, Vec<usize>)>> {
    let mon = LeakMonitor::new(spec, model.basis(), f64::INFINITY)?;
    Ok(mon.modes.into_iter().map(|m| (m.label, m.leaky)).collect())
}
