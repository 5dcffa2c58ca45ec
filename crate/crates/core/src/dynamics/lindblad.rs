use std::sync::Arc;

use nalgebra::DMatrix;

use super::leak::LeakMonitor;
use super::request::{EvolutionRequest, FinalState, NoiseKind, NoiseTerm, RunMetadata, Trajectory};
use super::Prepared;
use crate::error::{Error, Result};
use crate::models::SINK;
use crate::statespace::sparse::CsrMatrix;
use crate::statespace::{
    ensemble_operator, single_site_operator, Basis, CollectiveOp, DensityMatrix, OperatorMatrix, Reduction, SiteOp,
};
use crate::C64;

/// Number of records on which the smallest eigenvalue of ρ is checked when
/// the dimension is too large to check every record.
const EIGEN_SAMPLES: usize = 16;

fn site_or_collective(basis: &Arc<Basis>, ensemble: &str, site: usize, op: SiteOp) -> Result<OperatorMatrix> {
    let (_, n) = basis.ensemble_factor(ensemble)?;
    match basis.reduction() {
        Reduction::FullTensor => single_site_operator(basis, ensemble, site, op),
        Reduction::CollectiveSpin if n == 1 => match op {
            SiteOp::SPlus => ensemble_operator(basis, ensemble, CollectiveOp::JPlus),
            SiteOp::SMinus => ensemble_operator(basis, ensemble, CollectiveOp::JMinus),
            SiteOp::Sz => Ok(ensemble_operator(basis, ensemble, CollectiveOp::Jz)?.scale_real(2.0)),
            _ => Err(Error::UnsupportedRepresentation(format!("{op:?} in a collective basis"))),
        },
        Reduction::CollectiveSpin => Err(Error::UnsupportedRepresentation(format!(
            "individual channels on ensemble `{ensemble}` ({n} sites) break permutation symmetry; use full_tensor"
        ))),
    }
}

fn targets(noise: &[NoiseTerm]) -> Vec<String> {
    noise
        .iter()
        .filter(|t| t.kind == NoiseKind::Sink)
        .map(|t| t.target.clone().unwrap_or_else(|| SINK.to_owned()))
        .collect()
}

/// Collapse operators `L_k` for every noise entry with a positive rate.
pub fn collapse_operators(noise: &[NoiseTerm], basis: &Arc<Basis>) -> Result<Vec<OperatorMatrix>> {
    let sink_targets = targets(noise);
    let mut out = Vec::new();
    for (i, term) in noise.iter().enumerate() {
        if !(term.rate >= 0.0) || !term.rate.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "noise[{i}].rate must be finite and non-negative, got {}",
                term.rate
            )));
        }
        let ensembles: Vec<(String, usize)> = match &term.ensemble {
            Some(e) => vec![(e.clone(), basis.ensemble_factor(e)?.1)],
            None => basis
                .spec()
                .ensembles
                .iter()
                .filter(|e| !sink_targets.contains(&e.label))
                .map(|e| (e.label.clone(), e.n_tls))
                .collect(),
        };
        if term.rate == 0.0 {
            continue;
        }
        let r = term.rate.sqrt();
        match term.kind {
            NoiseKind::IndividualDecay | NoiseKind::IndividualDephasing => {
                let (op, scale) = match term.kind {
                    NoiseKind::IndividualDecay => (SiteOp::SMinus, r),
                    _ => (SiteOp::Sz, (term.rate / 2.0).sqrt()),
                };
                for (e, n) in &ensembles {
                    for site in 0..*n {
                        out.push(site_or_collective(basis, e, site, op)?.scale_real(scale));
                    }
                }
            }
            NoiseKind::CollectiveDecay => {
                for (e, _) in &ensembles {
                    out.push(ensemble_operator(basis, e, CollectiveOp::JMinus)?.scale_real(r));
                }
            }
            NoiseKind::Sink => {
                let target = term.target.clone().unwrap_or_else(|| SINK.to_owned());
                let (source, n) = match &term.ensemble {
                    Some(e) => (e.clone(), basis.ensemble_factor(e)?.1),
                    None => {
                        let e = basis
                            .spec()
                            .ensembles
                            .iter()
                            .find(|e| e.label != target)
                            .ok_or_else(|| Error::InvalidArgument("sink needs a source ensemble".into()))?;
                        (e.label.clone(), e.n_tls)
                    }
                };
                let site = term.site.unwrap_or(n - 1);
                let up = site_or_collective(basis, &target, 0, SiteOp::SPlus)?;
                let down = site_or_collective(basis, &source, site, SiteOp::SMinus)?;
                out.push(up.matmul(&down)?.scale_real(r));
            }
        }
    }
    Ok(out)
}

struct Generator {
    /// `−iH − ½ Σ L†L`
    effective: CsrMatrix,
    drive: Option<(crate::models::DriveEnvelope, CsrMatrix)>,
    jumps: Vec<CsrMatrix>,
    /// `Σ_k l_k,i conj(l_k,j)` over diagonal collapse operators, applied as a
    /// Hadamard product.
    diagonal: Option<DMatrix<C64>>,
}

impl Generator {
    /// `Gρ + (Gρ)† + Σ L (Lρ)†` with `G` the effective generator at `t`.
    fn apply(&self, t: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let mut a = self.effective.mul_dense(rho);
        if let Some((env, d)) = &self.drive {
            let eta = env.eval(t);
            if eta != 0.0 {
                a += d.mul_dense(rho) * C64::new(0.0, -eta);
            }
        }
        let mut out = &a + a.adjoint();
        for l in &self.jumps {
            let lr = l.mul_dense(rho);
            out += l.mul_dense(&lr.adjoint());
        }
        if let Some(d) = &self.diagonal {
            out += d.component_mul(rho);
        }
        (&out + out.adjoint()) * C64::from(0.5)
    }

    fn bound(&self) -> f64 {
        let mut b = 2.0 * self.effective.norm_inf();
        if let Some((env, d)) = &self.drive {
            b += 2.0 * env.eta0.abs() * d.norm_inf();
        }
        for l in &self.jumps {
            b += l.norm_inf() * l.adjoint().norm_inf();
        }
        if let Some(d) = &self.diagonal {
            b += d.iter().map(|z| z.norm()).fold(0.0, f64::max);
        }
        b
    }
}

/// Propagates a density operator under the Lindblad master equation.
pub fn evolve_open(req: &EvolutionRequest) -> Result<Trajectory> {
    if req.noise.is_empty() {
        return Err(Error::InvalidArgument("evolve_open needs at least one noise entry".into()));
    }
    let p = Prepared::new(req)?;
    let dim = p.basis.dim();
    if dim > req.options.density_dim_cap {
        return Err(Error::DimensionCap {
            dim,
            cap: req.options.density_dim_cap,
        });
    }
    let jumps = collapse_operators(&req.noise, &p.basis)?;
    let mut effective = p.model.static_part.to_csr().scale(C64::new(0.0, -1.0));
    for l in &jumps {
        let csr = l.to_csr();
        effective = effective.add(&csr.adjoint().matmul(&csr).scale(C64::from(-0.5)));
    }
    let (diag, general): (Vec<CsrMatrix>, Vec<CsrMatrix>) =
        jumps.iter().map(OperatorMatrix::to_csr).partition(|l| l.iter().all(|(r, c, _)| r == c));
    let diagonal = (!diag.is_empty()).then(|| {
        let mut d = DMatrix::<C64>::zeros(dim, dim);
        for l in &diag {
            let v: Vec<C64> = (0..dim).map(|i| l.get(i, i)).collect();
            for j in 0..dim {
                for i in 0..dim {
                    d[(i, j)] += v[i] * v[j].conj();
                }
            }
        }
        d
    });
    let gen = Generator {
        effective,
        drive: p.model.drive.as_ref().map(|d| (d.envelope, d.operator.to_csr())),
        jumps: general,
        diagonal,
    };

    let t_max = *p.times.last().expect("non-empty grid");
    let dt = req.dt_output;
    let h_target = match req.options.open_step {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::InvalidArgument(format!("open_step must be positive, got {h}"))),
        None => {
            let b = gen.bound().max(1e-12);
            (120.0 * req.options.open_tolerance / (b * t_max)).powf(0.25) / b
        }
    };
    let substeps = (dt / h_target).ceil().max(1.0) as usize;
    let h = dt / substeps as f64;

    let observables: Vec<CsrMatrix> = p.observables.iter().map(OperatorMatrix::to_csr).collect();
    let mut leak = LeakMonitor::new(&req.model, &p.basis, req.options.leak_threshold)?;
    let sample_every = if dim <= 64 {
        1
    } else {
        p.times.len().div_ceil(EIGEN_SAMPLES).max(1)
    };
    let mut meta = RunMetadata {
        method: "lindblad_rk4".into(),
        internal_step: Some(h),
        ..RunMetadata::default()
    };
    let mut min_eig = f64::INFINITY;
    let mut records = Vec::with_capacity(p.times.len());

    let psi = p.initial.amplitudes();
    let mut rho = psi * psi.adjoint();
    let mut t = 0.0;
    for (k, &target) in p.times.iter().enumerate() {
        if k > 0 {
            for s in 0..substeps {
                let t0 = p.times[k - 1] + s as f64 * h;
                rho = rk4(&gen, t0, h, &rho);
            }
            meta.accepted_steps += substeps;
            t = target;
        }
        leak.check_mixed(t, &rho)?;
        meta.max_norm_drift = meta.max_norm_drift.max((rho.trace().re - 1.0).abs());
        if k % sample_every == 0 || k + 1 == p.times.len() {
            let dm = DensityMatrix::new(&p.basis, rho.clone())?;
            min_eig = min_eig.min(dm.min_eigenvalue());
        }
        records.push(observables.iter().map(|op| trace_product(op, &rho)).collect());
    }
    meta.min_eigenvalue = Some(min_eig);
    meta.max_truncation_leak = leak.max_leak;
    Ok(Trajectory {
        times: p.times,
        labels: req.observables.clone(),
        records,
        final_state: FinalState::Mixed(DensityMatrix::new(&p.basis, rho)?),
        metadata: meta,
    })
}

fn rk4(gen: &Generator, t: f64, h: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
    let c = |x: f64| C64::from(x);
    let k1 = gen.apply(t, rho);
    let k2 = gen.apply(t + 0.5 * h, &(rho + &k1 * c(0.5 * h)));
    let k3 = gen.apply(t + 0.5 * h, &(rho + &k2 * c(0.5 * h)));
    let k4 = gen.apply(t + h, &(rho + &k3 * c(h)));
    rho + (k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0)
}

fn trace_product(op: &CsrMatrix, rho: &DMatrix<C64>) -> f64 {
    op.iter().map(|(r, c, v)| v * rho[(c, r)]).sum::<C64>().re
}
