use num_complex::Complex64;
use rayon::prelude::*;

use super::constants::{lift_constant, riesz_constant, sobolev_constant};
use super::{CheckParams, Constant, ConstantSource, Instance, Member};
use crate::error::{Error, Result};
use crate::operators::{fs_vector_check, lift, riesz};
use crate::partition::{CutoffProfile, DyadicPartition, Transition};
use crate::spaces::{
    binomial, decompose, default_shift_set, difference, hz_seminorm, SpaceKind, SpaceParams,
};
use crate::spectral::{
    circular_convolve, forward_transform, lp_norm, Exponent, FourierConvention, SampledField,
};

pub(super) struct Outcome {
    pub instances: Vec<Instance>,
    pub constant: Option<Constant>,
    pub tolerance: f64,
}

struct Ctx<'a> {
    members: &'a [Member],
    partition: &'a DyadicPartition,
    params: &'a CheckParams,
    bounds: Option<Constant>,
}

const EXACT_TOL: f64 = 1e-10;
const PROOF_TOL: f64 = 1e-10;
const FIT_TOL: f64 = 0.0;

impl Ctx<'_> {
    fn s(&self, default: f64) -> f64 {
        self.params.s.unwrap_or(default)
    }

    fn p(&self) -> Exponent {
        self.params.p.unwrap_or(Exponent::Finite(2.0))
    }

    fn q(&self) -> Exponent {
        self.params.q.unwrap_or(Exponent::Finite(2.0))
    }

    fn besov(&self, s: f64, p: Exponent, q: Exponent) -> Result<SpaceParams> {
        SpaceParams::new(s, p, q, SpaceKind::BesovHomog)
    }

    fn norm(&self, f: &SampledField, params: &SpaceParams) -> Result<f64> {
        Ok(decompose(f, self.partition, params.kind)?
            .norm(params)?
            .aggregate)
    }

    /// Applies `per_member` to every member in parallel, keeping member order.
    fn each<F>(&self, per_member: F) -> Result<Vec<Instance>>
    where
        F: Fn(&Member) -> Result<Vec<Instance>> + Sync + Send,
    {
        let nested: Vec<Result<Vec<Instance>>> = self.members.par_iter().map(per_member).collect();
        let mut out = Vec::new();
        for r in nested {
            out.extend(r?);
        }
        Ok(out)
    }

    fn require_bounds(&self, check: &str) -> Result<Constant> {
        self.bounds.ok_or_else(|| {
            Error::InvalidParameter(format!(
                "`{check}` needs `lower`/`upper` or a frozen constant"
            ))
        })
    }
}

pub(super) fn run(
    check_id: &str,
    members: &[Member],
    partition: &DyadicPartition,
    params: &CheckParams,
    bounds: Option<Constant>,
) -> Result<Outcome> {
    let ctx = Ctx {
        members,
        partition,
        params,
        bounds,
    };
    match check_id {
        "partition_validity" => partition_validity(&ctx),
        "reconstruction" => reconstruction(&ctx),
        "phi_independence" => phi_independence(&ctx),
        "lq_monotone" => lq_monotone(&ctx),
        "sobolev_embedding" => sobolev_embedding(&ctx),
        "lift_isomorphism" => lift_isomorphism(&ctx),
        "fourier_refinement" => fourier_refinement(&ctx),
        "bc_embedding" => bc_embedding(&ctx),
        "holder_equiv" => holder_equiv(&ctx),
        "riesz_bounded" => riesz_bounded(&ctx),
        "bf_sandwich" => bf_sandwich(&ctx),
        "l2_corridor" => l2_corridor(&ctx),
        "fs_maximal" => fs_maximal(&ctx),
        "realization" => realization(&ctx),
        "diff_convolution" => diff_convolution(&ctx),
        other => Err(Error::UnknownCheck(other.to_string())),
    }
}

fn partition_validity(ctx: &Ctx) -> Result<Outcome> {
    let report = ctx.partition.validate();
    let worst = report
        .telescoping_violation
        .max(report.support_violation)
        .max(report.range_violation);
    let tol = crate::partition::PARTITION_TOLERANCE;
    let instance = Instance::new("partition", worst, tol, report.pass);
    Ok(Outcome {
        instances: vec![instance],
        constant: None,
        tolerance: tol,
    })
}

fn reconstruction(ctx: &Ctx) -> Result<Outcome> {
    let tol = 1e-10;
    let instances = ctx.each(|m| {
        let dec = decompose(&m.field, ctx.partition, SpaceKind::BesovHomog)?;
        let err = dec.reconstruct().max_abs_diff(&m.field)?;
        let bound = tol * m.field.sup_norm();
        Ok(vec![Instance::new(
            m.label.clone(),
            err,
            bound,
            err <= bound,
        )])
    })?;
    Ok(Outcome {
        instances,
        constant: None,
        tolerance: tol,
    })
}

fn phi_independence(ctx: &Ctx) -> Result<Outcome> {
    let bounds = ctx.require_bounds("phi_independence")?;
    let grid = *ctx.partition.grid();
    let other = DyadicPartition::with_range(
        &grid,
        CutoffProfile::new(Transition::ExpSquared),
        ctx.partition.range(),
    )?;
    let params = ctx.besov(ctx.s(0.5), ctx.p(), ctx.q())?;
    let instances = ctx.each(|m| {
        let base = ctx.norm(&m.field, &params)?;
        let alt = decompose(&m.field, &other, params.kind)?
            .norm(&params)?
            .aggregate;
        Ok(vec![Instance::bounded(
            m.label.clone(),
            alt,
            base,
            &bounds,
            FIT_TOL,
        )])
    })?;
    Ok(Outcome {
        instances,
        constant: Some(bounds),
        tolerance: FIT_TOL,
    })
}

fn lq_monotone(ctx: &Ctx) -> Result<Outcome> {
    let tol = 1e-12;
    let mut qs = ctx.params.qs.clone().unwrap_or_else(|| {
        vec![
            Exponent::Finite(1.0),
            Exponent::Finite(2.0),
            Exponent::Infinite,
        ]
    });
    qs.sort_by(|a, b| a.value().total_cmp(&b.value()));
    let (s, p) = (ctx.s(0.5), ctx.p());
    let one = Constant::upper(1.0, ConstantSource::Exact);
    let instances = ctx.each(|m| {
        let dec = decompose(&m.field, ctx.partition, SpaceKind::BesovHomog)?;
        let norms: Vec<f64> = qs
            .iter()
            .map(|&q| Ok(dec.norm(&ctx.besov(s, p, q)?)?.aggregate))
            .collect::<Result<_>>()?;
        let mut out = Vec::new();
        for a in 0..qs.len() {
            for b in a + 1..qs.len() {
                let label = format!("{} q={} r={}", m.label, qs[a], qs[b]);
                out.push(Instance::bounded(label, norms[b], norms[a], &one, tol));
            }
        }
        Ok(out)
    })?;
    Ok(Outcome {
        instances,
        constant: Some(one),
        tolerance: tol,
    })
}

fn sobolev_embedding(ctx: &Ctx) -> Result<Outcome> {
    let (s, p, q) = (ctx.s(0.5), ctx.p(), ctx.q());
    let c = Constant::upper(sobolev_constant(ctx.partition, p)?, ConstantSource::Proof);
    let dim = ctx.partition.grid().dim() as f64;
    let source = ctx.besov(s, p, q)?;
    let target = ctx.besov(s - dim * p.reciprocal(), Exponent::Infinite, q)?;
    let instances = ctx.each(|m| {
        let dec = decompose(&m.field, ctx.partition, SpaceKind::BesovHomog)?;
        let lhs = dec.norm(&target)?.aggregate;
        let rhs = dec.norm(&source)?.aggregate;
        Ok(vec![Instance::bounded(
            m.label.clone(),
            lhs,
            rhs,
            &c,
            PROOF_TOL,
        )])
    })?;
    Ok(Outcome {
        instances,
        constant: Some(c),
        tolerance: PROOF_TOL,
    })
}

fn lift_isomorphism(ctx: &Ctx) -> Result<Outcome> {
    let (s, p, q) = (ctx.s(0.5), ctx.p(), ctx.q());
    let alpha = ctx.params.alpha.unwrap_or(1.0);
    let upper = lift_constant(ctx.partition, alpha)?;
    let lower = 1.0 / lift_constant(ctx.partition, -alpha)?;
    let c = Constant::two_sided(lower, upper, ConstantSource::Proof);
    let source = ctx.besov(s, p, q)?;
    let target = ctx.besov(s - alpha, p, q)?;
    let instances = ctx.each(|m| {
        let lhs = ctx.norm(&lift(&m.field, alpha), &target)?;
        let rhs = ctx.norm(&m.field, &source)?;
        Ok(vec![Instance::bounded(
            m.label.clone(),
            lhs,
            rhs,
            &c,
            PROOF_TOL,
        )])
    })?;
    Ok(Outcome {
        instances,
        constant: Some(c),
        tolerance: PROOF_TOL,
    })
}

/// The member `g` is read as `F^{-1} G`; the function on the lattice is its
/// spectrum `G`, measured in `L^1` of the dual lattice (cell `(2 pi / L)^dim`).
fn fourier_refinement(ctx: &Ctx) -> Result<Outcome> {
    let one = Constant::upper(1.0, ConstantSource::Exact);
    let params = ctx.besov(0.0, Exponent::Infinite, Exponent::Finite(1.0))?;
    let instances = ctx.each(|m| {
        let grid = m.field.grid();
        let spectrum = forward_transform(&m.field);
        let l1: f64 = grid
            .lattice()
            .iter()
            .zip(spectrum.coefficients())
            .filter(|(pt, _)| !pt.is_origin())
            .map(|(_, c)| c.norm())
            .sum();
        let rhs = FourierConvention::for_grid(grid).inverse_scale * l1;
        let lhs = ctx.norm(&m.field, &params)?;
        Ok(vec![Instance::bounded(
            m.label.clone(),
            lhs,
            rhs,
            &one,
            EXACT_TOL,
        )])
    })?;
    Ok(Outcome {
        instances,
        constant: Some(one),
        tolerance: EXACT_TOL,
    })
}

fn bc_embedding(ctx: &Ctx) -> Result<Outcome> {
    let one = Constant::upper(1.0, ConstantSource::Exact);
    let params = ctx.besov(0.0, Exponent::Infinite, Exponent::Finite(1.0))?;
    let instances = ctx.each(|m| {
        let lhs = m.field.sup_norm();
        let rhs = ctx.norm(&m.field, &params)? + m.field.mean().norm();
        Ok(vec![Instance::bounded(
            m.label.clone(),
            lhs,
            rhs,
            &one,
            EXACT_TOL,
        )])
    })?;
    Ok(Outcome {
        instances,
        constant: Some(one),
        tolerance: EXACT_TOL,
    })
}

fn holder_equiv(ctx: &Ctx) -> Result<Outcome> {
    let bounds = ctx.require_bounds("holder_equiv")?;
    let s = ctx.s(0.5);
    let params = ctx.besov(s, Exponent::Infinite, Exponent::Infinite)?;
    let shifts = default_shift_set(ctx.partition.grid());
    let instances = ctx.each(|m| {
        let lhs = hz_seminorm(&m.field, s, &shifts)?;
        let rhs = ctx.norm(&m.field, &params)?;
        Ok(vec![Instance::bounded(
            m.label.clone(),
            lhs,
            rhs,
            &bounds,
            FIT_TOL,
        )])
    })?;
    Ok(Outcome {
        instances,
        constant: Some(bounds),
        tolerance: FIT_TOL,
    })
}

fn riesz_bounded(ctx: &Ctx) -> Result<Outcome> {
    let (s, p, q) = (ctx.s(0.5), ctx.p(), ctx.q());
    let axis = ctx.params.axis.unwrap_or(1);
    let c = Constant::upper(riesz_constant(ctx.partition, axis)?, ConstantSource::Proof);
    let params = ctx.besov(s, p, q)?;
    let instances = ctx.each(|m| {
        let lhs = ctx.norm(&riesz(&m.field, axis)?, &params)?;
        let rhs = ctx.norm(&m.field, &params)?;
        Ok(vec![Instance::bounded(
            m.label.clone(),
            lhs,
            rhs,
            &c,
            PROOF_TOL,
        )])
    })?;
    Ok(Outcome {
        instances,
        constant: Some(c),
        tolerance: PROOF_TOL,
    })
}

fn bf_sandwich(ctx: &Ctx) -> Result<Outcome> {
    let s = ctx.s(0.5);
    let pairs = ctx.params.pq.clone().unwrap_or_else(|| {
        vec![
            (Exponent::Finite(2.0), Exponent::Finite(1.0)),
            (Exponent::Finite(2.0), Exponent::Infinite),
            (Exponent::Finite(4.0), Exponent::Finite(2.0)),
        ]
    });
    let one = Constant::upper(1.0, ConstantSource::Exact);
    let instances = ctx.each(|m| {
        let dec = decompose(&m.field, ctx.partition, SpaceKind::BesovHomog)?;
        let mut out = Vec::new();
        for &(p, q) in &pairs {
            let tl = dec
                .norm(&SpaceParams::new(s, p, q, SpaceKind::TlHomog)?)?
                .aggregate;
            let b_max = dec.norm(&ctx.besov(s, p, p.max(q))?)?.aggregate;
            let b_min = dec.norm(&ctx.besov(s, p, p.min(q))?)?.aggregate;
            let tag = format!("{} p={p} q={q}", m.label);
            out.push(Instance::bounded(
                format!("{tag} lower"),
                b_max,
                tl,
                &one,
                EXACT_TOL,
            ));
            out.push(Instance::bounded(
                format!("{tag} upper"),
                tl,
                b_min,
                &one,
                EXACT_TOL,
            ));
        }
        Ok(out)
    })?;
    Ok(Outcome {
        instances,
        constant: Some(one),
        tolerance: EXACT_TOL,
    })
}

fn l2_corridor(ctx: &Ctx) -> Result<Outcome> {
    let c = Constant::two_sided(0.5f64.sqrt() - 1e-6, 1.0 + 1e-6, ConstantSource::Exact);
    let params = ctx.besov(0.0, Exponent::Finite(2.0), Exponent::Finite(2.0))?;
    let instances = ctx.each(|m| {
        let f = m.field.minus_mean();
        let lhs = ctx.norm(&f, &params)?;
        let rhs = lp_norm(&f, Exponent::Finite(2.0));
        Ok(vec![Instance::bounded(m.label.clone(), lhs, rhs, &c, 0.0)])
    })?;
    Ok(Outcome {
        instances,
        constant: Some(c),
        tolerance: 0.0,
    })
}

fn fs_maximal(ctx: &Ctx) -> Result<Outcome> {
    let bounds = ctx.require_bounds("fs_maximal")?;
    let (p, q) = (ctx.p().value(), ctx.q().value());
    let eta = ctx.params.eta.unwrap_or(1.0);
    let group = ctx.params.group.unwrap_or(4).max(1);
    let groups: Vec<(usize, Vec<SampledField>)> = ctx
        .members
        .chunks(group)
        .enumerate()
        .map(|(i, c)| (i, c.iter().map(|m| m.field.clone()).collect()))
        .collect();
    let results: Vec<Result<Instance>> = groups
        .par_iter()
        .map(|(i, fields)| {
            let r = fs_vector_check(fields, p, q, eta)?;
            Ok(Instance::bounded(
                format!("group[{i}]"),
                r.lhs,
                r.rhs,
                &bounds,
                FIT_TOL,
            ))
        })
        .collect();
    let instances = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        instances,
        constant: Some(bounds),
        tolerance: FIT_TOL,
    })
}

/// Tail of the high-frequency series beyond `J` against
/// `||f||_{B^s_{inf inf}} sum_{j > J} 2^{-js}`.
fn realization(ctx: &Ctx) -> Result<Outcome> {
    let s = ctx.s(0.5);
    if s <= 0.0 {
        return Err(Error::InvalidParameter(
            "realization tail check needs s > 0".into(),
        ));
    }
    let one = Constant::upper(1.0, ConstantSource::Proof);
    let params = ctx.besov(s, Exponent::Infinite, Exponent::Infinite)?;
    let j_max = ctx.partition.range().j_max;
    let instances = ctx.each(|m| {
        let dec = decompose(&m.field, ctx.partition, SpaceKind::BesovHomog)?;
        let norm = dec.norm(&params)?.aggregate;
        let mut out = Vec::new();
        for big_j in 0..j_max {
            let mut tail = SampledField::zeros(*m.field.grid());
            let mut geometric = 0.0;
            for (j, piece) in &dec.entries {
                if *j > big_j {
                    tail = tail.add(piece)?;
                    geometric += 2f64.powf(-s * *j as f64);
                }
            }
            let label = format!("{} J={big_j}", m.label);
            out.push(Instance::bounded(
                label,
                tail.sup_norm(),
                norm * geometric,
                &one,
                PROOF_TOL,
            ));
        }
        Ok(out)
    })?;
    Ok(Outcome {
        instances,
        constant: Some(one),
        tolerance: PROOF_TOL,
    })
}

/// Asymmetric bump supported in the unit ball around `(0.25, 0.25)`.
fn bump(y: &[f64]) -> f64 {
    let r2: f64 = y.iter().map(|v| (v - 0.25) * (v - 0.25)).sum();
    if r2 < 1.0 {
        (-1.0 / (1.0 - r2)).exp()
    } else {
        0.0
    }
}

fn signed(even: bool) -> f64 {
    if even {
        1.0
    } else {
        -1.0
    }
}

/// Discretizes `Psi` at `y_a = 2^j h a`; both sides below are then exact
/// lattice identities:
///
/// `sum_{r,l} c_{rl} sum_a w_a f(x - r l a h) - m! (sum_a w_a) f(x)
///  = sum_r (-1)^{r+1} r^m C(m,r) sum_a w_a Delta^m_{-r a h} f(x)`
///
/// with `c_{rl} = r^m C(m,r) C(m,l) (-1)^{r+l+m+1}` and `w_a = Psi(y_a) (2^j h)^dim`.
fn diff_convolution_sides(
    f: &SampledField,
    m: u32,
    j: i32,
) -> Result<(SampledField, SampledField)> {
    let grid = *f.grid();
    let d = grid.dim();
    let n = grid.points_per_axis() as i64;
    let step = 2f64.powi(j) * grid.spacing();
    let reach = (1.25 / step).ceil() as i64 + 1;
    let mut taps: Vec<([i64; 2], f64)> = Vec::new();
    let range1 = if d == 2 { -reach..=reach } else { 0..=0 };
    for a0 in -reach..=reach {
        for a1 in range1.clone() {
            let a = [a0, a1];
            let y: Vec<f64> = a[..d].iter().map(|&ai| ai as f64 * step).collect();
            let w = bump(&y) * step.powi(d as i32);
            if w > 0.0 {
                taps.push((a, w));
            }
        }
    }
    let total: f64 = taps.iter().map(|(_, w)| w).sum();
    let factorial: f64 = (1..=m).map(|i| i as f64).product();

    let mut kernel = vec![Complex64::new(0.0, 0.0); grid.len()];
    for r in 1..=m {
        for l in 1..=m {
            let c = (r as f64).powi(m as i32)
                * binomial(m, r)
                * binomial(m, l)
                * signed((r + l + m + 1).is_multiple_of(2));
            for (a, w) in &taps {
                let rl = (r * l) as i64;
                let idx = [
                    (rl * a[0]).rem_euclid(n) as usize,
                    (rl * a[1]).rem_euclid(n) as usize,
                ];
                kernel[grid.flatten(idx)] += c * w;
            }
        }
    }
    let conv = circular_convolve(f, &kernel)?;
    let lhs = conv.zip_with(f, |k, v| k - factorial * total * v)?;

    let mut rhs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for r in 1..=m {
        let c = signed((r + 1) % 2 == 0) * (r as f64).powi(m as i32) * binomial(m, r);
        for (a, w) in &taps {
            let shift: Vec<i64> = a[..d].iter().map(|&ai| -(r as i64) * ai).collect();
            let diff = difference(f, &shift, m)?;
            for (acc, v) in rhs.iter_mut().zip(diff.values()) {
                *acc += c * w * v;
            }
        }
    }
    Ok((lhs, SampledField::new(grid, rhs)?))
}

fn diff_convolution(ctx: &Ctx) -> Result<Outcome> {
    let tol = 1e-8;
    let orders = ctx.params.orders.clone().unwrap_or_else(|| vec![1, 2]);
    let levels = ctx.params.levels.clone().unwrap_or_else(|| vec![0, 1, 2]);
    if orders.contains(&0) {
        return Err(Error::InvalidOrder);
    }
    let instances = ctx.each(|mem| {
        let mut out = Vec::new();
        for &m in &orders {
            for &j in &levels {
                let (lhs, rhs) = diff_convolution_sides(&mem.field, m, j)?;
                let err = lhs.max_abs_diff(&rhs)?;
                let scale = lhs.sup_norm();
                let label = format!("{} m={m} j={j}", mem.label);
                let mut inst =
                    Instance::new(label, scale, rhs.sup_norm(), err <= tol * scale.max(1.0));
                inst.ratio = if scale > 0.0 { err / scale } else { err };
                out.push(inst);
            }
        }
        Ok(out)
    })?;
    Ok(Outcome {
        instances,
        constant: None,
        tolerance: tol,
    })
}
