//! The three-stage memorizing network and its limited-bit variant.
//!
//! Stage I embeds points as scalars at least 2 apart. Stage II routes each
//! scalar to the packed payload pair `(w_j, u_j)` of its block of `k`
//! consecutive sorted scalars. Stage III decodes the slots of `u_j` and
//! `w_j` and emits the label whose anchor equals the floor of the scalar.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Roots;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use super::decoder::{check_anchor_slots, decoder_layers, DecoderOutput};
use super::gadgets::support_net;
use super::project::{project_net, ScalarEmbedding};
use super::router::{block_intervals, router_layers, Readout};
use crate::error::{MemcapError, Result};
use crate::ir::{Activation, AffineLayer, ComponentReport, ReluMLP, Unit};
use crate::numerics::{bit_len, pack_slots, rat_int};
use crate::separation::point_params;

/// Packed Stage II payloads of one group of memorized scalars.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CraftedWeights {
    /// Label payloads, `k` slots of `rho` bits each, most significant first.
    pub w_blocks: Vec<BigInt>,
    /// Anchor payloads, `k` slots of `c_bits` bits each.
    pub u_blocks: Vec<BigInt>,
    pub intervals: Vec<(BigInt, BigInt)>,
    /// Slots per block.
    pub k: usize,
    pub rho: u32,
    pub c_bits: u32,
    /// Block count target `max(1, ceil(sqrt(N log2 max(N, 2))))`.
    pub m: usize,
}

#[derive(Clone, Debug)]
pub struct MemorizingNet {
    pub net: ReluMLP,
    pub embedding: ScalarEmbedding,
    /// One entry per group; a single group unless bits are limited.
    pub groups: Vec<CraftedWeights>,
    pub components: Vec<ComponentReport>,
    /// Distinct memorized points.
    pub memorized: usize,
    /// Distinct zero-tail points.
    pub tail: usize,
}

impl MemorizingNet {
    pub fn rho(&self) -> u32 {
        self.groups[0].rho
    }

    pub fn c_bits(&self) -> u32 {
        self.groups[0].c_bits
    }
}

/// `max(1, ceil(sqrt(N log2 max(N, 2))))`, with the logarithm rounded up.
pub fn block_count(n: usize) -> usize {
    if n <= 1 {
        return 1;
    }
    // least m with m^2 >= N log2 N, i.e. 2^(m^2) >= N^N
    let nn = BigInt::from(n);
    let mut m = ((n as f64) * (n as f64).log2()).sqrt().floor().max(2.0) as usize - 1;
    loop {
        let lhs = BigInt::one() << (m * m);
        if lhs >= nn.pow(n as u32) {
            return m;
        }
        m += 1;
    }
}

/// Label slot width `max(2, LEN(max label))`.
pub fn label_bits(labels: &[u64]) -> u32 {
    let top = labels.iter().copied().max().unwrap_or(1);
    (bit_len(&BigInt::from(top)) as u32).max(2)
}

/// Anchor slot width `max(2, LEN(ceil(R)))`.
pub fn anchor_bits(emb: &ScalarEmbedding) -> Result<u32> {
    let r = emb.range_bound.certified_ceil()?;
    Ok((bit_len(&r) as u32).max(2))
}

struct Prepared {
    /// Memorized scalars with labels, sorted by scalar.
    sorted: Vec<(BigRational, u64)>,
    embedding: ScalarEmbedding,
    memorized_points: Vec<Vec<BigRational>>,
    memorized_labels: Vec<u64>,
    tail_points: Vec<Vec<BigRational>>,
}

fn prepare(points: &[Vec<BigRational>], labels: &[u64], tail: &[Vec<BigRational>], seed: u64) -> Result<Prepared> {
    if points.len() != labels.len() {
        return Err(MemcapError::DimensionMismatch { expected: points.len(), found: labels.len() });
    }
    if points.is_empty() {
        return Err(MemcapError::Range("nothing to memorize".into()));
    }
    if let Some(i) = labels.iter().position(|&y| y == 0) {
        return Err(MemcapError::Range(format!("label of point {i} is not positive")));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().chain(tail).find(|p| p.len() != dim) {
        return Err(MemcapError::DimensionMismatch { expected: dim, found: p.len() });
    }
    let mut first: BTreeMap<&Vec<BigRational>, (usize, u64)> = BTreeMap::new();
    let mut memorized_points = Vec::new();
    let mut memorized_labels = Vec::new();
    for (i, (p, &y)) in points.iter().zip(labels).enumerate() {
        match first.get(p) {
            Some(&(j, z)) if z != y => {
                return Err(MemcapError::Consistency {
                    first: j,
                    second: i,
                    detail: format!("equal points labeled {z} and {y}"),
                })
            }
            Some(_) => {}
            None => {
                first.insert(p, (i, y));
                memorized_points.push(p.clone());
                memorized_labels.push(y);
            }
        }
    }
    let mut tail_points: Vec<Vec<BigRational>> = Vec::new();
    for (t_idx, t) in tail.iter().enumerate() {
        if let Some(&(j, _)) = first.get(t) {
            return Err(MemcapError::Consistency {
                first: j,
                second: points.len() + t_idx,
                detail: "zero-tail point coincides with a memorized point".into(),
            });
        }
        if !tail_points.contains(t) {
            tail_points.push(t.clone());
        }
    }
    let all: Vec<Vec<BigRational>> = memorized_points.iter().chain(&tail_points).cloned().collect();
    let params = point_params(&all);
    let embedding = project_net(&all, &params, seed)?;
    let mut sorted: Vec<(BigRational, u64)> = embedding.values[..memorized_points.len()]
        .iter()
        .cloned()
        .zip(memorized_labels.iter().copied())
        .collect();
    sorted.sort();
    Ok(Prepared { sorted, embedding, memorized_points, memorized_labels, tail_points })
}

/// Packs one group of sorted `(scalar, label)` pairs.
fn craft(sorted: &[(BigRational, u64)], rho: u32, c_bits: u32) -> Result<CraftedWeights> {
    let n = sorted.len();
    let m = block_count(n).min(n);
    let k = n.div_ceil(m);
    let xs: Vec<BigRational> = sorted.iter().map(|(x, _)| x.clone()).collect();
    let intervals = block_intervals(&xs, k)?;
    let mut w_blocks = Vec::new();
    let mut u_blocks = Vec::new();
    for block in sorted.chunks(k) {
        let mut ws: Vec<BigInt> = block.iter().map(|(_, y)| BigInt::from(*y)).collect();
        let mut us: Vec<BigInt> = block.iter().map(|(x, _)| x.floor().to_integer()).collect();
        ws.resize(k, BigInt::zero());
        us.resize(k, BigInt::zero());
        if let Some(a) = us.iter().find(|a| bit_len(a) > c_bits as u64) {
            return Err(MemcapError::Range(format!("anchor {a} does not fit in {c_bits} bits")));
        }
        let u = pack_slots(&us, c_bits);
        check_anchor_slots(&u, k as u32, c_bits)?;
        w_blocks.push(pack_slots(&ws, rho));
        u_blocks.push(u);
    }
    Ok(CraftedWeights { w_blocks, u_blocks, intervals, k, rho, c_bits, m })
}

fn payloads(cw: &CraftedWeights) -> Vec<Vec<BigInt>> {
    cw.w_blocks.iter().zip(&cw.u_blocks).map(|(w, u)| vec![w.clone(), u.clone()]).collect()
}

/// Per gadget, evaluates the interval indicator at every memorized scalar
/// and requires exactly one gadget at 1 and all others at 0.
pub fn check_routing(cw: &CraftedWeights, xs: &[BigRational]) -> Result<()> {
    let gadgets = cw
        .intervals
        .iter()
        .map(|(a, b)| support_net(a, b))
        .collect::<Result<Vec<_>>>()?;
    for (i, x) in xs.iter().enumerate() {
        let outs = gadgets
            .iter()
            .map(|g| g.eval_rational(std::slice::from_ref(x)).map(|o| o[0].clone()))
            .collect::<Result<Vec<_>>>()?;
        let ones = outs.iter().filter(|v| v.is_one()).count();
        let zeros = outs.iter().filter(|v| v.is_zero()).count();
        if ones != 1 || zeros + 1 != outs.len() {
            return Err(MemcapError::PreconditionViolation(format!("routing of scalar {i} is not one-hot")));
        }
    }
    Ok(())
}

fn self_check(net: &ReluMLP, p: &Prepared) -> Result<()> {
    let mut cases: Vec<(&Vec<BigRational>, u64)> = p.memorized_points.iter().zip(p.memorized_labels.iter().copied()).collect();
    cases.extend(p.tail_points.iter().map(|t| (t, 0)));
    let bad = cases
        .par_iter()
        .enumerate()
        .map(|(i, (x, y))| net.eval_rational(x).map(|o| (o[0] != rat_int(*y)).then_some(i)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    match bad {
        Some(i) => Err(MemcapError::PreconditionViolation(format!("self-check failed on point {i}"))),
        None => Ok(()),
    }
}

/// Input `d`, output 1. Maps every memorized point to its label and every
/// tail point to 0, exactly. Width 12.
pub fn memorizing_ffn(
    points: &[Vec<BigRational>],
    labels: &[u64],
    tail: &[Vec<BigRational>],
    seed: u64,
) -> Result<MemorizingNet> {
    let p = prepare(points, labels, tail, seed)?;
    let rho = label_bits(&p.memorized_labels);
    let c_bits = anchor_bits(&p.embedding)?;
    let cw = craft(&p.sorted, rho, c_bits)?;
    let xs: Vec<BigRational> = p.sorted.iter().map(|(x, _)| x.clone()).collect();
    check_routing(&cw, &xs)?;
    let router = router_layers(&cw.intervals, &payloads(&cw), Readout::WithInput)?;
    let decoder = decoder_layers(rho, cw.k as u32, c_bits, DecoderOutput::Value)?;
    let components = vec![
        ComponentReport::of("stage1_projection", &p.embedding.net),
        ComponentReport::of("stage2_router", &router),
        ComponentReport::of("stage3_decoder", &decoder),
    ];
    let net = p.embedding.net.clone().then(router)?.then(decoder)?;
    self_check(&net, &p)?;
    Ok(MemorizingNet {
        net,
        embedding: p.embedding.clone(),
        groups: vec![cw],
        components,
        memorized: p.memorized_points.len(),
        tail: p.tail_points.len(),
    })
}

/// `ceil(sqrt(N))`.
pub fn max_bits_budget(n: usize) -> usize {
    let s = n.sqrt();
    if s * s == n {
        s
    } else {
        s + 1
    }
}

/// Splits the sorted scalars into groups of at most `B^2` and chains one
/// router and decoder per group, summing decoded values into a carried
/// accumulator. Width 13.
pub fn memorizing_ffn_limited_bits(
    points: &[Vec<BigRational>],
    labels: &[u64],
    tail: &[Vec<BigRational>],
    budget: usize,
    seed: u64,
) -> Result<MemorizingNet> {
    let p = prepare(points, labels, tail, seed)?;
    let n = p.sorted.len();
    let top = max_bits_budget(n);
    if budget == 0 || budget > top {
        return Err(MemcapError::Range(format!("bits budget {budget} outside 1..={top}")));
    }
    let rho = label_bits(&p.memorized_labels);
    let c_bits = anchor_bits(&p.embedding)?;
    let group_size = budget * budget;
    let chunks: Vec<&[(BigRational, u64)]> = p.sorted.chunks(group_size).collect();
    let groups: Vec<(CraftedWeights, ReluMLP)> = chunks
        .par_iter()
        .map(|chunk| {
            let cw = craft(chunk, rho, c_bits)?;
            let xs: Vec<BigRational> = chunk.iter().map(|(x, _)| x.clone()).collect();
            check_routing(&cw, &xs)?;
            let router = router_layers(&cw.intervals, &payloads(&cw), Readout::WithInput)?;
            let decoder = decoder_layers(rho, cw.k as u32, c_bits, DecoderOutput::WithInput)?;
            let stage = router.then(decoder)?.with_carried(1);
            Ok((cw, stage))
        })
        .collect::<Result<Vec<_>>>()?;

    let stage1 = p.embedding.net.with_zero_channel();
    let mut components = vec![ComponentReport::of("stage1_projection", &stage1)];
    let mut net = stage1;
    let last = groups.len() - 1;
    let mut crafted = Vec::with_capacity(groups.len());
    for (g, (cw, stage)) in groups.into_iter().enumerate() {
        components.push(ComponentReport::of(&format!("group{g}"), &stage));
        // stage output [x, y, acc]
        let merge = if g == last {
            AffineLayer::from_units(3, vec![Unit::pass(2).term_int(1, 1)], Activation::Identity)
        } else {
            AffineLayer::from_units(3, vec![Unit::pass(0), Unit::pass(2).term_int(1, 1)], Activation::Relu)
        };
        net = net.then(stage)?.then(ReluMLP { layers: vec![merge] })?;
        crafted.push(cw);
    }
    self_check(&net, &p)?;
    Ok(MemorizingNet {
        net,
        embedding: p.embedding.clone(),
        groups: crafted,
        components,
        memorized: p.memorized_points.len(),
        tail: p.tail_points.len(),
    })
}
