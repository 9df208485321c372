use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{MemcapError, Result};
use crate::numerics::Dyadic;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Relu,
    Identity,
}

/// One output unit in sparse form: `bias + sum(w * x[idx])`.
#[derive(Clone, Debug, Default)]
pub struct Unit {
    pub bias: Dyadic,
    pub terms: Vec<(usize, Dyadic)>,
}

impl Unit {
    pub fn new(bias: Dyadic) -> Self {
        Unit { bias, terms: Vec::new() }
    }

    pub fn zero() -> Self {
        Unit::new(Dyadic::zero())
    }

    pub fn pass(idx: usize) -> Self {
        Unit::zero().term(idx, Dyadic::one())
    }

    pub fn term(mut self, idx: usize, w: Dyadic) -> Self {
        self.terms.push((idx, w));
        self
    }

    pub fn term_int(self, idx: usize, w: i64) -> Self {
        self.term(idx, Dyadic::from_int(w))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineLayer {
    pub in_dim: usize,
    pub weights: Vec<Vec<Dyadic>>,
    pub bias: Vec<Dyadic>,
    pub activation: Activation,
}

impl AffineLayer {
    pub fn new(weights: Vec<Vec<Dyadic>>, bias: Vec<Dyadic>, activation: Activation) -> Result<Self> {
        let in_dim = weights.first().map_or(0, |r| r.len());
        if weights.len() != bias.len() {
            return Err(MemcapError::DimensionMismatch { expected: weights.len(), found: bias.len() });
        }
        if let Some(r) = weights.iter().find(|r| r.len() != in_dim) {
            return Err(MemcapError::DimensionMismatch { expected: in_dim, found: r.len() });
        }
        Ok(AffineLayer { in_dim, weights, bias, activation })
    }

    pub fn from_units(in_dim: usize, units: Vec<Unit>, activation: Activation) -> Self {
        let mut weights = Vec::with_capacity(units.len());
        let mut bias = Vec::with_capacity(units.len());
        for u in units {
            let mut row = vec![Dyadic::zero(); in_dim];
            for (i, w) in u.terms {
                assert!(i < in_dim, "unit reads input {i} of {in_dim}");
                row[i] = &row[i] + &w;
            }
            weights.push(row);
            bias.push(u.bias);
        }
        AffineLayer { in_dim, weights, bias, activation }
    }

    pub fn identity(dim: usize, activation: Activation) -> Self {
        Self::from_units(dim, (0..dim).map(Unit::pass).collect(), activation)
    }

    pub fn out_dim(&self) -> usize {
        self.bias.len()
    }

    pub fn param_count(&self) -> u64 {
        (self.out_dim() * (self.in_dim + 1)) as u64
    }

    pub fn max_bit_complexity(&self) -> u64 {
        self.weights
            .iter()
            .flatten()
            .chain(self.bias.iter())
            .map(|d| d.bit_complexity())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[Dyadic]) -> Result<Vec<Dyadic>> {
        if x.len() != self.in_dim {
            return Err(MemcapError::DimensionMismatch { expected: self.in_dim, found: x.len() });
        }
        Ok(self.eval_with_bias_scale(x, None))
    }

    /// Evaluates with every bias multiplied by `scale`. Used for inputs that
    /// were multiplied by the same positive integer.
    fn eval_with_bias_scale(&self, x: &[Dyadic], scale: Option<&Dyadic>) -> Vec<Dyadic> {
        self.weights
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| {
                let mut acc = match scale {
                    Some(s) => b * s,
                    None => b.clone(),
                };
                for (w, xi) in row.iter().zip(x) {
                    if !w.is_zero() && !xi.is_zero() {
                        acc = &acc + &(w * xi);
                    }
                }
                match self.activation {
                    Activation::Relu => acc.relu(),
                    Activation::Identity => acc,
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReluMLP {
    pub layers: Vec<AffineLayer>,
}

impl ReluMLP {
    pub fn new(layers: Vec<AffineLayer>) -> Result<Self> {
        for w in layers.windows(2) {
            if w[0].out_dim() != w[1].in_dim {
                return Err(MemcapError::DimensionMismatch { expected: w[0].out_dim(), found: w[1].in_dim });
            }
        }
        Ok(ReluMLP { layers })
    }

    pub fn in_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.in_dim)
    }

    pub fn out_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.out_dim())
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    /// Largest layer output dimension.
    pub fn width(&self) -> usize {
        self.layers.iter().map(|l| l.out_dim()).max().unwrap_or(0)
    }

    pub fn param_count(&self) -> u64 {
        self.layers.iter().map(|l| l.param_count()).sum()
    }

    pub fn max_bit_complexity(&self) -> u64 {
        self.layers.iter().map(|l| l.max_bit_complexity()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &[Dyadic]) -> Result<Vec<Dyadic>> {
        let mut cur = x.to_vec();
        for l in &self.layers {
            cur = l.eval(&cur)?;
        }
        Ok(cur)
    }

    /// Exact evaluation at rational inputs. The input is scaled by the
    /// common denominator `q`, the network runs with biases scaled by `q`
    /// and the result is divided by `q`; ReLU commutes with positive scaling.
    pub fn eval_rational(&self, x: &[BigRational]) -> Result<Vec<BigRational>> {
        if x.len() != self.in_dim() {
            return Err(MemcapError::DimensionMismatch { expected: self.in_dim(), found: x.len() });
        }
        let q = x.iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
        let qr = BigRational::from_integer(q.clone());
        let mut cur: Vec<Dyadic> = x
            .iter()
            .map(|v| Dyadic::from_int((v * &qr).to_integer()))
            .collect();
        let qd = Dyadic::from_int(q.clone());
        let scale = (!q.is_one()).then_some(&qd);
        for l in &self.layers {
            cur = l.eval_with_bias_scale(&cur, scale);
        }
        Ok(cur.iter().map(|d| d.to_rational() / &qr).collect())
    }

    /// Sequential composition `other ∘ self`.
    pub fn then(mut self, other: ReluMLP) -> Result<ReluMLP> {
        if !self.layers.is_empty() && self.out_dim() != other.in_dim() {
            return Err(MemcapError::DimensionMismatch { expected: self.out_dim(), found: other.in_dim() });
        }
        self.layers.extend(other.layers);
        Ok(self)
    }

    /// Appends `k` extra channels carried unchanged through every layer.
    /// Carried values must be nonnegative wherever a layer applies ReLU.
    pub fn with_carried(&self, k: usize) -> ReluMLP {
        let layers = self
            .layers
            .iter()
            .map(|l| {
                let mut weights: Vec<Vec<Dyadic>> = l
                    .weights
                    .iter()
                    .map(|r| {
                        let mut r = r.clone();
                        r.extend(std::iter::repeat_n(Dyadic::zero(), k));
                        r
                    })
                    .collect();
                for j in 0..k {
                    let mut row = vec![Dyadic::zero(); l.in_dim + k];
                    row[l.in_dim + j] = Dyadic::one();
                    weights.push(row);
                }
                let mut bias = l.bias.clone();
                bias.extend(std::iter::repeat_n(Dyadic::zero(), k));
                AffineLayer { in_dim: l.in_dim + k, weights, bias, activation: l.activation }
            })
            .collect();
        ReluMLP { layers }
    }

    /// Appends an output channel that is identically zero. The input
    /// dimension is unchanged.
    pub fn with_zero_channel(&self) -> ReluMLP {
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let extra_in = usize::from(i > 0);
                let in_dim = l.in_dim + extra_in;
                let mut weights: Vec<Vec<Dyadic>> = l
                    .weights
                    .iter()
                    .map(|r| {
                        let mut r = r.clone();
                        r.extend(std::iter::repeat_n(Dyadic::zero(), extra_in));
                        r
                    })
                    .collect();
                weights.push(vec![Dyadic::zero(); in_dim]);
                let mut bias = l.bias.clone();
                bias.push(Dyadic::zero());
                AffineLayer { in_dim, weights, bias, activation: l.activation }
            })
            .collect();
        ReluMLP { layers }
    }

    /// Pads with identity layers until `depth` is reached. Padding layers use
    /// the activations in `acts`, indexed by absolute layer position.
    pub fn padded_to(&self, depth: usize, acts: &[Activation]) -> ReluMLP {
        let mut out = self.clone();
        let dim = self.out_dim();
        while out.layers.len() < depth {
            let pos = out.layers.len();
            out.layers.push(AffineLayer::identity(dim, acts[pos]));
        }
        out
    }

    pub fn activations(&self) -> Vec<Activation> {
        self.layers.iter().map(|l| l.activation).collect()
    }
}

/// Runs `a` and `b` side by side on the same input; outputs are stacked.
/// Both networks need equal depth and matching activations per layer.
pub fn parallel_shared_input(a: &ReluMLP, b: &ReluMLP) -> Result<ReluMLP> {
    if a.depth() != b.depth() {
        return Err(MemcapError::DimensionMismatch { expected: a.depth(), found: b.depth() });
    }
    if a.in_dim() != b.in_dim() {
        return Err(MemcapError::DimensionMismatch { expected: a.in_dim(), found: b.in_dim() });
    }
    let mut layers = Vec::with_capacity(a.depth());
    for (i, (la, lb)) in a.layers.iter().zip(&b.layers).enumerate() {
        if la.activation != lb.activation {
            return Err(MemcapError::PreconditionViolation(format!("activation mismatch at layer {i}")));
        }
        let in_dim = if i == 0 { la.in_dim } else { la.in_dim + lb.in_dim };
        let mut weights = Vec::with_capacity(la.out_dim() + lb.out_dim());
        for r in &la.weights {
            let mut row = r.clone();
            if i > 0 {
                row.extend(std::iter::repeat_n(Dyadic::zero(), lb.in_dim));
            }
            weights.push(row);
        }
        for r in &lb.weights {
            let row = if i == 0 {
                r.clone()
            } else {
                let mut row = vec![Dyadic::zero(); la.in_dim];
                row.extend(r.iter().cloned());
                row
            };
            weights.push(row);
        }
        let mut bias = la.bias.clone();
        bias.extend(lb.bias.iter().cloned());
        layers.push(AffineLayer { in_dim, weights, bias, activation: la.activation });
    }
    Ok(ReluMLP { layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rat;

    fn d(v: i64) -> Dyadic {
        Dyadic::from_int(v)
    }

    #[test]
    fn relu_layer_eval() {
        let l = AffineLayer::new(vec![vec![d(1), d(-1)], vec![d(-1), d(1)]], vec![d(0), d(0)], Activation::Relu).unwrap();
        assert_eq!(l.eval(&[d(3), d(1)]).unwrap(), vec![d(2), d(0)]);
        assert!(l.eval(&[d(1)]).is_err());
    }

    #[test]
    fn chain_dimension_check() {
        let a = AffineLayer::identity(2, Activation::Relu);
        let b = AffineLayer::identity(3, Activation::Relu);
        assert!(matches!(ReluMLP::new(vec![a, b]), Err(MemcapError::DimensionMismatch { .. })));
    }

    #[test]
    fn rational_eval_matches_scaling() {
        let l = AffineLayer::from_units(1, vec![Unit::new(d(-1)).term_int(0, 2)], Activation::Relu);
        let net = ReluMLP::new(vec![l]).unwrap();
        assert_eq!(net.eval_rational(&[rat(2, 3)]).unwrap(), vec![rat(1, 3)]);
        assert_eq!(net.eval_rational(&[rat(1, 3)]).unwrap(), vec![rat(0, 1)]);
    }

    #[test]
    fn composition_helpers() {
        let l = AffineLayer::from_units(1, vec![Unit::new(d(1)).term_int(0, 1)], Activation::Relu);
        let net = ReluMLP::new(vec![l.clone(), AffineLayer::identity(1, Activation::Identity)]).unwrap();
        let carried = net.with_carried(1);
        assert_eq!(carried.eval(&[d(2), d(5)]).unwrap(), vec![d(3), d(5)]);
        let z = net.with_zero_channel();
        assert_eq!(z.eval(&[d(2)]).unwrap(), vec![d(3), d(0)]);
        let p = parallel_shared_input(&net, &net).unwrap();
        assert_eq!(p.eval(&[d(4)]).unwrap(), vec![d(5), d(5)]);
        assert_eq!(p.width(), 2);
    }
}
