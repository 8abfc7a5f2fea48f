//! Hypotheses `f_w`, hypothesis classes `F` and loss functions.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::datagen::Dataset;
use crate::error::{check_dim, Error, Result};
use crate::mlp::{param_count_for, Activation, Mlp};
use crate::rng;
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputMode {
    #[default]
    RealValued,
    SignThresholded,
}

/// A lookup table defined on an explicit list of points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "TableRepr<T>", into = "TableRepr<T>")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Table<T> {
    points: Vec<Vec<T>>,
    values: Vec<T>,
    index: HashMap<Vec<u64>, usize>,
}

#[derive(Clone, Serialize, Deserialize)]
struct TableRepr<T> {
    points: Vec<Vec<T>>,
    values: Vec<T>,
}

fn point_key<T: Scalar>(x: &[T]) -> Vec<u64> {
    // +0 and −0 are the same point.
    x.iter().map(|v| (v.f64() + 0.0).to_bits()).collect()
}

impl<T: Scalar> From<TableRepr<T>> for Table<T> {
    fn from(r: TableRepr<T>) -> Self {
        let index = r
            .points
            .iter()
            .enumerate()
            .map(|(i, p)| (point_key(p), i))
            .collect();
        Table {
            points: r.points,
            values: r.values,
            index,
        }
    }
}

impl<T: Scalar> From<Table<T>> for TableRepr<T> {
    fn from(t: Table<T>) -> Self {
        TableRepr {
            points: t.points,
            values: t.values,
        }
    }
}

impl<T: PartialEq> PartialEq for Table<T> {
    fn eq(&self, other: &Self) -> bool {
        self.points == other.points && self.values == other.values
    }
}

impl<T: Scalar> Table<T> {
    pub fn new(points: Vec<Vec<T>>, values: Vec<T>) -> Result<Self> {
        check_dim("table values", values.len(), points.len())?;
        if points.is_empty() {
            return Err(Error::input("table needs at least one point"));
        }
        let p = points[0].len();
        for x in &points {
            check_dim("table point", x.len(), p)?;
        }
        let t = Table::from(TableRepr { points, values });
        if t.index.len() != t.points.len() {
            return Err(Error::input("table points must be distinct"));
        }
        Ok(t)
    }

    pub fn feature_dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn lookup(&self, x: &[T]) -> Result<T> {
        check_dim("x", x.len(), self.feature_dim())?;
        self.index
            .get(&point_key(x))
            .map(|&i| self.values[i])
            .ok_or_else(|| Error::input("table hypothesis queried off its support"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum Model<T> {
    Table(Table<T>),
    Linear { weights: Vec<T>, bias: Option<T> },
    Mlp(Mlp<T>),
}

/// A trained or enumerated predictor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct Hypothesis<T> {
    #[serde(flatten)]
    pub model: Model<T>,
    #[serde(default)]
    pub output_mode: OutputMode,
}

impl<T: Scalar> Hypothesis<T> {
    pub fn linear(weights: Vec<T>, bias: Option<T>, output_mode: OutputMode) -> Self {
        Hypothesis {
            model: Model::Linear { weights, bias },
            output_mode,
        }
    }

    pub fn table(points: Vec<Vec<T>>, values: Vec<T>) -> Result<Self> {
        let output_mode = if values.iter().all(|v| v.is_pm_one()) {
            OutputMode::SignThresholded
        } else {
            OutputMode::RealValued
        };
        Ok(Hypothesis {
            model: Model::Table(Table::new(points, values)?),
            output_mode,
        })
    }

    pub fn mlp(net: Mlp<T>, output_mode: OutputMode) -> Self {
        Hypothesis {
            model: Model::Mlp(net),
            output_mode,
        }
    }

    pub fn feature_dim(&self) -> usize {
        match &self.model {
            Model::Table(t) => t.feature_dim(),
            Model::Linear { weights, .. } => weights.len(),
            Model::Mlp(net) => net.input_dim(),
        }
    }

    /// Raw output before any thresholding.
    pub fn score(&self, x: &[T]) -> Result<T> {
        match &self.model {
            Model::Table(t) => t.lookup(x),
            Model::Linear { weights, bias } => {
                check_dim("x", x.len(), weights.len())?;
                Ok(dot(weights, x) + bias.unwrap_or_else(T::zero))
            }
            Model::Mlp(net) => net.forward(x),
        }
    }

    pub fn predict(&self, x: &[T]) -> Result<T> {
        let s = self.score(x)?;
        Ok(match self.output_mode {
            OutputMode::RealValued => s,
            OutputMode::SignThresholded => s.sign_pm(),
        })
    }

    /// Predictions on every sample of `ds`.
    pub fn predict_all(&self, ds: &Dataset<T>) -> Result<Vec<T>> {
        ds.xs().map(|x| self.predict(x)).collect()
    }

    pub fn with_output_mode(mut self, mode: OutputMode) -> Self {
        self.output_mode = mode;
        self
    }

    /// Parameters subject to a norm penalty (biases excluded).
    pub fn penalized_params(&self) -> Result<Vec<T>> {
        match &self.model {
            Model::Table(_) => Err(Error::unsupported(
                "table hypotheses have no parameter vector",
            )),
            Model::Linear { weights, .. } => Ok(weights.clone()),
            Model::Mlp(net) => Ok(net
                .params
                .iter()
                .zip(net.weight_mask())
                .filter(|(_, m)| *m)
                .map(|(&p, _)| p)
                .collect()),
        }
    }

    pub fn param_count(&self) -> Option<usize> {
        match &self.model {
            Model::Table(_) => None,
            Model::Linear { weights, bias } => Some(weights.len() + bias.is_some() as usize),
            Model::Mlp(net) => Some(net.param_count()),
        }
    }
}

pub fn predict<T: Scalar>(h: &Hypothesis<T>, x: &[T]) -> Result<T> {
    h.predict(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossFn {
    Square,
    ZeroOne,
}

impl LossFn {
    pub fn eval<T: Scalar>(self, y: T, yhat: T) -> Result<T> {
        match self {
            LossFn::Square => Ok((y - yhat) * (y - yhat)),
            LossFn::ZeroOne => {
                if !y.is_pm_one() || !yhat.is_pm_one() {
                    return Err(Error::input("zero-one loss needs ±1 label and prediction"));
                }
                Ok(if y == yhat { T::zero() } else { T::one() })
            }
        }
    }
}

pub fn loss<T: Scalar>(l: LossFn, y: T, yhat: T) -> Result<T> {
    l.eval(y, yhat)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormOrder {
    L1,
    L2,
}

impl NormOrder {
    pub fn from_order(order: u8) -> Result<Self> {
        match order {
            1 => Ok(NormOrder::L1),
            2 => Ok(NormOrder::L2),
            _ => Err(Error::config(format!("norm order must be 1 or 2, got {order}"))),
        }
    }
}

/// How a class is restricted: a hard norm ball `‖w‖ ≤ c` or a penalty `λ‖w‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Constraint {
    NormBound { c: f64, order: NormOrder },
    Penalty { lambda: f64, order: NormOrder },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub enum ClassKind<T> {
    Finite { members: Vec<Hypothesis<T>> },
    LinearThreshold { bias: bool },
    RidgeLinear { bias: bool },
    LassoLinear { bias: bool },
    Mlp {
        hidden: Vec<usize>,
        #[serde(default)]
        activation: Activation,
    },
}

/// The model family `F` searched by a learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar", deserialize = "T: Scalar"))]
pub struct HypothesisClass<T> {
    pub feature_dim: usize,
    #[serde(flatten)]
    pub kind: ClassKind<T>,
    #[serde(default)]
    pub constraint: Option<Constraint>,
}

impl<T: Scalar> HypothesisClass<T> {
    pub fn finite(members: Vec<Hypothesis<T>>) -> Result<Self> {
        let first = members
            .first()
            .ok_or_else(|| Error::config("finite class needs at least one member"))?;
        let p = first.feature_dim();
        for m in &members {
            check_dim("member feature_dim", m.feature_dim(), p)?;
        }
        Ok(HypothesisClass {
            feature_dim: p,
            kind: ClassKind::Finite { members },
            constraint: None,
        })
    }

    pub fn linear_threshold(p: usize, bias: bool) -> Self {
        HypothesisClass {
            feature_dim: p,
            kind: ClassKind::LinearThreshold { bias },
            constraint: None,
        }
    }

    pub fn ridge_linear(p: usize, bias: bool) -> Self {
        HypothesisClass {
            feature_dim: p,
            kind: ClassKind::RidgeLinear { bias },
            constraint: None,
        }
    }

    pub fn lasso_linear(p: usize, bias: bool) -> Self {
        HypothesisClass {
            feature_dim: p,
            kind: ClassKind::LassoLinear { bias },
            constraint: None,
        }
    }

    pub fn mlp(p: usize, hidden: Vec<usize>, activation: Activation) -> Self {
        HypothesisClass {
            feature_dim: p,
            kind: ClassKind::Mlp { hidden, activation },
            constraint: None,
        }
    }

    pub fn with_constraint(mut self, c: Constraint) -> Self {
        self.constraint = Some(c);
        self
    }

    /// Every `±1` labeling of `points`, as tables, in binary counting order.
    pub fn all_labelings(points: &[Vec<T>]) -> Result<Self> {
        let m = points.len();
        if m == 0 || m > 16 {
            return Err(Error::Guard(format!(
                "all-labelings class needs 1..=16 points, got {m}"
            )));
        }
        let members = (0..1usize << m)
            .map(|mask| {
                let values = (0..m)
                    .map(|i| if mask >> i & 1 == 1 { T::one() } else { -T::one() })
                    .collect();
                Hypothesis::table(points.to_vec(), values)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::finite(members)
    }

    /// `count` tables with independent uniform `±1` values on `points`.
    pub fn random_sign_tables(points: &[Vec<T>], count: usize, seed: u64) -> Result<Self> {
        let members = (0..count)
            .map(|j| {
                let mut r = rng::stream(seed, "sign-table", j as u64);
                let values = points.iter().map(|_| rng::sign(&mut r)).collect();
                Hypothesis::table(points.to_vec(), values)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::finite(members)
    }

    /// `count` sign-thresholded linear rules with standard-normal directions.
    pub fn random_linear_thresholds(p: usize, count: usize, bias: bool, seed: u64) -> Result<Self> {
        let members = (0..count)
            .map(|j| {
                let mut r = rng::stream(seed, "linear-member", j as u64);
                let w = (0..p).map(|_| rng::normal(&mut r)).collect();
                let b = bias.then(|| rng::normal(&mut r));
                Hypothesis::linear(w, b, OutputMode::SignThresholded)
            })
            .collect();
        Self::finite(members)
    }

    /// The class `{−f : f ∈ F}` of a finite class.
    pub fn negated(&self) -> Result<Self> {
        let members = self.members()?;
        let neg = members
            .iter()
            .map(|h| {
                let model = match &h.model {
                    Model::Table(t) => Model::Table(
                        Table::new(t.points.clone(), t.values.iter().map(|&v| -v).collect())
                            .expect("same support"),
                    ),
                    Model::Linear { weights, bias } => Model::Linear {
                        weights: weights.iter().map(|&w| -w).collect(),
                        bias: bias.map(|b| -b),
                    },
                    Model::Mlp(net) => {
                        let mut net = net.clone();
                        let k = net.params.len();
                        let last = net.widths[net.widths.len() - 2] + 1;
                        for p in &mut net.params[k - last..] {
                            *p = -*p;
                        }
                        Model::Mlp(net)
                    }
                };
                // Under the sign(0) = +1 rule, negating a score of exactly 0
                // would not negate the label; tables and generic linear
                // members never hit that case on continuous data.
                Hypothesis {
                    model,
                    output_mode: h.output_mode,
                }
            })
            .collect();
        Self::finite(neg)
    }

    pub fn is_finite(&self) -> bool {
        matches!(self.kind, ClassKind::Finite { .. })
    }

    pub fn members(&self) -> Result<&[Hypothesis<T>]> {
        match &self.kind {
            ClassKind::Finite { members } => Ok(members),
            _ => Err(Error::unsupported("only finite classes can be enumerated")),
        }
    }

    /// Layer widths of an MLP class, input and output included.
    pub fn mlp_widths(&self) -> Option<Vec<usize>> {
        match &self.kind {
            ClassKind::Mlp { hidden, .. } => Some(
                std::iter::once(self.feature_dim)
                    .chain(hidden.iter().copied())
                    .chain(std::iter::once(1))
                    .collect(),
            ),
            _ => None,
        }
    }

    /// Number of trainable scalars `k`.
    pub fn param_count(&self) -> Result<usize> {
        Ok(match &self.kind {
            ClassKind::Finite { .. } => {
                return Err(Error::unsupported("finite classes have no parameter count"))
            }
            ClassKind::LinearThreshold { bias }
            | ClassKind::RidgeLinear { bias }
            | ClassKind::LassoLinear { bias } => self.feature_dim + *bias as usize,
            ClassKind::Mlp { .. } => param_count_for(&self.mlp_widths().unwrap()),
        })
    }

    /// Predictions of every member on every sample: `out[member][sample]`.
    pub fn prediction_matrix(&self, ds: &Dataset<T>) -> Result<Vec<Vec<T>>> {
        self.members()?.iter().map(|h| h.predict_all(ds)).collect()
    }
}

pub fn enumerate_members<T: Scalar>(f: &HypothesisClass<T>) -> Result<Vec<Hypothesis<T>>> {
    f.members().map(<[_]>::to_vec)
}

pub fn param_count<T: Scalar>(f: &HypothesisClass<T>) -> Result<usize> {
    f.param_count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn predict_examples() {
        let h = Hypothesis::linear(vec![1.0, 2.0], None, OutputMode::RealValued);
        assert_eq!(predict(&h, &[3.0, 1.0]).unwrap(), 5.0);
        let h = Hypothesis::linear(vec![1.0, 0.0], None, OutputMode::SignThresholded);
        assert_eq!(predict(&h, &[-2.0, 7.0]).unwrap(), -1.0);
        let net = Mlp::<f64>::zeros(vec![3, 4, 1], Activation::Tanh).unwrap();
        let h = Hypothesis::mlp(net, OutputMode::RealValued);
        assert_eq!(h.predict(&[0.3, -9.0, 2.0]).unwrap(), 0.0);
        let h = h.with_output_mode(OutputMode::SignThresholded);
        assert_eq!(h.predict(&[0.3, -9.0, 2.0]).unwrap(), 1.0);
        assert!(matches!(h.predict(&[1.0]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn table_lookup_and_off_support() {
        let h = Hypothesis::table(vec![vec![0.0, 1.0], vec![2.0, 3.0]], vec![1.0, -1.0]).unwrap();
        assert_eq!(h.output_mode, OutputMode::SignThresholded);
        assert_eq!(h.predict(&[2.0, 3.0]).unwrap(), -1.0);
        assert_eq!(h.predict(&[-0.0, 1.0]).unwrap(), 1.0);
        assert!(matches!(h.predict(&[2.0, 3.5]), Err(Error::Input(_))));
        assert!(Hypothesis::table(vec![vec![1.0], vec![1.0]], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn loss_examples() {
        assert_eq!(loss(LossFn::Square, 1.0, 1.0).unwrap(), 0.0);
        assert_eq!(loss(LossFn::Square, 0.0, 2.0).unwrap(), 4.0);
        assert_eq!(loss(LossFn::ZeroOne, 1.0, -1.0).unwrap(), 1.0);
        assert!(loss(LossFn::ZeroOne, 0.5, 1.0).is_err());
    }

    #[test]
    fn zero_one_identity_exhaustive() {
        for s in [-1.0f64, 1.0] {
            for f in [-1.0f64, 1.0] {
                assert_eq!(loss(LossFn::ZeroOne, s, f).unwrap(), (1.0 - s * f) / 2.0);
            }
        }
    }

    #[test]
    fn finite_class_members() {
        let h = Hypothesis::linear(vec![1.0, -1.0], None, OutputMode::SignThresholded);
        let f = HypothesisClass::finite(vec![h.clone()]).unwrap();
        let f2 = HypothesisClass::finite(vec![h, f.negated().unwrap().members().unwrap()[0].clone()]).unwrap();
        assert_eq!(enumerate_members(&f2).unwrap().len(), 2);
        assert_eq!(enumerate_members(&f2).unwrap(), enumerate_members(&f2).unwrap());
        assert!(HypothesisClass::<f64>::finite(vec![]).is_err());
        assert!(enumerate_members(&HypothesisClass::<f64>::linear_threshold(2, true)).is_err());
    }

    #[test]
    fn param_counts() {
        assert_eq!(param_count(&HypothesisClass::<f64>::ridge_linear(10, false)).unwrap(), 10);
        assert_eq!(param_count(&HypothesisClass::<f64>::mlp(2, vec![4], Activation::Tanh)).unwrap(), 17);
        assert_eq!(
            param_count(&HypothesisClass::<f64>::mlp(256, vec![64, 64], Activation::Relu)).unwrap(),
            20_673
        );
        let fin = HypothesisClass::<f64>::random_linear_thresholds(3, 4, false, 0).unwrap();
        assert!(matches!(param_count(&fin), Err(Error::Unsupported(_))));
    }

    #[test]
    fn hypothesis_json_layout() {
        let h = Hypothesis::linear(vec![1.5, -2.0], Some(0.25), OutputMode::SignThresholded);
        let v = serde_json::to_value(&h).unwrap();
        assert_eq!(v["kind"], "linear");
        assert_eq!(v["output_mode"], "sign-thresholded");
        let back: Hypothesis<f64> = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);

        let net = Mlp::new(vec![1, 1, 1], Activation::Tanh, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let v = serde_json::to_value(Hypothesis::mlp(net, OutputMode::RealValued)).unwrap();
        assert_eq!(v["kind"], "mlp");
        assert_eq!(v["params"], serde_json::json!([1.0, 2.0, 3.0, 4.0]));

        let t = Hypothesis::table(vec![vec![0.5]], vec![-1.0]).unwrap();
        let back: Hypothesis<f64> = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        assert_eq!(back.predict(&[0.5]).unwrap(), -1.0);
    }
}
