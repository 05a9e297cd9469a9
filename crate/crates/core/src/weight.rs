//! Number types the inference routines can compute in.

use std::fmt::Debug;

use num::{BigRational, Num, ToPrimitive};

use crate::model::Prob;

/// Arithmetic used by the enumerators and the model counter. Implemented
/// for exact rationals and for `f64`.
pub trait Weight: Num + Clone + Debug + Send + Sync + 'static {
    /// Running-sum state; exact for rationals, compensated for floats.
    type Acc: Default + Clone + Send;

    fn from_prob(p: &Prob) -> Self;

    fn to_f64(&self) -> f64;

    fn accumulate(acc: &mut Self::Acc, x: Self);

    fn total(acc: Self::Acc) -> Self;

    fn sum_all<I: IntoIterator<Item = Self>>(items: I) -> Self {
        let mut acc = Self::Acc::default();
        for x in items {
            Self::accumulate(&mut acc, x);
        }
        Self::total(acc)
    }
}

impl Weight for BigRational {
    type Acc = Option<BigRational>;

    fn from_prob(p: &Prob) -> Self {
        p.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn accumulate(acc: &mut Self::Acc, x: Self) {
        *acc = Some(match acc.take() {
            Some(s) => s + x,
            None => x,
        });
    }

    fn total(acc: Self::Acc) -> Self {
        acc.unwrap_or_else(|| BigRational::from_integer(0.into()))
    }
}

impl Weight for f64 {
    type Acc = KahanSum;

    fn from_prob(p: &Prob) -> Self {
        ToPrimitive::to_f64(p).unwrap_or(f64::NAN)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn accumulate(acc: &mut KahanSum, x: f64) {
        acc.add(x);
    }

    fn total(acc: KahanSum) -> f64 {
        acc.value()
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Default, Debug)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::prob;

    #[test]
    fn kahan_beats_naive_summation() {
        let xs = std::iter::once(1.0).chain(std::iter::repeat_n(1e-16, 10_000));
        let naive: f64 = xs.clone().sum();
        let compensated = f64::sum_all(xs);
        assert_eq!(naive, 1.0);
        assert!((compensated - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn exact_sum() {
        let s = BigRational::sum_all([prob(1, 3), prob(1, 6), prob(1, 2)]);
        assert_eq!(s, prob(1, 1));
        assert_eq!(BigRational::sum_all([]), prob(0, 1));
    }
}
