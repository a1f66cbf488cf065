use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::Matching;

/// Exact rational probability, printed as `p/q` in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(pub BigRational);

impl Weight {
    pub fn new(num: i64, den: i64) -> Self {
        Weight(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn zero() -> Self {
        Weight(BigRational::zero())
    }

    pub fn one() -> Self {
        Weight(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    /// Parses `p/q` or a bare integer.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Format(format!("invalid rational weight {s:?}"));
        let (num, den) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let num: BigInt = num.parse().map_err(|_| bad())?;
        let den: BigInt = den.parse().map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        Ok(Weight(BigRational::new(num, den)))
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A probability distribution over matchings with exact weights.
///
/// The support is kept in matching order, every weight is strictly positive
/// and the weights sum to exactly one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Lottery {
    support: BTreeMap<Matching, Weight>,
}

impl Lottery {
    /// Sums duplicate entries, drops zero weights and checks the total.
    pub fn new(entries: impl IntoIterator<Item = (Matching, Weight)>) -> Result<Self> {
        let mut support: BTreeMap<Matching, Weight> = BTreeMap::new();
        for (m, w) in entries {
            if w.0.is_negative() {
                return Err(Error::Format(format!("negative lottery weight {w}")));
            }
            let slot = support.entry(m).or_insert_with(Weight::zero);
            slot.0 += w.0;
        }
        support.retain(|_, w| !w.is_zero());
        let total: BigRational = support.values().map(|w| &w.0).sum();
        if !total.is_one() {
            return Err(Error::Format(format!(
                "lottery weights sum to {}/{}, not 1",
                total.numer(),
                total.denom()
            )));
        }
        Ok(Lottery { support })
    }

    /// The lottery that selects `m` with certainty.
    pub fn degenerate(m: Matching) -> Self {
        Lottery {
            support: BTreeMap::from([(m, Weight::one())]),
        }
    }

    /// Weight of `m`; zero when outside the support.
    pub fn weight(&self, m: &Matching) -> Weight {
        self.support.get(m).cloned().unwrap_or_else(Weight::zero)
    }

    pub(crate) fn weight_ref(&self, m: &Matching) -> Option<&Weight> {
        self.support.get(m)
    }

    pub fn support(&self) -> impl Iterator<Item = &Matching> {
        self.support.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Matching, &Weight)> {
        self.support.iter()
    }

    pub fn support_len(&self) -> usize {
        self.support.len()
    }

    /// The single matching of a degenerate lottery.
    pub fn as_degenerate(&self) -> Option<&Matching> {
        if self.support.len() == 1 {
            self.support.keys().next()
        } else {
            None
        }
    }
}

#[derive(Serialize)]
struct Entry<'a> {
    matching: &'a Matching,
    weight: &'a Weight,
}

impl Serialize for Lottery {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(
            self.support
                .iter()
                .map(|(matching, weight)| Entry { matching, weight }),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Instance;

    #[test]
    fn weights_format_in_lowest_terms() {
        assert_eq!(Weight::new(2, 4).to_string(), "1/2");
        assert_eq!(Weight::one().to_string(), "1/1");
        assert_eq!(Weight::parse("3/6").unwrap(), Weight::new(1, 2));
        assert_eq!(Weight::parse("1").unwrap(), Weight::one());
        assert!(Weight::parse("1/0").is_err());
        assert!(Weight::parse("x").is_err());
    }

    #[test]
    fn lottery_validation() {
        let inst = Instance::unit(2, 2).unwrap();
        let a = Matching::from_indices(&inst, &[0, 1]).unwrap();
        let b = Matching::from_indices(&inst, &[1, 0]).unwrap();
        let l = Lottery::new([(a.clone(), Weight::new(1, 3)), (b.clone(), Weight::new(1, 3)), (a.clone(), Weight::new(1, 3))]).unwrap();
        assert_eq!(l.weight(&a), Weight::new(2, 3));
        assert_eq!(l.support_len(), 2);
        assert!(Lottery::new([(a.clone(), Weight::new(1, 2))]).is_err());
        assert!(Lottery::new([(a.clone(), Weight::new(3, 2)), (b.clone(), Weight::new(-1, 2))]).is_err());
        let z = Lottery::new([(a.clone(), Weight::one()), (b.clone(), Weight::zero())]).unwrap();
        assert_eq!(z.as_degenerate(), Some(&a));
    }
}
