//! Exact return-time distribution of the restricted chain.
//!
//! Only the relative order of the particles matters. An excursion of length
//! `k` is a word over {inside, outside} plus, for its `m` inside arrivals, a
//! relative order. Inside arrivals are i.i.d. uniform on `[0, q)`, so the
//! word has probability `q^m (1 - q)^{k - m}` and each of the `m!` orders is
//! equally likely given the word. Hence
//!
//! ```text
//! P[tau_q = k] = sum over (word, order) first emptying at step k
//!                of q^m (1 - q)^{k - m} / m!
//! ```
//!
//! Orders are generated by sequential insertion: the `j`-th inside arrival
//! falls into one of `j` slots among the earlier ones, each with weight
//! `1 / j`.
//!
//! Two enumerations are provided. [`exact_return_pmf_unmemoized`] walks every
//! (word, slot sequence) path explicitly. [`exact_return_pmf`] merges paths
//! whose rank configuration coincides: particles alive in the restricted set
//! separated by runs of already-removed ones, recorded as the run lengths.
//! Future steps depend on nothing else, so the merge is exact.
//!
//! All arithmetic is over big rationals; floats appear only in [`eval_pmf`].

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::excursion::{closed_form_mean_return, MeanReturn};

/// Largest `kmax` accepted by [`exact_return_pmf`].
pub const MAX_KMAX: usize = 11;

/// Largest `kmax` accepted by [`exact_return_pmf_unmemoized`].
pub const MAX_KMAX_UNMEMOIZED: usize = 9;

/// Polynomial in `q` with exact rational coefficients, lowest power first.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ProbPoly {
    coeffs: Vec<BigRational>,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, i| acc * BigInt::from(i))
}

impl ProbPoly {
    pub fn zero() -> Self {
        ProbPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_coeffs(vec![BigRational::one()])
    }

    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        let mut p = ProbPoly { coeffs };
        p.trim();
        p
    }

    /// Convenience constructor from small integer fractions.
    pub fn from_fracs(fracs: &[(i64, i64)]) -> Self {
        Self::from_coeffs(fracs.iter().map(|&(n, d)| rat(n, d)).collect())
    }

    /// `c * q^m * (1 - q)^r`.
    pub fn monomial_binomial(c: &BigRational, m: usize, r: usize) -> Self {
        let mut coeffs = vec![BigRational::zero(); m + r + 1];
        for i in 0..=r {
            let b = BigRational::from_integer(binomial(r, i));
            let term = c * b;
            coeffs[m + i] = if i % 2 == 0 { term } else { -term };
        }
        Self::from_coeffs(coeffs)
    }

    fn trim(&mut self) {
        while self.coeffs.last().is_some_and(Zero::is_zero) {
            self.coeffs.pop();
        }
    }

    /// Coefficients, lowest power first, without trailing zeros.
    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `q^i`.
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn eval_exact(&self, q: &BigRational) -> BigRational {
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * q + c)
    }

    /// JSON form `{"k": k, "coeffs": [["num", "den"], ...]}`.
    pub fn to_json(&self, k: usize) -> Value {
        let coeffs: Vec<Value> = self
            .coeffs
            .iter()
            .map(|c| json!([c.numer().to_string(), c.denom().to_string()]))
            .collect();
        json!({ "k": k, "coeffs": coeffs })
    }

    /// Inverse of [`ProbPoly::to_json`].
    pub fn from_json(v: &Value) -> Result<(usize, Self)> {
        let bad = |what: &str| Error::Precondition(format!("malformed polynomial JSON: {what}"));
        let k = v.get("k").and_then(Value::as_u64).ok_or_else(|| bad("k"))? as usize;
        let arr = v.get("coeffs").and_then(Value::as_array).ok_or_else(|| bad("coeffs"))?;
        let mut coeffs = Vec::with_capacity(arr.len());
        for c in arr {
            let parse = |i: usize| -> Result<BigInt> {
                c.get(i)
                    .and_then(Value::as_str)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| bad("coefficient"))
            };
            let den = parse(1)?;
            if den.is_zero() {
                return Err(bad("zero denominator"));
            }
            coeffs.push(BigRational::new(parse(0)?, den));
        }
        Ok((k, Self::from_coeffs(coeffs)))
    }
}

impl Add for &ProbPoly {
    type Output = ProbPoly;

    fn add(self, rhs: &ProbPoly) -> ProbPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ProbPoly::from_coeffs((0..n).map(|i| self.coeff(i) + rhs.coeff(i)).collect())
    }
}

impl Sub for &ProbPoly {
    type Output = ProbPoly;

    fn sub(self, rhs: &ProbPoly) -> ProbPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ProbPoly::from_coeffs((0..n).map(|i| self.coeff(i) - rhs.coeff(i)).collect())
    }
}

impl Mul for &ProbPoly {
    type Output = ProbPoly;

    fn mul(self, rhs: &ProbPoly) -> ProbPoly {
        if self.is_zero() || rhs.is_zero() {
            return ProbPoly::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ProbPoly::from_coeffs(out)
    }
}

impl fmt::Display for ProbPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()) {
            let sign = if c < &BigRational::zero() { "-" } else { "+" };
            if first {
                if sign == "-" {
                    f.write_str("-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            let a = c.abs();
            match i {
                0 => write!(f, "{a}")?,
                1 => write!(f, "{a}*q")?,
                _ => write!(f, "{a}*q^{i}")?,
            }
        }
        Ok(())
    }
}

/// Evaluates `poly` at `q` exactly and rounds once at the end.
pub fn eval_pmf(poly: &ProbPoly, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::OutOfRange {
            what: "q",
            value: q,
            range: "[0, 1]",
        });
    }
    let q = BigRational::from_float(q).expect("finite");
    Ok(poly.eval_exact(&q).to_f64().unwrap_or(f64::NAN))
}

/// Accumulates `coef * q^m (1 - q)^{k - m}` terms per `(k, m)` before
/// expanding them into polynomials.
struct PmfBuilder {
    kmax: usize,
    terms: Vec<Vec<BigRational>>,
}

impl PmfBuilder {
    fn new(kmax: usize) -> Self {
        PmfBuilder {
            kmax,
            terms: (0..=kmax).map(|k| vec![BigRational::zero(); k + 1]).collect(),
        }
    }

    fn add(&mut self, k: usize, m: usize, c: &BigRational) {
        self.terms[k][m] += c;
    }

    fn finish(self) -> Vec<ProbPoly> {
        (1..=self.kmax)
            .map(|k| {
                self.terms[k]
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .fold(ProbPoly::zero(), |acc, (m, c)| {
                        &acc + &ProbPoly::monomial_binomial(c, m, k - m)
                    })
            })
            .collect()
    }
}

fn check_kmax(kmax: usize, limit: usize) -> Result<()> {
    if kmax == 0 {
        return Err(Error::Precondition("kmax must be at least 1".into()));
    }
    if kmax > limit {
        return Err(Error::CostLimit { kmax, limit });
    }
    Ok(())
}

/// Rank configuration: `gaps[i]` counts removed arrivals between the
/// `i`-th and `(i+1)`-th alive particle (gap 0 is below the lowest alive,
/// the last gap above the highest). Alive count is `gaps.len() - 1`.
type Gaps = Vec<u32>;

/// `P[tau_q = k]` for `k = 1..=kmax`, by enumeration with merging of equal
/// rank configurations.
pub fn exact_return_pmf(kmax: usize) -> Result<Vec<ProbPoly>> {
    check_kmax(kmax, MAX_KMAX)?;
    let mut out = PmfBuilder::new(kmax);
    // (configuration, inside arrivals so far) -> coefficient of q^m (1-q)^{k-m}.
    let mut layer: HashMap<(Gaps, usize), BigRational> = HashMap::new();
    layer.insert((vec![0], 0), BigRational::one());

    for k in 1..=kmax {
        let mut next: HashMap<(Gaps, usize), BigRational> = HashMap::new();
        for ((gaps, m), c) in layer {
            let alive = gaps.len() - 1;

            // Outside: the lowest alive particle (if any) is removed.
            if alive <= 1 {
                out.add(k, m, &c);
            } else {
                let mut g = Vec::with_capacity(gaps.len() - 1);
                g.push(gaps[0] + 1 + gaps[1]);
                g.extend_from_slice(&gaps[2..]);
                *next.entry((g, m)).or_insert_with(BigRational::zero) += &c;
            }

            // Inside: one of m + 1 slots, each with weight 1 / (m + 1).
            let w = &c * rat(1, m as i64 + 1);
            for (i, &gi) in gaps.iter().enumerate() {
                for a in 0..=gi {
                    let b = gi - a;
                    let mut g = Vec::with_capacity(gaps.len() + 1);
                    g.extend_from_slice(&gaps[..i]);
                    g.push(a);
                    g.push(b);
                    g.extend_from_slice(&gaps[i + 1..]);
                    if i > 0 {
                        // Arrival above the lowest alive: that one is removed.
                        let merged = g[0] + 1 + g[1];
                        g.splice(0..2, [merged]);
                    }
                    *next.entry((g, m + 1)).or_insert_with(BigRational::zero) += &w;
                }
            }
        }
        layer = next;
    }
    Ok(out.finish())
}

/// One enumerated excursion: for every step, `None` for an outside arrival
/// or `Some(r)` for an inside arrival whose rank among all inside arrivals
/// of the excursion is `r` (0 = leftmost).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExcursionPattern {
    pub arrivals: Vec<Option<usize>>,
}

impl ExcursionPattern {
    pub fn length(&self) -> usize {
        self.arrivals.len()
    }

    pub fn inside_count(&self) -> usize {
        self.arrivals.iter().filter(|a| a.is_some()).count()
    }
}

/// Visits every (word, relative order) that returns to the empty set for the
/// first time at some step `k <= kmax`, each exactly once.
pub fn enumerate_excursions<F: FnMut(&ExcursionPattern)>(kmax: usize, mut visit: F) -> Result<()> {
    check_kmax(kmax, MAX_KMAX_UNMEMOIZED)?;

    struct Walk<'a, F> {
        kmax: usize,
        // Inside arrivals so far, by step index, in increasing position,
        // with an alive flag.
        order: Vec<(usize, bool)>,
        steps: Vec<bool>,
        visit: &'a mut F,
    }

    impl<F: FnMut(&ExcursionPattern)> Walk<'_, F> {
        fn lowest_alive(&self) -> Option<usize> {
            self.order.iter().position(|&(_, alive)| alive)
        }

        fn emit(&mut self) {
            let mut arrivals: Vec<Option<usize>> = self.steps.iter().map(|_| None).collect();
            for (rank, &(step, _)) in self.order.iter().enumerate() {
                arrivals[step] = Some(rank);
            }
            (self.visit)(&ExcursionPattern { arrivals });
        }

        fn go(&mut self) {
            let k = self.steps.len();
            if k == self.kmax {
                return;
            }
            // Outside.
            self.steps.push(false);
            match self.lowest_alive() {
                Some(i) => {
                    self.order[i].1 = false;
                    if self.lowest_alive().is_none() {
                        self.emit();
                    } else {
                        self.go();
                    }
                    self.order[i].1 = true;
                }
                None => self.emit(),
            }
            self.steps.pop();

            // Inside, at each slot among the earlier inside arrivals.
            self.steps.push(true);
            for slot in 0..=self.order.len() {
                let low = self.lowest_alive();
                self.order.insert(slot, (k, true));
                let displaced = match low {
                    Some(i) if i < slot => {
                        self.order[i].1 = false;
                        Some(i)
                    }
                    _ => None,
                };
                self.go();
                if let Some(i) = displaced {
                    self.order[i].1 = true;
                }
                self.order.remove(slot);
            }
            self.steps.pop();
        }
    }

    Walk {
        kmax,
        order: Vec::new(),
        steps: Vec::new(),
        visit: &mut visit,
    }
    .go();
    Ok(())
}

/// `P[tau_q = k]` for `k = 1..=kmax` by explicit enumeration of every path.
pub fn exact_return_pmf_unmemoized(kmax: usize) -> Result<Vec<ProbPoly>> {
    let mut counts = vec![vec![0u64; kmax + 1]; kmax + 1];
    enumerate_excursions(kmax, |p| counts[p.length()][p.inside_count()] += 1)?;
    let mut out = PmfBuilder::new(kmax);
    for (k, row) in counts.iter().enumerate() {
        for (m, &n) in row.iter().enumerate().filter(|(_, &n)| n > 0) {
            let c = BigRational::new(BigInt::from(n), factorial(m));
            out.add(k, m, &c);
        }
    }
    Ok(out.finish())
}

/// `P[tau_q > kmax] = 1 - sum_k P[tau_q = k]`.
pub fn tail_mass(pmf: &[ProbPoly]) -> ProbPoly {
    pmf.iter().fold(ProbPoly::one(), |acc, p| &acc - p)
}

/// `sum_k k * P[tau_q = k]` over the given terms.
pub fn truncated_mean_poly(pmf: &[ProbPoly]) -> ProbPoly {
    pmf.iter().enumerate().fold(ProbPoly::zero(), |acc, (i, p)| {
        &acc + &p.scale(&rat(i as i64 + 1, 1))
    })
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct TruncatedMean {
    pub kmax: usize,
    pub q: f64,
    /// `sum_{k <= kmax} k P[tau = k]`, a lower bound on the mean.
    pub lower: f64,
    /// `P[tau > kmax]`.
    pub tail_mass: f64,
    /// `lower + (kmax + 1) * tail_mass`; a diagnostic, not a bound.
    pub diagnostic: f64,
    pub closed_form: f64,
}

/// Compares the truncated mean of the exact distribution with the closed
/// form `1 / (1 + ln(1 - q))`.
pub fn truncated_mean_check(kmax: usize, q: f64) -> Result<TruncatedMean> {
    let closed_form = match closed_form_mean_return(q)? {
        MeanReturn::Finite(x) => x,
        MeanReturn::Infinite => {
            return Err(Error::Precondition(format!("q = {q} is not below p_c")));
        }
    };
    let pmf = exact_return_pmf(kmax)?;
    let lower = eval_pmf(&truncated_mean_poly(&pmf), q)?;
    let tail = eval_pmf(&tail_mass(&pmf), q)?;
    if lower > closed_form * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "truncated mean {lower} exceeds the closed form {closed_form}"
        )));
    }
    Ok(TruncatedMean {
        kmax,
        q,
        lower,
        tail_mass: tail,
        diagnostic: lower + (kmax as f64 + 1.0) * tail,
        closed_form,
    })
}

/// The JSON array of `{"k", "coeffs"}` objects for `k = 1..`.
pub fn pmf_to_json(pmf: &[ProbPoly]) -> Value {
    Value::Array(pmf.iter().enumerate().map(|(i, p)| p.to_json(i + 1)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand(k: usize) -> ProbPoly {
        // Worked by hand from the step rule.
        let q = ProbPoly::from_fracs(&[(0, 1), (1, 1)]);
        let one_minus_q = ProbPoly::from_fracs(&[(1, 1), (-1, 1)]);
        let pow = |p: &ProbPoly, n: usize| (0..n).fold(ProbPoly::one(), |acc, _| &acc * p);
        match k {
            1 => one_minus_q,
            2 => &q * &one_minus_q,
            3 => (&pow(&q, 2) * &one_minus_q).scale(&rat(1, 2)),
            4 => &(&pow(&q, 3) * &one_minus_q).scale(&rat(1, 6))
                + &(&pow(&q, 2) * &pow(&one_minus_q, 2)).scale(&rat(1, 2)),
            _ => unreachable!(),
        }
    }

    #[test]
    fn first_four_terms_match_hand_enumeration() {
        let pmf = exact_return_pmf(4).unwrap();
        for k in 1..=4 {
            assert_eq!(pmf[k - 1], hand(k), "k = {k}: {}", pmf[k - 1]);
        }
        let brute = exact_return_pmf_unmemoized(4).unwrap();
        assert_eq!(pmf, brute);
    }

    #[test]
    fn memoized_agrees_with_explicit_paths() {
        assert_eq!(exact_return_pmf(7).unwrap(), exact_return_pmf_unmemoized(7).unwrap());
    }

    #[test]
    fn eval_examples() {
        let pmf = exact_return_pmf(4).unwrap();
        assert_eq!(eval_pmf(&pmf[1], 0.5).unwrap(), 0.25);
        assert!((eval_pmf(&pmf[3], 0.5).unwrap() - (1.0 / 96.0 + 1.0 / 32.0)).abs() < 1e-15);
        for p in &pmf[1..] {
            assert_eq!(eval_pmf(p, 0.0).unwrap(), 0.0);
        }
        assert_eq!(eval_pmf(&pmf[0], 0.0).unwrap(), 1.0);
        assert!(eval_pmf(&pmf[0], 1.5).is_err());
    }

    #[test]
    fn normalisation_is_exact() {
        let pmf = exact_return_pmf(8).unwrap();
        let tail = tail_mass(&pmf);
        let total = pmf.iter().fold(tail.clone(), |acc, p| &acc + p);
        assert_eq!(total, ProbPoly::one());
        for i in 0..=20 {
            let q = i as f64 / 20.0;
            let t = eval_pmf(&tail, q).unwrap();
            assert!((-1e-15..=1.0 + 1e-15).contains(&t), "q = {q}: tail {t}");
            for p in &pmf {
                let v = eval_pmf(p, q).unwrap();
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }

    #[test]
    fn cost_limits() {
        assert!(matches!(exact_return_pmf(0), Err(Error::Precondition(_))));
        assert!(matches!(exact_return_pmf(MAX_KMAX + 1), Err(Error::CostLimit { .. })));
        assert!(matches!(
            exact_return_pmf_unmemoized(MAX_KMAX_UNMEMOIZED + 1),
            Err(Error::CostLimit { .. })
        ));
        assert_eq!(exact_return_pmf(MAX_KMAX).unwrap().len(), MAX_KMAX);
    }

    #[test]
    fn truncated_mean_examples() {
        let z = truncated_mean_check(5, 0.0).unwrap();
        assert_eq!(z.lower, 1.0);
        assert_eq!(z.closed_form, 1.0);
        let t = truncated_mean_check(10, 0.1).unwrap();
        assert!((t.closed_form - 1.117_768_685).abs() < 1e-9);
        assert!(t.lower <= t.closed_form && t.closed_form - t.lower < 1e-3, "{t:?}");
        assert!(truncated_mean_check(4, 0.7).is_err());
    }

    #[test]
    fn json_round_trip_and_shape() {
        let pmf = exact_return_pmf(4).unwrap();
        let v = pmf[3].to_json(4);
        assert_eq!(v["k"], 4);
        assert_eq!(v["coeffs"][2], json!(["1", "2"]));
        let (k, back) = ProbPoly::from_json(&v).unwrap();
        assert_eq!((k, back), (4, pmf[3].clone()));
        assert!(ProbPoly::from_json(&json!({"k": 1, "coeffs": [["1", "0"]]})).is_err());
    }

    #[test]
    fn display_is_readable() {
        assert_eq!(hand(2).to_string(), "1*q - 1*q^2");
        assert_eq!(ProbPoly::zero().to_string(), "0");
    }
}
