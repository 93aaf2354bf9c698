//! Problem data: products, capacity, price sensitivity and the pairwise
//! dissimilarity parameters, plus the assortment and price vectors that are
//! evaluated against an instance.
//!
//! Pairwise data is kept in a contiguous upper-triangular layout: the pair
//! `(i, j)` with `i < j` lives at `i * n - i * (i + 1) / 2 + (j - i - 1)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative slack allowed on the capacity constraint. Loads are summed in
/// different orders by different solvers, so an exact comparison would make
/// feasibility depend on rounding.
pub const CAPACITY_SLACK: f64 = 1e-12;

/// Index of the unordered pair `{i, j}` in the upper-triangular layout.
///
/// # Panics
///
/// Panics in debug builds when `i == j` or either index is out of range.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n && j < n);
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Iterates over all pairs `(i, j)` with `i < j`, in layout order.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

#[inline]
pub(crate) fn within_capacity(load: f64, capacity: f64) -> bool {
    load <= capacity + CAPACITY_SLACK * capacity.abs().max(1.0)
}

/// A capacitated assortment and pricing instance under the paired
/// combinatorial logit model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct Instance {
    alpha: Vec<f64>,
    weights: Vec<f64>,
    capacity: f64,
    beta: f64,
    gamma: Vec<f64>,
}

/// Wire format of an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceJson {
    n: usize,
    alpha: Vec<f64>,
    weights: Vec<f64>,
    capacity: f64,
    beta: f64,
    gamma_upper: Vec<f64>,
}

impl TryFrom<InstanceJson> for Instance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        if raw.alpha.len() != raw.n {
            return Err(Error::invalid(
                "/alpha",
                format!("expected {} entries, found {}", raw.n, raw.alpha.len()),
            ));
        }
        Instance::new(
            raw.alpha,
            raw.weights,
            raw.capacity,
            raw.beta,
            raw.gamma_upper,
        )
    }
}

impl From<Instance> for InstanceJson {
    fn from(inst: Instance) -> Self {
        InstanceJson {
            n: inst.n(),
            alpha: inst.alpha,
            weights: inst.weights,
            capacity: inst.capacity,
            beta: inst.beta,
            gamma_upper: inst.gamma,
        }
    }
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    path.iter()
        .filter_map(|seg| match seg {
            Segment::Seq { index } => Some(format!("/{index}")),
            Segment::Map { key } => Some(format!("/{}", key.replace('~', "~0").replace('/', "~1"))),
            Segment::Enum { variant } => Some(format!("/{variant}")),
            Segment::Unknown => None,
        })
        .collect()
}

impl Instance {
    /// Builds and validates an instance. `gamma_upper` holds one dissimilarity
    /// parameter per unordered pair in upper-triangular order.
    pub fn new(
        alpha: Vec<f64>,
        weights: Vec<f64>,
        capacity: f64,
        beta: f64,
        gamma_upper: Vec<f64>,
    ) -> Result<Self> {
        let n = alpha.len();
        if n < 2 {
            return Err(Error::invalid(
                "/n",
                format!("need at least 2 products, got {n}"),
            ));
        }
        if let Some(i) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(Error::invalid(format!("/alpha/{i}"), "must be finite"));
        }
        if weights.len() != n {
            return Err(Error::invalid(
                "/weights",
                format!("expected {n} entries, found {}", weights.len()),
            ));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::invalid(
                format!("/weights/{i}"),
                "must be finite and > 0",
            ));
        }
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(Error::invalid("/capacity", "must be finite and > 0"));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::invalid("/beta", "must be finite and > 0"));
        }
        if gamma_upper.len() != pair_count(n) {
            return Err(Error::invalid(
                "/gamma_upper",
                format!(
                    "expected {} entries, found {}",
                    pair_count(n),
                    gamma_upper.len()
                ),
            ));
        }
        if let Some(k) = gamma_upper.iter().position(|g| !(*g > 0.0 && *g <= 1.0)) {
            return Err(Error::invalid(
                format!("/gamma_upper/{k}"),
                "must lie in (0, 1]",
            ));
        }
        Ok(Instance {
            alpha,
            weights,
            capacity,
            beta,
            gamma: gamma_upper,
        })
    }

    /// Convenience constructor taking `θ_i = exp(α_i)` instead of `α_i`.
    pub fn from_theta(
        theta: &[f64],
        weights: Vec<f64>,
        capacity: f64,
        beta: f64,
        gamma_upper: Vec<f64>,
    ) -> Result<Self> {
        if let Some(i) = theta.iter().position(|t| !(t.is_finite() && *t > 0.0)) {
            return Err(Error::invalid(
                format!("/theta/{i}"),
                "must be finite and > 0",
            ));
        }
        Self::new(
            theta.iter().map(|t| t.ln()).collect(),
            weights,
            capacity,
            beta,
            gamma_upper,
        )
    }

    /// Same dissimilarity parameter on every pair.
    pub fn with_uniform_gamma(
        alpha: Vec<f64>,
        weights: Vec<f64>,
        capacity: f64,
        beta: f64,
        gamma: f64,
    ) -> Result<Self> {
        let pairs = pair_count(alpha.len());
        Self::new(alpha, weights, capacity, beta, vec![gamma; pairs])
    }

    /// Parses and validates the wire format. Every error carries the JSON
    /// pointer of the offending field (`""` for the document itself).
    pub fn from_json(text: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(text);
        let raw: InstanceJson = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let mut path = json_pointer(e.path());
            let message = e.into_inner().to_string();
            if let Some(field) = message
                .strip_prefix("missing field `")
                .and_then(|m| m.split('`').next())
            {
                path = format!("{path}/{field}");
            }
            Error::invalid(path, message)
        })?;
        de.end().map_err(|e| Error::invalid("", e.to_string()))?;
        Instance::try_from(raw)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serialization is infallible")
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Dissimilarity parameter of the nest `{i, j}`; symmetric in its arguments.
    #[inline]
    pub fn gamma(&self, i: usize, j: usize) -> f64 {
        self.gamma[pair_index(self.n(), i, j)]
    }

    pub fn gamma_upper(&self) -> &[f64] {
        &self.gamma
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Binary offer vector: `offered(i)` is true iff product `i` is on display.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u8>", into = "Vec<u8>")]
pub struct Assortment(Vec<bool>);

impl TryFrom<Vec<u8>> for Assortment {
    type Error = String;

    fn try_from(bits: Vec<u8>) -> Result<Self, String> {
        bits.iter()
            .enumerate()
            .map(|(i, b)| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(format!("entry {i} must be 0 or 1, found {other}")),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Assortment)
    }
}

impl From<Assortment> for Vec<u8> {
    fn from(x: Assortment) -> Self {
        x.0.into_iter().map(u8::from).collect()
    }
}

impl Assortment {
    pub fn new(offered: Vec<bool>) -> Self {
        Assortment(offered)
    }

    pub fn empty(n: usize) -> Self {
        Assortment(vec![false; n])
    }

    pub fn full(n: usize) -> Self {
        Assortment(vec![true; n])
    }

    pub fn from_indices(n: usize, indices: &[usize]) -> Self {
        let mut x = Self::empty(n);
        for &i in indices {
            x.0[i] = true;
        }
        x
    }

    /// Decodes the low `n` bits of `mask`; bit `i` is product `i`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        Assortment((0..n).map(|i| mask >> i & 1 == 1).collect())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn offered(&self, i: usize) -> bool {
        self.0[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        self.0[i] = value;
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }

    pub fn offered_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i)
    }

    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    /// Display space used, summed in index order.
    pub fn load(&self, instance: &Instance) -> f64 {
        self.offered_indices().map(|i| instance.weights[i]).sum()
    }

    pub fn is_feasible(&self, instance: &Instance) -> bool {
        self.len() == instance.n() && within_capacity(self.load(instance), instance.capacity)
    }

    /// Tie-break order between assortments of equal objective: the preferred
    /// one includes the smallest index on which the two differ.
    pub fn preferred_over(&self, other: &Assortment) -> bool {
        self.0
            .iter()
            .zip(&other.0)
            .find(|(a, b)| a != b)
            .is_some_and(|(a, _)| *a)
    }
}

/// Selling prices, one per product, all nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PriceVector(Vec<f64>);

impl TryFrom<Vec<f64>> for PriceVector {
    type Error = Error;

    fn try_from(p: Vec<f64>) -> Result<Self> {
        PriceVector::new(p)
    }
}

impl From<PriceVector> for Vec<f64> {
    fn from(p: PriceVector) -> Self {
        p.0
    }
}

impl PriceVector {
    pub fn new(prices: Vec<f64>) -> Result<Self> {
        if let Some(i) = prices.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidArgument {
                name: "prices",
                message: format!("entry {i} must be finite and >= 0"),
            });
        }
        Ok(PriceVector(prices))
    }

    pub fn uniform(n: usize, price: f64) -> Result<Self> {
        Self::new(vec![price; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
