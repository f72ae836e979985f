//! Finite-dimensional state vectors, POVMs, Born-rule probabilities and
//! outcome sampling. Level indices are 1-based at the public surface
//! (matching the |1>..|d> labelling used throughout) and converted
//! internally.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::rng::UnitStream;
use crate::{Error, Result};

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = -1e-10;
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Sign of the second branch of a prepared pair superposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn as_f64(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn from_symbol(c: char) -> Result<Self> {
        match c {
            '+' => Ok(Sign::Plus),
            '-' => Ok(Sign::Minus),
            other => Err(Error::Config(format!("unknown sign symbol {other:?}"))),
        }
    }
}

/// Normalized pure state over d basis levels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() < 2 {
            return Err(Error::InvalidState(format!(
                "dimension must be at least 2, got {}",
                amps.len()
            )));
        }
        let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm2 - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state not normalized: |psi|^2 = {norm2}"
            )));
        }
        Ok(Self { amps })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    /// Amplitude at 1-based level index.
    pub fn amp(&self, level: usize) -> Complex64 {
        self.amps[level - 1]
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Uniform superposition (|1> + ... + |d>)/sqrt(d).
    pub fn uniform(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidState("uniform state needs d >= 2".into()));
        }
        let a = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        Self::new(vec![a; d])
    }

    /// Basis state |level> (1-based).
    pub fn basis(d: usize, level: usize) -> Result<Self> {
        if level < 1 || level > d {
            return Err(Error::InvalidLevels(format!(
                "level {level} out of range 1..={d}"
            )));
        }
        let mut amps = vec![Complex64::ZERO; d];
        amps[level - 1] = Complex64::ONE;
        Self::new(amps)
    }
}

/// Alice's prepared state (|j> + sign|k>)/sqrt(2) on a d-level probe.
///
/// The protocol requires d >= 3; j, k are 1-based with j < k.
pub fn make_pair_superposition(d: usize, j: usize, k: usize, sign: Sign) -> Result<StateVector> {
    if d < 3 {
        return Err(Error::InvalidLevels(format!(
            "protocol requires d >= 3, got d = {d}"
        )));
    }
    if j == k {
        return Err(Error::InvalidLevels(format!("j = k = {j} is not a pair")));
    }
    if j < 1 || k < 1 || j > d || k > d || j >= k {
        return Err(Error::InvalidLevels(format!(
            "need 1 <= j < k <= {d}, got (j, k) = ({j}, {k})"
        )));
    }
    let mut amps = vec![Complex64::ZERO; d];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    amps[j - 1] = Complex64::new(r, 0.0);
    amps[k - 1] = Complex64::new(sign.as_f64() * r, 0.0);
    StateVector::new(amps)
}

/// Apply e^{i theta_i} to each amplitude. Norm preserving by construction.
pub fn apply_diagonal_phases(state: &StateVector, phases: &[f64]) -> Result<StateVector> {
    if phases.len() != state.dim() {
        return Err(Error::DimensionMismatch {
            state: state.dim(),
            operator: phases.len(),
        });
    }
    let amps = state
        .amps()
        .iter()
        .zip(phases)
        .map(|(a, th)| a * Complex64::from_polar(1.0, *th))
        .collect();
    StateVector::new(amps)
}

/// One POVM element: a Hermitian PSD matrix and its outcome label.
#[derive(Debug, Clone)]
pub struct PovmElement {
    matrix: DMatrix<Complex64>,
    label: String,
}

impl PovmElement {
    pub fn new(matrix: DMatrix<Complex64>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if !matrix.is_square() {
            return Err(Error::InvalidPovm(format!("element {label} is not square")));
        }
        let adj = matrix.adjoint();
        let herm_err = (&matrix - &adj).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_err > HERMITIAN_TOL {
            return Err(Error::InvalidPovm(format!(
                "element {label} not Hermitian (max deviation {herm_err:e})"
            )));
        }
        let eig = matrix.clone().symmetric_eigen();
        let min_eig = eig.eigenvalues.iter().fold(f64::INFINITY, |m, &e| m.min(e));
        if min_eig < PSD_TOL {
            return Err(Error::InvalidPovm(format!(
                "element {label} not PSD (min eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { matrix, label })
    }

    /// Rank-1 element v v^dagger from an (unnormalized) vector.
    pub fn rank_one(v: &[Complex64], label: impl Into<String>) -> Result<Self> {
        let d = v.len();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for r in 0..d {
            for c in 0..d {
                m[(r, c)] = v[r] * v[c].conj();
            }
        }
        Self::new(m, label)
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Ordered POVM; elements sum to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<PovmElement>,
}

impl Povm {
    pub fn new(elements: Vec<PovmElement>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::InvalidPovm("empty POVM".into()));
        }
        let d = elements[0].dim();
        if elements.iter().any(|e| e.dim() != d) {
            return Err(Error::InvalidPovm("elements differ in dimension".into()));
        }
        let mut sum = DMatrix::<Complex64>::zeros(d, d);
        for e in &elements {
            sum += e.matrix();
        }
        let id = DMatrix::<Complex64>::identity(d, d);
        let dev = (&sum - &id).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > COMPLETENESS_TOL {
            return Err(Error::InvalidPovm(format!(
                "elements do not sum to identity (max deviation {dev:e})"
            )));
        }
        Ok(Self { elements })
    }

    /// Complement element `I - sum(partial)`, for completing a POVM.
    pub fn completion_element(
        partial: &[PovmElement],
        d: usize,
        label: impl Into<String>,
    ) -> Result<PovmElement> {
        let mut rest = DMatrix::<Complex64>::identity(d, d);
        for e in partial {
            rest -= e.matrix();
        }
        PovmElement::new(rest, label)
    }

    pub fn elements(&self) -> &[PovmElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.elements[0].dim()
    }

    pub fn label_of(&self, index: usize) -> &str {
        self.elements[index].label()
    }
}

/// Born-rule probabilities p_i = <psi|E_i|psi>, clamped to [0, 1].
pub fn born_probabilities(state: &StateVector, povm: &Povm) -> Result<Vec<f64>> {
    let d = state.dim();
    if d != povm.dim() {
        return Err(Error::DimensionMismatch {
            state: d,
            operator: povm.dim(),
        });
    }
    let amps = state.amps();
    let mut probs = Vec::with_capacity(povm.len());
    let mut total = 0.0;
    for e in povm.elements() {
        let m = e.matrix();
        let mut acc = Complex64::ZERO;
        for r in 0..d {
            let mut row = Complex64::ZERO;
            for c in 0..d {
                row += m[(r, c)] * amps[c];
            }
            acc += amps[r].conj() * row;
        }
        let p = acc.re;
        if !(-1e-10..=1.0 + 1e-10).contains(&p) {
            return Err(Error::InvalidPovm(format!(
                "Born probability {p} for element {} out of range",
                e.label()
            )));
        }
        let p = p.clamp(0.0, 1.0);
        total += p;
        probs.push(p);
    }
    if (total - 1.0).abs() > COMPLETENESS_TOL {
        return Err(Error::InvalidPovm(format!(
            "Born probabilities sum to {total}, not 1"
        )));
    }
    Ok(probs)
}

/// Sample an outcome index with the Born probabilities.
pub fn sample_outcome(
    state: &StateVector,
    povm: &Povm,
    stream: &mut dyn UnitStream,
) -> Result<usize> {
    let probs = born_probabilities(state, povm)?;
    sample_index(&probs, stream)
}

/// Sample an index from an explicit probability vector.
pub fn sample_index(probs: &[f64], stream: &mut dyn UnitStream) -> Result<usize> {
    let u = stream.next_unit().ok_or(Error::StreamExhausted)?;
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return Ok(i);
        }
    }
    // Rounding shortfall: attribute to the last outcome with nonzero weight.
    Ok(probs
        .iter()
        .rposition(|&p| p > 0.0)
        .unwrap_or(probs.len() - 1))
}
