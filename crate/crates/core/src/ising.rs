//! Ising instances and their exhaustive energy spectra.
//!
//! An instance is the classical Hamiltonian
//!
//! ```text
//! E(s) = 1/2 * sum_ij s_i J_ij s_j + sum_i h_i s_i,      s_i = +-1
//! ```
//!
//! with a symmetric, zero-diagonal coupling matrix `J` and local fields `h`.
//! Configurations are indexed by the integer whose bit `i` encodes
//! `x_i = (1 + s_i)/2`, bit 0 being the least significant. Binary objectives
//! (QUBO, MaxCut) map onto this form up to a constant `offset`, kept on the
//! instance so the original objective can be recovered.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

/// Exhaustive enumeration cap. 2^24 states is the largest table this crate
/// will allocate.
pub const MAX_QUBITS: usize = 24;

/// One spin configuration, stored as its state index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpinConfiguration(pub usize);

impl SpinConfiguration {
    pub fn index(self) -> usize {
        self.0
    }

    /// Bit value x_i in {0, 1}.
    pub fn bit(self, i: usize) -> usize {
        (self.0 >> i) & 1
    }

    /// Spin value s_i = 2 x_i - 1 in {-1, +1}.
    pub fn spin(self, i: usize) -> f64 {
        (2 * self.bit(i)) as f64 - 1.0
    }

    /// Configuration with every spin flipped.
    pub fn complement(self, n: usize) -> Self {
        SpinConfiguration(self.0 ^ ((1usize << n) - 1))
    }

    pub fn flip(self, i: usize) -> Self {
        SpinConfiguration(self.0 ^ (1usize << i))
    }

    /// Hamming distance to another configuration.
    pub fn hamming_to(self, other: Self) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

/// How a generated instance was drawn; absent on hand-built instances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMetadata {
    pub family: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rng_name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsingInstance {
    n: usize,
    /// Row-major n x n symmetric matrix with zero diagonal.
    couplings: Vec<f64>,
    fields: Vec<f64>,
    /// Constant relating the generating binary objective to the Ising form:
    /// `binary_objective(x) + offset = energy(s(x))`.
    offset: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub generator: Option<GeneratorMetadata>,
}

impl IsingInstance {
    /// Builds an instance, validating shape, symmetry, zero diagonal and
    /// finiteness. `couplings` is row-major n x n.
    pub fn new(n: usize, couplings: Vec<f64>, fields: Vec<f64>, offset: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("instance needs n >= 1".into()));
        }
        if n > MAX_QUBITS {
            return Err(Error::SizeLimit { what: "IsingInstance", n, max: MAX_QUBITS });
        }
        if couplings.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "couplings has {} entries, expected {}",
                couplings.len(),
                n * n
            )));
        }
        if fields.len() != n {
            return Err(Error::InvalidArgument(format!(
                "fields has {} entries, expected {}",
                fields.len(),
                n
            )));
        }
        if !offset.is_finite()
            || couplings.iter().any(|v| !v.is_finite())
            || fields.iter().any(|v| !v.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite entries".into()));
        }
        for i in 0..n {
            if couplings[i * n + i] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at ({i},{i})")));
            }
            for j in 0..i {
                if couplings[i * n + j] != couplings[j * n + i] {
                    return Err(Error::InvalidArgument(format!(
                        "couplings not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(IsingInstance { n, couplings, fields, offset, generator: None })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        1usize << self.n
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n + j]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn field(&self, i: usize) -> f64 {
        self.fields[i]
    }

    pub fn fields(&self) -> &[f64] {
        &self.fields
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// True when every local field is exactly zero, so the spectrum carries
    /// the global spin-flip (Z2) degeneracy E(s) = E(-s).
    pub fn is_degenerate(&self) -> bool {
        self.fields.iter().all(|&h| h == 0.0)
    }

    /// Direct O(n^2) energy of one configuration.
    pub fn energy(&self, config: SpinConfiguration) -> f64 {
        debug_assert!(config.index() < self.state_count());
        let n = self.n;
        let mut coupling_term = 0.0;
        let mut field_term = 0.0;
        for i in 0..n {
            let si = config.spin(i);
            field_term += self.fields[i] * si;
            let row = &self.couplings[i * n..(i + 1) * n];
            let mut acc = 0.0;
            for (j, jij) in row.iter().enumerate() {
                acc += jij * config.spin(j);
            }
            coupling_term += si * acc;
        }
        0.5 * coupling_term + field_term
    }

    /// Energies of all 2^n configurations, enumerated in Gray-code order so
    /// each step is an O(n) single-flip update of cached local fields.
    pub fn full_spectrum(&self) -> EnergyTable {
        let n = self.n;
        let count = self.state_count();
        let mut values = vec![0.0f64; count];

        // Start at x = 0 (all spins -1).
        let mut spins = vec![-1.0f64; n];
        let mut local = vec![0.0f64; n]; // local[i] = sum_j J_ij s_j
        for i in 0..n {
            local[i] = -self.couplings[i * n..(i + 1) * n].iter().sum::<f64>();
        }
        let mut e = self.energy(SpinConfiguration(0));
        values[0] = e;

        for k in 1..count {
            let b = k.trailing_zeros() as usize; // bit flipped between gray(k-1) and gray(k)
            let s_new = -spins[b];
            e += -2.0 * spins[b] * (local[b] + self.fields[b]);
            spins[b] = s_new;
            let row = &self.couplings[b * n..(b + 1) * n];
            for (i, jbi) in row.iter().enumerate() {
                local[i] += 2.0 * s_new * jbi;
            }
            values[k ^ (k >> 1)] = e;
        }

        EnergyTable::from_values(values)
    }

    /// Largest singular value of the coupling matrix, by power iteration on
    /// J^T J to relative tolerance 1e-10.
    pub fn spectral_norm(&self) -> f64 {
        let n = self.n;
        if self.couplings.iter().all(|&v| v == 0.0) {
            return 0.0;
        }
        let apply = |v: &[f64], out: &mut [f64]| {
            for i in 0..n {
                let row = &self.couplings[i * n..(i + 1) * n];
                out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
            }
        };

        // Deterministic starts; fall back to basis vectors if one lands in
        // the kernel of J.
        let mut starts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        starts.push((0..n).map(|i| 1.0 + 1e-3 * i as f64).collect());
        for k in 0..n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            starts.push(e);
        }

        let mut jv = vec![0.0; n];
        let mut bv = vec![0.0; n];
        for start in starts {
            let mut v = start;
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            let mut prev = 0.0f64;
            for _ in 0..50_000 {
                apply(&v, &mut jv);
                apply(&jv, &mut bv);
                let lambda = bv.iter().map(|x| x * x).sum::<f64>().sqrt();
                if lambda == 0.0 {
                    break; // v in the kernel of B; try the next start
                }
                bv.iter().zip(v.iter_mut()).for_each(|(b, x)| *x = b / lambda);
                if (lambda - prev).abs() <= 1e-14 + 1e-10 * lambda {
                    return lambda.sqrt();
                }
                prev = lambda;
            }
            if prev > 0.0 {
                return prev.sqrt();
            }
        }
        0.0
    }
}

/// Exhaustive energy table with cached extremes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyTable {
    values: Vec<f64>,
    min: f64,
    max: f64,
    mean: f64,
    min_index: usize,
    max_index: usize,
}

impl EnergyTable {
    fn from_values(values: Vec<f64>) -> Self {
        assert!(!values.is_empty() && values.len().is_power_of_two());
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut min_index = 0;
        let mut max_index = 0;
        let mut sum = 0.0;
        for (i, &v) in values.iter().enumerate() {
            sum += v;
            if v < min {
                min = v;
                min_index = i;
            }
            if v > max {
                max = v;
                max_index = i;
            }
        }
        let mean = sum / values.len() as f64;
        EnergyTable { values, min, max, mean, min_index, max_index }
    }

    pub fn n(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, config: SpinConfiguration) -> f64 {
        self.values[config.index()]
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Energy spread E_max - E_min.
    pub fn range(&self) -> f64 {
        self.max - self.min
    }

    /// A minimum-energy configuration (the lowest-index one).
    pub fn ground_state(&self) -> SpinConfiguration {
        SpinConfiguration(self.min_index)
    }

    /// A maximum-energy configuration (the lowest-index one).
    pub fn highest_state(&self) -> SpinConfiguration {
        SpinConfiguration(self.max_index)
    }
}

fn validate_generator_args(n: usize, density: f64) -> Result<()> {
    if n > MAX_QUBITS {
        return Err(Error::SizeLimit { what: "generator", n, max: MAX_QUBITS });
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("generator needs n >= 2, got {n}")));
    }
    if !density.is_finite() || density <= 0.0 || density > 1.0 {
        return Err(Error::InvalidArgument(format!("density must be in (0, 1], got {density}")));
    }
    Ok(())
}

/// Draws the random symmetric weight matrix shared by the QUBO and MaxCut
/// families: each unordered pair {i, j} is present with probability
/// `density`, with a standard-normal weight.
fn draw_weights(n: usize, density: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng::from_seed(seed);
    let mut q = vec![0.0f64; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let present = rng.random::<f64>() < density;
            if present {
                let w: f64 = rng.sample(StandardNormal);
                q[i * n + j] = w;
                q[j * n + i] = w;
            }
        }
    }
    q
}

/// Random QUBO instance: the binary objective `2 * x^T Q x` in Ising form.
/// Couplings are Q itself, fields are the row sums of Q, and
/// `offset = -1/2 * sum(Q)` so that `2 x^T Q x + offset = energy(s(x))`.
pub fn generate_qubo(n: usize, density: f64, seed: u64) -> Result<IsingInstance> {
    validate_generator_args(n, density)?;
    let q = draw_weights(n, density, seed);
    let fields: Vec<f64> = (0..n).map(|j| (0..n).map(|i| q[i * n + j]).sum()).collect();
    let total: f64 = q.iter().sum();
    let mut instance = IsingInstance::new(n, q, fields, -0.5 * total)?;
    instance.generator = Some(GeneratorMetadata {
        family: "qubo".into(),
        density: Some(density),
        seed: Some(seed),
        rng_name: Some(rng::RNG_NAME.into()),
    });
    Ok(instance)
}

/// Random MaxCut instance: the cut objective `-2 sum_ij x_i Q_ij (1 - x_j)`
/// in Ising form. Fields cancel exactly, leaving the Z2-degenerate
/// `E = 1/2 s^T Q s` with `offset = +1/2 * sum(Q)`. The weight matrix drawing
/// matches [`generate_qubo`], so equal seeds give equal graphs. At density 1
/// this is a Sherrington-Kirkpatrick model.
pub fn generate_maxcut(n: usize, density: f64, seed: u64) -> Result<IsingInstance> {
    validate_generator_args(n, density)?;
    let q = draw_weights(n, density, seed);
    let total: f64 = q.iter().sum();
    let mut instance = IsingInstance::new(n, q, vec![0.0; n], 0.5 * total)?;
    instance.generator = Some(GeneratorMetadata {
        family: "maxcut".into(),
        density: Some(density),
        seed: Some(seed),
        rng_name: Some(rng::RNG_NAME.into()),
    });
    Ok(instance)
}

/// Single-spin instance E = (delta/2) sigma^z, the minimal system whose QAOA
/// output probabilities have an exact closed form.
pub fn two_level(delta: f64) -> Result<IsingInstance> {
    if !delta.is_finite() || delta == 0.0 {
        return Err(Error::InvalidArgument(format!("two-level splitting must be nonzero, got {delta}")));
    }
    let mut instance = IsingInstance::new(1, vec![0.0], vec![0.5 * delta], 0.0)?;
    instance.generator = Some(GeneratorMetadata {
        family: "two_level".into(),
        density: None,
        seed: None,
        rng_name: None,
    });
    Ok(instance)
}

/// Approximation ratio (E_max - achieved) / (E_max - E_min) of an energy that
/// belongs to the spectrum. Energies between levels are rejected: the ratio
/// grades solutions, and every solution has a spectrum energy.
pub fn approximation_ratio(table: &EnergyTable, achieved: f64) -> Result<f64> {
    let range = table.range();
    if range == 0.0 {
        return Err(Error::FlatSpectrum { energy: table.min(), count: table.len() });
    }
    let tol = 1e-9 * range.max(1.0);
    let in_interval = achieved >= table.min() - tol && achieved <= table.max() + tol;
    let member = in_interval && table.values().iter().any(|&v| (v - achieved).abs() <= tol);
    if !member {
        return Err(Error::EnergyNotInSpectrum { achieved, min: table.min(), max: table.max() });
    }
    Ok(((table.max() - achieved) / range).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pair_instance(j: f64) -> IsingInstance {
        IsingInstance::new(2, vec![0.0, j, j, 0.0], vec![0.0, 0.0], 0.0).unwrap()
    }

    #[test]
    fn energy_hand_evaluated_cases() {
        // Two coupled spins, J01 = 1: E = s0 * s1.
        let inst = pair_instance(1.0);
        assert_eq!(inst.energy(SpinConfiguration(0b00)), 1.0);
        assert_eq!(inst.energy(SpinConfiguration(0b01)), -1.0);
        assert_eq!(inst.energy(SpinConfiguration(0b10)), -1.0);
        assert_eq!(inst.energy(SpinConfiguration(0b11)), 1.0);

        // Zero Hamiltonian.
        let zero = IsingInstance::new(3, vec![0.0; 9], vec![0.0; 3], 0.0).unwrap();
        assert_eq!(zero.energy(SpinConfiguration(0b101)), 0.0);

        // Two-level splitting: bit 0 clear means s = -1.
        let tl = two_level(1.0).unwrap();
        assert_eq!(tl.energy(SpinConfiguration(0)), -0.5);
        assert_eq!(tl.energy(SpinConfiguration(1)), 0.5);
    }

    #[test]
    fn construction_rejects_bad_shapes() {
        assert!(IsingInstance::new(2, vec![0.0; 3], vec![0.0; 2], 0.0).is_err());
        assert!(IsingInstance::new(2, vec![0.0, 1.0, 2.0, 0.0], vec![0.0; 2], 0.0).is_err());
        assert!(IsingInstance::new(2, vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 2], 0.0).is_err());
        assert!(IsingInstance::new(2, vec![0.0; 4], vec![f64::NAN, 0.0], 0.0).is_err());
        assert!(IsingInstance::new(25, vec![0.0; 625], vec![0.0; 25], 0.0).is_err());
        assert!(IsingInstance::new(0, vec![], vec![], 0.0).is_err());
    }

    #[test]
    fn spectrum_matches_hand_cases() {
        let tl = two_level(1.0).unwrap().full_spectrum();
        assert_eq!(tl.values(), &[-0.5, 0.5]);
        assert_eq!(tl.ground_state(), SpinConfiguration(0));

        let pair = pair_instance(1.0).full_spectrum();
        assert_eq!(pair.values(), &[1.0, -1.0, -1.0, 1.0]);
        assert_eq!(pair.min(), -1.0);
        assert_eq!(pair.max(), 1.0);
        assert_eq!(pair.range(), 2.0);
    }

    #[test]
    fn spectrum_agrees_with_direct_energy() {
        let inst = generate_qubo(8, 1.0, 11).unwrap();
        let table = inst.full_spectrum();
        let scale = table.range().max(1.0);
        for x in 0..inst.state_count() {
            let direct = inst.energy(SpinConfiguration(x));
            assert!(
                (table.values()[x] - direct).abs() <= 1e-11 * scale,
                "state {x}: {} vs {direct}",
                table.values()[x]
            );
        }
    }

    #[test]
    fn spectrum_mean_is_zero() {
        for seed in [1, 2, 3] {
            let table = generate_qubo(10, 1.0, seed).unwrap().full_spectrum();
            assert!(table.mean().abs() <= 1e-12 * table.range().max(1.0));
        }
    }

    #[test]
    fn qubo_structure() {
        let n = 6;
        let inst = generate_qubo(n, 1.0, 5).unwrap();
        // Fields are the row sums of the couplings.
        for j in 0..n {
            let row: f64 = (0..n).map(|i| inst.coupling(i, j)).sum();
            assert!((inst.field(j) - row).abs() < 1e-15);
        }
        // Offset is minus half the total coupling weight.
        let total: f64 = inst.couplings().iter().sum();
        assert!((inst.offset() + 0.5 * total).abs() < 1e-15);
        // Density 1 fills every off-diagonal pair.
        for i in 0..n {
            for j in 0..n {
                assert_eq!(inst.coupling(i, j) != 0.0, i != j);
            }
        }
        assert!(!inst.is_degenerate());
        let meta = inst.generator.as_ref().unwrap();
        assert_eq!(meta.family, "qubo");
        assert_eq!(meta.seed, Some(5));
    }

    #[test]
    fn qubo_binary_objective_round_trip() {
        let n = 7;
        let inst = generate_qubo(n, 0.8, 123).unwrap();
        for x in [0usize, 1, 37, 100, 127] {
            let config = SpinConfiguration(x);
            // binary objective 2 x^T Q x with Q = couplings
            let mut quad = 0.0;
            for i in 0..n {
                for j in 0..n {
                    quad += (config.bit(i) as f64) * inst.coupling(i, j) * (config.bit(j) as f64);
                }
            }
            let binary = 2.0 * quad;
            assert!(
                (binary + inst.offset() - inst.energy(config)).abs() < 1e-10,
                "round trip failed at x = {x}"
            );
        }
    }

    #[test]
    fn maxcut_is_degenerate_and_matches_cut_objective() {
        let n = 6;
        let inst = generate_maxcut(n, 1.0, 42).unwrap();
        assert!(inst.is_degenerate());
        for x in 0..inst.state_count() {
            let config = SpinConfiguration(x);
            // cut objective -2 sum_ij x_i Q_ij (1 - x_j)
            let mut cut = 0.0;
            for i in 0..n {
                for j in 0..n {
                    cut += (config.bit(i) as f64) * inst.coupling(i, j) * (1.0 - config.bit(j) as f64);
                }
            }
            let binary = -2.0 * cut;
            assert!((binary + inst.offset() - inst.energy(config)).abs() < 1e-10);
            // Z2 degeneracy.
            let mirrored = inst.energy(config.complement(n));
            assert!((inst.energy(config) - mirrored).abs() < 1e-12);
        }
    }

    #[test]
    fn families_share_graphs_at_equal_seed() {
        let a = generate_qubo(8, 0.5, 9).unwrap();
        let b = generate_maxcut(8, 0.5, 9).unwrap();
        assert_eq!(a.couplings(), b.couplings());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = generate_qubo(10, 0.7, 77).unwrap();
        let b = generate_qubo(10, 0.7, 77).unwrap();
        assert_eq!(a, b);
        let c = generate_qubo(10, 0.7, 78).unwrap();
        assert_ne!(a.couplings(), c.couplings());
    }

    #[test]
    fn generator_argument_validation() {
        assert!(generate_qubo(1, 1.0, 0).is_err());
        assert!(generate_qubo(4, 0.0, 0).is_err());
        assert!(generate_qubo(4, 1.5, 0).is_err());
        assert!(matches!(
            generate_qubo(30, 1.0, 0),
            Err(Error::SizeLimit { n: 30, .. })
        ));
    }

    #[test]
    fn two_level_spectra() {
        assert_eq!(two_level(1.0).unwrap().full_spectrum().values(), &[-0.5, 0.5]);
        assert_eq!(two_level(2.0).unwrap().full_spectrum().values(), &[-1.0, 1.0]);
        assert_eq!(two_level(-1.0).unwrap().full_spectrum().values(), &[0.5, -0.5]);
        assert!(two_level(0.0).is_err());
    }

    #[test]
    fn approximation_ratio_extremes_and_guards() {
        let table = generate_qubo(6, 1.0, 3).unwrap().full_spectrum();
        assert_eq!(approximation_ratio(&table, table.min()).unwrap(), 1.0);
        assert_eq!(approximation_ratio(&table, table.max()).unwrap(), 0.0);

        let tl = two_level(1.0).unwrap().full_spectrum();
        // 0 lies between the two levels: not a spectrum energy.
        assert!(matches!(
            approximation_ratio(&tl, 0.0),
            Err(Error::EnergyNotInSpectrum { .. })
        ));

        let flat = IsingInstance::new(2, vec![0.0; 4], vec![0.0; 2], 0.0)
            .unwrap()
            .full_spectrum();
        assert!(matches!(approximation_ratio(&flat, 0.0), Err(Error::FlatSpectrum { .. })));
    }

    #[test]
    fn spectral_norm_cases() {
        let swap = pair_instance(1.0);
        assert!((swap.spectral_norm() - 1.0).abs() < 1e-9);

        let zero = IsingInstance::new(3, vec![0.0; 9], vec![0.0; 3], 0.0).unwrap();
        assert_eq!(zero.spectral_norm(), 0.0);
    }

    #[test]
    fn spectral_norm_matches_dense_eigensolver() {
        for seed in [1u64, 2, 3, 4, 5] {
            let inst = generate_maxcut(8, 1.0, seed).unwrap();
            let m = nalgebra::DMatrix::from_row_slice(8, 8, inst.couplings());
            let oracle = m
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .map(|v| v.abs())
                .fold(0.0f64, f64::max);
            assert!(
                (inst.spectral_norm() - oracle).abs() <= 1e-8 * oracle.max(1.0),
                "seed {seed}: {} vs {oracle}",
                inst.spectral_norm()
            );
        }
    }

    #[test]
    fn serialization_round_trip() {
        let inst = generate_qubo(5, 0.9, 21).unwrap();
        let json = serde_json::to_string(&inst).unwrap();
        let back: IsingInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(inst, back);
        // Key layout stays flat and row-major.
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(value["n"], 5);
        assert_eq!(value["couplings"].as_array().unwrap().len(), 25);
        assert_eq!(value["generator"]["family"], "qubo");
    }

    proptest! {
        #[test]
        fn spectrum_mean_zero_for_any_generated_instance(
            seed in 0u64..1000,
            n in 2usize..9,
            density in 0.2f64..=1.0,
            qubo in proptest::bool::ANY,
        ) {
            let inst = if qubo {
                generate_qubo(n, density, seed).unwrap()
            } else {
                generate_maxcut(n, density, seed).unwrap()
            };
            let table = inst.full_spectrum();
            prop_assert!(table.mean().abs() <= 1e-10 * table.range().max(1.0));
        }

        #[test]
        fn degenerate_energy_is_flip_symmetric(seed in 0u64..500, n in 2usize..8, x in 0usize..128) {
            let inst = generate_maxcut(n, 1.0, seed).unwrap();
            let x = x % inst.state_count();
            let config = SpinConfiguration(x);
            let e = inst.energy(config);
            let em = inst.energy(config.complement(n));
            prop_assert!((e - em).abs() <= 1e-12 * e.abs().max(1.0));
        }
    }
}
