//! Statevector simulation of QAOA on Ising spectra.
//!
//! The circuit is `Rx(theta)^(x n) * exp(-i gamma E) * H^(x n) |0>` per layer:
//! a diagonal phase in the computational basis followed by the product
//! single-qubit mixer `Rx(theta) = [[cos t, -i sin t], [-i sin t, cos t]]`.
//! Since the phase is diagonal, the exhaustive [`EnergyTable`] is the whole
//! Hamiltonian as far as the engine is concerned.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ising::{EnergyTable, IsingInstance, SpinConfiguration, MAX_QUBITS};
use crate::rng;

/// Per-layer angles; `gammas[k]` is the phase angle and `thetas[k]` the mixer
/// angle of layer k.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AngleSchedule {
    gammas: Vec<f64>,
    thetas: Vec<f64>,
}

impl AngleSchedule {
    pub fn new(gammas: Vec<f64>, thetas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() || gammas.len() != thetas.len() {
            return Err(Error::InvalidArgument(format!(
                "schedule needs equal, nonzero layer counts, got {} gammas and {} thetas",
                gammas.len(),
                thetas.len()
            )));
        }
        if gammas.iter().chain(&thetas).any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite angle".into()));
        }
        Ok(AngleSchedule { gammas, thetas })
    }

    /// Single-layer schedule.
    pub fn single(gamma: f64, theta: f64) -> Self {
        AngleSchedule { gammas: vec![gamma], thetas: vec![theta] }
    }

    pub fn layers(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
}

/// Dense n-qubit state, amplitudes indexed by configuration.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Uniform superposition |+>^n, the QAOA input state.
    pub fn plus_state(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("state needs n >= 1".into()));
        }
        if n > MAX_QUBITS {
            return Err(Error::SizeLimit { what: "StateVector", n, max: MAX_QUBITS });
        }
        let len = 1usize << n;
        let amp = Complex64::new(1.0 / (len as f64).sqrt(), 0.0);
        Ok(StateVector { n, amplitudes: vec![amp; len] })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, config: SpinConfiguration) -> Complex64 {
        self.amplitudes[config.index()]
    }

    /// Diagonal phase layer: amp[x] *= exp(-i gamma E_x).
    pub fn apply_phase(&mut self, table: &EnergyTable, gamma: f64) -> Result<()> {
        if table.len() != self.len() {
            return Err(Error::DimensionMismatch { left: self.len(), right: table.len() });
        }
        for (amp, &e) in self.amplitudes.iter_mut().zip(table.values()) {
            *amp *= Complex64::from_polar(1.0, -gamma * e);
        }
        Ok(())
    }

    /// Product mixer layer: Rx(theta) on every qubit.
    pub fn apply_mixer(&mut self, theta: f64) {
        let c = theta.cos();
        let ms = Complex64::new(0.0, -theta.sin()); // -i sin(theta)
        for q in 0..self.n {
            let stride = 1usize << q;
            let mut base = 0;
            while base < self.amplitudes.len() {
                for i in base..base + stride {
                    let a = self.amplitudes[i];
                    let b = self.amplitudes[i + stride];
                    self.amplitudes[i] = c * a + ms * b;
                    self.amplitudes[i + stride] = ms * a + c * b;
                }
                base += 2 * stride;
            }
        }
    }

    /// Outcome probabilities |amp|^2.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn total_probability(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Runs the full circuit for a schedule against a precomputed spectrum.
pub fn run_qaoa_with_spectrum(table: &EnergyTable, schedule: &AngleSchedule) -> Result<StateVector> {
    let mut state = StateVector::plus_state(table.n())?;
    for layer in 0..schedule.layers() {
        state.apply_phase(table, schedule.gammas()[layer])?;
        state.apply_mixer(schedule.thetas()[layer]);
    }
    Ok(state)
}

/// Convenience wrapper that enumerates the spectrum first.
pub fn run_qaoa(instance: &IsingInstance, schedule: &AngleSchedule) -> Result<StateVector> {
    run_qaoa_with_spectrum(&instance.full_spectrum(), schedule)
}

/// Energy expectation value sum_x |amp_x|^2 E_x.
pub fn mean_energy(state: &StateVector, table: &EnergyTable) -> Result<f64> {
    if table.len() != state.len() {
        return Err(Error::DimensionMismatch { left: state.len(), right: table.len() });
    }
    Ok(state
        .amplitudes()
        .iter()
        .zip(table.values())
        .map(|(a, &e)| a.norm_sqr() * e)
        .sum())
}

/// Draws measurement outcomes by inverse-CDF sampling, reproducible from the
/// seed.
pub fn sample(state: &StateVector, count: usize, seed: u64) -> Result<Vec<SpinConfiguration>> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    let mut cdf = Vec::with_capacity(state.len());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let mut rng = rng::from_seed(seed);
    let last = state.len() - 1;
    let total = cdf[last];
    let outcomes = (0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            SpinConfiguration(idx)
        })
        .collect();
    Ok(outcomes)
}

/// Search grid for the single-layer angle optimizer.
#[derive(Clone, Copy, Debug)]
pub struct GridSpec {
    pub gamma_points: usize,
    pub theta_points: usize,
    /// Half-width of the gamma search interval. When absent it starts from
    /// twice the spectral bound pi / (E_max - E_min) and doubles (up to four
    /// times) while the grid optimum keeps landing on the interval edge;
    /// the heuristic bound underestimates the optimal |gamma| on dense
    /// ensembles.
    pub gamma_max: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { gamma_points: 41, theta_points: 41, gamma_max: None }
    }
}

/// One evaluated angle pair.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct AngleSample {
    pub gamma: f64,
    pub theta: f64,
    pub mean_energy: f64,
}

/// Where the single-layer optimizer landed.
#[derive(Clone, Debug, Serialize)]
pub struct OptimizationResult {
    pub gamma_opt: f64,
    pub theta_opt: f64,
    pub mean_energy: f64,
    /// Final half-width of the gamma search interval.
    pub gamma_range: f64,
    /// Every evaluation made (grid sweeps, then simplex refinement).
    #[serde(skip)]
    pub trace: Vec<AngleSample>,
}

/// Minimizes single-layer <E> by a coarse grid sweep plus Nelder-Mead
/// refinement (absolute tolerance 1e-6 on the energy). Theta is searched on
/// the open interval (0, pi/2); every distribution the layer can produce
/// appears in that window up to exact sign symmetries of the circuit.
pub fn optimize_angles(table: &EnergyTable, grid: &GridSpec) -> Result<OptimizationResult> {
    if table.range() == 0.0 {
        return Err(Error::FlatSpectrum { energy: table.min(), count: table.len() });
    }
    if grid.gamma_points < 2 || grid.theta_points < 1 {
        return Err(Error::InvalidArgument("grid needs >= 2 gamma and >= 1 theta points".into()));
    }
    let mut trace = Vec::new();
    let mut eval = |gamma: f64, theta: f64| -> f64 {
        let state = run_qaoa_with_spectrum(table, &AngleSchedule::single(gamma, theta))
            .expect("sizes fixed by table");
        let e = mean_energy(&state, table).expect("sizes fixed by table");
        trace.push(AngleSample { gamma, theta, mean_energy: e });
        e
    };

    let spectral_bound = std::f64::consts::PI / table.range();
    let mut gamma_max = grid.gamma_max.unwrap_or(2.0 * spectral_bound);
    let extensions_allowed = grid.gamma_max.is_none();

    let mut best = (0.0f64, 0.0f64, f64::INFINITY);
    for extension in 0..=4 {
        let mut edge_hit = false;
        best = (0.0, 0.0, f64::INFINITY);
        for gi in 0..grid.gamma_points {
            let gamma = -gamma_max
                + 2.0 * gamma_max * gi as f64 / (grid.gamma_points - 1) as f64;
            for ti in 0..grid.theta_points {
                let theta = (ti as f64 + 0.5) * std::f64::consts::FRAC_PI_2
                    / grid.theta_points as f64;
                let e = eval(gamma, theta);
                if e < best.2 {
                    best = (gamma, theta, e);
                    edge_hit = gi == 0 || gi == grid.gamma_points - 1;
                }
            }
        }
        if !edge_hit || !extensions_allowed || extension == 4 {
            break;
        }
        gamma_max *= 2.0;
    }

    let gamma_step = 2.0 * gamma_max / (grid.gamma_points - 1) as f64;
    let theta_step = std::f64::consts::FRAC_PI_2 / grid.theta_points as f64;
    let refined = nelder_mead(
        |p| {
            let (gamma, theta) = (p[0], p[1]);
            if theta <= 0.0
                || theta >= std::f64::consts::FRAC_PI_2
                || gamma.abs() > 1.5 * gamma_max
            {
                return f64::INFINITY;
            }
            eval(gamma, theta)
        },
        [best.0, best.1],
        [0.5 * gamma_step, 0.5 * theta_step.min(best.1.min(std::f64::consts::FRAC_PI_2 - best.1))],
        1e-6,
        300,
    );
    let (point, value) = refined;
    let (gamma_opt, theta_opt, energy) =
        if value < best.2 { (point[0], point[1], value) } else { best };

    Ok(OptimizationResult { gamma_opt, theta_opt, mean_energy: energy, gamma_range: gamma_max, trace })
}

/// Two-parameter Nelder-Mead with standard coefficients. Returns the best
/// vertex once the simplex energy spread falls under `tol`.
fn nelder_mead(
    mut f: impl FnMut(&[f64; 2]) -> f64,
    start: [f64; 2],
    step: [f64; 2],
    tol: f64,
    max_iter: usize,
) -> ([f64; 2], f64) {
    let mut simplex: Vec<([f64; 2], f64)> = Vec::with_capacity(3);
    simplex.push((start, f(&start)));
    for d in 0..2 {
        let mut v = start;
        let s = if step[d] != 0.0 { step[d] } else { 1e-3 };
        v[d] += s;
        simplex.push((v, f(&v)));
    }

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[2].1 - simplex[0].1;
        if spread.is_finite() && spread < tol {
            break;
        }
        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let worst = simplex[2];
        let reflect = [
            centroid[0] + (centroid[0] - worst.0[0]),
            centroid[1] + (centroid[1] - worst.0[1]),
        ];
        let fr = f(&reflect);
        if fr < simplex[0].1 {
            let expand = [
                centroid[0] + 2.0 * (centroid[0] - worst.0[0]),
                centroid[1] + 2.0 * (centroid[1] - worst.0[1]),
            ];
            let fe = f(&expand);
            simplex[2] = if fe < fr { (expand, fe) } else { (reflect, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflect, fr);
        } else {
            let contract = [
                centroid[0] + 0.5 * (worst.0[0] - centroid[0]),
                centroid[1] + 0.5 * (worst.0[1] - centroid[1]),
            ];
            let fc = f(&contract);
            if fc < worst.1 {
                simplex[2] = (contract, fc);
            } else {
                // Shrink toward the best vertex.
                for k in 1..3 {
                    let v = [
                        simplex[0].0[0] + 0.5 * (simplex[k].0[0] - simplex[0].0[0]),
                        simplex[0].0[1] + 0.5 * (simplex[k].0[1] - simplex[0].0[1]),
                    ];
                    simplex[k] = (v, f(&v));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    (simplex[0].0, simplex[0].1)
}
