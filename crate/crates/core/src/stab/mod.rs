//! Stabilizer simulation with Pauli noise.

mod channel;
mod energy;
mod tableau;

pub use channel::{twirled_relaxation_channel, PauliChannel, RelaxationParams};
pub use energy::{
    energy_samples, energy_samples_tableau, ideal_energy, noisy_energy, summarize, trajectories_csv,
    EnergyEstimate, IdleSlot, NoiseMap, TrajectoryConfig,
};
pub use tableau::Tableau;
