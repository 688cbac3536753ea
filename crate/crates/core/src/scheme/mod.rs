//! The exponentially fitted edge-averaged scheme.
//!
//! On every element `T` and edge `E = (q_i, q_j)` with `tau = q_i - q_j`,
//!
//! ```text
//! a_T(u, v) = sum_E omega_E(D) * harm_E * (e^psi(q_i) u_i - e^psi(q_j) u_j) * (v_i - v_j)
//! ```
//!
//! where `psi` is the edge potential of `beta = D^-1 b` and `harm_E` the
//! harmonic average of `e^psi` along `E`. The global form adds the reaction
//! mass term and `-int b.n u v` on outflow Neumann faces.

mod assemble;
mod bernoulli;
mod edge;
mod local;

pub use assemble::{assemble, assemble_unconstrained, interpolate, SparseSystem};
pub use bernoulli::bernoulli;
pub use edge::{
    edge_exponential_constant, edge_exponential_data, edge_weights, EdgeExponential, EdgeQuadrature, EdgeRule, Gauge,
};
pub use local::{edge_data, local_eafe_matrix, EdgeData, LocalMatrix};

/// How the edge potential gauge is fixed during assembly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaugeChoice {
    MaxShift,
    Tail,
    /// Independent pseudo-random offsets in `[-amplitude, amplitude]` per
    /// (element, edge), reproducible from `seed`.
    Random { seed: u64, amplitude: f64 },
}

impl GaugeChoice {
    pub(crate) fn for_edge(self, cell: usize, edge: usize) -> Gauge {
        match self {
            GaugeChoice::MaxShift => Gauge::MaxShift,
            GaugeChoice::Tail => Gauge::Tail,
            GaugeChoice::Random { seed, amplitude } => {
                let h = splitmix64(seed ^ ((cell as u64) << 3 | edge as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                let unit = (h >> 11) as f64 / (1u64 << 53) as f64;
                Gauge::Offset(amplitude * (2.0 * unit - 1.0))
            }
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct AssemblyOptions {
    /// Rule for the edge potential and harmonic average.
    pub edge_rule: EdgeRule,
    /// Simplex rule degree for `omega_E` when `D` varies.
    pub omega_degree: usize,
    /// Simplex rule degree for the reaction and source terms.
    pub mass_degree: usize,
    /// Face rule degree for the Neumann terms.
    pub face_degree: usize,
    /// `None`: closed-form Bernoulli weights exactly when `D` and `b` are
    /// constant fields. `Some(true)`: `beta` taken at each element barycenter
    /// and treated as constant. `Some(false)`: always use quadrature.
    pub constant_beta: Option<bool>,
    pub gauge: GaugeChoice,
    /// Merge element contributions in element order.
    pub deterministic: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            edge_rule: EdgeRule::default(),
            omega_degree: 1,
            mass_degree: 2,
            face_degree: 2,
            constant_beta: None,
            gauge: GaugeChoice::MaxShift,
            deterministic: true,
        }
    }
}
