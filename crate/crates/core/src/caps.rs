/// Size limits for the exponential algorithms. Exceeding one yields
/// [`Error::SizeCapExceeded`](crate::Error::SizeCapExceeded) naming the cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Caps {
    /// Largest side length for the n!-term permanent.
    pub naive: usize,
    /// Largest side length for Ryser's formula.
    pub ryser: usize,
    /// Largest `m` for a single decomposition pass over S_m.
    pub birkhoff: usize,
    /// Largest `m` for exhaustive decomposition search.
    pub alldecomp_m: usize,
    /// Largest degree `M` for exhaustive decomposition search.
    pub alldecomp_degree: usize,
    /// Largest number of reduced block permutations to enumerate.
    pub reduced_specs: u64,
    /// Largest number of unrestricted block permutations to enumerate.
    pub full_specs: u64,
    /// Largest lift size `mM` for the symbolic lift permanent.
    pub lift_poly: usize,
    /// Largest lift size `mM` for the exhaustive injectivity check.
    pub inject: usize,
    /// Largest number of multinomial terms in the expansion of perm(θ)^M.
    pub power_terms: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            naive: 10,
            ryser: 30,
            birkhoff: 7,
            alldecomp_m: 5,
            alldecomp_degree: 12,
            reduced_specs: 1_000_000,
            full_specs: 1_000_000,
            lift_poly: 12,
            inject: 10,
            power_terms: 1_000_000,
        }
    }
}
