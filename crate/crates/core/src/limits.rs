/// Budgets shared by every exponential search in the crate.
///
/// Each search checks its projected cost against the relevant field before
/// doing any work and fails with [`Error::ResourceLimit`](crate::Error)
/// instead of running away.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest number of candidate structures a single flat enumeration may visit.
    pub max_enumeration: u64,
    /// Largest number of members of `H_n` kept in memory for one `n`.
    pub max_members: usize,
    /// Largest number of candidate boxes a box search may consider.
    pub max_boxes: u64,
    /// Largest `m^(ℓ+1)` (the bit width of a joint type) a VC* search accepts.
    pub max_joint_bits: u32,
    /// Largest number of extension candidates tried while padding a witness.
    pub max_padding: u64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_enumeration: 1 << 26,
            max_members: 1 << 21,
            max_boxes: 1 << 22,
            max_joint_bits: 20,
            max_padding: 1 << 20,
        }
    }
}
