//! Restart schedules.

/// The Luby sequence 1, 1, 2, 1, 1, 2, 4, 1, ... (1-based).
pub fn luby(i: u64) -> u64 {
    assert!(i >= 1, "the Luby sequence is 1-based");
    // Find the smallest k with 2^k - 1 >= i.
    let mut k = 1u32;
    while (1u64 << k) - 1 < i {
        k += 1;
    }
    let mut i = i;
    loop {
        if i == (1u64 << k) - 1 {
            return 1u64 << (k - 1);
        }
        // i lies in the repeated prefix of length 2^(k-1) - 1
        i -= (1u64 << (k - 1)) - 1;
        k = 1;
        while (1u64 << k) - 1 < i {
            k += 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RestartPolicy {
    /// Restart after `base * luby(n)` conflicts.
    Luby { base: u64 },
    /// First restart after `first` conflicts, each interval multiplied by `factor`.
    Geometric { first: u64, factor: f64 },
    Never,
}

impl Default for RestartPolicy {
    fn default() -> Self {
        RestartPolicy::Luby { base: 32 }
    }
}

impl RestartPolicy {
    /// Conflicts allowed before restart number `n` (0-based), or `None` to never restart.
    pub fn interval(&self, n: u64) -> Option<u64> {
        match *self {
            RestartPolicy::Luby { base } => Some(base.saturating_mul(luby(n + 1))),
            RestartPolicy::Geometric { first, factor } => {
                Some((first as f64 * factor.powi(n.min(i32::MAX as u64) as i32)).min(u64::MAX as f64) as u64)
            }
            RestartPolicy::Never => None,
        }
    }
}
