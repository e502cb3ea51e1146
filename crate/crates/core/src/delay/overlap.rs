use super::DelaySchedule;

/// Per-coordinate overlap counts mᵢ(k, j(k)): how many of the updates in
/// steps j(k), …, k−1 (those not visible to the read at step k) touch i.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapStats {
    /// Mean of mᵢ(k, j(k)) over steps, per coordinate.
    pub mean_overlap: Vec<f64>,
    /// Largest mᵢ(k, j(k)) seen, per coordinate.
    pub max_overlap: Vec<u32>,
    /// Fraction of updates touching each coordinate.
    pub density: Vec<f64>,
    /// Mean k − j(k).
    pub mean_delay: f64,
    pub samples: usize,
    /// Smallest Δ with E_i‖x‖²_{supp i} ≤ Δ‖x‖², i.e. the largest density.
    pub delta: f64,
}

impl OverlapStats {
    /// Average of `mean_overlap` over coordinates.
    pub fn mean_over_coords(&self) -> f64 {
        self.mean_overlap.iter().sum::<f64>() / self.mean_overlap.len().max(1) as f64
    }

    pub fn mean_density(&self) -> f64 {
        self.density.iter().sum::<f64>() / self.density.len().max(1) as f64
    }
}

/// `supports[k]` lists the coordinates written by update k.
pub fn measure_overlap(
    supports: &[Vec<usize>],
    n_coords: usize,
    schedule: &DelaySchedule,
) -> OverlapStats {
    let steps = supports.len().min(schedule.horizon());
    let mut total = vec![0u64; n_coords];
    let mut max_overlap = vec![0u32; n_coords];
    let mut hits = vec![0u64; n_coords];
    let mut scratch = vec![0u32; n_coords];
    let mut touched = Vec::new();
    let mut delay_sum = 0u64;
    for k in 0..steps {
        for &i in &supports[k] {
            hits[i] += 1;
        }
        let j = schedule.j(k).min(k);
        delay_sum += (k - j) as u64;
        for s in &supports[j..k] {
            for &i in s {
                if scratch[i] == 0 {
                    touched.push(i);
                }
                scratch[i] += 1;
            }
        }
        for &i in &touched {
            total[i] += scratch[i] as u64;
            max_overlap[i] = max_overlap[i].max(scratch[i]);
            scratch[i] = 0;
        }
        touched.clear();
    }
    let denom = steps.max(1) as f64;
    let density: Vec<f64> = hits.iter().map(|&h| h as f64 / denom).collect();
    OverlapStats {
        mean_overlap: total.iter().map(|&t| t as f64 / denom).collect(),
        max_overlap,
        delta: density.iter().cloned().fold(0.0, f64::max),
        density,
        mean_delay: delay_sum as f64 / denom,
        samples: steps,
    }
}
