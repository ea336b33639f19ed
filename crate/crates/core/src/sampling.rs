//! Randomized per-antenna acquisition and fusion-center assembly.
//!
//! Receiver `l` keeps `L` of the `n_cols` entries of its row (matched-filter
//! outputs in scheme I, Nyquist-time samples in scheme II). The indices are
//! drawn from a seed `s_l`; the receiver forwards its samples with `s_l` and
//! the fusion center regenerates the index set to place them.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{shape, CMatrix};
use crate::rng::{mix64, SeededRng};
use crate::signal_model::SamplingScheme;

/// Seed for receiver `antenna` at pulse `pulse`, derived from a master seed.
///
/// Three chained SplitMix64 finalizer rounds: `mix(mix(mix(master) ^ l) ^ q)`.
/// The finalizer is a bijection, so distinct `l` (or `q`) never collide.
pub fn derive_row_seed(master_seed: u64, antenna: u64, pulse: u64) -> u64 {
    mix64(mix64(mix64(master_seed) ^ antenna) ^ pulse)
}

/// Uniform `count`-subset of `0..universe` via a partial Fisher–Yates shuffle, sorted.
pub fn draw_indices(seed: u64, universe: usize, count: usize) -> Result<Vec<usize>> {
    if count > universe {
        return Err(Error::Domain(format!(
            "cannot draw {count} distinct indices from {universe}"
        )));
    }
    let mut rng = SeededRng::new(seed);
    let mut pool: Vec<usize> = (0..universe).collect();
    for j in 0..count {
        let k = j + rng.below((universe - j) as u64) as usize;
        pool.swap(j, k);
    }
    pool.truncate(count);
    pool.sort_unstable();
    Ok(pool)
}

/// Observed index set `𝒥^l` and the seed that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskRow {
    pub seed: u64,
    pub indices: Vec<usize>,
}

/// The sampling pattern `Ω`, stored row by row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObservationMask {
    pub n_rows: usize,
    pub n_cols: usize,
    pub per_row: usize,
    pub scheme: SamplingScheme,
    pub rows: Vec<MaskRow>,
}

impl ObservationMask {
    /// Draws `per_row` indices for each row from seeds `derive_row_seed(master, l, pulse)`.
    pub fn draw(
        n_rows: usize,
        n_cols: usize,
        per_row: usize,
        master_seed: u64,
        pulse: u64,
        scheme: SamplingScheme,
    ) -> Result<Self> {
        let rows = (0..n_rows)
            .map(|l| {
                let seed = derive_row_seed(master_seed, l as u64, pulse);
                draw_indices(seed, n_cols, per_row).map(|indices| MaskRow { seed, indices })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ObservationMask {
            n_rows,
            n_cols,
            per_row,
            scheme,
            rows,
        })
    }

    /// Every entry observed (seeds are zero and unused).
    pub fn full(n_rows: usize, n_cols: usize, scheme: SamplingScheme) -> Self {
        let rows = (0..n_rows)
            .map(|_| MaskRow {
                seed: 0,
                indices: (0..n_cols).collect(),
            })
            .collect();
        ObservationMask {
            n_rows,
            n_cols,
            per_row: n_cols,
            scheme,
            rows,
        }
    }

    pub fn empty(n_rows: usize, n_cols: usize, scheme: SamplingScheme) -> Self {
        let rows = (0..n_rows)
            .map(|_| MaskRow {
                seed: 0,
                indices: Vec::new(),
            })
            .collect();
        ObservationMask {
            n_rows,
            n_cols,
            per_row: 0,
            scheme,
            rows,
        }
    }

    /// `m = |Ω|`.
    pub fn count(&self) -> usize {
        self.rows.iter().map(|r| r.indices.len()).sum()
    }

    /// Occupancy ratio `p = |Ω| / (n_rows · n_cols)`.
    pub fn occupancy(&self) -> f64 {
        self.count() as f64 / (self.n_rows * self.n_cols) as f64
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.rows
            .get(row)
            .is_some_and(|r| r.indices.binary_search(&col).is_ok())
    }

    /// All observed `(row, col)` pairs in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(l, r)| r.indices.iter().map(move |&j| (l, j)))
    }

    /// `P_Ω(x)`: keeps observed entries, zeroes the rest.
    pub fn project(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(x.nrows(), x.ncols());
        for (i, j) in self.entries() {
            out[(i, j)] = x[(i, j)];
        }
        out
    }

    /// One line per row: `l,s_l,L,j_1,...,j_L`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("row,seed,count,indices\n");
        for (l, row) in self.rows.iter().enumerate() {
            let _ = write!(out, "{l},{},{}", row.seed, row.indices.len());
            for j in &row.indices {
                let _ = write!(out, ",{j}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`ObservationMask::to_csv`] output back into a mask.
    pub fn from_csv(text: &str, n_cols: usize, scheme: SamplingScheme) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<u64> = line
                .split(',')
                .map(|f| {
                    f.trim()
                        .parse::<u64>()
                        .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
                })
                .collect::<Result<_>>()?;
            if fields.len() < 3 || fields[0] as usize != rows.len() {
                return Err(Error::Parse(format!("line {}: malformed row", lineno + 1)));
            }
            let count = fields[2] as usize;
            let indices: Vec<usize> = fields[3..].iter().map(|&j| j as usize).collect();
            if indices.len() != count || indices.iter().any(|&j| j >= n_cols) {
                return Err(Error::Parse(format!("line {}: bad index list", lineno + 1)));
            }
            rows.push(MaskRow {
                seed: fields[1],
                indices,
            });
        }
        let per_row = rows.first().map_or(0, |r| r.indices.len());
        Ok(ObservationMask {
            n_rows: rows.len(),
            n_cols,
            per_row,
            scheme,
            rows,
        })
    }
}

/// A partially observed matrix: values outside `Ω` are stored as zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedMatrix {
    pub values: CMatrix,
    pub mask: ObservationMask,
}

impl ObservedMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }
}

/// Applies the observation operator `P_Ω` to a full matrix.
pub fn observe(full: &CMatrix, mask: &ObservationMask) -> Result<ObservedMatrix> {
    if full.nrows() != mask.n_rows || full.ncols() != mask.n_cols {
        return Err(Error::dims(
            format!("{}x{}", mask.n_rows, mask.n_cols),
            shape(full),
        ));
    }
    Ok(ObservedMatrix {
        values: mask.project(full),
        mask: mask.clone(),
    })
}

/// What receiver `antenna` forwards to the fusion center for one pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPacket {
    pub antenna: usize,
    pub seed: u64,
    pub samples: Vec<Complex64>,
}

/// Receiver side: each antenna samples its own row at its mask indices.
pub fn antenna_packets(full: &CMatrix, mask: &ObservationMask) -> Result<Vec<AntennaPacket>> {
    if full.nrows() != mask.n_rows || full.ncols() != mask.n_cols {
        return Err(Error::dims(
            format!("{}x{}", mask.n_rows, mask.n_cols),
            shape(full),
        ));
    }
    Ok(mask
        .rows
        .iter()
        .enumerate()
        .map(|(l, row)| AntennaPacket {
            antenna: l,
            seed: row.seed,
            samples: row.indices.iter().map(|&j| full[(l, j)]).collect(),
        })
        .collect())
}

/// Fusion-center side: regenerates each `𝒥^l` from its seed and scatters the samples.
pub fn assemble_fusion_matrix(
    packets: &[AntennaPacket],
    scheme: SamplingScheme,
    n_rows: usize,
    n_cols: usize,
    per_row: usize,
) -> Result<ObservedMatrix> {
    let mut slots: Vec<Option<&AntennaPacket>> = vec![None; n_rows];
    for p in packets {
        let slot = slots
            .get_mut(p.antenna)
            .ok_or_else(|| Error::Protocol(format!("antenna {} outside 0..{n_rows}", p.antenna)))?;
        if slot.is_some() {
            return Err(Error::Protocol(format!(
                "duplicate packet from antenna {}",
                p.antenna
            )));
        }
        if p.samples.len() != per_row {
            return Err(Error::Protocol(format!(
                "antenna {} sent {} samples, expected {per_row}",
                p.antenna,
                p.samples.len()
            )));
        }
        *slot = Some(p);
    }
    let mut values = CMatrix::zeros(n_rows, n_cols);
    let mut rows = Vec::with_capacity(n_rows);
    for (l, slot) in slots.into_iter().enumerate() {
        let p = slot.ok_or_else(|| Error::Protocol(format!("no packet from antenna {l}")))?;
        let indices = draw_indices(p.seed, n_cols, per_row)?;
        for (&j, &x) in indices.iter().zip(&p.samples) {
            values[(l, j)] = x;
        }
        rows.push(MaskRow {
            seed: p.seed,
            indices,
        });
    }
    Ok(ObservedMatrix {
        values,
        mask: ObservationMask {
            n_rows,
            n_cols,
            per_row,
            scheme,
            rows,
        },
    })
}
