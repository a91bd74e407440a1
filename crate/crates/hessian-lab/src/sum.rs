//! Deterministic compensated summation.
//!
//! All grid reductions in this crate go through [`deterministic_sum`] or a
//! [`Neumaier`] accumulator: fixed-size chunks are summed with Neumaier
//! compensation and the chunk totals are combined pairwise in index order.
//! The result is a pure function of the value sequence — independent of
//! thread count or scheduling — so reports are bit-reproducible.

/// Chunk length for the deterministic reduction tree. Fixed: changing it
/// changes the bit pattern of every integral in every report.
pub const CHUNK: usize = 4096;

/// Neumaier (improved Kahan) compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sums a slice: Neumaier within `CHUNK`-sized blocks, pairwise over blocks.
pub fn deterministic_sum(values: &[f64]) -> f64 {
    let partials: Vec<f64> = values
        .chunks(CHUNK)
        .map(|c| {
            let mut acc = Neumaier::new();
            for &v in c {
                acc.add(v);
            }
            acc.value()
        })
        .collect();
    pairwise(&partials)
}

/// Pairwise (binary-tree) combination in index order.
pub fn pairwise(parts: &[f64]) -> f64 {
    match parts.len() {
        0 => 0.0,
        1 => parts[0],
        n => {
            let mid = n / 2;
            pairwise(&parts[..mid]) + pairwise(&parts[mid..])
        }
    }
}

/// Complex compensated accumulator built from two real ones.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierComplex {
    pub re: Neumaier,
    pub im: Neumaier,
}

impl NeumaierComplex {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: num_complex::Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> num_complex::Complex64 {
        num_complex::Complex64::new(self.re.value(), self.im.value())
    }
}

/// Streaming variant of [`deterministic_sum`] for totals too large to
/// materialize: same fixed chunking and pairwise combine, so the result is
/// bitwise identical to the slice version fed the same values in order.
pub struct ChunkedSum {
    parts: Vec<f64>,
    current: Neumaier,
    in_chunk: usize,
}

impl Default for ChunkedSum {
    fn default() -> Self {
        Self::new()
    }
}

impl ChunkedSum {
    pub fn new() -> Self {
        Self {
            parts: Vec::new(),
            current: Neumaier::new(),
            in_chunk: 0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        self.current.add(x);
        self.in_chunk += 1;
        if self.in_chunk == CHUNK {
            self.parts.push(self.current.value());
            self.current = Neumaier::new();
            self.in_chunk = 0;
        }
    }

    pub fn finish(mut self) -> f64 {
        if self.in_chunk > 0 {
            self.parts.push(self.current.value());
        }
        pairwise(&self.parts)
    }
}
