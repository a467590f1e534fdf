use nalgebra::DVector;

/// The growing store of simulated pairs shared by both search phases.
/// Pairs are only ever appended; nothing is removed or rewritten.
#[derive(Debug, Clone)]
pub struct SimArchive {
    thetas: Vec<DVector<f64>>,
    stats: Vec<DVector<f64>>,
    observed: DVector<f64>,
}

impl SimArchive {
    pub fn new(observed: DVector<f64>) -> Self {
        Self { thetas: Vec::new(), stats: Vec::new(), observed }
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    pub fn push(&mut self, theta: DVector<f64>, stat: DVector<f64>) {
        debug_assert_eq!(stat.len(), self.observed.len());
        self.thetas.push(theta);
        self.stats.push(stat);
    }

    pub fn theta(&self, i: usize) -> &DVector<f64> {
        &self.thetas[i]
    }

    pub fn stat(&self, i: usize) -> &DVector<f64> {
        &self.stats[i]
    }

    pub fn thetas(&self) -> &[DVector<f64>] {
        &self.thetas
    }

    pub fn stats(&self) -> &[DVector<f64>] {
        &self.stats
    }

    pub fn observed(&self) -> &DVector<f64> {
        &self.observed
    }

    pub fn dim_stat(&self) -> usize {
        self.observed.len()
    }
}
