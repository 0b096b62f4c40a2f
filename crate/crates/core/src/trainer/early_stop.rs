/// Patience-based plateau detection on a loss trace.
///
/// A loss counts as an improvement when it falls below the best so far by
/// more than `rel_tol` times the best. Training stops once `patience`
/// iterations have passed since the last improvement.
#[derive(Clone, Debug)]
pub struct EarlyStopping {
    patience: usize,
    rel_tol: f64,
    best: f64,
    best_iter: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize, rel_tol: f64) -> Self {
        Self {
            patience,
            rel_tol,
            best: f64::INFINITY,
            best_iter: 0,
        }
    }

    pub fn best(&self) -> f64 {
        self.best
    }

    /// Records the loss at `iter`; returns `true` when training should stop.
    pub fn update(&mut self, iter: usize, loss: f64) -> bool {
        if self.best.is_infinite() || loss < self.best - self.rel_tol * self.best.abs() {
            self.best = loss;
            self.best_iter = iter;
        }
        iter - self.best_iter >= self.patience
    }
}
