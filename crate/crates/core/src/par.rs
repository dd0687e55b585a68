//! Data-parallel map with a fixed output order.
//!
//! With the `parallel` feature, [`Mode::Rayon`] spreads work over the rayon
//! pool; without it every mode runs sequentially. Results come back in input
//! order either way, so reductions over them are bit-identical.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Rayon,
    Sequential,
}

impl Default for Mode {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Mode::Rayon
        } else {
            Mode::Sequential
        }
    }
}

pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    map_with(Mode::default(), items, f)
}

pub fn map_with<T, R, F>(mode: Mode, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match mode {
        #[cfg(feature = "parallel")]
        Mode::Rayon => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}
