//! Row-level data parallelism with a sequential fallback.
//!
//! Every parallel kernel in this crate computes each output item
//! independently and collects in index order, so both modes produce
//! bitwise-identical results.

/// How data-parallel loops are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise
    /// identical to `Sequential`.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

impl Execution {
    /// `(0..n).map(f).collect()`, possibly in parallel.
    pub fn map_indexed<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                (0..n).into_par_iter().map(f).collect()
            }
            _ => (0..n).map(f).collect(),
        }
    }

    /// Apply `f` to each chunk of `chunk` consecutive elements of `data`,
    /// passing the chunk index.
    pub fn for_each_chunk_mut<T, F>(self, data: &mut [T], chunk: usize, f: F)
    where
        T: Send,
        F: Fn(usize, &mut [T]) + Sync + Send,
    {
        match self {
            #[cfg(feature = "parallel")]
            Execution::Parallel => {
                use rayon::prelude::*;
                data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
            }
            _ => data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let f = |i: usize| (i as f64).sqrt().sin();
        let a = Execution::Sequential.map_indexed(1000, f);
        let b = Execution::Parallel.map_indexed(1000, f);
        assert_eq!(a, b);

        let mut x = vec![0usize; 100];
        let mut y = vec![0usize; 100];
        Execution::Sequential.for_each_chunk_mut(&mut x, 7, |i, c| c.iter_mut().for_each(|v| *v = i));
        Execution::Parallel.for_each_chunk_mut(&mut y, 7, |i, c| c.iter_mut().for_each(|v| *v = i));
        assert_eq!(x, y);
    }
}
