//! Cycle structure of finite index maps `f: I -> I`.

/// Cycle structure of an index map.
#[derive(Clone, Debug)]
pub struct IndexStructure {
    /// Each cycle listed as `i0, f(i0), f^2(i0), ...`.
    pub cycles: Vec<Vec<usize>>,
    /// Preperiodic indices ordered so that `f(i)` precedes `i`.
    pub preperiodic: Vec<usize>,
}

pub fn index_structure(f: &[usize]) -> IndexStructure {
    let n = f.len();
    let mut periodic = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        let mut x = start;
        for _ in 0..n {
            x = f[x];
        }
        if periodic[x] {
            continue;
        }
        let mut cyc = vec![x];
        periodic[x] = true;
        let mut y = f[x];
        while y != x {
            periodic[y] = true;
            cyc.push(y);
            y = f[y];
        }
        cycles.push(cyc);
    }
    cycles.sort_by_key(|c| *c.iter().min().expect("nonempty cycle"));
    for c in cycles.iter_mut() {
        let k = c
            .iter()
            .enumerate()
            .min_by_key(|(_, &v)| v)
            .map(|(k, _)| k)
            .expect("nonempty");
        c.rotate_left(k);
    }
    let mut depth = vec![0usize; n];
    for i in 0..n {
        let mut x = i;
        while !periodic[x] {
            depth[i] += 1;
            x = f[x];
        }
    }
    let mut preperiodic: Vec<usize> = (0..n).filter(|&i| !periodic[i]).collect();
    preperiodic.sort_by_key(|&i| (depth[i], i));
    IndexStructure {
        cycles,
        preperiodic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn structure_examples() {
        let st = index_structure(&[1, 0, 0, 2]);
        assert_eq!(st.cycles, vec![vec![0, 1]]);
        assert_eq!(st.preperiodic, vec![2, 3]);
        let st = index_structure(&[]);
        assert!(st.cycles.is_empty() && st.preperiodic.is_empty());
        let st = index_structure(&[2, 2, 1]);
        assert_eq!(st.cycles, vec![vec![1, 2]]);
        assert_eq!(st.preperiodic, vec![0]);
    }
}
