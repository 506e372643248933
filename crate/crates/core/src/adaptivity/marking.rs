use std::cmp::Ordering;

/// Exact running sum of floats, rounded correctly on demand, so that the
/// mass of a set does not depend on summation order.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, mut x: f64) {
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    /// The exact sum rounded to nearest, ties to even.
    pub fn value(&self) -> f64 {
        let p = &self.partials;
        let Some(mut n) = p.len().checked_sub(1) else {
            return 0.0;
        };
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            n -= 1;
            let x = hi;
            let y = p[n];
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

impl FromIterator<f64> for ExactSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = ExactSum::new();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

/// Minimal Dörfler set: the shortest prefix of the indicators sorted by
/// decreasing value (ties by index) whose squared mass reaches `θ²` of the total.
///
/// Masses are exact sums rounded once. Returns indices in that order. An
/// all-zero vector marks nothing.
pub fn dorfler_mark(eta: &[f64], theta: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| match eta[b].total_cmp(&eta[a]) {
        Ordering::Equal => a.cmp(&b),
        o => o,
    });
    let total = eta.iter().map(|e| e * e).collect::<ExactSum>().value();
    if total == 0.0 {
        return Vec::new();
    }
    let target = theta * theta * total;
    let mut mass = ExactSum::new();
    let mut marked = Vec::new();
    for i in order {
        if mass.value() >= target {
            break;
        }
        mass.add(eta[i] * eta[i]);
        marked.push(i);
    }
    marked
}
