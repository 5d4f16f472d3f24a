use super::Pixel;

/// Static 2D kd-tree over integer pixel coordinates.
///
/// Stored as a median-split permutation of the input: the node of a subrange
/// is its middle element, split on x at even depth and y at odd depth.
#[derive(Debug, Clone)]
pub struct KdTree2 {
    points: Vec<Pixel>,
}

#[inline]
fn dist_sq(a: Pixel, b: Pixel) -> i64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    dx * dx + dy * dy
}

#[inline]
fn coord(p: Pixel, depth: usize) -> i64 {
    if depth % 2 == 0 {
        p.x
    } else {
        p.y
    }
}

fn build(points: &mut [Pixel], depth: usize) {
    if points.len() <= 1 {
        return;
    }
    let mid = points.len() / 2;
    points.select_nth_unstable_by_key(mid, |p| coord(*p, depth));
    let (left, rest) = points.split_at_mut(mid);
    build(left, depth + 1);
    build(&mut rest[1..], depth + 1);
}

impl KdTree2 {
    pub fn new(points: impl IntoIterator<Item = Pixel>) -> Self {
        let mut points: Vec<Pixel> = points.into_iter().collect();
        build(&mut points, 0);
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Closest stored point and its squared distance. Among equidistant
    /// points the smallest in `(y, x)` order wins, so results match a linear
    /// scan exactly.
    pub fn nearest(&self, query: Pixel) -> Option<(Pixel, i64)> {
        let mut best: Option<(i64, Pixel)> = None;
        Self::search(&self.points, query, 0, &mut best);
        best.map(|(d, p)| (p, d))
    }

    fn search(points: &[Pixel], q: Pixel, depth: usize, best: &mut Option<(i64, Pixel)>) {
        if points.is_empty() {
            return;
        }
        let mid = points.len() / 2;
        let node = points[mid];
        let cand = (dist_sq(node, q), node);
        if best.is_none_or(|b| cand < b) {
            *best = Some(cand);
        }
        // left subrange holds coordinates <= node, right holds >= node
        let diff = coord(q, depth) - coord(node, depth);
        let (near, far) = if diff < 0 {
            (&points[..mid], &points[mid + 1..])
        } else {
            (&points[mid + 1..], &points[..mid])
        };
        Self::search(near, q, depth + 1, best);
        // equality keeps equidistant ties reachable
        if best.is_none_or(|(d, _)| diff * diff <= d) {
            Self::search(far, q, depth + 1, best);
        }
    }
}
