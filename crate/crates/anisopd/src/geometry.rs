//! Small planar geometry utilities: axis-aligned rectangles, circles, and a
//! robust segment-intersection predicate used to cut pre-cracks through the
//! bond network.

use nalgebra::Vector2;

/// Axis-aligned rectangle, anchored at its lower-left corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    /// Rectangle of the given size centred on the origin.
    pub fn centred(width: f64, height: f64) -> Self {
        Self { x0: -0.5 * width, y0: -0.5 * height, width, height }
    }

    pub fn x1(&self) -> f64 {
        self.x0 + self.width
    }

    pub fn y1(&self) -> f64 {
        self.y0 + self.height
    }

    pub fn contains(&self, p: Vector2<f64>) -> bool {
        p.x >= self.x0 && p.x <= self.x1() && p.y >= self.y0 && p.y <= self.y1()
    }
}

/// Circle used for holes and inclusions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Vector2<f64>,
    pub radius: f64,
}

impl Circle {
    /// True when `p` lies strictly inside the circle (boundary excluded).
    pub fn contains_strictly(&self, p: Vector2<f64>) -> bool {
        (p - self.center).norm_squared() < self.radius * self.radius
    }

    /// True when the circle lies entirely inside the rectangle.
    pub fn inside(&self, rect: &Rect) -> bool {
        self.center.x - self.radius >= rect.x0
            && self.center.x + self.radius <= rect.x1()
            && self.center.y - self.radius >= rect.y0
            && self.center.y + self.radius <= rect.y1()
    }

    /// True when the circle lies entirely outside the rectangle.
    pub fn outside(&self, rect: &Rect) -> bool {
        // Distance from the rectangle to the centre exceeds the radius.
        let dx = (rect.x0 - self.center.x).max(self.center.x - rect.x1()).max(0.0);
        let dy = (rect.y0 - self.center.y).max(self.center.y - rect.y1()).max(0.0);
        dx * dx + dy * dy > self.radius * self.radius
    }
}

/// Line segment between two points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Vector2<f64>,
    pub b: Vector2<f64>,
}

impl Segment {
    pub fn new(a: Vector2<f64>, b: Vector2<f64>) -> Self {
        Self { a, b }
    }

    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }
}

fn cross(o: Vector2<f64>, a: Vector2<f64>, b: Vector2<f64>) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

fn on_segment(p: Vector2<f64>, q: Vector2<f64>, r: Vector2<f64>) -> bool {
    // Assuming p, q, r collinear: does q lie on [p, r]?
    q.x >= p.x.min(r.x) && q.x <= p.x.max(r.x) && q.y >= p.y.min(r.y) && q.y <= p.y.max(r.y)
}

/// True when the two closed segments share at least one point, including
/// endpoint touches and collinear overlap.
pub fn segments_intersect(s1: &Segment, s2: &Segment) -> bool {
    let d1 = cross(s2.a, s2.b, s1.a);
    let d2 = cross(s2.a, s2.b, s1.b);
    let d3 = cross(s1.a, s1.b, s2.a);
    let d4 = cross(s1.a, s1.b, s2.b);

    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(s2.a, s1.a, s2.b))
        || (d2 == 0.0 && on_segment(s2.a, s1.b, s2.b))
        || (d3 == 0.0 && on_segment(s1.a, s2.a, s1.b))
        || (d4 == 0.0 && on_segment(s1.a, s2.b, s1.b))
}
