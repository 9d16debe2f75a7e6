//! Draggable zones of each shape kind and the attribute offsets they apply.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::svg::{Axis, IndexedShape, Slot, SlotKey};

/// One number moved by a zone: its slot, which mouse axis drives it, and
/// whether the offset is added or subtracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZoneAttr {
    /// Index into the shape's slots.
    pub slot: usize,
    pub axis: Axis,
    pub negate: bool,
}

impl ZoneAttr {
    pub fn offset(&self, dx: f64, dy: f64) -> f64 {
        let d = match self.axis {
            Axis::X => dx,
            Axis::Y => dy,
        };
        if self.negate {
            -d
        } else {
            d
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    pub name: String,
    pub attrs: Vec<ZoneAttr>,
}

type Spec = (&'static str, &'static [(&'static str, Axis, bool)]);

const RECT: &[Spec] = &[
    ("Interior", &[("x", Axis::X, false), ("y", Axis::Y, false)]),
    ("RightEdge", &[("width", Axis::X, false)]),
    (
        "BotRightCorner",
        &[("width", Axis::X, false), ("height", Axis::Y, false)],
    ),
    ("BotEdge", &[("height", Axis::Y, false)]),
    (
        "BotLeftCorner",
        &[
            ("x", Axis::X, false),
            ("width", Axis::X, true),
            ("height", Axis::Y, true),
        ],
    ),
    (
        "LeftEdge",
        &[("x", Axis::X, false), ("width", Axis::X, true)],
    ),
    (
        "TopLeftCorner",
        &[
            ("x", Axis::X, false),
            ("y", Axis::Y, false),
            ("width", Axis::X, true),
            ("height", Axis::Y, true),
        ],
    ),
    (
        "TopEdge",
        &[("y", Axis::Y, false), ("height", Axis::Y, true)],
    ),
    (
        "TopRightCorner",
        &[
            ("y", Axis::Y, false),
            ("width", Axis::X, false),
            ("height", Axis::Y, true),
        ],
    ),
];

const LINE: &[Spec] = &[
    ("Point1", &[("x1", Axis::X, false), ("y1", Axis::Y, false)]),
    ("Point2", &[("x2", Axis::X, false), ("y2", Axis::Y, false)]),
    (
        "Edge",
        &[
            ("x1", Axis::X, false),
            ("y1", Axis::Y, false),
            ("x2", Axis::X, false),
            ("y2", Axis::Y, false),
        ],
    ),
];

const ELLIPSE: &[Spec] = &[
    (
        "Interior",
        &[("cx", Axis::X, false), ("cy", Axis::Y, false)],
    ),
    ("RightEdge", &[("rx", Axis::X, false)]),
    ("BotEdge", &[("ry", Axis::Y, false)]),
];

const CIRCLE: &[Spec] = &[
    (
        "Interior",
        &[("cx", Axis::X, false), ("cy", Axis::Y, false)],
    ),
    ("RightEdge", &[("r", Axis::X, false)]),
    ("BotEdge", &[("r", Axis::Y, false)]),
];

fn slot_index(shape: &IndexedShape, s: &Slot) -> usize {
    shape
        .slots
        .iter()
        .position(|x| core::ptr::eq(x, s))
        .expect("slot belongs to shape")
}

fn named(shape: &IndexedShape, table: &[Spec]) -> Vec<Zone> {
    table
        .iter()
        .map(|(name, attrs)| Zone {
            name: name.to_string(),
            attrs: attrs
                .iter()
                .filter_map(|(a, axis, negate)| {
                    let i = shape
                        .slots
                        .iter()
                        .position(|s| matches!(&s.key, SlotKey::Attr(k) if k == a))?;
                    Some(ZoneAttr {
                        slot: i,
                        axis: *axis,
                        negate: *negate,
                    })
                })
                .collect(),
        })
        .filter(|z| !z.attrs.is_empty())
        .collect()
}

fn point_attrs(shape: &IndexedShape, pts: &[(&Slot, &Slot)], which: &[usize]) -> Vec<ZoneAttr> {
    which
        .iter()
        .flat_map(|&i| {
            let (x, y) = pts[i];
            [
                ZoneAttr {
                    slot: slot_index(shape, x),
                    axis: Axis::X,
                    negate: false,
                },
                ZoneAttr {
                    slot: slot_index(shape, y),
                    axis: Axis::Y,
                    negate: false,
                },
            ]
        })
        .collect()
}

fn point_zones(shape: &IndexedShape, edges: bool, interior: bool) -> Vec<Zone> {
    let pts = shape.points();
    let n = pts.len();
    let mut zones: Vec<Zone> = (0..n)
        .map(|i| Zone {
            name: format!("Point{}", i + 1),
            attrs: point_attrs(shape, &pts, &[i]),
        })
        .collect();
    if edges && n >= 2 {
        zones.extend((0..n).map(|i| Zone {
            name: format!("Edge{}", i + 1),
            attrs: point_attrs(shape, &pts, &[i, (i + 1) % n]),
        }));
    }
    if interior && n > 0 {
        let all: Vec<usize> = (0..n).collect();
        zones.push(Zone {
            name: "Interior".to_string(),
            attrs: point_attrs(shape, &pts, &all),
        });
    }
    zones
}

/// Zones of a shape in table order. Attributes that are not numbers are left
/// out, and a zone with nothing left to move is dropped.
pub fn zones_of(shape: &IndexedShape) -> Vec<Zone> {
    if !shape.zones {
        return Vec::new();
    }
    match shape.kind.as_str() {
        "rect" => named(shape, RECT),
        "line" => named(shape, LINE),
        "ellipse" => named(shape, ELLIPSE),
        "circle" => named(shape, CIRCLE),
        "polygon" => point_zones(shape, true, true),
        "polyline" | "path" => point_zones(shape, false, false),
        _ => Vec::new(),
    }
}

/// Looks up a zone by name.
pub fn find_zone(shape: &IndexedShape, name: &str) -> Option<Zone> {
    zones_of(shape).into_iter().find(|z| z.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Program;
    use crate::svg::index_canvas;

    fn shapes(src: &str) -> Vec<IndexedShape> {
        let p = Program::parse(src).unwrap();
        index_canvas(&p.eval().unwrap()).unwrap().shapes
    }

    fn names(z: &[Zone]) -> Vec<&str> {
        z.iter().map(|z| z.name.as_str()).collect()
    }

    #[test]
    fn rect_zones_and_offsets() {
        let s = &shapes("(svg [(rect 'red' 10 20 30 40)])")[0];
        let z = zones_of(s);
        assert_eq!(z.len(), 9);
        let bl = &z[4];
        assert_eq!(bl.name, "BotLeftCorner");
        let moved: Vec<(String, f64)> = bl
            .attrs
            .iter()
            .map(|a| (s.slots[a.slot].key.to_string(), a.offset(3.0, 5.0)))
            .collect();
        assert_eq!(
            moved,
            [
                ("x".into(), 3.0),
                ("width".into(), -3.0),
                ("height".into(), -5.0)
            ]
        );
    }

    #[test]
    fn circle_radius_follows_either_axis() {
        let s = &shapes("(svg [(circle 'red' 10 20 30)])")[0];
        let z = zones_of(s);
        assert_eq!(names(&z), ["Interior", "RightEdge", "BotEdge"]);
        assert_eq!(z[1].attrs[0].offset(4.0, 9.0), 4.0);
        assert_eq!(z[2].attrs[0].offset(4.0, 9.0), 9.0);
    }

    #[test]
    fn polygon_points_edges_interior() {
        let s = &shapes("(svg [(polygon 'red' 'black' 1 [[0 0] [10 0] [5 5]])])")[0];
        let z = zones_of(s);
        assert_eq!(
            names(&z),
            ["Point1", "Point2", "Point3", "Edge1", "Edge2", "Edge3", "Interior"]
        );
        let wrap: Vec<String> = z[5]
            .attrs
            .iter()
            .map(|a| s.slots[a.slot].key.to_string())
            .collect();
        assert_eq!(
            wrap,
            ["points[2].x", "points[2].y", "points[0].x", "points[0].y"]
        );
        assert_eq!(z[6].attrs.len(), 6);
    }

    #[test]
    fn path_and_text() {
        let s = shapes("(svg [(path 'none' 'black' 2 ['M' 0 0 'Q' 5 5 10 0]) (text 1 2 'a')])");
        assert_eq!(names(&zones_of(&s[0])), ["Point1", "Point2", "Point3"]);
        assert!(zones_of(&s[1]).is_empty());
    }

    #[test]
    fn zones_can_be_switched_off() {
        let s = shapes("(svg [['rect' [['x' 1] ['ZONES' 'none']] []]])");
        assert!(zones_of(&s[0]).is_empty());
    }
}
