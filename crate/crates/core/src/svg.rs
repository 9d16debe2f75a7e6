//! SVG export and the indexed view of a canvas used by the editor.
//!
//! A node is the three-element list `[kind attributes children]` where
//! `attributes` is a list of `[key value]` pairs. Children are nodes or
//! strings (text content).

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use crate::trace::Trace;
use crate::value::Value;

/// Attributes used only by the editor, never exported.
pub const EDITOR_ATTRS: [&str; 2] = ["ZONES", "HIDDEN"];

/// Nodes whose children are shapes rather than content.
const CONTAINERS: [&str; 2] = ["svg", "g"];

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("malformed SVG value at {path:?}: {message}")]
pub struct SvgError {
    pub message: String,
    pub path: Vec<u32>,
}

fn bad<T>(path: &[u32], message: impl Into<String>) -> Result<T, SvgError> {
    Err(SvgError {
        message: message.into(),
        path: path.to_vec(),
    })
}

/// Indices into nested lists leading from the canvas root to a value.
pub type ValuePath = Vec<u32>;

/// Formats a pixel value with at most four decimals.
pub fn format_pixels(n: f64) -> String {
    let mut s = format!("{n:.4}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

/// Maps a color number to a CSS color. 0 to 360 sweeps the hue wheel at full
/// saturation, 360 to 500 runs from black to white.
pub fn color_number(n: f64) -> String {
    let n = n.clamp(0.0, 500.0);
    let (r, g, b) = if n <= 360.0 {
        hsl_to_rgb(n, 1.0, 0.5)
    } else {
        let v = (n - 360.0) / 140.0;
        (v, v, v)
    };
    let byte = |c: f64| libm::round(c * 255.0) as u8;
    format!("rgb({},{},{})", byte(r), byte(g), byte(b))
}

fn hsl_to_rgb(h: f64, s: f64, l: f64) -> (f64, f64, f64) {
    let c = (1.0 - libm::fabs(2.0 * l - 1.0)) * s;
    let hp = (h % 360.0) / 60.0;
    let x = c * (1.0 - libm::fabs(hp % 2.0 - 1.0));
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = l - c / 2.0;
    (r + m, g + m, b + m)
}

fn escape(s: &str, out: &mut String) {
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
}

struct Node<'v> {
    kind: &'v str,
    attrs: Vec<(&'v str, &'v Value, u32)>,
    children: Vec<&'v Value>,
}

fn node<'v>(v: &'v Value, path: &[u32]) -> Result<Node<'v>, SvgError> {
    let Some(parts) = v.as_list() else {
        return bad(path, "a node must be a list");
    };
    let [kind, attrs, children] = parts[..] else {
        return bad(path, "a node must have exactly three elements");
    };
    let Some(kind) = kind.as_str() else {
        return bad(path, "node kind must be a string");
    };
    let Some(attr_list) = attrs.as_list() else {
        return bad(path, "attributes must be a list");
    };
    let mut out = Vec::with_capacity(attr_list.len());
    for (i, a) in attr_list.iter().enumerate() {
        let pair = a.as_list();
        match pair.as_deref() {
            Some([Value::Str(k), val]) => out.push((&**k, *val, i as u32)),
            _ => {
                let mut p = path.to_vec();
                p.extend([1, i as u32]);
                return bad(&p, "attribute must be a [key value] pair");
            }
        }
    }
    let Some(children) = children.as_list() else {
        return bad(path, "children must be a list");
    };
    Ok(Node {
        kind,
        attrs: out,
        children,
    })
}

fn pair(v: &Value) -> Option<(f64, f64)> {
    match v.as_list().as_deref() {
        Some([Value::Num(x, _), Value::Num(y, _)]) => Some((*x, *y)),
        _ => None,
    }
}

fn render_attr(key: &str, v: &Value, path: &[u32]) -> Result<String, SvgError> {
    Ok(match v {
        Value::Str(s) => String::from(&**s),
        Value::Num(n, _) if key == "fill" => color_number(*n),
        Value::Num(n, _) => format_pixels(*n),
        Value::Bool(b) => b.to_string(),
        Value::Nil | Value::Cons(_) => {
            let items = v.as_list().unwrap_or_default();
            if key == "points" {
                let mut s = String::new();
                for (i, p) in items.iter().enumerate() {
                    let Some((x, y)) = pair(p) else {
                        return bad(path, "points must be a list of [x y] pairs");
                    };
                    if i > 0 {
                        s.push(' ');
                    }
                    let _ = write!(s, "{},{}", format_pixels(x), format_pixels(y));
                }
                s
            } else if key == "d" {
                let mut s = String::new();
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        s.push(' ');
                    }
                    match item {
                        Value::Str(c) => s.push_str(c),
                        Value::Num(n, _) => s.push_str(&format_pixels(*n)),
                        _ => return bad(path, "path data holds commands and numbers only"),
                    }
                }
                s
            } else if items.len() == 4 && items.iter().all(|c| matches!(c, Value::Num(..))) {
                let c: Vec<String> = items
                    .iter()
                    .map(|c| format_pixels(c.as_num().map_or(0.0, |n| n.0)))
                    .collect();
                format!("rgba({},{},{},{})", c[0], c[1], c[2], c[3])
            } else {
                return bad(
                    path,
                    format!("unsupported list value for attribute '{key}'"),
                );
            }
        }
        Value::Closure(_) => return bad(path, "attribute value cannot be a function"),
    })
}

fn write_node(
    v: &Value,
    path: &mut Vec<u32>,
    depth: usize,
    out: &mut String,
) -> Result<(), SvgError> {
    let n = node(v, path)?;
    for _ in 0..depth {
        out.push_str("  ");
    }
    out.push('<');
    out.push_str(n.kind);
    if depth == 0 && n.kind == "svg" {
        out.push_str(" xmlns=\"http://www.w3.org/2000/svg\"");
    }
    for (k, val, i) in &n.attrs {
        if EDITOR_ATTRS.contains(k) {
            continue;
        }
        path.extend([1, *i, 1]);
        let text = render_attr(k, val, path)?;
        path.truncate(path.len() - 3);
        out.push(' ');
        escape(k, out);
        out.push_str("=\"");
        escape(&text, out);
        out.push('"');
    }
    if n.children.is_empty() {
        out.push_str("/>\n");
        return Ok(());
    }
    let inline = n.children.iter().all(|c| !matches!(c, Value::Cons(_)));
    out.push('>');
    if !inline {
        out.push('\n');
    }
    for (i, c) in n.children.iter().enumerate() {
        path.extend([2, i as u32]);
        match c {
            Value::Cons(_) => write_node(c, path, depth + 1, out)?,
            Value::Str(s) => escape(s, out),
            Value::Num(x, _) => out.push_str(&format_pixels(*x)),
            _ => return bad(path, "child must be a node or text"),
        }
        path.truncate(path.len() - 2);
    }
    if !inline {
        for _ in 0..depth {
            out.push_str("  ");
        }
    }
    let _ = writeln!(out, "</{}>", n.kind);
    Ok(())
}

/// Renders a canvas value as SVG XML.
pub fn to_svg_xml(root: &Value) -> Result<String, SvgError> {
    let n = node(root, &[])?;
    if n.kind != "svg" {
        return bad(&[], "the root node must be 'svg'");
    }
    let mut out = String::new();
    write_node(root, &mut Vec::new(), 0, &mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
}

/// Where a number sits inside a shape's attributes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum SlotKey {
    /// A plain numeric attribute such as `x` or `r`.
    Attr(String),
    /// Coordinate of the `index`-th (0-based) pair of a `points` list.
    Point { index: usize, axis: Axis },
    /// Component of an RGBA list.
    Rgba { attr: String, component: usize },
    /// Number at position `index` of the path data. Coordinates that belong
    /// to a draggable point carry its 0-based number and axis.
    PathNum {
        index: usize,
        point: Option<(usize, Axis)>,
    },
}

impl core::fmt::Display for SlotKey {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SlotKey::Attr(a) => f.write_str(a),
            SlotKey::Point { index, axis } => {
                write!(
                    f,
                    "points[{index}].{}",
                    if *axis == Axis::X { "x" } else { "y" }
                )
            }
            SlotKey::Rgba { attr, component } => write!(f, "{attr}[{component}]"),
            SlotKey::PathNum { index, .. } => write!(f, "d[{index}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Slot {
    pub key: SlotKey,
    pub value: f64,
    pub trace: Trace,
    pub path: ValuePath,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexedShape {
    /// Position among shapes in document pre-order.
    pub index: usize,
    pub kind: String,
    pub hidden: bool,
    /// False when the shape opts out of zones with `['ZONES' 'none']`.
    pub zones: bool,
    /// Path to the node itself.
    pub path: ValuePath,
    pub slots: Vec<Slot>,
}

impl IndexedShape {
    pub fn attr(&self, name: &str) -> Option<&Slot> {
        self.slots
            .iter()
            .find(|s| matches!(&s.key, SlotKey::Attr(a) if a == name))
    }

    /// Draggable points in order, as (x, y) slot pairs.
    pub fn points(&self) -> Vec<(&Slot, &Slot)> {
        let mut xs: Vec<(usize, &Slot)> = Vec::new();
        let mut ys: Vec<(usize, &Slot)> = Vec::new();
        for s in &self.slots {
            let (i, axis) = match s.key {
                SlotKey::Point { index, axis } => (index, axis),
                SlotKey::PathNum {
                    point: Some((index, axis)),
                    ..
                } => (index, axis),
                _ => continue,
            };
            match axis {
                Axis::X => xs.push((i, s)),
                Axis::Y => ys.push((i, s)),
            }
        }
        xs.iter()
            .filter_map(|(i, x)| ys.iter().find(|(j, _)| j == i).map(|(_, y)| (*x, *y)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Canvas {
    pub shapes: Vec<IndexedShape>,
}

impl Canvas {
    pub fn shape(&self, index: usize) -> Option<&IndexedShape> {
        self.shapes.get(index)
    }
}

/// Number of coordinates per point and whether a run ends in a point, per
/// path command. Arcs carry five parameters before their end point.
fn path_command_shape(c: &str) -> Option<(usize, usize)> {
    // (numbers per repetition, leading numbers that are not coordinates)
    match c.to_ascii_uppercase().as_str() {
        "M" | "L" | "T" => Some((2, 0)),
        "Q" | "S" => Some((4, 0)),
        "C" => Some((6, 0)),
        "A" => Some((7, 5)),
        "H" | "V" => Some((1, 1)),
        "Z" => Some((0, 0)),
        _ => None,
    }
}

fn index_attr(key: &str, v: &Value, path: &[u32], slots: &mut Vec<Slot>) -> Result<(), SvgError> {
    match v {
        Value::Num(n, t) => slots.push(Slot {
            key: SlotKey::Attr(key.to_string()),
            value: *n,
            trace: t.clone(),
            path: path.to_vec(),
        }),
        Value::Cons(_) | Value::Nil => {
            let items = v.as_list().unwrap_or_default();
            if key == "points" {
                for (i, p) in items.iter().enumerate() {
                    let coords = p.as_list();
                    let Some([Value::Num(x, tx), Value::Num(y, ty)]) = coords.as_deref() else {
                        return bad(path, "points must be a list of [x y] pairs");
                    };
                    for (axis, n, t, j) in [(Axis::X, x, tx, 0), (Axis::Y, y, ty, 1)] {
                        let mut p = path.to_vec();
                        p.extend([i as u32, j]);
                        slots.push(Slot {
                            key: SlotKey::Point { index: i, axis },
                            value: *n,
                            trace: t.clone(),
                            path: p,
                        });
                    }
                }
            } else if key == "d" {
                let mut cmd: Option<(usize, usize)> = None;
                let mut run = 0;
                let mut point_no = 0;
                for (i, item) in items.iter().enumerate() {
                    match item {
                        Value::Str(c) => {
                            let Some(shape) = path_command_shape(c) else {
                                return bad(path, format!("unknown path command '{c}'"));
                            };
                            cmd = Some(shape);
                            run = 0;
                        }
                        Value::Num(n, t) => {
                            let Some((per, skip)) = cmd else {
                                return bad(path, "path data must start with a command");
                            };
                            if per == 0 {
                                return bad(path, "'Z' takes no numbers");
                            }
                            let pos = run % per;
                            let point = if pos >= skip && per > skip {
                                let rel = pos - skip;
                                let axis = if rel % 2 == 0 { Axis::X } else { Axis::Y };
                                let this = point_no;
                                if axis == Axis::Y {
                                    point_no += 1;
                                }
                                Some((this, axis))
                            } else {
                                None
                            };
                            run += 1;
                            let mut p = path.to_vec();
                            p.push(i as u32);
                            slots.push(Slot {
                                key: SlotKey::PathNum { index: i, point },
                                value: *n,
                                trace: t.clone(),
                                path: p,
                            });
                        }
                        _ => return bad(path, "path data holds commands and numbers only"),
                    }
                }
            } else if items.len() == 4 && items.iter().all(|c| matches!(c, Value::Num(..))) {
                for (i, c) in items.iter().enumerate() {
                    let (n, t) = c.as_num().expect("checked numeric");
                    let mut p = path.to_vec();
                    p.push(i as u32);
                    slots.push(Slot {
                        key: SlotKey::Rgba {
                            attr: key.to_string(),
                            component: i,
                        },
                        value: n,
                        trace: t.clone(),
                        path: p,
                    });
                }
            } else {
                return bad(
                    path,
                    format!("unsupported list value for attribute '{key}'"),
                );
            }
        }
        _ => {}
    }
    Ok(())
}

fn index_node(
    v: &Value,
    path: &mut Vec<u32>,
    shapes: &mut Vec<IndexedShape>,
) -> Result<(), SvgError> {
    let n = node(v, path)?;
    if CONTAINERS.contains(&n.kind) {
        for (i, c) in n.children.iter().enumerate() {
            if matches!(c, Value::Cons(_)) {
                path.extend([2, i as u32]);
                index_node(c, path, shapes)?;
                path.truncate(path.len() - 2);
            }
        }
        return Ok(());
    }
    let mut slots = Vec::new();
    let mut hidden = false;
    let mut zones = true;
    for (k, val, i) in &n.attrs {
        if *k == "HIDDEN" {
            hidden = true;
        }
        if *k == "ZONES" && val.as_str() == Some("none") {
            zones = false;
        }
        if EDITOR_ATTRS.contains(k) {
            continue;
        }
        path.extend([1, *i, 1]);
        index_attr(k, val, path, &mut slots)?;
        path.truncate(path.len() - 3);
    }
    shapes.push(IndexedShape {
        index: shapes.len(),
        kind: n.kind.to_string(),
        hidden,
        zones,
        path: path.clone(),
        slots,
    });
    Ok(())
}

/// Lists the shapes of a canvas in document pre-order with their numbers.
pub fn index_canvas(root: &Value) -> Result<Canvas, SvgError> {
    let n = node(root, &[])?;
    if n.kind != "svg" {
        return bad(&[], "the root node must be 'svg'");
    }
    let mut shapes = Vec::new();
    index_node(root, &mut Vec::new(), &mut shapes)?;
    Ok(Canvas { shapes })
}

/// Calls `f` on every number in a value.
pub fn for_each_number(v: &Value, f: &mut impl FnMut(f64, &Trace)) {
    let mut stack = alloc::vec![v];
    while let Some(v) = stack.pop() {
        match v {
            Value::Num(n, t) => f(*n, t),
            Value::Cons(c) => {
                stack.push(&c.1);
                stack.push(&c.0);
            }
            _ => {}
        }
    }
}

/// Follows a [`ValuePath`] through nested lists.
pub fn value_at<'v>(root: &'v Value, path: &[u32]) -> Option<&'v Value> {
    let mut cur = root;
    for &i in path {
        cur = *cur.as_list()?.get(i as usize)?;
    }
    Some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::Program;

    fn canvas_value(src: &str) -> Value {
        Program::parse(src).unwrap().eval().unwrap()
    }

    #[test]
    fn pixel_formatting() {
        assert_eq!(format_pixels(50.0), "50");
        assert_eq!(format_pixels(1.23456), "1.2346");
        assert_eq!(format_pixels(-0.00001), "0");
        assert_eq!(format_pixels(2.5), "2.5");
    }

    #[test]
    fn color_numbers() {
        assert_eq!(color_number(0.0), "rgb(255,0,0)");
        assert_eq!(color_number(120.0), "rgb(0,255,0)");
        assert_eq!(color_number(240.0), "rgb(0,0,255)");
        assert_eq!(color_number(360.0), "rgb(255,0,0)");
        assert_eq!(color_number(361.0), "rgb(2,2,2)");
        assert_eq!(color_number(500.0), "rgb(255,255,255)");
        assert_eq!(color_number(900.0), "rgb(255,255,255)");
    }

    #[test]
    fn translation_rules() {
        let v = canvas_value(
            "(svg [['polygon' [['fill' [255 0 0 1]] ['points' [[0 0] [10 5]]] ['HIDDEN' ''] ['ZONES' 'none']] []]])",
        );
        let xml = to_svg_xml(&v).unwrap();
        assert!(xml.contains("fill=\"rgba(255,0,0,1)\""), "{xml}");
        assert!(xml.contains("points=\"0,0 10,5\""), "{xml}");
        assert!(!xml.contains("HIDDEN") && !xml.contains("ZONES"));
        let c = index_canvas(&v).unwrap();
        assert!(c.shapes[0].hidden);
        assert!(!c.shapes[0].zones);
        assert_eq!(c.shapes[0].points().len(), 2);
    }

    #[test]
    fn path_points() {
        let v = canvas_value("(svg [(path 'none' 'black' 1 ['M' 1 2 'C' 3 4 5 6 7 8 'H' 9 'A' 1 1 0 0 1 10 11 'Z'])])");
        let xml = to_svg_xml(&v).unwrap();
        assert!(
            xml.contains("d=\"M 1 2 C 3 4 5 6 7 8 H 9 A 1 1 0 0 1 10 11 Z\""),
            "{xml}"
        );
        let c = index_canvas(&v).unwrap();
        let pts: Vec<(f64, f64)> = c.shapes[0]
            .points()
            .iter()
            .map(|(x, y)| (x.value, y.value))
            .collect();
        assert_eq!(
            pts,
            alloc::vec![(1.0, 2.0), (3.0, 4.0), (5.0, 6.0), (7.0, 8.0), (10.0, 11.0)]
        );
    }

    #[test]
    fn empty_and_malformed() {
        let v = canvas_value("(svg [])");
        assert!(index_canvas(&v).unwrap().shapes.is_empty());
        assert!(to_svg_xml(&v).unwrap().starts_with("<svg xmlns"));
        assert!(index_canvas(&canvas_value("['svg' []]")).is_err());
        assert!(index_canvas(&canvas_value("['rect' [] []]")).is_err());
        assert!(to_svg_xml(&canvas_value("(svg [['rect' [['x' [1 2]]] []]])")).is_err());
    }

    #[test]
    fn slot_paths_reach_their_numbers() {
        let v =
            canvas_value("(svg [(rect 'red' 1 2 3 4) (polygon 'red' 'black' 1 [[5 6] [7 8]])])");
        let c = index_canvas(&v).unwrap();
        for s in c.shapes.iter().flat_map(|s| &s.slots) {
            let at = value_at(&v, &s.path).and_then(|v| v.as_num()).unwrap();
            assert_eq!(at.0, s.value);
        }
    }
}
