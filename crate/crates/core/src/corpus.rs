//! Example programs shipped with the library.

/// `(name, source)` pairs.
pub const EXAMPLES: &[(&str, &str)] = &[
    (
        "sineWaveOfBoxes",
        include_str!("../corpus/sineWaveOfBoxes.little"),
    ),
    (
        "sineWaveOfBoxesBiased",
        include_str!("../corpus/sineWaveOfBoxesBiased.little"),
    ),
    (
        "threeBoxesInt",
        include_str!("../corpus/threeBoxesInt.little"),
    ),
    ("xyBox", include_str!("../corpus/xyBox.little")),
    (
        "logoGroupBox",
        include_str!("../corpus/logoGroupBox.little"),
    ),
    ("ferrisWheel", include_str!("../corpus/ferrisWheel.little")),
    ("starSliders", include_str!("../corpus/starSliders.little")),
    (
        "shapeGallery",
        include_str!("../corpus/shapeGallery.little"),
    ),
    ("emptyCanvas", include_str!("../corpus/emptyCanvas.little")),
    ("frozenBoxes", include_str!("../corpus/frozenBoxes.little")),
];

pub fn example(name: &str) -> Option<&'static str> {
    EXAMPLES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}
