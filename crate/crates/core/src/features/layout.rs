/// Version tag of the base layout below.
pub const BASE_LAYOUT_ID: &str = "ego77-v1";

pub const BASE_DIM: usize = 77;

/// Coarse cue family of a feature, used for importance reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureGroup {
    Shape,
    Location,
    Size,
    Depth,
    ShapeContext,
    LocationContext,
    SizeContext,
    DepthContext,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 8] = [
        FeatureGroup::Shape,
        FeatureGroup::Location,
        FeatureGroup::Size,
        FeatureGroup::Depth,
        FeatureGroup::ShapeContext,
        FeatureGroup::LocationContext,
        FeatureGroup::SizeContext,
        FeatureGroup::DepthContext,
    ];

    /// Group of entry `i` of a base vector.
    pub fn of_base(i: usize) -> Option<FeatureGroup> {
        match i {
            0..=10 => Some(FeatureGroup::Shape),
            11..=26 => Some(FeatureGroup::Location),
            27..=30 => Some(FeatureGroup::Size),
            31..=76 => Some(FeatureGroup::Depth),
            _ => None,
        }
    }

    pub fn context(self) -> FeatureGroup {
        match self {
            FeatureGroup::Shape | FeatureGroup::ShapeContext => FeatureGroup::ShapeContext,
            FeatureGroup::Location | FeatureGroup::LocationContext => FeatureGroup::LocationContext,
            FeatureGroup::Size | FeatureGroup::SizeContext => FeatureGroup::SizeContext,
            FeatureGroup::Depth | FeatureGroup::DepthContext => FeatureGroup::DepthContext,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Shape => "shape",
            FeatureGroup::Location => "location",
            FeatureGroup::Size => "size",
            FeatureGroup::Depth => "depth",
            FeatureGroup::ShapeContext => "shape-ctx",
            FeatureGroup::LocationContext => "location-ctx",
            FeatureGroup::SizeContext => "size-ctx",
            FeatureGroup::DepthContext => "depth-ctx",
        }
    }
}

/// Column names of the base layout, index-aligned.
pub fn base_feature_names() -> Vec<String> {
    let mut names: Vec<String> = [
        "perimeter_ratio",
        "fill_ratio",
        "major_axis",
        "minor_axis",
        "contour_sum",
        "contour_mean",
        "ucm_appear",
        "ucm_disappear",
        "eccentricity",
        "orientation",
        "equiv_diameter",
        "bbox_x0",
        "bbox_y0",
        "bbox_x1",
        "bbox_y1",
        "centroid_x",
        "centroid_y",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for anchor in ["center", "top", "bottom", "left", "right"] {
        names.push(format!("{}_dx", anchor));
        names.push(format!("{}_dy", anchor));
    }
    names.extend(["area", "perimeter", "bbox_area", "bbox_aspect"].map(String::from));
    names.extend(["depth_min", "depth_mean", "depth_max", "depth_std"].map(String::from));
    let grid = |prefix: &str, rows: usize, cols: usize| -> Vec<String> {
        (0..rows * cols)
            .map(|i| format!("{}_{}_{}", prefix, i / cols, i % cols))
            .collect()
    };
    names.extend(grid("depth_grid", 3, 3));
    names.extend(grid("depth_axis", 4, 3));
    names.extend(grid("depth_grid_norm", 3, 3));
    names.extend(grid("depth_axis_norm", 4, 3));
    names
}
