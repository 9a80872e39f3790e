"""Crop-loss mapping from two-date Sentinel-2 rasters.

The pipeline: read multiband GeoTIFF scenes, compute NDVI per date, difference
the dates (loss positive), threshold the difference into a 3-class mask,
render and tile the results, and score predicted masks against ground truth.
"""

from .bands import (
    DEFAULT_BANDS,
    DEFAULT_WINDOW,
    INDEX_NODATA,
    BandAssignment,
    compose,
    compute_ndvi,
    temporal_difference,
)
from .config import CONFIG_ENV_VAR, PipelineConfig, load_config_file, resolve_config
from .dataset import (
    MANIFEST_COLUMNS,
    ROLES,
    ManifestEntry,
    SplitPolicy,
    build_manifest,
    read_manifest,
    split_summary,
    write_manifest,
)
from .errors import (
    BandIndexError,
    ClassMapError,
    ConfigError,
    CropsightError,
    ManifestError,
    MissingGeotransformError,
    RasterMismatchError,
    RotatedRasterError,
    SceneSpecError,
    TileGridError,
    UnsupportedSampleTypeError,
)
from .geotiff import read_geotiff, write_geotiff
from .groundtruth import (
    CLASS_BACKGROUND,
    CLASS_LOSS,
    CLASS_OK,
    DEFAULT_CLASSES,
    DEFAULT_THRESHOLD,
    ClassDef,
    ClassMap,
    as_class_mask,
    class_histogram,
    load_classmap,
    mask_difference,
    parse_mask,
    render_mask,
    threshold_classify,
    write_classmap,
)
from .metrics import (
    ConfusionMatrix,
    MetricReport,
    accumulate,
    class_f1,
    class_iou,
    dice_coefficient,
    evaluate_manifest,
    format_report_table,
    mean_iou,
    micro_iou,
    report_from_pairs,
    report_to_dict,
    write_report_csv,
)
from .raster import (
    GeoRaster,
    TileSet,
    check_compatible,
    merge_tiles,
    pad_to_multiple,
    rasters_equal,
    read_tiles,
    scan_tile_files,
    split_tiles,
    tile_filename,
    tile_raster,
    write_tiles,
)
from .synth import (
    LossRegion,
    SceneSpec,
    brute_force_counts,
    brute_force_metrics,
    generate_scene,
    hailstorm_spec,
    heatwave_spec,
    load_scene_spec,
    save_scene_spec,
)

__version__ = "0.1.0"

__all__ = [
    "BandAssignment",
    "BandIndexError",
    "CLASS_BACKGROUND",
    "CLASS_LOSS",
    "CLASS_OK",
    "CONFIG_ENV_VAR",
    "ClassDef",
    "ClassMap",
    "ClassMapError",
    "ConfigError",
    "ConfusionMatrix",
    "CropsightError",
    "DEFAULT_BANDS",
    "DEFAULT_CLASSES",
    "DEFAULT_THRESHOLD",
    "DEFAULT_WINDOW",
    "GeoRaster",
    "INDEX_NODATA",
    "LossRegion",
    "MANIFEST_COLUMNS",
    "ManifestEntry",
    "ManifestError",
    "MetricReport",
    "MissingGeotransformError",
    "PipelineConfig",
    "ROLES",
    "RasterMismatchError",
    "RotatedRasterError",
    "SceneSpec",
    "SceneSpecError",
    "SplitPolicy",
    "TileGridError",
    "TileSet",
    "UnsupportedSampleTypeError",
    "accumulate",
    "as_class_mask",
    "brute_force_counts",
    "brute_force_metrics",
    "build_manifest",
    "check_compatible",
    "class_f1",
    "class_histogram",
    "class_iou",
    "compose",
    "compute_ndvi",
    "dice_coefficient",
    "evaluate_manifest",
    "format_report_table",
    "generate_scene",
    "hailstorm_spec",
    "heatwave_spec",
    "load_classmap",
    "load_config_file",
    "load_scene_spec",
    "mask_difference",
    "mean_iou",
    "merge_tiles",
    "micro_iou",
    "pad_to_multiple",
    "parse_mask",
    "rasters_equal",
    "read_geotiff",
    "read_manifest",
    "read_tiles",
    "render_mask",
    "report_from_pairs",
    "report_to_dict",
    "resolve_config",
    "save_scene_spec",
    "scan_tile_files",
    "split_summary",
    "split_tiles",
    "temporal_difference",
    "threshold_classify",
    "tile_filename",
    "tile_raster",
    "write_classmap",
    "write_geotiff",
    "write_manifest",
    "write_report_csv",
    "write_tiles",
]
