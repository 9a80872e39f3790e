"""Exception types raised across the package.

Missing input files raise the builtin FileNotFoundError; unwritable output
paths raise the builtin OSError. Everything domain-specific derives from
CropsightError so callers can catch one base class.
"""


class CropsightError(Exception):
    """Base class for all cropsight-specific errors."""


class UnsupportedSampleTypeError(CropsightError):
    """Raster sample type is not one of the supported types (float32, uint8)."""


class MissingGeotransformError(CropsightError):
    """File carries no geotransform tags."""


class RotatedRasterError(CropsightError):
    """Geotransform has nonzero rotation terms; only north-up rasters are supported."""


class RasterMismatchError(CropsightError):
    """Two rasters disagree in shape, geotransform, CRS, band count, or dtype."""


class TileGridError(CropsightError):
    """Tile grid is inconsistent: non-multiple dimensions, missing or mismatched tiles."""


class BandIndexError(CropsightError):
    """A band assignment points outside the raster's band range."""


class ClassMapError(CropsightError):
    """Class map is malformed or a mask value falls outside it."""


class ManifestError(CropsightError):
    """Dataset manifest construction or parsing failed."""


class SceneSpecError(CropsightError):
    """Synthetic scene specification violates its invariants."""


class ConfigError(CropsightError):
    """Pipeline configuration value is out of range or malformed."""
