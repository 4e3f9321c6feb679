"""Projective codes, sphere metric thickenings and zeros of odd maps."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"

from .geom import SpherePoint, geodesic_distance, projective_distance, set_diameter  # noqa: E402
from .options import SearchOptions  # noqa: E402

__all__ = ["SearchOptions", "SpherePoint", "__version__", "geodesic_distance",
           "projective_distance", "set_diameter"]
