"""CPU multiview renderer for slanted-lenticular light field displays.

Two render paths share one shading and visibility contract: a point-based
pipeline (generate frame-specific surface points once, splat them into every
view) and a reference multiview rasterizer (rasterize the mesh once per view).
Rendered views are interleaved into the panel's subpixel image.
"""

from .lfd_model import LfdConfig, ViewCamera, SceneFraming, build_view_array
from .scene import Mesh, Material, load_obj, tessellate
from .harness import RunConfig, run, compare

__all__ = [
    "LfdConfig",
    "ViewCamera",
    "SceneFraming",
    "build_view_array",
    "Mesh",
    "Material",
    "load_obj",
    "tessellate",
    "RunConfig",
    "run",
    "compare",
]

__version__ = "0.1.0"
