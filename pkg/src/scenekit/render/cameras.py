"""Camera models for raster rendering.

Two variants: a top-down orthographic camera (the default; world xy mapped
straight onto the image grid) and a pinhole camera with yaw/pitch, a focal
length in pixels, and a principal point.  Angles in camera configs are
degrees, matching script text; renderers convert internally.
"""

from __future__ import annotations

from dataclasses import dataclass


class CameraError(Exception):
    """A camera config failed validation."""


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise CameraError(message)


@dataclass(frozen=True)
class TopDownCamera:
    """Orthographic bird's-eye view centered on a world point.

    Pixel mapping: px = (x - center_x) / meters_per_pixel + width / 2 and
    py = (center_y - y) / meters_per_pixel + height / 2, so world +y points
    up the image.  Depth for this camera is a pseudo-depth: the camera sits
    at `ortho_height` meters and each pixel reads height minus the class
    height of whatever covers it, with empty pixels at the far plane.
    """

    center_x: float
    center_y: float
    meters_per_pixel: float = 0.1
    width: int = 512
    height: int = 512
    ortho_height: float = 50.0
    far_plane: float = 100.0

    def __post_init__(self):
        _require(self.width > 0 and self.height > 0, "image dims must be positive")
        _require(self.meters_per_pixel > 0, "meters_per_pixel must be positive")
        _require(self.ortho_height > 0, "ortho_height must be positive")
        _require(self.far_plane > 0, "far_plane must be positive")


@dataclass(frozen=True)
class PinholeCamera:
    """Perspective camera at (x, y, z) looking along yaw/pitch.

    Positive pitch tilts the view downward.  The forward axis is
    (cos(yaw) cos(pitch), sin(yaw) cos(pitch), -sin(pitch)) in world
    coordinates with z up.  `focal_px` is the focal length in pixels; the
    principal point defaults to the image center.
    """

    x: float
    y: float
    z: float
    yaw_deg: float = 0.0
    pitch_deg: float = 0.0
    focal_px: float = 256.0
    width: int = 512
    height: int = 512
    cx: float | None = None
    cy: float | None = None
    far_plane: float = 100.0

    def __post_init__(self):
        _require(self.width > 0 and self.height > 0, "image dims must be positive")
        _require(self.focal_px > 0, "focal_px must be positive")
        _require(self.far_plane > 0, "far_plane must be positive")

    @property
    def principal(self) -> tuple[float, float]:
        cx = self.width / 2.0 if self.cx is None else self.cx
        cy = self.height / 2.0 if self.cy is None else self.cy
        return cx, cy


Camera = TopDownCamera | PinholeCamera


def camera_to_dict(camera: Camera) -> dict:
    if isinstance(camera, TopDownCamera):
        return {
            "variant": "topdown",
            "center": [camera.center_x, camera.center_y],
            "meters_per_pixel": camera.meters_per_pixel,
            "width": camera.width,
            "height": camera.height,
            "ortho_height": camera.ortho_height,
            "far_plane": camera.far_plane,
        }
    cx, cy = camera.principal
    return {
        "variant": "pinhole",
        "position": [camera.x, camera.y, camera.z],
        "yaw_deg": camera.yaw_deg,
        "pitch_deg": camera.pitch_deg,
        "focal_px": camera.focal_px,
        "principal": [cx, cy],
        "width": camera.width,
        "height": camera.height,
        "far_plane": camera.far_plane,
    }


def camera_from_dict(data: dict) -> Camera:
    try:
        variant = data["variant"]
    except (KeyError, TypeError):
        raise CameraError("camera config needs a 'variant' key") from None
    try:
        if variant == "topdown":
            cx, cy = data.get("center", (0.0, 0.0))
            return TopDownCamera(
                center_x=float(cx),
                center_y=float(cy),
                meters_per_pixel=float(data.get("meters_per_pixel", 0.1)),
                width=int(data.get("width", 512)),
                height=int(data.get("height", 512)),
                ortho_height=float(data.get("ortho_height", 50.0)),
                far_plane=float(data.get("far_plane", 100.0)),
            )
        if variant == "pinhole":
            x, y, z = data["position"]
            principal = data.get("principal")
            return PinholeCamera(
                x=float(x),
                y=float(y),
                z=float(z),
                yaw_deg=float(data.get("yaw_deg", 0.0)),
                pitch_deg=float(data.get("pitch_deg", 0.0)),
                focal_px=float(data.get("focal_px", 256.0)),
                width=int(data.get("width", 512)),
                height=int(data.get("height", 512)),
                cx=None if principal is None else float(principal[0]),
                cy=None if principal is None else float(principal[1]),
                far_plane=float(data.get("far_plane", 100.0)),
            )
    except CameraError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise CameraError(f"malformed camera config: {e}") from None
    raise CameraError(f"unknown camera variant {variant!r}")


def default_camera(center: tuple[float, float] = (0.0, 0.0)) -> TopDownCamera:
    """Stock view: top-down at 0.1 m/px, 512x512, centered on `center`."""
    return TopDownCamera(center_x=center[0], center_y=center[1])
