"""Grayscale raster primitives: binarize, dilate, edges, rotate, resize, I/O.

Everything operates on 8-bit grayscale images wrapped in GrayImage or on
boolean foreground masks wrapped in BinaryImage. All operations return new
images; pixel buffers are never mutated in place.

Conventions: row 0 is the top of the image, x grows rightward, y grows
downward. "Clockwise" means clockwise as the image is displayed.
"""
from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

__all__ = [
    "GrayImage",
    "BinaryImage",
    "RotationDirection",
    "binarize",
    "dilate3x3",
    "canny",
    "rotate_about_center",
    "upscale_preserve_aspect",
    "crop",
    "trim_sides",
    "mask_to_gray",
    "read_image",
    "write_image",
]


@dataclass(frozen=True, eq=False)
class GrayImage:
    """A 2-D uint8 grayscale image, at least 1x1."""

    px: np.ndarray

    def __post_init__(self) -> None:
        if self.px.ndim != 2 or self.px.dtype != np.uint8:
            raise ValueError("GrayImage needs a 2-D uint8 array")
        if self.px.size == 0:
            raise ValueError("GrayImage must have at least one pixel")

    @property
    def width(self) -> int:
        return self.px.shape[1]

    @property
    def height(self) -> int:
        return self.px.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """A 2-D boolean foreground mask, same shape as the image it came from."""

    px: np.ndarray

    def __post_init__(self) -> None:
        if self.px.ndim != 2 or self.px.dtype != np.bool_:
            raise ValueError("BinaryImage needs a 2-D bool array")
        if self.px.size == 0:
            raise ValueError("BinaryImage must have at least one pixel")

    @property
    def width(self) -> int:
        return self.px.shape[1]

    @property
    def height(self) -> int:
        return self.px.shape[0]


class RotationDirection(enum.Enum):
    CLOCKWISE = "clockwise"
    ANTICLOCKWISE = "anticlockwise"


def binarize(img: GrayImage) -> BinaryImage:
    """Otsu threshold; foreground is every pixel <= the chosen threshold.

    The threshold maximizing between-class variance is picked; on ties the
    lowest threshold wins. A constant image has no separating threshold and
    yields an all-background mask.
    """
    hist = np.bincount(img.px.ravel(), minlength=256).astype(np.float64)
    levels = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    w1 = w0[-1] - w0
    csum = np.cumsum(hist * levels)
    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        return BinaryImage(np.zeros_like(img.px, dtype=bool))
    mu0 = np.divide(csum, w0, out=np.zeros(256), where=valid)
    mu1 = np.divide(csum[-1] - csum, w1, out=np.zeros(256), where=valid)
    sigma_b = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -1.0)
    t = int(np.argmax(sigma_b))
    return BinaryImage(img.px <= t)


def dilate3x3(mask: BinaryImage) -> BinaryImage:
    """Binary dilation with a full 3x3 structuring element.

    Pixels outside the image are treated as background, so foreground
    touching the border grows inward only.
    """
    p = np.pad(mask.px, 1, mode="constant", constant_values=False)
    out = np.zeros_like(mask.px)
    for dy in (0, 1, 2):
        for dx in (0, 1, 2):
            out |= p[dy : dy + mask.height, dx : dx + mask.width]
    return BinaryImage(out)


_GAUSS5 = None


def _gauss5_kernel() -> np.ndarray:
    global _GAUSS5
    if _GAUSS5 is None:
        xs = np.arange(-2, 3, dtype=np.float64)
        k = np.exp(-(xs**2) / (2.0 * 1.4**2))
        _GAUSS5 = k / k.sum()
    return _GAUSS5


def _conv1d(arr: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    # edge-replicate padding, same-size output
    r = len(kernel) // 2
    pad = [(0, 0), (0, 0)]
    pad[axis] = (r, r)
    p = np.pad(arr, pad, mode="edge")
    out = np.zeros_like(arr, dtype=np.float64)
    for i, kv in enumerate(kernel):
        if axis == 0:
            out += kv * p[i : i + arr.shape[0], :]
        else:
            out += kv * p[:, i : i + arr.shape[1]]
    return out


def _sobel(arr: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Plain 3x3 Sobel gradients, unnormalized."""
    smooth = np.array([1.0, 2.0, 1.0])
    diff = np.array([-1.0, 0.0, 1.0])
    gx = _conv1d(_conv1d(arr, smooth, axis=0), diff, axis=1)
    gy = _conv1d(_conv1d(arr, smooth, axis=1), diff, axis=0)
    return gx, gy


def canny(img: GrayImage, low: float = 50.0, high: float = 150.0) -> BinaryImage:
    """Canny edges: 5x5 Gaussian (sigma 1.4), Sobel, thin, hysteresis.

    `low`/`high` threshold the raw Sobel magnitude of a 0-255 input, the
    same convention the usual (50, 150) defaults assume elsewhere;
    low == high degenerates to a single threshold. Border pixels and
    zero-gradient pixels are never edges.
    """
    if not 0.0 <= low <= high:
        raise ValueError(f"need 0 <= low <= high, got low={low!r} high={high!r}")
    blur = _conv1d(_conv1d(img.px.astype(np.float64), _gauss5_kernel(), 0), _gauss5_kernel(), 1)
    gx, gy = _sobel(blur)
    mag = np.hypot(gx, gy)
    mag[0, :] = mag[-1, :] = 0.0
    mag[:, 0] = mag[:, -1] = 0.0

    ang = np.degrees(np.arctan2(gy, gx)) % 180.0
    # quantize gradient direction to 4 bins and compare along it; the >= / >
    # asymmetry keeps exactly one pixel of a two-wide plateau
    fwd = np.zeros_like(mag)
    bwd = np.zeros_like(mag)
    shifts = {
        0: (0, 1),  # gradient ~horizontal: compare east/west
        1: (1, 1),  # 45 deg: south-east / north-west (y grows down)
        2: (1, 0),  # vertical: south/north
        3: (1, -1),  # 135 deg: south-west / north-east
    }
    bins = np.zeros(mag.shape, dtype=np.int8)
    bins[(ang >= 22.5) & (ang < 67.5)] = 1
    bins[(ang >= 67.5) & (ang < 112.5)] = 2
    bins[(ang >= 112.5) & (ang < 157.5)] = 3
    padm = np.pad(mag, 1, mode="constant")
    h, w = mag.shape
    for b, (dy, dx) in shifts.items():
        sel = bins == b
        fwd[sel] = padm[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w][sel]
        bwd[sel] = padm[1 - dy : 1 - dy + h, 1 - dx : 1 - dx + w][sel]
    keep = (mag > 0) & (mag >= fwd) & (mag > bwd)

    weak = keep & (mag >= low) & (mag > 0)
    strong = keep & (mag >= high)
    if not strong.any():
        return BinaryImage(np.zeros_like(weak))
    labels, n = ndimage.label(weak, structure=np.ones((3, 3), dtype=int))
    good = np.unique(labels[strong])
    out = np.isin(labels, good[good > 0])
    return BinaryImage(out)


def _bilinear(px: np.ndarray, xs: np.ndarray, ys: np.ndarray, fill: float) -> np.ndarray:
    """Sample px at float coords; neighbors outside the image read `fill`."""
    h, w = px.shape
    x0 = np.floor(xs)
    y0 = np.floor(ys)
    fx = xs - x0
    fy = ys - y0
    x0 = x0.astype(np.int64)
    y0 = y0.astype(np.int64)
    acc = np.zeros(xs.shape, dtype=np.float64)
    for dy in (0, 1):
        for dx in (0, 1):
            wgt = (fx if dx else 1.0 - fx) * (fy if dy else 1.0 - fy)
            xi = x0 + dx
            yi = y0 + dy
            inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            vals = np.where(
                inside,
                px[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)].astype(np.float64),
                fill,
            )
            acc += wgt * vals
    return acc


def rotate_about_center(
    img: GrayImage, angle_deg: float, direction: RotationDirection
) -> GrayImage:
    """Rotate about the image center onto an expanded white canvas.

    The canvas grows to hold the whole rotated image; uncovered canvas is
    white (255). Multiples of 90 degrees are exact pixel permutations;
    everything else is bilinear. `angle_deg` must be >= 0, the sign of the
    turn comes from `direction`.
    """
    if not math.isfinite(angle_deg) or angle_deg < 0:
        raise ValueError(f"angle must be finite and >= 0: {angle_deg!r}")
    angle = angle_deg % 360.0
    if angle == 0.0:
        return GrayImage(img.px.copy())
    if angle % 90.0 == 0.0:
        k = int(angle // 90.0)
        if direction is RotationDirection.CLOCKWISE:
            k = -k
        return GrayImage(np.ascontiguousarray(np.rot90(img.px, k)))

    # visual-clockwise-positive signed angle in y-down coordinates
    a = math.radians(angle if direction is RotationDirection.CLOCKWISE else -angle)
    h, w = img.px.shape
    ca, sa = abs(math.cos(a)), abs(math.sin(a))
    out_w = max(1, math.ceil(w * ca + h * sa - 1e-9))
    out_h = max(1, math.ceil(h * ca + w * sa - 1e-9))
    dx = np.arange(out_w, dtype=np.float64) - (out_w - 1) / 2.0
    dy = np.arange(out_h, dtype=np.float64) - (out_h - 1) / 2.0
    gx, gy = np.meshgrid(dx, dy)
    cos_a, sin_a = math.cos(a), math.sin(a)
    xs = cos_a * gx + sin_a * gy + (w - 1) / 2.0
    ys = -sin_a * gx + cos_a * gy + (h - 1) / 2.0
    vals = _bilinear(img.px, xs, ys, fill=255.0)
    return GrayImage(np.clip(np.rint(vals), 0, 255).astype(np.uint8))


def upscale_preserve_aspect(img: GrayImage, target_height: int) -> GrayImage:
    """Bilinear upscale to `target_height`, width scaled to keep aspect.

    Target heights below the source height are rejected; equal height
    returns a copy.
    """
    if target_height < img.height:
        raise ValueError(
            f"target height {target_height} below source height {img.height}"
        )
    if target_height == img.height:
        return GrayImage(img.px.copy())
    h, w = img.px.shape
    out_h = target_height
    out_w = max(1, int(math.floor(w * target_height / h + 0.5)))
    xs = np.clip((np.arange(out_w) + 0.5) * (w / out_w) - 0.5, 0, w - 1)
    ys = np.clip((np.arange(out_h) + 0.5) * (h / out_h) - 0.5, 0, h - 1)
    gx, gy = np.meshgrid(xs, ys)
    vals = _bilinear(img.px, gx, gy, fill=255.0)
    return GrayImage(np.clip(np.rint(vals), 0, 255).astype(np.uint8))


def crop(img: GrayImage, rect) -> GrayImage:
    """Copy the part of `rect` that lies inside the image.

    The rect is clipped to the image bounds first; a rect entirely outside
    the image is an error.
    """
    x0 = max(rect.x, 0)
    y0 = max(rect.y, 0)
    x1 = min(rect.x + rect.w, img.width)
    y1 = min(rect.y + rect.h, img.height)
    if x1 <= x0 or y1 <= y0:
        raise ValueError(f"crop rect {rect} lies outside {img.width}x{img.height}")
    return GrayImage(img.px[y0:y1, x0:x1].copy())


def trim_sides(img: GrayImage, fraction: float) -> GrayImage:
    """Drop floor(fraction * width) columns from each side.

    `fraction` must be in [0, 0.25]; small images where nothing would
    remain are an error (cannot happen for fraction <= 0.25, kept as a
    guard).
    """
    if not 0.0 <= fraction <= 0.25:
        raise ValueError(f"trim fraction out of [0, 0.25]: {fraction!r}")
    k = int(math.floor(fraction * img.width))
    if img.width - 2 * k < 1:
        raise ValueError("trim would remove the whole image")
    if k == 0:
        return GrayImage(img.px.copy())
    return GrayImage(img.px[:, k : img.width - k].copy())


def mask_to_gray(mask: BinaryImage) -> GrayImage:
    """Render a mask as white-on-black grayscale (foreground 255)."""
    return GrayImage(np.where(mask.px, 255, 0).astype(np.uint8))


# match() anchors at the scan position, so no ^ here: it would pin to byte 0
_PGM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def _pgm_read(data: bytes) -> np.ndarray:
    pos = 0
    tokens = []
    while len(tokens) < 4:
        m = _PGM_TOKEN.match(data, pos)
        if not m:
            raise ValueError("truncated PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise ValueError(f"not a binary PGM (magic {tokens[0]!r})")
    try:
        w, h, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    except ValueError as exc:
        raise ValueError(f"bad PGM header: {exc}") from None
    if w < 1 or h < 1:
        raise ValueError(f"bad PGM dimensions {w}x{h}")
    if not 0 < maxval <= 255:
        raise ValueError(f"unsupported PGM maxval {maxval}")
    pos += 1  # single whitespace byte after maxval
    raster = data[pos : pos + w * h]
    if len(raster) != w * h:
        raise ValueError("truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w).copy()


def read_image(path: str | Path) -> GrayImage:
    """Read a PNG (8-bit gray or RGB via luma) or binary PGM as grayscale."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pgm":
        return GrayImage(_pgm_read(path.read_bytes()))
    if suffix != ".png":
        raise ValueError(f"unsupported image format: {path.name}")
    with Image.open(path) as im:
        if im.mode == "L":
            arr = np.asarray(im, dtype=np.uint8).copy()
        elif im.mode == "RGB":
            rgb = np.asarray(im, dtype=np.float64)
            luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
            arr = np.floor(luma + 0.5).astype(np.uint8)
        else:
            raise ValueError(f"unsupported PNG mode {im.mode!r} in {path.name}")
    return GrayImage(arr)


def write_image(path: str | Path, img: GrayImage) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".png":
        Image.fromarray(img.px, mode="L").save(path, format="PNG")
    elif suffix == ".pgm":
        header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
        path.write_bytes(header + img.px.tobytes())
    else:
        raise ValueError(f"unsupported image format: {path.name}")
