"""Uniform space-time grids, datasets, the noise model and dataset file I/O.

Datasets are stored time-major: ``values[n]`` is the spatial slice at time
index ``n`` (shape ``(n_x+1,)`` in 1D, ``(n_x+1, n_y+1)`` in 2D).  Arrays are
marked read-only after construction so datasets can be shared across
parallel trials.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSignal, FormatError, StrideMismatch

DATA_MAGIC = "IDENTWV-DATA v1"

# Gaussian draws come from numpy's default_rng (PCG64).  The algorithm is
# pinned here so that seeded trials reproduce across platforms.
def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


@dataclass(frozen=True)
class Grid:
    """Uniform grid on [x_min, x_max] x [0, t_max] with n_x / n_t sub-intervals.

    ``x_min``, ``x_max`` and ``n_x`` hold one entry per spatial dimension.
    Grid points are x_i = x_min + i*dx (i = 0..n_x) and t_n = n*dt
    (n = 0..n_t), so each axis carries count+1 points.
    """

    spatial_dims: int
    x_min: tuple[float, ...]
    x_max: tuple[float, ...]
    t_max: float
    n_x: tuple[int, ...]
    n_t: int

    def __post_init__(self):
        if self.spatial_dims not in (1, 2):
            raise ValueError(f"spatial_dims must be 1 or 2, got {self.spatial_dims}")
        for name in ("x_min", "x_max", "n_x"):
            v = getattr(self, name)
            if np.isscalar(v):
                v = (v,)
            object.__setattr__(self, name, tuple(v))
        if len(self.x_min) != self.spatial_dims or len(self.x_max) != self.spatial_dims \
                or len(self.n_x) != self.spatial_dims:
            raise ValueError("per-dimension fields must match spatial_dims")
        if any(hi <= lo for lo, hi in zip(self.x_min, self.x_max)):
            raise ValueError("x_max must exceed x_min")
        if self.t_max <= 0:
            raise ValueError("t_max must be positive")
        if any(n < 1 for n in self.n_x) or self.n_t < 1:
            raise ValueError("interval counts must be >= 1")

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple((hi - lo) / n for lo, hi, n in zip(self.x_min, self.x_max, self.n_x))

    @property
    def dt(self) -> float:
        return self.t_max / self.n_t

    @property
    def shape(self) -> tuple[int, ...]:
        """Array shape of one full trajectory, time axis first."""
        return (self.n_t + 1,) + tuple(n + 1 for n in self.n_x)

    def x_coords(self, dim: int = 0) -> np.ndarray:
        return self.x_min[dim] + np.arange(self.n_x[dim] + 1) * self.dx[dim]

    def t_coords(self) -> np.ndarray:
        return np.arange(self.n_t + 1) * self.dt


@dataclass(frozen=True)
class Dataset:
    """Sampled field values on a grid, optionally paired with the clean field.

    ``meta`` carries free-form string metadata that round-trips through the
    dataset file format (for example the simulation spec echo).
    """

    grid: Grid
    values: np.ndarray
    clean_values: np.ndarray | None = None
    meta: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        if self.clean_values is not None:
            c = np.asarray(self.clean_values, dtype=np.float64)
            if c.shape != v.shape:
                raise ValueError("clean_values shape must match values shape")
            c = c.copy()
            c.setflags(write=False)
            object.__setattr__(self, "clean_values", c)

    @property
    def clean(self) -> np.ndarray:
        """The noise-free field: clean_values when present, else values."""
        return self.values if self.clean_values is None else self.clean_values


@dataclass(frozen=True)
class NoiseSpec:
    """Noise-to-signal ratio and PRNG seed for one noisy realization."""

    sigma_nsr: float
    seed: int = 0

    def __post_init__(self):
        if self.sigma_nsr < 0:
            raise ValueError("sigma_nsr must be nonnegative")


def nsr_sigma(dataset: Dataset, sigma_nsr: float) -> float:
    """Noise standard deviation for a target noise-to-signal ratio.

    sigma^2 = sigma_nsr^2 * mean |U - (max U + min U)/2|^2, with the mean,
    max and min taken over every grid point of the clean field.  The
    midrange centering makes the ratio invariant under shifts U -> U + c.
    """
    if sigma_nsr == 0:
        return 0.0
    base = dataset.clean
    mid = 0.5 * (base.max() + base.min())
    msq = np.mean((base - mid) ** 2)
    if msq == 0:
        raise DegenerateSignal("constant data: midrange-centered energy is zero")
    return float(sigma_nsr * np.sqrt(msq))


def add_noise(dataset: Dataset, spec: NoiseSpec) -> Dataset:
    """Add i.i.d. Gaussian noise at the requested noise-to-signal ratio.

    The clean field is preserved in ``clean_values``.  Output is
    deterministic given ``spec.seed`` (PCG64 stream).
    """
    clean = dataset.clean
    if spec.sigma_nsr == 0:
        return Dataset(dataset.grid, clean, clean_values=clean, meta=dict(dataset.meta))
    sigma = nsr_sigma(dataset, spec.sigma_nsr)
    noise = _rng(spec.seed).standard_normal(clean.shape) * sigma
    return Dataset(dataset.grid, clean + noise, clean_values=clean, meta=dict(dataset.meta))


def subsample(dataset: Dataset, stride_x: int, stride_t: int,
              stride_y: int | None = None) -> Dataset:
    """Coarsen a dataset by integer strides that divide the interval counts."""
    g = dataset.grid
    if stride_y is None:
        stride_y = stride_x
    strides_x = (stride_x,) if g.spatial_dims == 1 else (stride_x, stride_y)
    for n, s in zip(g.n_x, strides_x):
        if s < 1 or n % s:
            raise StrideMismatch(f"spatial stride {s} does not divide {n}")
    if stride_t < 1 or g.n_t % stride_t:
        raise StrideMismatch(f"time stride {stride_t} does not divide {g.n_t}")
    coarse = Grid(g.spatial_dims, g.x_min, g.x_max, g.t_max,
                  tuple(n // s for n, s in zip(g.n_x, strides_x)), g.n_t // stride_t)
    sel = (slice(None, None, stride_t),) + tuple(slice(None, None, s) for s in strides_x)
    clean = dataset.clean_values[sel] if dataset.clean_values is not None else None
    return Dataset(coarse, dataset.values[sel], clean_values=clean, meta=dict(dataset.meta))


# ---------------------------------------------------------------------------
# Dataset file format
#
#   IDENTWV-DATA v1
#   dims=<1|2>
#   n_x=<int>  [n_y=<int>]  n_t=<int>
#   x_min=... x_max=...  [y_min=... y_max=...]  t_max=...
#   has_clean=<0|1>
#   <extra key=value metadata, sorted>
#   data
#   <one block per time slice; 1D: one line of n_x+1 values,
#    2D: n_x+1 lines of n_y+1 values; blocks separated by blank lines>
#   [clean
#    <same block layout for the clean field>]
#
# Values are written with 17 significant digits, which round-trips IEEE
# 64-bit floats exactly.
# ---------------------------------------------------------------------------

_RESERVED_KEYS = ("dims", "n_x", "n_y", "n_t", "x_min", "x_max",
                  "y_min", "y_max", "t_max", "has_clean")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_blocks(fh, arr: np.ndarray) -> None:
    for n in range(arr.shape[0]):
        sl = arr[n]
        if sl.ndim == 1:
            fh.write(" ".join(_fmt(v) for v in sl) + "\n")
        else:
            for row in sl:
                fh.write(" ".join(_fmt(v) for v in row) + "\n")
        fh.write("\n")


def save_dataset(dataset: Dataset, path: str) -> None:
    """Write a dataset in the versioned plain-text format described above."""
    g = dataset.grid
    with open(path, "w") as fh:
        fh.write(DATA_MAGIC + "\n")
        fh.write(f"dims={g.spatial_dims}\n")
        fh.write(f"n_x={g.n_x[0]}\n")
        if g.spatial_dims == 2:
            fh.write(f"n_y={g.n_x[1]}\n")
        fh.write(f"n_t={g.n_t}\n")
        fh.write(f"x_min={_fmt(g.x_min[0])}\nx_max={_fmt(g.x_max[0])}\n")
        if g.spatial_dims == 2:
            fh.write(f"y_min={_fmt(g.x_min[1])}\ny_max={_fmt(g.x_max[1])}\n")
        fh.write(f"t_max={_fmt(g.t_max)}\n")
        fh.write(f"has_clean={int(dataset.clean_values is not None)}\n")
        for k in sorted(dataset.meta):
            if k in _RESERVED_KEYS or "=" in k or k in ("data", "clean"):
                raise FormatError(f"illegal metadata key: {k!r}")
            fh.write(f"{k}={dataset.meta[k]}\n")
        fh.write("data\n")
        _write_blocks(fh, dataset.values)
        if dataset.clean_values is not None:
            fh.write("clean\n")
            _write_blocks(fh, dataset.clean_values)


def _read_blocks(lines: list[str], start: int, shape: tuple[int, ...]) -> tuple[np.ndarray, int]:
    rows_per_slice = 1 if len(shape) == 2 else shape[1]
    flat: list[np.ndarray] = []
    i = start
    needed = shape[0] * rows_per_slice
    while len(flat) < needed and i < len(lines):
        line = lines[i].strip()
        i += 1
        if not line:
            continue
        flat.append(np.array(line.split(), dtype=np.float64))
    if len(flat) != needed:
        raise FormatError("truncated data section")
    arr = np.stack(flat).reshape(shape)
    return arr, i


def load_dataset(path: str) -> Dataset:
    """Read a dataset file written by :func:`save_dataset`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != DATA_MAGIC:
        raise FormatError(f"not an identwv dataset file (expected header {DATA_MAGIC!r})")
    header: dict[str, str] = {}
    i = 1
    while i < len(lines):
        line = lines[i].strip()
        i += 1
        if line == "data":
            break
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"malformed metadata line: {line!r}")
        k, v = line.split("=", 1)
        header[k.strip()] = v.strip()
    else:
        raise FormatError("missing data section")
    try:
        dims = int(header["dims"])
        n_x = (int(header["n_x"]),) if dims == 1 else (int(header["n_x"]), int(header["n_y"]))
        x_min = (float(header["x_min"]),) if dims == 1 \
            else (float(header["x_min"]), float(header["y_min"]))
        x_max = (float(header["x_max"]),) if dims == 1 \
            else (float(header["x_max"]), float(header["y_max"]))
        grid = Grid(dims, x_min, x_max, float(header["t_max"]), n_x, int(header["n_t"]))
        has_clean = bool(int(header["has_clean"]))
    except (KeyError, ValueError) as exc:
        raise FormatError(f"bad or missing header field: {exc}") from exc
    meta = {k: v for k, v in header.items() if k not in _RESERVED_KEYS}
    values, i = _read_blocks(lines, i, grid.shape)
    clean = None
    if has_clean:
        while i < len(lines) and not lines[i].strip():
            i += 1
        if i >= len(lines) or lines[i].strip() != "clean":
            raise FormatError("missing clean section")
        clean, i = _read_blocks(lines, i + 1, grid.shape)
    return Dataset(grid, values, clean_values=clean, meta=meta)
