"""Central densities: closed forms for the model shrinkers and toric polytope integrals.

For a toric shrinker the density reduces to a minimized exponential-weight
area of the moment polygon,

    F(c) = int_P exp(-c <w, x>) dx.

The integral is evaluated exactly.  The part of ``P`` below a level
``<w, x> = T`` past every vertex is split into triangles, each integrated
in closed form through a divided difference of ``exp``.  Above ``T`` the
slices of ``P`` are segments whose length is affine in the level, so the
tail integral is elementary.  ``log F`` is convex in ``c`` (a Laplace
transform of a positive measure), so the minimizer is unique.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.linalg import expm
from scipy.optimize import minimize_scalar

GEOM_TOL = 1e-12


class DivergentIntegralError(ValueError):
    """The weighted area is infinite for the requested ``c``."""


class NoMinimizerError(ValueError):
    pass


class PolytopeFormatError(ValueError):
    pass


@dataclass(frozen=True)
class HalfPlane:
    """``<normal, x> >= offset``."""

    normal: tuple[float, float]
    offset: float


@dataclass(frozen=True)
class Polyhedron2:
    halfplanes: tuple[HalfPlane, ...]
    weight: tuple[float, float]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(self.halfplanes) < 1:
            raise ValueError("need at least one half-plane")
        for hp in self.halfplanes:
            if np.hypot(*hp.normal) == 0:
                raise ValueError("half-plane normal must be nonzero")
        if len(self.vertices) == 0:
            raise ValueError("polyhedron has no vertices (empty, a strip or a half-plane)")
        if self.clipped_area() <= GEOM_TOL:
            raise ValueError("polyhedron has empty interior")

    # -- construction --------------------------------------------------------

    @classmethod
    def from_lists(cls, halfplanes, weight) -> Polyhedron2:
        hps = tuple(HalfPlane((float(n[0]), float(n[1])), float(r)) for n, r in halfplanes)
        return cls(hps, (float(weight[0]), float(weight[1])))

    @classmethod
    def from_json(cls, data) -> Polyhedron2:
        try:
            hps = [(hp["normal"], hp["offset"]) for hp in data["halfplanes"]]
            weight = data["weight"]
            if len(weight) != 2 or any(len(n) != 2 for n, _ in hps):
                raise PolytopeFormatError("normals and weight must have two entries")
            return cls.from_lists(hps, weight)
        except PolytopeFormatError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise PolytopeFormatError(f"malformed polytope: {exc}") from None

    @classmethod
    def load(cls, path) -> Polyhedron2:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise PolytopeFormatError(f"cannot read polytope file {path}: {exc}") from None
        return cls.from_json(data)

    # -- geometry ----------------------------------------------------------------

    @property
    def normals(self) -> np.ndarray:
        return np.array([hp.normal for hp in self.halfplanes], dtype=float)

    @property
    def offsets(self) -> np.ndarray:
        return np.array([hp.offset for hp in self.halfplanes], dtype=float)

    @property
    def w(self) -> np.ndarray:
        return np.array(self.weight, dtype=float)

    @property
    def vertices(self) -> np.ndarray:
        if "vertices" not in self._cache:
            self._cache["vertices"] = _vertices(self.normals, self.offsets)
        return self._cache["vertices"]

    def recession_directions(self) -> np.ndarray:
        """Unit extreme rays of the recession cone ``{d : N d >= 0}`` (empty if bounded)."""
        if "rays" not in self._cache:
            self._cache["rays"] = _extreme_rays(self.normals)
        return self._cache["rays"]

    @property
    def is_unbounded(self) -> bool:
        return len(self.recession_directions()) > 0

    def contains(self, pts, tol: float = 1e-12) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.all(pts @ self.normals.T - self.offsets >= -tol, axis=-1)

    def convergence_sign(self) -> int | None:
        """``+1`` if ``F(c)`` is finite exactly for ``c > 0``, ``None`` if finite for all ``c`` (bounded).

        Raises when no ``c`` gives a finite integral.
        """
        rays = self.recession_directions()
        if len(rays) == 0:
            return None
        levels = rays @ self.w
        if np.all(levels > GEOM_TOL):
            return 1
        if np.all(levels < -GEOM_TOL):
            return -1
        raise DivergentIntegralError("the weight has no decay direction on this polyhedron")

    def truncated(self, level: float) -> np.ndarray:
        """Ordered vertices of ``P  and  {<w, x> <= level}``."""
        normals = np.vstack([self.normals, -self.w])
        offsets = np.append(self.offsets, -level)
        return _ordered(_vertices(normals, offsets))

    def clipped_area(self) -> float:
        """Area of ``P`` intersected with a box around its vertices (positive iff the interior is nonempty)."""
        r = 1.0 + 2.0 * float(np.abs(self.vertices).max())
        box_n = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        pts = _vertices(np.vstack([self.normals, box_n]), np.append(self.offsets, [-r] * 4))
        return _polygon_area(_ordered(pts)) if len(pts) >= 3 else 0.0


def _vertices(normals: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    pts = []
    for i in range(len(normals)):
        for j in range(i + 1, len(normals)):
            mat = np.array([normals[i], normals[j]])
            if abs(np.linalg.det(mat)) < GEOM_TOL:
                continue
            p = np.linalg.solve(mat, [offsets[i], offsets[j]])
            scale = 1.0 + np.abs(p).max()
            if np.all(normals @ p - offsets >= -1e-10 * scale):
                if not any(np.allclose(p, q, atol=1e-10 * scale) for q in pts):
                    pts.append(p)
    return np.array(pts).reshape(-1, 2)


def _extreme_rays(normals: np.ndarray) -> np.ndarray:
    cand = []
    for n in normals:
        perp = np.array([-n[1], n[0]]) / np.hypot(*n)
        for d in (perp, -perp):
            if np.all(normals @ d >= -1e-12) and not any(np.allclose(d, q) for q in cand):
                cand.append(d)
    if not cand:
        return np.zeros((0, 2))
    cand = np.array(cand)
    # keep the two angular extremes (cone in the plane)
    if len(cand) > 2:
        mean = cand.sum(axis=0)
        if np.linalg.norm(mean) < 1e-12:
            return cand
        mean /= np.linalg.norm(mean)
        cross = mean[0] * cand[:, 1] - mean[1] * cand[:, 0]
        cand = cand[[int(np.argmin(cross)), int(np.argmax(cross))]]
    return cand


def _ordered(pts: np.ndarray) -> np.ndarray:
    centre = pts.mean(axis=0)
    ang = np.arctan2(pts[:, 1] - centre[1], pts[:, 0] - centre[0])
    return pts[np.argsort(ang, kind="stable")]


def _polygon_area(pts: np.ndarray) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


# -- exact integrals ---------------------------------------------------------------


def exp_divided_difference(a: float, b: float, c: float) -> float:
    """Second divided difference ``exp[a, b, c]`` (stable for coincident nodes)."""
    mat = np.array([[a, 1.0, 0.0], [0.0, b, 1.0], [0.0, 0.0, c]])
    return float(expm(mat)[0, 2])


def triangle_integral(p0, p1, p2, w, c: float) -> float:
    """``int_T exp(-c <w, x>) dx`` over the triangle ``p0 p1 p2``."""
    p0, p1, p2 = (np.asarray(p, dtype=float) for p in (p0, p1, p2))
    u, v = p1 - p0, p2 - p0
    area = 0.5 * abs(float(u[0] * v[1] - u[1] * v[0]))
    if area == 0.0:
        return 0.0
    # shift the exponent by its maximum to keep expm in range
    ex = np.array([-c * float(np.dot(w, p)) for p in (p0, p1, p2)])
    top = float(ex.max())
    return 2.0 * area * math.exp(top) * exp_divided_difference(*(ex - top))


def polygon_integral(vertices, w, c: float) -> float:
    pts = _ordered(np.asarray(vertices, dtype=float))
    return float(sum(triangle_integral(pts[0], pts[k], pts[k + 1], w, c) for k in range(1, len(pts) - 1)))


def _slice_length(poly: Polyhedron2, level: float) -> float:
    pts = poly.truncated(level)
    on_top = pts[np.abs(pts @ poly.w - level) <= 1e-9 * (1.0 + abs(level))]
    if len(on_top) < 2:
        return 0.0
    return float(np.linalg.norm(on_top.max(axis=0) - on_top.min(axis=0)))


def weighted_volume(poly: Polyhedron2, c: float) -> float:
    """``F(c) = int_P exp(-c <w, x>) dx``, exact up to rounding."""
    c = float(c)
    sign = poly.convergence_sign() if poly.is_unbounded else None
    if sign is None:
        return polygon_integral(poly.vertices, poly.w, c)
    if c * sign <= 0:
        raise DivergentIntegralError(f"F(c) diverges at c = {c}")
    w = poly.w * sign
    cs = c * sign
    levels = poly.vertices @ w
    top = float(levels.max()) + 1.0
    cut = Polyhedron2(poly.halfplanes, tuple(w))
    bounded = polygon_integral(cut.truncated(top), w, cs)
    # slice length ell(t) = alpha + beta (t - top) for t >= top; dx = dt ds / |w|
    alpha = _slice_length(cut, top)
    beta = _slice_length(cut, top + 1.0) - alpha
    tail = math.exp(-cs * top) * (alpha / cs + beta / cs**2) / float(np.linalg.norm(w))
    return bounded + tail


# -- minimization ----------------------------------------------------------------------


@dataclass(frozen=True)
class DensityResult:
    c_star: float
    F_min: float
    theta: float
    iterations: int
    bracket: tuple[float, float]
    degenerate: bool = False


def minimize_density(poly: Polyhedron2, prefactor: float = 1.0, xtol: float = 1e-10) -> DensityResult:
    """Minimize ``F`` over the ``c`` for which it is finite; ``theta = prefactor * F_min``."""
    if not np.any(poly.w):
        if poly.is_unbounded:
            raise NoMinimizerError("zero weight on an unbounded polyhedron: no decay direction")
        f0 = weighted_volume(poly, 0.0)
        return DensityResult(0.0, f0, prefactor * f0, 0, (0.0, 0.0), degenerate=True)
    sign = poly.convergence_sign() if poly.is_unbounded else None

    def log_f(c):
        return math.log(weighted_volume(poly, c))

    if sign is None:
        lo, mid, hi, evals = _bracket_additive(log_f)
    else:
        lo, mid, hi, evals = _bracket_geometric(lambda s: log_f(sign * s))
        lo, mid, hi = sorted((sign * lo, sign * mid, sign * hi))
    res = minimize_scalar(log_f, bracket=(lo, mid, hi), method="brent", options={"xtol": xtol, "maxiter": 500})
    c_star = float(res.x)
    f_min = weighted_volume(poly, c_star)
    return DensityResult(c_star, f_min, prefactor * f_min, int(res.nit) + evals, (float(lo), float(hi)))


def _bracket_geometric(fn, start: float = 1.0, max_steps: int = 80):
    """Bracket on ``(0, inf)`` by halving and doubling from ``start``."""
    mid, f_mid = start, fn(start)
    evals = 1
    lo = mid / 2.0
    f_lo = fn(lo)
    evals += 1
    while f_lo < f_mid:
        if evals > max_steps:
            raise NoMinimizerError("F keeps decreasing as c -> 0")
        mid, f_mid, lo = lo, f_lo, lo / 2.0
        f_lo = fn(lo)
        evals += 1
    hi = mid * 2.0
    f_hi = fn(hi)
    evals += 1
    while f_hi < f_mid:
        if evals > max_steps:
            raise NoMinimizerError("F keeps decreasing as c grows")
        lo, mid, f_mid, hi = mid, hi, f_hi, hi * 2.0
        f_hi = fn(hi)
        evals += 1
    return lo, mid, hi, evals


def _bracket_additive(fn, start: float = 1.0, max_steps: int = 80):
    """Bracket on the whole line with geometrically growing steps."""
    mid, f_mid = start, fn(start)
    evals = 1
    for direction in (-1.0, 1.0):
        step = 1.0
        nxt = mid + direction * step
        f_nxt = fn(nxt)
        evals += 1
        while f_nxt < f_mid:
            if evals > max_steps:
                raise NoMinimizerError("F keeps decreasing in c: no interior minimum")
            mid, f_mid = nxt, f_nxt
            step *= 2.0
            nxt = mid + direction * step
            f_nxt = fn(nxt)
            evals += 1
    lo, hi = mid - 1.0, mid + 1.0
    while fn(lo) < f_mid or fn(hi) < f_mid:
        lo, hi = mid - 2.0 * (mid - lo), mid + 2.0 * (hi - mid)
        evals += 2
        if evals > max_steps:
            raise NoMinimizerError("could not bracket the minimum")
    return lo, mid, hi, evals


# -- fixtures ------------------------------------------------------------------------------


def bccd_polytope() -> Polyhedron2:
    text = resources.files("kahlerstab").joinpath("data/bccd.json").read_text(encoding="utf-8")
    return Polyhedron2.from_json(json.loads(text))


#: prefactor between the minimized polygon integral and the density for this toric shrinker
BCCD_PREFACTOR = math.exp(-2.0)


def bccd_density() -> DensityResult:
    return minimize_density(bccd_polytope(), BCCD_PREFACTOR)


# Theta = (4 pi)^-2 int e^{-f} dmu with f normalized by f = scal + |grad f|^2.
# Volumes: S^4 of radius sqrt 6 is 96 pi^2, S^3 of radius 2 is 16 pi^2,
# S^2 of radius sqrt 2 is 8 pi, CP^2 with Ric = g/2 is 72 pi^2.
_CLOSED_FORMS = {
    "gaussian": lambda: 1.0,
    "sphere4": lambda: 6.0 * math.exp(-2.0),
    "cyl-s3xr": lambda: 2.0 * math.sqrt(math.pi) * math.exp(-1.5),
    "cyl-s2xr2": lambda: 2.0 * math.exp(-1.0),
    "fubini-study": lambda: 4.5 * math.exp(-2.0),
    "s2xs2": lambda: 4.0 * math.exp(-2.0),
}

CLOSED_FORM_MODELS = tuple(_CLOSED_FORMS)


def closed_form_density(model_name: str) -> float:
    try:
        return _CLOSED_FORMS[model_name]()
    except KeyError:
        raise KeyError(f"no closed-form density for {model_name!r}; known: {', '.join(CLOSED_FORM_MODELS)}") from None


# -- the comparison table ----------------------------------------------------------------


@dataclass(frozen=True)
class TableRow:
    name: str
    topology: str
    kahler: bool
    einstein: bool
    product: bool
    theta_published: str
    theta_computed: float | None
    stability: str
    source: str

    @property
    def flags(self) -> str:
        return "".join(f for f, on in (("K", self.kahler), ("E", self.einstein), ("P", self.product)) if on)


# name, topology, K, E, P, published value, stability, how the computed value is obtained
_TABLE = (
    ("Gaussian", "C^2", True, False, True, "1", "S", "gaussian"),
    ("Sphere", "S^4", False, True, False, "0.8120", "S", "sphere4"),
    ("Cylinder S^3 x R", "S^3 x R", False, False, True, "0.7910", "S", "cyl-s3xr"),
    ("Cylinder S^2 x R^2", "CP^1 x C", True, False, True, "0.7358", "S", "cyl-s2xr2"),
    ("FIK blowdown", "Bl_1 C^2", True, False, False, "0.6720", "S", None),
    ("Fubini-Study", "CP^2", True, True, False, "0.6090", "U", "fubini-study"),
    ("BCCD", "Bl_1(CP^1 x C)", True, False, False, "0.5617", "U", "bccd"),
    ("Product of spheres", "CP^1 x CP^1", True, True, True, "0.5413", "U", None),
    ("Koiso-Cao", "Bl_1 CP^2", True, False, False, "0.5179", "U", None),
    ("Page", "Bl_1 CP^2", False, True, False, "0.5172", "U", None),
    ("Chen-LeBrun-Weber", "Bl_2 CP^2", False, True, False, "0.4552", "U", None),
    ("Wang-Zhu", "Bl_2 CP^2", True, False, False, "0.4549", "U", None),
    ("Blowups of CP^2, 3 <= k <= 8", "Bl_k CP^2", True, True, False, "<0.406", "U", None),
)


def density_table_report() -> list[TableRow]:
    rows = []
    for name, topo, k, e, p, published, stab, how in _TABLE:
        if how is None:
            value, source = None, "not computed"
        elif how == "bccd":
            value, source = bccd_density().theta, "polytope minimization"
        else:
            value, source = closed_form_density(how), "closed form"
        rows.append(TableRow(name, topo, k, e, p, published, value, stab, source))
    return rows
