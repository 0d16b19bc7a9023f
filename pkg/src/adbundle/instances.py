"""Random l1 feasibility instances and their problem constants.

An instance is  minimize ||A x - b||_1 over x >= 0  with b = A x* for a
known nonnegative x*, so the optimal value is 0.  Dense instances use
A = N U with N standard normal and U uniform on [0, 100]; sparse instances
use A = D N with sparse standard-normal N and a uniform-[0, 1000] diagonal D.

Randomness comes from the counter-based Philox generator with one stream
per generated array, keyed by (seed, array label), so each array is
reproducible independently of generation order.  Normal variates are drawn
through the Box-Muller transform applied to that stream's uniforms, which
pins the exact bytes produced for a given seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np
import scipy.sparse as sp
from scipy.io import mmwrite

from .errors import DegenerateInstanceError, InvalidBoxError
from .objective import CompositeObjective, L1ResidualOracle, SimpleTerm

_STREAM_IDS = {
    "dense_N": 1,
    "dense_U": 2,
    "sparse_positions": 3,
    "sparse_values": 4,
    "sparse_D": 5,
    "x_star": 6,
    "x0": 7,
}


def stream(seed: int, label: str) -> np.random.Generator:
    """Philox stream for one named array of one instance."""
    return np.random.Generator(np.random.Philox(key=[seed, _STREAM_IDS[label]]))


def _uniform(gen: np.random.Generator, size, low=0.0, high=1.0) -> np.ndarray:
    return low + (high - low) * gen.random(size)


def _standard_normal(gen: np.random.Generator, count: int) -> np.ndarray:
    """Box-Muller normals from the stream's uniforms (pairs, truncated)."""
    half = (count + 1) // 2
    u1 = 1.0 - gen.random(half)  # (0, 1], keeps log finite
    u2 = gen.random(half)
    r = np.sqrt(-2.0 * np.log(u1))
    z = np.concatenate([r * np.cos(2.0 * np.pi * u2), r * np.sin(2.0 * np.pi * u2)])
    return z[:count]


@dataclass(frozen=True)
class Instance:
    """Problem data plus the seed that generated it."""

    A: object  # dense ndarray or scipy CSR matrix
    b: np.ndarray
    x_star: np.ndarray
    x0: np.ndarray
    phi_star: float
    domain: SimpleTerm
    seed: int
    density: float | None = None  # None marks dense construction

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.A)


@dataclass(frozen=True)
class InstanceConstants:
    M: float
    L: float
    D: float
    d0: float


def _points(seed: int, n: int):
    x_star = _standard_normal(stream(seed, "x_star"), n) ** 2
    x0 = stream(seed, "x0").random(n) ** 2
    return x_star, x0


def gen_dense(m: int, n: int, seed: int) -> Instance:
    """Dense instance A = N U (see module docstring)."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    N = _standard_normal(stream(seed, "dense_N"), m * n).reshape(m, n)
    U = _uniform(stream(seed, "dense_U"), (n, n), 0.0, 100.0)
    A = N @ U
    x_star, x0 = _points(seed, n)
    b = A @ x_star
    return Instance(
        A=A, b=b, x_star=x_star, x0=x0, phi_star=0.0,
        domain=SimpleTerm.nonneg(n), seed=seed,
    )


def gen_sparse(m: int, n: int, density: float, seed: int) -> Instance:
    """Sparse instance A = D N with nnz ~ density*m*n uniform positions."""
    if not 0.0 < density <= 1.0:
        raise ValueError("density must lie in (0, 1]")
    nnz = int(round(density * m * n))
    if nnz < 1:
        raise DegenerateInstanceError(
            f"density {density} gives zero nonzeros for {m}x{n}"
        )
    pos = stream(seed, "sparse_positions").choice(m * n, size=nnz, replace=False)
    pos.sort()
    rows, cols = np.divmod(pos, n)
    vals = _standard_normal(stream(seed, "sparse_values"), nnz)
    N = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
    d = _uniform(stream(seed, "sparse_D"), m, 0.0, 1000.0)
    A = sp.csr_matrix(sp.diags(d) @ N)
    x_star, x0 = _points(seed, n)
    b = np.asarray(A @ x_star).ravel()
    return Instance(
        A=A, b=b, x_star=x_star, x0=x0, phi_star=0.0,
        domain=SimpleTerm.nonneg(n), seed=seed, density=density,
    )


def compute_constants(instance: Instance) -> InstanceConstants:
    """Subgradient-variation bound M, L = 0, domain diameter, and the
    start-to-minimizer distance d0.

    Every subgradient of ||A x - b||_1 is A^T s with s in [-1, 1]^m, so the
    2-norm of the column absolute sums bounds ||A^T s|| and twice that
    bounds any subgradient difference.  The exact sup over sign patterns is
    NP-hard; the bounds below stay valid with any upper bound on M.
    """
    A = instance.A
    if instance.is_sparse:
        col_abs = np.asarray(abs(A).sum(axis=0)).ravel()
    else:
        col_abs = np.abs(A).sum(axis=0)
    M = float(np.linalg.norm(col_abs))
    D = instance.domain.diameter()
    d0 = float(np.linalg.norm(instance.x0 - instance.x_star))
    return InstanceConstants(M=M, L=0.0, D=D, d0=d0)


def boxed_variant(instance: Instance, radius: float) -> Instance:
    """Restrict the domain to [0, radius]^n; keeps the optimum when the
    radius covers every component of x_star."""
    if radius < float(instance.x_star.max()):
        raise InvalidBoxError(
            f"radius {radius} excludes x_star (max component "
            f"{instance.x_star.max():.6g})"
        )
    n = instance.n
    box = SimpleTerm.box(np.zeros(n), np.full(n, float(radius)))
    return replace(instance, domain=box)


def make_objective(instance: Instance, known_optimum: bool = True) -> CompositeObjective:
    """Composite objective for the instance; known_optimum=False hides
    phi* from the solver (for the lower-bound-estimating variants)."""
    oracle = L1ResidualOracle(instance.A, instance.b)
    return CompositeObjective(
        f_oracle=oracle,
        h=instance.domain,
        known_optimum=instance.phi_star if known_optimum else None,
    )


# --- serialization -------------------------------------------------------
#
# Text container, one instance per file:
#   line 1:  "adbundle-instance v1"
#   line 2:  JSON header with keys format ("dense"|"csr"), m, n, density,
#            seed, box_radius (null unless the domain is a box)
#   then, in order, one section per array:
#     dense:  "A" line, then m lines of n space-separated %.17g values
#     csr:    "A nnz" line, then nnz lines "row col value" (0-based)
#   and for both: "b" / "x_star" / "x0" lines, each followed by one line
#   of space-separated %.17g values.
# %.17g round-trips float64 exactly, so save/load is bit-faithful and a
# fixed seed produces identical file bytes.

MAGIC = "adbundle-instance v1"


def _fmt(values: np.ndarray) -> str:
    return " ".join(f"{v:.17g}" for v in values)


def save_instance(instance: Instance, path) -> None:
    box_radius = None
    if instance.domain.kind == "box":
        box_radius = float(instance.domain.upper[0])
    header = {
        "format": "csr" if instance.is_sparse else "dense",
        "m": instance.m,
        "n": instance.n,
        "density": instance.density,
        "seed": instance.seed,
        "box_radius": box_radius,
    }
    with open(path, "w") as fh:
        fh.write(MAGIC + "\n")
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        if instance.is_sparse:
            coo = instance.A.tocoo()
            fh.write(f"A {coo.nnz}\n")
            for i, j, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{i} {j} {v:.17g}\n")
        else:
            fh.write("A\n")
            for row in instance.A:
                fh.write(_fmt(row) + "\n")
        for name in ("b", "x_star", "x0"):
            fh.write(name + "\n")
            fh.write(_fmt(getattr(instance, name)) + "\n")


def load_instance(path) -> Instance:
    with open(path) as fh:
        if fh.readline().strip() != MAGIC:
            raise ValueError(f"{path} is not an instance container")
        header = json.loads(fh.readline())
        m, n = header["m"], header["n"]
        tag = fh.readline().split()
        if header["format"] == "csr":
            nnz = int(tag[1])
            rows = np.empty(nnz, dtype=int)
            cols = np.empty(nnz, dtype=int)
            vals = np.empty(nnz)
            for k in range(nnz):
                i, j, v = fh.readline().split()
                rows[k], cols[k], vals[k] = int(i), int(j), float(v)
            A = sp.csr_matrix((vals, (rows, cols)), shape=(m, n))
        else:
            A = np.array(
                [[float(v) for v in fh.readline().split()] for _ in range(m)]
            )
        arrays = {}
        for _ in range(3):
            name = fh.readline().strip()
            arrays[name] = np.array([float(v) for v in fh.readline().split()])
    domain = SimpleTerm.nonneg(n)
    if header.get("box_radius") is not None:
        domain = SimpleTerm.box(np.zeros(n), np.full(n, header["box_radius"]))
    return Instance(
        A=A, b=arrays["b"], x_star=arrays["x_star"], x0=arrays["x0"],
        phi_star=0.0, domain=domain, seed=header["seed"],
        density=header["density"],
    )


def export_matrix_market(instance: Instance, path) -> None:
    """Write A in Matrix Market format for interoperability."""
    mmwrite(path, sp.coo_matrix(instance.A) if instance.is_sparse else instance.A)
