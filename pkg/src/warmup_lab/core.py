"""Shared numeric kernel: parameter points, objectives, and derivative probes.

Everything downstream (problems, optimizers, smoothness estimation, theory
checkers) speaks in terms of the two types defined here: a ``ParamPoint`` is
an immutable flat parameter vector with named, shaped blocks, and an
``Objective`` bundles the callables and optional capabilities of one problem
instance.
"""

from __future__ import annotations

import dataclasses
import math
from collections.abc import Callable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from .errors import CapabilityError, CapacityError, EvaluationError

if TYPE_CHECKING:  # pragma: no cover - import cycle guard, types only
    from .problems.types import SmoothnessCertificate

__all__ = [
    "Array",
    "ParamPoint",
    "Objective",
    "EvalRecord",
    "finite_diff_gradient",
    "finite_diff_hvp",
    "dense_hessian_fd",
    "scale_objective",
]

Array = np.ndarray

# Default relative scale for finite-difference step sizes.
FD_STEP_SCALE = 1e-6

# dense_hessian_fd refuses beyond this dimension (quadratic cost wall).
DENSE_HESSIAN_MAX_DIM = 400


def _as_locked(a: Array) -> Array:
    out = np.array(a, dtype=np.float64, copy=True).ravel()
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class ParamPoint:
    """Immutable flat parameter vector with named shaped blocks.

    ``data`` is always 1-D float64 and read-only; ``shapes`` records the
    (name, shape) layout used to view slices of it as matrices.
    """

    data: Array
    shapes: tuple[tuple[str, tuple[int, ...]], ...]

    def __post_init__(self) -> None:
        data = _as_locked(self.data)
        object.__setattr__(self, "data", data)
        total = sum(int(np.prod(s)) for _, s in self.shapes)
        if total != data.size:
            raise ValueError(
                f"block shapes cover {total} entries, data has {data.size}"
            )

    @staticmethod
    def from_arrays(named: Sequence[tuple[str, Array]]) -> "ParamPoint":
        shapes = tuple((name, tuple(np.shape(a))) for name, a in named)
        flat = np.concatenate([np.asarray(a, dtype=np.float64).ravel()
                               for _, a in named]) if named else np.zeros(0)
        return ParamPoint(flat, shapes)

    @staticmethod
    def scalar(w: float) -> "ParamPoint":
        return ParamPoint(np.array([float(w)]), (("w", (1,)),))

    @property
    def dim(self) -> int:
        return int(self.data.size)

    def block(self, name: str) -> Array:
        """Read-only view of one named block, reshaped to its declared shape."""
        offset = 0
        for bname, shape in self.shapes:
            size = int(np.prod(shape))
            if bname == name:
                return self.data[offset:offset + size].reshape(shape)
            offset += size
        raise KeyError(f"no block named {name!r}")

    def blocks(self) -> dict[str, Array]:
        out: dict[str, Array] = {}
        offset = 0
        for bname, shape in self.shapes:
            size = int(np.prod(shape))
            out[bname] = self.data[offset:offset + size].reshape(shape)
            offset += size
        return out

    def with_data(self, data: Array) -> "ParamPoint":
        """Same layout, new values."""
        return ParamPoint(np.asarray(data, dtype=np.float64), self.shapes)

    def __repr__(self) -> str:  # pragma: no cover - debug aid
        names = ", ".join(f"{n}{s}" for n, s in self.shapes)
        return f"ParamPoint(dim={self.dim}, blocks=[{names}])"


@dataclass(frozen=True, eq=False)
class Objective:
    """One problem instance: callables plus optional capabilities.

    ``value``/``gradient`` are total; everything else is optional and gated
    by capability checks at the call sites that need it.  ``f_star`` is the
    objective's true optimal value when known.  ``certificate`` (if present)
    carries the analytic curvature bound; its baseline may differ from
    ``f_star`` (the bound is ``h0 + h1*(f - cert.f_star)^rho``).
    """

    name: str
    dim: int
    shapes: tuple[tuple[str, tuple[int, ...]], ...]
    value: Callable[[ParamPoint], float]
    gradient: Callable[[ParamPoint], Array]
    f_star: float | None = None
    n_components: int | None = None
    value_i: Callable[[ParamPoint, int], float] | None = None
    gradient_i: Callable[[ParamPoint, int], Array] | None = None
    component_f_star: float | None = None
    project_solution: Callable[[ParamPoint], ParamPoint] | None = None
    hessian: Callable[[ParamPoint], Array] | None = None
    certificate: "SmoothnessCertificate | None" = None
    witness: Callable[[int], ParamPoint] | None = None
    info: Mapping[str, float] = field(default_factory=dict)

    def batch_value(self, w: ParamPoint, indices: Sequence[int]) -> float:
        if self.value_i is None:
            raise CapabilityError(f"{self.name} has no per-component losses")
        return float(np.mean([self.value_i(w, int(i)) for i in indices]))

    def batch_gradient(self, w: ParamPoint, indices: Sequence[int]) -> Array:
        if self.gradient_i is None:
            raise CapabilityError(f"{self.name} has no per-component gradients")
        acc = np.zeros(self.dim)
        for i in indices:
            acc += self.gradient_i(w, int(i))
        return acc / len(indices)

    def with_overrides(self, **kw) -> "Objective":
        return dataclasses.replace(self, **kw)


@dataclass(frozen=True)
class EvalRecord:
    """One trajectory row: the quantities logged at iterate k.

    ``step_size`` is the step taken *from* this iterate; the terminal record
    of a run carries 0.0 since no step leaves it.
    """

    iter: int
    f: float
    grad_norm: float
    step_size: float
    dist_to_solution: float | None = None


def _fd_step(w: ParamPoint, h: float | None) -> float:
    if h is not None:
        return float(h)
    scale = float(np.max(np.abs(w.data))) if w.dim else 0.0
    return FD_STEP_SCALE * max(1.0, scale)


def finite_diff_gradient(obj: Objective, w: ParamPoint,
                         h: float | None = None) -> Array:
    """Central-difference gradient of ``obj.value`` at ``w``."""
    step = _fd_step(w, h)
    base = w.data
    out = np.zeros(w.dim)
    for i in range(w.dim):
        up = base.copy()
        up[i] += step
        dn = base.copy()
        dn[i] -= step
        fu = obj.value(w.with_data(up))
        fd = obj.value(w.with_data(dn))
        if not (math.isfinite(fu) and math.isfinite(fd)):
            raise EvaluationError(
                f"{obj.name}: non-finite value probing coordinate {i}"
            )
        out[i] = (fu - fd) / (2.0 * step)
    return out


def finite_diff_hvp(obj: Objective, w: ParamPoint, v: Array,
                    h: float | None = None) -> Array:
    """Hessian-vector product via a central difference of gradients."""
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != w.dim:
        raise ValueError(f"direction has size {v.size}, point has {w.dim}")
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return np.zeros(w.dim)
    unit = v / norm
    step = _fd_step(w, h)
    gu = obj.gradient(w.with_data(w.data + step * unit))
    gd = obj.gradient(w.with_data(w.data - step * unit))
    out = (gu - gd) * (norm / (2.0 * step))
    if not np.all(np.isfinite(out)):
        raise EvaluationError(f"{obj.name}: non-finite gradient in HVP probe")
    return out


def dense_hessian_fd(obj: Objective, w: ParamPoint,
                     h: float | None = None,
                     max_dim: int = DENSE_HESSIAN_MAX_DIM) -> Array:
    """Dense symmetric FD Hessian (gradient differences, column by column)."""
    if w.dim > max_dim:
        raise CapacityError(
            f"dense Hessian requested for dim {w.dim} > cap {max_dim}"
        )
    step = _fd_step(w, h)
    base = w.data
    hess = np.zeros((w.dim, w.dim))
    for i in range(w.dim):
        up = base.copy()
        up[i] += step
        dn = base.copy()
        dn[i] -= step
        gu = obj.gradient(w.with_data(up))
        gd = obj.gradient(w.with_data(dn))
        hess[:, i] = (gu - gd) / (2.0 * step)
    if not np.all(np.isfinite(hess)):
        raise EvaluationError(f"{obj.name}: non-finite entries in FD Hessian")
    return 0.5 * (hess + hess.T)


def scale_objective(obj: Objective, c: float) -> Objective:
    """The objective ``c*f`` with every capability rescaled consistently.

    Curvature of ``c*f`` is ``c*||H||``, so a certificate ``(h0, h1, b, rho)``
    becomes ``(c*h0, h1*c**(1-rho), c*b, rho)``: the gap scales by ``c`` and
    ``c*h1*gap**rho == (h1*c**(1-rho))*(c*gap)**rho``.
    """
    if c <= 0:
        raise ValueError("scale must be positive")
    value = obj.value
    gradient = obj.gradient
    hessian = obj.hessian
    value_i = obj.value_i
    gradient_i = obj.gradient_i
    cert = obj.certificate
    if cert is not None:
        cert = dataclasses.replace(
            cert,
            h0=c * cert.h0,
            h1=cert.h1 * c ** (1.0 - cert.rho),
            f_star=c * cert.f_star,
        )
    return obj.with_overrides(
        name=f"{obj.name}*{c:g}",
        value=lambda w: c * value(w),
        gradient=lambda w: c * gradient(w),
        hessian=(lambda w: c * hessian(w)) if hessian is not None else None,
        f_star=None if obj.f_star is None else c * obj.f_star,
        certificate=cert,
        value_i=(None if value_i is None
                 else lambda w, i: c * value_i(w, i)),
        gradient_i=(None if gradient_i is None
                    else lambda w, i: c * gradient_i(w, i)),
        component_f_star=(None if obj.component_f_star is None
                          else c * obj.component_f_star),
    )
