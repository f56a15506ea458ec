"""Error-model registry and the scalable QVT success estimator.

Every model spreads one error magnitude ``eps`` over its error sources with
fixed relative scales. The estimator treats all errors as depolarizing,
composes them per SU(4) block and raises the block fidelity to the number
of blocks, avoiding any state simulation.
"""

from __future__ import annotations

import math
from enum import Enum
from functools import lru_cache
from typing import Dict, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator
from scipy.optimize import brentq

from src.combinatorics import expected_rounds
from src.decompose import k_cnot_fidelity, mirror_coordinates, weyl_coordinates
from src.errors import NumericError
from src.heavy import h_ideal_haar
from src.sampling import RngHandle, haar_su4
from src.simulate import NoiseSpec
from src.transpile import OptLevel

PASSING = 2.0 / 3.0
GATE_SAMPLES = 10_000
_GATE_SEED = 7_051_983
_MONOTONE_SLACK = 1e-3
MAX_SCAN_QUBITS = 64

FidelityKind = Literal["avg", "proc", "dep"]


class Method(str, Enum):
    AVG = "avg"
    PROC = "proc"


def convert(x: float, src: FidelityKind, dst: FidelityKind, d: int) -> float:
    """Convert between average fidelity, process fidelity and depolarizing parameter.

    F_avg = ((d-1)p + 1)/d and F_proc = ((d^2-1)p + 1)/d^2 for a depolarizing
    channel that keeps the state with probability p.
    """
    lower = {"dep": -1.0 / (d * d - 1), "avg": 1.0 / (d + 1), "proc": 0.0}
    for kind in (src, dst):
        if kind not in lower:
            raise ValueError(f"unknown fidelity kind: {kind}")
    if not (math.isfinite(x) and lower[src] - 1e-12 <= x <= 1 + 1e-12):
        raise ValueError(f"{src} value {x} out of range")
    if src == "avg":
        p = (d * x - 1) / (d - 1)
    elif src == "proc":
        p = (d * d * x - 1) / (d * d - 1)
    else:
        p = x
    if dst == "avg":
        return ((d - 1) * p + 1) / d
    if dst == "proc":
        return ((d * d - 1) * p + 1) / (d * d)
    return p


class ErrorModelSpec(BaseModel):
    """Relative weights of the six error sources of one model.

    ``fixed_xtalk`` is an eps-independent crosstalk infidelity added on top.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    s_sq_dep: float = 0.0
    s_tq_dep: float = 0.0
    s_tq_coh: float = 0.0
    s_tq_mem: float = 0.0
    s_tq_xtalk: float = 0.0
    s_meas: float = 0.0
    fixed_xtalk: float = 0.0

    @field_validator(
        "s_sq_dep", "s_tq_dep", "s_tq_coh", "s_tq_mem", "s_tq_xtalk", "s_meas", "fixed_xtalk",
        mode="after",
    )
    @classmethod
    def non_negative(cls, v: float) -> float:
        if not (math.isfinite(v) and v >= 0):
            raise ValueError("scales must be finite and non-negative")
        return v

    @property
    def normalization(self) -> float:
        """Weight of the normalized sources; 1 when none is present."""
        n = 12.0 / 5.0 * self.s_sq_dep + self.s_tq_dep + self.s_tq_coh
        return n if n > 0 else 1.0


def _model(name: str, *scales: float, fixed_xtalk: float = 0.0) -> ErrorModelSpec:
    keys = ("s_sq_dep", "s_tq_dep", "s_tq_coh", "s_tq_mem", "s_tq_xtalk", "s_meas")
    return ErrorModelSpec(name=name, fixed_xtalk=fixed_xtalk, **dict(zip(keys, scales)))


MODELS: Dict[str, ErrorModelSpec] = {
    m.name: m
    for m in (
        _model("sq_depolarizing", 10, 1, 0, 0, 0, 1),
        _model("tq_depolarizing", 1, 10, 0, 0, 0, 1),
        _model("tq_coherent", 1, 0, 10, 0, 0, 1),
        _model("measurement", 1, 10, 0, 0, 0, 10),
        _model("crosstalk", 1, 10, 0, 0, 1, 1),
        _model("memory", 1, 10, 0, 1, 0, 1),
        _model("tq_mixed", 1, 5, 5, 0, 0, 1),
        _model("semi_realistic", 1, 10, 1, 0.5, 0.5, 1),
        _model("unscaled_crosstalk", 1, 10, 0, 0, 0, 1, fixed_xtalk=1e-3),
    )
}


def get_model(name: Union[str, ErrorModelSpec]) -> ErrorModelSpec:
    if isinstance(name, ErrorModelSpec):
        return name
    key = name.strip().lower().replace("-", "_").replace(" ", "_")
    if key not in MODELS:
        raise ValueError(f"unknown error model '{name}' (known: {', '.join(MODELS)})")
    return MODELS[key]


def max_eps(spec: ErrorModelSpec) -> float:
    """Largest eps for which every resolved parameter stays valid."""
    n = spec.normalization
    bounds = [math.inf]
    if spec.s_sq_dep:
        bounds.append(n / (2 * spec.s_sq_dep))
    if spec.s_tq_dep:
        bounds.append(3 * n / (4 * spec.s_tq_dep))
    if spec.s_tq_coh:
        bounds.append(4 * n / (5 * spec.s_tq_coh))
    if spec.s_tq_mem:
        bounds.append(1 / (1.5 * spec.s_tq_mem))
    if spec.s_tq_xtalk:
        bounds.append((1 - 2 * spec.fixed_xtalk) / (2 * spec.s_tq_xtalk))
    if spec.s_meas:
        bounds.append(1 / spec.s_meas)
    return min(bounds)


def resolve_model(spec: ErrorModelSpec, eps: float) -> NoiseSpec:
    """Channel parameters whose first-order infidelities sum to eps."""
    if not (math.isfinite(eps) and eps >= 0):
        raise ValueError("eps must be finite and non-negative")
    if eps > max_eps(spec) * (1 + 1e-12):
        raise ValueError(f"eps {eps} exceeds the valid range of model {spec.name}")
    n = spec.normalization
    cos2 = (4 - 5 * spec.s_tq_coh * eps / n) / 4
    return NoiseSpec(
        p_sq_dep=min(2 * spec.s_sq_dep * eps / n, 1.0),
        p_tq_dep=min(4 * spec.s_tq_dep * eps / (3 * n), 1.0),
        theta_zz=2 * math.acos(math.sqrt(min(max(cos2, 0.0), 1.0))),
        q_dephase=min(1.5 * spec.s_tq_mem * eps, 1.0),
        p_xtalk=min(2 * spec.s_tq_xtalk * eps + 2 * spec.fixed_xtalk, 1.0),
        e_meas=min(spec.s_meas * eps, 1.0),
    )


def implied_magnitude(noise: NoiseSpec) -> float:
    """Error magnitude recovered from the normalized sources of a NoiseSpec."""
    r_sq = noise.p_sq_dep / 2
    r_tq = 3 * noise.p_tq_dep / 4
    r_coh = 4 / 5 * math.sin(noise.theta_zz / 2) ** 2
    return 12 / 5 * r_sq + r_tq + r_coh


@lru_cache(maxsize=None)
def _cnot_fidelity_table(mirror: bool, samples: int) -> np.ndarray:
    """Best k-CNOT fidelity (k = 0..3) for a fixed pool of Haar blocks."""
    rng = RngHandle(_GATE_SEED)
    table = np.empty((samples, 4))
    for i in range(samples):
        theta = weyl_coordinates(haar_su4(rng))
        row = [k_cnot_fidelity(theta, k) for k in range(4)]
        if mirror:
            mirrored = mirror_coordinates(theta)
            row = [max(r, k_cnot_fidelity(mirrored, k)) for k, r in enumerate(row)]
        table[i] = row
    table[:, 3] = 1.0
    table.setflags(write=False)
    return table


def gates_per_block(tol: float, mirror: bool = True, samples: int = GATE_SAMPLES) -> float:
    """Mean CNOT count per Haar block under approximation tolerance tol."""
    if not 0.0 <= tol <= 1.0:
        raise ValueError("tol must lie in [0, 1]")
    table = _cnot_fidelity_table(bool(mirror), int(samples))
    # first k reaching the threshold; column 3 always does
    accepted = table >= 1.0 - tol
    return float(np.argmax(accepted, axis=1).mean())


class EstimateResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: str
    n: int
    eps: float
    opt: OptLevel
    method: Method
    success: float
    p_tot: float
    p_m: float
    blocks: float
    gates_per_block: float

    @property
    def passed(self) -> bool:
        return self.success >= PASSING


def block_keep(noise: NoiseSpec, gates: float) -> float:
    """Depolarizing keep-parameter (d=4) of one SU(4) block with ``gates`` CNOTs.

    Crosstalk enters once per CNOT as a single-qubit depolarizing term of
    average infidelity p_xtalk/2, the magnitude the error model assigns it.
    The density simulator instead hits every linear-array neighbor of the
    pair (two for interior pairs), so simulated crosstalk runs up to twice
    as strong as estimated.
    """
    sq = (1 - noise.p_sq_dep) * convert(1 - 2 * noise.q_dephase / 3, "avg", "dep", 2)
    sq_pair = convert(convert(sq, "dep", "proc", 2) ** 2, "proc", "dep", 4)
    coh = (16 * math.cos(noise.theta_zz / 2) ** 2 + 4) / 20
    tq = (
        (1 - noise.p_tq_dep)
        * convert(coh, "avg", "dep", 4)
        * convert(1 - noise.p_xtalk / 2, "avg", "dep", 4)
    )
    return float(max(sq_pair * tq, 0.0) ** gates)


def scalable_success(
    spec: Union[str, ErrorModelSpec],
    eps: float,
    n: int,
    opt: Union[str, OptLevel] = OptLevel.HIGH,
    method: Union[str, Method] = Method.AVG,
    *,
    samples: int = GATE_SAMPLES,
) -> EstimateResult:
    spec = get_model(spec)
    opt, method = OptLevel(opt), Method(method)
    if n < 2:
        raise ValueError("n must be at least 2")
    noise = resolve_model(spec, eps)
    half = n // 2
    if opt == OptLevel.LOW:
        blocks = float(half * n)
    else:
        blocks = half * expected_rounds(n)
    m = gates_per_block(min(eps, 1.0), True, samples) if opt == OptLevel.HIGH else 3.0
    keep = block_keep(noise, m)
    p_tot = convert(keep, "dep", method.value, 4) ** blocks
    p_m = (1 - noise.e_meas) ** n
    survive = p_tot * p_m
    success = h_ideal_haar(n) * survive + (1 - survive) / 2
    return EstimateResult(
        model=spec.name,
        n=n,
        eps=eps,
        opt=opt,
        method=method,
        success=success,
        p_tot=p_tot,
        p_m=p_m,
        blocks=blocks,
        gates_per_block=m,
    )


def passing_threshold(
    spec: Union[str, ErrorModelSpec],
    n: int,
    opt: Union[str, OptLevel] = OptLevel.HIGH,
    method: Union[str, Method] = Method.AVG,
    *,
    samples: int = GATE_SAMPLES,
) -> float:
    """Error magnitude at which the estimated success equals 2/3."""
    spec = get_model(spec)
    hi = min(max_eps(spec), 1.0)

    def margin(eps: float) -> float:
        return scalable_success(spec, eps, n, opt, method, samples=samples).success - PASSING

    grid = np.concatenate([[0.0], np.geomspace(hi * 1e-6, hi, 40)])
    values = np.array([margin(e) for e in grid])
    if values[0] <= 0:
        raise NumericError(f"N={n} fails even without noise")
    below = np.flatnonzero(values <= 0)
    if below.size == 0:
        raise NumericError(f"no passing threshold for model {spec.name} below eps={hi:g}")
    first = int(below[0])
    if np.any(np.diff(values[: first + 1]) > _MONOTONE_SLACK):
        raise NumericError(f"estimated success is not monotone in eps for model {spec.name}")
    return float(brentq(margin, grid[first - 1], grid[first], xtol=1e-14, rtol=1e-12))


def passing_qubits(
    spec: Union[str, ErrorModelSpec],
    eps: float,
    opt: Union[str, OptLevel] = OptLevel.HIGH,
    method: Union[str, Method] = Method.AVG,
    *,
    n_max: int = MAX_SCAN_QUBITS,
    samples: int = GATE_SAMPLES,
) -> int:
    """Largest N in [2, n_max] whose estimated success reaches 2/3; 0 if none."""
    best = 0
    for n in range(2, n_max + 1):
        if scalable_success(spec, eps, n, opt, method, samples=samples).passed:
            best = n
    return best


def threshold_or_none(
    spec: Union[str, ErrorModelSpec],
    n: int,
    opt: Union[str, OptLevel],
    method: Union[str, Method],
) -> Optional[float]:
    try:
        return passing_threshold(spec, n, opt, method)
    except NumericError:
        return None
