"""HTTP service wrapping the library.

One endpoint per operation family; requests and responses are plain JSON
with complex entries encoded as [re, im] pairs, matching the state-file
schema.  The CLI is a thin client of this service.
"""

from __future__ import annotations

from typing import Literal

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from . import conversion, divergences, types_engine
from .errors import AthermalityError, LPNumericalFailure, NotProductPure, StateFileError
from .linalg import eigh
from .states import AthermalityState, HamiltonianSpec, state_from_dict
from .symmetry import bohr_analysis

app = FastAPI(title="athermality", version="0.1.0")


class StateDoc(BaseModel):
    """Wire form of an athermality state: energy levels, beta, row-major rho."""

    levels: list[float]
    beta: float = 1.0
    rho: list[tuple[float, float]]

    def to_state(self, beta_override: float | None = None) -> AthermalityState:
        doc = self.model_dump()
        if beta_override is not None:
            doc["beta"] = beta_override
        return state_from_dict(doc)


def encode_real(mat: np.ndarray | None) -> list[list[float]] | None:
    if mat is None:
        return None
    return [[float(x) for x in row] for row in np.asarray(mat, dtype=float)]


def encode_complex(mat: np.ndarray | None) -> list[list[list[float]]] | None:
    if mat is None:
        return None
    arr = np.asarray(mat, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


class Verdict(BaseModel):
    decision: str
    margin: float
    criterion: str
    diagnostics: str = ""
    witness_p: list[list[float]] | None = None
    witness_q: list[list[list[float]]] | None = None


def _verdict(v: conversion.ConversionVerdict) -> Verdict:
    return Verdict(
        decision=v.decision.value,
        margin=v.margin,
        criterion=v.criterion,
        diagnostics=v.diagnostics,
        witness_p=encode_real(v.witness_p),
        witness_q=encode_complex(v.witness_q),
    )


def pure_amplitudes(state: AthermalityState, tol: float = 1e-6) -> np.ndarray:
    """Amplitudes of a pure state with the global phase fixed."""
    dec = eigh(state.state)
    if dec.eigenvalues[-1] < 1.0 - tol:
        raise NotProductPure(
            f"state is not pure: top eigenvalue {dec.eigenvalues[-1]:.6f}"
        )
    v = dec.eigenvectors[:, -1]
    k = int(np.argmax(np.abs(v)))
    return v * np.exp(-1j * np.angle(v[k]))


@app.exception_handler(AthermalityError)
async def athermality_error_handler(request: Request, exc: AthermalityError):
    if isinstance(exc, StateFileError):
        status = 400
    elif isinstance(exc, LPNumericalFailure):
        status = 500
    else:
        status = 409
    return JSONResponse(
        status_code=status,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.get("/health")
def health():
    return {"status": "ok"}


class ConvertCheckRequest(BaseModel):
    source: StateDoc
    target: StateDoc
    mode: Literal["covariant", "gpc", "same-diagonal"] = "covariant"
    tol: float = Field(default=1e-9, gt=0)
    budget: int = Field(default=20000, gt=0)


@app.post("/v1/convert-check", response_model=Verdict)
def convert_check(req: ConvertCheckRequest) -> Verdict:
    src = req.source.to_state()
    dst = req.target.to_state()
    if src.hamiltonian != dst.hamiltonian:
        raise StateFileError("source and target must share the energy levels")
    h = src.hamiltonian
    if req.mode == "covariant":
        v = conversion.covariant_convertible(src.state, dst.state, h, budget=req.budget)
    elif req.mode == "gpc":
        v = conversion.gpc_feasible(
            src.state, dst.state, src.gibbs(), h, budget=req.budget
        )
    else:
        v = conversion.same_diagonal_gpc(src.state, dst.state, h, tol=req.tol)
    return _verdict(v)


class QubitGpcRequest(BaseModel):
    target: StateDoc
    source: StateDoc | None = None
    sweep: bool = False
    sweep_diagonal: float = Field(default=0.5, ge=0.0, le=1.0)
    tol: float = Field(default=1e-9, gt=0)


class QubitGpcResponse(BaseModel):
    verdict: Verdict | None = None
    threshold: float | None = None
    sweep_diagonal: float | None = None
    target_coherence: float | None = None


@app.post("/v1/qubit-gpc", response_model=QubitGpcResponse)
def qubit_gpc(req: QubitGpcRequest) -> QubitGpcResponse:
    dst = req.target.to_state()
    gamma = dst.gibbs()
    if req.sweep:
        res = conversion.qubit_sweep_threshold(
            dst.state, gamma, r=req.sweep_diagonal
        )
        return QubitGpcResponse(
            threshold=res.get("threshold"),
            sweep_diagonal=req.sweep_diagonal,
            target_coherence=res.get("target_coherence"),
        )
    if req.source is None:
        raise StateFileError("qubit-gpc needs a source state unless sweeping")
    src = req.source.to_state()
    v = conversion.gpc_convertible_qubit(src.state, dst.state, gamma, tol=req.tol)
    return QubitGpcResponse(verdict=_verdict(v))


class DivergenceRequest(BaseModel):
    state: StateDoc
    which: Literal[
        "relative-entropy", "coherence", "dmax", "dmax-eps", "dmin-eps", "cost-gpo"
    ] = "relative-entropy"
    eps: float = 0.0
    reference: StateDoc | None = None


class DivergenceResponse(BaseModel):
    which: str
    value: float | None
    infinite: bool = False
    support_violation: bool = False


def _finite(value: float) -> tuple[float | None, bool]:
    if np.isfinite(value):
        return float(value), False
    return None, True


@app.post("/v1/divergence", response_model=DivergenceResponse)
def divergence(req: DivergenceRequest) -> DivergenceResponse:
    st = req.state.to_state()
    gamma_mat = (
        req.reference.to_state().state if req.reference is not None else st.gibbs_matrix()
    )
    which = req.which
    if which == "relative-entropy":
        d = divergences.relative_entropy(st.state, gamma_mat)
        value, infinite = _finite(d.value)
        return DivergenceResponse(
            which=which, value=value, infinite=infinite, support_violation=d.support_violation
        )
    if which == "coherence":
        return DivergenceResponse(which=which, value=divergences.coherence(st.state, st.hamiltonian))
    if which == "dmax":
        d = divergences.dmax(st.state, gamma_mat)
        value, infinite = _finite(d.value)
        return DivergenceResponse(
            which=which, value=value, infinite=infinite, support_violation=d.support_violation
        )
    p, g = divergences.pinched_classical_pair(st)
    if which == "dmin-eps":
        value, infinite = _finite(divergences.dmin_eps_classical(p, g, req.eps))
    elif which == "dmax-eps":
        value, infinite = _finite(divergences.dmax_eps_classical(p, g, req.eps))
    else:
        value, infinite = _finite(divergences.cost_single_shot_gpo(st, req.eps))
    return DivergenceResponse(which=which, value=value, infinite=infinite)


class DistillRequest(BaseModel):
    state: StateDoc
    eps: float = Field(default=0.01, ge=0.0, lt=1.0)


class DistillResponse(BaseModel):
    value: float
    eps: float
    golden_unit_m: float


@app.post("/v1/distill", response_model=DistillResponse)
def distill(req: DistillRequest) -> DistillResponse:
    st = req.state.to_state()
    value = divergences.distill_single_shot(st, req.eps)
    return DistillResponse(value=value, eps=req.eps, golden_unit_m=float(2.0**value))


class AsymptoticsRequest(BaseModel):
    state: StateDoc
    curve: Literal["distill", "cost", "coherence", "budget"] = "distill"
    alpha: float = Field(default=0.75, gt=0.5, lt=1.0)
    n: int | None = Field(default=None, ge=1)
    n_max: int | None = Field(default=None, ge=1)
    ns: list[int] | None = None


class CurveRow(BaseModel):
    n: int
    value: float
    bound: float
    reference: float


class AsymptoticsResponse(BaseModel):
    curve: str
    rows: list[CurveRow]
    csv: str


@app.post("/v1/asymptotics", response_model=AsymptoticsResponse)
def asymptotics(req: AsymptoticsRequest) -> AsymptoticsResponse:
    st = req.state.to_state()
    psi = pure_amplitudes(st)
    g = st.gibbs()
    h = st.hamiltonian
    if req.ns:
        ns = sorted(set(int(n) for n in req.ns))
    elif req.n_max:
        ns = list(range(1, req.n_max + 1))
    elif req.n:
        ns = [req.n]
    else:
        raise StateFileError("asymptotics needs one of ns, n_max, n")
    if req.curve == "distill":
        rows = types_engine.distill_series(ns, psi, g, h)
    elif req.curve == "cost":
        rows = types_engine.cost_series(ns, req.alpha, psi, g, h)
    elif req.curve == "coherence":
        rows = types_engine.coherence_series(ns, psi, h)
    else:
        rows = types_engine.budget_series(ns, req.alpha, psi, h, st.beta)
    return AsymptoticsResponse(
        curve=req.curve,
        rows=[CurveRow(**row) for row in rows],
        csv=types_engine.series_to_csv(rows),
    )


class SlarRequest(BaseModel):
    state: StateDoc
    n: int = Field(ge=1)
    alpha: float = Field(default=0.75, gt=0.5, lt=1.0)


class SlarResponse(BaseModel):
    n: int
    alpha: float
    k: int
    max_level: float
    contract_bound: float
    z_counts: list[int]
    tie_flagged: bool
    dmax_bound: float
    budget_limit: float
    retained_mass: float
    trace_distance_proxy: float


@app.post("/v1/slar", response_model=SlarResponse)
def slar(req: SlarRequest) -> SlarResponse:
    st = req.state.to_state()
    psi = pure_amplitudes(st)
    spec = types_engine.slar_reference(req.n, req.alpha, psi, st.hamiltonian)
    chi = types_engine.chi_state(req.n, req.alpha, psi, st.hamiltonian)
    dmax_bound, limit = types_engine.slar_budget(spec, st.beta)
    return SlarResponse(
        n=req.n,
        alpha=req.alpha,
        k=len(spec.levels),
        max_level=spec.max_level,
        contract_bound=spec.contract_bound,
        z_counts=list(spec.z_type.counts),
        tie_flagged=spec.tie_flagged,
        dmax_bound=dmax_bound,
        budget_limit=limit,
        retained_mass=float(2.0**chi.log_retained_mass),
        trace_distance_proxy=chi.trace_distance_proxy,
    )


class TypeStatsRequest(BaseModel):
    n: int = Field(ge=1)
    m: int = Field(ge=1)
    p: list[float] | None = None
    eps: float | None = Field(default=None, gt=0)


class TypeStatsResponse(BaseModel):
    n: int
    m: int
    count: int
    log2_count_bound: float
    typical_count: int | None = None
    tail: float | None = None
    tail_bound: float | None = None


@app.post("/v1/type-stats", response_model=TypeStatsResponse)
def type_stats(req: TypeStatsRequest) -> TypeStatsResponse:
    count = types_engine.count_types(req.n, req.m)
    out = TypeStatsResponse(
        n=req.n,
        m=req.m,
        count=count,
        log2_count_bound=req.m * float(np.log2(req.n + 1)),
    )
    if req.p is not None and req.eps is not None:
        out.typical_count = len(types_engine.typical_set(req.n, req.eps, req.p))
        tail, bound = types_engine.tail_mass_and_bound(req.n, req.eps, req.p)
        out.tail = tail
        out.tail_bound = bound
    return out


class BohrRequest(BaseModel):
    levels: list[float]
    tol: float = Field(default=1e-9, gt=0)


@app.post("/v1/bohr")
def bohr(req: BohrRequest):
    report = bohr_analysis(HamiltonianSpec(req.levels), req.tol)
    return {
        "non_degenerate_spectrum": report.non_degenerate_spectrum,
        "non_degenerate_bohr": report.non_degenerate_bohr,
        "colliding_pairs": report.colliding_pairs[:20],
    }
