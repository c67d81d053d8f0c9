"""
commands.py
Modelo validado de solicitud y despacho de subcomandos.

Cada subcomando tiene un handler que recibe la solicitud ya validada y
devuelve un CommandOutput; dispatch traduce las excepciones del dominio
a códigos de salida:
    0  éxito
    1  error de dominio (presupuesto, primo no soportado, ...)
    2  error de uso
"""

import logging
import re
from pathlib import Path
from typing import Any, Callable, Dict, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cli.cache_manager import SpectrumCache
from cli.render import CommandOutput, render, render_json
from core.density import (
    gap_report_to_json,
    gap_scan,
    min_weight_report,
    parse_target,
    require_ax,
)
from core.distributions import (
    approximation_to_json,
    best_approximation,
    combo_check_to_json,
    combo_uniformity_check,
    distinguisher_gap,
    distribution_of,
    distribution_to_json,
    parse_masses,
    statistical_distance,
    uniform,
)
from core.errors import GRMError, InternalError, UsageError
from core.field_poly import parse_polynomial
from core.spectrum import (
    CodeParams,
    enumerate_spectrum,
    MODE_FULL,
    PExactRational,
    spectrum_to_json,
    weight,
    weight_set,
    WeightSpectrum,
)
from core.structure import (
    bias_rank_scan,
    bias_scan_to_json,
    certificate_to_json,
    compress,
    compression_to_json,
    decomposition_to_json,
    format_rank,
    parse_error_map,
    parse_threshold_map,
    rank,
    rank_to_json,
    regularize,
)
from utils.budget import Budget
from utils.rationals import format_fraction, parse_fraction

logger = logging.getLogger(__name__)

Command = Literal[
    "spectrum",
    "weightset",
    "weight",
    "gap",
    "ax-check",
    "minweight",
    "rank",
    "regularize",
    "compress",
    "approx",
    "bias-scan",
    "distance",
]

REQUIRED_FIELDS: Dict[str, Tuple[str, ...]] = {
    "spectrum": ("p", "r", "m"),
    "weightset": ("p", "r", "m"),
    "weight": ("p", "poly"),
    "gap": ("alpha", "p", "r", "max_m"),
    "ax-check": ("p", "r", "m"),
    "minweight": ("p", "r", "m"),
    "rank": ("p", "poly", "factor_degree"),
    "regularize": ("p", "poly"),
    "compress": ("p", "poly"),
    "approx": ("p", "target", "r_max", "m_max"),
    "bias-scan": ("p", "r", "m"),
    "distance": ("p",),
}


class CommandRequest(BaseModel):
    """Solicitud validada antes del despacho."""

    model_config = ConfigDict(extra="forbid")

    command: Command
    p: Optional[int] = None
    r: Optional[int] = Field(default=None, ge=0)
    m: Optional[int] = Field(default=None, ge=0)
    max_m: Optional[int] = Field(default=None, ge=1)
    alpha: Optional[str] = None
    poly: Optional[str] = None
    factor_degree: Optional[int] = Field(default=None, ge=0)
    max_factors: Optional[int] = Field(default=None, ge=0)
    budget: Optional[int] = Field(default=None, gt=0)
    workers: Optional[int] = Field(default=None, gt=0)
    format: Literal["json", "csv", "human"] = "json"
    cache: Literal["use", "refresh", "off"] = "use"
    out: Optional[str] = None
    mode: Literal["full", "symmetry-reduced"] = MODE_FULL
    min_mode: Literal["formula", "enumerate"] = "formula"
    threshold_map: str = "c"
    error_map: str = "1/2^c"
    target: Optional[str] = None
    masses: Optional[str] = None
    subset: Optional[str] = None
    r_max: Optional[int] = Field(default=None, ge=0)
    m_max: Optional[int] = Field(default=None, ge=0)
    epsilon: Optional[str] = None

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            try:
                parse_target(value)
            except UsageError as e:
                raise ValueError(e.message)
        return value

    @field_validator("epsilon")
    @classmethod
    def _check_epsilon(cls, value: Optional[str]) -> Optional[str]:
        if value is not None:
            try:
                if parse_fraction(value) <= 0:
                    raise ValueError("epsilon debe ser positivo")
            except UsageError as e:
                raise ValueError(e.message)
        return value

    @model_validator(mode="after")
    def _check_required(self) -> "CommandRequest":
        missing = [name for name in REQUIRED_FIELDS[self.command] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"'{self.command}' requiere: {', '.join('--' + n.replace('_', '-') for n in missing)}")
        return self


class Context:
    """Configuración, presupuesto y caché resueltos para una ejecución."""

    def __init__(self, request: CommandRequest, config: Dict[str, Any]):
        self.request = request
        self.config = config
        budget = Budget.from_config(config)
        self.budget = budget.with_codewords(request.budget) if request.budget else budget
        self.workers = request.workers or int(config.get("workers", 1))
        self.block_elements = int(config.get("block_elements", 2 ** 21))
        self.cache = SpectrumCache(config.get("cache_dir", ".grm-cache"), request.cache)

    def spectrum(self, params: CodeParams) -> WeightSpectrum:
        """Espectro completo vía caché, o reducido sin caché."""
        if self.request.mode != MODE_FULL:
            return enumerate_spectrum(params, self.budget, self.workers, self.request.mode, block_elements=self.block_elements)
        return self.cache.get_or_compute(
            params,
            lambda: enumerate_spectrum(params, self.budget, self.workers, block_elements=self.block_elements),
        )

    def params(self) -> CodeParams:
        return CodeParams(self.request.p, self.request.r, self.request.m)

    def polynomial(self, text: Optional[str] = None):
        text = self.request.poly if text is None else text
        m = self.request.m
        if m is None:
            indices = [int(i) for i in re.findall(r"x(\d+)", text)]
            m = max(indices, default=0)
        return parse_polynomial(text, self.request.p, m)

    def cache_summary(self):
        stats = self.cache.get_stats()
        return [
            f"💾 Caché {stats['directory']} ({stats['policy']}): {stats['entries']} entradas, "
            f"{stats['bytes']} bytes, {stats['hits']} aciertos"
        ]


# ========== HANDLERS ==========

def _spectrum(ctx: Context) -> CommandOutput:
    params = ctx.params()
    spectrum = ctx.spectrum(params)
    document = spectrum_to_json(spectrum)
    rows = [[w, c, str(PExactRational.from_count(w, params.p, params.m))] for w, c in spectrum.counts]
    return CommandOutput(document, ("weight", "count", "relative"), rows, ctx.cache_summary())


def _weightset(ctx: Context) -> CommandOutput:
    params = ctx.params()
    spectrum = ctx.spectrum(params)
    document = {
        "p": params.p,
        "r": params.r,
        "m": params.m,
        "mode": spectrum.mode,
        "weights": [str(w) for w in weight_set(spectrum)],
    }
    return CommandOutput(document, summary=ctx.cache_summary())


def _weight(ctx: Context) -> CommandOutput:
    f = ctx.polynomial()
    count, relative = weight(f, ctx.budget)
    return CommandOutput({"poly": str(f), "p": f.p, "m": f.m, "count": count, "relative": str(relative)})


def _gap(ctx: Context) -> CommandOutput:
    request = ctx.request
    report = gap_scan(parse_target(request.alpha), request.p, request.r, request.max_m, ctx.budget, provider=ctx.spectrum)
    return CommandOutput(gap_report_to_json(report), summary=ctx.cache_summary())


def _ax_check(ctx: Context) -> CommandOutput:
    params = ctx.params()
    result = require_ax(ctx.spectrum(params))
    document = {
        "p": params.p,
        "r": params.r,
        "m": params.m,
        "divisor": result.divisor,
        "ok": result.ok,
        "violations": list(result.violations),
    }
    return CommandOutput(document, summary=ctx.cache_summary())


def _minweight(ctx: Context) -> CommandOutput:
    return CommandOutput(min_weight_report(ctx.params(), ctx.request.min_mode, ctx.budget, ctx.workers))


def _rank(ctx: Context) -> CommandOutput:
    f = ctx.polynomial()
    result = rank(f, ctx.request.factor_degree, ctx.budget, max_factors=ctx.request.max_factors)
    return CommandOutput(rank_to_json(result))


def _regularize(ctx: Context) -> CommandOutput:
    f = ctx.polynomial()
    result = regularize(f, parse_threshold_map(ctx.request.threshold_map), ctx.budget)
    document = {
        "poly": str(f),
        "c": result.decomposition.c,
        "factors_text": [str(g) for g in result.decomposition.factors],
        "decomposition": decomposition_to_json(result.decomposition),
        "certificate": certificate_to_json(result.certificate),
        "iterations": result.iterations,
        "complete": result.complete,
    }
    return CommandOutput(document)


def _compress(ctx: Context) -> CommandOutput:
    f = ctx.polynomial()
    result = compress(
        f,
        parse_error_map(ctx.request.error_map),
        ctx.budget,
        scan_max_polys=int(ctx.config.get("scan_max_polys", 2 ** 16)),
        safety_margin=int(ctx.config.get("safety_margin", 1)),
    )
    return CommandOutput({"poly": str(f), **compression_to_json(result)})


def _approx(ctx: Context) -> CommandOutput:
    request = ctx.request
    target = parse_masses(request.target, request.p)
    return CommandOutput(approximation_to_json(best_approximation(target, request.r_max, request.m_max, ctx.budget)))


def _bias_scan(ctx: Context) -> CommandOutput:
    request = ctx.request
    scan = bias_rank_scan(request.p, request.r, request.m, ctx.budget)
    document = bias_scan_to_json(scan)
    rows = [
        [row.index, str(row.polynomial), row.count, format_fraction(row.distance), format_rank(row.rank.value), row.rank.status]
        for row in scan.rows
    ]
    return CommandOutput(document, ("index", "polynomial", "count", "distance", "rank", "rank_status"), rows)


def _distance(ctx: Context) -> CommandOutput:
    """
    Distancia entre D(--poly) (varios separados por ';') o --masses y
    --target (uniforme por defecto); --subset añade la brecha del distinguidor
    y --epsilon el chequeo por combinaciones.
    """
    request = ctx.request
    polys = None
    if request.poly is not None:
        texts = [text for text in request.poly.split(";") if text.strip()]
        m = request.m if request.m is not None else max(int(i) for i in re.findall(r"x(\d+)", request.poly) or [0])
        polys = [parse_polynomial(text, request.p, m) for text in texts]
        first = distribution_of(polys, ctx.budget)
    elif request.masses is not None:
        first = parse_masses(request.masses, request.p)
    else:
        raise UsageError("'distance' requiere --poly o --masses")
    second = parse_masses(request.target, request.p) if request.target else uniform(first.p, first.c)

    document: Dict[str, Any] = {
        "first": distribution_to_json(first),
        "second": distribution_to_json(second),
        "distance": format_fraction(statistical_distance(first, second)),
    }
    if request.subset is not None:
        try:
            subset = [int(s) for s in request.subset.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"--subset debe ser una lista de enteros: {request.subset!r}")
        gap, bound_ok = distinguisher_gap(first, second, subset)
        if not bound_ok:
            raise InternalError("la brecha del distinguidor supera la distancia estadística", gap=format_fraction(gap))
        document["subset"] = subset
        document["distinguisher_gap"] = format_fraction(gap)
        document["bound_ok"] = bound_ok
    if request.epsilon is not None and polys:
        document["combinations"] = combo_check_to_json(combo_uniformity_check(polys, parse_fraction(request.epsilon), ctx.budget))
    return CommandOutput(document)


HANDLERS: Dict[str, Callable[[Context], CommandOutput]] = {
    "spectrum": _spectrum,
    "weightset": _weightset,
    "weight": _weight,
    "gap": _gap,
    "ax-check": _ax_check,
    "minweight": _minweight,
    "rank": _rank,
    "regularize": _regularize,
    "compress": _compress,
    "approx": _approx,
    "bias-scan": _bias_scan,
    "distance": _distance,
}


def error_document(error: GRMError) -> str:
    return render_json({"error": error.to_dict()})


def dispatch(request: CommandRequest, config: Dict[str, Any]) -> Tuple[int, str]:
    """
    Ejecuta una solicitud validada.

    Returns:
        (código de salida, documento emitido)
    """
    try:
        ctx = Context(request, config)
        output = HANDLERS[request.command](ctx)
        text = render(output, request.format)
    except GRMError as e:
        logger.error(f"❌ {e.kind}: {e.message}")
        return e.exit_code, error_document(e)

    if request.out:
        Path(request.out).write_text(text, encoding="utf-8")
        logger.info(f"💾 Documento escrito en {request.out}")
    return 0, text
