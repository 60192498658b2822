"""Deterministic report documents shared by every command."""
from __future__ import annotations

import json
import textwrap
from fractions import Fraction

from .integral import IntegralReport
from .rational import fmt

SIMULATION_HEADER = (
    "Nested rational grids stand in for a pair of set-theoretic models M within N: "
    "inner points have coordinates with denominator dividing D_M, outer points with "
    "denominator dividing D_N, and outer-only points play the role of reals that exist "
    "only in the larger model. The statement about transitive models of ZFC cannot be "
    "executed; this grid simulation is its declared property-based substitute."
)


def integral_document(rep: IntegralReport) -> dict:
    return {
        "lower": rep.lower,
        "upper": rep.upper,
        "eps": rep.eps,
        "integrable": rep.integrable_at_eps,
        "witness_cell_count": rep.witness_cell_count,
        "value": rep.value,
        "error_bound": rep.error_bound,
        "certified_oracle": rep.certified,
        "schedule": rep.schedule,
    }


def _plain(x, decimal: bool):
    if x is None or isinstance(x, (bool, str, int)):
        return x
    if isinstance(x, Fraction):
        return {"exact": fmt(x), "decimal": f"{float(x):.12g}"} if decimal else fmt(x)
    if isinstance(x, dict):
        return {str(k): _plain(v, decimal) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v, decimal) for v in x]
    return str(x)


def _text(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def _lines(prefix: str, v, out: list[str]) -> None:
    items = sorted(v.items()) if isinstance(v, dict) else enumerate(v)
    for k, item in items:
        if isinstance(item, (dict, list)):
            _lines(f"{prefix}{k}.", item, out)
        else:
            out.append(f"{prefix}{k}: {_text(item)}")


def render(doc: dict, fmt_: str = "json", *, decimal: bool = False) -> str:
    """Serialize a report; identical inputs always give identical bytes."""
    plain = _plain(doc, decimal)
    if fmt_ == "json":
        return json.dumps(plain, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    out: list[str] = []
    header = plain.pop("header", None)
    if header:
        out += ["# " + line for line in textwrap.wrap(header, 76, break_on_hyphens=False)]
    _lines("", plain, out)
    return "\n".join(out) + "\n"
