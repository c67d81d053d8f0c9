"""
render.py
Emisión de documentos: JSON, CSV (sólo salidas tabulares) y texto legible.

La salida JSON es estable byte a byte para los mismos argumentos: el orden
de las claves es el de construcción y no hay flotantes.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from core.errors import UsageError

OUTPUT_FORMATS = ("json", "csv", "human")


@dataclass
class CommandOutput:
    """Documento de un subcomando y, si es tabular, su tabla para CSV."""

    document: Dict[str, Any]
    header: Optional[Sequence[str]] = None
    rows: List[Sequence[Any]] = field(default_factory=list)
    summary: List[str] = field(default_factory=list)


def render_json(document: Dict[str, Any]) -> str:
    return json.dumps(document, indent=2, ensure_ascii=False) + "\n"


def render_csv(output: CommandOutput) -> str:
    if output.header is None:
        raise UsageError("el formato CSV sólo está disponible para salidas tabulares (spectrum, bias-scan)")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(output.header)
    writer.writerows(output.rows)
    return buffer.getvalue()


def _human_lines(value: Any, indent: int = 0) -> List[str]:
    pad = "  " * indent
    lines: List[str] = []
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and item:
                lines.append(f"{pad}{key}:")
                lines.extend(_human_lines(item, indent + 1))
            else:
                lines.append(f"{pad}{key}: {item}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, dict):
                lines.append(f"{pad}-")
                lines.extend(_human_lines(item, indent + 1))
            else:
                lines.append(f"{pad}- {item}")
    else:
        lines.append(f"{pad}{value}")
    return lines


def render_human(output: CommandOutput) -> str:
    lines = list(output.summary)
    if lines:
        lines.append("")
    lines.extend(_human_lines(output.document))
    return "\n".join(lines) + "\n"


def render(output: CommandOutput, fmt: str) -> str:
    if fmt == "json":
        return render_json(output.document)
    if fmt == "csv":
        return render_csv(output)
    if fmt == "human":
        return render_human(output)
    raise UsageError(f"formato desconocido: {fmt}")
