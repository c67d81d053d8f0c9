"""
main.py
Punto de entrada del toolkit GRM (pesos de códigos Reed-Muller generalizados).
Analiza argumentos, carga configuración y logging, y despacha el subcomando.
"""

import argparse
import logging
import sys
import traceback
from typing import List, Optional

from pydantic import ValidationError

from cli.cache_manager import CACHE_POLICIES
from cli.commands import CommandRequest, dispatch
from cli.render import OUTPUT_FORMATS, render_json
from core.errors import InternalError
from utils.config import load_config
from utils.logging_setup import setup_logging

logger = logging.getLogger(__name__)

SUBCOMMANDS = {
    "spectrum": "Espectro exacto de pesos de RM_p(r,m)",
    "weightset": "Conjunto ordenado de pesos relativos de RM_p(r,m)",
    "weight": "Peso de un único codeword (--poly)",
    "gap": "Hueco empírico entre alpha y W_p(r,m) para m <= --max-m",
    "ax-check": "Divisibilidad de Ax sobre el espectro completo",
    "minweight": "Peso mínimo (fórmula o enumeración) con testigo",
    "rank": "rank_d(f) con testigo de descomposición",
    "regularize": "Regularización iterativa de --poly con --threshold-map",
    "compress": "Compresión de --poly a una función de c entradas",
    "approx": "Mejor aproximación de una distribución objetivo",
    "bias-scan": "Tabla distancia-a-uniforme / rango de polinomios de grado r",
    "distance": "Distancia estadística y brecha del distinguidor",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grm",
        description="GRM - Pesos y densidad de códigos Reed-Muller generalizados",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Ejemplos de uso:
  python src/main.py spectrum -p 2 -r 2 -m 2
  python src/main.py gap --alpha 1/2 -p 3 -r 1 --max-m 3
  python src/main.py rank --poly "x1*x2+x3*x4" -p 2 -d 1
  python src/main.py regularize --poly "x1*x2+x3*x4" -p 2 --threshold-map c+3
  python src/main.py approx -p 3 --target 1/2,1/2,0 --r-max 1 --m-max 3
        """,
    )

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-p", "--prime", dest="p", type=int, help="Primo del cuerpo (2, 3, 5 o 7)")
    common.add_argument("-r", "--order", dest="r", type=int, help="Orden (cota de grado total)")
    common.add_argument("-m", "--vars", dest="m", type=int, help="Número de variables")
    common.add_argument("--max-m", dest="max_m", type=int, help="Mayor m barrido por gap")
    common.add_argument("--alpha", help="Objetivo exacto a/b en [0,1]")
    common.add_argument("--poly", help='Polinomio, p.ej. "x1*x2 + 2*x3^2" (";" separa varios en distance)')
    common.add_argument("-d", "--factor-degree", dest="factor_degree", type=int, help="Cota de grado de los factores")
    common.add_argument("--max-factors", dest="max_factors", type=int, help="No buscar más de T factores")
    common.add_argument("--budget", type=int, metavar="N", help="Máximo de codewords enumerados")
    common.add_argument("--workers", type=int, metavar="N", help="Procesos para la enumeración")
    common.add_argument("--format", choices=OUTPUT_FORMATS, help="Formato de salida")
    common.add_argument("--cache", choices=CACHE_POLICIES, help="Política de caché de espectros")
    common.add_argument("--out", metavar="PATH", help="Escribir el documento en un archivo")
    common.add_argument("--mode", choices=["full", "symmetry-reduced"], help="Modo de enumeración")
    common.add_argument("--min-mode", dest="min_mode", choices=["formula", "enumerate"], help="Modo de minweight")
    common.add_argument("--threshold-map", dest="threshold_map", help='Umbral T(c): "T", "c", "c+K" o "K*c+L"')
    common.add_argument("--error-map", dest="error_map", help='Error E(c): "a/b" o "a/b^c"')
    common.add_argument("--target", help="Masas objetivo separadas por comas")
    common.add_argument("--masses", help="Masas de la primera distribución (distance)")
    common.add_argument("--subset", help="Índices del alfabeto para el distinguidor")
    common.add_argument("--r-max", dest="r_max", type=int, help="Grado máximo de approx")
    common.add_argument("--m-max", dest="m_max", type=int, help="Variables máximas de approx")
    common.add_argument("--epsilon", help="Cota a/b del chequeo por combinaciones")
    common.add_argument("--config", help="Ruta alternativa a settings.yaml")
    common.add_argument("--log-level", dest="log_level", help="Nivel de logging (DEBUG, INFO, ...)")

    subparsers = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMANDO")
    for name, help_text in SUBCOMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Función principal: devuelve el código de salida."""
    args = build_parser().parse_args(argv)
    config = load_config(args.config)
    setup_logging(args.log_level or config["log_level"], config["log_format"])

    fields = {
        key: value
        for key, value in vars(args).items()
        if key in CommandRequest.model_fields and value is not None
    }
    fields.setdefault("format", config["output_format"])
    fields.setdefault("cache", config["cache_policy"])

    try:
        request = CommandRequest(**fields)
    except ValidationError as e:
        message = "; ".join(error["msg"] for error in e.errors())
        sys.stdout.write(render_json({"error": {"type": "usage_error", "message": message}}))
        return 2

    try:
        code, text = dispatch(request, config)
    except KeyboardInterrupt:
        print("\n⏹️  Cálculo interrumpido", file=sys.stderr)
        return 130
    except Exception as e:
        logger.error(f"❌ Error crítico: {e}")
        traceback.print_exc()
        error = InternalError(f"error inesperado: {e}")
        sys.stdout.write(render_json({"error": error.to_dict()}))
        return error.exit_code

    if code != 0 or not request.out:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
