"""
logging_setup.py
Configuración central de logging con colorlog.

Un único handler en stderr: stdout queda reservado para el documento que
emite la CLI, así dos ejecuciones iguales producen bytes idénticos.
"""

import logging
import sys

import colorlog

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level: str = "INFO", fmt: str = DEFAULT_FORMAT) -> None:
    """
    Instala el formateador coloreado en el logger raíz.

    Args:
        level (str): DEBUG, INFO, WARNING o ERROR
        fmt (str): Formato estilo logging (sin el prefijo de color)
    """
    handler = colorlog.StreamHandler(stream=sys.stderr)
    handler.setFormatter(
        colorlog.ColoredFormatter(
            "%(log_color)s" + fmt,
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "bold_red",
            },
        )
    )
    root = logging.getLogger()
    root.handlers.clear()
    root.addHandler(handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))
