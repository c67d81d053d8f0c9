"""
config.py
Carga de configuración del toolkit GRM desde config/settings.yaml.

Si el archivo no existe o no se puede leer, se usa DEFAULT_CONFIG. La
variable de entorno GRM_CACHE tiene prioridad sobre cache.dir.

Uso:
    config = load_config()
    budget = Budget.from_config(config)
"""

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml

logger = logging.getLogger(__name__)

TOOL_VERSION = "1.0.0"

# Configuración por defecto
DEFAULT_CONFIG: Dict[str, Any] = {
    "budget_max_points": 2 ** 20,
    "budget_max_codewords": 2 ** 27,
    "budget_max_ops": 2 ** 33,
    "budget_max_candidates": 2 ** 20,
    "budget_max_iterations": 64,
    "workers": 1,
    "block_elements": 2 ** 21,
    "cache_dir": ".grm-cache",
    "cache_policy": "use",
    "scan_max_polys": 2 ** 16,
    "safety_margin": 1,
    "output_format": "json",
    "log_level": "WARNING",
    "log_format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
}

SETTINGS_PATH = Path(__file__).parent.parent.parent / "config" / "settings.yaml"


def load_config(settings_path: Optional[Path] = None) -> Dict[str, Any]:
    """
    Carga la configuración desde settings.yaml.

    Args:
        settings_path (Path): Ruta alternativa (por defecto config/settings.yaml)

    Returns:
        dict: Diccionario plano con la configuración
    """
    settings_path = Path(settings_path) if settings_path else SETTINGS_PATH
    config = DEFAULT_CONFIG.copy()

    if not settings_path.exists():
        logger.warning(f"⚠️  No se encontró {settings_path}, usando configuración por defecto")
    else:
        try:
            with open(settings_path, "r", encoding="utf-8") as f:
                settings = yaml.safe_load(f) or {}

            budget = settings.get("budget", {}) or {}
            enumeration = settings.get("enumeration", {}) or {}
            cache = settings.get("cache", {}) or {}
            compress = settings.get("compress", {}) or {}
            output = settings.get("output", {}) or {}
            logging_section = settings.get("logging", {}) or {}

            for key in ("max_points", "max_codewords", "max_ops", "max_candidates", "max_iterations"):
                config[f"budget_{key}"] = int(budget.get(key, config[f"budget_{key}"]))
            config["workers"] = int(enumeration.get("workers", config["workers"]))
            config["block_elements"] = int(enumeration.get("block_elements", config["block_elements"]))
            config["cache_dir"] = cache.get("dir", config["cache_dir"])
            config["cache_policy"] = cache.get("policy", config["cache_policy"])
            config["scan_max_polys"] = int(compress.get("scan_max_polys", config["scan_max_polys"]))
            config["safety_margin"] = int(compress.get("safety_margin", config["safety_margin"]))
            config["output_format"] = output.get("format", config["output_format"])
            config["log_level"] = logging_section.get("level", config["log_level"])
            config["log_format"] = logging_section.get("format", config["log_format"])

            logger.info(f"✅ Configuración cargada desde {settings_path}")
        except Exception as e:
            logger.error(f"❌ Error leyendo configuración: {e}")
            logger.info("📋 Usando configuración por defecto")
            config = DEFAULT_CONFIG.copy()

    env_cache = os.getenv("GRM_CACHE")
    if env_cache:
        config["cache_dir"] = env_cache

    return config
