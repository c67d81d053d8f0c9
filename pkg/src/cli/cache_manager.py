"""
cache_manager.py
Caché en disco de espectros de pesos completos.

Características:
- Un archivo JSON por código: grm_p{p}_r{r}_m{m}.json
- Checksum SHA256 sobre el contenido canónico, verificado al leer
- Escritura atómica (archivo temporal + os.replace)
- Políticas: use (leer y completar), refresh (recalcular siempre), off (sin disco)
- La versión de la herramienta y el modo forman parte de la clave

Uso:
    cache = SpectrumCache(".grm-cache", policy="use")
    spectrum = cache.get_or_compute(params, lambda: enumerate_spectrum(params))
"""

import hashlib
import json
import logging
import os
import tempfile
from pathlib import Path
from typing import Any, Callable, Dict, Optional

from core.errors import CacheCorruptError, ParseError, UsageError
from core.spectrum import CodeParams, MODE_FULL, spectrum_from_json, spectrum_to_json, WeightSpectrum
from utils.config import TOOL_VERSION

logger = logging.getLogger(__name__)

CACHE_POLICIES = ("use", "refresh", "off")


def payload_checksum(payload: Dict[str, Any]) -> str:
    """SHA256 del JSON canónico (claves ordenadas, sin espacios)."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class SpectrumCache:
    """Gestor de caché para espectros de RM_p(r,m)."""

    def __init__(self, cache_dir: str = ".grm-cache", policy: str = "use"):
        """
        Args:
            cache_dir (str): Directorio de la caché (GRM_CACHE)
            policy (str): use | refresh | off
        """
        if policy not in CACHE_POLICIES:
            raise UsageError(f"política de caché desconocida: {policy}")
        self.cache_dir = Path(cache_dir)
        self.policy = policy
        self.hits = 0
        self.misses = 0

    def path_for(self, params: CodeParams) -> Path:
        return self.cache_dir / f"grm_p{params.p}_r{params.r}_m{params.m}.json"

    def load(self, params: CodeParams) -> Optional[WeightSpectrum]:
        """
        Lee y verifica una entrada.

        Returns:
            WeightSpectrum o None si no existe o es de otra versión

        Raises:
            CacheCorruptError: Si el checksum no coincide o el JSON es ilegible
        """
        path = self.path_for(params)
        if not path.exists():
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
            checksum = data.pop("checksum", None)
        except (OSError, ValueError, AttributeError) as e:
            raise CacheCorruptError(f"entrada de caché ilegible {path.name}: {e}", path=str(path))
        if checksum != payload_checksum(data):
            raise CacheCorruptError(f"checksum inválido en {path.name}", path=str(path))
        if data.get("tool_version") != TOOL_VERSION or data.get("mode") != MODE_FULL:
            logger.info(f"💾 {path.name} es de otra versión/modo, se recalcula")
            return None
        try:
            spectrum = spectrum_from_json(data)
        except ParseError as e:
            raise CacheCorruptError(f"contenido inválido en {path.name}: {e.message}", path=str(path))
        if spectrum.params != params:
            raise CacheCorruptError(f"{path.name} contiene {spectrum.params.label()}", path=str(path))
        return spectrum

    def store(self, spectrum: WeightSpectrum) -> Optional[Path]:
        """Escribe la entrada de forma atómica (nada con política off o modo reducido)."""
        if self.policy == "off" or spectrum.mode != MODE_FULL:
            return None
        payload = spectrum_to_json(spectrum)
        payload["checksum"] = payload_checksum(payload)
        path = self.path_for(spectrum.params)
        self.cache_dir.mkdir(parents=True, exist_ok=True)
        handle, temporary = tempfile.mkstemp(prefix=".tmp_", suffix=".json", dir=self.cache_dir)
        try:
            with os.fdopen(handle, "w", encoding="utf-8") as f:
                json.dump(payload, f, ensure_ascii=False)
            os.replace(temporary, path)
        except OSError:
            if os.path.exists(temporary):
                os.unlink(temporary)
            raise
        logger.info(f"💾 Espectro cacheado: {path.name}")
        return path

    def get_or_compute(self, params: CodeParams, compute: Callable[[], WeightSpectrum]) -> WeightSpectrum:
        """use lee si hay entrada válida; refresh descarta la entrada y recalcula; off no toca el disco."""
        if self.policy == "refresh":
            self.delete(params)
        elif self.policy == "use":
            spectrum = self.load(params)
            if spectrum is not None:
                self.hits += 1
                logger.info(f"✅ Espectro recuperado de caché: {params.label()}")
                return spectrum
        self.misses += 1
        spectrum = compute()
        self.store(spectrum)
        return spectrum

    def delete(self, params: CodeParams) -> None:
        path = self.path_for(params)
        if path.exists():
            path.unlink()

    def get_stats(self) -> Dict[str, Any]:
        """Entradas y bytes en disco, más aciertos de esta ejecución."""
        files = sorted(self.cache_dir.glob("grm_p*_r*_m*.json")) if self.cache_dir.exists() else []
        return {
            "directory": str(self.cache_dir),
            "policy": self.policy,
            "entries": len(files),
            "bytes": sum(f.stat().st_size for f in files),
            "hits": self.hits,
            "misses": self.misses,
        }
