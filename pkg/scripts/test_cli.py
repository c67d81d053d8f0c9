"""
test_cli.py
Pruebas de la caché de espectros, el despacho de subcomandos y el punto
de entrada (códigos de salida y documentos de error).

Ejecutar con: python scripts/test_cli.py  (o pytest scripts/)
"""

import contextlib
import io
import json
import os
import sys
import tempfile
from pathlib import Path

# Agregar src al path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from cli.cache_manager import payload_checksum, SpectrumCache
from cli.commands import CommandRequest, dispatch
from core.errors import CacheCorruptError, UsageError
from core.spectrum import CodeParams, enumerate_spectrum, MODE_REDUCED
from main import main as cli_main
from utils.config import load_config


def temp_config(directory):
    config = load_config()
    config["cache_dir"] = str(Path(directory) / "cache")
    return config


def run(config, **fields):
    return dispatch(CommandRequest(**fields), config)


def test_cache_round_trip():
    with tempfile.TemporaryDirectory() as tmp:
        cache = SpectrumCache(tmp, "use")
        params = CodeParams(2, 2, 3)
        calls = []

        def compute():
            calls.append(1)
            return enumerate_spectrum(params)

        first = cache.get_or_compute(params, compute)
        second = cache.get_or_compute(params, compute)
        assert first == second and len(calls) == 1
        assert cache.path_for(params).name == "grm_p2_r2_m3.json"
        stats = cache.get_stats()
        assert stats["entries"] == 1 and stats["hits"] == 1 and stats["misses"] == 1


def test_cache_detects_corruption():
    with tempfile.TemporaryDirectory() as tmp:
        cache = SpectrumCache(tmp, "use")
        params = CodeParams(3, 1, 2)
        path = cache.store(enumerate_spectrum(params))
        data = json.loads(path.read_text(encoding="utf-8"))
        assert data["checksum"] == payload_checksum({k: v for k, v in data.items() if k != "checksum"})
        # un byte cambiado en un conteo invalida el checksum
        data["counts"][0][1] = "2"
        path.write_text(json.dumps(data), encoding="utf-8")
        try:
            cache.load(params)
        except CacheCorruptError as e:
            assert e.to_dict()["type"] == "cache_corrupt"
        else:
            raise AssertionError("entrada corrupta aceptada")
        path.write_text("{no es json", encoding="utf-8")
        try:
            cache.load(params)
        except CacheCorruptError:
            pass
        else:
            raise AssertionError("JSON ilegible aceptado")


def test_cache_policies():
    with tempfile.TemporaryDirectory() as tmp:
        params = CodeParams(2, 1, 2)
        off = SpectrumCache(tmp, "off")
        off.get_or_compute(params, lambda: enumerate_spectrum(params))
        assert not off.path_for(params).exists()

        refresh = SpectrumCache(tmp, "refresh")
        calls = []
        for _ in range(2):
            refresh.get_or_compute(params, lambda: calls.append(1) or enumerate_spectrum(params))
        assert len(calls) == 2 and refresh.path_for(params).exists()

        # el modo reducido nunca se escribe
        assert SpectrumCache(tmp, "use").store(enumerate_spectrum(CodeParams(2, 2, 3), mode=MODE_REDUCED)) is None
        refresh.delete(params)
        assert not refresh.path_for(params).exists()
    try:
        SpectrumCache(".", "siempre")
    except UsageError:
        pass
    else:
        raise AssertionError("política desconocida aceptada")


def test_dispatch_spectrum_and_csv():
    with tempfile.TemporaryDirectory() as tmp:
        config = temp_config(tmp)
        code, text = run(config, command="spectrum", p=2, r=2, m=2)
        assert code == 0
        assert json.loads(text)["counts"] == [[0, "1"], [1, "4"], [2, "6"], [3, "4"], [4, "1"]]
        code, text = run(config, command="spectrum", p=2, r=1, m=1, format="csv")
        assert code == 0 and text.splitlines() == ["weight,count,relative", "0,1,0", "1,2,1/2^1", "2,1,1"]
        assert (Path(tmp) / "cache" / "grm_p2_r2_m2.json").exists()


def test_dispatch_gap_and_rank():
    with tempfile.TemporaryDirectory() as tmp:
        config = temp_config(tmp)
        code, text = run(config, command="gap", alpha="1/2", p=3, r=1, max_m=3)
        assert code == 0 and json.loads(text)["overall_gap"] == "1/6"
        code, text = run(config, command="rank", p=2, poly="x1*x2+x3*x4", factor_degree=1)
        data = json.loads(text)
        assert code == 0 and (data["status"], data["value"]) == ("exact", 4)


def test_dispatch_error_codes():
    with tempfile.TemporaryDirectory() as tmp:
        config = temp_config(tmp)
        code, text = run(config, command="rank", p=2, poly="x1*x2", factor_degree=1, format="csv")
        assert code == 2 and json.loads(text)["error"]["type"] == "usage_error"
        code, text = run(config, command="spectrum", p=2, r=3, m=8, budget=1000, cache="off")
        error = json.loads(text)["error"]
        assert code == 1 and error["type"] == "budget_exceeded" and error["dim"] == 93
        code, text = run(config, command="weight", p=4, poly="x1")
        assert code == 1 and json.loads(text)["error"]["type"] == "unsupported_prime"
        code, text = run(config, command="weight", p=2, poly="x1 +")
        assert code == 1 and json.loads(text)["error"]["type"] == "parse_error"


def test_dispatch_writes_out_file():
    with tempfile.TemporaryDirectory() as tmp:
        config = temp_config(tmp)
        out = Path(tmp) / "pesos.json"
        code, text = run(config, command="weightset", p=3, r=1, m=2, out=str(out))
        assert code == 0 and out.read_text(encoding="utf-8") == text
        assert json.loads(text)["weights"] == ["0", "2/3^1", "1"]


def test_dispatch_distance():
    with tempfile.TemporaryDirectory() as tmp:
        config = temp_config(tmp)
        code, text = run(config, command="distance", p=2, poly="x1*x2", m=2, subset="1")
        data = json.loads(text)
        assert code == 0 and data["distance"] == "1/4" and data["distinguisher_gap"] == "1/4"
        code, text = run(config, command="distance", p=3, masses="1/3,1/3,1/3", target="1,0,0")
        assert json.loads(text)["distance"] == "2/3"


def test_refresh_recovers_corrupt_entry():
    with tempfile.TemporaryDirectory() as tmp:
        params = CodeParams(2, 2, 3)
        path = SpectrumCache(tmp, "use").store(enumerate_spectrum(params))
        data = json.loads(path.read_text(encoding="utf-8"))
        data["counts"][0][1] = "3"
        path.write_text(json.dumps(data), encoding="utf-8")
        try:
            SpectrumCache(tmp, "use").load(params)
        except CacheCorruptError:
            pass
        else:
            raise AssertionError("entrada corrupta aceptada")
        refresh = SpectrumCache(tmp, "refresh")
        spectrum = refresh.get_or_compute(params, lambda: enumerate_spectrum(params))
        assert spectrum == enumerate_spectrum(params) and refresh.misses == 1
        assert SpectrumCache(tmp, "use").load(params) == spectrum


def test_output_is_deterministic_with_warm_cache():
    with tempfile.TemporaryDirectory() as tmp:
        config = temp_config(tmp)
        for fields in (
            {"command": "spectrum", "p": 3, "r": 1, "m": 2},
            {"command": "gap", "alpha": "1/2", "p": 3, "r": 1, "max_m": 2},
            {"command": "spectrum", "p": 2, "r": 2, "m": 3, "format": "csv"},
        ):
            cold = run(config, **fields)
            warm = run(config, **fields)
            again = run(config, **fields)
            assert cold == warm == again, fields
            assert warm[0] == 0


def test_distance_subset_outside_alphabet_is_usage_error():
    with tempfile.TemporaryDirectory() as tmp:
        config = temp_config(tmp)
        for subset in ("5", "-1", "a,b"):
            code, text = run(config, command="distance", p=3, masses="1/3,1/3,1/3", subset=subset)
            assert code == 2 and json.loads(text)["error"]["type"] == "usage_error", subset


def test_request_validation():
    for fields in (
        {"command": "rank", "p": 2, "poly": "x1"},
        {"command": "gap", "alpha": "0.5", "p": 2, "r": 1, "max_m": 2},
        {"command": "spectrum", "p": 2, "r": 1, "m": 1, "color": "rojo"},
    ):
        try:
            CommandRequest(**fields)
        except ValueError:
            continue
        raise AssertionError(f"{fields} aceptado")


def test_main_exit_codes():
    with tempfile.TemporaryDirectory() as tmp:
        previous = os.environ.get("GRM_CACHE")
        os.environ["GRM_CACHE"] = str(Path(tmp) / "cache")
        try:
            stdout = io.StringIO()
            with contextlib.redirect_stdout(stdout):
                code = cli_main(["rank", "-p", "2", "--poly", "x1"])
            assert code == 2
            assert json.loads(stdout.getvalue())["error"]["type"] == "usage_error"

            stdout = io.StringIO()
            with contextlib.redirect_stdout(stdout):
                code = cli_main(["spectrum", "-p", "2", "-r", "1", "-m", "2"])
            assert code == 0 and json.loads(stdout.getvalue())["dim"] == 3
            assert (Path(tmp) / "cache" / "grm_p2_r1_m2.json").exists()
        finally:
            if previous is None:
                os.environ.pop("GRM_CACHE", None)
            else:
                os.environ["GRM_CACHE"] = previous


def main():
    """Ejecuta todas las pruebas"""
    print("=" * 60)
    print("🧪 GRM - PRUEBAS DE CLI Y CACHÉ")
    print("=" * 60)

    tests = [(name, fn) for name, fn in globals().items() if name.startswith("test_") and callable(fn)]
    failures = 0
    for name, fn in tests:
        try:
            fn()
            print(f"✅ {name}")
        except Exception as e:
            failures += 1
            print(f"❌ {name}: {e}")

    print("=" * 60)
    print(f"📊 {len(tests) - failures}/{len(tests)} pruebas pasaron")
    sys.exit(1 if failures else 0)


if __name__ == "__main__":
    main()
