"""Regenerate src/kappamu/data/catalog.json from the synthesizer."""
from pathlib import Path

from kappamu.catalog import freeze_catalog

if __name__ == "__main__":
    path = Path(__file__).resolve().parents[1] / "src" / "kappamu" / "data" / "catalog.json"
    for e in freeze_catalog(path):
        print(e["n"], e["kappa"], e["mu"], e["scalars"], e["params"])
