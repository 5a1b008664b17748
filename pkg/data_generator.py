import json
import logging
from pathlib import Path

import pandas as pd

from woldlab.gallery import GALLERY, make_example

LOGGER = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent / "data" / "gallery"


class GalleryDataGenerator:
    """Writes the default parameters and expectations of every gallery entry."""

    def __init__(self, out_dir=DATA_DIR):
        self.out_dir = Path(out_dir)

    def generate_entry(self, name):
        entry = GALLERY[name]
        example = make_example(name)
        return {
            "name": name,
            "description": entry.description,
            "params": dict(entry.defaults),
            "expectation": example.expectation,
        }

    def generate_index(self, records):
        """One row per example for quick browsing."""
        rows = [
            {
                "name": r["name"],
                "dim": r["expectation"]["dim"],
                "negative_control": r["expectation"].get("negative_control", False),
                "description": r["description"],
            }
            for r in records.values()
        ]
        return pd.DataFrame(rows)

    def generate_all_data(self):
        records = {}
        for name in GALLERY:
            LOGGER.info("building %s", name)
            records[name] = self.generate_entry(name)
        return records

    def write(self, records):
        self.out_dir.mkdir(parents=True, exist_ok=True)
        for name, record in records.items():
            path = self.out_dir / f"{name}.json"
            path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
            LOGGER.info("saved %s", path.name)
        self.generate_index(records).to_csv(self.out_dir / "index.csv", index=False)


if __name__ == "__main__":
    logging.basicConfig(level=logging.INFO)
    generator = GalleryDataGenerator()
    generator.write(generator.generate_all_data())
