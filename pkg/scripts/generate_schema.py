from __future__ import annotations

import json
import os

from src.model import CompiledCircuit, QvtCircuit

SCHEMAS = {
    "circuit_schema.json": QvtCircuit,
    "compiled_circuit_schema.json": CompiledCircuit,
}


def main(out_dir: str = "schema") -> None:
    os.makedirs(out_dir, exist_ok=True)
    for name, model in SCHEMAS.items():
        out_path = os.path.join(out_dir, name)
        with open(out_path, "w", encoding="utf-8") as f:
            json.dump(model.model_json_schema(by_alias=True), f, indent=2, ensure_ascii=False)
            f.write("\n")
        print(f"Wrote schema to {out_path}")


if __name__ == "__main__":
    main()
