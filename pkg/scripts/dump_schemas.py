"""Write every registered JSON schema to a directory, one file per schema id.

    python3 scripts/dump_schemas.py docs/schemas
"""

import argparse
import json
from pathlib import Path

from lifetrace.schemas import REGISTRY


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", nargs="?", default="docs/schemas")
    out = Path(ap.parse_args().out)
    out.mkdir(parents=True, exist_ok=True)
    for schema_id, schema in sorted(REGISTRY.items()):
        (out / f"{schema_id}.json").write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n")
    print(f"{len(REGISTRY)} schemas written to {out}")


if __name__ == "__main__":
    main()
